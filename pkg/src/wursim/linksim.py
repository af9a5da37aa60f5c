"""Monte-Carlo link simulation: waveform -> channel -> detector.

SNR is the in-band ratio: ON-signal power over the noise power that falls
inside the WUS allocation, which with unit-power cells is also the per-RE
SNR seen by the correlator.  Thresholds are calibrated on noise-only frames
for each SNR point so that both receivers operate at the same false-alarm
rate.  Channel and noise draws are keyed by trial index (common random
numbers across SNR points).
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._validation import ParameterError, BracketError, check_probability
from .channel import (
    TdlProfile,
    apply_awgn,
    apply_cfo,
    apply_tdl,
    complex_noise,
    doppler_from_speed,
)
from .ofdm import IqBuffer, Numerology, ofdm_demodulate, ofdm_modulate
from .receiver import (
    CorrelatorConfig,
    EnvelopeDetectorConfig,
    ErrorRates,
    _sync_statistic,
    calibrate_threshold,
    correlation_metrics,
    ook_frame,
    segment_energies,
    wilson_interval,
)
from .waveform import (
    WusConfig,
    WusPayload,
    build_target_mask,
    encode_single_bit_ook,
    generate_multibit_ook,
    generate_ofdm_wus,
    sequence_codebook,
)

_SIGNAL_NOISE = 1
_CAL_NOISE = 2
_FAR_NOISE = 3


@dataclass(frozen=True)
class LinkScenario:
    """One link-level experiment.

    ``waveform`` is ``"ook"`` (single- or multi-bit OOK into the envelope
    detector) or ``"ofdm"`` (sequence WUS into the correlator).  ``channel``
    is ``"awgn"`` or ``"tdl_c"``.
    """

    waveform: str = "ook"
    wus: WusConfig = field(default_factory=WusConfig)
    numerology: Numerology = field(default_factory=Numerology)
    payload_value: int | None = None
    channel: str = "tdl_c"
    delay_spread_ns: float = 300.0
    speed_kmh: float = 3.0
    carrier_ghz: float = 2.6
    cfo_hz: float = 0.0
    snr_db: float = 0.0
    noise_figure_delta_db: float = 0.0
    target_far: float = 0.01
    trials: int = 2000
    calibration_trials: int = 2000
    chunk_size: int = 500
    block_prbs: int = 1
    decimation: int = 16
    seed: int | None = 0

    def __post_init__(self):
        if self.waveform not in ("ook", "ofdm"):
            raise ParameterError("waveform must be 'ook' or 'ofdm'")
        if self.channel not in ("awgn", "tdl_c"):
            raise ParameterError("channel must be 'awgn' or 'tdl_c'")
        if self.seed is None:
            raise ParameterError("a seed is required for link simulations")
        check_probability(self.target_far, "target_far", open_interval=True)

    @property
    def payload(self):
        bits = self.wus.payload_bits
        value = (1 << bits) - 1 if self.payload_value is None else self.payload_value
        return WusPayload.from_int(value, bits)

    def profile(self):
        fd = doppler_from_speed(self.speed_kmh, self.carrier_ghz)
        if self.channel == "awgn":
            return None
        return TdlProfile.tdl_c(self.delay_spread_ns, fd)


def transmit_grid(scenario):
    """Resource grid of the WUS described by ``scenario``."""
    cfg, num = scenario.wus, scenario.numerology
    payload = scenario.payload
    if scenario.waveform == "ofdm":
        return generate_ofdm_wus(payload, cfg, num)
    if cfg.segments_per_symbol == 1:
        return encode_single_bit_ook(payload, cfg, num)
    return generate_multibit_ook(build_target_mask(payload, cfg, num), cfg, num)


def _frame(scenario):
    cfg = scenario.wus
    return ook_frame(cfg.payload_bits, cfg.symbols_per_bit, cfg.segments_per_symbol,
                     scenario.numerology)


def _envelope_config(scenario):
    num, cfg = scenario.numerology, scenario.wus
    bw = cfg.num_wus_subcarriers * num.subcarrier_spacing_khz * 1e3
    wus = cfg.wus_slice(num)
    offsets = np.arange(cfg.grid_width(num)) - cfg.grid_width(num) // 2
    center = offsets[wus].mean() * num.subcarrier_spacing_khz * 1e3
    return EnvelopeDetectorConfig(
        decimation=scenario.decimation,
        threshold=1.0,
        threshold_mode="calibrated",
        lpf_bandwidth_hz=bw,
        band_center_hz=center,
        sync_word=tuple(int(b) for b in scenario.payload.bits),
    )


def _correlator_config(scenario):
    cfg, num = scenario.wus, scenario.numerology
    refs = tuple(
        generate_ofdm_wus(WusPayload.from_int(v, cfg.payload_bits), cfg, num).cells
        for v in range(len(sequence_codebook(cfg)))
    )
    return CorrelatorConfig(refs, 0.5, scenario.block_prbs, None, cfg.payload_bits)


class _Receiver:
    """Per-scenario statistic/decision helpers over batches of frames."""

    def __init__(self, scenario):
        self.scenario = scenario
        num = scenario.numerology
        self.fs = num.sample_rate
        if scenario.waveform == "ook":
            self.env_cfg = _envelope_config(scenario)
            self.frame = _frame(scenario)
        else:
            self.cor_cfg = _correlator_config(scenario)
            self.k = self.cor_cfg.references[0].shape[1]

    def noise_statistic(self, x):
        if self.scenario.waveform == "ook":
            e = segment_energies(x, self.env_cfg, self.frame, self.fs)
            return _sync_statistic(e, self.env_cfg.sync_word)
        grids = ofdm_demodulate(x, self.scenario.numerology, self.k)
        return correlation_metrics(grids, self.cor_cfg).max(axis=-1)

    def noiseless_threshold(self, tx):
        """Decision level for a noise-free frame: midway between the weakest
        ON and the strongest OFF segment (OFF segments of multi-bit OOK carry
        leakage), or half the metric of a perfect match."""
        if self.scenario.waveform == "ofdm":
            return 0.5
        e = segment_energies(tx, self.env_cfg, self.frame, self.fs)
        on = np.asarray(self.env_cfg.sync_word, dtype=bool)
        floor = e[~on].max() if not on.all() else 0.0
        return float((e[on].min() + floor) / 2) if on.any() else float(e.max() + 1.0)

    def correct(self, x, threshold):
        """True where the frame is detected with the transmitted payload."""
        if self.scenario.waveform == "ook":
            e = segment_energies(x, self.env_cfg, self.frame, self.fs)
            bits = e > threshold
            return np.all(bits == np.asarray(self.env_cfg.sync_word, dtype=bool), axis=-1)
        grids = ofdm_demodulate(x, self.scenario.numerology, self.k)
        m = correlation_metrics(grids, self.cor_cfg)
        return (m.max(axis=-1) > threshold) & (np.argmax(m, axis=-1) == self.scenario.payload.value)


def _chunks(total, size):
    for start in range(0, total, size):
        yield start, min(size, total - start)


def _noise_variance(scenario):
    """Per-sample noise variance putting in-band SNR at the effective SNR."""
    cfg, num = scenario.wus, scenario.numerology
    p_on = cfg.num_wus_subcarriers / num.fft_size
    frac = cfg.num_wus_subcarriers / num.fft_size
    snr = 10 ** ((scenario.snr_db - scenario.noise_figure_delta_db) / 10)
    return p_on / (snr * frac), p_on, frac


def run_link_sim(scenario):
    """Missed-detection and false-alarm rates for one SNR point.

    The detector threshold is the empirical ``1 - target_far`` quantile of
    ``calibration_trials`` noise-only frames; the false-alarm rate is then
    re-measured on ``trials`` fresh noise-only frames.  A trial counts as a
    miss unless the transmitted payload is detected and decoded correctly.
    """
    if scenario.trials < 1:
        raise ParameterError("trials must be >= 1")
    num = scenario.numerology
    grid = transmit_grid(scenario)
    tx = ofdm_modulate(grid.cells, num)
    n = tx.size
    rx = _Receiver(scenario)
    noiseless = math.isinf(scenario.snr_db)
    variance, p_on, frac = (0.0, None, None) if noiseless else _noise_variance(scenario)
    seed = scenario.seed

    if noiseless:
        threshold = rx.noiseless_threshold(tx)
    else:
        cal = np.concatenate([
            rx.noise_statistic(complex_noise((cnt, n), variance, (seed, _CAL_NOISE), start))
            for start, cnt in _chunks(scenario.calibration_trials, scenario.chunk_size)
        ])
        threshold = calibrate_threshold(cal, scenario.target_far)

    profile = scenario.profile()
    misses = 0
    false_alarms = 0
    for start, cnt in _chunks(scenario.trials, scenario.chunk_size):
        iq = IqBuffer(np.broadcast_to(tx, (cnt, n)).copy(), num.sample_rate)
        if profile is not None:
            iq = apply_tdl(iq, profile, seed=seed, trial_offset=start)
        if scenario.cfo_hz:
            iq = apply_cfo(iq, scenario.cfo_hz)
        if not noiseless:
            iq = apply_awgn(iq, scenario.snr_db - scenario.noise_figure_delta_db, p_on,
                            seed=(seed, _SIGNAL_NOISE), occupied_fraction=frac,
                            trial_offset=start)
            noise = complex_noise((cnt, n), variance, (seed, _FAR_NOISE), start)
            false_alarms += int(np.sum(rx.noise_statistic(noise) > threshold))
        misses += int(np.sum(~rx.correct(iq.samples, threshold)))

    md_ci = wilson_interval(misses, scenario.trials)
    far_ci = wilson_interval(false_alarms, scenario.trials)
    return ErrorRates(
        missed_detection=misses / scenario.trials,
        false_alarm=false_alarms / scenario.trials,
        trials=scenario.trials,
        confidence_halfwidth=(md_ci[1] - md_ci[0]) / 2,
        md_interval=md_ci,
        far_interval=far_ci,
        snr_db=scenario.snr_db,
    )


def snr_sweep(scenario, snrs_db):
    return [run_link_sim(replace(scenario, snr_db=float(s))) for s in snrs_db]


def required_snr(scenario, target_md=0.01, target_far=0.01, lo_db=-30.0, hi_db=20.0,
                 step_db=0.5):
    """Smallest SNR on a ``step_db`` grid whose missed-detection rate is at
    most ``target_md`` with thresholds calibrated to ``target_far``.

    Bisection over the grid; ``lo_db`` must miss the target and ``hi_db``
    must meet it.
    """
    check_probability(target_md, "target_md", open_interval=True)
    scenario = replace(scenario, target_far=target_far)
    grid = np.arange(lo_db, hi_db + step_db / 2, step_db)
    cache = {}

    def meets(i):
        if i not in cache:
            cache[i] = run_link_sim(replace(scenario, snr_db=float(grid[i]))).missed_detection <= target_md
        return cache[i]

    lo, hi = 0, grid.size - 1
    if not meets(hi):
        raise BracketError(f"missed detection target {target_md} not met at {grid[hi]} dB")
    if meets(lo):
        raise BracketError(f"target already met at the lower bound {grid[lo]} dB")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if meets(mid):
            hi = mid
        else:
            lo = mid
    return float(grid[hi])
