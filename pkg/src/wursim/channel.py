"""AWGN, tapped-delay-line fading and frequency-offset impairments.

Every stochastic function accepts batched buffers (time on the last axis).
Trial ``t`` of a batch draws from the stream ``(seed, tag, trial_offset + t)``,
so results do not depend on how trials are chunked or distributed.
"""

import csv
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from ._validation import ConfigError, LengthError, ParameterError, make_rng
from .ofdm import IqBuffer

SPEED_OF_LIGHT = 299_792_458.0
NUM_SINUSOIDS = 32

_AWGN_STREAM = 0xA1
_FADING_STREAM = 0xF2


def doppler_from_speed(speed_kmh, carrier_ghz):
    """Maximum Doppler shift in Hz for a UE moving at ``speed_kmh``."""
    if speed_kmh < 0:
        raise ParameterError(f"speed must be non-negative, got {speed_kmh}")
    return (speed_kmh / 3.6) * (carrier_ghz * 1e9) / SPEED_OF_LIGHT


@dataclass(frozen=True)
class TdlProfile:
    """Tap delays (ns) and linear powers normalized to unit total power."""

    delays_ns: tuple
    powers: tuple
    doppler_hz: float = 0.0
    desired_delay_spread_ns: float | None = None

    def __post_init__(self):
        d = np.asarray(self.delays_ns, dtype=float)
        p = np.asarray(self.powers, dtype=float)
        if d.shape != p.shape or d.ndim != 1 or d.size == 0:
            raise ConfigError("delays and powers must be equal-length non-empty sequences")
        if np.any(d < 0) or np.any(p < 0) or p.sum() <= 0:
            raise ConfigError("delays and powers must be non-negative with positive total power")
        if self.doppler_hz < 0:
            raise ConfigError("doppler must be non-negative")
        order = np.argsort(d, kind="stable")
        object.__setattr__(self, "delays_ns", tuple(d[order]))
        object.__setattr__(self, "powers", tuple(p[order] / p.sum()))

    @classmethod
    def from_taps(cls, taps, doppler_hz=0.0):
        """Build from ``(delay_ns, relative_power_db)`` pairs."""
        taps = list(taps)
        return cls(
            tuple(t[0] for t in taps),
            tuple(10 ** (t[1] / 10) for t in taps),
            doppler_hz,
        )

    @classmethod
    def from_csv(cls, path, doppler_hz=0.0):
        """Read a ``delay_ns,power_db`` table (``#`` lines are comments)."""
        with open(path, newline="") as fh:
            rows = [r for r in csv.DictReader(line for line in fh if not line.startswith("#"))]
        return cls.from_taps(((float(r["delay_ns"]), float(r["power_db"])) for r in rows), doppler_hz)

    @classmethod
    def tdl_c(cls, delay_spread_ns=300.0, doppler_hz=0.0):
        """TDL-C with its normalized delays scaled to ``delay_spread_ns``."""
        text = resources.files("wursim").joinpath("data/tdl_c.csv").read_text()
        rows = list(csv.DictReader(line for line in text.splitlines() if not line.startswith("#")))
        taps = [(float(r["normalized_delay"]) * delay_spread_ns, float(r["power_db"])) for r in rows]
        prof = cls.from_taps(taps, doppler_hz)
        return cls(prof.delays_ns, prof.powers, doppler_hz, delay_spread_ns)

    @classmethod
    def flat(cls, doppler_hz=0.0):
        return cls((0.0,), (1.0,), doppler_hz)

    @property
    def num_taps(self):
        return len(self.delays_ns)

    def rms_delay_spread_ns(self):
        d = np.asarray(self.delays_ns)
        p = np.asarray(self.powers)
        mean = np.sum(p * d)
        return float(np.sqrt(np.sum(p * d ** 2) - mean ** 2))

    def to_csv(self, path):
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["delay_ns", "power_db"])
            for d, p in zip(self.delays_ns, self.powers):
                w.writerow([f"{d:.6f}", f"{10 * math.log10(p):.6f}"])


@dataclass(frozen=True)
class ImpairmentConfig:
    snr_db: float = math.inf
    cfo_hz: float = 0.0
    noise_figure_delta_db: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise ParameterError("snr_db must be finite or +inf (noiseless)")

    @property
    def effective_snr_db(self):
        """SNR after the receiver noise-figure penalty."""
        return self.snr_db - self.noise_figure_delta_db


def _trial_indices(samples, trial_offset):
    batch = samples.shape[:-1]
    return trial_offset + np.arange(int(np.prod(batch, dtype=int))), batch


def apply_awgn(iq, snr_db, signal_power="measured", seed=0, occupied_fraction=1.0,
               trial_offset=0):
    """Add circularly-symmetric complex Gaussian noise.

    Parameters
    ----------
    iq : IqBuffer
    snr_db : float
        ``math.inf`` returns an unmodified copy.
    signal_power : "measured" or float
        Reference signal power: the mean sample power of ``iq``, or a nominal
        value supplied by the caller.
    occupied_fraction : float
        Fraction of the sample-rate bandwidth the signal occupies.  The SNR
        is then the in-band ratio: per-sample noise variance is
        ``signal_power / (snr * occupied_fraction)``.
    """
    x = iq.samples
    if x.shape[-1] == 0:
        raise LengthError("cannot add noise to an empty buffer")
    if math.isnan(snr_db) or snr_db == -math.inf:
        raise ParameterError("snr_db must be finite or +inf")
    if snr_db == math.inf:
        return IqBuffer(x.copy(), iq.sample_rate)
    if not 0 < occupied_fraction <= 1:
        raise ParameterError("occupied_fraction must lie in (0, 1]")
    p_ref = float(np.mean(np.abs(x) ** 2)) if signal_power == "measured" else float(signal_power)
    variance = p_ref / (10 ** (snr_db / 10) * occupied_fraction)
    return IqBuffer(x + complex_noise(x.shape, variance, seed, trial_offset), iq.sample_rate)


def complex_noise(shape, variance, seed, trial_offset=0):
    """CN(0, variance) samples; one independent stream per leading-axis row."""
    shape = tuple(shape)
    n = shape[-1]
    rows = int(np.prod(shape[:-1], dtype=int))
    out = np.empty((rows, n), dtype=np.complex128)
    scale = np.sqrt(variance / 2)
    for r in range(rows):
        g = make_rng(seed, _AWGN_STREAM, trial_offset + r).standard_normal((2, n))
        out[r] = scale * (g[0] + 1j * g[1])
    return out.reshape(shape)


def tdl_tap_gains(profile, times_s, seed, trials=1, trial_offset=0):
    """Complex tap gains ``(trials, num_taps, len(times_s))``.

    Each tap is a sum of ``NUM_SINUSOIDS`` complex exponentials with random
    arrival angles (classical Doppler spectrum, maximum shift
    ``profile.doppler_hz``) and CN(0, 1/M) weights, so the gain at any
    instant is exactly complex Gaussian with the tap's average power.
    """
    times_s = np.asarray(times_s, dtype=float)
    k, m = profile.num_taps, NUM_SINUSOIDS
    amp = np.sqrt(np.asarray(profile.powers) / m)
    out = np.empty((trials, k, times_s.size), dtype=np.complex128)
    for t in range(trials):
        rng = make_rng(seed, _FADING_STREAM, trial_offset + t)
        weights = (rng.standard_normal((k, m)) + 1j * rng.standard_normal((k, m))) / np.sqrt(2)
        angles = rng.uniform(0, 2 * np.pi, (k, m))
        if profile.doppler_hz == 0:
            out[t] = (amp[:, None] * weights.sum(axis=1)[:, None]) * np.ones(times_s.size)
            continue
        freqs = profile.doppler_hz * np.cos(angles)
        phase = np.exp(2j * np.pi * freqs[:, :, None] * times_s[None, None, :])
        out[t] = amp[:, None] * np.einsum("km,kmn->kn", weights, phase)
    return out


def _gain_time_grid(n, sample_rate, doppler_hz, max_phase_step=1e-3):
    """Sparse evaluation instants; gains are linearly interpolated between them."""
    if doppler_hz == 0 or n == 1:
        return np.array([0]), True
    step = max(1, int(max_phase_step * sample_rate / (2 * np.pi * doppler_hz)))
    idx = np.unique(np.r_[np.arange(0, n, step), n - 1])
    return idx, idx.size == 1


def apply_tdl(iq, profile, seed=0, trial_offset=0):
    """Pass ``iq`` through a time-varying tapped delay line.

    ``y[n] = sum_k h_k[n] x[n - d_k]`` with ``d_k`` the nearest-sample tap
    delay.  Tap gains are evaluated where their phase has moved by at most
    1 mrad and interpolated linearly in between.
    """
    x = iq.samples
    n = x.shape[-1]
    fs = iq.sample_rate
    delays = np.rint(np.asarray(profile.delays_ns) * 1e-9 * fs).astype(int)
    if delays.max() >= n:
        raise ConfigError(
            f"maximum tap delay of {delays.max()} samples exceeds the {n}-sample buffer"
        )
    trials, batch = _trial_indices(x, trial_offset)
    flat = x.reshape(-1, n)
    idx, static = _gain_time_grid(n, fs, profile.doppler_hz)
    gains = tdl_tap_gains(profile, idx / fs, seed, trials=flat.shape[0], trial_offset=trial_offset)
    y = np.zeros_like(flat)
    for k, d in enumerate(delays):
        if static:
            h = gains[:, k, :1]
        else:
            h = _interp_rows(np.arange(d, n), idx, gains[:, k])
        y[:, d:] += h * flat[:, : n - d]
    return IqBuffer(y.reshape(batch + (n,)), fs)


def _interp_rows(xq, xp, fp):
    """Row-wise linear interpolation of complex ``fp`` (rows share ``xp``)."""
    pos = np.clip(np.searchsorted(xp, xq, side="right") - 1, 0, xp.size - 2)
    w = (xq - xp[pos]) / (xp[pos + 1] - xp[pos])
    return fp[:, pos] * (1 - w) + fp[:, pos + 1] * w


def apply_cfo(iq, cfo_hz):
    """Rotate sample ``n`` by ``exp(2j*pi*cfo*n/fs)``."""
    x = iq.samples
    if cfo_hz == 0:
        return IqBuffer(x.copy(), iq.sample_rate)
    n = np.arange(x.shape[-1])
    return IqBuffer(x * np.exp(2j * np.pi * cfo_hz * n / iq.sample_rate), iq.sample_rate)
