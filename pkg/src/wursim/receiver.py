"""Wake-up receivers: square-law envelope detection and coherent correlation.

Both detectors exist as plain functions operating on one :class:`IqBuffer`
and as sklearn-compatible estimators operating on stacks of frames, where
``fit`` calibrates the decision threshold on noise-only frames.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binomtest
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import (
    ConfigError,
    InsufficientDataError,
    ParameterError,
    check_complex_array,
    check_probability,
)
from .ofdm import SUBCARRIERS_PER_PRB, IqBuffer, Numerology, ResourceGrid, ofdm_demodulate


@dataclass(frozen=True)
class EnvelopeDetectorConfig:
    """Square-law OOK detector.

    ``lpf_bandwidth_hz`` is the two-sided width of the front-end channel
    filter centred at ``band_center_hz`` (``None`` disables it).  The
    post-detection low-pass filter is a moving average over ``decimation``
    samples, read out once per ``decimation`` samples.
    """

    decimation: int = 1
    threshold: float = 0.5
    threshold_mode: str = "fixed"
    lpf_bandwidth_hz: float | None = None
    band_center_hz: float = 0.0
    mode: str = "sync"
    sync_word: tuple = (1,)

    def __post_init__(self):
        if self.decimation < 1:
            raise ConfigError("decimation must be >= 1")
        if self.threshold_mode not in ("fixed", "calibrated"):
            raise ConfigError("threshold_mode must be 'fixed' or 'calibrated'")
        if self.threshold_mode == "fixed" and not self.threshold > 0:
            raise ConfigError("a fixed threshold must be positive")
        if self.mode not in ("sync", "payload"):
            raise ConfigError("mode must be 'sync' or 'payload'")
        if self.lpf_bandwidth_hz is not None and self.lpf_bandwidth_hz <= 0:
            raise ConfigError("lpf_bandwidth_hz must be positive")


@dataclass(frozen=True)
class CorrelatorConfig:
    """Coherent correlator over per-payload reference grids.

    Correlation is coherent inside blocks of ``block_prbs`` PRBs by
    ``block_symbols`` symbols (``None``: all symbols) and the block
    magnitudes are combined non-coherently, which tolerates the phase
    rotation a dispersive channel puts across a 5 MHz band.
    """

    references: tuple
    detection_threshold: float = 0.5
    block_prbs: int = 1
    block_symbols: int | None = None
    payload_bits: int | None = None

    def __post_init__(self):
        refs = tuple(r.cells if isinstance(r, ResourceGrid) else np.asarray(r, dtype=complex)
                     for r in self.references)
        if not refs:
            raise ConfigError("at least one reference grid is required")
        if any(r.shape != refs[0].shape for r in refs):
            raise ConfigError("reference grids must share one shape")
        for i in range(len(refs)):
            if not np.any(refs[i]):
                raise ConfigError(f"reference {i} is all zero")
            for j in range(i):
                if np.array_equal(refs[i], refs[j]):
                    raise ConfigError(f"references {j} and {i} are identical")
        if not 0 <= self.detection_threshold <= 1:
            raise ConfigError("detection_threshold must lie in [0, 1]")
        object.__setattr__(self, "references", refs)


@dataclass
class DetectionOutcome:
    detected: bool
    decoded_bits: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    metric: float = 0.0

    def __post_init__(self):
        self.decoded_bits = np.asarray(self.decoded_bits, dtype=np.int64)
        if self.decoded_bits.size and not self.detected:
            raise ValueError("decoded bits are only reported for detections")


@dataclass
class ErrorRates:
    missed_detection: float
    false_alarm: float
    trials: int
    confidence_halfwidth: float
    md_interval: tuple = (0.0, 1.0)
    far_interval: tuple = (0.0, 1.0)
    snr_db: float = float("nan")


def wilson_interval(successes, trials, confidence=0.95):
    if trials <= 0:
        raise ParameterError("trials must be positive")
    ci = binomtest(int(successes), int(trials)).proportion_ci(confidence, method="wilson")
    return float(ci.low), float(ci.high)


def ook_frame(num_bits, symbols_per_bit=1, segments_per_symbol=1, num=Numerology()):
    """``(num_segments, 2)`` start/stop sample indices of OOK decision segments.

    With one segment per symbol each bit spans ``symbols_per_bit`` whole
    symbols; otherwise segments split each symbol span as the multi-bit
    target mask does.
    """
    span = num.symbol_length
    if segments_per_symbol == 1:
        starts = np.arange(num_bits) * symbols_per_bit * span
        return np.stack([starts, starts + symbols_per_bit * span], axis=1)
    edges = (np.arange(segments_per_symbol + 1) * span) // segments_per_symbol
    nsym = -(-num_bits // segments_per_symbol)
    starts = (np.arange(nsym)[:, None] * span + edges[None, :-1]).ravel()
    stops = (np.arange(nsym)[:, None] * span + edges[None, 1:]).ravel()
    return np.stack([starts, stops], axis=1)[:num_bits]


def _band_filter(x, fs, bandwidth, center):
    freqs = np.fft.fftfreq(x.shape[-1], d=1 / fs)
    keep = np.abs(freqs - center) <= bandwidth / 2
    return np.fft.ifft(np.fft.fft(x, axis=-1) * keep, axis=-1)


def segment_energies(samples, cfg, frame, sample_rate):
    """Mean post-detection power per segment, shape ``(..., num_segments)``."""
    frame = np.asarray(frame, dtype=int).reshape(-1, 2)
    x = np.asarray(samples, dtype=np.complex128)
    if frame.max() > x.shape[-1] or frame.min() < 0:
        raise ConfigError("frame layout exceeds the buffer")
    if cfg.lpf_bandwidth_hz is not None:
        x = _band_filter(x, sample_rate, cfg.lpf_bandwidth_hz, cfg.band_center_hz)
    power = np.abs(x) ** 2
    d = cfg.decimation
    out = np.empty(x.shape[:-1] + (frame.shape[0],))
    for i, (a, b) in enumerate(frame):
        blocks = (b - a) // d
        if blocks < 1:
            raise ConfigError(f"segment of {b - a} samples is shorter than decimation {d}")
        filtered = power[..., a:a + blocks * d].reshape(x.shape[:-1] + (blocks, d)).mean(axis=-1)
        out[..., i] = filtered.mean(axis=-1)
    return out


def _sync_statistic(energies, sync_word):
    on = np.asarray(sync_word, dtype=bool)
    if on.size != energies.shape[-1]:
        raise ConfigError(f"sync word has {on.size} bits but the frame has {energies.shape[-1]} segments")
    if not on.any():
        return -energies.max(axis=-1)
    return energies[..., on].min(axis=-1)


def envelope_detect(iq, cfg, frame):
    """Square-law detection of one OOK frame.

    Per segment the bit decision is ``mean filtered power > threshold``.  In
    sync mode the frame is detected when the decisions reproduce
    ``cfg.sync_word``; the reported metric is the weakest ON-segment power.
    In payload mode detection is unconditional and the metric is the
    strongest segment power.
    """
    energies = segment_energies(iq.samples, cfg, frame, iq.sample_rate)
    if energies.ndim != 1:
        raise ConfigError("envelope_detect expects one frame; use EnvelopeDetector for batches")
    bits = (energies > cfg.threshold).astype(np.int64)
    if cfg.mode == "payload":
        return DetectionOutcome(True, bits, float(energies.max()))
    metric = float(_sync_statistic(energies, cfg.sync_word))
    detected = bool(np.array_equal(bits, np.asarray(cfg.sync_word)))
    return DetectionOutcome(detected, bits if detected else [], metric)


def calibrate_threshold(noise_only_metrics, target_far):
    """Empirical ``1 - target_far`` quantile of noise-only detector metrics.

    With ``metric > threshold`` as the detection rule, exactly
    ``floor(n * target_far)`` of the calibration metrics exceed the result.
    """
    target_far = check_probability(target_far, "target_far", open_interval=True)
    m = np.asarray(noise_only_metrics, dtype=float).ravel()
    if m.size * target_far < 1:
        raise InsufficientDataError(
            f"{m.size} samples cannot resolve a false-alarm rate of {target_far}"
        )
    return float(np.quantile(m, 1 - target_far, method="inverted_cdf"))


def _support_blocks(refs, block_prbs, block_symbols):
    """Boolean block masks ``(num_blocks, S, K)`` over the references' support."""
    support = np.any(np.stack(refs) != 0, axis=0)
    cols = np.flatnonzero(support.any(axis=0))
    s = support.shape[0]
    width = block_prbs * SUBCARRIERS_PER_PRB
    bs = s if block_symbols is None else block_symbols
    masks = []
    for c0 in range(0, cols.size, width):
        for t0 in range(0, s, bs):
            mask = np.zeros_like(support)
            mask[t0:t0 + bs, cols[c0:c0 + width]] = True
            mask &= support
            if mask.any():
                masks.append(mask)
    return np.stack(masks)


def correlation_metrics(grids, cfg):
    """Normalized block-wise correlation against every reference.

    For candidate ``s`` and received ``r`` the metric is
    ``sum_b |<r_b, s_b>|^2 / sum_b ||r_b||^2 ||s_b||^2``, which lies in
    ``[0, 1]``, equals 1 when ``r`` is a scaled copy of ``s``, and is
    invariant to the scale of ``r``.  Returns ``(..., num_references)``.
    """
    refs = np.stack(cfg.references)
    grids = np.asarray(grids, dtype=np.complex128)
    if grids.shape[-2:] != refs.shape[-2:]:
        raise ConfigError(f"received grid shape {grids.shape[-2:]} != reference shape {refs.shape[-2:]}")
    blocks = _support_blocks(cfg.references, cfg.block_prbs, cfg.block_symbols).astype(float)
    batch = grids.shape[:-2]
    r = grids.reshape((-1,) + refs.shape[-2:])
    r_energy = np.einsum("bsk,tsk->tb", blocks, np.abs(r) ** 2)
    s_energy = np.einsum("bsk,csk->cb", blocks, np.abs(refs) ** 2)
    inner = np.einsum("bsk,tsk,csk->tcb", blocks, r, refs.conj(), optimize=True)
    num = np.sum(np.abs(inner) ** 2, axis=-1)
    den = np.einsum("tb,cb->tc", r_energy, s_energy)
    with np.errstate(invalid="ignore", divide="ignore"):
        metric = np.where(den > 0, num / den, 0.0)
    return metric.reshape(batch + (refs.shape[0],))


def _index_bits(index, payload_bits):
    if payload_bits is None:
        return np.zeros(0, dtype=np.int64)
    return np.array([(index >> (payload_bits - 1 - i)) & 1 for i in range(payload_bits)])


def correlate_detect(iq, cfg, num=Numerology()):
    """Demodulate ``iq`` and pick the best-matching reference.

    Detected when the largest normalized correlation exceeds
    ``cfg.detection_threshold``; the decoded payload is that reference's
    index (rendered as bits when ``cfg.payload_bits`` is set).
    """
    k = cfg.references[0].shape[1]
    expected = cfg.references[0].shape[0] * num.symbol_length
    if iq.samples.ndim != 1 or len(iq) != expected:
        raise ConfigError(f"expected a single frame of {expected} samples, got shape {iq.samples.shape}")
    grid = ofdm_demodulate(iq.samples, num, k)
    metrics = correlation_metrics(grid, cfg)
    best = int(np.argmax(metrics))
    metric = float(metrics[best])
    if metric > cfg.detection_threshold:
        bits = _index_bits(best, cfg.payload_bits)
        if not bits.size:
            bits = np.array([best])
        return DetectionOutcome(True, bits, metric)
    return DetectionOutcome(False, [], metric)


class EnvelopeDetector(ClassifierMixin, BaseEstimator):
    """Batch square-law OOK detector with a noise-calibrated threshold.

    Parameters
    ----------
    frame : array-like of shape (n_segments, 2)
        Decision segment start/stop samples, e.g. from :func:`ook_frame`.
    sync_word : tuple of int
        Expected segment pattern; a frame is detected when every segment
        decision matches it.
    target_far : float
        False-alarm rate used by ``fit``.
    threshold : float or None
        Fixed power threshold; when set, ``fit`` leaves it untouched.
    """

    def __init__(self, frame=None, sync_word=(1,), target_far=0.01, threshold=None,
                 decimation=1, lpf_bandwidth_hz=None, band_center_hz=0.0,
                 sample_rate=Numerology().sample_rate):
        self.frame = frame
        self.sync_word = sync_word
        self.target_far = target_far
        self.threshold = threshold
        self.decimation = decimation
        self.lpf_bandwidth_hz = lpf_bandwidth_hz
        self.band_center_hz = band_center_hz
        self.sample_rate = sample_rate

    def _config(self, threshold):
        return EnvelopeDetectorConfig(
            decimation=self.decimation,
            threshold=threshold,
            threshold_mode="calibrated",
            lpf_bandwidth_hz=self.lpf_bandwidth_hz,
            band_center_hz=self.band_center_hz,
            sync_word=tuple(self.sync_word),
        )

    def _frame(self, n):
        return np.array([[0, n]]) if self.frame is None else np.asarray(self.frame)

    def segment_energies(self, X):
        X = check_complex_array(X, "X", ndim=2)
        return segment_energies(X, self._config(1.0), self._frame(X.shape[1]), self.sample_rate)

    def fit(self, X, y=None):
        """Calibrate the threshold on the noise-only rows of ``X`` (``y == 0``)."""
        X = check_complex_array(X, "X", ndim=2)
        self.classes_ = np.array([0, 1])
        if self.threshold is not None:
            self.threshold_ = float(self.threshold)
            return self
        noise = X if y is None else X[np.asarray(y) == 0]
        metrics = _sync_statistic(self.segment_energies(noise), self.sync_word)
        self.threshold_ = calibrate_threshold(metrics, self.target_far)
        return self

    def decision_function(self, X):
        check_is_fitted(self, "threshold_")
        return _sync_statistic(self.segment_energies(X), self.sync_word) - self.threshold_

    def predict(self, X):
        check_is_fitted(self, "threshold_")
        bits = self.segment_energies(X) > self.threshold_
        return np.all(bits == np.asarray(self.sync_word, dtype=bool), axis=-1).astype(int)


class CorrelationDetector(ClassifierMixin, BaseEstimator):
    """Batch coherent correlator; ``predict`` returns the decoded reference
    index, or -1 when nothing crosses the calibrated threshold."""

    def __init__(self, references=None, target_far=0.01, threshold=None, block_prbs=1,
                 block_symbols=None, subcarrier_spacing_khz=30.0, fft_size=512, cp_length=36):
        self.references = references
        self.target_far = target_far
        self.threshold = threshold
        self.block_prbs = block_prbs
        self.block_symbols = block_symbols
        self.subcarrier_spacing_khz = subcarrier_spacing_khz
        self.fft_size = fft_size
        self.cp_length = cp_length

    def _config(self, threshold=0.5):
        return CorrelatorConfig(tuple(self.references), threshold, self.block_prbs, self.block_symbols)

    def _num(self):
        return Numerology(self.subcarrier_spacing_khz, self.fft_size, self.cp_length)

    def correlation_metrics(self, X):
        X = check_complex_array(X, "X", ndim=2)
        cfg = self._config()
        grids = ofdm_demodulate(X, self._num(), cfg.references[0].shape[1])
        return correlation_metrics(grids, cfg)

    def fit(self, X, y=None):
        X = check_complex_array(X, "X", ndim=2)
        self.classes_ = np.arange(-1, len(self.references))
        if self.threshold is not None:
            self.threshold_ = float(self.threshold)
            return self
        noise = X if y is None else X[np.asarray(y) == -1]
        self.threshold_ = calibrate_threshold(self.correlation_metrics(noise).max(axis=-1),
                                              self.target_far)
        return self

    def decision_function(self, X):
        check_is_fitted(self, "threshold_")
        return self.correlation_metrics(X).max(axis=-1) - self.threshold_

    def predict(self, X):
        check_is_fitted(self, "threshold_")
        m = self.correlation_metrics(X)
        best = np.argmax(m, axis=-1)
        return np.where(m.max(axis=-1) > self.threshold_, best, -1)
