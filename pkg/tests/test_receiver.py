import numpy as np
import pytest
from sklearn.base import clone

from wursim import ConfigError, InsufficientDataError
from wursim.channel import complex_noise
from wursim.ofdm import IqBuffer, Numerology, ofdm_modulate
from wursim.receiver import (
    CorrelationDetector,
    CorrelatorConfig,
    DetectionOutcome,
    EnvelopeDetector,
    EnvelopeDetectorConfig,
    calibrate_threshold,
    correlate_detect,
    envelope_detect,
    ook_frame,
    wilson_interval,
)
from wursim.waveform import WusConfig, WusPayload, encode_single_bit_ook, generate_ofdm_wus

NUM = Numerology()
FS = NUM.sample_rate


def ofdm_refs(bits=1, **kw):
    cfg = WusConfig(payload_bits=bits, **kw)
    return [generate_ofdm_wus(WusPayload.from_int(v, bits), cfg).cells for v in range(2**bits)]


class TestEnvelopeDetect:
    def test_noiseless_on_segment(self):
        out = envelope_detect(IqBuffer(np.ones(548), FS), EnvelopeDetectorConfig(), [[0, 548]])
        assert out.detected and out.decoded_bits.tolist() == [1]
        assert out.metric == pytest.approx(1.0)

    def test_all_zero_input(self):
        cfg = EnvelopeDetectorConfig(sync_word=(1, 0, 1))
        out = envelope_detect(IqBuffer(np.zeros(3 * 548), FS), cfg, ook_frame(3))
        assert not out.detected and out.decoded_bits.size == 0
        cfg = EnvelopeDetectorConfig(mode="payload")
        out = envelope_detect(IqBuffer(np.zeros(3 * 548), FS), cfg, ook_frame(3))
        assert out.decoded_bits.tolist() == [0, 0, 0]

    def test_payload_at_20db(self):
        bits = [1, 0, 1, 1]
        cfg = WusConfig(payload_bits=4, symbols_per_bit=1)
        tx = ofdm_modulate(encode_single_bit_ook(WusPayload(np.array(bits)), cfg).cells, NUM)
        p_on = cfg.num_wus_subcarriers / NUM.fft_size
        frac = cfg.num_wus_subcarriers / NUM.fft_size
        noise = complex_noise((1000, tx.size), p_on / (100 * frac), seed=1)
        det = EnvelopeDetectorConfig(decimation=16, threshold=p_on / 2, mode="payload",
                                     lpf_bandwidth_hz=144 * 30e3,
                                     band_center_hz=(180 + 324 - 1) / 2 * 30e3 - 252 * 30e3)
        frame = ook_frame(4)
        ok = sum(np.array_equal(envelope_detect(IqBuffer(tx + n, FS), det, frame).decoded_bits, bits)
                 for n in noise)
        assert ok >= 999

    def test_segment_shorter_than_decimation(self):
        with pytest.raises(ConfigError):
            envelope_detect(IqBuffer(np.ones(8), FS), EnvelopeDetectorConfig(decimation=16),
                            [[0, 8]])

    def test_frame_beyond_buffer(self):
        with pytest.raises(ConfigError):
            envelope_detect(IqBuffer(np.ones(8), FS), EnvelopeDetectorConfig(), [[0, 16]])

    def test_scale_invariance(self, rng):
        x = rng.standard_normal(1096) + 1j * rng.standard_normal(1096)
        frame = ook_frame(2)
        a = envelope_detect(IqBuffer(x, FS), EnvelopeDetectorConfig(threshold=1.0, mode="payload"),
                            frame)
        b = envelope_detect(IqBuffer(3 * x, FS),
                            EnvelopeDetectorConfig(threshold=9.0, mode="payload"), frame)
        np.testing.assert_array_equal(a.decoded_bits, b.decoded_bits)

    @pytest.mark.parametrize("kw", [{"decimation": 0}, {"threshold": 0},
                                    {"threshold_mode": "auto"}, {"mode": "x"},
                                    {"lpf_bandwidth_hz": -1}])
    def test_invalid_config(self, kw):
        with pytest.raises(ConfigError):
            EnvelopeDetectorConfig(**kw)


class TestOokFrame:
    def test_whole_symbols(self):
        np.testing.assert_array_equal(ook_frame(2, symbols_per_bit=4), [[0, 2192], [2192, 4384]])

    def test_segments(self):
        f = ook_frame(4, segments_per_symbol=4)
        np.testing.assert_array_equal(f[:, 0], [0, 137, 274, 411])


class TestCalibrateThreshold:
    def test_quantile_definition(self):
        m = np.arange(1, 101)
        t = calibrate_threshold(m, 0.01)
        assert t == 99
        assert np.sum(m > t) == 1

    def test_median(self, rng):
        m = rng.standard_normal(100_001)
        assert abs(calibrate_threshold(m, 0.5)) < 0.01

    def test_insufficient(self):
        with pytest.raises(InsufficientDataError):
            calibrate_threshold(np.arange(50), 0.01)

    def test_far_within_wilson(self):
        noise = lambda seed, n: np.abs(complex_noise((n,), 1.0, seed)) ** 2  # noqa: E731
        t = calibrate_threshold(noise(1, 20_000), 0.01)
        fresh = noise(2, 20_000)
        lo, hi = wilson_interval(int(np.sum(fresh > t)), fresh.size)
        assert lo <= 0.01 <= hi


class TestCorrelator:
    def test_exact_match(self):
        refs = ofdm_refs(2)
        cfg = CorrelatorConfig(tuple(refs), payload_bits=2)
        out = correlate_detect(IqBuffer(ofdm_modulate(refs[2], NUM), FS), cfg)
        assert out.detected and out.decoded_bits.tolist() == [1, 0]
        assert out.metric == pytest.approx(1.0, abs=1e-12)

    def test_scaled_match(self):
        refs = ofdm_refs(1)
        cfg = CorrelatorConfig(tuple(refs))
        out = correlate_detect(IqBuffer(0.3 * ofdm_modulate(refs[1], NUM), FS), cfg)
        assert out.metric == pytest.approx(1.0, abs=1e-12)
        assert out.decoded_bits.tolist() == [1]

    def test_noise_below_threshold(self):
        refs = ofdm_refs(1)
        cfg = CorrelatorConfig(tuple(refs), detection_threshold=0.5)
        out = correlate_detect(IqBuffer(complex_noise((4 * 548,), 1.0, 3), FS), cfg)
        assert not out.detected and 0 <= out.metric < 0.5

    def test_dimension_mismatch(self):
        cfg = CorrelatorConfig(tuple(ofdm_refs(1)))
        with pytest.raises(ConfigError):
            correlate_detect(IqBuffer(np.zeros(548), FS), cfg)

    def test_reference_validation(self):
        refs = ofdm_refs(1)
        with pytest.raises(ConfigError):
            CorrelatorConfig(())
        with pytest.raises(ConfigError):
            CorrelatorConfig((refs[0], refs[0]))
        with pytest.raises(ConfigError):
            CorrelatorConfig((refs[0], np.zeros_like(refs[0])))


def test_outcome_invariant():
    with pytest.raises(ValueError):
        DetectionOutcome(False, [1])


def test_wilson_interval_contains_estimate():
    lo, hi = wilson_interval(10, 1000)
    assert lo < 0.01 < hi


class TestEstimators:
    def noise(self, n, samples, seed=0, var=1.0):
        return complex_noise((n, samples), var, seed)

    def test_envelope_params_and_clone(self):
        det = EnvelopeDetector(target_far=0.05, decimation=4)
        assert det.get_params()["target_far"] == 0.05
        assert clone(det).get_params() == det.get_params()

    def test_envelope_fit_predict(self):
        # a calibration set much larger than the replay set keeps the
        # threshold's own sampling error below the replay interval
        det = EnvelopeDetector(target_far=0.01, decimation=4).fit(self.noise(20_000, 548))
        far = det.predict(self.noise(4000, 548, seed=1)).mean()
        lo, hi = wilson_interval(int(far * 4000), 4000)
        assert lo <= 0.01 <= hi
        assert det.predict(self.noise(100, 548, seed=2) + 2.0).all()
        scores = det.decision_function(np.full((1, 548), 2.0, dtype=complex))
        assert scores[0] > 0

    def test_envelope_fit_uses_labels(self):
        X = np.vstack([self.noise(1000, 548), self.noise(1000, 548, 1) + 5])
        y = np.r_[np.zeros(1000), np.ones(1000)]
        det = EnvelopeDetector().fit(X, y)
        assert det.threshold_ < 2

    def test_envelope_fixed_threshold(self):
        det = EnvelopeDetector(threshold=0.5).fit(np.zeros((1, 548), dtype=complex))
        assert det.threshold_ == 0.5

    def test_correlator_fit_predict(self):
        refs = ofdm_refs(1)
        det = CorrelationDetector(references=refs, target_far=0.01)
        det.fit(self.noise(1000, 4 * 548))
        tx = np.stack([ofdm_modulate(r, NUM) for r in refs])
        np.testing.assert_array_equal(det.predict(tx), [0, 1])
        assert np.all(det.predict(self.noise(50, 4 * 548, seed=5)) >= -1)
        assert clone(det).get_params()["target_far"] == 0.01

    def test_unfitted(self):
        from sklearn.exceptions import NotFittedError

        with pytest.raises(NotFittedError):
            EnvelopeDetector().predict(np.zeros((1, 548), dtype=complex))
