import math
from dataclasses import replace

import numpy as np
import pytest

from wursim import BracketError, ParameterError
from wursim.linksim import LinkScenario, required_snr, run_link_sim, snr_sweep, transmit_grid
from wursim.receiver import wilson_interval
from wursim.waveform import WusConfig

AWGN_OOK = LinkScenario(waveform="ook", channel="awgn", trials=500, calibration_trials=2000,
                        seed=1)
AWGN_OFDM = replace(AWGN_OOK, waveform="ofdm")


def overlap(a, b):
    return a[0] <= b[1] and b[0] <= a[1]


class TestRunLinkSim:
    @pytest.mark.parametrize("kind", ["ook", "ofdm"])
    def test_noiseless_never_misses(self, kind):
        r = run_link_sim(replace(AWGN_OOK, waveform=kind, snr_db=math.inf, trials=50))
        assert r.missed_detection == 0

    def test_zero_trials(self):
        with pytest.raises(ParameterError):
            run_link_sim(replace(AWGN_OOK, trials=0))

    def test_seed_required(self):
        with pytest.raises(ParameterError):
            replace(AWGN_OOK, seed=None)

    def test_reproducible(self):
        s = replace(AWGN_OOK, channel="tdl_c", snr_db=-5.0, trials=200)
        assert run_link_sim(s) == run_link_sim(s)

    def test_independent_of_chunking(self):
        s = replace(AWGN_OOK, channel="tdl_c", snr_db=-5.0, trials=300)
        assert run_link_sim(replace(s, chunk_size=64)) == run_link_sim(replace(s, chunk_size=300))

    def test_halving_trials_consistent(self):
        s = replace(AWGN_OOK, channel="tdl_c", snr_db=-3.0, trials=1000)
        full, half = run_link_sim(s), run_link_sim(replace(s, trials=500))
        assert overlap(full.md_interval, half.md_interval)
        assert overlap(full.far_interval, half.far_interval)

    def test_rates_are_probabilities(self):
        r = run_link_sim(replace(AWGN_OOK, snr_db=-10.0))
        assert 0 <= r.missed_detection <= 1 and 0 <= r.false_alarm <= 1
        assert r.md_interval[0] <= r.missed_detection <= r.md_interval[1]
        assert r.confidence_halfwidth > 0

    @pytest.mark.parametrize("kind", ["ook", "ofdm"])
    def test_far_controlled(self, kind):
        s = replace(AWGN_OOK, waveform=kind, snr_db=0.0, trials=4000, calibration_trials=20_000)
        r = run_link_sim(s)
        assert r.far_interval[0] <= 0.01 <= r.far_interval[1]

    def test_md_monotone_in_snr_over_tdl(self):
        rates = snr_sweep(replace(AWGN_OOK, channel="tdl_c", trials=400), [-10, -5, 0, 5, 10])
        for lo, hi in zip(rates, rates[1:]):
            assert hi.missed_detection <= lo.missed_detection or overlap(hi.md_interval,
                                                                         lo.md_interval)
        assert rates[0].missed_detection > rates[-1].missed_detection

    def test_nf_penalty_shifts_snr(self):
        a = run_link_sim(replace(AWGN_OOK, snr_db=-4.0, noise_figure_delta_db=3.0))
        b = run_link_sim(replace(AWGN_OOK, snr_db=-7.0))
        assert a == replace(b, snr_db=-4.0)

    def test_multibit_ook_link(self):
        wus = WusConfig(payload_bits=4, segments_per_symbol=4, symbols_per_bit=1)
        s = replace(AWGN_OOK, wus=wus, payload_value=0b1011, snr_db=math.inf, trials=20)
        assert transmit_grid(s).num_symbols == 1
        assert run_link_sim(s).missed_detection == 0


class TestCorrelatorVersusEnvelope:
    def test_payload_error_vs_envelope_md(self):
        ook = run_link_sim(replace(AWGN_OOK, snr_db=0.0, trials=10_000))
        ofdm = run_link_sim(replace(AWGN_OFDM, snr_db=0.0, trials=10_000))
        assert ofdm.missed_detection <= ook.missed_detection
        # both are error-free at 0 dB in-band SNR; the ordering is strict
        # once the envelope detector starts missing
        ook = run_link_sim(replace(AWGN_OOK, snr_db=-8.0, trials=2000))
        ofdm = run_link_sim(replace(AWGN_OFDM, snr_db=-8.0, trials=2000))
        assert ofdm.missed_detection < ook.missed_detection
        assert ofdm.md_interval[1] < ook.md_interval[0]


@pytest.fixture(scope="module")
def ook_snr():
    return required_snr(AWGN_OOK, 0.01, 0.01, lo_db=-20, hi_db=10)


class TestRequiredSnr:
    def test_self_consistent(self, ook_snr):
        assert math.isfinite(ook_snr)
        assert ook_snr * 2 == round(ook_snr * 2)
        assert run_link_sim(replace(AWGN_OOK, snr_db=ook_snr + 1)).missed_detection <= 0.01

    def test_correlator_needs_less(self, ook_snr):
        assert required_snr(AWGN_OFDM, 0.01, 0.01, lo_db=-20, hi_db=10) <= ook_snr

    def test_monotone_in_target(self, ook_snr):
        assert required_snr(AWGN_OOK, 0.1, 0.01, lo_db=-20, hi_db=10) <= ook_snr

    def test_unbracketed(self):
        with pytest.raises(BracketError):
            required_snr(AWGN_OOK, 0.01, 0.01, lo_db=-30, hi_db=-20)
        with pytest.raises(BracketError):
            required_snr(AWGN_OOK, 0.01, 0.01, lo_db=5, hi_db=10)


def test_wilson_from_counts():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0 and 0 < hi < 0.05
    assert np.isclose(sum(wilson_interval(50, 100)), 1.0)
