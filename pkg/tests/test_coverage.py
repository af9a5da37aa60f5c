import dataclasses
import math

import pytest

from wursim import ConfigError, ParameterError
from wursim.coverage import (
    LinkBudgetInput,
    compare_coverage,
    compute_mil,
    duration_for_gain,
    noise_floor_dbm,
)

REF = LinkBudgetInput(tx_power_dbm=33.0, bandwidth_hz=5e6, noise_figure_db=10.0,
                      required_snr_db=0.0)


class TestNoiseFloor:
    def test_five_mhz(self):
        assert noise_floor_dbm(5e6) == pytest.approx(-107.01, abs=0.005)

    def test_one_hz(self):
        assert noise_floor_dbm(1.0) == -174.0

    def test_doubling(self):
        assert noise_floor_dbm(2e6) - noise_floor_dbm(1e6) == pytest.approx(3.0103, abs=1e-4)

    def test_invalid(self):
        with pytest.raises(ParameterError):
            noise_floor_dbm(0)


class TestMil:
    def test_reference(self):
        assert compute_mil(REF) == pytest.approx(130.01, abs=0.005)

    def test_zero_case(self):
        link = LinkBudgetInput(0.0, 1.0, 0.0, 174.0)
        assert compute_mil(link) == pytest.approx(0.0, abs=1e-12)

    def test_noise_figure_linear(self):
        worse = dataclasses.replace(REF, noise_figure_db=13.0)
        assert compute_mil(REF) - compute_mil(worse) == pytest.approx(3.0, abs=1e-12)

    @pytest.mark.parametrize("name,coef", [
        ("tx_power_dbm", 1), ("tx_antenna_gain_db", 1), ("rx_antenna_gain_db", 1),
        ("noise_figure_db", -1), ("required_snr_db", -1), ("extra_margin_db", -1)])
    def test_affine_in_each_field(self, name, coef):
        for step in (0.5, 1.0, 7.25):
            moved = dataclasses.replace(REF, **{name: getattr(REF, name) + step})
            assert compute_mil(moved) - compute_mil(REF) == pytest.approx(coef * step, abs=1e-9)

    @pytest.mark.parametrize("kw", [{"bandwidth_hz": 0.0}, {"noise_figure_db": -1.0}])
    def test_invalid_input(self, kw):
        with pytest.raises((ConfigError, ParameterError)):
            dataclasses.replace(REF, **kw)


class TestCompare:
    def test_identical_entries(self):
        rows = compare_coverage([("a", REF), ("b", REF)])
        assert [r.delta_db for r in rows] == [0.0, 0.0]

    def test_sorted_with_deltas(self):
        worse = dataclasses.replace(REF, required_snr_db=3.0)
        rows = compare_coverage([("worse", worse), ("ref", REF)])
        assert [r.label for r in rows] == ["ref", "worse"]
        assert rows[1].delta_db == pytest.approx(-3.0, abs=1e-12)

    def test_order_invariant_under_common_tx_offset(self):
        entries = [("a", REF), ("b", dataclasses.replace(REF, noise_figure_db=4.0)),
                   ("c", dataclasses.replace(REF, required_snr_db=-6.5))]
        shifted = [(k, dataclasses.replace(v, tx_power_dbm=v.tx_power_dbm + 11.0))
                   for k, v in entries]
        a, b = compare_coverage(entries), compare_coverage(shifted)
        assert [r.label for r in a] == [r.label for r in b]
        assert [r.delta_db for r in a] == pytest.approx([r.delta_db for r in b])

    def test_duplicate_labels(self):
        with pytest.raises(ConfigError):
            compare_coverage([("a", REF), ("a", REF)])

    def test_too_few(self):
        with pytest.raises(ConfigError):
            compare_coverage([("a", REF)])

    def test_wus_gap_with_nf_deltas(self):
        # NF 3 and 6 dB above a 7 dB main receiver, measured required SNRs
        wus1 = LinkBudgetInput(40.0, 5e6, 10.0, -7.0, rx_antenna_gain_db=8.0)
        wus2 = LinkBudgetInput(40.0, 5e6, 13.0, -1.0, rx_antenna_gain_db=8.0)
        rows = compare_coverage([("WUS1", wus1), ("WUS2", wus2)])
        assert rows[0].label == "WUS1" and rows[1].delta_db <= -5.0


class TestDurationForGain:
    def test_no_gain_keeps_base(self):
        assert duration_for_gain(0.0) == 4
        assert duration_for_gain(-3.0) == 4

    def test_coherent_doubling(self):
        assert duration_for_gain(10 * math.log10(2)) == 8

    def test_noncoherent_needs_more(self):
        assert duration_for_gain(3.0, combining="noncoherent") > duration_for_gain(3.0)
        assert duration_for_gain(5 * math.log10(2), combining="noncoherent") == 8
