"""Resource-element overhead of LP-WUS / LP-SS and the zero-load network
energy cost of transmitting LP-SS."""

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import (
    ConfigError,
    ParameterError,
    SaturationError,
    ScheduleConflictError,
    check_probability,
)
from .coverage import duration_for_gain
from .energy import WakeModel, group_page_probability

SUBCARRIERS_PER_PRB = 12
SYMBOLS_PER_SLOT = 14


@dataclass(frozen=True)
class CarrierGrid:
    """Carrier capacity: ``prbs`` PRBs at ``symbols_per_second`` OFDM symbols/s.

    The default is a 20 MHz carrier at 30 kHz SCS.
    """

    prbs: int = 51
    symbols_per_second: float = 28000.0

    def __post_init__(self):
        if self.prbs <= 0 or self.symbols_per_second <= 0:
            raise ParameterError("grid capacity must be positive")

    @property
    def re_per_second(self):
        return self.prbs * SUBCARRIERS_PER_PRB * self.symbols_per_second

    @property
    def symbols_per_ms(self):
        return self.symbols_per_second / 1e3


@dataclass(frozen=True)
class LpSsConfig:
    prbs: int = 12
    symbols_per_beam: int = 42
    beams: int = 8
    period_ms: float = 320.0

    def __post_init__(self):
        if self.period_ms <= 0:
            raise ParameterError("LP-SS period must be positive")
        if self.beams < 1 or self.prbs < 1 or self.symbols_per_beam < 1:
            raise ParameterError("LP-SS prbs, symbols and beams must be >= 1")

    @property
    def symbols_per_period(self):
        return self.symbols_per_beam * self.beams

    @property
    def re_per_second(self):
        return (self.prbs * SUBCARRIERS_PER_PRB * self.symbols_per_period
                / (self.period_ms / 1e3))


@dataclass(frozen=True)
class OverheadInput:
    """Inputs of the LP-WUS overhead fraction.

    ``md_retx_factor`` counts the extra WUS transmissions caused by missed
    detections (see :func:`md_retx_factor`).
    """

    wus_symbols_per_tx: int
    wus_prbs: int = 12
    guard_prbs: int = 1
    pages_per_second: float = 0.0
    md_retx_factor: float = 1.0
    grid: CarrierGrid = field(default_factory=CarrierGrid)
    lp_ss: LpSsConfig | None = None

    def __post_init__(self):
        if min(self.wus_symbols_per_tx, self.wus_prbs, self.guard_prbs) < 0:
            raise ParameterError("counts must be non-negative")
        if self.pages_per_second < 0:
            raise ParameterError("pages_per_second must be non-negative")
        if self.md_retx_factor < 1:
            raise ParameterError("md_retx_factor must be >= 1")

    @property
    def res_per_wus(self):
        return (self.wus_prbs + 2 * self.guard_prbs) * SUBCARRIERS_PER_PRB * self.wus_symbols_per_tx


def md_retx_factor(missed_detection, cap=2.0):
    """Expected transmissions per delivered page, ``1 / (1 - md)``, capped."""
    check_probability(missed_detection, "missed_detection")
    if missed_detection >= 1:
        return float(cap)
    return min(1.0 / (1.0 - missed_detection), float(cap))


def paging_rate_per_cell(ues_per_cell, group_size, p_ue_page, occasions_per_second):
    """Expected group-page events per second in one cell."""
    if ues_per_cell < 0 or group_size < 1 or occasions_per_second < 0:
        raise ParameterError("invalid paging population")
    groups = math.ceil(ues_per_cell / group_size)
    p_group = group_page_probability(WakeModel(p_ue_page=p_ue_page, group_size=group_size))
    return groups * p_group * occasions_per_second


def lp_ss_overhead(cfg, grid=None):
    grid = CarrierGrid() if grid is None else grid
    return cfg.re_per_second / grid.re_per_second


def wus_overhead_fraction(inp):
    """Fraction of the carrier's REs spent on LP-WUS (with guards) and LP-SS."""
    wus_rate = inp.res_per_wus * inp.pages_per_second * inp.md_retx_factor
    lpss_rate = 0.0 if inp.lp_ss is None else inp.lp_ss.re_per_second
    frac = (wus_rate + lpss_rate) / inp.grid.re_per_second
    if frac > 1:
        raise SaturationError(f"overhead {frac:.3f} exceeds the carrier capacity")
    return frac


def enumerate_lp_ss_res(cfg, grid, horizon_ms):
    """Count LP-SS REs by marking them on an explicit carrier grid.

    Slow reference for :func:`lp_ss_overhead`; returns the occupied fraction
    over ``horizon_ms`` (which should be a multiple of the period).
    """
    n_sym = int(round(horizon_ms * grid.symbols_per_ms))
    occupied = np.zeros((n_sym, grid.prbs * SUBCARRIERS_PER_PRB), dtype=bool)
    period = int(round(cfg.period_ms * grid.symbols_per_ms))
    width = cfg.prbs * SUBCARRIERS_PER_PRB
    start_sc = (occupied.shape[1] - width) // 2
    for t0 in range(0, n_sym, period):
        occupied[t0:t0 + cfg.symbols_per_period, start_sc:start_sc + width] = True
    return occupied.sum() / occupied.size


# --- zero-load network energy -------------------------------------------------


@dataclass(frozen=True)
class PeriodicTx:
    """Always-on transmission repeating every ``period_ms``.

    ``symbols`` are symbol indices relative to the period start and ``prbs``
    the bandwidth used in those symbols.
    """

    name: str
    period_ms: float
    symbols: tuple
    prbs: int


@dataclass(frozen=True)
class SleepState:
    """Sleep level usable in idle gaps of at least ``min_gap_symbols``.

    ``transition_energy`` is paid once per entry/exit round trip.
    """

    name: str
    power: float
    min_gap_symbols: int
    transition_energy: float = 0.0


def ssb_burst(period_ms=20.0, num_ssb=8, prbs=20):
    """SSB burst at 30 kHz SCS: blocks at symbols {2, 8} + 14 n, 4 symbols each."""
    starts = [s + SYMBOLS_PER_SLOT * n for n in range(math.ceil(num_ssb / 2)) for s in (2, 8)]
    syms = tuple(s + k for s in starts[:num_ssb] for k in range(4))
    return PeriodicTx("SSB", period_ms, syms, prbs)


def sib1_schedule(period_ms=160.0, beams=8, first_slot=4, prbs=24):
    """One full slot per beam in consecutive slots after the SSB burst."""
    syms = tuple(range(first_slot * SYMBOLS_PER_SLOT, (first_slot + beams) * SYMBOLS_PER_SLOT))
    return PeriodicTx("SIB1", period_ms, syms, prbs)


def lp_ss_schedule(cfg, first_slot=14):
    """LP-SS beams back to back from ``first_slot`` of its period."""
    start = first_slot * SYMBOLS_PER_SLOT
    return PeriodicTx("LP-SS", cfg.period_ms, tuple(range(start, start + cfg.symbols_per_period)),
                      cfg.prbs)


@dataclass(frozen=True)
class NetworkEnergyModel:
    """Symbol-level gNB power model at zero load.

    A transmitting symbol costs ``power_idle_symbol`` plus the share
    ``prbs / grid.prbs`` of ``power_active_tx - power_idle_symbol``.  A
    non-transmitting symbol costs ``power_idle_symbol`` unless its gap is
    long enough for a cheaper sleep state.  The defaults are a calibration,
    not a normative power model.
    """

    power_active_tx: float = 1.0
    power_idle_symbol: float = 0.16
    sleep_states: tuple = (SleepState("light_sleep", 0.07, 84, 0.5),)
    always_on: tuple = field(default_factory=lambda: (ssb_burst(), sib1_schedule()))
    grid: CarrierGrid = field(default_factory=CarrierGrid)
    lp_ss_first_slot: int = 14

    def __post_init__(self):
        deepest = min((s.power for s in self.sleep_states), default=0.0)
        if self.sleep_states and not self.power_idle_symbol > deepest:
            raise ParameterError("sleep states must draw less than an idle symbol")
        if not self.power_active_tx > self.power_idle_symbol >= deepest >= 0:
            raise ParameterError("expected active > idle > deepest sleep >= 0")
        for s in self.sleep_states:
            if s.min_gap_symbols < 1 or s.transition_energy < 0:
                raise ParameterError(f"invalid sleep state {s.name}")

    def tx_power(self, prbs):
        share = min(prbs / self.grid.prbs, 1.0)
        return self.power_idle_symbol + share * (self.power_active_tx - self.power_idle_symbol)


def _horizon_symbols(txs, grid):
    periods = [int(round(t.period_ms * grid.symbols_per_ms)) for t in txs]
    for t, p in zip(txs, periods):
        if not math.isclose(p, t.period_ms * grid.symbols_per_ms):
            raise ConfigError(f"{t.name} period is not a whole number of symbols")
    return math.lcm(*periods), periods


def activity_power(model, txs):
    """Per-symbol TX power over one common period (0 where nothing is sent)."""
    horizon, periods = _horizon_symbols(txs, model.grid)
    power = np.zeros(horizon)
    owner = np.full(horizon, -1)
    for i, (tx, period) in enumerate(zip(txs, periods)):
        syms = np.asarray(tx.symbols, dtype=int)
        if syms.size and (syms.min() < 0 or syms.max() >= period):
            raise ConfigError(f"{tx.name} symbols fall outside its period")
        idx = (np.arange(0, horizon, period)[:, None] + syms[None, :]).ravel()
        clash = owner[idx] >= 0
        if np.any(clash):
            other = txs[owner[idx][clash][0]].name
            raise ScheduleConflictError(f"{tx.name} overlaps {other}")
        owner[idx] = i
        power[idx] = model.tx_power(tx.prbs)
    return power


def _gap_lengths(active):
    """Lengths of the idle runs of a cyclic activity mask."""
    if not active.any():
        return np.array([active.size])
    # rotate so the sequence starts active; idle runs then never wrap
    rolled = np.roll(active, -int(np.argmax(active)))
    d = np.diff(np.r_[1, rolled.astype(int), 1])
    starts = np.flatnonzero(d == -1)
    ends = np.flatnonzero(d == 1)
    return ends - starts


def gap_energy(model, gap):
    """Cheapest energy for an idle gap of ``gap`` symbols."""
    best = model.power_idle_symbol * gap
    for s in model.sleep_states:
        if gap >= s.min_gap_symbols:
            best = min(best, s.transition_energy + s.power * gap)
    return best


def schedule_energy(model, txs):
    """Energy (power-unit x symbol) and length in symbols of one common period."""
    power = activity_power(model, txs)
    active = power > 0
    gaps = _gap_lengths(active)
    energy = power[active].sum() + sum(gap_energy(model, int(g)) for g in gaps)
    return float(energy), power.size


def network_energy_increase(model, lp_ss=None):
    """Relative energy increase of adding LP-SS to the zero-load baseline."""
    base_txs = tuple(model.always_on)
    if lp_ss is None:
        return 0.0
    with_txs = base_txs + (lp_ss_schedule(lp_ss, model.lp_ss_first_slot),)
    e_with, n_with = schedule_energy(model, with_txs)
    e_base, n_base = schedule_energy(model, base_txs)
    return (e_with / n_with) / (e_base / n_base) - 1.0


# --- Table I ------------------------------------------------------------------


@dataclass(frozen=True)
class Table1Row:
    label: str
    cells: dict
    durations: dict


def wus_duration_for_target(target_mil_db, base_mil_db, base_symbols=4, combining="coherent"):
    """Shortest WUS matching the coverage target, from the base-duration MIL gap."""
    return duration_for_gain(target_mil_db - base_mil_db, base_symbols, combining)


def overhead_table(targets, rows, pages_per_second, grid=None, base_symbols=4,
                   wus_prbs=12, guard_prbs=1, retx_factor=1.0):
    """Overhead per (WUS design, coverage target).

    Parameters
    ----------
    targets : dict
        Column label -> MIL (dB) the WUS must reach.
    rows : sequence of (label, base_mil_db, combining, LpSsConfig or None)
        ``base_mil_db`` is the WUS MIL at ``base_symbols`` symbols.
    """
    grid = CarrierGrid() if grid is None else grid
    out = []
    for label, base_mil, combining, lp_ss in rows:
        cells, durations = {}, {}
        for col, target in targets.items():
            n = wus_duration_for_target(target, base_mil, base_symbols, combining)
            inp = OverheadInput(n, wus_prbs, guard_prbs, pages_per_second, retx_factor, grid, lp_ss)
            cells[col] = wus_overhead_fraction(inp)
            durations[col] = n
        out.append(Table1Row(label, cells, durations))
    return out


def overhead_ratio(table, numerator=0, denominator=1):
    """Ratio of the row totals (summed over all coverage targets)."""
    num = sum(table[numerator].cells.values())
    den = sum(table[denominator].cells.values())
    return num / den
