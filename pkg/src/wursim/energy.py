"""UE energy model for wake-up-receiver monitoring versus legacy idle DRX.

Units: power in relative power units (deep sleep = 1), time in ms, energy in
power-unit x ms.

Billing convention: a sleep <-> active round trip costs its fixed transition
energy and nothing else; the transition time is not billed at any state
power.  The main receiver (MR) otherwise sits at its sleep power, except
while it monitors a paging occasion at ``mr_active_monitor``.  The WUR runs
alongside, independent of the MR state.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from ._validation import ParameterError, check_probability, make_rng


@dataclass(frozen=True)
class Transition:
    time_ms: float
    energy: float


@dataclass(frozen=True)
class PowerProfile:
    ultra_deep_sleep: float = 0.015
    deep_sleep: float = 1.0
    mr_active_monitor: float = 100.0
    wur_active: float = 1.0
    wur_off: float = 0.0
    transitions: dict = field(default_factory=lambda: {
        ("deep_sleep", "active"): Transition(20.0, 450.0),
        ("ultra_deep_sleep", "active"): Transition(400.0, 15000.0),
    })

    def __post_init__(self):
        powers = (self.ultra_deep_sleep, self.deep_sleep, self.mr_active_monitor,
                  self.wur_active, self.wur_off)
        if min(powers) < 0:
            raise ParameterError("powers must be non-negative")
        if not self.ultra_deep_sleep < self.deep_sleep <= self.mr_active_monitor:
            raise ParameterError("expected ultra_deep_sleep < deep_sleep <= mr_active_monitor")
        for key, tr in self.transitions.items():
            if not isinstance(tr, Transition):
                tr = Transition(*tr)
                self.transitions[key] = tr
            if tr.energy < 0 or tr.time_ms < 0:
                raise ParameterError(f"transition {key} must have non-negative time and energy")

    def sleep_power(self, state):
        return getattr(self, state)

    def transition(self, state):
        return self.transitions[(state, "active")]


@dataclass(frozen=True)
class MonitoringScheme:
    """WUR monitoring pattern.

    ``period_ms`` is the duty cycle (and, for continuous monitoring, the
    paging cycle over which group pages arrive).
    """

    kind: str = "duty_cycled"
    period_ms: float = 1280.0
    on_duration_ms: float = 10.0
    po_monitor_duration_ms: float = 2.0
    mr_sleep_state: str = "ultra_deep_sleep"

    def __post_init__(self):
        if self.kind not in ("duty_cycled", "continuous"):
            raise ParameterError("kind must be 'duty_cycled' or 'continuous'")
        if min(self.period_ms, self.on_duration_ms, self.po_monitor_duration_ms) <= 0:
            raise ParameterError("durations must be positive")
        if self.on_duration_ms > self.period_ms:
            raise ParameterError("on_duration_ms must not exceed period_ms")
        if self.mr_sleep_state not in ("ultra_deep_sleep", "deep_sleep"):
            raise ParameterError("mr_sleep_state must be 'ultra_deep_sleep' or 'deep_sleep'")


@dataclass(frozen=True)
class WakeModel:
    """Sources of MR wake-ups.

    ``p_fa`` is per WUR monitoring occasion.  Duty-cycled monitoring has one
    occasion per period; continuous monitoring has ``occasions_per_second``.
    """

    p_ue_page: float = 0.001
    group_size: int = 4
    p_fa: float = 0.0
    occasions_per_second: float = 100.0

    def __post_init__(self):
        check_probability(self.p_ue_page, "p_ue_page")
        check_probability(self.p_fa, "p_fa")
        if self.group_size < 1:
            raise ParameterError("group_size must be >= 1")
        if self.occasions_per_second <= 0:
            raise ParameterError("occasions_per_second must be positive")


def group_page_probability(model):
    return 1.0 - (1.0 - model.p_ue_page) ** model.group_size


def wake_probability(model):
    """Per-occasion probability that the MR is woken.

    Own pages, pages to other subgroup members and false alarms are taken
    as independent: ``1 - (1 - p_group) * (1 - p_fa)``.
    """
    return 1.0 - (1.0 - group_page_probability(model)) * (1.0 - model.p_fa)


def wake_energy(scheme, profile):
    """Extra energy of one MR wake-up over staying asleep."""
    tr = profile.transition(scheme.mr_sleep_state)
    sleep = profile.sleep_power(scheme.mr_sleep_state)
    busy = tr.time_ms + scheme.po_monitor_duration_ms
    return tr.energy + profile.mr_active_monitor * scheme.po_monitor_duration_ms - sleep * busy


def wake_rate_per_ms(scheme, model):
    """Expected MR wake-ups per ms."""
    if scheme.kind == "duty_cycled":
        return wake_probability(model) / scheme.period_ms
    return (group_page_probability(model) / scheme.period_ms
            + model.p_fa * model.occasions_per_second / 1e3)


def wur_power(scheme, profile):
    if scheme.kind == "continuous":
        return profile.wur_active
    duty = scheme.on_duration_ms / scheme.period_ms
    return profile.wur_active * duty + profile.wur_off * (1 - duty)


def average_power(scheme, profile, model):
    """Long-run average UE power.

    ``P = P_wur + P_sleep + r_wake * E_wake`` where ``P_wur`` is the WUR's
    duty-weighted power (``Pwur`` when continuous), ``P_sleep`` the MR sleep
    floor, ``r_wake`` the wake-up rate (per-period wake probability divided
    by the period when duty-cycled; own/group pages per paging cycle plus
    ``p_fa * occasions_per_second`` when continuous) and ``E_wake`` the
    transition energy plus PO monitoring minus the sleep energy the wake
    displaces.

    Wakes that would overlap (busy time x rate > 1) are still amortized by
    rate, with a warning.
    """
    tr = profile.transition(scheme.mr_sleep_state)
    rate = wake_rate_per_ms(scheme, model)
    if rate * (tr.time_ms + scheme.po_monitor_duration_ms) > 1:
        warnings.warn("MR wake-ups overlap; energy amortized by wake rate", stacklevel=2)
    floor = profile.sleep_power(scheme.mr_sleep_state)
    return wur_power(scheme, profile) + floor + rate * wake_energy(scheme, profile)


def baseline_idrx_power(profile, cycle_ms=1280.0, model=None, po_monitor_duration_ms=2.0):
    """Legacy idle DRX: the MR leaves deep sleep once per cycle to monitor its PO.

    ``(E_tr + P_active * t_po + P_deep * (T - t_tr - t_po)) / T``.  ``model``
    is accepted for symmetry with :func:`average_power`; paging does not
    change the per-cycle cost because the PO is monitored regardless.
    """
    tr = profile.transition("deep_sleep")
    busy = tr.time_ms + po_monitor_duration_ms
    if cycle_ms <= busy:
        raise ParameterError("cycle must exceed transition plus monitoring time")
    energy = (tr.energy + profile.mr_active_monitor * po_monitor_duration_ms
              + profile.deep_sleep * (cycle_ms - busy))
    return energy / cycle_ms


def saving_gain(scheme_power, baseline_power):
    if baseline_power <= 0:
        raise ParameterError("baseline power must be positive")
    return 1.0 - scheme_power / baseline_power


def _bernoulli(rng, p, n, stratified):
    """``n`` Bernoulli(p) draws; stratified draws place one uniform in each
    of ``n`` equal strata (randomly permuted), which keeps the count within
    one of ``n * p``."""
    if stratified:
        u = (rng.permutation(n) + rng.random(n)) / n
    else:
        u = rng.random(n)
    return u < p


def simulate_timeline(scheme, profile, model, duration_s, seed=0, stratified=True):
    """Event-driven energy total (power-unit x ms) over ``duration_s``.

    Walks the monitoring occasions, drawing each subgroup member's page and
    each false alarm independently, and bills the WUR on/off intervals, the
    MR sleep intervals, every wake's transition and PO monitoring.  Divided
    by the duration it converges to :func:`average_power`.
    """
    rng = make_rng(seed, 0xE5)
    duration_ms = duration_s * 1e3
    n_cycles = int(duration_ms // scheme.period_ms)
    tail_ms = duration_ms - n_cycles * scheme.period_ms

    pages = np.zeros(n_cycles, dtype=bool)
    for _ in range(model.group_size):
        pages |= _bernoulli(rng, model.p_ue_page, n_cycles, stratified)

    if scheme.kind == "duty_cycled":
        alarms = _bernoulli(rng, model.p_fa, n_cycles, stratified)
        wakes = int(np.sum(pages | alarms))
        wur_on_ms = n_cycles * scheme.on_duration_ms + min(tail_ms, scheme.on_duration_ms)
        wur_energy = profile.wur_active * wur_on_ms + profile.wur_off * (duration_ms - wur_on_ms)
    else:
        n_occ = int(duration_s * model.occasions_per_second)
        alarms = _bernoulli(rng, model.p_fa, n_occ, stratified)
        wakes = int(np.sum(pages)) + int(np.sum(alarms))
        wur_energy = profile.wur_active * duration_ms

    tr = profile.transition(scheme.mr_sleep_state)
    awake_ms = wakes * (tr.time_ms + scheme.po_monitor_duration_ms)
    sleep_ms = duration_ms - awake_ms
    mr_energy = (profile.sleep_power(scheme.mr_sleep_state) * sleep_ms
                 + wakes * tr.energy
                 + wakes * profile.mr_active_monitor * scheme.po_monitor_duration_ms)
    return float(wur_energy + mr_energy)


def occasions_in(scheme, model, duration_s):
    if scheme.kind == "duty_cycled":
        return int(duration_s * 1e3 // scheme.period_ms)
    return int(duration_s * model.occasions_per_second)


def duration_for_occasions(scheme, model, occasions):
    """Simulation length in seconds covering ``occasions`` monitoring occasions."""
    if scheme.kind == "duty_cycled":
        return occasions * scheme.period_ms / 1e3
    return occasions / model.occasions_per_second


def fig5_sweep(pwur_values=(0.5, 1, 2, 4, 10), p_fa_values=(0.0, 0.001, 0.01),
               period_ms=1280.0, on_duration_ms=10.0, occasions_per_second=100.0):
    """Rows ``(scheme, Pwur, p_fa, p_wake, avg_power, gain)`` for both schemes."""
    base_profile = PowerProfile()
    baseline = baseline_idrx_power(base_profile, period_ms)
    rows = []
    for kind in ("duty_cycled", "continuous"):
        scheme = MonitoringScheme(kind, period_ms, on_duration_ms)
        for pwur in pwur_values:
            profile = PowerProfile(wur_active=float(pwur))
            for p_fa in p_fa_values:
                model = WakeModel(p_fa=p_fa, occasions_per_second=occasions_per_second)
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    p = average_power(scheme, profile, model)
                rows.append({
                    "scheme": kind,
                    "pwur": float(pwur),
                    "p_fa": p_fa,
                    "p_wake": wake_rate_per_ms(scheme, model) * period_ms,
                    "avg_power": p,
                    "baseline_power": baseline,
                    "gain": saving_gain(p, baseline),
                })
    return rows


__all__ = [
    "PowerProfile", "MonitoringScheme", "WakeModel", "Transition", "wake_probability",
    "group_page_probability", "average_power", "baseline_idrx_power", "saving_gain",
    "simulate_timeline", "wake_energy", "fig5_sweep", "wake_rate_per_ms", "wur_power",
    "occasions_in", "duration_for_occasions",
]
