"""Execute normalized scenario configs and return result tables."""

import math
import warnings
from dataclasses import dataclass, fields, replace

from . import coverage as cov
from . import energy as en
from . import overhead as oh
from ._validation import ConfigError
from .linksim import LinkScenario, required_snr, run_link_sim, transmit_grid
from .ofdm import Numerology, modulate_grid
from .waveform import WusConfig


@dataclass
class Table:
    """One CSV result: ``name`` becomes the file stem."""

    name: str
    columns: list
    rows: list


def numerology(cfg):
    return Numerology(**cfg["numerology"])


def wus_config(cfg):
    block = cfg["waveform"]
    names = {f.name for f in fields(WusConfig)}
    kwargs = {k: v for k, v in block.items() if k in names}
    return WusConfig(seed=cfg["seed"] or 0, **kwargs)


def link_scenario(cfg, waveform_kind=None):
    ch, rx = cfg["channel"], cfg["receiver"]
    return LinkScenario(
        waveform=waveform_kind or cfg["waveform"]["kind"],
        wus=wus_config(cfg),
        numerology=numerology(cfg),
        payload_value=cfg["waveform"]["payload_value"],
        channel=ch["model"],
        delay_spread_ns=ch["delay_spread_ns"],
        speed_kmh=ch["speed_kmh"],
        carrier_ghz=ch["carrier_ghz"],
        cfo_hz=ch["cfo_hz"],
        noise_figure_delta_db=rx["noise_figure_delta_db"],
        target_far=rx["target_far"],
        trials=cfg["trials"],
        calibration_trials=rx["calibration_trials"],
        chunk_size=rx["chunk_size"],
        block_prbs=rx["block_prbs"],
        decimation=rx["decimation"],
        seed=cfg["seed"],
    )


def waveform_iq(cfg):
    scenario = link_scenario(cfg)
    return modulate_grid(transmit_grid(scenario), scenario.numerology)


def _waveform(cfg):
    grid = transmit_grid(link_scenario(cfg))
    rows = [
        (s, k, float(grid.cells[s, k].real), float(grid.cells[s, k].imag))
        for s in range(grid.num_symbols)
        for k in range(grid.num_subcarriers)
    ]
    return [Table("grid", ["symbol", "subcarrier", "re", "im"], rows)]


def _link(cfg):
    base = link_scenario(cfg)
    rx = cfg["receiver"]
    if rx["mode"] == "required_snr":
        snr = required_snr(base, rx["target_md"], rx["target_far"], rx["lo_db"], rx["hi_db"],
                           rx["step_db"])
        return [Table("required_snr", ["waveform", "channel", "target_md", "target_far",
                                       "required_snr_db"],
                      [(base.waveform, base.channel, rx["target_md"], rx["target_far"], snr)])]
    if rx["mode"] != "sweep":
        raise ConfigError("receiver.mode must be 'sweep' or 'required_snr'")
    scenario_id = cfg["name"] or f"{base.waveform}-{base.channel}"
    rows = []
    for snr_db in rx["snr_db"]:
        r = run_link_sim(replace(base, snr_db=float(snr_db)))
        rows.append((scenario_id, r.snr_db, r.missed_detection, r.false_alarm, r.trials,
                     r.confidence_halfwidth, r.md_interval[0], r.md_interval[1],
                     r.far_interval[0], r.far_interval[1]))
    return [Table("error_rates", ["scenario_id", "snr_db", "md", "far", "trials", "ci",
                                  "md_ci_low", "md_ci_high", "far_ci_low", "far_ci_high"], rows)]


def coverage_entries(cfg):
    """``(label, LinkBudgetInput)`` pairs, running link sims where requested."""
    out = []
    rx = cfg["receiver"]
    for e in cfg["coverage"]["entries"]:
        snr = e["required_snr_db"]
        if snr == "simulate":
            scenario = link_scenario(cfg, e["waveform_kind"])
            snr = required_snr(scenario, rx["target_md"], rx["target_far"], rx["lo_db"],
                               rx["hi_db"], rx["step_db"])
        out.append((e["label"], cov.LinkBudgetInput(
            tx_power_dbm=e["tx_power_dbm"],
            bandwidth_hz=e["bandwidth_hz"],
            noise_figure_db=e["noise_figure_db"],
            required_snr_db=float(snr),
            tx_antenna_gain_db=e["tx_antenna_gain_db"],
            rx_antenna_gain_db=e["rx_antenna_gain_db"],
            extra_margin_db=e["extra_margin_db"],
        )))
    return out


def _coverage(cfg):
    entries = coverage_entries(cfg)
    snrs = {label: link.required_snr_db for label, link in entries}
    table = cov.compare_coverage(entries)
    return [Table("coverage", ["label", "mil_db", "delta_db", "required_snr_db"],
                  [(r.label, r.mil_db, r.delta_db, snrs[r.label]) for r in table])]


def _profile(e, pwur):
    return en.PowerProfile(ultra_deep_sleep=e["ultra_deep_sleep"], deep_sleep=e["deep_sleep"],
                           mr_active_monitor=e["mr_active_monitor"], wur_active=float(pwur))


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def _energy_rows(cfg, kinds):
    e = cfg["energy"]
    rows = []
    baseline = en.baseline_idrx_power(_profile(e, 1.0), e["period_ms"],
                                      po_monitor_duration_ms=e["po_monitor_duration_ms"])
    for kind in kinds:
        scheme = en.MonitoringScheme(kind, e["period_ms"], e["on_duration_ms"],
                                     e["po_monitor_duration_ms"], e["mr_sleep_state"])
        for pwur in _as_list(e["pwur"]):
            profile = _profile(e, pwur)
            for p_fa in _as_list(e["p_fa"]):
                model = en.WakeModel(e["p_ue_page"], e["group_size"], float(p_fa),
                                     e["occasions_per_second"])
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    p = en.average_power(scheme, profile, model)
                row = [kind, float(pwur), e["period_ms"], float(p_fa),
                       en.wake_rate_per_ms(scheme, model) * e["period_ms"], p, baseline,
                       en.saving_gain(p, baseline)]
                if e["simulate_occasions"] > 0:
                    dur = en.duration_for_occasions(scheme, model, e["simulate_occasions"])
                    sim = en.simulate_timeline(scheme, profile, model, dur, seed=cfg["seed"])
                    row.append(sim / (dur * 1e3))
                rows.append(tuple(row))
    cols = ["scheme", "pwur", "period_ms", "p_fa", "p_wake", "avg_power", "baseline_power", "gain"]
    if e["simulate_occasions"] > 0:
        cols.append("simulated_power")
    return cols, rows


def _energy(cfg):
    cols, rows = _energy_rows(cfg, [cfg["energy"]["scheme"]])
    return [Table("energy", cols, rows)]


def _fig5(cfg):
    cols, rows = _energy_rows(cfg, ["duty_cycled", "continuous"])
    return [Table("fig5", cols, rows)]


def network_model(cfg):
    ne = cfg["overhead"]["network_energy"]
    grid = oh.CarrierGrid(**cfg["overhead"]["grid"])
    sleep = oh.SleepState("light_sleep", ne["light_sleep_power"],
                          ne["light_sleep_min_gap_symbols"], ne["light_sleep_transition_energy"])
    return oh.NetworkEnergyModel(ne["power_active_tx"], ne["power_idle_symbol"], (sleep,),
                                 grid=grid)


def pages_per_second(cfg):
    p = cfg["overhead"]["paging"]
    return oh.paging_rate_per_cell(p["ues_per_cell"], p["group_size"], p["p_ue_page"],
                                   p["occasions_per_second"])


def _lp_ss(block):
    return None if block is None else oh.LpSsConfig(**block)


def _overhead(cfg):
    o = cfg["overhead"]
    grid = oh.CarrierGrid(**o["grid"])
    model = network_model(cfg)
    pps = pages_per_second(cfg)
    factor = oh.md_retx_factor(o["missed_detection"])
    rows = []
    for case in o["cases"]:
        lp_ss = _lp_ss(case["lp_ss"])
        wus = oh.wus_overhead_fraction(oh.OverheadInput(
            case["wus_symbols"], o["wus_prbs"], o["guard_prbs"], pps, factor, grid, None))
        lpss = 0.0 if lp_ss is None else oh.lp_ss_overhead(lp_ss, grid)
        energy = oh.network_energy_increase(model, lp_ss) if case["network_energy"] else math.nan
        rows.append((case["label"], wus, lpss, energy))
    return [Table("overhead", ["config_id", "wus_overhead", "lpss_overhead", "energy_increase"],
                  rows)]


def table1(cfg):
    """Overhead rows (one per WUS design) over the configured coverage targets."""
    o = cfg["overhead"]
    mils = {label: cov.compute_mil(link) for label, link in coverage_entries(cfg)}
    targets = {col: mils[entry] for col, entry in cfg["table1"]["targets"].items()}
    rows = [(r["label"], mils[r["base_entry"]], r["combining"], _lp_ss(r["lp_ss"]))
            for r in cfg["table1"]["rows"]]
    return oh.overhead_table(targets, rows, pages_per_second(cfg), oh.CarrierGrid(**o["grid"]),
                             o["base_symbols"], o["wus_prbs"], o["guard_prbs"],
                             oh.md_retx_factor(o["missed_detection"]))


def _table1(cfg):
    tab = table1(cfg)
    cols = list(cfg["table1"]["targets"])
    overhead = Table("table1", ["design"] + cols,
                     [tuple([r.label] + [r.cells[c] for c in cols]) for r in tab])
    durations = Table("table1_durations", ["design"] + cols,
                      [tuple([r.label] + [r.durations[c] for c in cols]) for r in tab])
    return [overhead, durations]


_RUNNERS = {
    "waveform": _waveform,
    "link": _link,
    "coverage": _coverage,
    "energy": _energy,
    "fig5": _fig5,
    "overhead": _overhead,
    "table1": _table1,
}


def run_experiment(cfg):
    """Run a normalized config; returns a list of :class:`Table`."""
    return _RUNNERS[cfg["experiment"]](cfg)



def check(cfg):
    """Build the module objects an experiment needs without running it.

    Raises the same validation errors :func:`run_experiment` would.
    """
    kind = cfg["experiment"]
    if kind in ("waveform", "link"):
        transmit_grid(link_scenario(cfg))
    elif kind in ("energy", "fig5"):
        e = cfg["energy"]
        for pwur in _as_list(e["pwur"]):
            _profile(e, pwur)
        for p_fa in _as_list(e["p_fa"]):
            en.WakeModel(e["p_ue_page"], e["group_size"], float(p_fa), e["occasions_per_second"])
        en.MonitoringScheme(e["scheme"], e["period_ms"], e["on_duration_ms"],
                            e["po_monitor_duration_ms"], e["mr_sleep_state"])
    elif kind == "overhead":
        network_model(cfg)
        for case in cfg["overhead"]["cases"]:
            _lp_ss(case["lp_ss"])
    if kind in ("coverage", "table1"):
        for e in cfg["coverage"]["entries"]:
            if e["required_snr_db"] == "simulate":
                link_scenario(cfg, e["waveform_kind"])
            cov.LinkBudgetInput(e["tx_power_dbm"], e["bandwidth_hz"], e["noise_figure_db"], 0.0)
