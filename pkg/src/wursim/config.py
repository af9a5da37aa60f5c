"""Scenario configuration: YAML loading, schema validation and presets.

A config is a mapping with an ``experiment`` kind, an optional ``seed``
(mandatory for stochastic runs) and one block per module.  Missing keys take
the defaults in :data:`SCHEMA`; unknown keys are errors.
"""

import copy
import hashlib
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import yaml

from ._validation import ConfigError

EXPERIMENTS = ("waveform", "link", "coverage", "energy", "overhead", "table1", "fig5")

REQUIRED = object()


class Nullable:
    """Schema node for a sub-mapping that may be ``null``."""

    def __init__(self, schema, default=None):
        self.schema = schema
        self.default = default


class FreeMap:
    """Schema node for a mapping with arbitrary keys and scalar values."""


class Records:
    """Schema node for a list of mappings sharing ``schema``."""

    def __init__(self, schema):
        self.schema = schema


NUMEROLOGY = {
    "subcarrier_spacing_khz": 30,
    "fft_size": 512,
    "cp_length": 36,
    "symbols_per_slot": 14,
}

WAVEFORM = {
    "kind": "ook",
    "payload_value": None,
    "num_prbs": 12,
    "guard_prbs": 1,
    "start_prb": None,
    "symbols_per_bit": 4,
    "segments_per_symbol": 1,
    "payload_bits": 1,
    "ofdm_sequence_kind": "zadoff_chu",
    "zc_length": 139,
    "m_sequence_degree": 7,
    "codebook_size": None,
    "shifts_per_root": 2,
    "num_subcarriers": None,
    "ook_off_weight": 3.0,
}

CHANNEL = {
    "model": "tdl_c",
    "delay_spread_ns": 300.0,
    "speed_kmh": 3.0,
    "carrier_ghz": 2.6,
    "cfo_hz": 0.0,
}

RECEIVER = {
    "mode": "sweep",
    "snr_db": [-15.0, -10.0, -5.0, 0.0, 5.0],
    "target_far": 0.01,
    "target_md": 0.01,
    "noise_figure_delta_db": 0.0,
    "decimation": 16,
    "block_prbs": 1,
    "calibration_trials": 2000,
    "chunk_size": 500,
    "lo_db": -25.0,
    "hi_db": 15.0,
    "step_db": 0.5,
}

ENERGY = {
    "scheme": "duty_cycled",
    "period_ms": 1280.0,
    "on_duration_ms": 10.0,
    "po_monitor_duration_ms": 2.0,
    "mr_sleep_state": "ultra_deep_sleep",
    "pwur": [0.5, 1.0, 2.0, 4.0, 10.0],
    "p_fa": [0.0],
    "p_ue_page": 0.001,
    "group_size": 4,
    "occasions_per_second": 100.0,
    "ultra_deep_sleep": 0.015,
    "deep_sleep": 1.0,
    "mr_active_monitor": 100.0,
    "simulate_occasions": 0,
}

LINK_BUDGET = {
    "label": REQUIRED,
    "tx_power_dbm": REQUIRED,
    "bandwidth_hz": REQUIRED,
    "noise_figure_db": REQUIRED,
    "required_snr_db": REQUIRED,
    "waveform_kind": None,
    "tx_antenna_gain_db": 0.0,
    "rx_antenna_gain_db": 0.0,
    "extra_margin_db": 0.0,
    "note": "",
}

LP_SS = {
    "prbs": 12,
    "symbols_per_beam": 42,
    "beams": 8,
    "period_ms": 320.0,
}

GRID = {"prbs": 51, "symbols_per_second": 28000.0}

PAGING = {
    "ues_per_cell": 250,
    "group_size": 4,
    "p_ue_page": 0.001,
    "occasions_per_second": 16.0,
}

NETWORK_ENERGY = {
    "power_active_tx": 1.0,
    "power_idle_symbol": 0.16,
    "light_sleep_power": 0.07,
    "light_sleep_min_gap_symbols": 84,
    "light_sleep_transition_energy": 0.5,
}

OVERHEAD_CASE = {
    "label": REQUIRED,
    "wus_symbols": 0,
    "lp_ss": Nullable(LP_SS),
    "network_energy": True,
}

TABLE1_ROW = {
    "label": REQUIRED,
    "base_entry": REQUIRED,
    "combining": "coherent",
    "lp_ss": Nullable(LP_SS),
}

OVERHEAD = {
    "grid": GRID,
    "paging": PAGING,
    "wus_prbs": 12,
    "guard_prbs": 1,
    "missed_detection": 0.01,
    "base_symbols": 4,
    "network_energy": NETWORK_ENERGY,
    "cases": Records(OVERHEAD_CASE),
}

TABLE1 = {
    "targets": FreeMap(),
    "rows": Records(TABLE1_ROW),
}

SCHEMA = {
    "experiment": REQUIRED,
    "name": "",
    "description": "",
    "seed": None,
    "trials": 2000,
    "output_dir": "results",
    "numerology": NUMEROLOGY,
    "waveform": WAVEFORM,
    "channel": CHANNEL,
    "receiver": RECEIVER,
    "energy": ENERGY,
    "coverage": {"entries": Records(LINK_BUDGET)},
    "overhead": OVERHEAD,
    "table1": TABLE1,
}


def _merge(schema, data, path):
    where = path or "top level"
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be a mapping")
    unknown = sorted(set(data) - set(schema))
    if unknown:
        raise ConfigError(f"unknown key(s) at {where}: {', '.join(map(str, unknown))}")
    out = {}
    for key, spec in schema.items():
        p = f"{path}.{key}" if path else key
        if isinstance(spec, dict):
            out[key] = _merge(spec, data.get(key), p)
        elif isinstance(spec, Records):
            items = data.get(key) or []
            if not isinstance(items, list):
                raise ConfigError(f"{p} must be a list")
            out[key] = [_merge(spec.schema, item, f"{p}[{i}]") for i, item in enumerate(items)]
        elif isinstance(spec, Nullable):
            value = data.get(key, spec.default)
            out[key] = None if value is None else _merge(spec.schema, value, p)
        elif isinstance(spec, FreeMap):
            value = data.get(key) or {}
            if not isinstance(value, dict):
                raise ConfigError(f"{p} must be a mapping")
            out[key] = dict(value)
        elif key in data:
            out[key] = copy.deepcopy(data[key])
        elif spec is REQUIRED:
            raise ConfigError(f"missing required key {p}")
        else:
            out[key] = copy.deepcopy(spec)
    return out


def is_stochastic(cfg):
    kind = cfg["experiment"]
    if kind == "link":
        return True
    if kind in ("energy", "fig5"):
        return cfg["energy"]["simulate_occasions"] > 0
    if kind in ("coverage", "table1"):
        return any(e["required_snr_db"] == "simulate" for e in cfg["coverage"]["entries"])
    return False


def normalize(data):
    """Validate ``data`` and fill defaults; returns a plain nested dict."""
    cfg = _merge(SCHEMA, data, "")
    kind = cfg["experiment"]
    if kind not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {', '.join(EXPERIMENTS)}, got {kind!r}")
    seed = cfg["seed"]
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int) or seed < 0):
        raise ConfigError("seed must be a non-negative integer")
    if is_stochastic(cfg) and seed is None:
        raise ConfigError(f"seed is required for the stochastic experiment {kind!r}")
    for i, e in enumerate(cfg["coverage"]["entries"]):
        snr = e["required_snr_db"]
        if snr == "simulate":
            if e["waveform_kind"] not in ("ook", "ofdm"):
                raise ConfigError(f"coverage.entries[{i}] simulates its SNR but waveform_kind "
                                  "is not 'ook' or 'ofdm'")
        elif isinstance(snr, bool) or not isinstance(snr, (int, float)):
            raise ConfigError(f"coverage.entries[{i}].required_snr_db must be a number or 'simulate'")
    labels = [e["label"] for e in cfg["coverage"]["entries"]]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"duplicate coverage labels in {labels}")
    if kind == "table1":
        for row in cfg["table1"]["rows"]:
            if row["base_entry"] not in labels:
                raise ConfigError(f"table1 row {row['label']!r} references unknown entry "
                                  f"{row['base_entry']!r}")
        for col, target in cfg["table1"]["targets"].items():
            if target not in labels:
                raise ConfigError(f"table1 target {col!r} references unknown entry {target!r}")
    return cfg


def dump(cfg):
    """Canonical YAML text of a normalized config."""
    return yaml.safe_dump(cfg, sort_keys=True, default_flow_style=False)


def config_hash(cfg):
    return hashlib.sha256(dump(cfg).encode()).hexdigest()[:16]


def list_presets():
    root = resources.files("wursim").joinpath("presets")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def preset_text(name):
    if name not in list_presets():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(list_presets())}")
    return resources.files("wursim").joinpath(f"presets/{name}.yaml").read_text()


def load(source):
    """Load and normalize a config from a path or a preset name."""
    path = Path(source)
    if path.is_file():
        text = path.read_text()
    elif str(source) in list_presets():
        text = preset_text(str(source))
    else:
        raise ConfigError(f"no config file or preset named {source!r}")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    return normalize(data)


@dataclass(frozen=True)
class ScenarioConfig:
    """A validated, normalized experiment description."""

    data: dict

    @classmethod
    def from_source(cls, source):
        return cls(load(source))

    @classmethod
    def from_dict(cls, data):
        return cls(normalize(data))

    @property
    def experiment(self):
        return self.data["experiment"]

    @property
    def seed(self):
        return self.data["seed"]

    @property
    def hash(self):
        return config_hash(self.data)

    def to_yaml(self):
        return dump(self.data)
