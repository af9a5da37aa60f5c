"""Maximum isotropic loss (MIL) link budgets."""

import math
from dataclasses import dataclass

from ._validation import ConfigError, ParameterError

THERMAL_NOISE_DBM_HZ = -174.0


def noise_floor_dbm(bandwidth_hz):
    if bandwidth_hz <= 0:
        raise ParameterError("bandwidth must be positive")
    return THERMAL_NOISE_DBM_HZ + 10 * math.log10(bandwidth_hz)


@dataclass(frozen=True)
class LinkBudgetInput:
    """Link-budget operands.

    Body loss, shadow-fading and other template margins are folded into
    ``extra_margin_db``.
    """

    tx_power_dbm: float
    bandwidth_hz: float
    noise_figure_db: float
    required_snr_db: float
    tx_antenna_gain_db: float = 0.0
    rx_antenna_gain_db: float = 0.0
    extra_margin_db: float = 0.0

    def __post_init__(self):
        if self.bandwidth_hz <= 0:
            raise ParameterError("bandwidth must be positive")
        if self.noise_figure_db < 0:
            raise ParameterError("noise figure must be non-negative")


def compute_mil(link):
    """``P_tx + G_tx + G_rx - (N_floor + NF + SNR_req) - margin`` in dB."""
    sensitivity = noise_floor_dbm(link.bandwidth_hz) + link.noise_figure_db + link.required_snr_db
    return (link.tx_power_dbm + link.tx_antenna_gain_db + link.rx_antenna_gain_db
            - sensitivity - link.extra_margin_db)


@dataclass(frozen=True)
class CoverageRow:
    label: str
    mil_db: float
    delta_db: float


def compare_coverage(entries):
    """MIL per labelled budget, sorted best first, with the gap to the best.

    Parameters
    ----------
    entries : sequence of (str, LinkBudgetInput)
    """
    entries = list(entries)
    if len(entries) < 2:
        raise ConfigError("need at least two entries to compare")
    labels = [label for label, _ in entries]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"duplicate labels in {labels}")
    mils = sorted(((compute_mil(link), label) for label, link in entries), key=lambda t: -t[0])
    best = mils[0][0]
    return [CoverageRow(label, mil, mil - best) for mil, label in mils]


def duration_for_gain(gain_db, base_symbols=4, combining="coherent"):
    """Symbols needed to improve a ``base_symbols`` WUS by ``gain_db``.

    Coherent detection gains ``10 log10`` of the duration ratio; square-law
    (energy) detection at low SNR only ``5 log10``.  Never shorter than the
    base duration.
    """
    if combining not in ("coherent", "noncoherent"):
        raise ParameterError("combining must be 'coherent' or 'noncoherent'")
    if gain_db <= 0:
        return int(base_symbols)
    slope = 10.0 if combining == "coherent" else 5.0
    return int(math.ceil(base_symbols * 10 ** (gain_db / slope) - 1e-9))
