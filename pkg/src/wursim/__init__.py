"""Link- and system-level simulator for low-power wake-up receivers."""

__version__ = "0.1.0"

from ._validation import (
    BracketError,
    CapacityError,
    ConfigError,
    DimensionError,
    InfeasibleRateError,
    InsufficientDataError,
    LengthError,
    ParameterError,
    SaturationError,
    ScheduleConflictError,
    SeedError,
    WursimError,
)
from .channel import ImpairmentConfig, TdlProfile, apply_awgn, apply_cfo, apply_tdl
from .config import ScenarioConfig
from .coverage import LinkBudgetInput, compare_coverage, compute_mil, noise_floor_dbm
from .energy import (
    MonitoringScheme,
    PowerProfile,
    WakeModel,
    average_power,
    baseline_idrx_power,
    saving_gain,
    simulate_timeline,
)
from .linksim import LinkScenario, required_snr, run_link_sim
from .ofdm import IqBuffer, Numerology, OfdmModulator, ResourceGrid, demodulate, modulate_grid
from .overhead import (
    CarrierGrid,
    LpSsConfig,
    NetworkEnergyModel,
    OverheadInput,
    lp_ss_overhead,
    network_energy_increase,
    paging_rate_per_cell,
    wus_overhead_fraction,
)
from .receiver import (
    CorrelationDetector,
    CorrelatorConfig,
    EnvelopeDetector,
    EnvelopeDetectorConfig,
    ErrorRates,
    correlate_detect,
    envelope_detect,
)
from .sequences import gen_m_sequence, gen_zadoff_chu
from .waveform import (
    WusConfig,
    WusPayload,
    build_target_mask,
    encode_single_bit_ook,
    generate_lp_ss,
    generate_multibit_ook,
    generate_ofdm_wus,
)
