"""Wake-up signal payloads rendered as resource grids.

Three families are generated with the same OFDM transmitter:

* single-bit OOK: whole OFDM symbols are ON (random QPSK on the WUS
  subcarriers) or OFF (zero power);
* multi-bit OOK: ``M`` ON/OFF segments per OFDM symbol, obtained by choosing
  the WUS-band IFFT inputs whose output best fits a rectangular target
  envelope in the least-squares sense;
* OFDM-sequence WUS: a Zadoff-Chu root or m-sequence shift selected by the
  payload value.

Power convention: every ON symbol carries ``K_wus`` units of grid energy
(unit-power cells on average), so its time-domain power is ``K_wus / N``.
The OOK target amplitude ``A_on = sqrt(K_wus / N)`` matches that level.
"""

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._validation import (
    CapacityError,
    ConfigError,
    InfeasibleRateError,
    ParameterError,
    make_rng,
)
from .ofdm import (
    SUBCARRIERS_PER_PRB,
    Numerology,
    ResourceGrid,
    ofdm_modulate,
    subcarrier_offsets,
)
from .sequences import gen_m_sequence, gen_zadoff_chu

LP_SS_PRBS = 12
LP_SS_SYMBOL_RANGE = (4, 42)
SEQUENCE_KINDS = ("zadoff_chu", "m_sequence")


@dataclass(frozen=True)
class WusConfig:
    """Time-frequency layout and coding parameters of a wake-up signal.

    ``start_prb`` is the first PRB of the lower guard; ``None`` centres the
    guarded WUS allocation in the carrier grid.
    """

    num_prbs: int = 12
    guard_prbs: int = 1
    start_prb: int | None = None
    symbols_per_bit: int = 4
    segments_per_symbol: int = 1
    payload_bits: int = 1
    ofdm_sequence_kind: str = "zadoff_chu"
    zc_length: int = 139
    m_sequence_degree: int = 7
    codebook_size: int | None = None
    shifts_per_root: int = 2
    num_subcarriers: int | None = None
    ook_off_weight: float = 3.0
    seed: int = 0

    def __post_init__(self):
        if self.ook_off_weight <= 0:
            raise ConfigError("ook_off_weight must be positive")
        if self.segments_per_symbol < 1:
            raise ConfigError("segments_per_symbol must be >= 1")
        if self.payload_bits < 1:
            raise ConfigError("payload_bits must be >= 1")
        if self.num_prbs < 1 or self.guard_prbs < 0:
            raise ConfigError("num_prbs must be >= 1 and guard_prbs >= 0")
        if self.symbols_per_bit < 1:
            raise ConfigError("symbols_per_bit must be >= 1")
        if self.ofdm_sequence_kind not in SEQUENCE_KINDS:
            raise ConfigError(
                f"ofdm_sequence_kind must be one of {SEQUENCE_KINDS}, got {self.ofdm_sequence_kind!r}"
            )

    @property
    def num_wus_subcarriers(self):
        return self.num_prbs * SUBCARRIERS_PER_PRB

    @property
    def total_prbs(self):
        return self.num_prbs + 2 * self.guard_prbs

    def grid_width(self, num):
        return num.num_subcarriers if self.num_subcarriers is None else self.num_subcarriers

    def first_prb(self, num):
        k = self.grid_width(num)
        prbs = k // SUBCARRIERS_PER_PRB
        start = (prbs - self.total_prbs) // 2 if self.start_prb is None else self.start_prb
        if start < 0 or (start + self.total_prbs) * SUBCARRIERS_PER_PRB > k:
            raise ConfigError(
                f"{self.total_prbs} PRBs (incl. guards) starting at PRB {start} "
                f"do not fit a {k}-subcarrier grid"
            )
        return start

    def wus_slice(self, num):
        """Grid columns of the WUS PRBs (guards excluded)."""
        lo = (self.first_prb(num) + self.guard_prbs) * SUBCARRIERS_PER_PRB
        return slice(lo, lo + self.num_wus_subcarriers)

    def band_slice(self, num):
        """Grid columns of the WUS PRBs plus guards."""
        lo = self.first_prb(num) * SUBCARRIERS_PER_PRB
        return slice(lo, lo + self.total_prbs * SUBCARRIERS_PER_PRB)

    def on_amplitude(self, num):
        return float(np.sqrt(self.num_wus_subcarriers / num.fft_size))


@dataclass
class WusPayload:
    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits).astype(np.int64).ravel()
        if bits.size == 0 or np.any((bits != 0) & (bits != 1)):
            raise ParameterError("payload bits must be a non-empty 0/1 sequence")
        self.bits = bits

    @classmethod
    def from_int(cls, value, num_bits):
        if not 0 <= value < (1 << num_bits):
            raise ParameterError(f"value {value} does not fit in {num_bits} bits")
        return cls([(value >> (num_bits - 1 - i)) & 1 for i in range(num_bits)])

    def __len__(self):
        return self.bits.size

    @property
    def value(self):
        return int("".join(map(str, self.bits)), 2)


@dataclass
class OokTargetMask:
    """Desired time-domain OOK envelope over whole OFDM symbols (CP included)."""

    samples: np.ndarray
    segment_boundaries: np.ndarray
    a_on: float
    segments_per_symbol: int
    symbol_length: int
    bits: np.ndarray = field(default=None)

    @property
    def num_symbols(self):
        return self.samples.size // self.symbol_length


@dataclass
class ShapedGrid(ResourceGrid):
    """Resource grid plus the envelope fit error of the multi-bit OOK solver."""

    nmse: float = 0.0


def _check_payload_length(payload, cfg):
    if len(payload) != cfg.payload_bits:
        raise ParameterError(
            f"payload has {len(payload)} bits, config expects {cfg.payload_bits}"
        )


def encode_single_bit_ook(payload, cfg, num=Numerology()):
    """One OOK bit per ``symbols_per_bit`` OFDM symbols.

    ON symbols carry unit-modulus QPSK drawn from ``cfg.seed`` on the WUS
    subcarriers; OFF symbols and guards are exactly zero.
    """
    if cfg.segments_per_symbol != 1:
        raise ConfigError("single-bit OOK requires segments_per_symbol == 1")
    _check_payload_length(payload, cfg)
    nsym = len(payload) * cfg.symbols_per_bit
    grid = ResourceGrid.zeros(nsym, cfg.grid_width(num))
    wus = cfg.wus_slice(num)
    rng = make_rng(cfg.seed, 0x00C)
    qpsk = (rng.choice([-1.0, 1.0], size=(nsym, cfg.num_wus_subcarriers, 2)) @ [1.0, 1.0j]) / np.sqrt(2)
    on = np.repeat(payload.bits, cfg.symbols_per_bit).astype(bool)
    grid.cells[on, wus] = qpsk[on]
    return grid


def build_target_mask(bits, cfg, num=Numerology()):
    """Rectangular OOK envelope with ``M`` segments per OFDM symbol.

    Segments partition the full symbol span (cyclic prefix included) into
    ``M`` pieces whose lengths differ by at most one sample.
    """
    bits = bits.bits if isinstance(bits, WusPayload) else np.asarray(bits, dtype=np.int64).ravel()
    m = cfg.segments_per_symbol
    if bits.size == 0 or bits.size % m:
        raise ParameterError(
            f"{bits.size} bits is not a multiple of {m} segments per symbol; pad explicitly"
        )
    span = num.symbol_length
    nsym = bits.size // m
    edges = (np.arange(m + 1) * span) // m
    boundaries = (np.arange(nsym)[:, None] * span + edges[None, :-1]).ravel()
    a_on = cfg.on_amplitude(num)
    seg_len = np.diff(edges)
    per_symbol = np.repeat(bits.reshape(nsym, m), np.tile(seg_len, 1), axis=1)
    samples = a_on * per_symbol.ravel().astype(float)
    return OokTargetMask(samples, boundaries, a_on, m, span, bits)


@lru_cache(maxsize=32)
def _band_basis(num, k_grid, wus_lo, wus_hi):
    """One-symbol synthesis matrix (CP included) and the band-centre carrier."""
    offsets = subcarrier_offsets(k_grid)[wus_lo:wus_hi]
    n = np.arange(num.symbol_length) - num.cp_length
    basis = np.exp(2j * np.pi * np.outer(n, offsets) / num.fft_size) / np.sqrt(num.fft_size)
    carrier = np.exp(2j * np.pi * offsets[offsets.size // 2] * n / num.fft_size)
    basis.setflags(write=False)
    return basis, carrier


def generate_multibit_ook(mask, cfg, num=Numerology()):
    """Least-squares IFFT inputs whose output envelope follows ``mask``.

    Only the WUS subcarriers are used; guards and the rest of the carrier
    stay exactly zero.  The target is shifted to the centre of the WUS band
    before fitting so that the envelope, not the carrier phase, is matched.
    OFF samples are weighted by ``cfg.ook_off_weight`` in the fit (1 gives
    the plain orthogonal projection); the cyclic prefix ties the first CP
    samples of a symbol to its last ones, and the extra weight keeps the
    resulting leakage out of the OFF segments.
    Each symbol is then scaled so its ON segments have mean power
    ``A_on**2``.  Solutions per distinct symbol pattern are cached, mirroring
    a transmitter that pre-stores frequency-domain samples.

    Returns
    -------
    ShapedGrid
        The grid, with ``nmse`` = ``||(|x| - mask)||^2 / ||mask||^2``.
    """
    m = mask.segments_per_symbol
    if cfg.num_wus_subcarriers < m:
        raise InfeasibleRateError(
            f"{cfg.num_wus_subcarriers} WUS subcarriers cannot carry {m} OOK segments per symbol"
        )
    span = num.symbol_length
    if mask.symbol_length != span or mask.samples.size % span:
        raise ParameterError("mask must span an integer number of OFDM symbols of this numerology")
    nsym = mask.samples.size // span
    k = cfg.grid_width(num)
    wus = cfg.wus_slice(num)
    grid = ShapedGrid(np.zeros((nsym, k), dtype=np.complex128))
    target = mask.samples.reshape(nsym, span)
    for s in range(nsym):
        grid.cells[s, wus] = _pattern_coefficients(
            num, k, wus.start, wus.stop, tuple(target[s] > 0), mask.a_on, float(cfg.ook_off_weight)
        )
    if not np.any(target):
        grid.nmse = 0.0
    else:
        envelope = np.abs(ofdm_modulate(grid.cells, num))
        grid.nmse = float(np.sum((envelope - mask.samples) ** 2) / np.sum(mask.samples ** 2))
    return grid


@lru_cache(maxsize=4096)
def _pattern_coefficients(num, k, wus_lo, wus_hi, on_pattern, a_on, off_weight):
    on = np.array(on_pattern)
    if not on.any():
        return np.zeros(wus_hi - wus_lo, dtype=np.complex128)
    basis, carrier = _band_basis(num, k, wus_lo, wus_hi)
    sw = np.sqrt(np.where(on, 1.0, off_weight))
    coeffs = np.linalg.lstsq(basis * sw[:, None], a_on * on * carrier * sw, rcond=None)[0]
    x = basis @ coeffs
    coeffs *= a_on / np.sqrt(np.mean(np.abs(x[on]) ** 2))
    coeffs.setflags(write=False)
    return coeffs


def sequence_codebook(cfg):
    """``(kind, root_or_degree, cyclic_shift)`` for every payload value.

    Zadoff-Chu entries spread roots evenly over ``1..L-1`` so neighbouring
    payloads are far apart in root index; when the payload space exceeds
    ``L - 1`` roots, ``shifts_per_root`` cyclic shifts per root are added.
    m-sequence entries are evenly spaced cyclic shifts of one sequence.
    """
    size = (1 << cfg.payload_bits) if cfg.codebook_size is None else cfg.codebook_size
    needed = 1 << cfg.payload_bits
    if cfg.ofdm_sequence_kind == "zadoff_chu":
        length = cfg.zc_length
        capacity = (length - 1) * cfg.shifts_per_root
    else:
        length = (1 << cfg.m_sequence_degree) - 1
        capacity = length
    if size < needed or size < 1:
        raise CapacityError(f"codebook of {size} entries cannot carry {cfg.payload_bits} bits")
    if size > capacity:
        raise CapacityError(
            f"{cfg.ofdm_sequence_kind} of length {length} supports {capacity} entries, {size} requested"
        )
    entries = []
    if cfg.ofdm_sequence_kind == "zadoff_chu":
        if size <= length - 1:
            step = (length - 1) // size
            entries = [("zadoff_chu", 1 + v * step, 0) for v in range(size)]
        else:
            for v in range(size):
                root, sh = divmod(v, cfg.shifts_per_root)
                entries.append(("zadoff_chu", root + 1, sh * (length // cfg.shifts_per_root)))
    else:
        step = length // size
        entries = [("m_sequence", cfg.m_sequence_degree, v * step) for v in range(size)]
    return entries


def codebook_sequence(entry, zc_length=139):
    kind, param, shift = entry
    if kind == "zadoff_chu":
        seq = gen_zadoff_chu(param, zc_length)
    else:
        seq = gen_m_sequence(degree=param).astype(np.complex128)
    return np.roll(seq, -shift)


def generate_ofdm_wus(payload, cfg, num=Numerology()):
    """Sequence-based WUS: the payload value selects a codebook sequence.

    The sequence is centred in the WUS subcarriers and repeated on each of
    ``symbols_per_bit`` symbols, scaled so every symbol carries the same
    energy as a single-bit OOK ON symbol.
    """
    _check_payload_length(payload, cfg)
    book = sequence_codebook(cfg)
    seq = codebook_sequence(book[payload.value], cfg.zc_length)
    kw = cfg.num_wus_subcarriers
    if seq.size > kw:
        raise ConfigError(f"sequence of length {seq.size} exceeds {kw} WUS subcarriers")
    wus = cfg.wus_slice(num)
    lo = wus.start + (kw - seq.size) // 2
    grid = ResourceGrid.zeros(cfg.symbols_per_bit, cfg.grid_width(num))
    grid.cells[:, lo:lo + seq.size] = seq * np.sqrt(kw / seq.size)
    return grid


def generate_lp_ss(cfg, num=Numerology(), symbols=4):
    """Payload-independent low-power synchronization signal.

    Twelve PRBs starting at the first WUS PRB, each symbol filled with a
    different cyclic shift of a degree-8 m-sequence (all cells non-zero).
    """
    lo_range, hi_range = LP_SS_SYMBOL_RANGE
    if not lo_range <= symbols <= hi_range:
        warnings.warn(
            f"LP-SS with {symbols} symbols is outside the modelled range {LP_SS_SYMBOL_RANGE}",
            stacklevel=2,
        )
    width = LP_SS_PRBS * SUBCARRIERS_PER_PRB
    k = cfg.grid_width(num)
    lo = cfg.wus_slice(num).start
    if lo + width > k:
        raise ConfigError("LP-SS does not fit in the carrier grid at the WUS position")
    chips = gen_m_sequence(degree=8)
    grid = ResourceGrid.zeros(symbols, k)
    for s in range(symbols):
        grid.cells[s, lo:lo + width] = np.roll(chips, -17 * s)[:width]
    return grid
