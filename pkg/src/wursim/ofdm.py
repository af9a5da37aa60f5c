"""OFDM numerology, resource grids and the IFFT/FFT + cyclic-prefix transforms.

Conventions
-----------
- Transforms are unitary (``norm="ortho"``): grid energy equals time-domain
  energy with the cyclic prefix removed.
- A grid of ``K`` subcarriers is mapped centred on DC: grid column ``k`` sits
  at frequency offset ``k - K // 2`` (in subcarriers), i.e. FFT bin
  ``(k - K // 2) mod N``.  The DC subcarrier is occupied.
"""

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import (
    DimensionError,
    LengthError,
    ParameterError,
    check_complex_array,
)

SUBCARRIERS_PER_PRB = 12


@dataclass(frozen=True)
class Numerology:
    """Carrier numerology.

    Defaults give 30 kHz SCS with a 512-point FFT (15.36 MHz sample rate),
    wide enough for a 5 MHz wake-up signal plus guards.
    """

    subcarrier_spacing_khz: float = 30.0
    fft_size: int = 512
    cp_length: int = 36
    symbols_per_slot: int = 14

    def __post_init__(self):
        n = self.fft_size
        if not isinstance(n, (int, np.integer)) or n < 2 or n & (n - 1):
            raise ParameterError(f"fft_size must be a power of two, got {n}")
        if not 0 <= self.cp_length < n:
            raise ParameterError(f"cp_length must be in [0, fft_size), got {self.cp_length}")
        if self.subcarrier_spacing_khz <= 0:
            raise ParameterError("subcarrier_spacing_khz must be positive")
        if self.symbols_per_slot < 1:
            raise ParameterError("symbols_per_slot must be >= 1")

    @property
    def sample_rate(self):
        return self.subcarrier_spacing_khz * 1e3 * self.fft_size

    @property
    def symbol_length(self):
        """Samples per OFDM symbol including the cyclic prefix."""
        return self.fft_size + self.cp_length

    @property
    def max_prbs(self):
        return self.fft_size // SUBCARRIERS_PER_PRB

    @property
    def num_subcarriers(self):
        """Default carrier grid width: every whole PRB that fits in the FFT."""
        return self.max_prbs * SUBCARRIERS_PER_PRB

    @property
    def symbols_per_second(self):
        # CP-length nuances of NR numerologies are ignored; 14 symbols per slot,
        # 2**mu slots per ms.
        slots_per_ms = self.subcarrier_spacing_khz / 15.0
        return self.symbols_per_slot * slots_per_ms * 1e3


@dataclass
class ResourceGrid:
    """Frequency-domain cells indexed ``[symbol, subcarrier]``."""

    cells: np.ndarray

    def __post_init__(self):
        self.cells = check_complex_array(self.cells, "cells", ndim=2, allow_empty=True)

    @classmethod
    def zeros(cls, num_symbols, num_subcarriers):
        return cls(np.zeros((num_symbols, num_subcarriers), dtype=np.complex128))

    @property
    def num_symbols(self):
        return self.cells.shape[0]

    @property
    def num_subcarriers(self):
        return self.cells.shape[1]

    def energy(self):
        return float(np.sum(np.abs(self.cells) ** 2))

    def symbol_power(self):
        """Energy per OFDM symbol (sum of cell powers)."""
        return np.sum(np.abs(self.cells) ** 2, axis=1)


@dataclass
class IqBuffer:
    """Complex baseband samples at ``sample_rate``.

    ``samples`` has time on its last axis.  Leading axes, when present, index
    independent Monte-Carlo trials and are carried through every channel and
    receiver function unchanged.
    """

    samples: np.ndarray
    sample_rate: float = field(default=Numerology().sample_rate)

    def __post_init__(self):
        self.samples = check_complex_array(self.samples, "samples", allow_empty=True)
        if self.samples.ndim == 0:
            raise DimensionError("samples must have at least one axis")
        if self.sample_rate <= 0:
            raise ParameterError("sample_rate must be positive")

    def __len__(self):
        return self.samples.shape[-1]

    def energy(self):
        return float(np.sum(np.abs(self.samples) ** 2))

    def power(self):
        return float(np.mean(np.abs(self.samples) ** 2))


def subcarrier_offsets(num_subcarriers):
    """Frequency offset (in subcarriers) of each grid column under centred mapping."""
    return np.arange(num_subcarriers) - num_subcarriers // 2


def fft_bins(num_subcarriers, fft_size):
    if num_subcarriers > fft_size:
        raise DimensionError(
            f"grid has {num_subcarriers} subcarriers but fft_size is {fft_size}"
        )
    return subcarrier_offsets(num_subcarriers) % fft_size


def ofdm_modulate(cells, num):
    """Array form of :func:`modulate_grid`; ``cells`` is ``(..., S, K)``."""
    cells = np.asarray(cells, dtype=np.complex128)
    n, cp = num.fft_size, num.cp_length
    bins = fft_bins(cells.shape[-1], n)
    full = np.zeros(cells.shape[:-1] + (n,), dtype=np.complex128)
    full[..., bins] = cells
    body = np.fft.ifft(full, axis=-1, norm="ortho")
    if cp:
        body = np.concatenate([body[..., n - cp:], body], axis=-1)
    return body.reshape(cells.shape[:-2] + (-1,))


def ofdm_demodulate(samples, num, num_subcarriers):
    """Array form of :func:`demodulate`; returns ``(..., S, K)``."""
    samples = np.asarray(samples, dtype=np.complex128)
    n, cp = num.fft_size, num.cp_length
    span = n + cp
    length = samples.shape[-1]
    if length % span:
        raise LengthError(
            f"{length} samples is not an integer number of {span}-sample OFDM symbols"
        )
    blocks = samples.reshape(samples.shape[:-1] + (length // span, span))[..., cp:]
    full = np.fft.fft(blocks, axis=-1, norm="ortho")
    return full[..., fft_bins(num_subcarriers, n)]


def modulate_grid(grid, num):
    """IFFT each symbol of ``grid`` and prepend its cyclic prefix.

    Parameters
    ----------
    grid : ResourceGrid
        Cells mapped centred on DC into the FFT.
    num : Numerology

    Returns
    -------
    IqBuffer
        ``grid.num_symbols * (fft_size + cp_length)`` samples.
    """
    return IqBuffer(ofdm_modulate(grid.cells, num), num.sample_rate)


def demodulate(iq, num, num_subcarriers=None):
    """Strip cyclic prefixes and FFT back to a grid (perfect timing assumed)."""
    if iq.samples.ndim != 1:
        raise DimensionError("demodulate expects a single (unbatched) buffer")
    k = num.num_subcarriers if num_subcarriers is None else num_subcarriers
    return ResourceGrid(ofdm_demodulate(iq.samples, num, k))


class OfdmModulator(TransformerMixin, BaseEstimator):
    """Stateless OFDM transmitter usable inside sklearn pipelines.

    ``transform`` maps a stack of grids ``(n_frames, S, K)`` to time-domain
    frames ``(n_frames, S * (N + CP))``; ``inverse_transform`` undoes it.
    """

    def __init__(self, subcarrier_spacing_khz=30.0, fft_size=512, cp_length=36,
                 num_subcarriers=None):
        self.subcarrier_spacing_khz = subcarrier_spacing_khz
        self.fft_size = fft_size
        self.cp_length = cp_length
        self.num_subcarriers = num_subcarriers

    def _numerology(self):
        return Numerology(self.subcarrier_spacing_khz, self.fft_size, self.cp_length)

    def fit(self, X=None, y=None):
        self.numerology_ = self._numerology()
        if X is not None:
            X = check_complex_array(X, "X", ndim=3)
            self.n_symbols_, self.n_subcarriers_ = X.shape[1:]
        else:
            self.n_symbols_ = None
            self.n_subcarriers_ = self.num_subcarriers or self.numerology_.num_subcarriers
        return self

    def transform(self, X):
        X = check_complex_array(X, "X", ndim=3)
        return ofdm_modulate(X, self._numerology())

    def inverse_transform(self, X):
        X = check_complex_array(X, "X", ndim=2)
        num = self._numerology()
        k = self.num_subcarriers or getattr(self, "n_subcarriers_", None) or num.num_subcarriers
        return ofdm_demodulate(X, num, k)
