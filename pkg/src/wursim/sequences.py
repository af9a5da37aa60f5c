"""Zadoff-Chu and maximal-length (m-) sequences."""

import math
import numbers

import numpy as np

from ._validation import ParameterError, SeedError

# Feedback exponents (excluding x^n and 1) of known primitive polynomials over GF(2).
PRIMITIVE_POLYNOMIALS = {
    2: (1,),
    3: (2,),
    4: (3,),
    5: (3,),
    6: (5,),
    7: (6,),
    8: (6, 5, 4),
    9: (5,),
    10: (7,),
    11: (9,),
}


def is_prime(n):
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    return all(n % d for d in range(3, math.isqrt(n) + 1, 2))


def gen_zadoff_chu(root, length):
    """Prime-length Zadoff-Chu sequence.

    Parameters
    ----------
    root : int
        Root index, ``0 < root < length``.
    length : int
        Sequence length; must be prime.

    Returns
    -------
    ndarray of complex
        ``exp(-1j * pi * root * n * (n + 1) / length)`` for ``n = 0..length-1``.
    """
    if not isinstance(length, numbers.Integral) or not is_prime(int(length)):
        raise ParameterError(f"Zadoff-Chu length must be prime, got {length}")
    if not isinstance(root, numbers.Integral) or not 0 < root < length:
        raise ParameterError(f"root must satisfy 0 < root < {length}, got {root}")
    if math.gcd(int(root), int(length)) != 1:
        raise ParameterError(f"root {root} is not coprime with length {length}")
    n = np.arange(length, dtype=np.int64)
    # reduce the phase numerator modulo 2*length to keep the argument small
    phase = (root * n * (n + 1)) % (2 * length)
    return np.exp(-1j * np.pi * phase / length)


def _feedback_exponents(polynomial, degree):
    if isinstance(polynomial, numbers.Integral):
        exps = tuple(e for e in range(degree) if (int(polynomial) >> e) & 1)
    else:
        exps = tuple(int(e) for e in polynomial)
    if 0 not in exps:
        exps = exps + (0,)
    if any(not 0 <= e < degree for e in exps):
        raise ParameterError(f"feedback exponents must lie in [0, {degree}), got {exps}")
    return exps


def lfsr_bits(polynomial, degree, seed=1, length=None):
    """Binary output of a Fibonacci LFSR.

    The recurrence is ``a[k + n] = XOR_e a[k + e]`` over the feedback
    exponents ``e`` of ``x^n + ... + 1``.  ``polynomial`` is either an
    iterable of those exponents (``(6,)`` for ``x^7 + x^6 + 1``) or an integer
    mask with bit ``e`` set for each exponent.  The constant term is implied.
    ``seed`` gives the initial state, bit ``i`` being ``a[i]``.
    """
    if degree < 2:
        raise ParameterError("degree must be >= 2")
    exps = _feedback_exponents(polynomial, degree)
    if not 0 < seed < (1 << degree):
        raise SeedError(f"seed must be a non-zero {degree}-bit state, got {seed}")
    length = (1 << degree) - 1 if length is None else length
    a = np.zeros(length + degree, dtype=np.int8)
    a[:degree] = [(seed >> i) & 1 for i in range(degree)]
    for k in range(length):
        acc = 0
        for e in exps:
            acc ^= a[k + e]
        a[k + degree] = acc
    return a[:length]


def gen_m_sequence(polynomial=None, degree=7, seed=1):
    """One period of an m-sequence mapped ``0 -> +1``, ``1 -> -1``.

    ``polynomial`` defaults to a known primitive polynomial for ``degree``;
    a non-primitive polynomial yields a shorter-period sequence, which is the
    caller's responsibility.
    """
    if polynomial is None:
        try:
            polynomial = PRIMITIVE_POLYNOMIALS[degree]
        except KeyError:
            raise ParameterError(f"no default primitive polynomial for degree {degree}") from None
    bits = lfsr_bits(polynomial, degree, seed)
    return 1.0 - 2.0 * bits


def cyclic_correlation(a, b=None):
    """``r[k] = sum_n a[n] * conj(b[(n + k) mod L])`` via FFT."""
    a = np.asarray(a, dtype=np.complex128)
    b = a if b is None else np.asarray(b, dtype=np.complex128)
    return np.fft.ifft(np.conj(np.fft.fft(a)) * np.fft.fft(b)).conj()
