import numpy as np
import pytest

from wursim import ParameterError, SeedError
from wursim.sequences import (
    cyclic_correlation,
    gen_m_sequence,
    gen_zadoff_chu,
    is_prime,
    lfsr_bits,
)


def brute_correlation(a, b):
    n = a.size
    return np.array([sum(a[i] * np.conj(b[(i + k) % n]) for i in range(n)) for k in range(n)])


class TestZadoffChu:
    def test_formula(self):
        x = gen_zadoff_chu(7, 139)
        n = np.arange(139)
        np.testing.assert_allclose(x, np.exp(-1j * np.pi * 7 * n * (n + 1) / 139), atol=1e-9)

    def test_constant_amplitude(self):
        np.testing.assert_allclose(np.abs(gen_zadoff_chu(1, 139)), 1.0, atol=1e-12)

    def test_zero_autocorrelation(self):
        x = gen_zadoff_chu(1, 139)
        r = brute_correlation(x, x)
        assert abs(r[0] - 139) < 1e-9
        assert np.max(np.abs(r[1:])) < 1e-9

    def test_cross_correlation_sqrt_length(self):
        x1, x2 = gen_zadoff_chu(1, 139), gen_zadoff_chu(2, 139)
        r = brute_correlation(x1, x2)
        np.testing.assert_allclose(np.abs(r), np.sqrt(139), atol=1e-6)

    def test_fft_correlation_matches_brute_force(self):
        x1, x2 = gen_zadoff_chu(3, 31), gen_zadoff_chu(5, 31)
        np.testing.assert_allclose(cyclic_correlation(x1, x2), brute_correlation(x1, x2),
                                   atol=1e-9)

    @pytest.mark.parametrize("root,length", [(1, 140), (0, 139), (139, 139), (1, 1), (2.5, 139)])
    def test_invalid(self, root, length):
        with pytest.raises(ParameterError):
            gen_zadoff_chu(root, length)


class TestMSequence:
    def test_balance(self):
        x = gen_m_sequence((6,), 7)
        assert x.size == 127
        assert sorted([np.sum(x == 1), np.sum(x == -1)]) == [63, 64]

    def test_two_valued_autocorrelation(self):
        x = gen_m_sequence((6,), 7)
        r = np.rint(brute_correlation(x, x).real).astype(int)
        assert r[0] == 127
        assert np.all(r[1:] == -1)

    def test_degree3_visits_all_states(self):
        degree, exps = 3, (2,)
        bits = lfsr_bits(exps, degree, seed=0b001, length=14)
        a = list(bits)
        # reconstruct the register state at every step
        states = [tuple(a[k:k + degree]) for k in range(len(a) - degree + 1)]
        first_period = states[:7]
        assert len(set(first_period)) == 7
        assert (0, 0, 0) not in first_period
        assert states[7] == states[0]
        # shortest period is exactly 7
        assert all(bits[p:p + 7].tolist() != bits[:7].tolist() for p in range(1, 7))

    @pytest.mark.parametrize("degree", range(2, 12))
    def test_default_polynomials_are_primitive(self, degree):
        x = gen_m_sequence(degree=degree)
        n = 2**degree - 1
        r = np.rint(cyclic_correlation(x).real).astype(int)
        assert r[0] == n and np.all(r[1:] == -1)

    def test_integer_mask_polynomial(self):
        np.testing.assert_array_equal(gen_m_sequence(1 << 6, 7), gen_m_sequence((6,), 7))

    def test_zero_state(self):
        with pytest.raises(SeedError):
            gen_m_sequence(degree=7, seed=0)

    def test_unknown_default(self):
        with pytest.raises(ParameterError):
            gen_m_sequence(degree=20)


def test_is_prime():
    assert [n for n in range(20) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]
    assert is_prime(139)
