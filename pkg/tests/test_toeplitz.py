import itertools
from fractions import Fraction

import numpy as np
import pytest
from gmpy2 import mpc, mpfr
from hypothesis import given, settings, strategies as st

from bordered_toeplitz import fourier, symbols, toeplitz
from bordered_toeplitz.numkernel import ConfigError, PrecisionCtx
from bordered_toeplitz.toeplitz import SingularMatrixError

CTX = PrecisionCtx(50)


def series(phi, M=24):
    return fourier.fourier_coeffs(phi, M=M, ctx=CTX)


def test_tridiagonal_closed_form():
    s = series(symbols.laurent_polynomial({-1: 1, 0: 2, 1: 1}), 10)
    with CTX.activate():
        for N in range(1, 8):
            assert abs(toeplitz.toeplitz_det(s, N, CTX) - (N + 1)) < CTX.tol(3)


def test_constant_symbol():
    s = series(symbols.constant(1), 4)
    assert toeplitz.toeplitz_det(s, 1, CTX) == 1
    with CTX.activate():
        assert abs(toeplitz.bordered_det(s, s, 4, CTX) - 1) < CTX.tol(2)


def leibniz(rows):
    total = Fraction(0)
    for perm in itertools.permutations(range(len(rows))):
        inv = sum(perm[i] > perm[j] for i in range(len(perm)) for j in range(i + 1, len(perm)))
        term = Fraction((-1) ** inv)
        for i, j in enumerate(perm):
            term *= rows[i][j]
        total += term
    return total


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(-9, 9), min_size=16, max_size=16))
def test_lu_matches_exact_det(ints):
    rows = [[Fraction(v, 3) for v in ints[4 * i:4 * i + 4]] for i in range(4)]
    with CTX.activate():
        A = np.array([[mpfr(x) for x in r] for r in rows], dtype=object)
        ours = toeplitz.determinant(A, CTX)
        assert abs(ours - mpfr(leibniz(rows))) < CTX.tol(3)


def test_singular_matrix():
    with CTX.activate():
        A = np.array([[mpfr(1), mpfr(2)], [mpfr(2), mpfr(4)]], dtype=object)
        assert toeplitz.determinant(A, CTX) == 0
        with pytest.raises(SingularMatrixError):
            toeplitz.solve(A, [mpfr(1), mpfr(0)], CTX)


def test_complex_entries():
    with CTX.activate():
        A = np.array([[mpc(1, 1), mpc(2)], [mpc(0, 1), mpc(3, -1)]], dtype=object)
        d = toeplitz.determinant(A, CTX)
        assert abs(d - ((1 + 1j) * (3 - 1j) - 2j)) < CTX.tol(2)


def test_border_by_the_symbol_itself_and_shifts():
    phi = symbols.ising_phi(Fraction(3, 2))
    s = series(phi, 30)
    with CTX.activate():
        for N in (2, 5, 9):
            D = toeplitz.toeplitz_det(s, N, CTX)
            assert abs(toeplitz.bordered_det(s, s, N, CTX) - D) < CTX.tol(3)
            for k in range(1, N):
                assert abs(toeplitz.bordered_det(s, fourier.shifted(s, k), N, CTX)) < CTX.tol(3)


def test_cramer_and_f_n():
    k = Fraction(3, 2)
    s = series(symbols.ising_phi(k), 30)
    p = series(symbols.pole_border(symbols.ising_phi(k), Fraction(-1, 2)), 30)
    with CTX.activate():
        for N in (3, 8):
            D = toeplitz.toeplitz_det(s, N, CTX)
            DB = toeplitz.bordered_det(s, p, N, CTX)
            assert abs(D * toeplitz.cramer_last(s, p, N, CTX) - DB) < CTX.tol(4) * abs(DB)
        assert abs(toeplitz.f_n_ratio(s, s, 8, CTX) - 1) < CTX.tol(4)


def test_bopuc_orthogonality_and_norm():
    s = series(symbols.ising_phi(Fraction(3, 2)), 30)
    n = 6
    d = toeplitz.bopuc_poly(s, n, CTX)
    with CTX.activate():
        assert abs(d.kappa_n ** 2 - d.D_n / d.D_n1) < CTX.tol(3)
        # <z^j, Q_n>_phi: Q_n is orthogonal to z^0..z^{n-1}
        for j in range(n):
            assert abs(sum(c * s[j - m] for m, c in enumerate(d.Q_coeffs))) < CTX.tol(3)
        top = sum(c * s[n - m] for m, c in enumerate(d.Q_coeffs))
        assert abs(top - 1 / d.kappa_n) < CTX.tol(3)


def test_cauchy_moment_both_sides():
    phi = symbols.reflect(symbols.geometric(3))      # 1 / (1 - 1/(3z))
    s = series(phi, 80)
    with CTX.activate():
        z = mpfr(1) / 2
        assert abs(toeplitz.cauchy_moment(s, 0, z, CTX) - 1) < CTX.tol(3)
        w = mpc(0, 2)
        assert abs(toeplitz.cauchy_moment(s, 0, w, CTX) + phi(w) - 1) < CTX.tol(3)


def test_small_n_rejected():
    s = series(symbols.constant(2), 4)
    with pytest.raises(ConfigError):
        toeplitz.bordered_det(s, s, 1, CTX)
    with pytest.raises(ConfigError):
        toeplitz.toeplitz_det(s, 0, CTX)
    with pytest.raises(ConfigError):
        toeplitz.toeplitz_det(s, 9, CTX)
