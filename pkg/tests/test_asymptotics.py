from fractions import Fraction

import pytest
from gmpy2 import mpfr
from hypothesis import given, settings, strategies as st

from bordered_toeplitz import asymptotics as asy
from bordered_toeplitz import fourier, symbols, szego, toeplitz
from bordered_toeplitz.numkernel import ConfigError, PrecisionCtx

CTX = PrecisionCtx(50)
K = Fraction(3, 2)


class Case:
    """phi-hat at k = 3/2 with a pole border at c = -1/2, expanded once."""

    def __init__(self):
        self.phi = symbols.ising_phi(K)
        self.log = fourier.log_fourier_coeffs(self.phi, ctx=CTX)
        self.series = fourier.fourier_coeffs(self.phi, M=200, ctx=CTX)
        self.lam = asy.ratio_series(self.log, 1, CTX)
        self.lam_inv = asy.ratio_series(self.log, -1, CTX)
        self.pole = fourier.fourier_coeffs(symbols.pole_border(self.phi, Fraction(-1, 2)), M=200, ctx=CTX)


@pytest.fixture(scope="module")
def case():
    return Case()


_CASE = {}


def shared():
    if "c" not in _CASE:
        _CASE["c"] = Case()
    return _CASE["c"]


@settings(max_examples=4, deadline=None)
@given(st.integers(2, 30))
def test_trace_mode_is_first_order_of_matrix_mode(N):
    c = shared()
    tr = asy.bocg_correction(c.log, N, "trace", CTX, c.lam, c.lam_inv)
    mx = asy.bocg_correction(c.log, N, "matrix", CTX, c.lam, c.lam_inv)
    with CTX.activate():
        trK = 1 - tr
        assert abs(tr - mx) <= 10 * trK ** 2


@pytest.mark.parametrize("N", [4, 12])
def test_borodin_okounkov_exact(case, N):
    det = asy.bocg_correction(case.log, N, "matrix", CTX, case.lam, case.lam_inv)
    d = szego.szego_constants(case.log, CTX)
    D = toeplitz.toeplitz_det(case.series, N, CTX)
    with CTX.activate():
        assert abs(D / (d.G ** N * d.E * det) - 1) < CTX.tol(5)


def test_bocg_mode_check(case):
    with pytest.raises(ConfigError):
        asy.bocg_correction(case.log, 5, "series", CTX)


def test_diagonal_asymptote_approaches_its_correction(case):
    for N in (40, 80):
        r = asy.diagonal_asymptote(K, N, CTX)
        D = toeplitz.toeplitz_det(case.series, N, CTX)
        with CTX.activate():
            assert abs((D - r.leading) / r.secondOrder - 1) < mpfr(6) / N
    assert r.formulaId == "diagonal"


def test_f_n_expansion_matches_the_solve(case):
    pp = szego.p_plus_decompose(case.series, case.log, case.pole, 150, CTX)
    with CTX.activate():
        lead = asy.pole_border_asymptote(K, Fraction(-1, 2), 10, CTX).leading
        assert abs(pp[0] - lead) < CTX.tol(5)
        assert abs(asy.f_constant_general(case.log, case.pole, CTX) - lead) < CTX.tol(5)
    for N in (5, 10, 20):
        a = asy.fn_expansion(case.log, pp, N, CTX, case.lam_inv)
        b = toeplitz.f_n_ratio(case.series, case.pole, N, CTX)
        with CTX.activate():
            assert abs(a - b) < mpfr(K) ** (-4 * N)


def test_pole_border_g_b_tends_to_one(case):
    c = Fraction(-1, 2)
    for N in (20, 40):
        F = toeplitz.f_n_ratio(case.series, case.pole, N, CTX)
        with CTX.activate():
            assert abs(asy.g_b(F, K, c, N, CTX) - 1) < mpfr(10) / N


def test_poles_on_the_circle_are_refused():
    with pytest.raises(ConfigError):
        symbols.BorderSpec(poles=[(1, Fraction(-1))])


def test_delta_integral_against_its_asymptote():
    for N in (50, 200):
        a = asy.delta_exact_integral(K, 2, N, CTX)
        b = asy.delta_asymptote(K, 2, N, CTX)
        with CTX.activate():
            assert abs(a / b - 1) < mpfr(1) / N
    with pytest.raises(ConfigError):
        asy.delta_exact_integral(K, Fraction(1, 2), 10, CTX)


def test_delta_n_is_integral_minus_f():
    with CTX.activate():
        assert asy.delta_n(K, 2, 30, mpfr(0), CTX) == asy.delta_exact_integral(K, 2, 30, CTX)


def test_rhp_integral_arguments():
    with pytest.raises(ConfigError):
        asy.rhp_correction_integrals(K, 10, 1, rho=2, ctx=CTX)
    with CTX.activate():
        rho = asy.default_rho(mpfr(K))
        on = 1 / rho
    with pytest.raises(ConfigError):
        asy.rhp_correction_integrals(K, 10, on, ctx=CTX)
    with pytest.raises(ConfigError):
        asy.rhp_correction_integrals(K, 10, 1, which="triple", ctx=CTX)


def test_rhp_single_integral_against_large_n_form():
    ctx = PrecisionCtx(40)
    prev = None
    for n in (40, 80):
        v = asy.rhp_correction_integrals(K, n, 1, "single", ctx)
        with ctx.activate():
            gap = abs(v / asy.intas_single(K, n, 1, ctx) - 1)
        assert prev is None or gap < prev
        prev = gap
    assert prev < 0.05


def test_ising_reports(ising):
    rep = asy.ising_second_order(ising.params, 50, ising.ctx)
    assert rep.formulaId == "next-to-diagonal"
    with ising.ctx.activate():
        assert rep.value == rep.leading + rep.secondOrder
        assert abs(rep.leading - asy.ising_leading(ising.params, ising.ctx)) == 0
        g = asy.g_a(rep.value, ising.params, 50, ising.ctx)
        assert abs(g - 1) < ising.ctx.tol(5)
    with pytest.raises(ConfigError):
        asy.ising_second_order(ising.params, 1, ising.ctx)


def test_x_route_to_the_ising_ratio(ising):
    for N in (6, 15):
        via_x = asy.ising_ratio_via_x(ising.params, ising.phi_series, N, ising.ctx)
        db = toeplitz.bordered_det(ising.phi_series, ising.psi_series, N, ising.ctx)
        d = toeplitz.toeplitz_det(ising.phi_series, N - 1, ising.ctx)
        with ising.ctx.activate():
            assert abs(via_x - db / d) < ising.ctx.tol(8)
