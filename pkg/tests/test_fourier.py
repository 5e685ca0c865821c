import io
from fractions import Fraction

import pytest
from gmpy2 import mpc, mpfr
from hypothesis import given, settings, strategies as st

from bordered_toeplitz import fourier, symbols
from bordered_toeplitz.fourier import WindingError
from bordered_toeplitz.numkernel import ConfigError, PrecisionCtx

CTX = PrecisionCtx(50)


def test_monomial_readoff():
    s = fourier.fourier_coeffs(symbols.laurent_polynomial({0: 2, -1: 3}), M=4, ctx=CTX)
    with CTX.activate():
        assert abs(s[0] - 2) < CTX.tol(2) and abs(s[-1] - 3) < CTX.tol(2)
        assert max(abs(s[n]) for n in (-4, -3, -2, 1, 2, 3, 4)) < CTX.tol(2)
    assert s.real


def test_geometric_coefficients_and_auto_window():
    s = fourier.fourier_coeffs(symbols.geometric(4), ctx=CTX)
    assert s.M & (s.M - 1) == 0
    with CTX.activate():
        for n in (0, 1, 7, 30):
            assert abs(s[n] - mpfr(4) ** -n) < CTX.tol(4)
        assert s.tail(s.M) < CTX.tol(5)
        assert max(abs(s[-n]) for n in range(1, s.M + 1)) < CTX.tol(4)


def test_log_coefficients_of_an_exponential_symbol():
    phi = symbols.trig_exponent({-2: Fraction(1, 4), 1: Fraction(-1, 3), 0: Fraction(1, 10)})
    L = fourier.log_fourier_coeffs(phi, ctx=CTX)
    with CTX.activate():
        assert abs(L[-2] - mpfr(1) / 4) < CTX.tol(4)
        assert abs(L[1] + mpfr(1) / 3) < CTX.tol(4)
        assert abs(L[0] - mpfr(1) / 10) < CTX.tol(4)
        assert max(abs(L[n]) for n in range(-L.M, L.M + 1) if n not in (-2, 0, 1)) < CTX.tol(4)


def test_nonzero_winding_is_refused():
    with pytest.raises(WindingError):
        fourier.log_fourier_coeffs(symbols.times_monomial(symbols.geometric(3), 1), ctx=CTX)
    with pytest.raises(WindingError):
        fourier.log_fourier_coeffs(symbols.reflect(symbols.times_monomial(symbols.constant(2), 1)), ctx=CTX)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(-50, 50), min_size=3, max_size=15))
def test_samples_and_series_round_trip(ints):
    M = (len(ints) - 1) // 2
    with CTX.activate():
        vals = [mpfr(v) / 7 for v in ints[:2 * M + 1]]
    s = fourier.series_from_coeffs(vals, M, ctx=CTX)
    P = fourier.pow2_at_least(2 * M + 2)
    back = fourier.series_from_samples(fourier.samples_from_series(s, P, CTX), M, CTX, real=True)
    with CTX.activate():
        assert max(abs(a - b) for a, b in zip(s.coeffs, back.coeffs)) < CTX.tol(3)


def test_shift_reflect_match_the_sampled_symbols():
    phi = symbols.trig_exponent({1: Fraction(1, 5), -1: Fraction(2, 5)})
    s = fourier.fourier_coeffs(phi, M=20, ctx=CTX)
    z2 = fourier.fourier_coeffs(symbols.times_monomial(phi, 2), M=22, ctx=CTX)
    rf = fourier.fourier_coeffs(symbols.reflect(phi), M=20, ctx=CTX)
    a, b = fourier.shifted(s, 2), fourier.reflected(s)
    assert a.M == 22
    with CTX.activate():
        assert max(abs(a[n] - z2[n]) for n in range(-18, 21)) < CTX.tol(3)
        assert max(abs(b[n] - rf[n]) for n in range(-20, 21)) < CTX.tol(3)
    m = fourier.monomial_series(-3, 5)
    assert m[-3] == 1 and sum(m.coeffs) == 1


def test_window_accessors():
    s = fourier.fourier_coeffs(symbols.geometric(3), M=8, ctx=CTX)
    with pytest.raises(IndexError):
        s[9]
    assert s.get(9) == 0
    with pytest.raises(ConfigError):
        s.require(9)
    assert s.truncated(4).M == 4
    with pytest.raises(ConfigError):
        s.truncated(10)
    assert len(s.range(-10, 10)) == 21
    with CTX.activate():
        z = mpc(0, 1)
        assert abs(s(z) - 1 / (1 - z / 3)) < mpfr(3) ** -8


def test_decay_check_on_phi_hat():
    k = Fraction(3, 2)
    s = fourier.fourier_coeffs(symbols.ising_phi(k), M=120, ctx=CTX)
    r = fourier.coeff_decay_check(s, mpfr(-1) / 2, mpfr(3) / 2, ns=range(100, 121), ctx=CTX)
    vals = [v for _, v in r]
    with CTX.activate():
        spread = (max(vals) - min(vals)) / max(vals)
        assert spread < mpfr("0.01")


def test_parseval():
    phi = symbols.trig_exponent({1: Fraction(1, 2), -1: Fraction(1, 3)})
    s = fourier.fourier_coeffs(phi, ctx=CTX)
    assert fourier.parseval_gap(s, phi, CTX) < CTX.tol(3)


def test_write_csv_is_plain_fixed_point():
    s = fourier.fourier_coeffs(symbols.geometric(2), M=2, ctx=CTX)
    buf = io.StringIO()
    s.write_csv(buf, 10)
    lines = buf.getvalue().split("\n")
    assert lines[0] == "n,re,im"
    assert lines[3].startswith("0,1.00000000")
    assert not any("e" in line for line in lines[1:])
    assert "\r" not in buf.getvalue()


def test_fixed_window_must_be_positive():
    with pytest.raises(ConfigError):
        fourier.fourier_coeffs(symbols.geometric(2), M=0, ctx=CTX)
