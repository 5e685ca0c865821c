"""Precision contract, scalar helpers, FFT and the unit-circle trapezoidal rule.

All numbers are gmpy2 ``mpfr``/``mpc`` scalars, held in numpy object arrays
when vectorised.  The working precision is whatever gmpy2 context is active,
so every public entry point activates the ``PrecisionCtx`` it receives.
"""

import math
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from functools import lru_cache

import gmpy2
import mpmath
import numpy as np
from gmpy2 import mpc, mpfr

LOG2_10 = math.log2(10)
MAX_NODES = 2 ** 20

# mpmath keeps its precision in a process-global; serialise every use of it.
MP_LOCK = threading.RLock()


class ConfigError(ValueError):
    """Bad user input: parameters out of range, malformed files."""


class NumericError(ArithmeticError):
    """A computation could not meet its accuracy contract."""


class QuadratureError(NumericError):
    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


@dataclass(frozen=True)
class PrecisionCtx:
    """Working precision in decimal digits plus guard digits.

    Results are meant to be good to about ``10**-digits``; the guard digits
    absorb rounding in long sums and factorizations.
    """

    digits: int = 80
    guard: int = 15

    def __post_init__(self):
        if int(self.digits) != self.digits or self.digits < 30:
            raise ConfigError(f"digits must be an integer >= 30, got {self.digits}")
        if self.guard < 0:
            raise ConfigError("guard must be non-negative")

    @property
    def bits(self):
        return int(math.ceil((self.digits + self.guard) * LOG2_10)) + 4

    def tol(self, loss=0):
        """10**(-digits + loss) as an mpfr."""
        with self.activate():
            return mpfr(10) ** (loss - self.digits)

    def with_digits(self, digits):
        return PrecisionCtx(digits, self.guard)

    @contextmanager
    def activate(self):
        with gmpy2.context(gmpy2.get_context(), precision=self.bits):
            yield self

    @contextmanager
    def mpmath(self):
        """Run an mpmath block at this precision (holds the global lock)."""
        with MP_LOCK:
            with mpmath.workprec(self.bits):
                yield mpmath.mp


DEFAULT_CTX = PrecisionCtx()


def num(x):
    """Coerce ints, floats, strings, Fractions and mpmath values to mpfr/mpc."""
    if isinstance(x, (type(mpfr(0)), type(mpc(0)))):
        return x
    if isinstance(x, str):
        s = x.strip().replace(" ", "")
        if s.endswith("j"):
            return mpc(s)
        if "/" in s:
            p, q = s.split("/")
            return mpfr(p) / mpfr(q)
        return mpfr(s)
    if isinstance(x, complex):
        return mpc(x)
    if isinstance(x, (np.integer, np.floating)):
        x = x.item()
    if hasattr(x, "numerator") and hasattr(x, "denominator"):
        return mpfr(x.numerator) / mpfr(x.denominator)
    if isinstance(x, mpmath.mpf):
        return from_mpmath(x)
    if isinstance(x, mpmath.mpc):
        return mpc(from_mpmath(x.real), from_mpmath(x.imag))
    return mpfr(x)


def is_complex(x):
    return isinstance(x, type(mpc(0)))


def real_part(x):
    return x.real if is_complex(x) else x


def cnum(x):
    """Promote to mpc."""
    x = num(x)
    return x if is_complex(x) else mpc(x)


def to_mpmath(x):
    if is_complex(x):
        return mpmath.mpc(to_mpmath(x.real), to_mpmath(x.imag))
    m, e = num(x).as_mantissa_exp()          # num keeps an mpfr as is, no re-rounding
    return mpmath.mp.make_mpf(mpmath.libmp.from_man_exp(int(m), int(e)))


def from_mpmath(x):
    if isinstance(x, mpmath.mpc):
        return mpc(from_mpmath(x.real), from_mpmath(x.imag))
    man, exp = (x if isinstance(x, mpmath.mpf) else mpmath.mpf(x)).man_exp
    if man == 0:
        return mpfr(0)
    # exact: carry every mantissa bit whatever precision is active
    bits = max(int(man).bit_length(), gmpy2.get_context().precision)
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        return mpfr(man) * mpfr(2) ** exp


def obj_array(values):
    out = np.empty(len(values), dtype=object)
    out[:] = list(values)
    return out


def zeros(n, complex_=False):
    z = mpc(0) if complex_ else mpfr(0)
    return obj_array([z] * n)


def maxabs(values):
    return max((abs(v) for v in values), default=mpfr(0))


def is_finite(x):
    if is_complex(x):
        return gmpy2.is_finite(x.real) and gmpy2.is_finite(x.imag)
    return gmpy2.is_finite(x)


def as_real_if_close(values, tol):
    """Drop imaginary parts when every one of them is below ``tol``."""
    if all(abs(v.imag) <= tol for v in values if is_complex(v)):
        return obj_array([real_part(v) for v in values]), True
    return obj_array([cnum(v) for v in values]), False


def sqrt_principal(z):
    """Principal square root; negative reals go to the complex branch."""
    if is_complex(z):
        return gmpy2.sqrt(z)
    if z < 0:
        return gmpy2.sqrt(mpc(z))
    return gmpy2.sqrt(z)


def log_principal(z):
    if is_complex(z):
        return gmpy2.log(z)
    if z < 0:
        return gmpy2.log(mpc(z))
    return gmpy2.log(z)


# -- roots of unity and FFT -------------------------------------------------

@lru_cache(maxsize=32)
def _roots(M, bits):
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        q = M // 4
        tau = 2 * gmpy2.const_pi()
        quarter = []
        for j in range(q):
            s, c = gmpy2.sin_cos(tau * j / M)
            quarter.append(mpc(c, s))
        out = [None] * M
        for j, w in enumerate(quarter):
            out[j] = w
            out[j + q] = mpc(-w.imag, w.real)
            out[j + 2 * q] = -w
            out[j + 3 * q] = mpc(w.imag, -w.real)
        return obj_array(out)


def roots_of_unity(M, ctx):
    """e^{2 pi i j / M}, j = 0..M-1, at the precision of ``ctx``."""
    if M < 4 or M & (M - 1):
        raise ConfigError(f"node count must be a power of two >= 4, got {M}")
    return _roots(M, ctx.bits)


def _fft(x, sign, roots):
    M = len(x)
    m0 = min(M, 16)
    step = M // m0
    n = np.arange(m0)
    W = roots[(np.outer(n, n) * step * sign) % M]
    X = W.dot(x.reshape(m0, -1))
    while X.shape[0] < M:
        half = X.shape[1] // 2
        even, odd = X[:, :half], X[:, half:]
        m = X.shape[0]
        tw = roots[(sign * np.arange(m) * (M // (2 * m))) % M][:, None]
        t = tw * odd
        X = np.vstack([even + t, even - t])
    return X.ravel()


def fft(x, ctx):
    """X_n = sum_j x_j e^{-2 pi i j n / M}; len(x) a power of two."""
    x = obj_array(x)
    with ctx.activate():
        return _fft(x, -1, roots_of_unity(len(x), ctx))


def ifft(X, ctx):
    """x_j = (1/M) sum_n X_n e^{2 pi i j n / M}."""
    X = obj_array(X)
    with ctx.activate():
        return _fft(X, 1, roots_of_unity(len(X), ctx)) / len(X)


# -- quadrature --------------------------------------------------------------

def sample(f, zs):
    """Evaluate ``f`` at each node, turning failures into QuadratureError."""
    out = np.empty(len(zs), dtype=object)
    for j, z in enumerate(zs):
        try:
            v = f(z)
        except (ArithmeticError, ValueError) as exc:
            raise QuadratureError(f"evaluation failed at node {j} (z={z}): {exc}", j) from exc
        if not is_finite(v):
            raise QuadratureError(f"non-finite value at node {j} (z={z})", j)
        out[j] = v
    return out


def circle_quadrature(f, nodes, ctx):
    """(1/M) sum_j f(e^{2 pi i j/M}): the trapezoid rule for
    the integral of f(z) dz / (2 pi i z) over the unit circle."""
    with ctx.activate():
        zs = roots_of_unity(nodes, ctx)
        vals = sample(f, zs)
        return sum(vals) / nodes


def converged_circle_quadrature(f, ctx, start=16, loss=5, cap=MAX_NODES):
    """Double the node count until successive trapezoid sums agree to
    10**(-digits+loss).  Returns (value, nodes)."""
    with ctx.activate():
        tol = ctx.tol(loss)
        M = start
        vals = sample(f, roots_of_unity(M, ctx))
        prev = sum(vals) / M
        while M < cap:
            M *= 2
            # the even nodes of the finer grid are the old grid
            odd = sample(f, roots_of_unity(M, ctx)[1::2])
            cur = (sum(vals) + sum(odd)) / M
            vals = np.concatenate([vals, odd])
            if abs(cur - prev) <= tol * max(1, abs(cur)):
                return cur, M
            prev = cur
        raise QuadratureError(f"quadrature not converged at the node cap {cap}")


def interleave(even, odd):
    out = np.empty(len(even) + len(odd), dtype=object)
    out[0::2] = even
    out[1::2] = odd
    return out


# -- series -----------------------------------------------------------------

def sum_series(terms, ctx, loss=-5, max_terms=10 ** 6, label="series"):
    """Sum an iterable of terms until |term| < 10**(-digits+loss) relative to
    the partial sum.  The last two retained terms give a geometric-tail
    certificate; a ratio >= 0.95 is refused as too slow to trust."""
    with ctx.activate():
        tol = ctx.tol(loss)
        total = mpfr(0)
        prev = None
        for i, t in enumerate(terms):
            total += t
            a = abs(t)
            if prev is not None and a <= tol * max(1, abs(total)) and a <= prev:
                if prev > 0 and a / prev >= 0.95:
                    raise NumericError(f"{label}: tail ratio {float(a / prev):.3f} too close to 1")
                return total
            if a > 0:
                prev = a
            if i >= max_terms:
                break
        raise NumericError(f"{label}: terms did not fall below tolerance")


def fmt_fixed(x, sig):
    """Fixed-notation decimal string with ``sig`` significant digits."""
    if is_complex(x):
        if x.imag == 0:
            x = x.real
        else:
            im = fmt_fixed(x.imag, sig)
            sign = "" if im.startswith("-") else "+"
            return f"{fmt_fixed(x.real, sig)}{sign}{im}j"
    if x == 0:
        return "0." + "0" * (sig - 1)
    e = int(gmpy2.floor(gmpy2.log10(abs(x))))
    return format(x, f".{max(sig - 1 - e, 0)}f")
