"""Fourier coefficients of symbols and of their continuous logarithms.

All 2M+1 coefficients come from one trapezoid/FFT pass over the circle; the
node count doubles until the window is stable.
"""

import csv
from dataclasses import dataclass

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from .numkernel import (DEFAULT_CTX, MAX_NODES, ConfigError, NumericError, QuadratureError,
                        cnum, fft, fmt_fixed, ifft, interleave, is_complex, maxabs, obj_array,
                        real_part, roots_of_unity, sample)

MAX_WINDOW = 2 ** 16


class WindingError(NumericError):
    pass


@dataclass(frozen=True)
class FourierSeries:
    """Coefficients f_n, n = -M..M, stored at index n + M."""

    coeffs: np.ndarray
    M: int
    source_label: str = ""
    digits: int = 0
    nodes: int = 0
    real: bool = False

    def __post_init__(self):
        if len(self.coeffs) != 2 * self.M + 1:
            raise ValueError("coefficient array does not match the window")

    def __getitem__(self, n):
        if abs(n) > self.M:
            raise IndexError(f"index {n} outside the window [-{self.M}, {self.M}]")
        return self.coeffs[n + self.M]

    def get(self, n, default=0):
        return self.coeffs[n + self.M] if abs(n) <= self.M else mpfr(default)

    def range(self, lo, hi):
        """f_lo, ..., f_hi inclusive (zero outside the window)."""
        if lo >= -self.M and hi <= self.M:
            return self.coeffs[lo + self.M: hi + self.M + 1]
        return obj_array([self.get(n) for n in range(lo, hi + 1)])

    def require(self, n, what=""):
        if n > self.M:
            raise ConfigError(f"Fourier window {self.M} too small{' for ' + what if what else ''}: need {n}")

    def positive(self):
        return self.coeffs[self.M:]

    def negative(self):
        """f_0, f_{-1}, f_{-2}, ..."""
        return self.coeffs[self.M::-1]

    def truncated(self, M):
        if M > self.M:
            raise ConfigError(f"cannot widen a window from {self.M} to {M}")
        c = self.coeffs[self.M - M: self.M + M + 1].copy()
        return FourierSeries(c, M, self.source_label, self.digits, self.nodes, self.real)

    def __call__(self, z):
        """Evaluate the (truncated) Laurent series at z, at the active precision."""
        pos = horner(self.coeffs[self.M:], z)
        neg = horner(self.coeffs[self.M - 1::-1], 1 / z) / z if self.M else 0
        return pos + neg

    def tail(self, m):
        """max |f_n| over m <= |n| <= M."""
        if m > self.M:
            return mpfr(0)
        return max(maxabs(self.coeffs[self.M + m:]), maxabs(self.coeffs[:self.M - m + 1]))

    def write_csv(self, fh, sig, delimiter=","):
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow(["n", "re", "im"])
        for n in range(-self.M, self.M + 1):
            v = self[n]
            im = v.imag if is_complex(v) else mpfr(0)
            w.writerow([n, fmt_fixed(real_part(v), sig), fmt_fixed(im, sig)])


def shifted(series, k):
    """Coefficients of z^k f: [z^k f]_n = f_{n-k}, window widened by |k|."""
    M = series.M + abs(k)
    c = np.empty(2 * M + 1, dtype=object)
    c[:] = mpfr(0)
    lo = M - series.M + k
    c[lo: lo + 2 * series.M + 1] = series.coeffs
    return FourierSeries(c, M, f"z^{k} {series.source_label}", series.digits, series.nodes, series.real)


def reflected(series):
    """Coefficients of f(1/z)."""
    return FourierSeries(series.coeffs[::-1].copy(), series.M, f"{series.source_label}~",
                         series.digits, series.nodes, series.real)


def monomial_series(k, M=None):
    """Exact coefficients of z^k on the window |n| <= M (default |k|)."""
    M = abs(k) if M is None else M
    c = np.empty(2 * M + 1, dtype=object)
    c[:] = mpfr(0)
    if abs(k) <= M:
        c[k + M] = mpfr(1)
    return FourierSeries(c, M, f"z^{k}", 0, 0, True)


def horner(cs, z):
    out = mpfr(0)
    for c in reversed(cs):
        out = out * z + c
    return out


def series_from_coeffs(values, M, label="", ctx=DEFAULT_CTX, nodes=0, real=None):
    """Wrap a coefficient list f_{-M}..f_M."""
    values = obj_array(values)
    if real is None:
        real = not any(is_complex(v) for v in values)
    return FourierSeries(values, M, label, ctx.digits, nodes, real)


def pow2_at_least(n):
    p = 1
    while p < n:
        p *= 2
    return p


class _Sampler:
    """Samples of a symbol on the P-th roots of unity, reused on doubling."""

    def __init__(self, phi, ctx):
        self.phi, self.ctx, self.P, self.vals = phi, ctx, 0, None

    def __call__(self, P):
        if P > MAX_NODES:
            raise QuadratureError(f"{self.phi.label}: node cap {MAX_NODES} exceeded")
        if P == self.P:
            return self.vals
        roots = roots_of_unity(P, self.ctx)
        with self.ctx.activate():
            if self.P and P == 2 * self.P:
                odd = sample(self.phi.func, roots[1::2])
                self.vals = interleave(self.vals, odd)
            else:
                self.vals = sample(self.phi.func, roots)
        self.P = P
        return self.vals


def _dft_window(samples, ctx):
    """Coefficients n = -P/2+1 .. P/2-1 from P samples, as a dict-like array
    indexed n + P/2."""
    P = len(samples)
    with ctx.activate():
        X = fft(samples, ctx) / P
    half = P // 2
    out = np.empty(P - 1, dtype=object)
    out[half - 1:] = X[:half]          # n = 0 .. half-1
    out[:half - 1] = X[half + 1:]      # n = -half+1 .. -1
    return out, half - 1


def _window_of(arr, center, M):
    return arr[center - M: center + M + 1]


def _auto_window(arr, center, tol, limit):
    """Smallest power of two m <= limit with every |f_n|, |n| >= m, below tol."""
    mags = [abs(v) for v in arr]
    m = 1
    while m <= limit:
        if max(mags[:center - m + 1] + mags[center + m:], default=0) < tol:
            return m
        m *= 2
    return None


def adaptive_coefficients(sampler_fn, ctx, M, label, real, loss=5, start=None):
    with ctx.activate():
        tol = ctx.tol(loss)
        P = pow2_at_least(max(4 * M if M else 64, start or 64, 8))
        arr, center = _dft_window(sampler_fn(P), ctx)
        while True:
            P2 = 2 * P
            arr2, center2 = _dft_window(sampler_fn(P2), ctx)
            scale = max(maxabs(arr2), mpfr(1) if M is None else mpfr(0)) or mpfr(1)
            if M is None:
                m = _auto_window(arr2, center2, tol * scale, P2 // 4)
                if m is not None and m > MAX_WINDOW:
                    raise NumericError(f"{label}: window exceeds the cap {MAX_WINDOW}")
                ok = m is not None and m <= center
            else:
                m = M
                ok = True
            if ok:
                diff = maxabs(_window_of(arr, center, m) - _window_of(arr2, center2, m))
                if diff <= tol * scale:
                    vals = _window_of(arr2, center2, m).copy()
                    if real:
                        vals = _realify(vals, tol * scale, label)
                    return FourierSeries(vals, m, label, ctx.digits, P2, bool(real))
            P, arr, center = P2, arr2, center2


def _realify(vals, tol, label):
    worst = max((abs(v.imag) for v in vals if is_complex(v)), default=mpfr(0))
    if worst > tol:
        raise NumericError(f"{label}: symbol flagged real has imaginary coefficients ({float(worst):.3g})")
    return obj_array([real_part(v) for v in vals])


def fourier_coeffs(phi, M=None, ctx=DEFAULT_CTX):
    """[phi]_n for |n| <= M.  With M=None the window is the smallest power of
    two whose tail is below 10**(-digits+5)."""
    if M is not None and M < 1:
        raise ConfigError("window M must be >= 1")
    sampler = _Sampler(phi, ctx)
    return adaptive_coefficients(sampler, ctx, M, phi.label, phi.real)


def unwrapped_log(values, ctx):
    """Continuous logarithm along samples ordered around the circle.

    Returns (logs, max_jump, winding)."""
    with ctx.activate():
        pi = gmpy2.const_pi()
        two_pi = 2 * pi
        logs = np.empty(len(values), dtype=object)
        theta0 = gmpy2.phase(cnum(values[0]))
        theta = theta0
        prev = theta0
        max_jump = mpfr(0)
        for j, v in enumerate(values):
            v = cnum(v)
            if v == 0:
                raise WindingError(f"symbol vanishes at node {j}")
            a = gmpy2.phase(v)
            if j:
                d = a - prev
                d -= two_pi * gmpy2.rint(d / two_pi)
                theta += d
                max_jump = max(max_jump, abs(d))
            prev = a
            logs[j] = mpc(gmpy2.log(abs(v)), theta)
        d = theta0 - prev
        d -= two_pi * gmpy2.rint(d / two_pi)
        max_jump = max(max_jump, abs(d))
        winding = int(gmpy2.rint((theta + d - theta0) / two_pi))
        return logs, max_jump, winding


def log_fourier_coeffs(phi, M=None, ctx=DEFAULT_CTX):
    """[log phi]_n of the continuous logarithm; refuses nonzero winding.

    Samples are doubled until adjacent phase jumps stay below pi/2, which
    makes nearest-branch unwrapping unambiguous."""
    base = _Sampler(phi, ctx)
    with ctx.activate():
        half_pi = gmpy2.const_pi() / 2
    P = 64
    while True:
        logs, jump, winding = unwrapped_log(base(P), ctx)
        if jump < half_pi:
            break
        P *= 2
    if winding != 0:
        raise WindingError(f"{phi.label}: nonzero winding number {winding}")

    def log_sampler(Q):
        logs, jump, winding = unwrapped_log(base(Q), ctx)
        if jump >= half_pi or winding != 0:
            raise NumericError(f"{phi.label}: phase unwrapping became ambiguous at {Q} nodes")
        return logs

    return adaptive_coefficients(log_sampler, ctx, M, f"log {phi.label}", phi.real, start=P)


def samples_from_series(series, P, ctx):
    """Values of the Laurent series at the P-th roots of unity (P > 2M)."""
    if P <= 2 * series.M:
        raise ConfigError("need more nodes than coefficients")
    with ctx.activate():
        X = np.empty(P, dtype=object)
        X[:] = mpfr(0)
        M = series.M
        X[:M + 1] = series.coeffs[M:]
        X[P - M:] = series.coeffs[:M]
        return ifft(X, ctx) * P


def series_from_samples(values, M, ctx, label="", real=False):
    """Inverse of ``samples_from_series``: coefficients |n| <= M by FFT."""
    arr, center = _dft_window(obj_array(values), ctx)
    if M > center:
        raise ConfigError("window larger than the sample grid allows")
    vals = _window_of(arr, center, M).copy()
    if real:
        with ctx.activate():
            vals = _realify(vals, ctx.tol(10) * max(maxabs(vals), 1), label)
    return FourierSeries(vals, M, label, ctx.digits, len(values), real)


def coeff_decay_check(series, omega, b, ns=None, side=1, ctx=DEFAULT_CTX):
    """r_n = f_{side n} / (n^{-omega-1} b^{-n+omega}) over the trailing window.

    Returns a list of (n, r_n)."""
    if ns is None:
        ns = range(series.M - 9, series.M + 1)
    with ctx.activate():
        w = cnum(omega) if is_complex(omega) else mpfr(omega)
        bb = mpfr(b)
        out = []
        for n in ns:
            scale = mpfr(n) ** (-w - 1) * bb ** (w - n)
            out.append((n, series[side * n] / scale))
        return out


def parseval_gap(series, phi, ctx=DEFAULT_CTX):
    """|sum |f_n|^2 - mean |phi|^2| on the series' node grid."""
    with ctx.activate():
        P = pow2_at_least(max(series.nodes, 4 * series.M + 4))
        vals = sample(phi.func, roots_of_unity(P, ctx))
        quad = sum(abs(v) ** 2 for v in vals) / P
        return abs(sum(abs(c) ** 2 for c in series.coeffs) - quad)
