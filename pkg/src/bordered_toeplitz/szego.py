"""Szego constants, Wiener-Hopf factors, alpha and the p+ decomposition.

Everything here is built from the coefficients L_n = [log phi]_n.  With that
notation phi_+ = exp(sum_{n>=0} L_n z^n) and phi_- = exp(sum_{n>=1} L_{-n} z^{-n}),
so phi_+(0) = G and phi_-(infinity) = 1.
"""

from dataclasses import dataclass

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from .fourier import (FourierSeries, adaptive_coefficients, pow2_at_least, samples_from_series,
                      unwrapped_log)
from .numkernel import (DEFAULT_CTX, ConfigError, NumericError, cnum, maxabs, obj_array,
                        roots_of_unity, sample, sum_series)


@dataclass(frozen=True)
class SzegoData:
    G: object
    E: object
    log_series: FourierSeries


def szego_constants(log_series, ctx=DEFAULT_CTX):
    """G = exp(L_0), E = exp(sum_{n>=1} n L_n L_{-n})."""
    L = log_series
    with ctx.activate():
        G = gmpy2.exp(L[0])
        terms = (n * L[n] * L[-n] for n in range(1, L.M + 1))
        try:
            s = sum_series(terms, ctx, loss=-5, label="E[phi]")
        except NumericError as exc:
            raise NumericError(f"insufficient window for E[phi]: {exc}") from exc
        return SzegoData(G, gmpy2.exp(s), L)


def _exponent_series(log_series, side, sign, ctx):
    """Coefficients of sign * (the side's part of log phi), as a window array."""
    L = log_series
    c = np.empty(2 * L.M + 1, dtype=object)
    c[:] = mpfr(0)
    if side == "plus":
        c[L.M:] = L.coeffs[L.M:]
    elif side == "minus":
        c[:L.M] = L.coeffs[:L.M]
    else:
        raise ConfigError("side must be 'plus' or 'minus'")
    if sign < 0:
        with ctx.activate():                 # negation rounds to the active precision
            c = -c
    return FourierSeries(c, L.M, f"{side}{'' if sign > 0 else '^-1'}", L.digits, 0, L.real)


def factor_series(log_series, side, power=1, M=None, ctx=DEFAULT_CTX):
    """Fourier coefficients of phi_+^{power} (indices 0..M) or phi_-^{power}
    (indices -M..0), by sampling the exponent on a grid and one FFT.

    With M=None the window is chosen by decay, as for ``fourier_coeffs``."""
    if power not in (1, -1):
        raise ConfigError("power must be +1 or -1")
    expo = _exponent_series(log_series, side, power, ctx)
    label = f"phi_{side}^{power}"

    def grid(P):
        with ctx.activate():
            vals = samples_from_series(expo, P, ctx)
            return obj_array([gmpy2.exp(v) for v in vals])

    start = pow2_at_least(4 * max(M or 0, log_series.M) + 4)
    out = adaptive_coefficients(grid, ctx, M, label, log_series.real, start=start)
    with ctx.activate():
        M = out.M
        # analytic factors: the other half of the window must vanish
        stray = out.coeffs[:M] if side == "plus" else out.coeffs[M + 1:]
        if maxabs(stray) > ctx.tol(5) * max(maxabs(out.coeffs), 1):
            raise NumericError(f"{label} coefficients did not separate; widen the log window")
        c = out.coeffs.copy()
        if side == "plus":
            c[:M] = mpfr(0)
        else:
            c[M + 1:] = mpfr(0)
        return FourierSeries(c, M, label, ctx.digits, out.nodes, out.real)


def factor_series_recurrence(log_series, side, power=1, M=None, ctx=DEFAULT_CTX):
    """The same coefficients from the exponential power-series recurrence
    n b_n = sum_{k=1}^n k a_k b_{n-k} (slow; kept as an independent route)."""
    M = M or log_series.M
    L = log_series
    with ctx.activate():
        if side == "plus":
            a = [power * L.get(n) for n in range(M + 1)]
            b0 = gmpy2.exp(a[0])
        else:
            a = [mpfr(0)] + [power * L.get(-n) for n in range(1, M + 1)]
            b0 = mpfr(1)
        ka = obj_array([k * a[k] for k in range(M + 1)])
        b = [b0]
        for n in range(1, M + 1):
            b.append(ka[1:n + 1].dot(obj_array(b[n - 1::-1])) / n)
        c = np.empty(2 * M + 1, dtype=object)
        c[:] = mpfr(0)
        if side == "plus":
            c[M:] = b
        else:
            c[:M + 1] = b[::-1]
        return FourierSeries(c, M, f"phi_{side}^{power}", ctx.digits, 0, L.real)


def wiener_hopf_eval(log_series, z, side, ctx=DEFAULT_CTX):
    """phi_+(z) or phi_-(z) from the truncated exponent series."""
    L = log_series
    with ctx.activate():
        z = cnum(z) if isinstance(z, complex) else z
        if side == "plus":
            w, idx = z, range(0, L.M + 1)
        elif side == "minus":
            if z == 0:
                raise ConfigError("phi_- is not defined at z = 0")
            w, idx = 1 / z, range(-1, -L.M - 1, -1)
        else:
            raise ConfigError("side must be 'plus' or 'minus'")
        s = mpfr(0)
        wp = mpfr(1) if side == "plus" else w
        terms = []
        for n in idx:
            t = L[n] * wp
            terms.append(abs(t))
            s += t
            wp *= w
        # the window itself is only trusted to 10**(-digits+5) on |w| = 1
        tol = ctx.tol(5)
        edge = max(terms[-2:] + [tol * abs(w) ** L.M])
        if edge > tol * max(1, abs(s)):
            raise NumericError(f"z = {z} is outside the convergence region of phi_{side}")
        return gmpy2.exp(s)


def alpha_eval(log_series, z, ctx=DEFAULT_CTX):
    """alpha = phi_+ inside the unit circle, 1/phi_- outside."""
    with ctx.activate():
        r = abs(z)
        if abs(r - 1) <= ctx.tol(10):
            raise ConfigError("alpha: z is on the jump contour |z| = 1")
        if r < 1:
            return wiener_hopf_eval(log_series, z, "plus", ctx)
        return 1 / wiener_hopf_eval(log_series, z, "minus", ctx)


def alpha_cauchy(phi, z, nodes, ctx=DEFAULT_CTX):
    """exp of the Cauchy integral (1/2 pi i) int_T log phi(t) dt / (t - z),
    by the trapezoid rule on ``nodes`` points with an unwrapped logarithm."""
    with ctx.activate():
        roots = roots_of_unity(nodes, ctx)
        logs, _, winding = unwrapped_log(sample(phi.func, roots), ctx)
        if winding:
            raise NumericError("nonzero winding number")
        acc = mpc(0)
        for g, t in zip(logs, roots):
            acc += g * t / (t - z)
        return gmpy2.exp(acc / nodes)


def minus_inverse_times(log_series, psi_series, n_max, ctx=DEFAULT_CTX, phim_inv=None):
    """[phi_-^{-1} psi]_n for n = 0..n_max by direct convolution
    sum_{m>=0} [phi_-^{-1}]_{-m} psi_{n+m}."""
    with ctx.activate():
        fm = phim_inv or factor_series(log_series, "minus", -1, ctx=ctx)
        a = fm.coeffs[fm.M::-1]              # [phi_-^{-1}]_{0}, _{-1}, ...
        # the terms dropped past the psi window are bounded by |a| there
        # times the size of psi at its edge
        edge = psi_series.tail(max(psi_series.M - 8, 0))
        out = []
        for n in range(n_max + 1):
            length = min(len(a), psi_series.M - n + 1)
            if length <= 0:
                raise ConfigError("psi window too small for phi_-^{-1} psi")
            tail_a = maxabs(a[length:]) if length < len(a) else mpfr(0)
            if n == 0 and tail_a * edge > ctx.tol(5) * max(1, maxabs(a)):
                raise ConfigError("psi window too short for the decay of phi_-^{-1} psi")
            out.append(a[:length].dot(psi_series.coeffs[psi_series.M + n: psi_series.M + n + length]))
        return obj_array(out)


def p_plus_decompose(phi_series, log_series, psi_series, M, ctx=DEFAULT_CTX):
    """Coefficients 0..M of p_+ = phi_+^{-1} P[phi_-^{-1} psi], P the Riesz
    projection onto nonnegative modes; psi = phi p_+ + p_-."""
    if psi_series.M < M:
        raise ConfigError(f"psi window {psi_series.M} < requested {M}")
    with ctx.activate():
        u = minus_inverse_times(log_series, psi_series, M, ctx)
        fp = factor_series(log_series, "plus", -1, M=M, ctx=ctx)
        b = fp.coeffs[fp.M:]                 # [phi_+^{-1}]_0..M
        p = [b[:n + 1].dot(u[n::-1]) for n in range(M + 1)]
        c = np.empty(2 * M + 1, dtype=object)
        c[:] = mpfr(0)
        c[M:] = p
        return FourierSeries(c, M, "p_plus", ctx.digits, 0, psi_series.real and log_series.real)
