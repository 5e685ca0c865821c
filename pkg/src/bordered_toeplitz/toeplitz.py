"""Dense high-precision Toeplitz linear algebra.

T_N(phi) has entries phi_{j-k}.  The bordered matrix keeps the first N-1
columns of T_N(phi)^T and replaces the last by psi_{N-1}, ..., psi_0.
"""

from dataclasses import dataclass

import numpy as np
from gmpy2 import mpfr

from .numkernel import DEFAULT_CTX, ConfigError, NumericError, maxabs, obj_array, sqrt_principal


class SingularMatrixError(NumericError):
    pass


def toeplitz_matrix(series, N):
    """N x N matrix with entries phi_{j-k}."""
    series.require(N - 1, f"T_{N}")
    j = np.arange(N)
    return series.coeffs[(j[:, None] - j[None, :]) + series.M]


def bordered_matrix(phi_series, psi_series, N):
    if N < 2:
        raise ConfigError("bordered determinants need N >= 2")
    phi_series.require(N - 1, f"D^B_{N}")
    psi_series.require(N - 1, f"D^B_{N}")
    j = np.arange(N)
    A = phi_series.coeffs[(j[None, :] - j[:, None]) + phi_series.M].copy()
    A[:, N - 1] = psi_series.coeffs[(N - 1 - j) + psi_series.M]
    return A


@dataclass
class LU:
    lu: np.ndarray
    perm: np.ndarray
    sign: int
    singular: bool
    min_pivot: object


def lu_factor(A, ctx=DEFAULT_CTX):
    """Gaussian elimination with partial pivoting (row swaps), in place on a copy."""
    with ctx.activate():
        A = np.array(A, dtype=object, copy=True)
        n = A.shape[0]
        perm = np.arange(n)
        sign = 1
        singular = False
        min_pivot = None
        for k in range(n):
            col = [abs(x) for x in A[k:, k]]
            p = k + int(np.argmax(col))
            if col[p - k] == 0:
                singular = True
                min_pivot = mpfr(0)
                continue
            if p != k:
                A[[k, p]] = A[[p, k]]
                perm[[k, p]] = perm[[p, k]]
                sign = -sign
            piv = A[k, k]
            a = abs(piv)
            min_pivot = a if min_pivot is None else min(min_pivot, a)
            if k + 1 < n:
                f = A[k + 1:, k] / piv
                A[k + 1:, k] = f
                A[k + 1:, k + 1:] -= np.outer(f, A[k, k + 1:])
        return LU(A, perm, sign, singular, min_pivot)


def determinant(A, ctx=DEFAULT_CTX):
    f = lu_factor(A, ctx)
    if f.singular:
        return mpfr(0)
    with ctx.activate():
        d = mpfr(f.sign)
        for k in range(f.lu.shape[0]):
            d *= f.lu[k, k]
        return d


def lu_solve(f, rhs, ctx=DEFAULT_CTX, scale=None):
    with ctx.activate():
        n = f.lu.shape[0]
        thresh = ctx.tol(10) * (scale if scale is not None else 1)
        if f.singular or f.min_pivot <= thresh:
            raise SingularMatrixError(f"pivot {f.min_pivot} below the singularity threshold")
        b = obj_array(rhs)[f.perm]
        LU_ = f.lu
        y = np.empty(n, dtype=object)
        for i in range(n):
            y[i] = b[i] - (LU_[i, :i].dot(y[:i]) if i else 0)
        x = np.empty(n, dtype=object)
        for i in range(n - 1, -1, -1):
            s = y[i] - (LU_[i, i + 1:].dot(x[i + 1:]) if i + 1 < n else 0)
            x[i] = s / LU_[i, i]
        return x


def toeplitz_det(phi_series, N, ctx=DEFAULT_CTX):
    """D_N[phi] = det T_N(phi) by LU with partial pivoting."""
    if N < 1:
        raise ConfigError("N must be >= 1")
    return determinant(toeplitz_matrix(phi_series, N), ctx)


def bordered_det(phi_series, psi_series, N, ctx=DEFAULT_CTX):
    """D^B_N[phi; psi]."""
    return determinant(bordered_matrix(phi_series, psi_series, N), ctx)


@dataclass
class SolveResult:
    x: np.ndarray
    residual: object


def solve(A, rhs, ctx=DEFAULT_CTX):
    with ctx.activate():
        f = lu_factor(A, ctx)
        x = lu_solve(f, rhs, ctx, scale=maxabs(A.ravel()))
        r = maxabs(A.dot(x) - obj_array(rhs))
        return SolveResult(x, r)


def toeplitz_solve(phi_series, rhs, N, ctx=DEFAULT_CTX, transpose=False):
    """Solve T_N(phi) x = rhs (or its transpose); residual max-norm reported."""
    if len(rhs) != N:
        raise ConfigError("rhs length must equal N")
    T = toeplitz_matrix(phi_series, N)
    return solve(T.T if transpose else T, rhs, ctx)


def f_n_ratio(phi_series, psi_series, N, ctx=DEFAULT_CTX):
    """F_N = e_0^T T_N(phi)^{-1} T_N(psi) e_0, one solve against the first
    column (psi_0, ..., psi_{N-1}) of T_N(psi)."""
    psi_series.require(N - 1, "F_N")
    col = psi_series.range(0, N - 1)
    return toeplitz_solve(phi_series, col, N, ctx).x[0]


def cramer_last(phi_series, psi_series, N, ctx=DEFAULT_CTX):
    """x_{N-1} of T_N(phi~) x = (psi_{N-1}, ..., psi_0); D^B_N = D_N x_{N-1}.

    T_N(phi~) is T_N(phi)^T, since phi~_n = phi_{-n}."""
    psi_series.require(N - 1, "Cramer")
    rhs = psi_series.range(0, N - 1)[::-1]
    return toeplitz_solve(phi_series, rhs, N, ctx, transpose=True).x[N - 1]


@dataclass
class BopucData:
    n: int
    kappa_n: object
    Q_coeffs: list
    Qhat_coeffs: list
    D_n: object
    D_n1: object

    def Q(self, z):
        return sum((c * z ** j for j, c in enumerate(self.Q_coeffs)), mpfr(0))

    def Qhat(self, z):
        return sum((c * z ** j for j, c in enumerate(self.Qhat_coeffs)), mpfr(0))


def bopuc_poly(phi_series, n, ctx=DEFAULT_CTX):
    """Q_n, Q-hat_n of the biorthogonal system, kappa_n = sqrt(D_n / D_{n+1}).

    The determinantal definitions expand along their last row/column into
    cofactors, which are D_{n+1} times the last column/row of T_{n+1}^{-1}."""
    with ctx.activate():
        T = toeplitz_matrix(phi_series, n + 1)
        D_n = toeplitz_det(phi_series, n, ctx) if n else mpfr(1)
        f = lu_factor(T, ctx)
        if f.singular or D_n == 0:
            raise SingularMatrixError(f"D_{n} or D_{n + 1} vanishes")
        D_n1 = mpfr(f.sign)
        for k in range(n + 1):
            D_n1 *= f.lu[k, k]
        e = obj_array([mpfr(0)] * n + [mpfr(1)])
        col = lu_solve(f, e, ctx, scale=maxabs(T.ravel()))
        row = solve(T.T, e, ctx).x
        kappa = sqrt_principal(D_n / D_n1)
        return BopucData(n, kappa, list(col / kappa), list(row / kappa), D_n, D_n1)


def cauchy_moment(phi_series, q, z, ctx=DEFAULT_CTX):
    """J_q(z) = integral over T of zeta^q phi(zeta) / (zeta - z) dzeta / (2 pi i).

    Expanding the Cauchy kernel gives sum_p z^p phi_{p-q} inside the circle
    and -sum_p z^{-p-1} phi_{-q-p-1} outside."""
    with ctx.activate():
        tol = ctx.tol(-5)
        inside = abs(z) < 1
        w = z if inside else 1 / z
        total = mpfr(0)
        wp = mpfr(1)
        for p in range(0, 10 ** 6):
            idx = p - q if inside else -q - p - 1
            if abs(idx) > phi_series.M:
                if abs(wp) * phi_series.tail(phi_series.M) > tol * max(abs(total), 1):
                    raise ConfigError("Fourier window too small for the Cauchy moment")
                break
            total += wp * phi_series[idx]
            wp *= w
        return total if inside else -total / z


def x11(phi_series, z, n, ctx=DEFAULT_CTX, data=None):
    """X_11(z; n) = Q_n(z) / kappa_n."""
    data = data or bopuc_poly(phi_series, n, ctx)
    with ctx.activate():
        return data.Q(z) / data.kappa_n


def x12(phi_series, z, n, ctx=DEFAULT_CTX, data=None):
    """X_12(z; n): the Cauchy transform of zeta^{-n} Q_n phi / kappa_n,
    i.e. the determinant of T_{n+1} with last row J_{m-n}(z), over D_n."""
    data = data or bopuc_poly(phi_series, n, ctx)
    with ctx.activate():
        acc = mpfr(0)
        for m, c in enumerate(data.Q_coeffs):
            acc += c * cauchy_moment(phi_series, m - n, z, ctx)
        return acc / data.kappa_n
