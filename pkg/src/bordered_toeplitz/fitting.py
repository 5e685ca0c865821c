"""Fitting data y_N to short expansions in powers of N (plus N and ln N).

A basis is a list of terms: an integer p stands for N^p and the string
"log" for ln N.  With as many points as terms the fit is an interpolation.
"""

from dataclasses import dataclass

import gmpy2
import numpy as np
from gmpy2 import mpfr
from sklearn.base import BaseEstimator

from .numkernel import DEFAULT_CTX, ConfigError, NumericError, maxabs, num, obj_array
from .toeplitz import SingularMatrixError, lu_factor, lu_solve

LOG = "log"


def power_basis(lowest, highest=0):
    """[N^highest, ..., N^lowest], e.g. power_basis(-9) for N^0..N^-9."""
    return list(range(highest, lowest - 1, -1))


def mixed_basis(n_inverse):
    """N, ln N, N^0, ..., N^-n_inverse."""
    return [1, LOG] + power_basis(-n_inverse)


def term_name(t):
    return "ln N" if t == LOG else f"N^{t}"


def coef_name(t):
    return "g_L" if t == LOG else f"g_{t}"


def _term(t, N):
    if t == LOG:
        return gmpy2.log(N)
    return N ** int(t)


def design_matrix(Ns, basis, ctx=DEFAULT_CTX):
    with ctx.activate():
        rows = [[_term(t, mpfr(N)) for t in basis] for N in Ns]
        A = np.empty((len(Ns), len(basis)), dtype=object)
        A[:, :] = rows
        return A


@dataclass(frozen=True)
class FitResult:
    basis: list
    g: list
    residual: object

    def coef(self, term):
        return self.g[self.basis.index(term)]

    def evaluate(self, N, ctx=DEFAULT_CTX):
        with ctx.activate():
            return sum((g * _term(t, mpfr(N)) for t, g in zip(self.basis, self.g)), mpfr(0))


def fit_series(points, basis, ctx=DEFAULT_CTX):
    """Interpolate (as many points as terms) or least squares via normal equations."""
    basis = list(basis)
    for t in basis:
        if t != LOG and int(t) != t:
            raise ConfigError(f"bad basis term {t!r}")
    if len(set(basis)) != len(basis):
        raise ConfigError("duplicate basis terms")
    Ns = [int(N) for N, _ in points]
    if len(set(Ns)) != len(Ns):
        raise ConfigError("fit points need distinct N")
    if len(points) < len(basis):
        raise ConfigError(f"{len(points)} points cannot determine {len(basis)} coefficients")
    with ctx.activate():
        y = obj_array([num(v) for _, v in points])
        A = design_matrix(Ns, basis, ctx)
        if len(points) == len(basis):
            M, rhs = A, y
        else:
            M, rhs = A.T.dot(A), A.T.dot(y)
        f = lu_factor(M, ctx)
        try:
            g = lu_solve(f, rhs, ctx, scale=maxabs(M.ravel()))
        except SingularMatrixError as exc:
            raise NumericError(f"singular fitting system: {exc}") from exc
        residual = maxabs(A.dot(g) - y)
        return FitResult(basis, list(g), residual)


class PowerSeriesFit(BaseEstimator):
    """Estimator wrapper around ``fit_series``.

    X holds the N values (shape (n,) or (n, 1)); y is any sequence of
    numbers or decimal strings.  Coefficients stay at working precision."""

    def __init__(self, basis=(0, -1), digits=80):
        self.basis = basis
        self.digits = digits

    def _ctx(self):
        return DEFAULT_CTX.with_digits(self.digits)

    @staticmethod
    def _ns(X):
        X = np.asarray(X, dtype=object)
        if X.ndim == 2:
            if X.shape[1] != 1:
                raise ConfigError("X must have a single column of N values")
            X = X[:, 0]
        return [int(N) for N in X]

    def fit(self, X, y):
        Ns = self._ns(X)
        if len(Ns) != len(y):
            raise ConfigError("X and y lengths differ")
        res = fit_series(list(zip(Ns, y)), list(self.basis), self._ctx())
        self.result_ = res
        self.coef_ = obj_array(res.g)
        self.residual_ = res.residual
        return self

    def predict(self, X):
        if not hasattr(self, "result_"):
            raise ConfigError("estimator is not fitted")
        ctx = self._ctx()
        return obj_array([self.result_.evaluate(N, ctx) for N in self._ns(X)])
