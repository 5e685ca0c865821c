"""Symbols: functions analytic on an annulus around the unit circle.

A ``Symbol`` closure reads the active gmpy2 precision, so a symbol built once
can be sampled at any working precision.  Parameters that depend on the
precision (Ising constants, say) are recomputed lazily per precision.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Tuple

import gmpy2
from gmpy2 import mpc, mpfr

from .numkernel import ConfigError, DEFAULT_CTX, is_complex, log_principal, num

ANNULUS_EPS = Fraction(1, 1000)
POLE_SWITCH = 1e-6


def _exact(x):
    """Keep user inputs exact so they can be re-rounded at any precision."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise ConfigError(f"expected a real number, got {x!r}")


def per_precision(builder):
    """Memoise ``builder()`` on the active gmpy2 precision."""
    cache = {}

    def get():
        bits = gmpy2.get_context().precision
        value = cache.get(bits)
        if value is None:
            value = cache[bits] = builder()
        return value

    return get


def _exact_or_fixed(x):
    """Exact inputs are re-rounded at each precision; mpfr/mpc stay as given."""
    if isinstance(x, (int, Fraction, str)):
        q = _exact(x)
        return per_precision(lambda: num(q))
    v = num(x)
    return lambda: v


@dataclass(frozen=True)
class Symbol:
    func: Callable
    inner_radius: object
    outer_radius: object
    label: str
    real: bool = False
    szego: bool = True

    def __call__(self, z):
        return self.func(num(z))

    def eval(self, z, ctx=DEFAULT_CTX):
        with ctx.activate():
            return self.func(num(z))


def symbol(func, inner, outer, label, real=False, szego=True):
    inner, outer = mpfr(inner), mpfr(outer)
    if not inner < 1 < outer:
        raise ConfigError(f"{label}: annulus ({inner}, {outer}) does not contain the unit circle")
    return Symbol(func, inner, outer, label, real, szego)


# -- simple symbols ---------------------------------------------------------

def constant(value=1):
    get = _exact_or_fixed(value)
    return symbol(lambda z: get(), 0, gmpy2.inf(), f"const({value})", real=not is_complex(get()))


def laurent_polynomial(coeffs, label=None):
    """sum_n c_n z^n for a finite dict {n: c_n}."""
    cs = {int(n): _exact_or_fixed(c) for n, c in coeffs.items()}
    real = not any(is_complex(c()) for c in cs.values())
    inner = 0 if min(cs, default=0) >= 0 else mpfr("1e-30")
    outer = gmpy2.inf() if max(cs, default=0) <= 0 else mpfr("1e30")

    def f(z):
        return sum((c() * z ** n for n, c in cs.items()), mpfr(0))

    return symbol(f, inner, outer, label or f"laurent{sorted(cs)}", real=real, szego=False)


def trig_exponent(coeffs, label=None):
    """exp(p(z)) with p a Laurent polynomial; Szego-type, winding zero."""
    cs = {int(n): _exact_or_fixed(c) for n, c in coeffs.items()}
    real = not any(is_complex(c()) for c in cs.values())

    def f(z):
        return gmpy2.exp(sum((c() * z ** n for n, c in cs.items()), mpfr(0)))

    return symbol(f, mpfr("0.05"), mpfr(20), label or "exp(p)", real=real)


def geometric(b):
    """1/(1 - z/b), |b| > 1."""
    get = _exact_or_fixed(b)
    bb = get()
    if abs(bb) <= 1:
        raise ConfigError("geometric symbol needs |b| > 1")

    def f(z):
        return 1 / (1 - z / get())

    return symbol(f, 0, abs(bb), f"1/(1-z/{b})", real=not is_complex(bb), szego=True)


def monomial(k):
    k = int(k)
    inner = 0 if k >= 0 else mpfr("1e-30")
    outer = gmpy2.inf() if k <= 0 else mpfr("1e30")
    return symbol(lambda z: z ** k, inner, outer, f"z^{k}", real=True, szego=(k == 0))


def times_monomial(phi, k):
    """z^k phi(z)."""
    k = int(k)
    return Symbol(lambda z: z ** k * phi.func(z), phi.inner_radius, phi.outer_radius,
                  f"z^{k}*{phi.label}", phi.real, k == 0 and phi.szego)


def reflect(phi):
    """phi~(z) = phi(1/z)."""
    inner = 1 / phi.outer_radius if phi.outer_radius != gmpy2.inf() else mpfr(0)
    outer = 1 / phi.inner_radius if phi.inner_radius != 0 else gmpy2.inf()
    return Symbol(lambda z: phi.func(1 / z), inner, outer, f"{phi.label}~", phi.real, phi.szego)


def linear_combination(terms, label=None):
    """sum a_i psi_i over [(a_i, psi_i), ...] on the common annulus."""
    terms = [(_exact_or_fixed(a), s) for a, s in terms]
    inner = max(s.inner_radius for _, s in terms)
    outer = min(s.outer_radius for _, s in terms)
    real = all(s.real and not is_complex(a()) for a, s in terms)

    def f(z):
        return sum((a() * s.func(z) for a, s in terms), mpfr(0))

    return symbol(f, inner, outer, label or "lincomb", real=real, szego=False)


def from_function(func, inner, outer, label, real=False, szego=True):
    return symbol(func, inner, outer, label, real, szego)


def scale_symbol(phi, rho):
    """phi_rho(z) = phi(rho z).  Determinants are unchanged by this."""
    get = _exact_or_fixed(rho)
    r = get()
    if is_complex(r) or r <= 0:
        raise ConfigError("rho must be a positive real")
    if not phi.inner_radius < r < phi.outer_radius:
        raise ConfigError(f"rho={rho} outside ({phi.inner_radius}, {phi.outer_radius})")
    return Symbol(lambda z: phi.func(get() * z), phi.inner_radius / r, phi.outer_radius / r,
                  f"{phi.label}@rho={rho}", phi.real, phi.szego)


# -- Ising parameters -------------------------------------------------------

def _critical_inverse_temperature(jh, jv):
    """x = 1/Tc solving sinh(2 jh x) sinh(2 jv x) = 1: bisection, then Newton."""
    g = lambda x: math.sinh(2 * float(jh) * x) * math.sinh(2 * float(jv) * x) - 1
    lo, hi = 0.0, 1.0
    while g(hi) < 0:
        hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    Jh, Jv = num(jh), num(jv)
    x = mpfr(0.5 * (lo + hi))
    prec = gmpy2.get_context().precision
    for _ in range(100):
        a, b = 2 * Jh * x, 2 * Jv * x
        gx = gmpy2.sinh(a) * gmpy2.sinh(b) - 1
        dg = 2 * Jh * gmpy2.cosh(a) * gmpy2.sinh(b) + 2 * Jv * gmpy2.sinh(a) * gmpy2.cosh(b)
        step = gx / dg
        x -= step
        if step == 0 or abs(step) <= abs(x) * mpfr(2) ** (8 - prec):
            break
    return x


@dataclass(frozen=True)
class IsingValues:
    Jh: object
    Jv: object
    T: object
    Sh: object
    Sv: object
    Ch: object
    Cv: object
    k: object
    c_star: object
    Tc: object


@dataclass(frozen=True)
class IsingParams:
    """Couplings J_h/k_B, J_v/k_B and temperature T (k_B absorbed).

    The derived fields are those at the construction precision; ``values()``
    gives the same quantities at whatever precision is active.
    """

    JhOverKb: Fraction
    JvOverKb: Fraction
    T: Fraction
    Sh: object = field(compare=False)
    Sv: object = field(compare=False)
    Ch: object = field(compare=False)
    Cv: object = field(compare=False)
    k: object = field(compare=False)
    cStar: object = field(compare=False)
    Tc: object = field(compare=False)
    _values: Callable = field(compare=False, repr=False)

    def values(self):
        return self._values()


def _ising_values(jh, jv, t):
    Jh, Jv, T = num(jh), num(jv), num(t)
    Sh, Sv = gmpy2.sinh(2 * Jh / T), gmpy2.sinh(2 * Jv / T)
    Ch, Cv = gmpy2.cosh(2 * Jh / T), gmpy2.cosh(2 * Jv / T)
    Tc = 1 / _critical_inverse_temperature(jh, jv)
    return IsingValues(Jh, Jv, T, Sh, Sv, Ch, Cv, Sh * Sv, -Sh / Sv, Tc)


def ising_params(JhOverKb, JvOverKb, T, ctx=DEFAULT_CTX):
    """Derived Ising constants; only the low-temperature regime T < Tc."""
    jh, jv, t = _exact(JhOverKb), _exact(JvOverKb), _exact(T)
    if jh <= 0 or jv <= 0 or t <= 0:
        raise ConfigError("couplings and temperature must be positive")
    values = per_precision(lambda: _ising_values(jh, jv, t))
    with ctx.activate():
        v = values()
    if not v.k > 1:
        raise ConfigError(f"T={float(t)} is not in the low-temperature regime (Tc={float(v.Tc):.12f})")
    return IsingParams(jh, jv, t, v.Sh, v.Sv, v.Ch, v.Cv, v.k, v.c_star, v.Tc, values)


def _k_getter(params_or_k):
    if isinstance(params_or_k, IsingParams):
        return lambda: params_or_k.values().k
    kk = _exact(params_or_k) if not isinstance(params_or_k, (type(mpfr(0)),)) else params_or_k
    get = per_precision(lambda: num(kk))
    return get


def _k_float(params_or_k):
    return float(params_or_k.k if isinstance(params_or_k, IsingParams) else num(params_or_k))


# -- Ising symbols ----------------------------------------------------------

def phi_hat_value(z, k):
    """exp(1/2 (log(1 - 1/(k z)) - log(1 - z/k))) with principal logs."""
    return gmpy2.exp((log_principal(1 - 1 / (k * z)) - log_principal(1 - z / k)) / 2)


def ising_phi(params_or_k):
    """The diagonal/next-to-diagonal symbol phi-hat; analytic on 1/k < |z| < k."""
    kf = _k_float(params_or_k)
    if not kf > 1:
        raise ConfigError("phi-hat needs k > 1")
    get_k = _k_getter(params_or_k)
    eps = float(ANNULUS_EPS)

    def f(z):
        return phi_hat_value(z, get_k())

    return symbol(f, mpfr(1 / kf) * (1 + eps), mpfr(kf) * (1 - eps), f"phi_hat(k={kf:.10g})", real=True)


def _psi_hat_removable(z, c, v):
    """(C_v/S_v) (z phi(z) - c phi(c)) / (z - c), with c the working-precision c*.

    z and c are exact binary numbers, so z - c is exact; the rounding of c*
    only moves the removable point by one ulp."""
    d = z - c
    g_c = c * phi_hat_value(c, v.k)
    if d == 0:
        # derivative of z phi-hat(z) at c
        return v.Cv / v.Sv * phi_hat_value(c, v.k) * (1 + c * (1 / (c * (v.k * c - 1)) + 1 / (v.k - c)) / 2)
    return v.Cv / v.Sv * (z * phi_hat_value(z, v.k) - g_c) / d


def ising_psi(params):
    """psi-hat(z) = (C_v z phi-hat(z) + C_h) / (S_v (z - c*)).

    The singularity at c* is removable.  Within 1e-6 of c* the difference
    quotient form is used, with enough extra bits to cover the cancellation.
    """
    if not isinstance(params, IsingParams):
        raise ConfigError("ising_psi needs IsingParams")
    get = params.values
    eps = float(ANNULUS_EPS)
    kf = float(params.k)

    def f(z):
        v = get()
        d = z - v.c_star
        if abs(d) >= POLE_SWITCH:
            return (v.Cv * z * phi_hat_value(z, v.k) + v.Ch) / (v.Sv * d)
        c = v.c_star
        prec = gmpy2.get_context().precision
        extra = 20 + (int(-gmpy2.log2(abs(d))) if d != 0 else 0)
        with gmpy2.context(gmpy2.get_context(), precision=prec + extra):
            out = _psi_hat_removable(z, c, get())
        return +out

    return symbol(f, mpfr(1 / kf) * (1 + eps), mpfr(kf) * (1 - eps), "psi_hat", real=True)


def perk_phi(params_or_k, theta):
    """Phi(theta) = (k - e^{-i theta}) / sqrt(k^2 + 1 - 2k cos theta)."""
    k = _k_getter(params_or_k)()
    th = num(theta)
    s, c = gmpy2.sin_cos(th)
    return (k - mpc(c, -s)) / gmpy2.sqrt(k * k + 1 - 2 * k * c)


def perk_psi(params, theta):
    """Psi(theta) in the Au-Yang--Perk form, evaluated directly in theta.

    Code path independent of ``ising_psi``: only real square roots of the
    positive quantity k^2 + 1 - 2k cos(theta) appear.
    """
    v = params.values()
    th = num(theta)
    s, c = gmpy2.sin_cos(th)
    root = gmpy2.sqrt(v.k * v.k + 1 - 2 * v.k * c)
    inner = v.Ch * (v.Sh + v.Sv * mpc(c, -s)) / (v.Ch * v.Cv + root)
    return (v.Sh * v.Cv - inner) / root


# -- rational borders -------------------------------------------------------

def _spec_value(x):
    """Rationals stay exact (mpq) and round only when combined with mpfr."""
    if isinstance(x, (int, Fraction)) or (isinstance(x, str) and "j" not in x):
        return gmpy2.mpq(_exact(x))
    if isinstance(x, type(gmpy2.mpq(0))):
        return x
    return num(x)


@dataclass(frozen=True)
class BorderSpec:
    """psi = q1 phi + q2 with
    q1 = a0 + a1 z + b0/z + sum b_j z/(z - c_j),
    q2 = hat_a0 + hat_a1 z + hat_b0/z + sum hat_b_j/(z - c_j)."""

    a0: object = 0
    a1: object = 0
    b0: object = 0
    poles: Tuple = ()
    hat_a0: object = 0
    hat_a1: object = 0
    hat_b0: object = 0
    hat_poles: Tuple = ()

    def __post_init__(self):
        for name in ("a0", "a1", "b0", "hat_a0", "hat_a1", "hat_b0"):
            object.__setattr__(self, name, _spec_value(getattr(self, name)))
        poles = tuple((_spec_value(b), _spec_value(c)) for b, c in self.poles)
        hat = tuple((_spec_value(b), _spec_value(c)) for b, c in self.hat_poles)
        if not hat and poles:
            hat = tuple((gmpy2.mpq(0), c) for _, c in poles)
        if not poles and hat:
            poles = tuple((gmpy2.mpq(0), c) for _, c in hat)
        if [c for _, c in poles] != [c for _, c in hat]:
            raise ConfigError("poles and hat_poles must share the same c_j list")
        for _, c in poles:
            if c == 0:
                raise ConfigError("pole c_j must be nonzero")
            if abs(abs(c) - 1) < mpfr("1e-20"):
                raise ConfigError("pole c_j lies on the unit circle; use scale_symbol / scale_border_spec")
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "hat_poles", hat)

    @property
    def c(self):
        return [c for _, c in self.poles]

    def q1(self, z):
        out = self.a0 + self.a1 * z + self.b0 / z
        for b, c in self.poles:
            out += b * z / (z - c)
        return out

    def q2(self, z):
        out = self.hat_a0 + self.hat_a1 * z + self.hat_b0 / z
        for b, c in self.hat_poles:
            out += b / (z - c)
        return out

    def is_real(self):
        vals = [self.a0, self.a1, self.b0, self.hat_a0, self.hat_a1, self.hat_b0]
        vals += [x for p in self.poles + self.hat_poles for x in p]
        return not any(is_complex(v) and v.imag != 0 for v in vals)


def rational_border(phi, spec):
    """psi = q1 phi + q2 on phi's annulus cut down to avoid every c_j."""
    inner, outer = phi.inner_radius, phi.outer_radius
    eps = 1 + mpfr(ANNULUS_EPS)
    for c in spec.c:
        if abs(c) < 1:
            inner = max(inner, abs(c) * eps)
        else:
            outer = min(outer, abs(c) / eps)
    if not inner < 1 < outer:
        raise ConfigError("rational border: empty annulus of analyticity")

    def f(z):
        return spec.q1(z) * phi.func(z) + spec.q2(z)

    return Symbol(f, inner, outer, f"border({phi.label})", phi.real and spec.is_real(), False)


def scale_border_spec(spec, rho):
    """Spec of z -> psi(rho z) in terms of phi_rho: poles move to c_j/rho."""
    r = num(rho)
    return BorderSpec(
        a0=spec.a0, a1=spec.a1 * r, b0=spec.b0 / r,
        poles=tuple((b, c / r) for b, c in spec.poles),
        hat_a0=spec.hat_a0, hat_a1=spec.hat_a1 * r, hat_b0=spec.hat_b0 / r,
        hat_poles=tuple((b / r, c / r) for b, c in spec.hat_poles),
    )


def ising_border_spec(params):
    """psi-hat as a rational border of phi-hat: one pole at c*,
    b_1 = C_v/S_v and hat_b_1 = C_h/S_v, every other parameter zero.

    For J_h = J_v the pole sits on the unit circle; pass the result of
    ``ising_border_spec_scaled`` instead.
    """
    v = params.values()
    return BorderSpec(poles=((v.Cv / v.Sv, v.c_star),), hat_poles=((v.Ch / v.Sv, v.c_star),))


def ising_border_spec_scaled(params, rho):
    """The Ising border after phi(z) -> phi(rho z); valid also for J_h = J_v."""
    v = params.values()
    return BorderSpec(poles=((v.Cv / v.Sv, v.c_star / rho),),
                      hat_poles=((v.Ch / v.Sv / rho, v.c_star / rho),))


def pole_border(phi, c, d=0, label=None):
    """psi = (phi z - d)/(z - c), the border family of the Ising problem."""
    get_c, get_d = _exact_or_fixed(c), _exact_or_fixed(d)
    cc, dd = get_c(), get_d()
    inner, outer = phi.inner_radius, phi.outer_radius
    eps = 1 + mpfr(ANNULUS_EPS)
    if abs(cc) < 1:
        inner = max(inner, abs(cc) * eps)
    else:
        outer = min(outer, abs(cc) / eps)
    if not inner < 1 < outer:
        raise ConfigError("pole border: empty annulus")

    def f(z):
        return (phi.func(z) * z - get_d()) / (z - get_c())

    real = phi.real and not is_complex(cc) and not is_complex(dd)
    return Symbol(f, inner, outer, label or f"({phi.label} z - d)/(z - {c})", real, False)
