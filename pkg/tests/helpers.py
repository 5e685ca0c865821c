"""Random Szego-type symbols and border specs for the identity suites."""

from fractions import Fraction

import numpy as np

from bordered_toeplitz import symbols


def random_trig_symbol(rng, degree=3, size=Fraction(3, 10)):
    """exp of a random real Laurent polynomial with small coefficients."""
    coeffs = {}
    for n in range(-degree, degree + 1):
        coeffs[n] = Fraction(int(rng.integers(-1000, 1001)), 1000) * size
    return symbols.trig_exponent(coeffs)


def random_poles(rng, count):
    """Rational pole positions well inside or well outside the unit circle."""
    out = []
    for _ in range(count):
        r = Fraction(int(rng.integers(20, 61)), 100)
        if rng.random() < 0.5:
            r = 1 / r
        out.append(r if rng.random() < 0.5 else -r)
    return out


def random_border_spec(rng, poles=2):
    def q():
        return Fraction(int(rng.integers(-500, 501)), 250)

    cs = random_poles(rng, poles)
    return symbols.BorderSpec(
        a0=q(), a1=q(), b0=q(), hat_a0=q(), hat_a1=q(), hat_b0=q(),
        poles=tuple((q(), c) for c in cs), hat_poles=tuple((q(), c) for c in cs))


def rng(seed):
    return np.random.default_rng(seed)
