"""Session fixtures: the Ising symbols at the figure parameters are costly
to expand, so every test shares one set of coefficient windows."""

from fractions import Fraction

import pytest

from bordered_toeplitz import fourier, symbols
from bordered_toeplitz.numkernel import PrecisionCtx

CTX80 = PrecisionCtx(80)
CTX40 = PrecisionCtx(40)
COUPLINGS = (Fraction(1, 2), Fraction(1, 4), Fraction(4, 5))
SWAPPED = (Fraction(1, 4), Fraction(1, 2), Fraction(4, 5))
WINDOW = 300


class IsingCase:
    def __init__(self, couplings, ctx=CTX80, window=WINDOW):
        self.ctx = ctx
        self.params = symbols.ising_params(*couplings, ctx)
        self.phi = symbols.ising_phi(self.params)
        self.window = window
        self._cache = {}

    def _get(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    @property
    def phi_series(self):
        return self._get("phi", lambda: fourier.fourier_coeffs(self.phi, M=self.window, ctx=self.ctx))

    @property
    def psi_series(self):
        return self._get("psi", lambda: fourier.fourier_coeffs(symbols.ising_psi(self.params),
                                                               M=self.window, ctx=self.ctx))

    @property
    def log_series(self):
        return self._get("log", lambda: fourier.log_fourier_coeffs(self.phi, ctx=self.ctx))

    def pole_series(self, c):
        return self._get(("pole", c), lambda: fourier.fourier_coeffs(
            symbols.pole_border(self.phi, c), M=self.window, ctx=self.ctx))


@pytest.fixture(scope="session")
def ctx80():
    return CTX80


@pytest.fixture(scope="session")
def ctx40():
    return CTX40


@pytest.fixture(scope="session")
def ising():
    return IsingCase(COUPLINGS)


@pytest.fixture(scope="session")
def ising_swapped():
    return IsingCase(SWAPPED)


# one line per acceptance criterion, repeated at the end of the run
CRITERIA = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[key])
