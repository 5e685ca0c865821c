"""Bordered Toeplitz determinants at high precision.

D^B_N[phi; psi] is det T_N(phi) with its last column replaced by
(psi_{N-1}, ..., psi_0).  The package computes these exactly (dense LU in
gmpy2 arithmetic) and checks them against strong-Szego-type asymptotics,
with the 2D Ising next-to-diagonal correlation as the main example.
"""

from .numkernel import ConfigError, NumericError, PrecisionCtx, QuadratureError
from .symbols import (BorderSpec, Symbol, ising_border_spec, ising_params, ising_phi, ising_psi,
                      pole_border, rational_border)
from .fourier import FourierSeries, WindingError, fourier_coeffs, log_fourier_coeffs
from .toeplitz import bordered_det, cramer_last, f_n_ratio, toeplitz_det
from .szego import alpha_eval, p_plus_decompose, szego_constants
from .asymptotics import (AsymptoteReport, bocg_correction, f_constant_general, f_constant_rational,
                          ising_second_order, rhp_correction_integrals)
from .fitting import FitResult, PowerSeriesFit, fit_series

__version__ = "0.1.0"
