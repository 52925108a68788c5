"""Numerical verification of sharp Sobolev-Strichartz constants for the wave equation."""

from .constants import ProblemInstance, constant_C, constant_W
from .extremal import (ExtremalParams, TrialDatum, degree1_projection, j_integral, ratio,
                       search_extremiser, sphere_density)
from .harmonics import (DegreeSpectrum, funk_hecke, h_lambda_direct, h_lambda_spectral,
                        i0_closed_form, i_k, legendre_p, prop1_bound)
from .propagator import (HalfWavePair, RadialProfile, WaveData, halfwaves_from_data,
                         hs_norm, propagate, st_l4_norm)
from .verify import VerificationReport, bilinear_rhs, run_all

__version__ = "1.0.0"

__all__ = [
    "ProblemInstance", "constant_C", "constant_W",
    "ExtremalParams", "TrialDatum", "degree1_projection", "j_integral", "ratio",
    "search_extremiser", "sphere_density",
    "DegreeSpectrum", "funk_hecke", "h_lambda_direct", "h_lambda_spectral",
    "i0_closed_form", "i_k", "legendre_p", "prop1_bound",
    "HalfWavePair", "RadialProfile", "WaveData", "halfwaves_from_data",
    "hs_norm", "propagate", "st_l4_norm",
    "VerificationReport", "bilinear_rhs", "run_all",
]
