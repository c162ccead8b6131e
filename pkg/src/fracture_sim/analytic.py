"""Closed-form splitting and strip-bearing formulas.

Everything is SI (N, m, Pa) except :func:`eccentricity_strength`, which keeps
the regression's own units: eccentricity in mm in, strength in MPa out.
"""

from __future__ import annotations

import math
import warnings

from fracture_sim.errors import InputError

CUBE_COEFF = 0.64
ECC_SLOPE = -0.1035  # MPa per mm
ECC_INTERCEPT = 25.226  # MPa
ECC_R2 = 0.88


def brazilian_stress(N: float, d: float, l: float) -> float:
    """Uniform splitting stress 2N / (pi d l) across the loaded mid-plane.

    ``d * l`` is the area of the splitting plane (height times length).
    """
    if d <= 0 or l <= 0:
        raise InputError(f"d and l must be positive, got d={d}, l={l}")
    return 2.0 * N / (math.pi * d * l)


def cube_splitting_strength(N: float, a: float, exact: bool = False) -> float:
    """Splitting strength of a cube with rib ``a``.

    The default coefficient is the rounded 0.64; ``exact=True`` uses 2/pi.
    """
    if a <= 0:
        raise InputError(f"cube rib must be positive, got {a}")
    coeff = 2.0 / math.pi if exact else CUBE_COEFF
    return coeff * N / a**2


def cube_rounding_gap() -> float:
    """Relative difference between 0.64 and 2/pi."""
    exact = 2.0 / math.pi
    return (CUBE_COEFF - exact) / exact


def strength_ratios(Fult: float, A: float, As: float) -> tuple[float, float]:
    """Overall strength Fult/A and contact stress Fult/As."""
    if A <= 0 or As <= 0:
        raise InputError(f"areas must be positive, got A={A}, As={As}")
    return Fult / A, Fult / As


def eccentricity_strength(es_mm: float) -> float:
    """Wall strength (MPa) from strip eccentricity (mm), linear fit with R^2 = 0.88.

    The fit came from one block size and material and may not transfer.
    Negative eccentricities lie outside the fitted range and raise a warning.
    """
    if es_mm < 0:
        warnings.warn(f"eccentricity {es_mm} mm is outside the fitted range (>= 0)", stacklevel=2)
    return ECC_SLOPE * es_mm + ECC_INTERCEPT
