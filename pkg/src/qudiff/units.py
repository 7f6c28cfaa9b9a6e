"""Internal unit system and numeric helpers.

Internal units set hbar = k_B = 1, with energy in MeV and time in
MeV^-1. The collective coordinates q_k are dimensionless, so momenta
carry units of hbar and masses carry hbar^2/MeV. All physical inputs
are converted once on entry and all arithmetic runs in internal units;
only the CLI layer converts back (time axes to seconds).
"""

from __future__ import annotations

import math

# Reduced Planck constant in MeV s (CODATA).
HBAR_MEV_S = 6.582119569e-22

# Multiplicative factor taking a tagged physical value to internal units.
_TO_INTERNAL = {
    "MeV": 1.0,
    "MeV/hbar": 1.0,
    "hbar^2/MeV": 1.0,
    "seconds": 1.0 / HBAR_MEV_S,
    "1/(MeV s^2)": HBAR_MEV_S**2,
}


def unit_convert(value: float, unit: str, *, to: str = "internal") -> float:
    """Convert a scalar between a tagged physical unit and internal units.

    `to="internal"` maps a physical value to internal units, `to="physical"`
    inverts it. The same factor is used both ways, so a round trip is
    exact to within one ulp.
    """
    try:
        factor = _TO_INTERNAL[unit]
    except KeyError:
        raise ValueError(
            f"unknown unit {unit!r}; expected one of {sorted(_TO_INTERNAL)}"
        ) from None
    if to == "internal":
        return value * factor
    if to == "physical":
        return value / factor
    raise ValueError(f"direction must be 'internal' or 'physical', got {to!r}")


def coth(x: float) -> float:
    """Hyperbolic cotangent, safe over the full double range.

    Uses expm1 to avoid cancellation near zero, the Laurent series
    1/x + x/3 below 1e-6 where expm1(2x)/2x itself loses digits, and
    saturates to +-1 beyond |x| = 350 where exp would overflow. The
    saturation is exact at double precision (coth(350) - 1 < 1e-300).
    """
    if x < 0.0:
        return -coth(-x)
    if x == 0.0:
        raise ValueError("coth is singular at 0")
    if x < 1e-6:
        return 1.0 / x + x / 3.0
    if x > 350.0:
        return 1.0
    return 1.0 + 2.0 / math.expm1(2.0 * x)
