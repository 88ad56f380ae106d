"""Catalog of reference constants the computed results are compared against.

Each entry carries the value, whether it is exact or a reported
asymptotic estimate, and a provenance string describing the quantity it
limits. Exact entries are computed from their defining formulas rather
than stored as rounded decimals.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import jn_zeros

__all__ = ["ReferenceConstant", "REFERENCE_CONSTANTS", "lambda1_disk"]


@dataclass(frozen=True)
class ReferenceConstant:
    name: str
    value: float
    exact: bool
    source: str


def lambda1_disk():
    """First Dirichlet eigenvalue of the unit disk, the squared first J0 zero."""
    return float(jn_zeros(0, 1)[0] ** 2)


_E = float(np.e)
_PI = float(np.pi)

REFERENCE_CONSTANTS = {
    "sup_plus_limit": ReferenceConstant(
        "sup_plus_limit", 2.46, False,
        "reported limit of the positive-part sup norm for the one-node "
        "radial family as the exponent grows"),
    "sup_minus_limit": ReferenceConstant(
        "sup_minus_limit", 1.17, False,
        "reported limit of the negative-part sup norm for the one-node "
        "radial family"),
    "energy_limit": ReferenceConstant(
        "energy_limit", 332.0, False,
        "reported limit of the p-scaled Dirichlet energy of the one-node "
        "radial family"),
    "regular_mass": ReferenceConstant(
        "regular_mass", 8.0 * _PI, True,
        "total mass of the regular Liouville bubble, 8*pi"),
    "least_energy_level": ReferenceConstant(
        "least_energy_level", 8.0 * _PI * _E, True,
        "p-scaled energy level of least-energy positive solutions, 8*pi*e"),
    "low_energy_nodal_level": ReferenceConstant(
        "low_energy_nodal_level", 16.0 * _PI * _E, True,
        "p-scaled energy level of low-energy nodal solutions, 16*pi*e"),
    "sqrt_e": ReferenceConstant(
        "sqrt_e", float(np.sqrt(_E)), True,
        "limit sup norm of least-energy positive solutions, sqrt(e)"),
    "lambda1_disk": ReferenceConstant(
        "lambda1_disk", lambda1_disk(), True,
        "first Dirichlet eigenvalue of the unit disk, squared first zero "
        "of the Bessel function J0"),
}
