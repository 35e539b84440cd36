"""Physical constants and atomic-unit conversions.

All internal computation is in SI. Formulas quoted in Gaussian units are
translated once, here and in :mod:`screwclock.lattice`, so the conversion
boundary lives in a single place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import constants as _sc

from .errors import ParameterError


@dataclass(frozen=True)
class ConstantsTable:
    """Bundle of fundamental constants used throughout the package.

    Keeping the table explicit (instead of importing scipy.constants at
    each call site) makes unit-consistency tests possible: a rescaled
    table must leave all dimensionless outputs unchanged.
    """

    planck_reduced: float      # J s
    speed_of_light: float      # m / s
    vacuum_permittivity: float  # F / m
    boltzmann: float           # J / K
    atomic_mass_unit: float    # kg
    bohr_radius: float         # m
    polarizability_au_in_si: float  # (C m^2 / V) per atomic unit
    length_au_in_si: float     # m per atomic unit (the Bohr radius)

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not value > 0.0:
                raise ParameterError(f"constant {name} must be positive, got {value}")
        derived = 4.0 * math.pi * self.vacuum_permittivity * self.bohr_radius**3
        if abs(self.polarizability_au_in_si - derived) > 1e-12 * derived:
            raise ParameterError(
                "polarizability_au_in_si is inconsistent with 4*pi*eps0*a0^3 "
                f"({self.polarizability_au_in_si} vs {derived})"
            )


def codata_table() -> ConstantsTable:
    """CODATA-valued table, assembled from scipy.constants."""
    a0 = _sc.physical_constants["Bohr radius"][0]
    return ConstantsTable(
        planck_reduced=_sc.hbar,
        speed_of_light=_sc.c,
        vacuum_permittivity=_sc.epsilon_0,
        boltzmann=_sc.k,
        atomic_mass_unit=_sc.atomic_mass,
        bohr_radius=a0,
        polarizability_au_in_si=4.0 * math.pi * _sc.epsilon_0 * a0**3,
        length_au_in_si=a0,
    )


CODATA = codata_table()


def au_to_si_polarizability(alpha_au: float, table: ConstantsTable = CODATA) -> float:
    """Convert a polarizability from atomic units to SI (C m^2 / V).

    Sign is preserved; blue-detuned (negative) polarizabilities stay
    negative.
    """
    return alpha_au * table.polarizability_au_in_si


def au_to_si_length(length_au: float, table: ConstantsTable = CODATA) -> float:
    """Convert a length from atomic units (Bohr radii) to meters."""
    return length_au * table.length_au_in_si
