"""Optical potentials for the two-sublattice transport lattice.

The lattice is a superposition of two standing waves of opposite circular
polarization, displaced by a winding phase ``phi``. An atom in state
``(F, M_F)`` sees

    U(z) = U0p * cos^2(k z) + U0m * cos^2(k z - phi),    k = 2 pi / lambda

with sublattice depths set by the scalar polarizability and the
vector-to-scalar ratio ``rho``:

    U0pm = -(E_pm / 2)^2 * alpha * (1 +- rho)

Field amplitudes are recovered from the total intensity and the fractional
misbalance ``delta = (E+^2 - E-^2) / (E+^2 + E-^2)`` through the SI
standing-wave convention ``I_L = (eps0 c / 2) (E+^2 + E-^2)``, the
translation of the Gaussian ``I_L = (c / 8 pi)(E+^2 + E-^2)``.

Scalar (J = 0) clock states have rho = 0 and stay pinned to the stationary
sigma+ sublattice; a J = 1/2 head atom with |rho| ~ 1 rides the moving
sigma- sublattice, which is what enables state-selective transport.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .constants import CODATA, ConstantsTable, au_to_si_polarizability
from .errors import InfeasibleTransportError, ParameterError, UntrappedError

ROLES = ("clock", "head_up", "head_down")

# Numeric depth extraction: grid resolution per lattice period and the
# absolute phase tolerance of the golden-section refinement.
DEPTH_GRID_POINTS = 4096
GOLDEN_TOL = 1e-12 * math.pi
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SpeciesOptics:
    """Optical response of one trapped species (or one head spin state).

    ``alpha_scalar`` is kept in atomic units, as tabulated; conversion to
    SI happens inside the operations. ``rho`` is the ratio of the vector
    (axial) to scalar polarizability including the M_F / 2F weight.
    """

    name: str
    mass: float            # kg
    alpha_scalar: float    # atomic units, may be negative (blue detuned)
    rho: float = 0.0
    role: str = "clock"
    F: float | None = None
    M_F: float | None = None

    def __post_init__(self):
        if self.role not in ROLES:
            raise ParameterError(f"unknown role {self.role!r}, expected one of {ROLES}")
        if not self.mass > 0.0:
            raise ParameterError(f"species {self.name}: mass must be positive")
        if self.role == "clock" and self.rho != 0.0:
            raise ParameterError(
                f"species {self.name}: scalar clock states have no vector "
                f"polarizability, rho must be exactly 0 (got {self.rho})"
            )
        if self.role != "clock" and self.F is not None and self.M_F is not None:
            if abs(self.M_F) > self.F:
                raise ParameterError(
                    f"species {self.name}: |M_F| <= F violated ({self.M_F}, {self.F})"
                )


@dataclass(frozen=True)
class LatticeConfig:
    """Transport-lattice parameters, all SI."""

    lambda_m: float              # m, magic wavelength
    intensity: float             # W / m^2, total transport-lattice intensity
    delta: float = 0.25          # fractional sublattice misbalance, |delta| <= 1
    phi: float = 0.0             # rad, displacement phase of the moving sublattice
    transverse_intensity: float = 0.0  # W / m^2, per transverse lattice

    def __post_init__(self):
        if not self.lambda_m > 0.0:
            raise ParameterError("lambda_m must be positive")
        if not self.intensity > 0.0:
            raise ParameterError("intensity must be positive")
        if abs(self.delta) > 1.0:
            raise ParameterError(f"|delta| <= 1 required, got {self.delta}")
        if self.transverse_intensity < 0.0:
            raise ParameterError("transverse_intensity must be >= 0")


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of the four transport inequalities."""

    feasible: bool
    violated_constraints: tuple[str, ...]
    margin: float

    def __post_init__(self):
        consistent = self.feasible == (not self.violated_constraints) == (self.margin > 0)
        if not consistent:
            raise ParameterError("inconsistent feasibility report")


@dataclass(frozen=True)
class IntensityRequirement:
    """Minimum lattice intensity and which species forces it."""

    intensity: float                     # W / m^2
    binding_species: str | None
    per_species: dict[str, float] = field(default_factory=dict)
    feasibility: FeasibilityReport | None = None


def recoil_energy(mass: float, lambda_m: float, table: ConstantsTable = CODATA) -> float:
    """Photon recoil energy (2 pi hbar / lambda)^2 / (2 M) in joules."""
    if not mass > 0.0:
        raise ParameterError(f"mass must be positive, got {mass}")
    if not lambda_m > 0.0:
        raise ParameterError(f"lambda_m must be positive, got {lambda_m}")
    h_over_lambda = 2.0 * math.pi * table.planck_reduced / lambda_m
    return h_over_lambda**2 / (2.0 * mass)


def field_amplitudes_squared(
    config: LatticeConfig, table: ConstantsTable = CODATA
) -> tuple[float, float]:
    """(E+^2, E-^2) in SI (V/m)^2 from total intensity and misbalance."""
    total = 2.0 * config.intensity / (table.vacuum_permittivity * table.speed_of_light)
    return 0.5 * total * (1.0 + config.delta), 0.5 * total * (1.0 - config.delta)


def sublattice_depths(
    config: LatticeConfig, species: SpeciesOptics, table: ConstantsTable = CODATA
) -> tuple[float, float]:
    """Potential amplitudes (U0+, U0-) in joules.

    U0pm = -(E_pm/2)^2 alpha (1 +- rho). For rho = 0 the two amplitudes
    differ only through the field misbalance.
    """
    e2p, e2m = field_amplitudes_squared(config, table)
    alpha = au_to_si_polarizability(species.alpha_scalar, table)
    u0p = -0.25 * e2p * alpha * (1.0 + species.rho)
    u0m = -0.25 * e2m * alpha * (1.0 - species.rho)
    return u0p, u0m


def optical_potential_curve(
    config: LatticeConfig,
    species: SpeciesOptics,
    z_grid,
    table: ConstantsTable = CODATA,
) -> np.ndarray:
    """Evaluate U(z) on the given grid of axial positions (meters)."""
    z = np.asarray(z_grid, dtype=float)
    if z.size == 0:
        raise ParameterError("z_grid must be non-empty")
    u0p, u0m = sublattice_depths(config, species, table)
    k = 2.0 * math.pi / config.lambda_m
    return u0p * np.cos(k * z) ** 2 + u0m * np.cos(k * z - config.phi) ** 2


def _golden_refine(func, a: float, b: float, tol: float = GOLDEN_TOL) -> float:
    # Golden-section minimum of func on [a, b]; assumes a bracket from a
    # dense grid. Deterministic, ~60 iterations for the default tol.
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = func(x1), func(x2)
    for _ in range(200):
        if b - a <= tol:
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = func(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = func(x2)
    return x1 if f1 <= f2 else x2


def _extremum(func, z_grid: np.ndarray, values: np.ndarray, sign: float) -> float:
    """Refine the min (sign=+1) or max (sign=-1) of a periodic sampled curve.

    The bracket comes from the dense grid; the golden tolerance is relative
    to the lattice period, in absolute position units.
    """
    idx = int(np.argmin(sign * values))
    step = z_grid[1] - z_grid[0]
    lo, hi = z_grid[idx] - step, z_grid[idx] + step
    tol = GOLDEN_TOL / math.pi * len(z_grid) * step
    z_star = _golden_refine(lambda z: sign * func(z), lo, hi, tol=tol)
    return func(z_star)


def well_depth(
    config: LatticeConfig, species: SpeciesOptics, table: ConstantsTable = CODATA
) -> float:
    """Peak-to-peak depth max U - min U over one lattice period, numerically.

    Samples the optical potential on a uniform 4096-point grid per period
    (half a wavelength) and refines the bracketed extrema by golden
    section. Returns 0 for a z-independent potential (washed-out lattice).
    """
    u0p, u0m = sublattice_depths(config, species, table)
    scale = abs(u0p) + abs(u0m)
    if scale == 0.0:
        return 0.0
    period = config.lambda_m / 2.0
    z_grid = np.linspace(0.0, period, DEPTH_GRID_POINTS, endpoint=False)
    values = optical_potential_curve(config, species, z_grid, table)
    if np.ptp(values) < 1e-14 * scale:
        return 0.0

    def u_of_z(z: float) -> float:
        return float(optical_potential_curve(config, species, [z], table)[0])

    u_min = _extremum(u_of_z, z_grid, values, +1.0)
    u_max = _extremum(u_of_z, z_grid, values, -1.0)
    return u_max - u_min


def well_depth_closed_form(
    config: LatticeConfig,
    species: SpeciesOptics,
    phi: float | None = None,
    table: ConstantsTable = CODATA,
) -> float:
    """Exact depth of the combined potential at displacement phase ``phi``.

    The sum of two equal-period cos^2 waves is a single sinusoid of
    amplitude sqrt(a^2 + b^2 + 2 a b cos 2 phi), so the depth is that
    amplitude. At the maximum-overlap phase (phi = 0) it reduces to
    |U0+ + U0-| = I_L |alpha| (1 + delta rho) / (2 eps0 c).
    """
    if phi is None:
        phi = config.phi
    a, b = sublattice_depths(config, species, table)
    r2 = a * a + b * b + 2.0 * a * b * math.cos(2.0 * phi)
    return math.sqrt(max(r2, 0.0))


def overlap_depth(
    config: LatticeConfig, species: SpeciesOptics, table: ConstantsTable = CODATA
) -> float:
    """Closed-form depth at the maximum-overlap phase (phi = 0)."""
    return well_depth_closed_form(config, species, phi=0.0, table=table)


def transport_feasibility(rho_up: float, rho_down: float, delta: float) -> FeasibilityReport:
    """Check the four strict inequalities for state-selective transport.

    For a positive misbalance delta the moving state must satisfy
    -1/delta < rho_up < -delta and the pinned state delta < rho_down <
    1/delta. The report's margin is the smallest slack; all inequalities
    are strict, so a boundary value is infeasible.
    """
    if not delta > 0.0:
        raise ParameterError(
            f"transport criteria are defined only for delta > 0, got {delta}"
        )
    if delta > 1.0:
        raise ParameterError(f"|delta| <= 1 required, got {delta}")
    slacks = {
        "rho_up > -1/delta": rho_up + 1.0 / delta,
        "rho_up < -delta": -delta - rho_up,
        "rho_down < 1/delta": 1.0 / delta - rho_down,
        "rho_down > delta": rho_down - delta,
    }
    violated = tuple(name for name, slack in slacks.items() if slack <= 0.0)
    margin = min(slacks.values())
    return FeasibilityReport(feasible=not violated, violated_constraints=violated, margin=margin)


def _protocol_depth_coefficient(
    config: LatticeConfig, species: SpeciesOptics, table: ConstantsTable
) -> float:
    """Worst-case depth per unit intensity seen by a species during transport.

    The head states matter at the maximum-overlap phase, where their depth
    is weakest; the pinned clock atoms matter at phi = pi/2, where their
    depth collapses to the misbalance fraction |delta| of the overlap value.
    """
    probe = replace(config, intensity=1.0)
    phi = math.pi / 2.0 if species.role == "clock" else 0.0
    return well_depth_closed_form(probe, species, phi=phi, table=table)


def min_required_intensity(
    species_list: list[SpeciesOptics],
    config: LatticeConfig,
    depth_factor: float = 5.0,
    table: ConstantsTable = CODATA,
) -> IntensityRequirement:
    """Smallest I_L keeping every species' worst-case depth above depth_factor * E_R.

    Raises :class:`InfeasibleTransportError` when the head states cannot be
    transported at the configured misbalance at any intensity.
    """
    if depth_factor < 0.0:
        raise ParameterError(f"depth_factor must be >= 0, got {depth_factor}")
    if not species_list:
        raise ParameterError("species_list must be non-empty")

    rho_up = next((s.rho for s in species_list if s.role == "head_up"), None)
    rho_down = next((s.rho for s in species_list if s.role == "head_down"), None)
    report = None
    if rho_up is not None and rho_down is not None:
        report = transport_feasibility(rho_up, rho_down, config.delta)
        if not report.feasible:
            raise InfeasibleTransportError(
                "transport infeasible: " + ", ".join(report.violated_constraints),
                report=report,
            )

    per_species: dict[str, float] = {}
    for species in species_list:
        if depth_factor == 0.0:
            per_species[species.name] = 0.0
            continue
        coeff = _protocol_depth_coefficient(config, species, table)
        if coeff <= 0.0:
            raise UntrappedError(
                f"species {species.name} sees no confining potential at its "
                "worst-case phase; no intensity can satisfy the depth criterion"
            )
        target = depth_factor * recoil_energy(species.mass, config.lambda_m, table)
        per_species[species.name] = target / coeff

    binding = max(per_species, key=per_species.get) if depth_factor > 0.0 else None
    intensity = per_species[binding] if binding is not None else 0.0
    return IntensityRequirement(
        intensity=intensity,
        binding_species=binding,
        per_species=per_species,
        feasibility=report,
    )


def trap_frequencies(
    config: LatticeConfig, species: SpeciesOptics, table: ConstantsTable = CODATA
) -> tuple[float, float, float]:
    """(omega_axial, omega_radial_1, omega_radial_2) in rad/s.

    Harmonic expansion at the minimum of a cos^2-form well of depth dU
    gives omega = (2 pi / lambda) sqrt(2 dU / M). The axial depth is the
    numeric well depth at the configured displacement phase; the radial
    depths come from the linearly polarized transverse lattices, which
    couple through the scalar polarizability only.
    """
    axial_depth = well_depth(config, species, table)
    scale = sum(abs(u) for u in sublattice_depths(config, species, table))
    if axial_depth <= 1e-9 * scale or scale == 0.0:
        raise UntrappedError(
            f"species {species.name} is untrapped axially at phi={config.phi}"
        )
    k = 2.0 * math.pi / config.lambda_m
    omega_axial = k * math.sqrt(2.0 * axial_depth / species.mass)

    alpha = abs(au_to_si_polarizability(species.alpha_scalar, table))
    radial_depth = (
        alpha
        * config.transverse_intensity
        / (2.0 * table.vacuum_permittivity * table.speed_of_light)
    )
    if radial_depth <= 0.0:
        raise UntrappedError(
            f"species {species.name} is untrapped radially "
            "(zero transverse intensity or polarizability)"
        )
    omega_radial = k * math.sqrt(2.0 * radial_depth / species.mass)
    return omega_axial, omega_radial, omega_radial
