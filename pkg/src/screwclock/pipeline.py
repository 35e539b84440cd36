"""Resolution of a parsed config into physics objects and derived quantities.

This is the single place where config units (nm, kW/cm^2, us, atomic
units) become SI, where "computed" placeholders (null intensity, null
lifetimes, null gate time) are filled in from the lattice physics, and
where the protocol schedule is assembled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .config import KW_CM2_TO_W_M2, RunConfig, SpeciesEntry
from .constants import CODATA, ConstantsTable, au_to_si_length
from .errors import ParameterError
from .lattice import (
    IntensityRequirement,
    LatticeConfig,
    SpeciesOptics,
    min_required_intensity,
    overlap_depth,
    trap_frequencies,
)
from .rates import (
    DecoherenceParams,
    ProtocolSchedule,
    build_schedule,
    interaction_energy,
    phase_gate_duration,
    photon_scattering_time,
)


def species_optics(entry: SpeciesEntry, table: ConstantsTable = CODATA) -> SpeciesOptics:
    return SpeciesOptics(
        name=entry.name,
        mass=entry.mass_amu * table.atomic_mass_unit,
        alpha_scalar=entry.alpha_scalar_au,
        rho=entry.rho,
        role=entry.role,
        F=entry.f,
        M_F=entry.m_f,
    )


@dataclass(frozen=True)
class PhysicsBundle:
    """Everything the commands need, derived once from a config."""

    table: ConstantsTable
    clock: SpeciesOptics
    head_up: SpeciesOptics
    head_down: SpeciesOptics
    lattice: LatticeConfig               # intensity resolved, configured phi
    requirement: IntensityRequirement
    clock_frequencies: tuple[float, float, float]   # at overlap
    head_frequencies: tuple[float, float, float]    # head_up at overlap
    interaction: float                   # J
    gate_time: float                     # s
    transport_time: float                # s
    pulse_time: float                    # s
    decoherence: DecoherenceParams
    schedule: ProtocolSchedule
    n_atoms: int
    ramsey_time: float


def resolve_physics(cfg: RunConfig, table: ConstantsTable = CODATA) -> PhysicsBundle:
    clock = species_optics(cfg.species_by_role("clock"), table)
    head_up = species_optics(cfg.species_by_role("head_up"), table)
    head_down = species_optics(cfg.species_by_role("head_down"), table)
    all_species = [clock, head_up, head_down]

    lambda_m = cfg.lattice.lambda_m_nm * 1e-9
    probe = LatticeConfig(
        lambda_m=lambda_m,
        intensity=1.0,
        delta=cfg.lattice.delta,
        phi=cfg.lattice.phi_rad,
        transverse_intensity=0.0,
    )
    requirement = min_required_intensity(
        all_species, probe, depth_factor=cfg.protocol.depth_factor, table=table
    )

    if cfg.lattice.intensity_kW_cm2 is not None:
        intensity = cfg.lattice.intensity_kW_cm2 * KW_CM2_TO_W_M2
    else:
        intensity = requirement.intensity
        if not intensity > 0.0:
            raise ParameterError(
                "lattice.intensity_kW_cm2 is null and the computed minimum is zero; "
                "set an explicit intensity"
            )
    if cfg.lattice.transverse_intensity_kW_cm2 is not None:
        transverse = cfg.lattice.transverse_intensity_kW_cm2 * KW_CM2_TO_W_M2
    else:
        transverse = intensity

    lattice = LatticeConfig(
        lambda_m=lambda_m,
        intensity=intensity,
        delta=cfg.lattice.delta,
        phi=cfg.lattice.phi_rad,
        transverse_intensity=transverse,
    )

    # Trap frequencies and the collisional energy are evaluated at the
    # maximum-overlap phase, where the two atoms sit in the same well.
    at_overlap = replace(lattice, phi=0.0)
    clock_freqs = trap_frequencies(at_overlap, clock, table)
    head_freqs = trap_frequencies(at_overlap, head_up, table)
    a_scatt = au_to_si_length(cfg.protocol.a_scatt_au, table)
    delta_e = interaction_energy(
        a_scatt, head_up.mass, clock.mass, head_freqs, clock_freqs, table
    )

    if cfg.protocol.gate_time_us is not None:
        gate_time = cfg.protocol.gate_time_us * 1e-6
    else:
        gate_time = phase_gate_duration(delta_e, math.pi, table)

    if cfg.noise.tau_scatter_clock_s is not None:
        tau_clock = cfg.noise.tau_scatter_clock_s
    else:
        tau_clock = photon_scattering_time(
            clock, intensity, overlap_depth(lattice, clock, table), lambda_m, table
        )
    if cfg.noise.tau_scatter_head_s is not None:
        tau_head = cfg.noise.tau_scatter_head_s
    else:
        tau_head = photon_scattering_time(
            head_up, intensity, overlap_depth(lattice, head_up, table), lambda_m, table
        )
    decoherence = DecoherenceParams(
        tau_scatter_clock=tau_clock,
        tau_scatter_head=tau_head,
        extra_loss_rate=cfg.noise.extra_loss_rate_per_s,
    )

    transport_time = cfg.protocol.transport_time_us * 1e-6
    pulse_time = cfg.protocol.pulse_time_us * 1e-6
    schedule = build_schedule(
        cfg.protocol.n_atoms, gate_time, transport_time,
        cfg.protocol.ramsey_time_s, pulse_time,
    )

    return PhysicsBundle(
        table=table,
        clock=clock,
        head_up=head_up,
        head_down=head_down,
        lattice=lattice,
        requirement=requirement,
        clock_frequencies=clock_freqs,
        head_frequencies=head_freqs,
        interaction=delta_e,
        gate_time=gate_time,
        transport_time=transport_time,
        pulse_time=pulse_time,
        decoherence=decoherence,
        schedule=schedule,
        n_atoms=cfg.protocol.n_atoms,
        ramsey_time=cfg.protocol.ramsey_time_s,
    )


def detuning_grid(cfg: RunConfig) -> list[float]:
    """Detuning grid for scans; defaults to two fringe periods from zero."""
    run = cfg.run
    if run.detuning_min_rad_s is not None and run.detuning_max_rad_s is not None:
        lo, hi = run.detuning_min_rad_s, run.detuning_max_rad_s
    else:
        t = cfg.protocol.ramsey_time_s
        if not t > 0.0:
            raise ParameterError(
                "protocol.ramsey_time_s must be positive for an automatic detuning grid"
            )
        hi = 2.0 * (2.0 * math.pi) / (cfg.protocol.n_atoms * t)
        lo = 0.0
    n = run.detuning_points
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


def probe_detuning(cfg: RunConfig) -> float:
    """Detuning for single-shot simulation; default is the half-fringe point."""
    if cfg.run.delta_omega_rad_s is not None:
        return cfg.run.delta_omega_rad_s
    t = cfg.protocol.ramsey_time_s
    if not t > 0.0:
        raise ParameterError(
            "protocol.ramsey_time_s must be positive to place the default probe detuning"
        )
    chi_target = math.pi / 2.0
    return (chi_target / t - cfg.run.delta_omega_head_rad_s) / cfg.protocol.n_atoms
