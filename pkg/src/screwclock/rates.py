"""Decoherence timescales, gate durations, and the timed protocol schedule.

Rates are evaluated from the lattice parameters; the schedule is pure
bookkeeping that strings the per-site transport and collisional phase
gates into the two generalized pi/2 pulses around the Ramsey free
evolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import CODATA, ConstantsTable
from .errors import NoInteractionError, ParameterError, UntrappedError
from .lattice import SpeciesOptics, au_to_si_polarizability, recoil_energy

STEP_KINDS = (
    "hadamard_all",
    "head_pulse",
    "transport",
    "phase_gate",
    "free_evolution",
    "readout",
)


@dataclass(frozen=True)
class DecoherenceParams:
    """Per-atom scattering lifetimes plus an optional aggregate loss rate.

    ``extra_loss_rate`` is a proxy for unknown inelastic collision channels;
    it defaults to zero and simply adds to the total event rate.
    """

    tau_scatter_clock: float   # s, per clock atom
    tau_scatter_head: float    # s, head atom
    extra_loss_rate: float = 0.0  # 1/s

    def __post_init__(self):
        if not self.tau_scatter_clock > 0.0:
            raise ParameterError("tau_scatter_clock must be positive")
        if not self.tau_scatter_head > 0.0:
            raise ParameterError("tau_scatter_head must be positive")
        if self.extra_loss_rate < 0.0:
            raise ParameterError("extra_loss_rate must be >= 0")

    def total_rate(self, n_atoms: int) -> float:
        """Total scattering/loss event rate for n clock atoms plus the head."""
        return (
            n_atoms / self.tau_scatter_clock
            + 1.0 / self.tau_scatter_head
            + self.extra_loss_rate
        )


@dataclass(frozen=True)
class ScheduleStep:
    kind: str
    duration: float          # s
    site: int | None = None  # lattice site for transport / phase_gate steps


@dataclass(frozen=True)
class ProtocolSchedule:
    """Ordered timed steps of one full clock interrogation."""

    steps: tuple[ScheduleStep, ...]
    total_duration: float
    ramsey_time: float

    def __post_init__(self):
        total = sum(step.duration for step in self.steps)
        if not math.isclose(total, self.total_duration, rel_tol=1e-12, abs_tol=1e-30):
            raise ParameterError("total_duration does not match the sum of step durations")
        n_free = sum(1 for step in self.steps if step.kind == "free_evolution")
        if n_free != 1:
            raise ParameterError(f"schedule must contain exactly one free_evolution step, got {n_free}")


def photon_scattering_time(
    species: SpeciesOptics,
    intensity: float,
    depth: float,
    lambda_m: float,
    table: ConstantsTable = CODATA,
) -> float:
    """Photon-scattering lifetime (seconds) of one trapped atom.

    Rayleigh rate for a polarizable particle, suppressed by
    eta = (1/2) sqrt(E_R / dU) because the wavefunction is centered on an
    intensity minimum of the blue-detuned lattice:

        1 / tau = eta * omega^3 * alpha^2 * I / (6 pi eps0^2 hbar c^4)

    Returns inf for vanishing polarizability.
    """
    if not depth > 0.0:
        raise UntrappedError(f"scattering suppression undefined for depth {depth} <= 0")
    if not intensity > 0.0:
        raise ParameterError("intensity must be positive")
    e_r = recoil_energy(species.mass, lambda_m, table)
    eta = 0.5 * math.sqrt(e_r / depth)
    alpha = au_to_si_polarizability(species.alpha_scalar, table)
    if alpha == 0.0:
        return math.inf
    omega = 2.0 * math.pi * table.speed_of_light / lambda_m
    rate = (
        eta
        * omega**3
        * alpha**2
        * intensity
        / (
            6.0
            * math.pi
            * table.vacuum_permittivity**2
            * table.planck_reduced
            * table.speed_of_light**4
        )
    )
    return 1.0 / rate


def interaction_energy(
    a_scatt: float,
    m1: float,
    m2: float,
    omegas1,
    omegas2,
    table: ConstantsTable = CODATA,
) -> float:
    """Mean-field energy of two particles overlapped in their trap ground states.

    dE = (2 a / mbar) sqrt(hbar / pi) * prod_i sqrt((m omega)bar_i), where
    mbar is the reduced mass and (m omega)bar_i the axis-wise reduced
    mass-frequency product. The sign follows the scattering length.
    """
    if not (m1 > 0.0 and m2 > 0.0):
        raise ParameterError("masses must be positive")
    omegas1 = tuple(float(w) for w in omegas1)
    omegas2 = tuple(float(w) for w in omegas2)
    if len(omegas1) != 3 or len(omegas2) != 3:
        raise ParameterError("three trap frequencies per particle are required")
    if any(w <= 0.0 for w in omegas1 + omegas2):
        raise ParameterError("trap frequencies must be positive")
    mbar = m1 * m2 / (m1 + m2)
    product = 1.0
    for w1, w2 in zip(omegas1, omegas2):
        reduced = (m1 * w1) * (m2 * w2) / (m1 * w1 + m2 * w2)
        product *= math.sqrt(reduced)
    return (2.0 * a_scatt / mbar) * math.sqrt(table.planck_reduced / math.pi) * product


def phase_gate_duration(
    delta_e: float, target_phase: float = math.pi, table: ConstantsTable = CODATA
) -> float:
    """Hold time for the collisional phase gate: target_phase * hbar / |dE|."""
    if delta_e == 0.0:
        raise NoInteractionError("zero interaction energy, phase gate impossible")
    if target_phase < 0.0:
        raise ParameterError("target_phase must be >= 0")
    return target_phase * table.planck_reduced / abs(delta_e)


def build_schedule(
    n_atoms: int,
    gate_time: float,
    transport_time: float,
    ramsey_time: float,
    pulse_time: float = 0.0,
) -> ProtocolSchedule:
    """Assemble the timed step list for one interrogation of N clock atoms.

    Sequence: clock + head pi/2 pulses, a transport/phase-gate pass over
    sites 0..N-1, a clock pulse closing the entangling stage, free
    evolution, then the mirrored disentangling pass and readout. Pulse
    (and readout) durations default to zero; they are negligible against
    the ms-scale transport stages.
    """
    if n_atoms < 1:
        raise ParameterError(f"n_atoms must be >= 1, got {n_atoms}")
    for label, value in (
        ("gate_time", gate_time),
        ("transport_time", transport_time),
        ("ramsey_time", ramsey_time),
        ("pulse_time", pulse_time),
    ):
        if value < 0.0:
            raise ParameterError(f"{label} must be >= 0, got {value}")

    steps: list[ScheduleStep] = []

    def gate_pass():
        for site in range(n_atoms):
            steps.append(ScheduleStep("transport", transport_time, site))
            steps.append(ScheduleStep("phase_gate", gate_time, site))

    steps.append(ScheduleStep("hadamard_all", pulse_time))
    steps.append(ScheduleStep("head_pulse", pulse_time))
    gate_pass()
    steps.append(ScheduleStep("hadamard_all", pulse_time))
    steps.append(ScheduleStep("free_evolution", ramsey_time))
    steps.append(ScheduleStep("hadamard_all", pulse_time))
    gate_pass()
    steps.append(ScheduleStep("hadamard_all", pulse_time))
    steps.append(ScheduleStep("head_pulse", pulse_time))
    steps.append(ScheduleStep("readout", pulse_time))

    total = sum(step.duration for step in steps)
    return ProtocolSchedule(steps=tuple(steps), total_duration=total, ramsey_time=ramsey_time)


def survival_probability(
    schedule: ProtocolSchedule, n_atoms: int, params: DecoherenceParams
) -> float:
    """Probability that no scattering or loss event occurs during the schedule.

    Pessimistic model: a single event anywhere (any clock atom or the
    head) during the whole schedule destroys the fringe, so survival is
    exp(-duration * total_rate).
    """
    if n_atoms < 0:
        raise ParameterError("n_atoms must be >= 0")
    exponent = schedule.total_duration * params.total_rate(n_atoms)
    return math.exp(-exponent)
