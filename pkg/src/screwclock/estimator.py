"""Clock precision figures from simulated readout statistics.

Turns fringe scans into contrast and period estimates, propagates the
single-head-qubit projection noise into a detuning sensitivity, compares
against the unentangled square-root-of-N baseline, and finds the
decoherence-limited optimum atom number.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

from .errors import DegenerateFringeError, ParameterError
from .rates import DecoherenceParams, ProtocolSchedule, build_schedule, survival_probability
from .register import run_protocol
from .trajectories import sample_trajectory_batch

_FLAT_TOL = 1e-12


@dataclass(frozen=True)
class FringeScan:
    """Readout probability versus probe detuning."""

    detunings: tuple[float, ...]       # rad/s
    p_up: tuple[float, ...]
    n_atoms: int
    ramsey_time: float                 # s
    trajectories_per_point: int        # 0 for a noiseless (exact) scan

    def __post_init__(self):
        if len(self.detunings) != len(self.p_up):
            raise ParameterError("detunings and p_up must have equal length")
        if len(self.detunings) == 0:
            raise ParameterError("scan must contain at least one point")
        if any(not 0.0 <= p <= 1.0 for p in self.p_up):
            raise ParameterError("probabilities must lie in [0, 1]")


class FringeFit(NamedTuple):
    contrast: float
    period: float   # rad/s; nan when the scan is flat


@dataclass(frozen=True)
class PrecisionReport:
    """Per-shot clock sensitivity compared against the unentangled limit."""

    contrast: float
    fringe_period: float        # rad/s
    sigma_delta_omega: float    # rad/s per shot
    sql_sigma: float            # rad/s per shot
    gain_over_sql: float

    def __post_init__(self):
        if not 0.0 <= self.contrast <= 1.0:
            raise ParameterError("contrast must lie in [0, 1]")
        if not self.fringe_period > 0.0:
            raise ParameterError("fringe_period must be positive")
        expected = self.sql_sigma / self.sigma_delta_omega
        if abs(self.gain_over_sql - expected) > 1e-9 * abs(expected):
            raise ParameterError("gain_over_sql inconsistent with the sigma ratio")


def fringe_scan(
    n_atoms: int,
    ramsey_time: float,
    detunings,
    *,
    delta_omega_head: float = 0.0,
    backend: str = "branch",
    noise: DecoherenceParams | None = None,
    schedule: ProtocolSchedule | None = None,
    trajectories: int = 1,
    seed: int = 0,
    dense_cap: int = 14,
) -> FringeScan:
    """Scan the readout probability over a detuning grid.

    Noiseless scans return the exact per-point probability. With a noise
    model, each point is the mean over ``trajectories`` Monte Carlo
    trajectories, sampled from a per-point substream of ``seed``.
    """
    grid = np.asarray(detunings, dtype=float)
    if grid.size == 0:
        raise ParameterError("detuning grid must be non-empty")
    if noise is not None:
        if schedule is None:
            raise ParameterError("a schedule is required to scan with noise")
        if trajectories < 1:
            raise ParameterError("trajectories must be >= 1 when noise is present")

    values = np.empty(grid.size)
    for i, delta_omega in enumerate(grid):
        exact = run_protocol(
            n_atoms,
            backend=backend,
            delta_omega=float(delta_omega),
            delta_omega_head=delta_omega_head,
            ramsey_time=ramsey_time,
            dense_cap=dense_cap,
        ).p_up
        if noise is None:
            values[i] = exact
        else:
            p_up, _ = sample_trajectory_batch(
                n_atoms, schedule, noise, trajectories, seed=[seed, i], p_up_noiseless=exact
            )
            values[i] = p_up.mean()
    return FringeScan(
        detunings=tuple(float(x) for x in grid),
        p_up=tuple(float(p) for p in values),
        n_atoms=n_atoms,
        ramsey_time=ramsey_time,
        trajectories_per_point=0 if noise is None else trajectories,
    )


def _initial_frequency(x: np.ndarray, y: np.ndarray) -> float:
    # Coarse angular frequency from a zero-padded periodogram on the
    # (assumed near-uniform) grid.
    n = x.size
    detrended = y - y.mean()
    padded = np.zeros(8 * n)
    padded[:n] = detrended
    spectrum = np.abs(np.fft.rfft(padded))
    spectrum[0] = 0.0
    dx = (x[-1] - x[0]) / (n - 1)
    freqs = 2.0 * math.pi * np.fft.rfftfreq(padded.size, d=dx)
    return float(freqs[int(np.argmax(spectrum))])


def analyze_fringe(scan: FringeScan) -> FringeFit:
    """Least-squares sinusoid fit: (contrast, fringe period in rad/s).

    A scan that is flat to machine precision gets contrast 0 and a NaN
    period (undefined). The scan should span at least one full period for
    the frequency to be identifiable.
    """
    x = np.asarray(scan.detunings)
    y = np.asarray(scan.p_up)
    if x.size < 4 or float(np.ptp(y)) < _FLAT_TOL:
        return FringeFit(contrast=0.0, period=math.nan)

    omega0 = _initial_frequency(x, y)
    if omega0 <= 0.0:
        return FringeFit(contrast=0.0, period=math.nan)

    def model(t, offset, a, b, omega):
        return offset + a * np.cos(omega * t) + b * np.sin(omega * t)

    ca = np.cos(omega0 * x)
    sa = np.sin(omega0 * x)
    p0 = (float(y.mean()), 2.0 * float(np.mean((y - y.mean()) * ca)),
          2.0 * float(np.mean((y - y.mean()) * sa)), omega0)
    try:
        with warnings.catch_warnings():
            # A perfect (noiseless) fit leaves no residual to estimate a
            # parameter covariance from; that is fine here.
            warnings.simplefilter("ignore", OptimizeWarning)
            popt, _ = curve_fit(model, x, y, p0=p0, maxfev=20000)
    except RuntimeError:
        return FringeFit(contrast=0.0, period=math.nan)
    _, a, b, omega = (float(v) for v in popt)
    contrast = min(2.0 * math.hypot(a, b), 1.0)
    if omega == 0.0:
        return FringeFit(contrast=0.0, period=math.nan)
    return FringeFit(contrast=max(contrast, 0.0), period=2.0 * math.pi / abs(omega))


def phase_sensitivity(contrast: float, n_atoms: int, ramsey_time: float, shots: int = 1) -> float:
    """Detuning uncertainty per measurement campaign at the half-fringe point.

    Binomial projection noise of a single head-qubit readout per shot,
    N-enhanced by the entangled phase: sigma = 1 / (C N T sqrt(shots)).
    """
    if not 0.0 < contrast <= 1.0:
        raise DegenerateFringeError(
            f"sensitivity undefined for contrast {contrast} outside (0, 1]"
        )
    if n_atoms < 1 or shots < 1:
        raise ParameterError("n_atoms and shots must be >= 1")
    if not ramsey_time > 0.0:
        raise ParameterError("ramsey_time must be positive")
    return 1.0 / (contrast * n_atoms * ramsey_time * math.sqrt(shots))


def sql_baseline(n_atoms: int, ramsey_time: float, shots: int = 1) -> float:
    """Projection-noise limit of N unentangled atoms: 1 / (sqrt(N) T sqrt(shots))."""
    if n_atoms < 1 or shots < 1:
        raise ParameterError("n_atoms and shots must be >= 1")
    if not ramsey_time > 0.0:
        raise ParameterError("ramsey_time must be positive")
    return 1.0 / (math.sqrt(n_atoms) * ramsey_time * math.sqrt(shots))


def precision_report(
    contrast: float,
    fringe_period: float,
    n_atoms: int,
    ramsey_time: float,
    shots: int = 1,
) -> PrecisionReport:
    """Bundle contrast and period with the derived sensitivities."""
    sigma = phase_sensitivity(contrast, n_atoms, ramsey_time, shots)
    sql = sql_baseline(n_atoms, ramsey_time, shots)
    return PrecisionReport(
        contrast=contrast,
        fringe_period=fringe_period,
        sigma_delta_omega=sigma,
        sql_sigma=sql,
        gain_over_sql=sql / sigma,
    )


@dataclass(frozen=True)
class AtomNumberCurve:
    """Survival-weighted gain versus atom number, for inspection and plotting."""

    n_atoms: tuple[int, ...]
    survival: tuple[float, ...]
    figure_of_merit: tuple[float, ...]   # C(N) * N
    gain_over_sql: tuple[float, ...]     # C(N) * sqrt(N)


def optimize_atom_number(
    params: DecoherenceParams,
    gate_time: float,
    transport_time: float,
    ramsey_time: float,
    n_values,
    pulse_time: float = 0.0,
) -> tuple[int, AtomNumberCurve]:
    """Maximize the contrast-weighted Heisenberg gain C(N) * N over N.

    C(N) is the no-scattering survival of the full schedule at N atoms.
    Returns the arg max (smallest N on ties) and the whole curve.
    """
    ns = sorted({int(n) for n in n_values})
    if not ns:
        raise ParameterError("n_values must be non-empty")
    if ns[0] < 1:
        raise ParameterError("atom numbers must be >= 1")

    survivals, foms, gains = [], [], []
    for n in ns:
        schedule = build_schedule(n, gate_time, transport_time, ramsey_time, pulse_time)
        c = survival_probability(schedule, n, params)
        survivals.append(c)
        foms.append(c * n)
        gains.append(c * math.sqrt(n))
    best = int(np.argmax(foms))
    curve = AtomNumberCurve(
        n_atoms=tuple(ns),
        survival=tuple(survivals),
        figure_of_merit=tuple(foms),
        gain_over_sql=tuple(gains),
    )
    return ns[best], curve
