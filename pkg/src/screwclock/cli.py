"""Command line interface: feasibility, schedule, simulate, scan, optimize, sweep.

Every command reads one JSON config (defaults apply where keys are
omitted), writes CSV tables plus JSON metadata sidecars into the output
directory, and exits nonzero with a machine-readable error blob on any
physics or configuration error. Identical (config, seed) pairs produce
byte-identical CSV bodies.
"""

from __future__ import annotations

import itertools
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import click
import numpy as np

from . import __version__
from .config import (
    KW_CM2_TO_W_M2,
    RunConfig,
    apply_override,
    config_hash,
    parse_config,
    serialize_config,
)
from .errors import ClockSimError
from .estimator import analyze_fringe, fringe_scan, optimize_atom_number, precision_report
from .lattice import overlap_depth, trap_frequencies, well_depth_closed_form
from .pipeline import PhysicsBundle, detuning_grid, probe_detuning, resolve_physics
from .rates import photon_scattering_time, survival_probability
from .register import protocol_references, run_protocol, state_fidelity
from .output import write_table

COMMANDS = ("feasibility", "schedule", "simulate", "scan", "optimize", "sweep")


def _base_metadata(command: str, cfg: RunConfig) -> dict:
    return {
        "command": command,
        "tool_version": __version__,
        "seed": cfg.run.seed,
        "config_hash": config_hash(cfg),
        "config": serialize_config(cfg),
    }


def _species_rows(bundle: PhysicsBundle) -> list[dict]:
    rows = []
    lattice = bundle.lattice
    for species in (bundle.clock, bundle.head_up, bundle.head_down):
        worst_phi = math.pi / 2.0 if species.role == "clock" else 0.0
        depth_overlap = overlap_depth(lattice, species, bundle.table)
        depth_worst = well_depth_closed_form(lattice, species, phi=worst_phi, table=bundle.table)
        recoil = (2.0 * math.pi * bundle.table.planck_reduced / lattice.lambda_m) ** 2 / (
            2.0 * species.mass
        )
        omega_ax, omega_r1, _ = trap_frequencies(
            replace(lattice, phi=0.0), species, bundle.table
        )
        tau = photon_scattering_time(
            species, lattice.intensity, depth_overlap, lattice.lambda_m, bundle.table
        )
        rows.append(
            {
                "species": species.name,
                "role": species.role,
                "rho": species.rho,
                "recoil_energy_j": recoil,
                "depth_overlap_j": depth_overlap,
                "depth_worst_j": depth_worst,
                "depth_worst_over_recoil": depth_worst / recoil,
                "omega_axial_rad_s": omega_ax,
                "omega_radial_rad_s": omega_r1,
                "scatter_time_s": tau,
                "required_intensity_w_m2": bundle.requirement.per_species.get(species.name),
            }
        )
    return rows


def _cmd_feasibility(cfg: RunConfig, out_dir: Path, jobs: int) -> list[Path]:
    bundle = resolve_physics(cfg)
    rows = _species_rows(bundle)
    report = bundle.requirement.feasibility
    meta = _base_metadata("feasibility", cfg)
    meta.update(
        {
            "feasible": bool(report.feasible) if report is not None else None,
            "margin": report.margin if report is not None else None,
            "violated_constraints": list(report.violated_constraints) if report else [],
            "intensity_w_m2": bundle.lattice.intensity,
            "intensity_kw_cm2": bundle.lattice.intensity / KW_CM2_TO_W_M2,
            "min_intensity_w_m2": bundle.requirement.intensity,
            "binding_species": bundle.requirement.binding_species,
            "interaction_energy_j": bundle.interaction,
            "gate_time_s": bundle.gate_time,
        }
    )
    path = write_table(rows, out_dir / "feasibility.csv", metadata=meta)
    click.echo(
        f"feasible={meta['feasible']} intensity={meta['intensity_kw_cm2']:.3g} kW/cm^2 "
        f"(binding: {meta['binding_species']})"
    )
    return [path]


def _cmd_schedule(cfg: RunConfig, out_dir: Path, jobs: int) -> list[Path]:
    bundle = resolve_physics(cfg)
    rows = [
        {"step_index": i, "kind": step.kind, "duration_s": step.duration, "site": step.site}
        for i, step in enumerate(bundle.schedule.steps)
    ]
    survival = survival_probability(bundle.schedule, bundle.n_atoms, bundle.decoherence)
    meta = _base_metadata("schedule", cfg)
    meta.update(
        {
            "n_atoms": bundle.n_atoms,
            "total_duration_s": bundle.schedule.total_duration,
            "ramsey_time_s": bundle.ramsey_time,
            "gate_time_s": bundle.gate_time,
            "transport_time_s": bundle.transport_time,
            "tau_scatter_clock_s": bundle.decoherence.tau_scatter_clock,
            "tau_scatter_head_s": bundle.decoherence.tau_scatter_head,
            "extra_loss_rate_per_s": bundle.decoherence.extra_loss_rate,
            "survival": survival,
        }
    )
    path = write_table(rows, out_dir / "schedule.csv", metadata=meta)
    click.echo(
        f"{len(rows)} steps, total {bundle.schedule.total_duration:.6g} s, "
        f"survival {survival:.4g}"
    )
    return [path]


def _cmd_simulate(cfg: RunConfig, out_dir: Path, jobs: int) -> list[Path]:
    n = cfg.protocol.n_atoms
    t = cfg.protocol.ramsey_time_s
    delta_omega = probe_detuning(cfg)
    delta_omega_head = cfg.run.delta_omega_head_rad_s
    chi = (n * delta_omega + delta_omega_head) * t

    result = run_protocol(
        n,
        backend=cfg.run.backend,
        delta_omega=delta_omega,
        delta_omega_head=delta_omega_head,
        ramsey_time=t,
    )
    references = protocol_references(n, delta_omega, delta_omega_head, t)
    rows = [
        {"checkpoint": name, "fidelity": state_fidelity(result.checkpoints[name], references[name])}
        for name in references
    ]
    p_up = result.p_up
    meta = _base_metadata("simulate", cfg)
    meta.update(
        {
            "n_atoms": n,
            "backend": cfg.run.backend,
            "ramsey_time_s": t,
            "delta_omega_rad_s": delta_omega,
            "delta_omega_head_rad_s": delta_omega_head,
            "chi_rad": chi,
            "p_up": p_up,
            "p_up_ideal": math.sin(chi / 2.0) ** 2,
        }
    )
    path = write_table(rows, out_dir / "simulate.csv", metadata=meta)
    click.echo(f"p_up={p_up:.6f} (ideal {meta['p_up_ideal']:.6f}), chi={chi:.4f} rad")
    return [path]


def _cmd_scan(cfg: RunConfig, out_dir: Path, jobs: int) -> list[Path]:
    bundle = resolve_physics(cfg)
    grid = detuning_grid(cfg)
    noisy = cfg.run.trajectories > 0
    scan = fringe_scan(
        bundle.n_atoms,
        bundle.ramsey_time,
        grid,
        delta_omega_head=cfg.run.delta_omega_head_rad_s,
        backend=cfg.run.backend,
        noise=bundle.decoherence if noisy else None,
        schedule=bundle.schedule if noisy else None,
        trajectories=cfg.run.trajectories if noisy else 1,
        seed=cfg.run.seed,
    )
    rows = [
        {"detuning_rad_s": d, "p_up": p}
        for d, p in zip(scan.detunings, scan.p_up)
    ]
    fit = analyze_fringe(scan)
    meta = _base_metadata("scan", cfg)
    meta.update(
        {
            "n_atoms": bundle.n_atoms,
            "backend": cfg.run.backend,
            "ramsey_time_s": bundle.ramsey_time,
            "trajectories_per_point": scan.trajectories_per_point,
            "contrast": fit.contrast,
            "fringe_period_rad_s": None if math.isnan(fit.period) else fit.period,
        }
    )
    if fit.contrast > 0.0 and not math.isnan(fit.period):
        report = precision_report(fit.contrast, fit.period, bundle.n_atoms, bundle.ramsey_time)
        meta.update(
            {
                "sigma_delta_omega_per_shot": report.sigma_delta_omega,
                "sql_sigma_per_shot": report.sql_sigma,
                "gain_over_sql": report.gain_over_sql,
            }
        )
    else:
        meta.update(
            {
                "sigma_delta_omega_per_shot": None,
                "sql_sigma_per_shot": None,
                "gain_over_sql": None,
            }
        )
    path = write_table(rows, out_dir / "scan.csv", metadata=meta)
    click.echo(
        f"{len(rows)} points, contrast {fit.contrast:.4f}, "
        f"period {meta['fringe_period_rad_s']}"
    )
    return [path]


def _cmd_optimize(cfg: RunConfig, out_dir: Path, jobs: int) -> list[Path]:
    bundle = resolve_physics(cfg)
    opt = cfg.optimize
    grid = sorted(
        {int(round(n)) for n in np.geomspace(opt.n_min, opt.n_max, opt.n_points)}
    )
    n_opt, curve = optimize_atom_number(
        bundle.decoherence,
        bundle.gate_time,
        bundle.transport_time,
        bundle.ramsey_time,
        grid,
        pulse_time=bundle.pulse_time,
    )
    rows = [
        {
            "n_atoms": n,
            "survival": s,
            "figure_of_merit": fom,
            "gain_over_sql": g,
        }
        for n, s, fom, g in zip(
            curve.n_atoms, curve.survival, curve.figure_of_merit, curve.gain_over_sql
        )
    ]
    meta = _base_metadata("optimize", cfg)
    meta.update(
        {
            "n_opt": n_opt,
            "ramsey_time_s": bundle.ramsey_time,
            "gate_time_s": bundle.gate_time,
            "transport_time_s": bundle.transport_time,
            "pulse_time_s": bundle.pulse_time,
            "tau_scatter_clock_s": bundle.decoherence.tau_scatter_clock,
            "tau_scatter_head_s": bundle.decoherence.tau_scatter_head,
            "extra_loss_rate_per_s": bundle.decoherence.extra_loss_rate,
        }
    )
    path = write_table(rows, out_dir / "optimize.csv", metadata=meta)
    click.echo(f"optimal atom number {n_opt} (ramsey time {bundle.ramsey_time} s)")
    return [path]


def _sweep_point(cfg: RunConfig, keys: list[str], values: tuple) -> RunConfig:
    point = cfg
    for key, value in zip(keys, values):
        point = apply_override(point, key, value)
    return point


def _evaluate_sweep_point(args) -> dict:
    index, cfg_point, keys, values = args
    bundle = resolve_physics(cfg_point)
    survival = survival_probability(bundle.schedule, bundle.n_atoms, bundle.decoherence)
    report = bundle.requirement.feasibility
    row = {"point_index": index}
    row.update({key: value for key, value in zip(keys, values)})
    row.update(
        {
            "feasible": bool(report.feasible) if report is not None else None,
            "margin": report.margin if report is not None else None,
            "intensity_w_m2": bundle.lattice.intensity,
            "tau_scatter_clock_s": bundle.decoherence.tau_scatter_clock,
            "tau_scatter_head_s": bundle.decoherence.tau_scatter_head,
            "gate_time_s": bundle.gate_time,
            "total_duration_s": bundle.schedule.total_duration,
            "survival": survival,
            "gain_over_sql": survival * math.sqrt(bundle.n_atoms),
        }
    )
    return row


def _cmd_sweep(cfg: RunConfig, out_dir: Path, jobs: int) -> list[Path]:
    keys = list(cfg.sweep.keys())
    value_lists = [cfg.sweep[k] for k in keys]
    points = list(itertools.product(*value_lists)) if keys else [()]
    tasks = [
        (index, _sweep_point(cfg, keys, values), keys, values)
        for index, values in enumerate(points)
    ]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_evaluate_sweep_point, tasks))
    else:
        rows = [_evaluate_sweep_point(task) for task in tasks]
    rows.sort(key=lambda r: r["point_index"])

    meta = _base_metadata("sweep", cfg)
    meta.update({"swept_parameters": keys, "points": len(rows)})
    path = write_table(rows, out_dir / "sweep.csv", metadata=meta)
    click.echo(f"swept {len(rows)} points over {keys or 'the base configuration'}")
    return [path]


_HANDLERS = {
    "feasibility": _cmd_feasibility,
    "schedule": _cmd_schedule,
    "simulate": _cmd_simulate,
    "scan": _cmd_scan,
    "optimize": _cmd_optimize,
    "sweep": _cmd_sweep,
}


def run_command(command: str, cfg: RunConfig, out_dir, jobs: int = 1) -> list[Path]:
    """Execute one named command against a parsed config; returns written files."""
    if command not in _HANDLERS:
        raise ClockSimError(f"unknown command {command!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return _HANDLERS[command](cfg, out, jobs)


def _load_config(ctx: click.Context) -> RunConfig:
    params = ctx.obj
    cfg = parse_config(Path(params["config"]) if params["config"] else None)
    for key in ("seed", "backend", "trajectories"):
        if params[key] is not None:
            cfg = apply_override(cfg, f"run.{key}", params[key])
    return cfg


def _invoke(ctx: click.Context, command: str):
    params = ctx.obj
    try:
        cfg = _load_config(ctx)
        run_command(command, cfg, params["out"], jobs=params["jobs"])
    except ClockSimError as exc:
        blob = {"error": exc.code, "message": str(exc)}
        if hasattr(exc, "path"):
            blob["field"] = exc.path
        click.echo(json.dumps(blob), err=True)
        sys.exit(exc.exit_code)


@click.group()
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSON config file; omit for the built-in defaults.")
@click.option("--out", type=click.Path(file_okay=False), default="out",
              help="Output directory for CSV tables and metadata sidecars.")
@click.option("--seed", type=int, default=None, help="Override run.seed.")
@click.option("--backend", type=click.Choice(["dense", "branch"]), default=None,
              help="Override run.backend.")
@click.option("--trajectories", type=int, default=None, help="Override run.trajectories.")
@click.option("--jobs", type=int, default=1, help="Parallel workers for sweep points.")
@click.version_option(version=__version__)
@click.pass_context
def main(ctx, config, out, seed, backend, trajectories, jobs):
    """Entangled-lattice-clock feasibility and simulation toolkit."""
    ctx.obj = {
        "config": config,
        "out": out,
        "seed": seed,
        "backend": backend,
        "trajectories": trajectories,
        "jobs": jobs,
    }


def _register(name: str, help_text: str):
    @main.command(name=name, help=help_text)
    @click.pass_context
    def _cmd(ctx):
        _invoke(ctx, name)

    return _cmd


_register("feasibility", "Transport feasibility, depths, trap frequencies, minimum intensity.")
_register("schedule", "Timed protocol step table and the no-scattering survival.")
_register("simulate", "Run the register protocol once; checkpoint fidelities and p_up.")
_register("scan", "Fringe scan over the detuning grid; CSV of p_up per detuning.")
_register("optimize", "Survival-weighted gain versus atom number; optimal N.")
_register("sweep", "Cartesian sweep over config parameter lists, one row per point.")


if __name__ == "__main__":
    main()
