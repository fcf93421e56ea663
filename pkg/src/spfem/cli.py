"""Command-line experiment driver.

Subcommands: ``run`` (single time integration with diagnostics and
snapshots), ``conv-time`` and ``conv-space`` (two-level self-convergence
sweeps), ``compare`` (relaxation vs. fixed-point baseline on one config).
All artifacts are plain CSV plus a summary.json whose numbers can be
recomputed from the CSVs; floats are printed with 17 significant digits so
reruns with the direct solver are bit-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .baseline import IterationStats, run_iterative
from .config import RunSetup, apply_overrides, load_config, resolve
from .diagnostics import (
    ConvergenceRow,
    DiagnosticsRecord,
    MassOnlyRecorder,
    Recorder,
    convergence_orders,
    two_level_error_space,
    two_level_error_time,
)
from .errors import ConfigurationError, NonConvergence, SolveFailure
from .fespace import Field, FeSpace, eval_at_points
from .mesh import build_mesh
from .scheme import Operators, run


def fmt(x) -> str:
    """17-significant-digit float formatting; None becomes the empty cell."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.17g}"


def write_diagnostics_csv(path: Path, records: list[DiagnosticsRecord]):
    lines = [DiagnosticsRecord.CSV_HEADER]
    for r in records:
        lines.append(
            ",".join(
                [
                    str(r.n),
                    fmt(r.t),
                    fmt(r.mass),
                    fmt(r.mass_change),
                    fmt(r.energy_mod),
                    fmt(r.energy_mod_change),
                    fmt(r.energy_orig),
                    fmt(r.energy_orig_change),
                    fmt(r.wall_ms),
                ]
            )
        )
    path.write_text("\n".join(lines) + "\n")


def write_convergence_csv(path: Path, rows: list[ConvergenceRow]):
    lines = ["level,error,order"]
    for row in rows:
        lines.append(",".join([fmt(row.level), fmt(row.error), fmt(row.order)]))
    path.write_text("\n".join(lines) + "\n")


def write_iterations_csv(path: Path, stats: IterationStats):
    lines = ["n,iterations"]
    for n, count in enumerate(stats.iterations_per_step, start=1):
        lines.append(f"{n},{count}")
    path.write_text("\n".join(lines) + "\n")


def snapshot_path(outdir: Path, t: float, tag: str | None = None) -> Path:
    name = f"snapshot_{tag}.csv" if tag is not None else f"snapshot_t{t:g}.csv"
    return outdir / name


def write_snapshot(field: Field, path: Path, resolution: int | None = None):
    """Sample a field on a uniform lattice and write x,y,abs_u,re_u,im_u rows.

    Default resolution is the nodal lattice, which reproduces the coefficients
    exactly; anything at least as fine as the mesh is allowed.
    """
    space = field.space
    mesh = space.mesh
    if resolution is None:
        rx, ry = space.nnx, space.nny
    else:
        rx = ry = int(resolution)
        if rx < mesh.ncx + 1 or ry < mesh.ncy + 1:
            raise ConfigurationError(
                f"snapshot resolution {resolution} is coarser than the mesh"
            )
    xs = np.linspace(mesh.domain.xmin, mesh.domain.xmax, rx)
    ys = np.linspace(mesh.domain.ymin, mesh.domain.ymax, ry)
    X, Y = np.meshgrid(xs, ys)  # row-major: x varies fastest
    pts = np.column_stack([X.ravel(), Y.ravel()])
    vals = eval_at_points(field, pts)
    lines = ["x,y,abs_u,re_u,im_u"]
    for (x, y), v in zip(pts, vals):
        v = complex(v)
        lines.append(
            ",".join([fmt(x), fmt(y), fmt(abs(v)), fmt(v.real), fmt(v.imag)])
        )
    path.write_text("\n".join(lines) + "\n")


def write_summary(path: Path, payload: dict):
    path.write_text(json.dumps(payload, indent=2, allow_nan=False) + "\n")


class SnapshotCollector:
    """Observer holding field references at the requested time levels."""

    def __init__(self, times, tau):
        self.wanted = {int(round(t / tau)): t for t in times} if tau else {}
        self.fields: dict[float, Field] = {}

    def on_init(self, state, ops):
        if 0 in self.wanted:
            self.fields[self.wanted[0]] = state.u

    def on_step(self, state, _payload, _wall_ms):
        if state.n in self.wanted:
            self.fields[self.wanted[state.n]] = state.u


def _make_space_ops(setup: RunSetup, nc: int | None = None):
    nc = nc if nc is not None else setup.nc
    space = FeSpace(build_mesh(setup.spec.domain, nc, nc), setup.k)
    return space, Operators(space, setup.solver)


def _run_one(setup: RunSetup, space, ops, with_recorder=True, snapshots=()):
    """Drive the configured scheme once; returns (final state, recorder, stats)."""
    collector = SnapshotCollector(snapshots, setup.tau)
    observers = [collector]
    stats = None
    if setup.scheme == "iterative":
        recorder = MassOnlyRecorder(setup.spec, ops) if with_recorder else None
        if recorder:
            observers.append(recorder)
        state, stats = run_iterative(
            setup.spec, space, setup.tau, setup.T, policy=setup.policy,
            observers=observers, ops=ops,
        )
    else:
        recorder = Recorder(setup.spec, ops) if with_recorder else None
        if recorder:
            observers.append(recorder)
        state = run(setup.spec, space, setup.tau, setup.T, observers=observers, ops=ops)
    return state, recorder, stats, collector


def _mass_energy_summary(recorder, iterative: bool) -> dict:
    records = recorder.records
    out = {
        "mass": {
            "final_change": records[-1].mass_change,
            "max_change": recorder.max_mass_change,
        }
    }
    if not iterative:
        out["energy_mod"] = {
            "final_change": records[-1].energy_mod_change,
            "max_change": recorder.max_energy_mod_change,
        }
        out["energy_orig"] = {
            "final_change": records[-1].energy_orig_change,
            "max_change": recorder.max_energy_orig_change,
        }
    return out


def _prepare_outdir(setup: RunSetup) -> Path:
    try:
        setup.outdir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigurationError(f"cannot create output directory {setup.outdir}: {e}")
    return setup.outdir


def cmd_run(setup: RunSetup) -> dict:
    outdir = _prepare_outdir(setup)
    space, ops = _make_space_ops(setup)
    state, recorder, stats, collector = _run_one(
        setup, space, ops, snapshots=setup.snapshots
    )
    write_diagnostics_csv(outdir / "diagnostics.csv", recorder.records)
    for t, field in sorted(collector.fields.items()):
        write_snapshot(field, snapshot_path(outdir, t))
    iterative = setup.scheme == "iterative"
    summary = {
        "version": __version__,
        "command": "run",
        "scheme": setup.scheme,
        "n_steps": setup.n_steps,
        "wall_ms_total": sum(r.wall_ms for r in recorder.records),
        **_mass_energy_summary(recorder, iterative),
        "config": setup.echo,
    }
    if iterative:
        write_iterations_csv(outdir / "iterations.csv", stats)
        summary["iterations"] = {
            "total_inner_solves": stats.inner_solves,
            "max_per_step": max(stats.iterations_per_step, default=0),
        }
    write_summary(outdir / "summary.json", summary)
    return summary


def _final_u(setup: RunSetup, space, ops):
    state, _, _, _ = _run_one(setup, space, ops, with_recorder=False)
    return state


def cmd_conv_time(setup: RunSetup) -> dict:
    if setup.taus is None:
        raise ConfigurationError("conv-time requires config key 'time.taus'")
    outdir = _prepare_outdir(setup)
    space, ops = _make_space_ops(setup)
    import dataclasses

    levels = list(setup.taus)
    finals = []
    for tau in levels + [levels[-1] / 2.0]:
        finals.append(_final_u(dataclasses.replace(setup, tau=tau), space, ops))
    errors = [
        two_level_error_time(a.u, b.u, ops.M) for a, b in zip(finals[:-1], finals[1:])
    ]
    orders = convergence_orders(errors) if len(errors) >= 2 else []
    rows = [
        ConvergenceRow(lvl, err, None if i == 0 else orders[i - 1])
        for i, (lvl, err) in enumerate(zip(levels, errors))
    ]
    write_convergence_csv(outdir / "convergence.csv", rows)
    summary = {
        "version": __version__,
        "command": "conv-time",
        "scheme": setup.scheme,
        "levels": levels,
        "errors": errors,
        "orders": orders,
        "config": setup.echo,
    }
    write_summary(outdir / "summary.json", summary)
    return summary


def cmd_conv_space(setup: RunSetup) -> dict:
    if setup.ncs is None:
        raise ConfigurationError("conv-space requires config key 'mesh.ncs'")
    outdir = _prepare_outdir(setup)
    levels = list(setup.ncs)
    errors = []
    prev = None  # (final state, ops) of the previous level
    for nc in levels + [2 * levels[-1]]:
        space, ops = _make_space_ops(setup, nc)
        state = _final_u(setup, space, ops)
        if prev is not None:
            errors.append(two_level_error_space(prev[0].u, state.u, ops))
        prev = (state, ops)
    orders = convergence_orders(errors) if len(errors) >= 2 else []
    rows = [
        ConvergenceRow(lvl, err, None if i == 0 else orders[i - 1])
        for i, (lvl, err) in enumerate(zip(levels, errors))
    ]
    write_convergence_csv(outdir / "convergence.csv", rows)
    summary = {
        "version": __version__,
        "command": "conv-space",
        "scheme": setup.scheme,
        "levels": levels,
        "errors": errors,
        "orders": orders,
        "config": setup.echo,
    }
    write_summary(outdir / "summary.json", summary)
    return summary


def cmd_compare(setup: RunSetup) -> dict:
    import dataclasses

    outdir = _prepare_outdir(setup)

    relax_setup = dataclasses.replace(setup, scheme="relaxation")
    space_r, ops_r = _make_space_ops(setup)
    state_r, rec_r, _, _ = _run_one(relax_setup, space_r, ops_r)

    iter_setup = dataclasses.replace(setup, scheme="iterative")
    space_i, ops_i = _make_space_ops(setup)
    state_i, rec_i, stats, _ = _run_one(iter_setup, space_i, ops_i)

    gap = two_level_error_time(state_r.u, state_i.u, ops_r.M)
    wall_r = sum(r.wall_ms for r in rec_r.records)
    wall_i = sum(r.wall_ms for r in rec_i.records)

    write_diagnostics_csv(outdir / "diagnostics_relaxation.csv", rec_r.records)
    write_diagnostics_csv(outdir / "diagnostics_iterative.csv", rec_i.records)
    write_iterations_csv(outdir / "iterations.csv", stats)
    write_snapshot(state_r.u, snapshot_path(outdir, setup.T, tag="final_relaxation"))
    write_snapshot(state_i.u, snapshot_path(outdir, setup.T, tag="final_iterative"))

    summary = {
        "version": __version__,
        "command": "compare",
        "n_steps": setup.n_steps,
        "relaxation": {
            "wall_ms_total": wall_r,
            **_mass_energy_summary(rec_r, iterative=False),
        },
        "iterative": {
            "wall_ms_total": wall_i,
            **_mass_energy_summary(rec_i, iterative=True),
            "iterations": {
                "total_inner_solves": stats.inner_solves,
                "max_per_step": max(stats.iterations_per_step, default=0),
            },
        },
        "wall_ratio_relaxation_over_iterative": (wall_r / wall_i) if wall_i else None,
        "final_state_gap": gap,
        "config": setup.echo,
    }
    write_summary(outdir / "summary.json", summary)
    return summary


COMMANDS = {
    "run": cmd_run,
    "conv-time": cmd_conv_time,
    "conv-space": cmd_conv_space,
    "compare": cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spfem",
        description="Conservative finite element schemes for a coupled "
        "Schrodinger-Poisson system: runs, convergence sweeps, comparisons.",
    )
    parser.add_argument("--version", action="version", version=f"spfem {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("run", "single time integration with diagnostics and snapshots"),
        ("conv-time", "two-level time-refinement sweep (needs time.taus)"),
        ("conv-space", "two-level mesh-refinement sweep (needs mesh.ncs)"),
        ("compare", "relaxation vs fixed-point baseline on one config"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="path to a JSON config file")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            metavar="KEY=VALUE",
            help="dotted-path config override, e.g. time.tau=5e-4 (repeatable)",
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = load_config(args.config) if args.config else {}
        raw = apply_overrides(raw, args.overrides)
        setup = resolve(raw)
        summary = COMMANDS[args.command](setup)
    except ConfigurationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except NonConvergence as e:
        counts = e.stats.iterations_per_step if e.stats else []
        print(f"error: {e} (completed steps: {len(counts)})", file=sys.stderr)
        return 1
    except SolveFailure as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    outdir = Path(summary["config"]["output"]["dir"])
    print(f"{args.command}: wrote {outdir / 'summary.json'}")
    return 0
