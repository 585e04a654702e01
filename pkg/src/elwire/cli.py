"""Command line driver: ``elwire run|check|study --config FILE [--out DIR]``.

``run`` executes the configured mode (march, picard, or convergence-study),
``check`` only validates the config, ``study`` forces a convergence study of
the marching integrator at the configured resolution and its two refinements.

Outputs land in the chosen directory:

* ``diagnostics.csv``   one row per recorded level (see diagnostics module);
* ``snapshot_*.json``   full state dumps (first, last, optional cadence);
* ``metadata.json``     config echo, status, summary, failure report if any;
* ``study.json``        resolutions, drift measures and observed orders
                        (convergence-study only).

Exit codes: 0 success, 2 configuration problem, 3 numerical abort.  A run
that aborts still writes the diagnostics gathered so far plus a failure
report naming the reason and the last good row, so partial results remain
inspectable.  With a fixed config and seed the diagnostics bytes are
reproducible run to run.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from collections import deque
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .config import RunConfig, parse_config
from .diagnostics import DiagnosticsRecord, make_record, transport_check
from .dynamics import RunParams, make_state, march, picard_coupled, prepare_initial
from .errors import ConfigError, ElwireError, NumericalAbort
from .fields import CurveState, Grid, time_diff_series
from .geometry import make_manifold
from . import elliptic, initial

CSV_COLUMNS = (
    "time",
    "energy",
    "energy_tangent_rate",
    "energy_velocity",
    "energy_bending",
    "constraint_drift",
    "bentness",
    "mu_min",
    "mu_max",
    "gamma_xi_drift",
    "transport_residual",
)


def build_manifold(cfg: RunConfig):
    params = {}
    if cfg.conformal_expression is not None:
        params["expression"] = cfg.conformal_expression
    return make_manifold(cfg.manifold_name, cfg.dim, **params)


def build_initial_state(cfg: RunConfig, manifold, grid: Grid):
    curve, velocity = initial.generate(cfg.initial_name, manifold, grid, cfg.initial_params)
    data, report = prepare_initial(curve, velocity, manifold, grid)
    return make_state(data), report


def run_params(cfg: RunConfig) -> RunParams:
    return RunParams(
        solver_tol=cfg.solver_tol,
        constraint_tol=cfg.constraint_tol,
        b_floor=cfg.b_floor,
        renormalize=cfg.renormalize,
    )


# ---------------------------------------------------------------------------
# output writers (deterministic byte-for-byte for fixed inputs)


def _cell(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


def write_csv(path: Path, records: list[DiagnosticsRecord]) -> None:
    lines = [",".join(CSV_COLUMNS)]
    for rec in records:
        row = dataclasses.asdict(rec)
        lines.append(",".join(_cell(row[col]) for col in CSV_COLUMNS))
    path.write_text("\n".join(lines) + "\n")


def write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def snapshot_payload(state: CurveState) -> dict:
    payload = {
        "time": state.time,
        "gamma": state.gamma.tolist(),
        "xi": state.xi.tolist(),
        "xi_t": state.xi_t.tolist(),
        "eta": state.eta.tolist(),
    }
    if state.theta is not None:
        payload["theta"] = state.theta.tolist()
    return payload


def _record_summary(records: list[DiagnosticsRecord]) -> dict:
    if not records:
        return {}
    e0 = records[0].energy
    drift = max(abs(r.energy - e0) for r in records)
    return {
        "initial_energy": e0,
        "final_energy": records[-1].energy,
        "max_energy_drift": drift,
        "max_relative_energy_drift": drift / e0 if e0 > 0 else math.nan,
        "max_constraint_drift": max(r.constraint_drift for r in records),
        "levels_recorded": len(records),
    }


# ---------------------------------------------------------------------------
# the three modes


def _march_into(cfg: RunConfig, out: Path, quiet: bool) -> tuple[int, dict]:
    """March the configured system, writing outputs into ``out``."""
    out.mkdir(parents=True, exist_ok=True)
    manifold = build_manifold(cfg)
    grid = Grid(cfg.grid_n)
    params = run_params(cfg)
    records: list[DiagnosticsRecord] = []
    trailing: deque[CurveState] = deque(maxlen=3)
    state_box: dict = {"last_bent": math.nan}
    n_steps = cfg.n_steps
    use_transport = cfg.dt_characteristic

    def on_level(level, solved_state, result):
        if result is not None and result.bentness is not None:
            state_box["last_bent"] = result.bentness.b_value
        trailing.append(solved_state)
        final = result is None
        if level % cfg.diag_every == 0 or final:
            residual = None
            if use_transport and len(trailing) == 3:
                residual = transport_check(list(trailing), cfg.dt, manifold, grid)
            records.append(
                make_record(
                    solved_state,
                    manifold,
                    grid,
                    bentness_value=state_box["last_bent"],
                    transport_residual=residual,
                )
            )
        if level == 0 or final or (cfg.snapshot_every and level % cfg.snapshot_every == 0):
            write_json(out / f"snapshot_{level:06d}.json", snapshot_payload(solved_state))

    failure: Optional[dict] = None
    result = None
    try:
        initial_state, prep = build_initial_state(cfg, manifold, grid)
        result = march(
            initial_state,
            cfg.dt,
            n_steps,
            manifold,
            grid,
            params,
            bentness_every=cfg.bentness_every,
            on_level=on_level,
        )
    except NumericalAbort as exc:
        failure = {"type": type(exc).__name__, "reason": str(exc)}
    write_csv(out / "diagnostics.csv", records)
    meta = {
        "version": __version__,
        "config": cfg.to_dict(),
        "mode": "march",
        "n_steps": n_steps,
        "effective_horizon": n_steps * cfg.dt,
        "status": "aborted" if failure else "completed",
        "summary": _record_summary(records),
    }
    if failure is None and result is not None:
        meta["summary"]["max_displacement"] = result.max_displacement
        meta["prepared"] = {"projection_magnitude": prep.projection_magnitude}
    if failure is not None:
        meta["failure"] = failure
        if records:
            meta["failure"]["last_good"] = dataclasses.asdict(records[-1])
    write_json(out / "metadata.json", meta)
    if failure is not None:
        print(f"aborted: {failure['type']}: {failure['reason']}", file=sys.stderr)
        return 3, meta
    if not quiet:
        s = meta["summary"]
        print(
            f"marched {n_steps} steps to t={meta['effective_horizon']:.6g}; "
            f"energy drift {s['max_relative_energy_drift']:.3e}, "
            f"constraint drift {s['max_constraint_drift']:.3e} -> {out}"
        )
    return 0, meta


def _picard_into(cfg: RunConfig, out: Path, quiet: bool) -> tuple[int, dict]:
    out.mkdir(parents=True, exist_ok=True)
    manifold = build_manifold(cfg)
    grid = Grid(cfg.grid_n)
    params = run_params(cfg)
    records: list[DiagnosticsRecord] = []
    failure: Optional[dict] = None
    contraction: Optional[dict] = None
    try:
        state, prep = build_initial_state(cfg, manifold, grid)
        iterate, report = picard_coupled(
            state,
            manifold,
            grid,
            params,
            n_levels=cfg.picard_window,
            max_iter=cfg.picard_max_iter,
            tol=cfg.picard_tol,
        )
        contraction = {
            "distances": list(report.distances),
            "ratios": list(report.ratios),
            "converged": report.converged,
            "iterations": report.iterations,
        }
        xi_t = time_diff_series(iterate.xi, grid.dx)
        level_states = []
        for m in range(iterate.xi.shape[0]):
            level_states.append(
                CurveState(
                    gamma=iterate.gamma[m],
                    xi=iterate.xi[m],
                    xi_t=xi_t[m],
                    eta=iterate.eta[m],
                    theta=iterate.theta[m],
                    time=m * grid.dx,
                )
            )
        from .geometry import sample_geometry

        last_bent = math.nan
        for m, st in enumerate(level_states):
            if m % cfg.bentness_every == 0:
                samples = sample_geometry(manifold, st.gamma)
                last_bent = elliptic.bentness(st.xi, samples, grid).b_value
            residual = None
            if m >= 2:
                residual = transport_check(level_states[m - 2 : m + 1], grid.dx, manifold, grid)
            records.append(
                make_record(
                    st, manifold, grid, bentness_value=last_bent, transport_residual=residual
                )
            )
        write_json(out / "snapshot_000000.json", snapshot_payload(level_states[0]))
        write_json(
            out / f"snapshot_{len(level_states) - 1:06d}.json",
            snapshot_payload(level_states[-1]),
        )
    except NumericalAbort as exc:
        failure = {"type": type(exc).__name__, "reason": str(exc)}
    write_csv(out / "diagnostics.csv", records)
    meta = {
        "version": __version__,
        "config": cfg.to_dict(),
        "mode": "picard",
        "window_steps": cfg.picard_window,
        "status": "aborted" if failure else "completed",
        "summary": _record_summary(records),
    }
    if contraction is not None:
        meta["contraction"] = contraction
    if failure is not None:
        meta["failure"] = failure
        if records:
            meta["failure"]["last_good"] = dataclasses.asdict(records[-1])
    write_json(out / "metadata.json", meta)
    if failure is not None:
        print(f"aborted: {failure['type']}: {failure['reason']}", file=sys.stderr)
        return 3, meta
    if not quiet and contraction is not None:
        ratios = ", ".join(f"{r:.3f}" for r in contraction["ratios"][:6])
        print(
            f"picard window of {cfg.picard_window} steps converged="
            f"{contraction['converged']} in {contraction['iterations']} sweeps "
            f"(ratios: {ratios}) -> {out}"
        )
    return 0, meta


def _order(coarse: float, fine: float) -> Optional[float]:
    if coarse <= 1e-14 or fine <= 1e-14:
        return None
    return math.log2(coarse / fine)


def _study_into(cfg: RunConfig, out: Path, quiet: bool) -> tuple[int, dict]:
    out.mkdir(parents=True, exist_ok=True)
    resolutions = [cfg.grid_n, 2 * cfg.grid_n, 4 * cfg.grid_n]
    runs = []
    for n in resolutions:
        sub = dataclasses.replace(
            cfg,
            grid_n=n,
            dt=(1.0 / n) if cfg.dt_characteristic else cfg.dt * cfg.grid_n / n,
            mode="march",
        )
        code, meta = _march_into(sub, out / f"n{n:04d}", quiet=True)
        if code != 0:
            write_json(out / "study.json", {"status": "aborted", "resolution": n, "detail": meta})
            return code, meta
        runs.append(meta["summary"])
    energy = [r["max_relative_energy_drift"] for r in runs]
    constraint = [r["max_constraint_drift"] for r in runs]
    study = {
        "resolutions": resolutions,
        "energy_drift": {
            "values": energy,
            "orders": [_order(energy[0], energy[1]), _order(energy[1], energy[2])],
        },
        "constraint_drift": {
            "values": constraint,
            "orders": [_order(constraint[0], constraint[1]), _order(constraint[1], constraint[2])],
        },
        "status": "completed",
    }
    write_json(out / "study.json", study)
    if not quiet:
        for i, n in enumerate(resolutions):
            print(
                f"n={n}: energy drift {energy[i]:.3e}, constraint drift {constraint[i]:.3e}"
            )
        print(
            "observed orders: energy "
            + ", ".join("-" if o is None else f"{o:.2f}" for o in study["energy_drift"]["orders"])
            + "; constraint "
            + ", ".join(
                "-" if o is None else f"{o:.2f}" for o in study["constraint_drift"]["orders"]
            )
        )
    return 0, study


def run(cfg: RunConfig, out_dir: Optional[str] = None, quiet: bool = False) -> int:
    """Execute a validated config; returns the process exit code."""
    out = Path(out_dir or cfg.out_dir or "elwire-out")
    if cfg.mode == "march":
        code, _ = _march_into(cfg, out, quiet)
    elif cfg.mode == "picard":
        code, _ = _picard_into(cfg, out, quiet)
    else:
        code, _ = _study_into(cfg, out, quiet)
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="elwire",
        description="march, window-solve or convergence-study a closed elastic wire",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "execute the mode selected in the config"),
        ("check", "validate the config and exit"),
        ("study", "force a convergence study of the marching integrator"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--out", default=None, help="output directory (overrides config)")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")
    args = parser.parse_args(argv)
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return 2
    if args.command == "check":
        if not args.quiet:
            print(f"config ok: mode={cfg.mode}, manifold={cfg.manifold_name}, n={cfg.grid_n}")
        return 0
    if args.command == "study":
        cfg = dataclasses.replace(cfg, mode="convergence-study")
    try:
        return run(cfg, out_dir=args.out, quiet=args.quiet)
    except ValueError as exc:
        # bad generator parameters surface here (e.g. torus direction)
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ElwireError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
