"""Run configuration: JSON parsing with per-field validation paths.

A config document is a JSON object with the sections below (all optional
unless noted; defaults in parentheses):

    manifold     {"name": "euclidean" (default), "dim": 2, "expression": ...}
    grid         {"n": 64}            n >= 8
    time         {"dt": "characteristic", "horizon": 1.0}   dt <= 1/n
    mode         "march" | "picard" | "convergence-study"   (march)
    initial      {"name": "circle", ..., "velocity": {"name": "none", ...}}
    tolerances   {"solver": 1e-8, "constraint": 1e-2, "bentness_floor": 1e-3}
    picard       {"window": 16, "max_iter": 30, "tol": 1e-10}
                 window counts steps: the solve covers [0, window * dt]
    output       {"directory": null, "snapshot_every": 0}
    diagnostics  {"every": 1, "bentness_every": 10}
    renormalize  false
    seed         0

``"characteristic"`` locks the time step to the grid spacing, which is what
the integral wave solver and the transport diagnostic require.  Validation
collects every problem (not just the first) and reports each with its JSON
path, e.g. ``grid.n: must be an integer >= 8``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

from .errors import ConfigError

MANIFOLDS = ("euclidean", "flat-torus", "hyperbolic", "sphere", "conformal")
MODES = ("march", "picard", "convergence-study")
INITIALS = ("circle", "perturbed-circle", "hyperbolic-circle", "sphere-loop", "torus-geodesic")
VELOCITIES = ("none", "translate", "rotate")

#: initial conditions tied to a particular manifold (chart circles also run on
#: conformal charts, which share the flat chart topology)
_INITIAL_REQUIRES = {
    "hyperbolic-circle": ("hyperbolic",),
    "sphere-loop": ("sphere",),
    "torus-geodesic": ("flat-torus",),
    "circle": ("euclidean", "flat-torus", "conformal"),
    "perturbed-circle": ("euclidean", "flat-torus", "conformal"),
}

_SECTION_KEYS = {
    "manifold": {"name", "dim", "expression"},
    "grid": {"n"},
    "time": {"dt", "horizon"},
    "initial": {"name", "center", "mode", "amplitude", "origin", "direction", "velocity"},
    "tolerances": {"solver", "constraint", "bentness_floor"},
    "picard": {"window", "max_iter", "tol"},
    "output": {"directory", "snapshot_every"},
    "diagnostics": {"every", "bentness_every"},
}
_TOP_KEYS = set(_SECTION_KEYS) | {"mode", "renormalize", "seed"}


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration with every default resolved."""

    manifold_name: str = "euclidean"
    dim: int = 2
    conformal_expression: Optional[str] = None
    grid_n: int = 64
    dt: float = 1.0 / 64
    dt_characteristic: bool = True
    horizon: float = 1.0
    mode: str = "march"
    initial_name: str = "circle"
    initial_params: dict = field(default_factory=dict)
    solver_tol: float = 1e-8
    constraint_tol: float = 1e-2
    b_floor: float = 1e-3
    picard_window: int = 16
    picard_max_iter: int = 30
    picard_tol: float = 1e-10
    out_dir: Optional[str] = None
    snapshot_every: int = 0
    diag_every: int = 1
    bentness_every: int = 10
    renormalize: bool = False
    seed: int = 0

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.horizon / self.dt)))

    def to_dict(self) -> dict:
        return asdict(self)


def _number(value) -> Optional[float]:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return None
    return float(value)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON config document; raises ConfigError."""
    problems: list[str] = []

    def err(path: str, msg: str):
        problems.append(f"{path}: {msg}")

    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"(document): not valid JSON ({exc})"]) from exc
    if not isinstance(data, dict):
        raise ConfigError(["(document): top level must be a JSON object"])

    for key in sorted(set(data) - _TOP_KEYS):
        err(key, "unknown field")
    for section, allowed in _SECTION_KEYS.items():
        block = data.get(section)
        if block is None:
            continue
        if not isinstance(block, dict):
            err(section, "must be an object")
            data[section] = {}
            continue
        for key in sorted(set(block) - allowed):
            err(f"{section}.{key}", "unknown field")

    man = data.get("manifold", {})
    manifold_name = man.get("name", "euclidean")
    if manifold_name not in MANIFOLDS:
        err("manifold.name", f"must be one of {list(MANIFOLDS)}, got {manifold_name!r}")
        manifold_name = "euclidean"
    dim = man.get("dim", 2)
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        err("manifold.dim", f"must be a positive integer, got {dim!r}")
        dim = 2
    if manifold_name == "hyperbolic" and dim != 2:
        err("manifold.dim", "hyperbolic model is two-dimensional")
        dim = 2
    expression = man.get("expression")
    if manifold_name == "conformal" and not isinstance(expression, str):
        err("manifold.expression", "conformal model needs a closed-form expression string")
        expression = "0"

    grid = data.get("grid", {})
    n = grid.get("n", 64)
    if not isinstance(n, int) or isinstance(n, bool) or n < 8:
        err("grid.n", f"must be an integer >= 8, got {n!r}")
        n = 64

    time_block = data.get("time", {})
    horizon = _number(time_block.get("horizon", 1.0))
    if horizon is None or horizon <= 0.0:
        err("time.horizon", f"must be a positive number, got {time_block.get('horizon')!r}")
        horizon = 1.0
    raw_dt = time_block.get("dt", "characteristic")
    if raw_dt == "characteristic":
        dt = 1.0 / n
        dt_characteristic = True
    else:
        dt = _number(raw_dt)
        dt_characteristic = False
        if dt is None or dt <= 0.0:
            err("time.dt", f'must be a positive number or "characteristic", got {raw_dt!r}')
            dt = 1.0 / n
        elif dt > 1.0 / n + 1e-12:
            err("time.dt", f"violates the stability bound dt <= 1/n = {1.0 / n:.6g}, got {dt!r}")
        else:
            dt_characteristic = abs(dt - 1.0 / n) <= 1e-12

    mode = data.get("mode", "march")
    if mode not in MODES:
        err("mode", f"must be one of {list(MODES)}, got {mode!r}")
        mode = "march"
    if mode == "picard" and not dt_characteristic:
        err("time.dt", 'picard mode requires the characteristic step (dt = 1/n or "characteristic")')

    init = data.get("initial", {})
    initial_name = init.get("name", "circle")
    if initial_name not in INITIALS:
        err("initial.name", f"must be one of {list(INITIALS)}, got {initial_name!r}")
        initial_name = "circle"
    allowed_manifolds = _INITIAL_REQUIRES[initial_name]
    if manifold_name not in allowed_manifolds:
        err(
            "initial.name",
            f"{initial_name!r} runs on manifold(s) {list(allowed_manifolds)}, "
            f"config selects {manifold_name!r}",
        )
    if initial_name == "hyperbolic-circle":
        center = init.get("center", (0.0, 1.0))
        if (
            not isinstance(center, (list, tuple))
            or len(center) != 2
            or _number(center[1]) is None
            or float(center[1]) <= 0.0
        ):
            err(
                "initial.center",
                f"hyperbolic circle centre must lie in the chart (y > 0), got {center!r}",
            )
    if initial_name == "perturbed-circle":
        fmode = init.get("mode", 2)
        if not isinstance(fmode, int) or isinstance(fmode, bool) or fmode < 1:
            err("initial.mode", f"perturbation mode must be a positive integer, got {fmode!r}")
        amp = _number(init.get("amplitude", 0.01))
        if amp is None:
            err("initial.amplitude", f"must be a number, got {init.get('amplitude')!r}")
    velocity = init.get("velocity", {"name": "none"})
    if not isinstance(velocity, dict):
        err("initial.velocity", "must be an object")
        velocity = {"name": "none"}
    vname = velocity.get("name", "none")
    if vname not in VELOCITIES:
        err("initial.velocity.name", f"must be one of {list(VELOCITIES)}, got {vname!r}")
    elif vname == "translate" and "vector" not in velocity:
        err("initial.velocity.vector", "translate velocity needs a vector")
    elif vname == "rotate" and _number(velocity.get("omega")) is None:
        err("initial.velocity.omega", "rotate velocity needs a numeric omega")
    initial_params = {k: v for k, v in init.items() if k != "name"}
    initial_params["velocity"] = velocity

    tols = data.get("tolerances", {})
    solver_tol = _number(tols.get("solver", 1e-8))
    constraint_tol = _number(tols.get("constraint", 1e-2))
    b_floor = _number(tols.get("bentness_floor", 1e-3))
    for label, value in (
        ("tolerances.solver", solver_tol),
        ("tolerances.constraint", constraint_tol),
        ("tolerances.bentness_floor", b_floor),
    ):
        if value is None or value <= 0.0:
            err(label, "must be a positive number")
    solver_tol = solver_tol if solver_tol and solver_tol > 0 else 1e-8
    constraint_tol = constraint_tol if constraint_tol and constraint_tol > 0 else 1e-2
    b_floor = b_floor if b_floor and b_floor > 0 else 1e-3

    pic = data.get("picard", {})
    window = pic.get("window", 16)
    if not isinstance(window, int) or isinstance(window, bool) or window < 2:
        err("picard.window", f"must be an integer >= 2 (time steps), got {window!r}")
        window = 16
    max_iter = pic.get("max_iter", 30)
    if not isinstance(max_iter, int) or isinstance(max_iter, bool) or max_iter < 1:
        err("picard.max_iter", f"must be a positive integer, got {max_iter!r}")
        max_iter = 30
    picard_tol = _number(pic.get("tol", 1e-10))
    if picard_tol is None or picard_tol <= 0:
        err("picard.tol", "must be a positive number")
        picard_tol = 1e-10

    out = data.get("output", {})
    out_dir = out.get("directory")
    if out_dir is not None and not isinstance(out_dir, str):
        err("output.directory", f"must be a string path, got {out_dir!r}")
        out_dir = None
    snapshot_every = out.get("snapshot_every", 0)
    if not isinstance(snapshot_every, int) or isinstance(snapshot_every, bool) or snapshot_every < 0:
        err("output.snapshot_every", f"must be an integer >= 0, got {snapshot_every!r}")
        snapshot_every = 0

    diag = data.get("diagnostics", {})
    diag_every = diag.get("every", 1)
    if not isinstance(diag_every, int) or isinstance(diag_every, bool) or diag_every < 1:
        err("diagnostics.every", f"must be a positive integer, got {diag_every!r}")
        diag_every = 1
    bentness_every = diag.get("bentness_every", 10)
    if not isinstance(bentness_every, int) or isinstance(bentness_every, bool) or bentness_every < 1:
        err("diagnostics.bentness_every", f"must be a positive integer, got {bentness_every!r}")
        bentness_every = 10

    renormalize = data.get("renormalize", False)
    if not isinstance(renormalize, bool):
        err("renormalize", f"must be a boolean, got {renormalize!r}")
        renormalize = False
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        err("seed", f"must be an integer, got {seed!r}")
        seed = 0

    if problems:
        raise ConfigError(problems)
    return RunConfig(
        manifold_name=manifold_name,
        dim=dim,
        conformal_expression=expression if manifold_name == "conformal" else None,
        grid_n=n,
        dt=dt,
        dt_characteristic=dt_characteristic,
        horizon=horizon,
        mode=mode,
        initial_name=initial_name,
        initial_params=initial_params,
        solver_tol=solver_tol,
        constraint_tol=constraint_tol,
        b_floor=b_floor,
        picard_window=window,
        picard_max_iter=max_iter,
        picard_tol=picard_tol,
        out_dir=out_dir,
        snapshot_every=snapshot_every,
        diag_every=diag_every,
        bentness_every=bentness_every,
        renormalize=renormalize,
        seed=seed,
    )
