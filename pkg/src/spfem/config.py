"""Config loading for the experiment driver.

Configs are nested JSON with a fixed key set; unknown keys are rejected by
name. Command-line overrides use dotted paths (``--set time.tau=5e-4``) whose
values are parsed as JSON literals with a plain-string fallback. resolve()
merges user values over the defaults, validates everything, and returns both
the constructed objects and the fully-resolved echo dict (re-parsing the echo
resolves to the same setup).
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path

from .baseline import IterationPolicy
from .errors import ConfigurationError
from .linsolve import SolverConfig
from .scheme import (
    ProblemSpec,
    constant_coefficient_problem,
    full_problem,
    steps_for,
)

DEFAULTS: dict = {
    "problem": {
        "preset": "sp_full",
        "potential": None,  # None: preset's own default (V2 for sp_full, V0 for sp_constcoef)
        "alpha": None,  # None: keep the preset's value
        "mu": None,
        "c": None,
        "beta": None,
        "include_cubic": None,
    },
    "mesh": {"nc": 32, "ncs": None},
    "fem": {"k": 2},
    "time": {"tau": 1e-3, "T": 1.0, "taus": None},
    "solver": {"rel_tol": 1e-12, "method": "direct_factorization"},
    "scheme": "relaxation",
    "iterative": {"mode": "fixed_steps", "fixed_steps": 2, "tol": 1e-6, "max_iter": 100},
    "output": {"dir": "out", "snapshots": []},
}


@dataclass(frozen=True)
class RunSetup:
    """Validated experiment parameters ready to hand to the solvers."""

    spec: ProblemSpec
    nc: int
    k: int
    tau: float
    T: float
    solver: SolverConfig
    scheme: str
    policy: IterationPolicy
    outdir: Path
    snapshots: list
    taus: list | None
    ncs: list | None
    echo: dict

    @property
    def n_steps(self) -> int:
        return steps_for(self.T, self.tau)


def load_config(path) -> dict:
    try:
        with open(path) as f:
            raw = json.load(f)
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"config file {path} is not valid JSON: {e}")
    if not isinstance(raw, dict):
        raise ConfigurationError("config root must be a JSON object")
    return raw


def apply_overrides(raw: dict, assignments) -> dict:
    out = copy.deepcopy(raw)
    for item in assignments or ():
        if "=" not in item:
            raise ConfigurationError(f"override '{item}' is not of the form key=value")
        key, text = item.split("=", 1)
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text  # bare strings like V2 or relaxation
        node = out
        parts = key.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ConfigurationError(f"override '{key}' indexes into non-object '{p}'")
        node[parts[-1]] = value
    return out


def _merge_checked(raw: dict) -> dict:
    merged = copy.deepcopy(DEFAULTS)
    for section, value in raw.items():
        if section not in DEFAULTS:
            raise ConfigurationError(f"unknown config key '{section}'")
        if isinstance(DEFAULTS[section], dict):
            if not isinstance(value, dict):
                raise ConfigurationError(f"config key '{section}' must be an object")
            for key, sub in value.items():
                if key not in DEFAULTS[section]:
                    raise ConfigurationError(f"unknown config key '{section}.{key}'")
                merged[section][key] = sub
        else:
            merged[section] = value
    return merged


def _need_number(value, name, *, positive=False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"config key '{name}' must be a number, got {value!r}")
    if positive and not value > 0:
        raise ConfigurationError(f"config key '{name}' must be positive, got {value}")
    return float(value)


def _need_int(value, name, minimum=1) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigurationError(f"config key '{name}' must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigurationError(f"config key '{name}' must be >= {minimum}, got {value}")
    return value


def _build_spec(p: dict) -> tuple[ProblemSpec, str]:
    preset = p["preset"]
    if preset == "sp_full":
        potential_name = p["potential"] if p["potential"] is not None else "V2"
        spec = full_problem(potential_name)
    elif preset == "sp_constcoef":
        if p["potential"] not in ("V0", None):
            raise ConfigurationError(
                "config key 'problem.potential' must be V0 for the sp_constcoef preset"
            )
        potential_name = "V0"
        spec = constant_coefficient_problem()
    else:
        raise ConfigurationError(
            f"config key 'problem.preset' must be sp_full or sp_constcoef, got {preset!r}"
        )
    import dataclasses

    updates = {}
    for name in ("alpha", "mu", "c", "beta"):
        if p[name] is not None:
            updates[name] = _need_number(p[name], f"problem.{name}")
    if p["include_cubic"] is not None:
        if not isinstance(p["include_cubic"], bool):
            raise ConfigurationError("config key 'problem.include_cubic' must be a boolean")
        updates["include_cubic"] = p["include_cubic"]
    spec = dataclasses.replace(spec, **updates) if updates else spec
    return spec, potential_name


def _check_taus(taus, T) -> list | None:
    if taus is None:
        return None
    if not isinstance(taus, list) or not taus:
        raise ConfigurationError("config key 'time.taus' must be a non-empty list")
    taus = [_need_number(t, "time.taus entry", positive=True) for t in taus]
    for a, b in zip(taus[:-1], taus[1:]):
        if abs(b - a / 2.0) > 1e-12 * a:
            raise ConfigurationError(
                f"config key 'time.taus' must halve strictly, got {a} then {b}"
            )
    # every listed tau and the extra refined one must tile [0, T]
    for t in taus + [taus[-1] / 2.0]:
        steps_for(T, t)
    return taus


def _check_ncs(ncs) -> list | None:
    if ncs is None:
        return None
    if not isinstance(ncs, list) or not ncs:
        raise ConfigurationError("config key 'mesh.ncs' must be a non-empty list")
    ncs = [_need_int(n, "mesh.ncs entry") for n in ncs]
    for a, b in zip(ncs[:-1], ncs[1:]):
        if b != 2 * a:
            raise ConfigurationError(f"config key 'mesh.ncs' must double strictly, got {a} then {b}")
    return ncs


def _check_snapshots(times, tau, T) -> list:
    if not isinstance(times, list):
        raise ConfigurationError("config key 'output.snapshots' must be a list of times")
    out = []
    for t in times:
        t = _need_number(t, "output.snapshots entry")
        if t < -1e-12 or t > T * (1.0 + 1e-9) + 1e-12:
            raise ConfigurationError(f"snapshot time {t} lies outside [0, T={T}]")
        ratio = t / tau
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, abs(ratio)):
            raise ConfigurationError(f"snapshot time {t} is not a multiple of tau={tau}")
        out.append(t)
    return out


def resolve(raw: dict) -> RunSetup:
    merged = _merge_checked(raw)

    spec, potential_name = _build_spec(merged["problem"])
    nc = _need_int(merged["mesh"]["nc"], "mesh.nc")
    k = _need_int(merged["fem"]["k"], "fem.k")
    tau = _need_number(merged["time"]["tau"], "time.tau", positive=True)
    T = _need_number(merged["time"]["T"], "time.T")
    if T < 0:
        raise ConfigurationError(f"config key 'time.T' must be >= 0, got {T}")
    steps_for(T, tau)

    solver = SolverConfig(
        rel_tol=_need_number(merged["solver"]["rel_tol"], "solver.rel_tol", positive=True),
        method=merged["solver"]["method"],
    )
    scheme = merged["scheme"]
    if scheme not in ("relaxation", "iterative"):
        raise ConfigurationError(
            f"config key 'scheme' must be relaxation or iterative, got {scheme!r}"
        )
    it = merged["iterative"]
    policy = IterationPolicy(
        mode=it["mode"],
        fixed_steps=_need_int(it["fixed_steps"], "iterative.fixed_steps"),
        tol=_need_number(it["tol"], "iterative.tol", positive=True),
        max_iter=_need_int(it["max_iter"], "iterative.max_iter"),
    )

    snapshots = _check_snapshots(merged["output"]["snapshots"], tau, T)
    taus = _check_taus(merged["time"]["taus"], T)
    ncs = _check_ncs(merged["mesh"]["ncs"])

    # echo carries effective values so summaries are self-describing, and
    # re-resolving the echo reproduces this setup exactly
    merged["problem"].update(
        potential=potential_name,
        alpha=spec.alpha,
        mu=spec.mu,
        c=spec.c,
        beta=spec.beta,
        include_cubic=spec.include_cubic,
    )
    merged["time"].update(tau=tau, T=T, taus=taus)
    merged["output"]["snapshots"] = snapshots

    return RunSetup(
        spec=spec,
        nc=nc,
        k=k,
        tau=tau,
        T=T,
        solver=solver,
        scheme=scheme,
        policy=policy,
        outdir=Path(merged["output"]["dir"]),
        snapshots=snapshots,
        taus=taus,
        ncs=ncs,
        echo=merged,
    )
