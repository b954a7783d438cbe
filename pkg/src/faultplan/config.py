"""Run configuration: a small documented JSON schema with affine cost shorthand."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import SystemModel
from .solver import horizon_from_epsilon

__all__ = ["ConfigError", "RunConfig", "SimulationSettings", "load_config", "resolve_horizon"]

_TOP_KEYS = {"n", "p", "beta", "costs", "solver", "simulation", "out_dir"}
_COST_KEYS = {"operating", "inspection", "repair"}
_AFFINE_KEYS = {"intercept", "slope"}
_SOLVER_KEYS = {"k", "epsilon", "tol"}
_SIM_KEYS = {"trajectories", "horizon", "tail_tol", "base_seed"}


class ConfigError(ValueError):
    """A configuration file failed to parse or validate."""


@dataclass(frozen=True)
class SimulationSettings:
    trajectories: int = 10_000
    horizon: int | None = None
    tail_tol: float | None = 1e-3
    base_seed: int = 0


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Validated configuration for one solve or simulate run."""

    model: SystemModel
    k: int | None
    epsilon: float | None
    tol: float
    simulation: SimulationSettings
    out_dir: str | None = None

    def provenance(self, resolved_k: int | None = None) -> dict:
        """Fully resolved config (affine costs expanded to tables) for
        embedding into reports."""
        m = self.model
        solver: dict = {}
        if self.k is not None:
            solver["k"] = self.k
        if self.epsilon is not None:
            solver["epsilon"] = self.epsilon
        solver["tol"] = self.tol
        if resolved_k is not None:
            solver["resolved_k"] = resolved_k
        sim = self.simulation
        sim_block: dict = {"trajectories": sim.trajectories}
        if sim.horizon is not None:
            sim_block["horizon"] = sim.horizon
        if sim.tail_tol is not None:
            sim_block["tail_tol"] = sim.tail_tol
        sim_block["base_seed"] = sim.base_seed
        return {
            "n": m.n,
            "p": m.p,
            "beta": m.beta,
            "costs": {
                "operating": m.operating_cost.tolist(),
                "inspection": m.inspection_cost.tolist(),
                "repair": m.repair_cost.tolist(),
            },
            "c_max": m.c_max,
            "solver": solver,
            "simulation": sim_block,
        }


def _fail(where: str, message: str) -> None:
    raise ConfigError(f"{where}: {message}")


def _check_keys(obj: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(obj) - allowed)
    if unknown:
        _fail(where, f"unknown key(s): {', '.join(unknown)}")


def _as_float(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(where, f"expected a number, got {value!r}")
    return float(value)


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(where, f"expected an integer, got {value!r}")
    return int(value)


def _expand_cost(entry, n: int, where: str) -> np.ndarray:
    """A cost is either an explicit table of length n + 1 or an affine
    {"intercept": a, "slope": b} shorthand expanded over counts 0..n."""
    if isinstance(entry, list):
        if len(entry) != n + 1:
            _fail(where, f"table must have length n + 1 = {n + 1}, got {len(entry)}")
        return np.array([_as_float(x, where) for x in entry])
    if isinstance(entry, dict):
        _check_keys(entry, _AFFINE_KEYS, where)
        if not entry:
            _fail(where, "affine cost needs an intercept and/or a slope")
        intercept = _as_float(entry.get("intercept", 0.0), f"{where}.intercept")
        slope = _as_float(entry.get("slope", 0.0), f"{where}.slope")
        return intercept + slope * np.arange(n + 1, dtype=float)
    _fail(where, "expected a table (list) or an affine object {intercept, slope}")


def load_config(path) -> RunConfig:
    """Parse and validate a run configuration file.

    The schema is documented in the README.  Exactly one of solver.k and
    solver.epsilon must be present, costs may be tables or affine
    shorthands, and unknown keys anywhere are rejected.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    where = str(path)
    if not isinstance(raw, dict):
        _fail(where, "top level must be a JSON object")
    _check_keys(raw, _TOP_KEYS, where)
    for key in ("n", "p", "beta", "costs", "solver"):
        if key not in raw:
            _fail(where, f"missing required key '{key}'")

    n = _as_int(raw["n"], f"{where}: n")
    if n < 1:
        _fail(f"{where}: n", f"must be at least 1, got {n}")
    p = _as_float(raw["p"], f"{where}: p")
    beta = _as_float(raw["beta"], f"{where}: beta")

    costs_raw = raw["costs"]
    if not isinstance(costs_raw, dict):
        _fail(f"{where}: costs", "must be an object")
    _check_keys(costs_raw, _COST_KEYS, f"{where}: costs")
    for key in _COST_KEYS:
        if key not in costs_raw:
            _fail(f"{where}: costs", f"missing required key '{key}'")
    tables = {
        key: _expand_cost(costs_raw[key], n, f"{where}: costs.{key}") for key in sorted(_COST_KEYS)
    }
    try:
        model = SystemModel(
            n=n,
            p=p,
            beta=beta,
            operating_cost=tables["operating"],
            inspection_cost=tables["inspection"],
            repair_cost=tables["repair"],
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc

    solver_raw = raw["solver"]
    if not isinstance(solver_raw, dict):
        _fail(f"{where}: solver", "must be an object")
    _check_keys(solver_raw, _SOLVER_KEYS, f"{where}: solver")
    k = None
    if "k" in solver_raw:
        k = _as_int(solver_raw["k"], f"{where}: solver.k")
        if k < 1:
            _fail(f"{where}: solver.k", f"must be at least 1, got {k}")
    epsilon = None
    if "epsilon" in solver_raw:
        epsilon = _as_float(solver_raw["epsilon"], f"{where}: solver.epsilon")
        if epsilon <= 0.0:
            _fail(f"{where}: solver.epsilon", f"must be positive, got {epsilon}")
    if (k is None) == (epsilon is None):
        _fail(f"{where}: solver", "exactly one of 'k' and 'epsilon' must be given")
    tol = 1e-6
    if "tol" in solver_raw:
        tol = _as_float(solver_raw["tol"], f"{where}: solver.tol")
        if tol <= 0.0:
            _fail(f"{where}: solver.tol", f"must be positive, got {tol}")

    settings = SimulationSettings()
    if "simulation" in raw:
        sim_raw = raw["simulation"]
        if not isinstance(sim_raw, dict):
            _fail(f"{where}: simulation", "must be an object")
        _check_keys(sim_raw, _SIM_KEYS, f"{where}: simulation")
        trajectories = 10_000
        if "trajectories" in sim_raw:
            trajectories = _as_int(sim_raw["trajectories"], f"{where}: simulation.trajectories")
            if trajectories < 1:
                _fail(f"{where}: simulation.trajectories", "must be at least 1")
        horizon = None
        if "horizon" in sim_raw:
            horizon = _as_int(sim_raw["horizon"], f"{where}: simulation.horizon")
            if horizon < 1:
                _fail(f"{where}: simulation.horizon", "must be at least 1")
        tail_tol = None
        if "tail_tol" in sim_raw:
            tail_tol = _as_float(sim_raw["tail_tol"], f"{where}: simulation.tail_tol")
            if tail_tol <= 0.0:
                _fail(f"{where}: simulation.tail_tol", "must be positive")
        if horizon is not None and tail_tol is not None:
            _fail(f"{where}: simulation", "give either 'horizon' or 'tail_tol', not both")
        if horizon is None and tail_tol is None:
            tail_tol = 1e-3
        base_seed = 0
        if "base_seed" in sim_raw:
            base_seed = _as_int(sim_raw["base_seed"], f"{where}: simulation.base_seed")
            if base_seed < 0:
                _fail(f"{where}: simulation.base_seed", "must be nonnegative")
        settings = SimulationSettings(
            trajectories=trajectories, horizon=horizon, tail_tol=tail_tol, base_seed=base_seed
        )

    out_dir = raw.get("out_dir")
    if out_dir is not None and not isinstance(out_dir, str):
        _fail(f"{where}: out_dir", "must be a string path")

    return RunConfig(
        model=model, k=k, epsilon=epsilon, tol=tol, simulation=settings, out_dir=out_dir
    )


def resolve_horizon(config: RunConfig) -> int:
    """Truncation horizon of a run: the configured k, or the smallest one
    meeting the configured epsilon."""
    if config.k is not None:
        return config.k
    return horizon_from_epsilon(config.model, config.epsilon)
