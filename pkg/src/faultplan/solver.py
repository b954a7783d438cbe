"""Value iteration on the (last observation, elapsed time) state space.

Between inspections the planner never sees the true fault count; its
sufficient statistic is the pair (s, z) with s the count reported by the
most recent inspection or repair and z the number of steps since then.
On the truncated grid z <= k the three option values are

    wait:    chat(s, z, 1) + beta * V(s, z + 1)        (V(0, 0) at z = k)
    inspect: chat(s, z, 2) + beta * sum_m T^(z+1)[m, s] * V(m, 0)
    repair:  chat(s, z, 3) + beta * V(0, 0)

where chat(s, z, u) = sum_m c(m, u) * T^z[m, s] is the expected step cost
given what the planner knows.  Iterating the pointwise minimum of the
three to its fixed point and acting greedily yields a stationary policy
whose suboptimality is at most 2 * beta^k * c_max / (1 - beta) plus the
sweep tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .model import Action, Blank, SystemModel, TransitionKernel

__all__ = [
    "ConvergenceError",
    "InformationState",
    "Policy",
    "ValueTable",
    "expected_cost",
    "extract_policy",
    "horizon_from_epsilon",
    "state_update",
    "truncation_bound",
    "value_iteration",
    "default_sweep_cap",
]


class ConvergenceError(RuntimeError):
    """Value iteration failed to reach its stopping threshold."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class InformationState(NamedTuple):
    """What the planner knows: the last non-blank observation and its age."""

    s: int
    z: int


@dataclass(frozen=True, eq=False)
class ValueTable:
    """Converged value grid with its per-action decomposition.

    ``v[s, z]`` is the cost-to-go of the truncated problem and
    ``q[s, z, i]`` the value of taking action i + 1 now; v equals the
    action-wise minimum of q entry for entry.  ``residual`` is the
    sup-norm change of the final sweep, ``residuals`` the full per-sweep
    history, ``tol`` the requested accuracy.
    """

    k: int
    tol: float
    v: np.ndarray
    q: np.ndarray
    residual: float
    residuals: tuple
    sweeps: int


@dataclass(frozen=True, eq=False)
class Policy:
    """Action grid over (s, z) plus its optimality guarantee.

    ``epsilon_bound`` is the worst-case suboptimality of following the
    grid (truncation penalty plus sweep tolerance); it is None for grids
    not produced by the solver, such as constant baselines or files
    written elsewhere.
    """

    actions: np.ndarray
    k: int
    epsilon_bound: float | None = None

    def __post_init__(self) -> None:
        grid = np.asarray(self.actions)
        if grid.ndim != 2 or grid.shape[1] != self.k + 1:
            raise ValueError("actions must be an (n + 1) x (k + 1) grid")
        if not np.isin(grid, (1, 2, 3)).all():
            raise ValueError("action codes must be 1, 2 or 3")
        grid = grid.astype(np.int8)
        grid.setflags(write=False)
        object.__setattr__(self, "actions", grid)

    @property
    def n(self) -> int:
        return self.actions.shape[0] - 1

    def lookup(self, s: int, z: int) -> int:
        """Action at (s, z); elapsed times past the grid clamp to the z = k
        column, mirroring how the truncation treats long gaps."""
        return int(self.actions[s, min(z, self.k)])

    @classmethod
    def constant(cls, action, n: int, k: int) -> "Policy":
        """Grid that plays the same action everywhere (baseline policies)."""
        grid = np.full((n + 1, k + 1), int(Action(action)), dtype=np.int8)
        return cls(actions=grid, k=k)


def truncation_bound(model: SystemModel, k: int) -> float:
    """Worst-case cost of wrapping the elapsed-time axis at k."""
    return 2.0 * model.beta**k * model.c_max / (1.0 - model.beta)


def horizon_from_epsilon(model: SystemModel, epsilon: float) -> int:
    """Smallest truncation horizon whose wrap penalty is at most epsilon."""
    if epsilon <= 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if model.c_max == 0.0:
        return 1
    ratio = (1.0 - model.beta) * epsilon / (2.0 * model.c_max)
    if ratio >= 1.0:
        k = 1
    else:
        k = max(1, math.ceil(math.log(ratio) / math.log(model.beta)))
    # the log formula can land one off at representation boundaries; settle
    # it against the bound itself
    while truncation_bound(model, k) > epsilon:
        k += 1
    while k > 1 and truncation_bound(model, k - 1) <= epsilon:
        k -= 1
    return k


def expected_cost(model: SystemModel, kernel: TransitionKernel, s: int, z: int, u) -> float:
    """Expected step cost of action u given count s observed z steps ago."""
    u = Action(u)
    if not 0 <= s <= model.n:
        raise ValueError(f"observed count must lie in 0..{model.n}, got {s}")
    column = kernel.power(z)[:, s]
    return float(model.cost_table()[u - 1] @ column)


def state_update(s: int, z: int, u, o) -> InformationState:
    """Advance the (s, z) pair one step given the action and its observation.

    Do-nothing yields no observation, so only the clock advances; inspect
    restarts the clock at the reported count; repair restarts it at zero.
    The update never clamps z: truncation is the solver's concern, and
    rollouts clamp only the policy lookup.
    """
    u = Action(u)
    if u is Action.DO_NOTHING:
        if not isinstance(o, Blank):
            raise ValueError("do-nothing emits the blank observation, got a numeric one")
        return InformationState(s, z + 1)
    if isinstance(o, Blank):
        raise ValueError(f"{u.name.lower()} must report a fault count, got blank")
    o = int(o)
    if o < 0:
        raise ValueError(f"observed fault count cannot be negative, got {o}")
    if u is Action.INSPECT:
        return InformationState(o, 0)
    if o != 0:
        raise ValueError(f"repair leaves zero faults, so its observation must be 0, got {o}")
    return InformationState(0, 0)


def default_sweep_cap(model: SystemModel, tol: float) -> int:
    """Sweep budget implied by the contraction factor from a zero start."""
    scale = model.c_max / (1.0 - model.beta) + 1.0
    target = tol * (1.0 - model.beta)
    estimate = math.log(target / scale) / math.log(model.beta)
    return max(1, math.ceil(estimate)) + 16


def value_iteration(
    model: SystemModel,
    kernel: TransitionKernel,
    k: int,
    tol: float = 1e-6,
    max_sweeps: int | None = None,
) -> ValueTable:
    """Iterate the truncated option-value recursion to its fixed point.

    Starting from zeros, each sweep recomputes the wait/inspect/repair
    values from the previous grid and takes their pointwise minimum.
    Sweeps stop once the sup-norm change is at most
    tol * (1 - beta) / (2 * beta), which leaves the grid within tol of the
    exact fixed point in sup-norm; after that, polish sweeps run until the
    grid is bit-stable so the stored q and v are exactly consistent.
    Raises ConvergenceError if the threshold is not met within the sweep
    budget.
    """
    if k < 1:
        raise ValueError(f"truncation horizon k must be at least 1, got {k}")
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    if kernel.max_power < k + 1:
        raise ValueError(
            f"power cache must cover z = 0..{k + 1}; it stops at {kernel.max_power}"
        )
    n, beta = model.n, model.beta
    cost_rows = model.cost_table()
    chat = np.empty((3, n + 1, k + 1))
    for z in range(k + 1):
        chat[:, :, z] = cost_rows @ kernel.power(z)
    # inspect_kernels[z, m, s] = (z+1)-step transition probability m <- s
    inspect_kernels = np.stack([kernel.power(z + 1) for z in range(k + 1)])
    threshold = tol * (1.0 - beta) / (2.0 * beta)
    if max_sweeps is None:
        max_sweeps = default_sweep_cap(model, tol)
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be at least 1")

    def apply(v: np.ndarray):
        cont_wait = np.empty_like(v)
        cont_wait[:, :-1] = v[:, 1:]
        cont_wait[:, -1] = v[0, 0]
        cont_inspect = np.tensordot(inspect_kernels, v[:, 0], axes=([1], [0])).T
        q = np.stack(
            [
                chat[0] + beta * cont_wait,
                chat[1] + beta * cont_inspect,
                chat[2] + beta * v[0, 0],
            ],
            axis=-1,
        )
        return q, q.min(axis=-1)

    v = np.zeros((n + 1, k + 1))
    residuals: list[float] = []
    q = None
    converged = False
    for _ in range(max_sweeps):
        q, v_new = apply(v)
        change = float(np.max(np.abs(v_new - v)))
        residuals.append(change)
        v = v_new
        if change <= threshold:
            converged = True
            break
    if not converged:
        raise ConvergenceError(
            f"no convergence after {max_sweeps} sweeps: residual {residuals[-1]:.3e} "
            f"exceeds threshold {threshold:.3e}",
            residual=residuals[-1],
        )
    if residuals[-1] != 0.0:
        # polish to a bit-stable fixed point so v = min(q) and the repair
        # decomposition hold exactly; a two-cycle in the last float digit
        # ends the loop as well
        previous = None
        for _ in range(4 * max_sweeps + 64):
            q, v_new = apply(v)
            change = float(np.max(np.abs(v_new - v)))
            residuals.append(change)
            if change == 0.0:
                v = v_new
                break
            if previous is not None and np.array_equal(v_new, previous):
                v = v_new
                break
            previous = v
            v = v_new
    v.setflags(write=False)
    q.setflags(write=False)
    return ValueTable(
        k=k,
        tol=tol,
        v=v,
        q=q,
        residual=residuals[-1],
        residuals=tuple(residuals),
        sweeps=len(residuals),
    )


def extract_policy(table: ValueTable, model: SystemModel) -> Policy:
    """Greedy action grid of a converged table, ties going to the smaller
    action code, with the end-to-end suboptimality bound attached."""
    actions = (np.argmin(table.q, axis=-1) + 1).astype(np.int8)
    bound = truncation_bound(model, table.k) + table.tol
    return Policy(actions=actions, k=table.k, epsilon_bound=float(bound))
