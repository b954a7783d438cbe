"""Component-level Monte Carlo simulation and exact policy evaluation.

The simulator drives the true per-component process: each working
component flips to faulty on its own coin while the planner only sees
what its actions reveal.  Rollouts are reproducible trajectory by
trajectory through deterministic per-trajectory streams.  The exact
evaluator solves the linear system of the finite chain induced by a
fixed policy and serves as the ground-truth cross-check for both the
solver and the Monte Carlo estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .model import BLANK, Action, Observation, SystemModel, TransitionKernel
from .solver import Policy, state_update

__all__ = [
    "Z95",
    "ComponentTrajectory",
    "RolloutResult",
    "SimulationReport",
    "auto_horizon",
    "evaluate_policy_exact",
    "observe",
    "rollout",
    "simulate",
    "step_components",
    "tail_bound",
    "trajectory_rng",
]

#: two-sided 95% quantile of the standard normal
Z95 = 1.959963984540054


def trajectory_rng(base_seed: int, index: int) -> np.random.Generator:
    """Independent stream for one trajectory.

    Streams are derived as default_rng(SeedSequence((base_seed, index))),
    so a campaign is reproducible trajectory by trajectory no matter how
    rollouts would be scheduled.
    """
    return np.random.default_rng(np.random.SeedSequence((int(base_seed), int(index))))


def step_components(bits: np.ndarray, u, p: float, rng: np.random.Generator) -> np.ndarray:
    """Advance every component one step under action u.

    Faults are absorbing while the action is do-nothing or inspect: each
    working component fails independently with probability p, consuming
    exactly one uniform draw per working component in component-index
    order.  Repair resets all components and consumes no randomness.
    """
    u = Action(u)
    bits = np.asarray(bits, dtype=np.uint8)
    if u is Action.REPAIR:
        return np.zeros_like(bits)
    out = bits.copy()
    working = np.flatnonzero(bits == 0)
    if working.size:
        draws = rng.random(working.size)
        out[working[draws < p]] = 1
    return out


def observe(m_next: int, u) -> Observation:
    """Observation emitted after acting: blank for do-nothing, the realized
    count for inspect, zero for repair."""
    u = Action(u)
    if u is Action.DO_NOTHING:
        return BLANK
    if u is Action.INSPECT:
        return int(m_next)
    return 0


@dataclass(eq=False)
class ComponentTrajectory:
    """Full record of one rollout.

    ``states[t]`` holds the component bits entering step t + 1 (row 0 is
    the all-operating start), ``counts`` their sums, ``actions[t]`` the
    action taken at step t + 1 and ``observations[t]`` what it revealed.
    """

    states: np.ndarray
    counts: np.ndarray
    actions: np.ndarray
    observations: list


@dataclass(frozen=True, eq=False)
class RolloutResult:
    discounted_cost: float
    action_counts: np.ndarray
    clamped_lookups: int
    trajectory: Optional[ComponentTrajectory] = None


@dataclass(frozen=True)
class SimulationReport:
    """Aggregate of one Monte Carlo campaign."""

    mean_discounted_cost: float
    confidence_halfwidth_95: float
    sample_std: float
    trajectories: int
    horizon: int
    tail_bound: float
    action_frequencies: dict
    base_seed: int
    clamped_lookups: int


def rollout(model: SystemModel, policy: Policy, horizon: int, rng, record: bool = False) -> RolloutResult:
    """Simulate one trajectory of the component process under a policy.

    Starts from all components operating with (s, z) = (0, 0).  At each
    step the action comes from the policy at the current pair, with z
    clamped to the grid's last column when a long do-nothing stretch
    outruns it (clamped lookups are counted and reported); the accrued
    cost uses the true fault count, not the planner's estimate of it.
    ``rng`` may be a Generator or a plain seed.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be at least 1, got {horizon}")
    if policy.n != model.n:
        raise ValueError(
            f"policy grid has {policy.n + 1} fault-count rows but the model needs {model.n + 1}"
        )
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    n, beta, p = model.n, model.beta, model.p
    cost_rows = model.cost_table().tolist()
    grid = policy.actions.tolist()
    k = policy.k
    bits = np.zeros(n, dtype=np.uint8)
    m = 0
    s = z = 0
    cost = 0.0
    discount = 1.0
    counts = [0, 0, 0]
    clamped = 0
    if record:
        states = np.empty((horizon + 1, n), dtype=np.uint8)
        states[0] = bits
        count_hist = np.zeros(horizon + 1, dtype=np.int64)
        action_hist = np.empty(horizon, dtype=np.int8)
        obs_hist: list = []
    for t in range(horizon):
        if z > k:
            clamped += 1
            u = grid[s][k]
        else:
            u = grid[s][z]
        counts[u - 1] += 1
        cost += discount * cost_rows[u - 1][m]
        discount *= beta
        bits = step_components(bits, u, p, gen)
        m = int(bits.sum())
        o = observe(m, u)
        s, z = state_update(s, z, u, o)
        if record:
            states[t + 1] = bits
            count_hist[t + 1] = m
            action_hist[t] = u
            obs_hist.append(o)
    trajectory = None
    if record:
        trajectory = ComponentTrajectory(
            states=states, counts=count_hist, actions=action_hist, observations=obs_hist
        )
    return RolloutResult(
        discounted_cost=cost,
        action_counts=np.array(counts, dtype=np.int64),
        clamped_lookups=clamped,
        trajectory=trajectory,
    )


def tail_bound(model: SystemModel, horizon: int) -> float:
    """Largest possible discounted cost ignored beyond the horizon."""
    return model.beta**horizon * model.c_max / (1.0 - model.beta)


def auto_horizon(model: SystemModel, tail_tol: float) -> int:
    """Smallest horizon whose neglected tail is at most tail_tol."""
    if tail_tol <= 0.0:
        raise ValueError(f"tail_tol must be positive, got {tail_tol}")
    if model.c_max == 0.0:
        return 1
    scale = model.c_max / (1.0 - model.beta)
    if scale <= tail_tol:
        return 1
    t = max(1, math.ceil(math.log(tail_tol / scale) / math.log(model.beta)))
    while tail_bound(model, t) > tail_tol:
        t += 1
    while t > 1 and tail_bound(model, t - 1) <= tail_tol:
        t -= 1
    return t


def simulate(
    model: SystemModel,
    policy: Policy,
    trajectories: int,
    horizon: int | None = None,
    tail_tol: float | None = None,
    base_seed: int = 0,
) -> SimulationReport:
    """Monte Carlo estimate of a policy's discounted cost.

    Runs independent rollouts on per-trajectory streams derived from
    (base_seed, index) and aggregates them in index order, so the report
    is bit-reproducible.  The 95% halfwidth uses the normal approximation
    with the sample standard deviation and is reported as 0.0 when there
    are fewer than two trajectories.  Without an explicit horizon, the
    smallest one with tail at most tail_tol (default 1e-3) is used.
    """
    if trajectories < 1:
        raise ValueError(f"trajectories must be at least 1, got {trajectories}")
    if horizon is not None and tail_tol is not None:
        raise ValueError("pass either horizon or tail_tol, not both")
    if horizon is None:
        horizon = auto_horizon(model, 1e-3 if tail_tol is None else tail_tol)
    costs = np.empty(trajectories)
    totals = np.zeros(3, dtype=np.int64)
    clamped = 0
    for i in range(trajectories):
        result = rollout(model, policy, horizon, trajectory_rng(base_seed, i))
        costs[i] = result.discounted_cost
        totals += result.action_counts
        clamped += result.clamped_lookups
    mean = float(costs.mean())
    if trajectories > 1:
        std = float(costs.std(ddof=1))
        halfwidth = Z95 * std / math.sqrt(trajectories)
    else:
        std = 0.0
        halfwidth = 0.0
    steps = trajectories * horizon
    frequencies = {
        Action(i + 1).name.lower(): float(totals[i] / steps) for i in range(3)
    }
    return SimulationReport(
        mean_discounted_cost=mean,
        confidence_halfwidth_95=float(halfwidth),
        sample_std=std,
        trajectories=int(trajectories),
        horizon=int(horizon),
        tail_bound=float(tail_bound(model, horizon)),
        action_frequencies=frequencies,
        base_seed=int(base_seed),
        clamped_lookups=int(clamped),
    )


def evaluate_policy_exact(model: SystemModel, kernel: TransitionKernel, policy: Policy) -> np.ndarray:
    """Exact discounted cost of a fixed policy on the truncated chain.

    Builds the transition operator and expected one-step cost induced by
    the policy over all (s, z) pairs, using the same wrap to (0, 0) at
    z = k that the solver's recursion uses, and solves
    (I - beta * P) V = c directly.
    """
    n, k, beta = model.n, policy.k, model.beta
    if policy.n != n:
        raise ValueError(
            f"policy grid has {policy.n + 1} fault-count rows but the model needs {n + 1}"
        )
    if kernel.max_power < k + 1:
        raise ValueError(
            f"power cache must cover z = 0..{k + 1}; it stops at {kernel.max_power}"
        )
    size = (n + 1) * (k + 1)
    stride = k + 1
    operator = np.zeros((size, size))
    costs = np.empty(size)
    cost_rows = model.cost_table()
    for s in range(n + 1):
        for z in range(k + 1):
            i = s * stride + z
            u = int(policy.actions[s, z])
            costs[i] = cost_rows[u - 1] @ kernel.power(z)[:, s]
            if u == Action.DO_NOTHING:
                operator[i, s * stride + z + 1 if z < k else 0] = 1.0
            elif u == Action.INSPECT:
                operator[i, 0::stride] = kernel.power(z + 1)[:, s]
            else:
                operator[i, 0] = 1.0
    try:
        values = np.linalg.solve(np.eye(size) - beta * operator, costs)
    except np.linalg.LinAlgError as exc:  # cannot occur for beta < 1; surface loudly
        raise RuntimeError(f"internal error: policy evaluation solve failed ({exc})") from exc
    return values.reshape(n + 1, k + 1)
