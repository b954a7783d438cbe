"""Fault-count dynamics for a fleet of independently failing components.

A system of ``n`` identical components is summarized by its fault count
m in {0, ..., n}.  Each working component fails independently with
per-step probability ``p`` and stays faulty until the whole system is
repaired, so under the do-nothing and inspect actions the count jumps
from m to m plus a Binomial(n - m, p) number of new failures, while
repair resets it to zero.  This module holds the problem data, the
binomial helpers, and the resulting count-transition matrix together
with a validated cache of its powers.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Union

import numpy as np

__all__ = [
    "Action",
    "BLANK",
    "Blank",
    "Observation",
    "SystemModel",
    "TransitionKernel",
    "binom_pmf",
    "binom_pmf_vector",
    "next_fault_pmf",
    "build_transition",
    "kernel_power",
    "step_cost",
    "MATRIX_COLUMN_TOL",
    "POWER_COLUMN_TOL",
]

#: columns of the one-step matrix must sum to 1 within this tolerance
MATRIX_COLUMN_TOL = 1e-12
#: cached matrix powers are rejected if their columns drift further than this
POWER_COLUMN_TOL = 1e-9


class Action(IntEnum):
    """Maintenance options; ties between equally good options resolve to the
    smallest value."""

    DO_NOTHING = 1
    INSPECT = 2
    REPAIR = 3


class Blank:
    """Type of the BLANK sentinel; use the module-level instance."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "blank"


#: the null observation emitted whenever the do-nothing action is taken
BLANK = Blank()

Observation = Union[int, Blank]


def _frozen(values) -> np.ndarray:
    out = np.array(values, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class SystemModel:
    """Problem data for one maintenance instance.

    ``operating_cost[m]`` is paid every step the system runs with m faults;
    ``inspection_cost[m]`` and ``repair_cost[m]`` are the surcharges of the
    inspect and repair actions at that count.  ``c_max`` is derived at
    construction as the largest possible per-step cost and drives the
    horizon needed for a given optimality tolerance.  Instances are
    validated and frozen up front and safe to share across threads.
    """

    n: int
    p: float
    beta: float
    operating_cost: np.ndarray
    inspection_cost: np.ndarray
    repair_cost: np.ndarray
    c_max: float = field(init=False)

    def __post_init__(self) -> None:
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)):
            raise ValueError("n must be an integer")
        if self.n < 1:
            raise ValueError(f"n must be at least 1, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        p = float(self.p)
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {p}")
        object.__setattr__(self, "p", p)
        beta = float(self.beta)
        if not 0.0 < beta < 1.0:
            raise ValueError(f"beta must lie strictly inside (0, 1), got {beta}")
        object.__setattr__(self, "beta", beta)
        for name in ("operating_cost", "inspection_cost", "repair_cost"):
            vec = np.asarray(getattr(self, name), dtype=float)
            if vec.shape != (self.n + 1,):
                raise ValueError(
                    f"{name} must have length n + 1 = {self.n + 1}, got shape {vec.shape}"
                )
            if not np.all(np.isfinite(vec)) or np.any(vec < 0.0):
                raise ValueError(f"{name} entries must be finite and nonnegative")
            object.__setattr__(self, name, _frozen(vec))
        object.__setattr__(self, "c_max", float(self.cost_table().max()))

    def cost_table(self) -> np.ndarray:
        """Per-step cost of each action at each fault count, shape (3, n + 1)."""
        return np.stack(
            [
                self.operating_cost,
                self.operating_cost + self.inspection_cost,
                self.operating_cost + self.repair_cost,
            ]
        )


def binom_pmf(y: int, n: int, p: float) -> float:
    """Probability of exactly ``y`` successes among ``n`` independent trials.

    Evaluated in the log domain so it stays accurate for n in the tens of
    thousands; the endpoints p = 0 and p = 1 are handled exactly.
    """
    y = operator.index(y)
    n = operator.index(n)
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    if not 0 <= y <= n:
        raise ValueError(f"y must lie in 0..{n}, got {y}")
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if p == 0.0:
        return 1.0 if y == 0 else 0.0
    if p == 1.0:
        return 1.0 if y == n else 0.0
    log_pmf = (
        math.lgamma(n + 1)
        - math.lgamma(y + 1)
        - math.lgamma(n - y + 1)
        + y * math.log(p)
        + (n - y) * math.log1p(-p)
    )
    return math.exp(log_pmf)


def binom_pmf_vector(n: int, p: float) -> np.ndarray:
    """The whole distribution, binom_pmf(y, n, p) for y = 0..n."""
    return np.array([binom_pmf(y, n, p) for y in range(n + 1)])


def next_fault_pmf(m: int, model: SystemModel) -> np.ndarray:
    """Distribution of the next fault count from an interior count m.

    The m faulty components stay faulty, entering as a point mass at m,
    and each of the n - m working components fails independently with
    probability p; convolving the two gives entry
    y = binom_pmf(y - m, n - m, p) for y >= m and zero below m.

    Boundary counts are rejected because the kernel gives them dedicated
    columns.  The same formula evaluated at m = 0 or m = n would in fact
    reproduce those columns; see build_transition.
    """
    if not 0 < m < model.n:
        raise ValueError(f"m must lie strictly between 0 and n = {model.n}, got {m}")
    out = np.zeros(model.n + 1)
    out[m:] = binom_pmf_vector(model.n - m, model.p)
    return out


@dataclass(frozen=True, eq=False)
class TransitionKernel:
    """Fault-count transition matrix under the do-nothing and inspect actions.

    ``matrix[y, m]`` is the probability that the count moves from m to y
    in one step.  Repair is deliberately not part of the matrix: it sends
    the count to zero with probability one and is applied separately
    wherever actions are executed.  ``powers`` caches matrix powers,
    powers[z] being the z-step matrix and powers[0] the identity.  Powers
    are validated once here and never renormalized, so numerical drift
    surfaces as an error instead of being papered over.  Instances are
    immutable after construction.
    """

    matrix: np.ndarray
    powers: tuple

    def __post_init__(self) -> None:
        mat = np.asarray(self.matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 2:
            raise ValueError("matrix must be square with at least two states")
        if np.any(mat < 0.0) or np.any(mat > 1.0):
            raise ValueError("matrix entries must be probabilities in [0, 1]")
        col_err = float(np.max(np.abs(mat.sum(axis=0) - 1.0)))
        if col_err > MATRIX_COLUMN_TOL:
            raise ValueError(
                f"matrix columns must sum to 1 within {MATRIX_COLUMN_TOL:g}; "
                f"worst error {col_err:.3e}"
            )
        if np.any(np.tril(mat, -1) != 0.0):
            raise ValueError(
                "faults cannot clear without repair: entries below the diagonal must be zero"
            )
        last = mat.shape[0] - 1
        if abs(mat[last, last] - 1.0) > MATRIX_COLUMN_TOL:
            raise ValueError("the all-faulty column must be a point mass at n")
        powers = tuple(np.asarray(pw, dtype=float) for pw in self.powers)
        if not powers or not np.array_equal(powers[0], np.eye(mat.shape[0])):
            raise ValueError("powers must start with the identity matrix")
        for z, pw in enumerate(powers):
            if pw.shape != mat.shape:
                raise ValueError(f"cached power {z} has shape {pw.shape}, expected {mat.shape}")
            err = float(np.max(np.abs(pw.sum(axis=0) - 1.0)))
            if err > POWER_COLUMN_TOL:
                raise ValueError(
                    f"cached power {z} drifted from column-stochastic by {err:.3e} "
                    f"(limit {POWER_COLUMN_TOL:g})"
                )
        mat = mat.copy()
        mat.setflags(write=False)
        frozen_powers = []
        for pw in powers:
            pw = pw.copy()
            pw.setflags(write=False)
            frozen_powers.append(pw)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "powers", tuple(frozen_powers))

    @property
    def n(self) -> int:
        return self.matrix.shape[0] - 1

    @property
    def max_power(self) -> int:
        return len(self.powers) - 1

    def power(self, z: int) -> np.ndarray:
        """The cached z-step matrix; z = 0 is the identity."""
        if not 0 <= z <= self.max_power:
            raise IndexError(f"power cache covers z = 0..{self.max_power}, got {z}")
        return self.powers[z]


def build_transition(model: SystemModel, max_power: int = 1) -> TransitionKernel:
    """Assemble the one-step count matrix and cache its powers up to max_power.

    Columns follow the three count regimes: from 0 every component is
    working, so the next count is Binomial(n, p); from an interior m the
    column is next_fault_pmf(m); from n there is nothing left to fail and
    the count stays put.  The boundary columns coincide with what the
    interior formula would produce at m = 0 and m = n; the cases are kept
    separate to keep each regime auditable on its own.
    """
    if max_power < 0:
        raise ValueError(f"max_power must be nonnegative, got {max_power}")
    n = model.n
    mat = np.zeros((n + 1, n + 1))
    mat[:, 0] = binom_pmf_vector(n, model.p)
    for m in range(1, n):
        mat[:, m] = next_fault_pmf(m, model)
    mat[n, n] = 1.0
    powers = [np.eye(n + 1)]
    for _ in range(max_power):
        powers.append(powers[-1] @ mat)
    return TransitionKernel(matrix=mat, powers=tuple(powers))


def kernel_power(kernel: TransitionKernel, z: int) -> np.ndarray:
    """The cached z-step transition matrix of a kernel."""
    return kernel.power(z)


def step_cost(model: SystemModel, m: int, u) -> float:
    """Per-step cost of taking action u while m components are faulty."""
    u = Action(u)
    if not 0 <= m <= model.n:
        raise ValueError(f"fault count must lie in 0..{model.n}, got {m}")
    base = model.operating_cost[m]
    if u is Action.DO_NOTHING:
        return float(base)
    if u is Action.INSPECT:
        return float(base + model.inspection_cost[m])
    return float(base + model.repair_cost[m])
