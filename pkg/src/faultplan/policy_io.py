"""CSV and JSON serialization for policies, value tables, and reports.

Floats are written with repr() so files round-trip bit for bit, and the
policy CSV carries the full action-value decomposition next to each
chosen action so solved grids can be audited offline.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .solver import Policy, ValueTable

__all__ = [
    "POLICY_COLUMNS",
    "PolicyFile",
    "PolicyFileError",
    "read_policy_csv",
    "write_json_report",
    "write_policy_csv",
    "write_value_csv",
]

POLICY_COLUMNS = ("s", "z", "action", "v", "v1", "v2", "v3")


class PolicyFileError(ValueError):
    """A policy CSV failed schema validation."""


@dataclass(frozen=True, eq=False)
class PolicyFile:
    """In-memory image of a policy CSV: the action grid plus its values."""

    policy: Policy
    v: np.ndarray
    q: np.ndarray


def write_policy_csv(path, policy: Policy, table: ValueTable) -> None:
    """One row per (s, z) in ascending order, with the chosen action and
    the per-action values it was chosen from."""
    actions, v, q = policy.actions, table.v, table.q
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(POLICY_COLUMNS)
        for s in range(actions.shape[0]):
            for z in range(actions.shape[1]):
                out.writerow(
                    [
                        s,
                        z,
                        int(actions[s, z]),
                        repr(float(v[s, z])),
                        repr(float(q[s, z, 0])),
                        repr(float(q[s, z, 1])),
                        repr(float(q[s, z, 2])),
                    ]
                )


def read_policy_csv(path) -> PolicyFile:
    """Load and validate a policy CSV written by write_policy_csv.

    The file must carry the exact header, cover every (s, z) pair once in
    ascending order, and use action codes 1..3; anything else raises
    PolicyFileError with the offending line.
    """
    path = Path(path)
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PolicyFileError(f"{path}: file is empty") from None
        if header != list(POLICY_COLUMNS):
            raise PolicyFileError(
                f"{path}: header must be '{','.join(POLICY_COLUMNS)}', got '{','.join(header)}'"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(POLICY_COLUMNS):
                raise PolicyFileError(
                    f"{path}: line {lineno}: expected {len(POLICY_COLUMNS)} fields, got {len(row)}"
                )
            try:
                s, z, action = int(row[0]), int(row[1]), int(row[2])
                values = [float(x) for x in row[3:7]]
            except ValueError as exc:
                raise PolicyFileError(f"{path}: line {lineno}: {exc}") from None
            if s < 0 or z < 0:
                raise PolicyFileError(f"{path}: line {lineno}: s and z must be nonnegative")
            if action not in (1, 2, 3):
                raise PolicyFileError(
                    f"{path}: line {lineno}: action code must be 1, 2 or 3, got {action}"
                )
            rows.append((s, z, action, values))
    if not rows:
        raise PolicyFileError(f"{path}: no states found")
    s_max = max(r[0] for r in rows)
    z_max = max(r[1] for r in rows)
    expected = (s_max + 1) * (z_max + 1)
    if len(rows) != expected:
        raise PolicyFileError(
            f"{path}: grid is incomplete: expected {expected} rows for "
            f"s in 0..{s_max}, z in 0..{z_max}, got {len(rows)}"
        )
    actions = np.empty((s_max + 1, z_max + 1), dtype=np.int8)
    v = np.empty((s_max + 1, z_max + 1))
    q = np.empty((s_max + 1, z_max + 1, 3))
    for index, (s, z, action, values) in enumerate(rows):
        if s != index // (z_max + 1) or z != index % (z_max + 1):
            raise PolicyFileError(
                f"{path}: rows must cover every (s, z) exactly once in ascending order; "
                f"found ({s}, {z}) out of place"
            )
        actions[s, z] = action
        v[s, z] = values[0]
        q[s, z, :] = values[1:]
    return PolicyFile(policy=Policy(actions=actions, k=z_max), v=v, q=q)


def write_value_csv(path, table: ValueTable) -> None:
    """Value grid alone: one `s,z,v` row per state, ascending."""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(("s", "z", "v"))
        for s in range(table.v.shape[0]):
            for z in range(table.v.shape[1]):
                out.writerow([s, z, repr(float(table.v[s, z]))])


def _plain(value):
    if isinstance(value, dict):
        return {key: _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def write_json_report(path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(_plain(payload), fh, indent=2)
        fh.write("\n")
