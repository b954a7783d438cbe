"""Command line front end: solve, simulate, evaluate, and render.

Exit status is 0 on success, 1 when validation or a numeric check fails,
and 2 for usage errors.  The FAULTPLAN_LOG environment variable sets the
logging level (debug, info, warning, ...).
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

from .config import ConfigError, RunConfig, load_config, resolve_horizon
from .model import Action, build_transition
from .policy_io import (
    PolicyFileError,
    read_policy_csv,
    write_json_report,
    write_policy_csv,
    write_value_csv,
)
from .render import save_policy_image
from .sim import evaluate_policy_exact, simulate
from .solver import ConvergenceError, Policy, extract_policy, truncation_bound, value_iteration

__all__ = ["main", "build_parser"]

log = logging.getLogger("faultplan")

BUILTIN_POLICIES = {
    "always-do-nothing": Action.DO_NOTHING,
    "always-inspect": Action.INSPECT,
    "always-repair": Action.REPAIR,
}


def _setup_logging() -> None:
    level_name = os.environ.get("FAULTPLAN_LOG", "warning").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="faultplan",
        description=(
            "Compute and validate near-optimal inspect/repair/do-nothing schedules "
            "for a fleet of independently failing components."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve a config and write the policy grid")
    solve.add_argument("--config", required=True, help="JSON run configuration")
    pick = solve.add_mutually_exclusive_group()
    pick.add_argument("--epsilon", type=float, help="override: target suboptimality")
    pick.add_argument("--k", type=int, help="override: truncation horizon")
    solve.add_argument("--tol", type=float, help="override: value-iteration tolerance")
    solve.add_argument("--out", required=True, help="output directory")

    simulate_p = sub.add_parser("simulate", help="Monte Carlo validation of a policy")
    simulate_p.add_argument("--config", required=True)
    simulate_p.add_argument(
        "--policy",
        required=True,
        help=f"policy CSV path or one of: {', '.join(sorted(BUILTIN_POLICIES))}",
    )
    simulate_p.add_argument("--trajectories", type=int, help="override: number of rollouts")
    span = simulate_p.add_mutually_exclusive_group()
    span.add_argument("--horizon", type=int, help="override: steps per rollout")
    span.add_argument("--tail-tol", type=float, help="override: neglected-tail tolerance")
    simulate_p.add_argument("--seed", type=int, help="override: base seed")
    simulate_p.add_argument("--out", required=True, help="output directory")

    evaluate_p = sub.add_parser("evaluate", help="exact value of a fixed policy")
    evaluate_p.add_argument("--config", required=True)
    evaluate_p.add_argument("--policy", required=True)

    render = sub.add_parser("render", help="draw a policy grid as an image")
    render.add_argument("--policy", required=True, help="policy CSV path")
    render.add_argument("--out", required=True, help="output image (.svg or .png)")
    return parser


def _check_usage(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    if args.command == "solve":
        if args.k is not None and args.k < 1:
            parser.error("--k must be at least 1")
        if args.epsilon is not None and args.epsilon <= 0:
            parser.error("--epsilon must be positive")
        if args.tol is not None and args.tol <= 0:
            parser.error("--tol must be positive")
    elif args.command == "simulate":
        if args.trajectories is not None and args.trajectories < 1:
            parser.error("--trajectories must be at least 1")
        if args.horizon is not None and args.horizon < 1:
            parser.error("--horizon must be at least 1")
        if args.tail_tol is not None and args.tail_tol <= 0:
            parser.error("--tail-tol must be positive")
        if args.seed is not None and args.seed < 0:
            parser.error("--seed must be nonnegative")


def _load_policy(policy_arg: str, config: RunConfig):
    """Resolve --policy to (policy, value-at-origin or None, label)."""
    if policy_arg in BUILTIN_POLICIES:
        k = resolve_horizon(config)
        policy = Policy.constant(BUILTIN_POLICIES[policy_arg], config.model.n, k)
        return policy, None, f"builtin:{policy_arg}"
    if not Path(policy_arg).exists():
        raise PolicyFileError(f"policy file not found: {policy_arg}")
    loaded = read_policy_csv(policy_arg)
    if loaded.policy.n != config.model.n:
        raise PolicyFileError(
            f"{policy_arg}: grid covers counts 0..{loaded.policy.n} "
            f"but the config has n = {config.model.n}"
        )
    return loaded.policy, float(loaded.v[0, 0]), policy_arg


def _cmd_solve(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if args.k is not None or args.epsilon is not None:
        config = dataclasses.replace(config, k=args.k, epsilon=args.epsilon)
    if args.tol is not None:
        config = dataclasses.replace(config, tol=args.tol)
    model = config.model
    k = resolve_horizon(config)
    log.info("solving n=%d p=%g beta=%g k=%d tol=%g", model.n, model.p, model.beta, k, config.tol)
    kernel = build_transition(model, max_power=k + 1)
    table = value_iteration(model, kernel, k, tol=config.tol)
    policy = extract_policy(table, model)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    policy_path = out / "policy.csv"
    value_path = out / "value.csv"
    report_path = out / "solve_report.json"
    write_policy_csv(policy_path, policy, table)
    write_value_csv(value_path, table)
    counts = {
        Action(code).name.lower(): int((policy.actions == code).sum()) for code in (1, 2, 3)
    }
    write_json_report(
        report_path,
        {
            "k": k,
            "tol": config.tol,
            "epsilon_bound": policy.epsilon_bound,
            "truncation_bound": truncation_bound(model, k),
            "value_at_origin": float(table.v[0, 0]),
            "residual": table.residual,
            "sweeps": table.sweeps,
            "action_counts": counts,
            "config": config.provenance(resolved_k=k),
        },
    )
    print(f"solved {model.n + 1} x {k + 1} grid in {table.sweeps} sweeps "
          f"(final residual {table.residual:.3e})")
    print(f"value at (0, 0): {table.v[0, 0]:.6f}")
    print(f"epsilon bound: {policy.epsilon_bound:.6g} "
          f"(truncation {truncation_bound(model, k):.6g} + tolerance {config.tol:g})")
    print(f"actions: {counts}")
    print(f"wrote {policy_path}, {value_path}, {report_path}")
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    settings = config.simulation
    if args.trajectories is not None:
        settings = dataclasses.replace(settings, trajectories=args.trajectories)
    if args.horizon is not None:
        settings = dataclasses.replace(settings, horizon=args.horizon, tail_tol=None)
    elif args.tail_tol is not None:
        settings = dataclasses.replace(settings, horizon=None, tail_tol=args.tail_tol)
    if args.seed is not None:
        settings = dataclasses.replace(settings, base_seed=args.seed)
    config = dataclasses.replace(config, simulation=settings)
    model = config.model

    policy, origin_value, label = _load_policy(args.policy, config)
    if origin_value is None:
        # constant baseline grids carry no solved value; use the exact chain value
        kernel = build_transition(model, max_power=policy.k + 1)
        origin_value = float(evaluate_policy_exact(model, kernel, policy)[0, 0])
    report = simulate(
        model,
        policy,
        trajectories=settings.trajectories,
        horizon=settings.horizon,
        tail_tol=settings.tail_tol,
        base_seed=settings.base_seed,
    )
    epsilon_bound = truncation_bound(model, policy.k) + config.tol
    gap = abs(report.mean_discounted_cost - origin_value)
    tolerance = epsilon_bound + report.tail_bound + report.confidence_halfwidth_95
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report_path = out / "simulation_report.json"
    write_json_report(
        report_path,
        {
            **dataclasses.asdict(report),
            "policy": label,
            "value_at_origin": origin_value,
            "consistency_gap": gap,
            "consistency_tolerance": tolerance,
            "epsilon_bound": epsilon_bound,
            "config": config.provenance(),
        },
    )
    print(
        f"mean discounted cost: {report.mean_discounted_cost:.6f} "
        f"+- {report.confidence_halfwidth_95:.6f} (95%), "
        f"{report.trajectories} trajectories x {report.horizon} steps"
    )
    print(
        f"consistency gap |mean - V(0,0)| = {gap:.6g} vs bound {tolerance:.6g} "
        f"(epsilon {epsilon_bound:.6g} + tail {report.tail_bound:.6g} "
        f"+ halfwidth {report.confidence_halfwidth_95:.6g})"
    )
    if report.clamped_lookups:
        print(f"note: {report.clamped_lookups} policy lookups clamped at z = {policy.k}")
    print(f"wrote {report_path}")
    if gap > tolerance:
        print("consistency check FAILED: gap exceeds the bound", file=sys.stderr)
        return 1
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    model = config.model
    policy, origin_value, label = _load_policy(args.policy, config)
    kernel = build_transition(model, max_power=policy.k + 1)
    values = evaluate_policy_exact(model, kernel, policy)
    print(f"exact value of {label} at (0, 0): {values[0, 0]:.10f}")
    if origin_value is not None:
        print(f"policy file reports v(0, 0) = {origin_value:.10f} "
              f"(difference {abs(values[0, 0] - origin_value):.3e})")
    return 0


def _cmd_render(args: argparse.Namespace) -> int:
    loaded = read_policy_csv(args.policy)
    save_policy_image(args.out, loaded.policy.actions)
    print(f"wrote {args.out}")
    return 0


_COMMANDS = {
    "solve": _cmd_solve,
    "simulate": _cmd_simulate,
    "evaluate": _cmd_evaluate,
    "render": _cmd_render,
}


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    _check_usage(parser, args)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, PolicyFileError, ConvergenceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
