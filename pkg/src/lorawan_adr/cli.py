"""Command line front end.

Usage::

    lora-planner plan [--radius M | --t-h0 P] [--t-c0 P] [--rounding floor|nearest|ceil]
    lora-planner curves [--policy POLICY]
    lora-planner simulate [--policy POLICY] [--trials N] [--seed S]
    lora-planner capacity-search --policy fixed:14

Global flags (``--config``, ``--preset``, ``--seed``, ``--trials``, ``--out``)
are accepted before or after the subcommand. Exit codes: 0 success, 1
internal error, 2 invalid or infeasible input (a JSON error object is written
to stderr).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import analytic, montecarlo
from .config import ScenarioConfig
from .core import dbm_to_watt, watt_to_dbm
from .planner import (
    PlanningError,
    PowerMode,
    Rounding,
    assign_ring,
    power_map,
    quantize_power,
    required_power,
)


EXIT_OK, EXIT_INTERNAL, EXIT_INPUT = 0, 1, 2


class UsageError(Exception):
    kind = "invalid-input"


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "yes" if x else "no"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.9g}"


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


# --- commands ----------------------------------------------------------------


def cmd_plan(cfg: ScenarioConfig, out: Path) -> int:
    plan = cfg.build_plan()
    if plan.targets.disconnection_target >= plan.targets.total_target:
        print("warning: disconnection target equals total target: no interference budget, capacity is 0",
              file=sys.stderr)
    floor = plan.capacities_with(Rounding.FLOOR)
    ceil = plan.capacities_with(Rounding.CEIL)
    rows = []
    for i, rl in enumerate(plan.ring_loads):
        lo, hi = plan.geometry.ring_bounds(i + 1)
        rows.append((i + 1, lo, hi, rl.mean_active_interferers, floor[i], ceil[i]))
    write_csv(out / "plan.csv", ["ring", "l_inner_m", "l_outer_m", "beta", "capacity_floor", "capacity_ceil"], rows)
    write_csv(
        out / "summary.csv",
        ["T_H0", "avg_power_dbm", "total_capacity", "power_reduction_pct"],
        [(plan.targets.disconnection_target, plan.average_power, plan.total_capacity, 100 * plan.power_reduction)],
    )
    cfg.dump(out / "config.json")
    print(f"R = {plan.geometry.coverage_radius:.1f} m, T_H0 = {plan.targets.disconnection_target:.5g}, "
          f"avg power = {plan.average_power:.2f} dBm, total capacity ({plan.rounding.value}) = "
          f"{plan.total_capacity} (unrounded {plan.unrounded_total:.2f})")
    return EXIT_OK


def _ring_betas(cfg, plan, policy, seed):
    """Per-ring loads: analytic under power allocation, simulated search under fixed power."""
    if policy.mode is PowerMode.FIXED:
        res = montecarlo.find_max_capacity(plan, policy, cfg.trials_for("curves"), seed, workers=cfg.workers)
        return np.asarray(res.betas)
    return plan.betas


def cmd_curves(cfg: ScenarioConfig, out: Path) -> int:
    plan = cfg.build_plan()
    policy = plan.policy
    seed = cfg.resolved_seed()
    inputs = plan.inputs
    R = plan.geometry.coverage_radius
    d = R * np.arange(1, cfg.grid_points + 1) / cfg.grid_points
    rings = np.atleast_1d(assign_ring(d, plan.geometry))
    p_cont = watt_to_dbm(required_power(plan, d))
    p_disc = quantize_power(required_power(plan, d), inputs.limits)
    p_tx = dbm_to_watt(power_map(plan, policy, d))
    h0 = np.array([
        analytic.disconnection_probability(x, p, inputs.profiles[r - 1], inputs.channel)
        for x, p, r in zip(d, p_tx, rings)
    ])
    betas = _ring_betas(cfg, plan, policy, seed)
    if policy.mode is PowerMode.FIXED:
        q0 = np.empty_like(d)
        c0 = np.empty_like(d)
        for k, (x, r) in enumerate(zip(d, rings)):
            sc = montecarlo.Scenario(plan, policy, float(x), beta=float(betas[r - 1]))
            est = montecarlo.simulate_outage(sc, cfg.curve_trials, montecarlo.derive_seed(seed, k))
            q0[k], c0[k] = est.q0_hat, est.c0_hat
    else:
        q0 = analytic.collision_probability(betas[rings - 1], inputs.channel)
        c0 = analytic.total_outage(h0, q0)
    rows = zip(d, rings, p_cont, p_disc, h0, q0, c0)
    write_csv(out / "curves.csv", ["d_m", "ring", "p_cont_dbm", "p_disc_dbm", "h0", "q0", "c0"], rows)
    cfg.dump(out / "config.json")
    return EXIT_OK


def default_probes(plan) -> list[float]:
    R = plan.geometry.coverage_radius
    pts = {0.2 * R, 0.5 * R, 0.9 * R}
    for i in range(1, plan.geometry.n_rings + 1):
        lo, hi = plan.geometry.ring_bounds(i)
        pts.add(0.5 * (lo + hi))
        pts.add(hi)
    return sorted(pts)


def _trials(cfg: ScenarioConfig, command: str) -> int:
    n = cfg.trials_for(command)
    if n < montecarlo.MIN_TRIALS:
        raise UsageError(f"trials must be at least {montecarlo.MIN_TRIALS}, got {n}")
    return n


def cmd_simulate(cfg: ScenarioConfig, out: Path) -> int:
    trials = _trials(cfg, "simulate")
    plan = cfg.build_plan()
    policy = plan.policy
    seed = cfg.resolved_seed()
    inputs = plan.inputs
    probes = cfg.probe_distances_m or default_probes(plan)
    allocated = policy.mode is PowerMode.ALLOCATED_CONTINUOUS
    rows, verdicts = [], {}
    for k, x in enumerate(probes):
        sc = montecarlo.Scenario(plan, policy, float(x))
        est = montecarlo.simulate_outage(sc, trials, montecarlo.derive_seed(seed, k), workers=cfg.workers)
        sp = inputs.profiles[sc.probe_ring - 1]
        h0 = analytic.disconnection_probability(x, dbm_to_watt(power_map(plan, policy, x)), sp, inputs.channel)
        ok_h = montecarlo.agrees(est.h0_hat, h0, est.trials)
        if allocated:
            q0 = analytic.collision_probability(sc.load, inputs.channel)
            c0 = analytic.total_outage(h0, q0)
            ok = ok_h and montecarlo.agrees(est.q0_hat, q0, est.trials) and montecarlo.agrees(
                est.c0_hat, c0, est.trials)
            verdict = ok
        else:
            q0 = c0 = None
            verdict = "n/a" if policy.mode is PowerMode.FIXED else ok_h
        verdicts.setdefault(sc.probe_ring, []).append(verdict)
        rows.append((x, sc.probe_ring, est.h0_hat, est.q0_hat, est.c0_hat, est.ci_halfwidth["c0"], est.trials,
                     est.seed, h0, q0, c0, verdict))
    write_csv(
        out / "sim.csv",
        ["d_m", "ring", "h0_hat", "q0_hat", "c0_hat", "ci", "trials", "seed", "h0", "q0", "c0", "agree_3sigma"],
        rows,
    )
    cfg.dump(out / "config.json")
    for ring in sorted(verdicts):
        v = verdicts[ring]
        if all(x == "n/a" for x in v):
            status = "n/a (no closed form under fixed power)"
        else:
            status = "agree" if all(x is True or x == "n/a" for x in v) else "DISAGREE"
        print(f"ring {ring}: {status} ({len(v)} probes)")
    return EXIT_OK


def cmd_capacity_search(cfg: ScenarioConfig, out: Path) -> int:
    trials = _trials(cfg, "capacity-search")
    plan = cfg.build_plan()
    res = montecarlo.find_max_capacity(plan, plan.policy, trials, cfg.resolved_seed(), workers=cfg.workers)
    rows = [(i + 1, b, c, ci) for i, (b, c, ci) in enumerate(zip(res.betas, res.capacities, res.ci_halfwidths))]
    rows.append(("total", None, res.total, None))
    write_csv(out / "capacity.csv", ["ring", "beta_star", "capacity", "ci_halfwidth"], rows)
    cfg.dump(out / "config.json")
    for msg in res.diagnostics:
        print(msg, file=sys.stderr)
    print(f"{res.policy.label()}: total capacity {res.total} (analytic allocated plan {plan.unrounded_total:.1f})")
    return EXIT_OK


COMMANDS = {
    "plan": cmd_plan,
    "curves": cmd_curves,
    "simulate": cmd_simulate,
    "capacity-search": cmd_capacity_search,
}


# --- argument handling ---------------------------------------------------------


def _common_flags(parser, suppress: bool):
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    parser.add_argument("--config", help="scenario JSON file", **kw)
    parser.add_argument("--preset", choices=["eu868-suburban"], **kw)
    parser.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)", **kw)
    parser.add_argument("--trials", type=int, help="Monte Carlo trials per probe point", **kw)
    parser.add_argument("--out", help="output directory (default: current directory)", **kw)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lora-planner", description=__doc__.split("\n\n")[0])
    _common_flags(parser, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        _common_flags(sp, suppress=True)
        sp.add_argument("--radius", type=float, default=argparse.SUPPRESS, help="coverage radius in metres")
        sp.add_argument("--t-c0", type=float, default=argparse.SUPPRESS, help="total outage target")
        sp.add_argument("--t-h0", type=float, default=argparse.SUPPRESS, help="disconnection target")
        sp.add_argument("--policy", default=argparse.SUPPRESS,
                        help="allocated | allocated-discrete | fixed-max | fixed:<dBm>")
        sp.add_argument("--rounding", choices=["floor", "nearest", "ceil"], default=argparse.SUPPRESS)
    return parser


def resolve_config(args) -> ScenarioConfig:
    data = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
    if getattr(args, "preset", None):
        data["preset"] = args.preset
    if hasattr(args, "radius") and hasattr(args, "t_h0"):
        raise UsageError("--radius and --t-h0 select different planning modes; give only one")
    overrides = {
        "seed": getattr(args, "seed", None),
        "trials": getattr(args, "trials", None),
        "radius_m": getattr(args, "radius", None),
        "t_c0": getattr(args, "t_c0", None),
        "t_h0": getattr(args, "t_h0", None),
        "policy": getattr(args, "policy", None),
        "rounding": getattr(args, "rounding", None),
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    if hasattr(args, "radius"):
        data["t_h0"] = None
    cfg = ScenarioConfig.from_dict(data)
    cfg.seed = cfg.resolved_seed()
    return cfg


def _fail(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        out = Path(getattr(args, "out", None) or ".")
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out)
    except PlanningError as exc:
        return _fail(exc.kind, str(exc), EXIT_INPUT)
    except UsageError as exc:
        return _fail(exc.kind, str(exc), EXIT_INPUT)
    except jsonschema.ValidationError as exc:
        return _fail("invalid-config", exc.message, EXIT_INPUT)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        return _fail("invalid-input", str(exc), EXIT_INPUT)
    except Exception as exc:  # noqa: BLE001
        return _fail("internal", f"{type(exc).__name__}: {exc}", EXIT_INTERNAL)


if __name__ == "__main__":
    sys.exit(main())
