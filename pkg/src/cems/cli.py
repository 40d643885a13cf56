"""Command-line entry point: ``cems {level1,simulate,compare,validate,export}``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .control import compute_metrics, run_level1, simulate_day
from .datasets import DATASETS, load_dataset
from .domain import validate_config
from .errors import InfeasibleError, InputError, ResourceLimitError
from .io.config import export_config, load_config
from .io.manifest import MODES, RunManifest, prepare_out_dir
from .io.reports import (figure_tables, read_summary, trace_rows, write_commitment,
                         write_json, write_plan, write_table, write_trace)
from .scenario import CovModel, generate_day_ahead

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_RESOURCE = 0, 1, 2, 3

# Metrics compared between two runs, with the label printed for each.
COMPARED = (("cost_total", "cost"), ("ffr_committed_kwh", "ffr_committed"),
            ("comfort_integral", "comfort_integral"),
            ("cumulative_net_demand_kwh", "cumulative_net_demand"))


def _run_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="JSON community config (overrides --dataset)")
    p.add_argument("--dataset", default="bundled", choices=sorted(DATASETS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=MODES, default="cems")
    p.add_argument("--out", help="output directory")
    p.add_argument("--force", action="store_true", help="reuse a non-empty output directory")
    p.add_argument("--scenarios", type=int, metavar="S", help="number of PV scenarios")
    p.add_argument("--smpc-horizon", type=int, metavar="N", help="Level-2 look-ahead in steps")
    p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                   help="solver tolerance override (feasibility, optimality, pivot, "
                        "integrality, gap, node_limit)")
    p.add_argument("--manifest", help="replay a saved manifest.json (--out may redirect)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cems", description="Community energy management: "
                                     "FFR commitment, stochastic MPC and reserve deployment.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    flags = _run_flags()
    sub.add_parser("level1", parents=[flags], help="solve the day-ahead commitment only")
    sub.add_parser("simulate", parents=[flags], help="run the closed-loop day")
    cmp_ = sub.add_parser("compare", help="percentage deltas between two simulate runs")
    cmp_.add_argument("run_a")
    cmp_.add_argument("run_b", help="baseline run")
    cmp_.add_argument("--out", help="also write compare.json here")
    val = sub.add_parser("validate", help="check a config or dataset for consistency")
    val.add_argument("--config")
    val.add_argument("--dataset", default="bundled", choices=sorted(DATASETS))
    exp = sub.add_parser("export", help="write a bundled dataset as JSON + CSV files")
    exp.add_argument("--dataset", default="bundled", choices=sorted(DATASETS))
    exp.add_argument("--out", required=True)
    exp.add_argument("--force", action="store_true")
    return parser


def _tolerances(items) -> dict:
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise InputError(f"--tol expects NAME=VALUE, got {item!r}")
        try:
            out[name.strip()] = int(value) if name.strip() == "node_limit" else float(value)
        except ValueError:
            raise InputError(f"--tol {name}: not a number: {value!r}") from None
    return out


def manifest_from_args(args) -> RunManifest:
    if args.manifest:
        man = RunManifest.load(args.manifest)
        if man.command != args.command:
            raise InputError(f"{args.manifest}: manifest is for {man.command!r}, "
                             f"not {args.command!r}")
        if args.out:
            man = RunManifest(**{**man.__dict__, "out": args.out})
        return man
    if not args.out:
        raise InputError("--out is required")
    config = str(Path(args.config).resolve()) if args.config else None
    return RunManifest(command=args.command, out=args.out, mode=args.mode, seed=args.seed,
                       config=config, dataset=args.dataset, scenarios=args.scenarios,
                       smpc_horizon=args.smpc_horizon, tolerances=_tolerances(args.tol))


def _write_objective(path: Path, cfg, plan) -> None:
    lines = [f"objective {plan.objective_value!r}"]
    for b, v in sorted(plan.per_building_objective.items()):
        lines.append(f"building {cfg.buildings[b].id} {v!r}")
    path.write_text("\n".join(lines) + "\n")


def _day_ahead(cfg, seed):
    sc = cfg.scenarios
    cov = CovModel(sc.marginal_std, sc.corr_length_hours, seed, cfg.time.step_hours)
    return generate_day_ahead(cfg.exogenous, cov, sc.count)


def cli_level1(man: RunManifest, force: bool = False) -> int:
    cfg = man.load_config()
    out = prepare_out_dir(man.out, force)
    man.save(out)
    try:
        plan = run_level1(cfg, _day_ahead(cfg, man.seed), man.mode, solver=man.solver)
    except InfeasibleError as exc:
        write_json(out / "infeasibility.json", {"message": str(exc),
                                                 "attribution": exc.attribution})
        raise
    write_plan(out / "plan.csv", plan.schedule)
    write_commitment(out / "commitment.csv", cfg, plan.commitment)
    _write_objective(out / "objective.txt", cfg, plan)
    print(f"level1 {man.mode}: objective {plan.objective_value:.6g}, "
          f"committed FFR {cfg.time.step_hours * plan.commitment.total():.6g} kWh -> {out}")
    return EXIT_OK


def cli_simulate(man: RunManifest, force: bool = False) -> int:
    cfg = man.load_config()
    out = prepare_out_dir(man.out, force)
    man.save(out)
    trace = simulate_day(cfg, man.seed, man.mode, solver=man.solver)
    metrics = compute_metrics(trace)
    write_commitment(out / "commitment.csv", cfg, trace.plan.commitment)
    _write_objective(out / "objective.txt", cfg, trace.plan)
    write_trace(out / "trace.csv", trace_rows(trace))
    write_json(out / "summary.json", metrics)
    for name, (header, rows) in figure_tables(trace).items():
        write_table(out / name, header, rows)
    print(f"simulate {man.mode} seed {man.seed}: cost {metrics['cost_total']:.6g}, "
          f"FFR committed {metrics['ffr_committed_kwh']:.6g} kWh, "
          f"comfort {metrics['comfort_integral']:.6g}, "
          f"net demand {metrics['cumulative_net_demand_kwh']:.6g} kWh -> {out}")
    if metrics["level2_warnings"]:
        print(f"warning: {metrics['level2_warnings']} Level-2 steps used slack", file=sys.stderr)
    return EXIT_OK


def _pct(a: float, b: float) -> float:
    if b == 0:
        return 0.0 if a == 0 else math.copysign(math.inf, a)
    return 100.0 * (a - b) / abs(b)


def compare_summaries(a: dict, b: dict, names=("run_a", "run_b")) -> dict:
    """Relative deltas ``(a - b) / |b|`` in percent; schemas must agree."""
    if set(a) != set(b):
        diff = sorted(set(a) ^ set(b))
        raise InputError(f"schema mismatch between {names[0]} and {names[1]}: keys {diff}")
    for key in ("horizon_steps", "buildings"):
        if a.get(key) != b.get(key):
            raise InputError(f"schema mismatch: {key} differs ({a.get(key)} vs {b.get(key)})")
    rows = {}
    for key, label in COMPARED:
        if key not in a:
            raise InputError(f"schema mismatch: summaries lack {key!r}")
        rows[label] = {"a": float(a[key]), "b": float(b[key]),
                       "delta_pct": _pct(float(a[key]), float(b[key]))}
    return {"run_a": names[0], "run_b": names[1], "mode_a": a.get("mode"),
            "mode_b": b.get("mode"), "metrics": rows}


def cli_compare(run_a, run_b, out=None) -> int:
    a = read_summary(Path(run_a) / "summary.json")
    b = read_summary(Path(run_b) / "summary.json")
    table = compare_summaries(a, b, (str(run_a), str(run_b)))
    print(f"{'metric':<24}{'run_a':>16}{'run_b':>16}{'delta %':>10}")
    for label, row in table["metrics"].items():
        print(f"{label:<24}{row['a']:>16.6g}{row['b']:>16.6g}{row['delta_pct']:>+10.2f}")
    if out:
        Path(out).mkdir(parents=True, exist_ok=True)
        write_json(Path(out) / "compare.json", table)
    return EXIT_OK


def cli_validate(config=None, dataset="bundled") -> int:
    cfg = load_config(config) if config else load_dataset(dataset)
    problems = validate_config(cfg)
    for v in problems:
        print(str(v), file=sys.stderr)
    if problems:
        return EXIT_INPUT
    print(f"{config or dataset}: ok ({len(cfg.buildings)} buildings, "
          f"{cfg.time.horizon_steps} steps)")
    return EXIT_OK


def cli_export(dataset: str, out, force: bool) -> int:
    path = export_config(load_dataset(dataset), prepare_out_dir(out, force))
    print(f"wrote {path}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command in ("level1", "simulate"):
            man = manifest_from_args(args)
            run = cli_level1 if args.command == "level1" else cli_simulate
            return run(man, args.force)
        if args.command == "compare":
            return cli_compare(args.run_a, args.run_b, args.out)
        if args.command == "validate":
            return cli_validate(args.config, args.dataset)
        return cli_export(args.dataset, args.out, args.force)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
