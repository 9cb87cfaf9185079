"""Command-line front end: catalog listing, run execution, comparison, and
design diagnostics.

Run output layout: `<root>/<task>/<method>/seed<k>/` with one results.csv
row per evaluation, the fully resolved configuration, and the best design.
A manifest describing the whole grid is written before any evaluation so a
partially completed grid remains self-describing.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import csv
import datetime
import json
import os
import sys
from typing import Sequence

from . import __version__, analytics
from .diagnostics import (
    DiagnosticInputs,
    STATUS_ERROR,
    STATUS_ISSUE,
    STATUS_WARNING,
    build_evidence_bundle,
    worst_status,
)
from .optimizers import ConfigurationError, OptimizerConfig, method_names, run_with_budget
from .problems import catalog
from .space import DesignPoint, SpaceError

RESULTS_HEADER = ("iter", "design_id", "reward", "best_reward", "feasible", "n_evals", "wall_ms")

_DIAGNOSE_EXIT = {STATUS_WARNING: 2, STATUS_ISSUE: 3, STATUS_ERROR: 3}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


# ---------------------------------------------------------------------------
# list
# ---------------------------------------------------------------------------


def cmd_list(args: argparse.Namespace) -> int:
    entries = []
    for task_id in catalog.task_ids():
        env = catalog.get_environment(task_id)
        try:
            entries.append(env.describe())
        finally:
            env.close()

    for clause in args.filter or []:
        if "=" not in clause:
            print(f"error: filter must be key=value, got {clause!r}", file=sys.stderr)
            return 1
        key, value = clause.split("=", 1)
        if key == "task":
            entries = [e for e in entries if e["id"] == value]
        elif key == "kind":
            if value == "mixed":
                # "mixed" is a catalog tag for the mixed-variable aircraft
                # tasks, not just any space with more than one variable kind.
                entries = [e for e in entries if "mixed" in e["tags"]]
            else:
                entries = [e for e in entries if value in e["variable_kinds"]]
        elif key == "sense":
            entries = [e for e in entries if e["sense"] == value]
        else:
            print(f"error: unknown filter key {key!r}", file=sys.stderr)
            return 1

    if args.json:
        json.dump(entries, sys.stdout, indent=2)
        print()
        return 0
    for e in entries:
        print(
            f"{e['id']:28s} dim={e['relaxed_dim']:<3d} "
            f"kinds={','.join(e['variable_kinds']):30s} "
            f"points={e['n_operating_points']} sense={e['sense']:8s} "
            f"constraints={e['n_constraints']}"
        )
    return 0


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def _parse_seeds(text: str) -> list[int]:
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part and not part.startswith("-"):
            lo, hi = part.split("-", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        elif part:
            seeds.append(int(part))
    if not seeds:
        raise ValueError("no seeds given")
    if len(set(seeds)) != len(seeds):
        raise ValueError("duplicate seeds")
    return seeds


def _load_warmstart(path: str) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _coerce_design(row: dict, space) -> DesignPoint:
    values = {}
    for var in space.variables:
        if var.name not in row:
            raise SpaceError(f"warm-start row missing variable {var.name!r}")
        raw = row[var.name]
        if var.kind == "continuous":
            values[var.name] = float(raw)
        elif var.kind == "discrete":
            values[var.name] = type(var.levels[0])(float(raw))
        else:
            values[var.name] = raw
    return DesignPoint(values=values)


def _execute_run(
    task: str,
    method: str,
    seed: int,
    budget: int,
    out_dir: str,
    warmstart_rows: list[dict],
    evaluator_command: list[str] | None,
) -> str | None:
    """Run one (task, method, seed) cell; returns an error string or None."""
    env = catalog.get_environment(task, evaluator_command=evaluator_command)
    try:
        warm = [_coerce_design(row, env.space) for row in warmstart_rows]
        config = OptimizerConfig(method=method, budget=budget, seed=seed)
        trajectory = run_with_budget(env, config, warmstart=warm)
    except ConfigurationError as exc:
        return f"{task}/{method}/seed{seed}: {exc}"
    finally:
        env.close()

    os.makedirs(out_dir, exist_ok=True)
    resolved = dict(trajectory.resolved_config)
    resolved["sense"] = env.sense
    with open(os.path.join(out_dir, "resolved_config.json"), "w") as fh:
        json.dump(resolved, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(out_dir, "results.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_HEADER)
        for n, rec in enumerate(trajectory.records, start=1):
            writer.writerow(
                [
                    rec.iteration,
                    rec.design_id,
                    _fmt(rec.reward),
                    _fmt(rec.best_so_far),
                    rec.feasible,
                    n,
                    _fmt(rec.wall_ms),
                ]
            )
    if trajectory.best_design is not None:
        with open(os.path.join(out_dir, "best_design.json"), "w") as fh:
            json.dump(trajectory.best_design.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    if trajectory.warnings:
        with open(os.path.join(out_dir, "warnings.txt"), "w") as fh:
            fh.write("\n".join(trajectory.warnings) + "\n")
    return None


def cmd_run(args: argparse.Namespace) -> int:
    try:
        seeds = _parse_seeds(args.seeds)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    tasks = args.task.split(",")
    methods = args.method.split(",")
    known = catalog.task_ids()
    for task in tasks:
        if task not in known:
            print(f"error: unknown task {task!r}", file=sys.stderr)
            return 1
    for method in methods:
        if method not in method_names():
            print(f"error: unknown method {method!r}", file=sys.stderr)
            return 1

    warmstart_rows = _load_warmstart(args.warmstart) if args.warmstart else []
    evaluator_command = args.evaluator.split() if args.evaluator else None

    os.makedirs(args.out, exist_ok=True)
    manifest = {
        "tasks": tasks,
        "methods": methods,
        "seeds": seeds,
        "budget": args.budget,
        "output_root": os.path.abspath(args.out),
        "catalog_version": catalog.CATALOG_VERSION,
        "harness_version": __version__,
        "timestamp_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    # Manifest goes down before any evaluation happens.
    with open(os.path.join(args.out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    cells = [
        (task, method, seed, args.budget,
         os.path.join(args.out, task, method, f"seed{seed}"),
         warmstart_rows, evaluator_command)
        for task in tasks
        for method in methods
        for seed in seeds
    ]
    errors: list[str] = []
    if args.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            for err in pool.map(_execute_run_star, cells):
                if err:
                    errors.append(err)
    else:
        for cell in cells:
            err = _execute_run(*cell)
            if err:
                errors.append(err)
    for err in errors:
        print(f"error: {err}", file=sys.stderr)
    print(f"completed {len(cells) - len(errors)}/{len(cells)} runs under {args.out}")
    return 1 if errors else 0


def _execute_run_star(cell) -> str | None:
    return _execute_run(*cell)


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------


def _environment_group(task: str) -> str:
    return task.split("-", 1)[0]


def cmd_compare(args: argparse.Namespace) -> int:
    try:
        run_set = analytics.load_run_set(args.roots)
    except analytics.AnalyticsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if len(run_set.methods) < 2:
        print("warning: single method; rank table degenerates to 0.5", file=sys.stderr)

    if args.group_by == "environment":
        # Collapse tasks into environment groups by relabeling.
        records = tuple(
            analytics.RunRecord(
                task=_environment_group(r.task),
                method=r.method,
                seed=hash((r.task, r.seed)) & 0x7FFFFFFF,
                budget=r.budget,
                rewards=r.rewards,
                sense=r.sense,
            )
            for r in run_set.records
        )
        run_set = analytics.RunSet(records=records, budget_grid=run_set.budget_grid)

    os.makedirs(args.out, exist_ok=True)
    table = analytics.rank_table(run_set)
    analytics.write_rank_table_csv(table, os.path.join(args.out, "rank_table.csv"))
    tasks, mat = analytics.pairwise_rho_matrix(run_set)
    analytics.write_rho_matrix_csv(tasks, mat, os.path.join(args.out, "pairwise_rho.csv"))
    written = analytics.write_convergence_data(run_set, os.path.join(args.out, "convergence"))
    for task, absent in table.missing.items():
        print(f"note: {task}: no usable runs for {', '.join(absent)} (flagged N/A)")
    print(
        f"wrote rank_table.csv, pairwise_rho.csv, and {len(written)} "
        f"convergence series under {args.out}"
    )
    return 0


# ---------------------------------------------------------------------------
# diagnose
# ---------------------------------------------------------------------------


def cmd_diagnose(args: argparse.Namespace) -> int:
    if args.task not in catalog.task_ids():
        print(f"error: unknown task {args.task!r}", file=sys.stderr)
        return 1
    try:
        with open(args.design) as fh:
            design = json.load(fh)
        with open(args.metrics) as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read inputs: {exc}", file=sys.stderr)
        return 1
    if not isinstance(design, dict) or not isinstance(payload, dict):
        print("error: design and metrics files must contain JSON objects", file=sys.stderr)
        return 1

    env = catalog.get_environment(args.task)
    try:
        metrics = payload.get("metrics", payload)
        images = payload.get("images")
        artifacts = payload.get("model_artifacts", {})
        inputs = DiagnosticInputs(
            environment=payload.get("environment", args.task),
            design_id=design.get("name") or payload.get("design_id", "design"),
            space=env.space,
            design_params=design,
            metrics=metrics,
            artifacts=artifacts,
            images=tuple(images) if images is not None else None,
            profile=env.diagnostics_profile,
            design_refs=(os.path.abspath(args.design),),
        )
        bundle = build_evidence_bundle(
            inputs,
            timestamp_utc=datetime.datetime.now(datetime.timezone.utc).isoformat(),
        )
    finally:
        env.close()

    out = args.out or "evidence_bundle.json"
    with open(out, "w") as fh:
        json.dump(bundle, fh, indent=2)
        fh.write("\n")
    worst = worst_status(bundle)
    print(f"wrote {out} (worst status: {worst})")
    return _DIAGNOSE_EXIT.get(worst, 0)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aerobench",
        description="Benchmark harness for aerodynamic-style design optimization.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_list = sub.add_parser("list", help="list catalog tasks")
    p_list.add_argument("--filter", action="append", metavar="KEY=VALUE")
    p_list.add_argument("--json", action="store_true")
    p_list.set_defaults(func=cmd_list)

    p_run = sub.add_parser("run", help="run optimizers on tasks")
    p_run.add_argument("--task", required=True, help="task id(s), comma-separated")
    p_run.add_argument("--method", required=True, help="method(s), comma-separated")
    p_run.add_argument("--seeds", required=True, help="e.g. 0,1,2 or 0-9")
    p_run.add_argument("--budget", type=int, required=True)
    p_run.add_argument("--out", default="runs")
    p_run.add_argument("--jobs", type=int, default=1)
    p_run.add_argument("--warmstart", metavar="CSV")
    p_run.add_argument("--evaluator", metavar="CMD", help="external evaluator command")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="rank tables and plot data from runs")
    p_cmp.add_argument("roots", nargs="+", help="run output roots")
    p_cmp.add_argument("--group-by", choices=("task", "environment"), default="task")
    p_cmp.add_argument("--out", default="comparison")
    p_cmp.set_defaults(func=cmd_compare)

    p_diag = sub.add_parser("diagnose", help="evidence bundle for one design")
    p_diag.add_argument("--design", required=True)
    p_diag.add_argument("--metrics", required=True)
    p_diag.add_argument("--task", required=True)
    p_diag.add_argument("--out")
    p_diag.set_defaults(func=cmd_diagnose)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
