"""Command-line entry point.

Exit codes: 0 compliant/success, 1 requirement violation or synthesis
failure, 2 usage or IO error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import experiments
from .errors import OddsafeError
from .marsim import ScenarioConfig
from .dtmc import rank_situations
from .prism import export_model, export_properties
from .proplang import parse_properties_file
from .scg import load_scg


def _load_properties(path: str):
    with open(path) as fh:
        return parse_properties_file(json.load(fh))


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise OddsafeError("config file must be a JSON object")
    return doc


def _print_report(report, fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "json":
        json.dump(report.to_dict(), out, indent=2, sort_keys=True)
        out.write("\n")
        return
    prop_names = sorted({n for props in report.records.values() for n in props})
    header = ["situation"] + [f"{n} value/score" for n in prop_names] + ["worst"]
    print("  ".join(f"{h:>18}" for h in header), file=out)
    for sid in sorted(report.records, key=lambda s: (len(s), s)):
        cells = [sid]
        for name in prop_names:
            r = report.records[sid][name]
            mark = "" if r.compliant else " !"
            cells.append(f"{r.value:.5f}/{r.score:+.5f}{mark}")
        cells.append(f"{report.worst_scores[sid]:+.5f}")
        print("  ".join(f"{c:>18}" for c in cells), file=out)
    print(f"worst situation: {report.worst_situation}", file=out)


def cmd_check(args) -> int:
    scg = load_scg(args.scg)
    properties = _load_properties(args.properties)
    report = rank_situations(scg, properties)
    _print_report(report, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    if args.situation:
        if args.situation not in report.records:
            raise OddsafeError(f"no record for situation {args.situation!r}")
        results = report.records[args.situation]
        return 0 if all(r.compliant for r in results.values()) else 1
    return 0 if report.all_compliant() else 1


def _write_records(records, out_dir: Path, fmt: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "variants.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(experiments.CSV_HEADER)
        for record in records:
            writer.writerow(record.to_csv_row())
    with open(out_dir / "variants.json", "w") as fh:
        json.dump([r.to_dict() for r in records], fh, indent=2)
        fh.write("\n")
    if fmt == "table":
        widths = [4, 22, 12, 8, 28]
        print("  ".join(h.ljust(w) for h, w in zip(experiments.CSV_HEADER, widths)))
        for record in records:
            print(
                "  ".join(c.ljust(w) for c, w in zip(record.to_csv_row(), widths))
            )


def cmd_experiment_rq1(args) -> int:
    doc = _load_config(args.config)
    scenario = ScenarioConfig(**doc.get("scenario", {}))
    config = experiments.VariantConfig(
        seed=args.seed if args.seed is not None else doc.get("seed", 0),
        variants=doc.get("variants", 20),
        drift_magnitude=doc.get("drift_magnitude", 0.95),
        max_removals=args.max_removals
        if args.max_removals is not None
        else doc.get("max_removals", 4),
        scenario=scenario,
    )
    records = experiments.run_variants(config)
    out_dir = Path(args.out or "rq1-out")
    _write_records(records, out_dir, args.format)
    rate = experiments.rescue_rate(records)
    violating = sum(1 for r in records if r.properties_violated)
    rescued = sum(1 for r in records if r.properties_violated and r.save_success)
    if rate is None:
        print("rescue rate: n/a (no violating variants)")
    else:
        print(f"rescue rate: {rescued}/{violating} = {rate:.2f}")
    return 0


def _log_to_jsonl(log, path: Path) -> None:
    with open(path, "w") as fh:
        for entry in log:
            fh.write(json.dumps(entry.to_dict()) + "\n")


def cmd_experiment_rq2(args) -> int:
    doc = _load_config(args.config)
    config = experiments.TimelineConfig(
        seed=args.seed if args.seed is not None else doc.get("seed", 7),
        steps=doc.get("steps", 1000),
        drift_time=doc.get("drift_time", 60),
        drift_magnitude=doc.get("drift_magnitude", 1.0),
        max_removals=args.max_removals
        if args.max_removals is not None
        else doc.get("max_removals", 4),
        prior_strength_kappa=doc.get("prior_strength_kappa", 1.0),
    )
    result = experiments.run_timeline(config)
    out_dir = Path(args.out or "rq2-out")
    out_dir.mkdir(parents=True, exist_ok=True)
    _log_to_jsonl(result.baseline_log, out_dir / "baseline.jsonl")
    _log_to_jsonl(result.adaptive_log, out_dir / "adaptive.jsonl")
    baseline_failures = result.baseline_failures()
    adaptations = result.adaptation_entries()
    print(f"baseline failures: {len(baseline_failures)}"
          + (f" (first at t={baseline_failures[0].t})" if baseline_failures else ""))
    if adaptations:
        first = adaptations[0]
        print(
            f"adaptation at t={first.t}: sank {first.outcome.avoided}, "
            f"directive {first.directive.kind}"
        )
    else:
        print("no adaptation triggered")
    leftover = result.failures_after_adaptation_in_episode()
    print(f"failures after adaptation within its episode: {len(leftover)}")
    return 0


def cmd_bench(args) -> int:
    n_list = [int(x) for x in args.n.split(",")]
    rows = experiments.run_bench(
        n_list, horizon=args.horizon, density=args.density,
        seed=args.seed if args.seed is not None else 0,
    )
    out = Path(args.out or "bench.csv")
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(experiments.BENCH_CSV_HEADER)
        for row in rows:
            writer.writerow([row["n"], row["states"], row["transitions"],
                             f"{row['ms']:.3f}"])
    for row in rows:
        print(f"n={row['n']:>4} states={row['states']:>4} "
              f"transitions={row['transitions']:>7} ms={row['ms']:.3f}")
    return 0


def cmd_export_prism(args) -> int:
    scg = load_scg(args.scg)
    properties = _load_properties(args.properties)
    out_dir = Path(args.out or "prism-out")
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "model.pm").write_text(export_model(scg, args.situation))
    (out_dir / "props.pctl").write_text(export_properties(properties))
    print(f"wrote {out_dir / 'model.pm'} and {out_dir / 'props.pctl'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oddsafe",
        description="Situation-grid verification and safe controller adaptation",
    )
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--out", default=None, help="output file or directory")
    parser.add_argument(
        "--format", choices=("csv", "json", "table"), default="table"
    )
    parser.add_argument("--max-removals", type=int, default=None, dest="max_removals")
    parser.add_argument(
        "--estimator", choices=("frequentist", "bayesian"), default=None
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="verify an SCG against properties")
    p.add_argument("scg")
    p.add_argument("properties")
    p.add_argument("--situation", default=None)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("experiment-rq1", help="drift-variant adaptation outcomes")
    p.add_argument("config", nargs="?", default=None)
    p.set_defaults(func=cmd_experiment_rq1)

    p = sub.add_parser("experiment-rq2", help="baseline vs adaptive timeline")
    p.add_argument("config", nargs="?", default=None)
    p.set_defaults(func=cmd_experiment_rq2)

    p = sub.add_parser("bench", help="criticality-scoring scalability ladder")
    p.add_argument("--n", default="10,20,40,80,160")
    p.add_argument("--horizon", type=int, default=50)
    p.add_argument("--density", type=float, default=1.0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("export-prism", help="emit PRISM model and property files")
    p.add_argument("scg")
    p.add_argument("situation")
    p.add_argument("properties")
    p.set_defaults(func=cmd_export_prism)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OddsafeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
