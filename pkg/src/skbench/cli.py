"""Batch command-line front end.

Subcommands: generate | bench | fit | estimate | report. All outputs live
under --out-dir; a JSON config file provides defaults and flags win over it.
Runs are resumable (bench keeps a manifest) and deterministic for a fixed
master seed regardless of --jobs.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .analysis import (
    ResourceModel,
    ScalingFit,
    calibrate_toffoli_time,
    fit_power_law,
    time_estimate,
)
from .bench import (
    BenchConfig,
    ConfigError,
    box_stats,
    derive_instance,
    mean_steps_by_size,
    records_from_csv,
    run_suite,
)
from .model import instance_to_json, ratio_gap

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARTIAL = 3
EXIT_IO = 4

ESTIMATE_SIZES = (64, 128)


def _instance_path(out_dir: Path, n: int, index: int) -> Path:
    return out_dir / "instances" / f"inst_n{n:02d}_i{index:03d}.json"


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.replace(" ", "").split(",") if tok)


def load_config(args: argparse.Namespace) -> BenchConfig:
    data: dict = {}
    if args.config:
        data.update(json.loads(Path(args.config).read_text()))
    if args.seed is not None:
        data["master_seed"] = args.seed
    if args.sizes:
        data["sizes"] = _parse_int_list(args.sizes)
    if args.methods:
        data["methods"] = tuple(tok for tok in args.methods.replace(" ", "").split(",") if tok)
    known = BenchConfig.__dataclass_fields__.keys()
    unknown = set(data) - set(known)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "sizes" in data:
        data["sizes"] = tuple(data["sizes"])
    if "methods" in data:
        data["methods"] = tuple(data["methods"])
    return BenchConfig(**data)


def cmd_generate(config: BenchConfig, args: argparse.Namespace) -> int:
    out_dir = Path(args.out_dir)
    (out_dir / "instances").mkdir(parents=True, exist_ok=True)
    written = skipped = 0
    for n in config.sizes:
        for index in range(config.instances_per_size):
            path = _instance_path(out_dir, n, index)
            inst, _ = derive_instance(config.master_seed, n, index)
            payload = instance_to_json(inst) + "\n"
            if path.exists():
                if path.read_text() == payload:
                    skipped += 1
                    continue
                if not args.force:
                    print(
                        f"error: {path} exists with different content (use --force)",
                        file=sys.stderr,
                    )
                    return EXIT_IO
            path.write_text(payload)
            written += 1
    print(f"generate: wrote {written} instance files, {skipped} already present")
    return EXIT_OK


def cmd_bench(config: BenchConfig, args: argparse.Namespace) -> int:
    out_dir = Path(args.out_dir)
    missing = [
        str(_instance_path(out_dir, n, i))
        for n in config.sizes
        for i in range(config.instances_per_size)
        if not _instance_path(out_dir, n, i).exists()
    ]
    if missing:
        print(
            f"error: {len(missing)} instance files missing (run generate first), "
            f"first: {missing[0]}",
            file=sys.stderr,
        )
        return EXIT_IO
    records = run_suite(config, out_dir=out_dir, jobs=args.jobs, force=args.force)
    unresolved = sum(1 for r in records if r.status != "ok")
    print(
        f"bench: {len(records)} records ({unresolved} unresolved) -> "
        f"{out_dir / 'records.csv'}"
    )
    return EXIT_PARTIAL if unresolved else EXIT_OK


def _load_records(out_dir: Path):
    path = out_dir / "records.csv"
    if not path.exists():
        raise FileNotFoundError(f"{path} not found (run bench first)")
    return records_from_csv(path.read_text())


def fit_all(records) -> dict[str, ScalingFit]:
    fits = {}
    for method in sorted({r.method for r in records}):
        sizes, means = mean_steps_by_size(records, method)
        if len(sizes) < 3:
            raise ConfigError(
                f"method {method}: need >= 3 sizes with resolved records, got {len(sizes)}"
            )
        fits[method] = fit_power_law(sizes, means, method=method)
    return fits


def _fits_to_json(fits: dict[str, ScalingFit]) -> str:
    payload = [
        {
            "method": f.method,
            "b": f.b,
            "c": f.c,
            "residual": f.residual,
            "n_range": [min(p[0] for p in f.points), max(p[0] for p in f.points)],
        }
        for f in fits.values()
    ]
    return json.dumps(payload, indent=2, sort_keys=True)


def cmd_fit(config: BenchConfig, args: argparse.Namespace) -> int:
    out_dir = Path(args.out_dir)
    fits = fit_all(_load_records(out_dir))
    (out_dir / "fits.json").write_text(_fits_to_json(fits) + "\n")
    for fit in fits.values():
        print(
            f"fit: {fit.method:6s} steps = {fit.b:.3g} * 2^({fit.c:.3f} n)"
            f"  residual {fit.residual:.2e}"
        )
    print(f"fit: report -> {out_dir / 'fits.json'}")
    return EXIT_OK


def _fits_from_json(path: Path) -> dict[str, ScalingFit]:
    fits = {}
    for row in json.loads(path.read_text()):
        fits[row["method"]] = ScalingFit(
            method=row["method"],
            b=row["b"],
            c=row["c"],
            residual=row["residual"],
            points=(),
        )
    return fits


def estimate_table(fits: dict[str, ScalingFit], model: ResourceModel) -> list[tuple]:
    rows = []
    for method in fits:
        for n in ESTIMATE_SIZES:
            est = time_estimate(method, n, model, fit=fits[method])
            rows.append((method, n, est.days, est.galactic_years))
    return rows


def cmd_estimate(config: BenchConfig, args: argparse.Namespace) -> int:
    out_dir = Path(args.out_dir)
    fits_path = out_dir / "fits.json"
    if not fits_path.exists():
        print(f"error: {fits_path} not found (run fit first)", file=sys.stderr)
        return EXIT_IO
    fits = _fits_from_json(fits_path)
    model = ResourceModel()
    calibrate_toffoli_time(model)
    lines = ["method,n,days,galactic_years"]
    for method, n, days, gyears in estimate_table(fits, model):
        lines.append(f"{method},{n},{days!r},{gyears!r}")
    (out_dir / "estimates.csv").write_text("\n".join(lines) + "\n")
    print(f"estimate: {len(lines) - 1} rows -> {out_dir / 'estimates.csv'}")
    return EXIT_OK


def _series_csv(records, method: str) -> str:
    lines = ["n,mean,min,q1,median,q3,max,whisker_low,whisker_high,n_outliers"]
    by_n: dict[int, list[int]] = {}
    for rec in records:
        if rec.method == method and rec.status == "ok":
            by_n.setdefault(rec.n, []).append(rec.steps)
    for n in sorted(by_n):
        stats = box_stats(by_n[n])
        mean = float(np.mean(by_n[n]))
        lines.append(
            f"{n},{mean!r},{stats.minimum!r},{stats.q1!r},{stats.median!r},"
            f"{stats.q3!r},{stats.maximum!r},{stats.whisker_low!r},"
            f"{stats.whisker_high!r},{len(stats.outliers)}"
        )
    return "\n".join(lines) + "\n"


def ratio_gap_series(config: BenchConfig, max_n: int) -> list[dict]:
    rows = []
    sizes = sorted(set(config.sizes) | set(range(min(config.sizes), max_n + 1)))
    for n in sizes:
        ratios = []
        for index in range(config.instances_per_size):
            inst, spectrum = derive_instance(config.master_seed, n, index)
            ratios.append(ratio_gap(inst, spectrum))
        stats = box_stats(ratios)
        rows.append(
            {
                "n": n,
                "min": stats.minimum,
                "q1": stats.q1,
                "median": stats.median,
                "q3": stats.q3,
                "max": stats.maximum,
                "whisker_low": stats.whisker_low,
                "whisker_high": stats.whisker_high,
                "frac_at_most_alpha": float(np.mean(np.asarray(ratios) <= config.alpha)),
            }
        )
    return rows


def cmd_report(config: BenchConfig, args: argparse.Namespace) -> int:
    out_dir = Path(args.out_dir)
    records = _load_records(out_dir)
    report_dir = out_dir / "report"
    report_dir.mkdir(parents=True, exist_ok=True)

    methods = sorted({r.method for r in records})
    for method in methods:
        (report_dir / f"series_{method}.csv").write_text(_series_csv(records, method))

    fits = fit_all(records)
    (report_dir / "fits.json").write_text(_fits_to_json(fits) + "\n")

    model = ResourceModel()
    calibrate_toffoli_time(model)
    lines = ["method,n,days,galactic_years"]
    for method, n, days, gyears in estimate_table(fits, model):
        lines.append(f"{method},{n},{days!r},{gyears!r}")
    (report_dir / "estimates.csv").write_text("\n".join(lines) + "\n")

    ratio_rows = ratio_gap_series(config, args.ratio_max_n)
    header = list(ratio_rows[0].keys())
    lines = [",".join(header)]
    for row in ratio_rows:
        lines.append(",".join(repr(row[k]) if isinstance(row[k], float) else str(row[k]) for k in header))
    (report_dir / "ratio_gap.csv").write_text("\n".join(lines) + "\n")

    print(f"report: bundle -> {report_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skbench",
        description="Benchmark classical and quantum-simulated heuristics on "
        "Sherrington-Kirkpatrick instances.",
    )
    parser.add_argument("--config", help="JSON config file; flags override it")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--sizes", help="comma-separated spin counts, e.g. 8,9,10")
    parser.add_argument("--methods", help="comma-separated subset of BF,RS,MH,GAS,LHPST")
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--force", action="store_true", help="recompute/overwrite")
    parser.add_argument("--out-dir", default="runs/default")
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", help="write instance JSON files")
    sub.add_parser("bench", help="run the sweep, resumable")
    sub.add_parser("fit", help="fit steps = b * N^c per method")
    sub.add_parser("estimate", help="extrapolate wall-clock table")
    report = sub.add_parser("report", help="emit plot-data bundle")
    report.add_argument("--ratio-max-n", type=int, default=18)
    return parser


COMMANDS = {
    "generate": cmd_generate,
    "bench": cmd_bench,
    "fit": cmd_fit,
    "estimate": cmd_estimate,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level.upper(), logging.WARNING))
    try:
        config = load_config(args)
    except (ConfigError, ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](config, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
