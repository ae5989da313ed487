"""Command-line entry point.

Subcommands: transform, partition, run, sweep-savgol, ttest, correlate,
importance, make-synthetic. Exit codes: 0 success, 1 data/validation
error, 2 internal error.
"""

from __future__ import annotations

import argparse
import csv
import sys
import traceback
from pathlib import Path

import numpy as np

from .asg import TRACE_COLUMNS, asg_transform
from .config import Config, load_config
from .cycles import load_calendar_csv, partition_months
from .errors import ConfigError, DataError, YieldsignError
from .ingest import codes_for_preset, load_indicator_csv
from .months import format_month
from .pipeline import (
    prepare_country,
    run_pipeline,
    savgol_sweep,
    write_importance_outputs,
    write_run_outputs,
)
from .stats import correlation_report, cycle_hypothesis_matrix
from .synthetic import DEFAULT_COUNTRIES, generate_corpus

EXIT_OK = 0
EXIT_DATA = 1
EXIT_INTERNAL = 2


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="yieldsign",
        description="Monthly 5Y bond yield direction prediction pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str, needs_config: bool = True):
        cmd = sub.add_parser(name, help=help_text)
        if needs_config:
            cmd.add_argument("--config", required=True, help="path to the YAML config")
            cmd.add_argument("--jobs", type=int, default=1, help="parallel worker cap")
            cmd.add_argument("--seed", type=int, default=None, help="override cv.seed")
        return cmd

    add("transform", "write per-indicator stage-trace CSVs")
    add("partition", "write per-country mentality-cycle partitions")
    add("run", "run the full pipeline and write the report and tables")

    sweep = add("sweep-savgol", "cross-validation sweep over smoothing parameters")
    sweep.add_argument("--windows", type=_int_list, default=[3, 5, 7, 13])
    sweep.add_argument("--orders", type=_int_list, default=[2, 3])
    sweep.add_argument("--country", default=None, help="country to sweep (default: first)")

    add("ttest", "cross-cycle paired t-test matrix from a fresh level-1 build")
    add("correlate", "level-vs-change correlation screen per indicator")
    add("importance", "per-cycle feature-importance tables")

    synth = add("make-synthetic", "generate a synthetic corpus and config", needs_config=False)
    synth.add_argument("--out", required=True, help="directory for the corpus")
    synth.add_argument("--months", type=int, default=450)
    synth.add_argument("--cycles", type=int, default=3)
    synth.add_argument("--seed", type=int, default=0)
    return parser


def cmd_transform(config: Config) -> int:
    config.output_dir.mkdir(parents=True, exist_ok=True)
    codes = [c for c in codes_for_preset(config.feature_preset)]
    for country in sorted(set(config.countries) | {config.target_country}):
        for code in codes:
            path = config.data_dir / f"{country}_{code}.csv"
            series = load_indicator_csv(path, country, code).clip(config.start, config.end)
            pair = asg_transform(series, config.asg)
            out = config.output_dir / f"{country}_{code}_trace.csv"
            with open(out, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(("feature",) + TRACE_COLUMNS)
                for label, trace in (("L", pair.level), ("C", pair.change)):
                    for i, month in enumerate(trace.months):
                        writer.writerow(
                            [
                                label,
                                format_month(month),
                                repr(float(trace.s1[i])),
                                repr(float(trace.ex_out[i])),
                                repr(float(trace.s2[i])),
                                repr(float(trace.s3[i])),
                                int(trace.ds3[i]),
                                repr(float(trace.final[i])),
                            ]
                        )
            print(f"wrote {out}")
    return EXIT_OK


def cmd_partition(config: Config) -> int:
    config.output_dir.mkdir(parents=True, exist_ok=True)
    for country in sorted(set(config.countries) | {config.target_country}):
        calendar = load_calendar_csv(config.data_dir / f"{country}_cycles.csv", country)
        partition = partition_months(calendar, config.start, config.end)
        out = config.output_dir / f"{country}_partition.csv"
        partition.to_csv(out)
        print(f"wrote {out}")
    return EXIT_OK


def cmd_run(config: Config, jobs: int) -> int:
    result = run_pipeline(config, jobs=jobs)
    written = write_run_outputs(result, config)
    for path in written:
        print(f"wrote {path}")
    print(f"overall hit rate: {result.report.overall_hit_rate:.4f}")
    return EXIT_OK


def cmd_sweep_savgol(config: Config, country: str | None, windows, orders) -> int:
    country = country or sorted(config.countries)[0]
    if country not in config.countries and country != config.target_country:
        raise ConfigError(f"sweep country {country!r} is not in the config")
    rows, notes = savgol_sweep(config, country, windows, orders)
    for note in notes:
        print(f"note: {note}", file=sys.stderr)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    out = config.output_dir / "savgol_sweep.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sg_window", "sg_order", "country", "cycle", "kind", "mean_hit_rate"])
        for row in rows:
            writer.writerow(
                [
                    row["sg_window"],
                    row["sg_order"],
                    row["country"],
                    row["cycle"],
                    row["kind"],
                    f"{row['mean_hit_rate']:.6f}",
                ]
            )
    print(f"wrote {out}")
    return EXIT_OK


def cmd_ttest(config: Config, jobs: int) -> int:
    result = run_pipeline(config, jobs=jobs)
    complete = {
        country: matrix
        for country, matrix in result.test_matrices.items()
        if matrix.size and not np.isnan(matrix).any()
    }
    if len(complete) < 2:
        raise DataError("ttest needs complete 3x3 test matrices from at least 2 countries")
    matrix = cycle_hypothesis_matrix(complete)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    out = config.output_dir / "table3.csv"
    matrix.to_csv(out)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_correlate(config: Config) -> int:
    from .asg import align_feature_pair

    config.output_dir.mkdir(parents=True, exist_ok=True)
    codes = codes_for_preset(config.feature_preset)
    for country in sorted(set(config.countries) | {config.target_country}):
        pairs = {}
        for code in codes:
            path = config.data_dir / f"{country}_{code}.csv"
            series = load_indicator_csv(path, country, code).clip(config.start, config.end)
            level, change = align_feature_pair(asg_transform(series, config.asg))
            pairs[code] = (level, change)
        report = correlation_report(pairs)
        out = config.output_dir / f"{country}_table1.csv"
        report.to_csv(out)
        print(f"wrote {out}")
    return EXIT_OK


def cmd_importance(config: Config) -> int:
    written = write_importance_outputs(config, config.output_dir)
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_make_synthetic(out: str, months: int, cycles: int, seed: int) -> int:
    config_path = generate_corpus(
        Path(out),
        countries=DEFAULT_COUNTRIES,
        target_country="US",
        n_months=months,
        n_cycles=cycles,
        seed=seed,
    )
    print(f"wrote corpus under {Path(out)}; config at {config_path}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "make-synthetic":
            return cmd_make_synthetic(args.out, args.months, args.cycles, args.seed)
        config = load_config(args.config, seed_override=args.seed)
        if args.command == "transform":
            return cmd_transform(config)
        if args.command == "partition":
            return cmd_partition(config)
        if args.command == "run":
            return cmd_run(config, args.jobs)
        if args.command == "sweep-savgol":
            return cmd_sweep_savgol(config, args.country, args.windows, args.orders)
        if args.command == "ttest":
            return cmd_ttest(config, args.jobs)
        if args.command == "correlate":
            return cmd_correlate(config)
        if args.command == "importance":
            return cmd_importance(config)
        parser.error(f"unknown command {args.command}")
    except (DataError, ConfigError, YieldsignError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
