"""Synthetic data corpus for demonstrations and end-to-end testing.

Real indicator data is proprietary, so this module fabricates a corpus
with the same file layout: per-country indicator CSVs, a business-cycle
calendar, and a ready-to-run config. A persistent +1/-1 direction
process drives both the next month's yield move and, contemporaneously,
the month-on-month change of three "leading" indicators, so the change
features of those indicators carry a shared learnable signal in every
country. All remaining indicators are uninformative random walks.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .ingest import ASG_CODES
from .months import format_month, parse_month

SIGNAL_CODES = ("MP1", "I2", "FF1")
DEFAULT_COUNTRIES = ("UK", "GRM", "JPN", "AUS", "CND")


def _derive_rng(seed: int, *parts) -> np.random.Generator:
    from .classifiers import derive_seed

    return np.random.default_rng(derive_seed(seed, "synthetic", *parts))


def _direction_process(rng: np.random.Generator, n: int, persistence: float) -> np.ndarray:
    d = np.empty(n, dtype=int)
    d[0] = 1 if rng.random() < 0.5 else -1
    flips = rng.random(n - 1) >= persistence
    for t in range(1, n):
        d[t] = -d[t - 1] if flips[t - 1] else d[t - 1]
    return d


def _write_series(path: Path, start: int, values: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["month", "value"])
        for i, v in enumerate(values):
            writer.writerow([format_month(start + i), repr(float(v))])


def _write_calendar(path: Path, events: list[tuple[int, str]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["month", "kind"])
        for month, kind in events:
            writer.writerow([format_month(month), kind])


def _calendar_events(
    rng: np.random.Generator, start: int, n_months: int, n_cycles: int
) -> list[tuple[int, str]]:
    events = []
    pos = start + 20 + int(rng.integers(0, 8))
    for _ in range(n_cycles):
        events.append((pos, "trough"))
        pos += 100 + int(rng.integers(-8, 9))  # expansion
        events.append((pos, "peak"))
        pos += 24 + int(rng.integers(-4, 5))  # recession
    events.append((pos, "trough"))
    if pos >= start + n_months:
        raise ValueError(
            f"{n_months} months cannot hold {n_cycles} cycles; increase n_months"
        )
    return events


def generate_country(
    directory: Path,
    country: str,
    start: int,
    n_months: int,
    n_cycles: int,
    seed: int,
    persistence: float = 0.75,
    noise: float = 0.8,
) -> None:
    """Write one country's indicator files and cycle calendar."""
    rng = _derive_rng(seed, country)
    d = _direction_process(rng, n_months, persistence)

    # 5Y yield: next month's move follows the direction process, so the
    # label at month t equals d[t]. Steps never vanish, so no flat
    # months are dropped.
    steps = rng.uniform(0.02, 0.25, size=n_months - 1)
    yield_series = np.empty(n_months)
    yield_series[0] = 5.0
    yield_series[1:] = 5.0 + np.cumsum(d[:-1] * steps)

    series: dict[str, np.ndarray] = {"MP4": yield_series}
    for code in ASG_CODES:
        if code == "MP4":
            continue
        code_rng = _derive_rng(seed, country, code)
        if code in SIGNAL_CODES:
            # Leading indicator: its monthly change carries the direction
            # of the upcoming yield move, plus noise.
            changes = d[1:] + noise * code_rng.normal(size=n_months - 1)
            values = 100.0 + np.concatenate([[0.0], np.cumsum(changes)])
        else:
            values = 100.0 + np.cumsum(code_rng.normal(size=n_months))
        series[code] = values

    for code, values in series.items():
        _write_series(directory / f"{country}_{code}.csv", start, values)
    _write_calendar(
        directory / f"{country}_cycles.csv",
        _calendar_events(rng, start, n_months, n_cycles),
    )


def generate_corpus(
    directory: str | Path,
    countries: tuple[str, ...] = DEFAULT_COUNTRIES,
    target_country: str = "US",
    n_months: int = 450,
    n_cycles: int = 3,
    seed: int = 0,
    start_month: str = "1980-01",
) -> Path:
    """Write a full corpus plus a runnable ``config.yaml``; returns the config path."""
    directory = Path(directory)
    data_dir = directory / "data"
    data_dir.mkdir(parents=True, exist_ok=True)
    start = parse_month(start_month)
    for country in list(countries) + [target_country]:
        generate_country(data_dir, country, start, n_months, n_cycles, seed)

    end = start + n_months - 1
    config_path = directory / "config.yaml"
    lines = [
        "data_dir: data",
        f"countries: [{', '.join(countries)}]",
        f"target_country: {target_country}",
        "date_range:",
        f"  start: {format_month(start)}",
        f"  end: {format_month(end)}",
        "cv:",
        "  k: 5",
        f"  seed: {seed}",
        "  mode: stratified",
        "threshold: 0.75",
        "feature_preset: full",
        "output_dir: out",
    ]
    config_path.write_text("\n".join(lines) + "\n")
    return config_path
