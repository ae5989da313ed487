"""Mentality-cycle partitioning of calendar months.

A business-cycle calendar (alternating peak/trough dates) is mapped to
three investor-mentality regimes:

* MC1, slow-down and decline: two months before a peak through two
  months after the following trough.
* MC2, recovery: the third month after a trough through the midpoint of
  the expansion (midpoint = ``ceil((peak - trough) / 2)`` months after
  the trough).
* MC3, restored confidence: the month after that midpoint through three
  months before the peak.

Windows are inclusive on both ends, adjacent by construction, and any
month outside every window stays unlabeled.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .errors import DataError
from .months import format_month, parse_month

CYCLE_LABELS = ("MC1", "MC2", "MC3")


@dataclass(frozen=True)
class BusinessCycleCalendar:
    """Dated peak/trough events for one country, strictly alternating."""

    country: str
    events: tuple[tuple[int, str], ...]

    def __post_init__(self):
        for month, kind in self.events:
            if kind not in ("peak", "trough"):
                raise DataError(f"calendar event kind must be peak/trough, got {kind!r}")
        for (m1, k1), (m2, k2) in zip(self.events, self.events[1:]):
            if m2 <= m1:
                raise DataError(
                    f"calendar events out of order at {format_month(m2)} "
                    f"(not after {format_month(m1)})"
                )
            if k1 == k2:
                raise DataError(
                    f"calendar must alternate peak/trough, got consecutive "
                    f"{k1}s at {format_month(m1)} and {format_month(m2)}"
                )


@dataclass
class CyclePartition:
    """Partial month -> MC1/MC2/MC3 map for one country."""

    country: str
    labels: dict[int, str]

    def label_of(self, month: int) -> str | None:
        return self.labels.get(month)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["month", "cycle"])
            for month in sorted(self.labels):
                writer.writerow([format_month(month), self.labels[month]])


def load_calendar_csv(path: str | Path, country: str) -> BusinessCycleCalendar:
    """Read a ``month,kind`` calendar file (kind in {peak, trough})."""
    path = Path(path)
    events = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["month", "kind"]:
            raise DataError(f"{path}: expected header 'month,kind', got {header}")
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise DataError(f"{path}:{row_no}: expected 2 columns, got {len(row)}")
            month = parse_month(row[0])
            kind = row[1].strip().lower()
            if kind not in ("peak", "trough"):
                raise DataError(f"{path}:{row_no}: kind must be peak or trough, got {row[1]!r}")
            events.append((month, kind))
    return BusinessCycleCalendar(country=country, events=tuple(events))


def _windows(calendar: BusinessCycleCalendar):
    """Yield (label, first_month, last_month) windows in chronological order."""
    events = calendar.events
    for (m1, k1), (m2, k2) in zip(events, events[1:]):
        if k1 == "trough" and k2 == "peak":
            trough, peak = m1, m2
            midpoint = trough + -(-(peak - trough) // 2)  # ceil division
            yield "MC2", trough + 3, midpoint
            yield "MC3", midpoint + 1, peak - 3
        else:
            peak, trough = m1, m2
            yield "MC1", peak - 2, trough + 2


def partition_months(
    calendar: BusinessCycleCalendar, start: int, end: int
) -> CyclePartition:
    """Label every month of ``[start, end]`` covered by a cycle window.

    Requires at least one trough followed by a peak. Degenerate windows
    (a segment shorter than its boundary offsets) are simply empty; with
    extremely short segments a later window is clipped so it never
    relabels a month an earlier window claimed.
    """
    if end < start:
        raise DataError("empty month range")
    kinds = [k for _, k in calendar.events]
    if "trough" not in kinds or "peak" not in kinds[kinds.index("trough") :]:
        raise DataError(
            f"{calendar.country}: calendar needs at least one trough followed by a peak"
        )
    labels: dict[int, str] = {}
    last_assigned = None
    for label, first, last in _windows(calendar):
        if last_assigned is not None:
            first = max(first, last_assigned + 1)
        for month in range(max(first, start), min(last, end) + 1):
            labels[month] = label
        if last >= first:
            last_assigned = last if last_assigned is None else max(last_assigned, last)
    return CyclePartition(country=calendar.country, labels=labels)
