"""Calendar-month arithmetic.

Months are represented as integers counting months since year 0
(``year * 12 + month - 1``), so consecutive calendar months differ by
exactly 1 and window arithmetic is plain integer arithmetic. The textual
form used in every CSV interface is ``YYYY-MM``.
"""

from __future__ import annotations

import re

from .errors import DataError

_MONTH_RE = re.compile(r"^(\d{4})-(\d{2})$")


def parse_month(text: str) -> int:
    """Parse ``YYYY-MM`` into a month index."""
    m = _MONTH_RE.match(text.strip())
    if not m:
        raise DataError(f"invalid month {text!r}, expected YYYY-MM")
    year, month = int(m.group(1)), int(m.group(2))
    if not 1 <= month <= 12:
        raise DataError(f"invalid month {text!r}, month component must be 01-12")
    return year * 12 + month - 1


def format_month(index: int) -> str:
    """Format a month index back to ``YYYY-MM``."""
    year, month = divmod(int(index), 12)
    return f"{year:04d}-{month + 1:02d}"


def month_of_year(index: int) -> int:
    """Calendar month number 1-12 of a month index."""
    return int(index) % 12 + 1


def month_range(start: int, end: int) -> range:
    """Inclusive range of month indices; empty when start > end."""
    return range(start, end + 1)
