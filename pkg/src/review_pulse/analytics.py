"""Monthly series, lagged Pearson correlation and duration-effect runs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .network import ReviewNetwork
from .scoring import (
    DEFAULT_DETRACTOR_CEILING,
    DEFAULT_PROMOTER_FLOOR,
    compute_sps,
    compute_sps_r,
)

DEFAULT_OFFSETS = tuple(range(1, 11))
LONG_RUN = 4


class Month(NamedTuple):
    """A calendar month in UTC."""

    year: int
    month: int

    @classmethod
    def parse(cls, text: str) -> "Month":
        try:
            year, month = text.strip().split("-")
            m = cls(int(year), int(month))
        except ValueError:
            raise ValueError(f"expected YYYY-MM, got {text!r}") from None
        if not 1 <= m.month <= 12:
            raise ValueError(f"expected YYYY-MM, got {text!r}")
        return m

    @classmethod
    def of(cls, timestamp: int) -> "Month":
        dt = datetime.fromtimestamp(timestamp, tz=timezone.utc)
        return cls(dt.year, dt.month)

    def shift(self, months: int) -> "Month":
        k = self.year * 12 + (self.month - 1) + months
        return Month(k // 12, k % 12 + 1)

    @property
    def start(self) -> int:
        return int(datetime(self.year, self.month, 1, tzinfo=timezone.utc).timestamp())

    @property
    def end(self) -> int:
        """Exclusive upper bound (start of the next month)."""
        return self.shift(1).start

    def __str__(self) -> str:
        return f"{self.year:04d}-{self.month:02d}"


def month_range(first: Month, last: Month) -> list[Month]:
    """Inclusive list of consecutive months."""
    n = (last.year * 12 + last.month) - (first.year * 12 + first.month)
    if n < 0:
        raise ValueError(f"{first} is after {last}")
    return [first.shift(i) for i in range(n + 1)]


def network_months(net: ReviewNetwork) -> list[Month]:
    first, last = net.first_timestamp(), net.last_timestamp()
    if first is None:
        return []
    return month_range(Month.of(first), Month.of(last))


def _check_months(months: Sequence[Month]) -> None:
    if not months:
        raise ValueError("months must be non-empty")
    for a, b in zip(months, months[1:]):
        if a.shift(1) != b:
            raise ValueError(f"months not consecutive: {a} -> {b}")


def sales_proxy_series(net: ReviewNetwork, months: Sequence[Month]) -> list[int]:
    """New-review count per month across all products of the brand."""
    _check_months(months)
    ts = np.sort(net._arrays["timestamp"])
    edges = [m.start for m in months] + [months[-1].end]
    cuts = np.searchsorted(ts, edges, side="left")
    return np.diff(cuts).astype(int).tolist()


def sps_snapshot_series(
    net: ReviewNetwork, months: Sequence[Month], normalization: str = "snapshot"
) -> list[float]:
    """SPS at the last second of each month."""
    _check_months(months)
    return [compute_sps(net, m.end - 1, normalization=normalization, breakdown=False).value for m in months]


def sps_increment_series(
    net: ReviewNetwork, months: Sequence[Month], normalization: str = "snapshot"
) -> list[float]:
    """Month-over-month change of SPS.

    The first increment is taken against the snapshot just before the first
    month, which is 0 when no earlier reviews exist.
    """
    _check_months(months)
    base = compute_sps(net, months[0].start - 1, normalization=normalization, breakdown=False).value
    snaps = sps_snapshot_series(net, months, normalization)
    prev = [base] + snaps[:-1]
    return [s - p for s, p in zip(snaps, prev)]


def sps_r_series(
    net: ReviewNetwork,
    months: Sequence[Month],
    promoter_floor: int = DEFAULT_PROMOTER_FLOOR,
    detractor_ceiling: int = DEFAULT_DETRACTOR_CEILING,
) -> list[float | None]:
    _check_months(months)
    return [
        compute_sps_r(net, (m.start, m.end), promoter_floor, detractor_ceiling).value
        for m in months
    ]


@dataclass
class BrandSeries:
    brand: str
    months: list[Month]
    sps_snapshot: list[float]
    sps_increment: list[float]
    sps_r: list[float | None]
    sales_proxy: list[int]
    normalization: str = "snapshot"

    def rows(self) -> Iterable[tuple]:
        return zip(self.months, self.sps_snapshot, self.sps_increment, self.sps_r, self.sales_proxy)


def brand_series(
    net: ReviewNetwork,
    months: Sequence[Month],
    *,
    normalization: str = "snapshot",
    promoter_floor: int = DEFAULT_PROMOTER_FLOOR,
    detractor_ceiling: int = DEFAULT_DETRACTOR_CEILING,
) -> BrandSeries:
    _check_months(months)
    base = compute_sps(net, months[0].start - 1, normalization=normalization, breakdown=False).value
    snaps = sps_snapshot_series(net, months, normalization)
    increments = [s - p for s, p in zip(snaps, [base] + snaps[:-1])]
    return BrandSeries(
        brand=net.brand,
        months=list(months),
        sps_snapshot=snaps,
        sps_increment=increments,
        sps_r=sps_r_series(net, months, promoter_floor, detractor_ceiling),
        sales_proxy=sales_proxy_series(net, months),
        normalization=normalization,
    )


def pearson(x: Sequence[float], y: Sequence[float]) -> float | None:
    """Product-moment correlation, two-pass; ``None`` if either side is constant."""
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise ValueError("need at least two points")
    # exact constancy check; a float mean can leave spurious residuals
    if min(x) == max(x) or min(y) == max(y):
        return None
    n = len(x)
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    dx = [v - mx for v in x]
    dy = [v - my for v in y]
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    sxx = math.fsum(a * a for a in dx)
    syy = math.fsum(b * b for b in dy)
    if sxx == 0.0 or syy == 0.0:
        return None
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


@dataclass
class CorrelationReport:
    brand: str
    coefficients: dict[int, float | None]
    best_latency: int | None
    window: list[Month] = field(default_factory=list)


def latency_scan(
    increments: Sequence[float],
    sales: Sequence[float],
    offsets: Iterable[int] = DEFAULT_OFFSETS,
    *,
    brand: str = "",
    window: Sequence[Month] = (),
) -> CorrelationReport:
    """Correlate ``increments`` with ``sales`` shifted forward by each offset.

    ``sales[0]`` is aligned with ``increments[0]``; offset ``d`` pairs
    ``increments[i]`` with ``sales[i + d]``.  Offsets that run past the end
    of ``sales`` are undefined.
    """
    n = len(increments)
    coefficients: dict[int, float | None] = {}
    for d in offsets:
        if d < 0 or d + n > len(sales):
            coefficients[d] = None
        else:
            coefficients[d] = pearson(increments, sales[d : d + n])
    best = None
    for d in sorted(coefficients):
        c = coefficients[d]
        if c is not None and (best is None or c > coefficients[best]):
            best = d
    return CorrelationReport(brand, coefficients, best, list(window))


class DurationRun(NamedTuple):
    start: int  # 0-based index into the series
    length: int
    polarity: str  # "high" | "low"
    month: Month | None = None

    @property
    def duration(self) -> str:
        return "long" if self.length >= LONG_RUN else "short"


def detect_duration_effects(
    increments: Sequence[float],
    high_threshold: float | None = None,
    low_threshold: float | None = None,
    min_run: int = 2,
    months: Sequence[Month] | None = None,
) -> list[DurationRun]:
    """Maximal runs of consecutive high or low increments.

    Thresholds default to the 75th/25th percentiles of ``increments``.
    If the defaults coincide (no spread) there is nothing to report.
    """
    if min_run < 2:
        raise ValueError("min_run must be at least 2")
    if len(increments) == 0:
        return []
    explicit = high_threshold is not None and low_threshold is not None
    if high_threshold is None:
        high_threshold = float(np.percentile(increments, 75))
    if low_threshold is None:
        low_threshold = float(np.percentile(increments, 25))
    if high_threshold <= low_threshold:
        if explicit:
            raise ValueError("high_threshold must exceed low_threshold")
        return []

    def label(v: float) -> str | None:
        if v >= high_threshold:
            return "high"
        if v <= low_threshold:
            return "low"
        return None

    runs = []
    i, n = 0, len(increments)
    while i < n:
        pol = label(increments[i])
        j = i + 1
        while j < n and pol is not None and label(increments[j]) == pol:
            j += 1
        if pol is not None and j - i >= min_run:
            runs.append(DurationRun(i, j - i, pol, months[i] if months else None))
        i = j
    return runs
