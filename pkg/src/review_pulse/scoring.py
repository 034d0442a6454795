"""Per-review scores, the Social Promoter Score and its NPS-style baseline.

Each review contributes one term to SPS::

    (D + x) * (x / y) * R     if the review has helpfulness votes (y > 0)
    D * R                     otherwise

with ``D`` the normalized centrality, ``x``/``y`` the helpful/total votes
and ``R`` the rating scaled to -2..+2.  The baseline (SPS-R) is percent
promoters minus percent detractors over a period.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ingest import ReviewRecord, ValidationError
from .network import CentralityScore, ReviewNetwork, ReviewRef, snapshot_centralities

DEFAULT_PROMOTER_FLOOR = 1
DEFAULT_DETRACTOR_CEILING = -1

SentimentFn = Callable[[ReviewRecord], int]


class ConfigurationError(ValueError):
    pass


class ReviewClass(str, enum.Enum):
    PROMOTER = "promoter"
    PASSIVE = "passive"
    DETRACTOR = "detractor"


def scale_rating(rating: int) -> int:
    """Map a 1..5 star rating onto the -2..+2 sentiment scale."""
    if isinstance(rating, bool) or rating not in (1, 2, 3, 4, 5):
        raise ValidationError(f"rating out of range: {rating}")
    return rating - 3


def helpfulness_score(helpful_yes: int, helpful_total: int) -> float | None:
    """Fraction of helpful votes; ``None`` when nobody voted."""
    if helpful_yes < 0 or helpful_yes > helpful_total:
        raise ValidationError(f"invalid helpful votes ({helpful_yes}, {helpful_total})")
    if helpful_total == 0:
        return None
    return helpful_yes / helpful_total


def loyalty_score(sentiment: int, helpfulness: float | None) -> float:
    if helpfulness is None:
        return float(sentiment)
    return helpfulness * sentiment


@dataclass(frozen=True)
class ReviewTerm:
    review: ReviewRef
    reviewer_id: str
    timestamp: int
    sentiment: int
    helpful_yes: int
    helpful_total: int
    helpfulness: float | None
    loyalty: float
    centrality: CentralityScore
    contribution: float


@dataclass(frozen=True)
class SpsResult:
    value: float
    snapshot_time: int
    normalization: str
    brand_max: int
    terms: tuple[ReviewTerm, ...] | None = None


def _sentiments(net: ReviewNetwork, sentiment: SentimentFn | None) -> np.ndarray:
    if sentiment is None:
        return net._arrays["rating"] - 3
    values = []
    for ref in net.refs():
        s = sentiment(net.entry(ref).record)
        if s not in (-2, -1, 0, 1, 2):
            raise ValidationError(f"sentiment out of range: {s}")
        values.append(s)
    return np.asarray(values, dtype=np.int64)


def compute_sps(
    net: ReviewNetwork,
    snapshot_time: int,
    *,
    normalization: str = "snapshot",
    breakdown: bool = True,
    sentiment: SentimentFn | None = None,
) -> SpsResult:
    """SPS of ``net`` over reviews with timestamp <= ``snapshot_time``.

    Helpfulness availability is decided per review.  ``sentiment`` replaces
    the rating-derived score with a caller-supplied value in -2..+2.
    Terms are summed with ``math.fsum`` in network order, so the result
    does not depend on input order.
    """
    mask, raw, brand_max = snapshot_centralities(net, snapshot_time, normalization)
    a = net._arrays
    r = _sentiments(net, sentiment)[mask].astype(np.float64)
    x = a["helpful_yes"][mask].astype(np.float64)
    y = a["helpful_total"][mask].astype(np.float64)
    d = raw / brand_max if brand_max > 0 else np.zeros(len(raw))
    voted = y > 0
    h = np.divide(x, y, out=np.zeros_like(x), where=voted)
    terms = np.where(voted, (d + x) * h * r, d * r)
    value = math.fsum(terms.tolist())
    if not breakdown:
        return SpsResult(value, snapshot_time, normalization, brand_max)

    breakdown_terms = []
    product_ids = a["product_ids"]
    columns = zip(
        a["prod_idx"][mask].tolist(),
        a["pos"][mask].tolist(),
        r.astype(np.int64).tolist(),
        a["helpful_yes"][mask].tolist(),
        a["helpful_total"][mask].tolist(),
        raw.tolist(),
        d.tolist(),
        terms.tolist(),
    )
    for p, i, sent, yes, total, raw_d, norm_d, term in columns:
        pid = product_ids[p]
        entry = net.products[pid][i]
        help_ = yes / total if total else None
        breakdown_terms.append(
            ReviewTerm(
                review=ReviewRef(pid, i),
                reviewer_id=entry.reviewer_id,
                timestamp=entry.timestamp,
                sentiment=sent,
                helpful_yes=yes,
                helpful_total=total,
                helpfulness=help_,
                loyalty=loyalty_score(sent, help_),
                centrality=CentralityScore(raw_d, norm_d),
                contribution=term,
            )
        )
    return SpsResult(value, snapshot_time, normalization, brand_max, tuple(breakdown_terms))


def _check_bounds(promoter_floor: int, detractor_ceiling: int) -> None:
    if detractor_ceiling >= promoter_floor:
        raise ConfigurationError(
            f"detractor ceiling {detractor_ceiling} must be below promoter floor {promoter_floor}"
        )


def classify_review(
    sentiment: int,
    promoter_floor: int = DEFAULT_PROMOTER_FLOOR,
    detractor_ceiling: int = DEFAULT_DETRACTOR_CEILING,
) -> ReviewClass:
    _check_bounds(promoter_floor, detractor_ceiling)
    if sentiment >= promoter_floor:
        return ReviewClass.PROMOTER
    if sentiment <= detractor_ceiling:
        return ReviewClass.DETRACTOR
    return ReviewClass.PASSIVE


@dataclass(frozen=True)
class PeriodTally:
    promoters: int
    passives: int
    detractors: int
    period: tuple[int, int]

    @property
    def total(self) -> int:
        return self.promoters + self.passives + self.detractors


@dataclass(frozen=True)
class SpsRResult:
    value: float | None  # None when the period has no reviews
    tally: PeriodTally

    @property
    def defined(self) -> bool:
        return self.value is not None


def sps_r_from_tally(tally: PeriodTally) -> float | None:
    if tally.total == 0:
        return None
    return 100.0 * (tally.promoters - tally.detractors) / tally.total


def compute_sps_r(
    net: ReviewNetwork,
    period: tuple[int, int],
    promoter_floor: int = DEFAULT_PROMOTER_FLOOR,
    detractor_ceiling: int = DEFAULT_DETRACTOR_CEILING,
    *,
    sentiment: SentimentFn | None = None,
) -> SpsRResult:
    """Baseline score over reviews with ``start <= timestamp < end``."""
    start, end = period
    if end <= start:
        raise ValueError(f"empty period [{start}, {end})")
    _check_bounds(promoter_floor, detractor_ceiling)
    ts = net._arrays["timestamp"]
    r = _sentiments(net, sentiment)[(ts >= start) & (ts < end)]
    promoters = int(np.count_nonzero(r >= promoter_floor))
    detractors = int(np.count_nonzero(r <= detractor_ceiling))
    tally = PeriodTally(promoters, len(r) - promoters - detractors, detractors, (start, end))
    return SpsRResult(sps_r_from_tally(tally), tally)
