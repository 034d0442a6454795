"""Synthetic review data for tests, demos and benchmarks."""

from __future__ import annotations

import random
from pathlib import Path
from typing import Iterable

from .analytics import Month
from .ingest import ReviewRecord

FIG1_ORDER = [("u1", "p1"), ("u2", "p1"), ("u1", "p2"), ("u3", "p1"), ("u4", "p2"), ("u5", "p3"), ("u4", "p3")]


def fig1_reviews(start: Month = Month(2009, 5), rating: int = 5) -> list[ReviewRecord]:
    """The 7-review influence example, one review per day."""
    return [
        ReviewRecord(u, p, 0, 0, rating, start.start + i * 86400)
        for i, (u, p) in enumerate(FIG1_ORDER)
    ]


def lagged_reviews(
    lag: int,
    start: Month = Month(2009, 1),
    n_months: int = 22,
    seed: int = 0,
    window: int = 12,
) -> list[ReviewRecord]:
    """Reviews whose monthly sales proxy lags the SPS increments by ``lag``.

    Every review sits on its own product, so centrality is zero
    everywhere.  A "scoring" review (5 stars, 1 of 1 helpful) adds exactly
    2 to SPS; a "neutral" review (3 stars) adds 0 but still counts as a
    sale.  With ``a[m]`` scoring and ``b[m]`` neutral reviews in month m,
    choosing ``b[m + lag] = 20 + a[m] - a[m + lag]`` makes
    ``sales[m + lag] = a[m] + 20`` for every month m of the first
    ``window`` months, a perfect linear relation at offset ``lag``.
    """
    rng = random.Random(seed)
    scoring = [rng.randint(1, 10) for _ in range(n_months)]
    neutral = [rng.randint(0, 10) for _ in range(n_months)]
    for m in range(min(window, n_months - lag)):
        neutral[m + lag] = 20 + scoring[m] - scoring[m + lag]
    out = []
    k = 0
    for m in range(n_months):
        base = start.shift(m).start
        for j in range(scoring[m] + neutral[m]):
            is_scoring = j < scoring[m]
            out.append(
                ReviewRecord(
                    reviewer_id=f"c{k % 97}",
                    product_id=f"P{k:06d}",
                    helpful_yes=1 if is_scoring else 0,
                    helpful_total=1 if is_scoring else 0,
                    rating=5 if is_scoring else 3,
                    timestamp=base + 3600 * (j + 1),
                )
            )
            k += 1
    return out


def random_reviews(
    n: int,
    n_products: int = 2000,
    n_customers: int = 50_000,
    start: Month = Month(2005, 1),
    n_months: int = 72,
    seed: int = 0,
) -> list[ReviewRecord]:
    """Random reviews with a heavy-tailed product popularity."""
    rng = random.Random(seed)
    t0 = start.start
    span = start.shift(n_months).start - t0
    weights = [1.0 / (i + 1) for i in range(n_products)]
    products = rng.choices(range(n_products), weights=weights, k=n)
    out = []
    for p in products:
        total = rng.choice((0, 0, 0, rng.randint(1, 40)))
        out.append(
            ReviewRecord(
                reviewer_id=f"A{rng.randrange(n_customers):07d}",
                product_id=f"B{p:07d}",
                helpful_yes=rng.randint(0, total),
                helpful_total=total,
                rating=rng.choices((1, 2, 3, 4, 5), weights=(1, 1, 2, 4, 8))[0],
                timestamp=t0 + rng.randrange(span),
            )
        )
    return out


def write_dataset(
    directory: str | Path,
    records: Iterable[ReviewRecord],
    brand: str = "Acme",
    name: str = "reviews.json",
) -> tuple[Path, Path]:
    """Write reviews as JSON lines plus a catalog mapping every product to ``brand``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    records = list(records)
    reviews = directory / name
    reviews.write_text("".join(r.to_json() + "\n" for r in records), encoding="utf-8")
    catalog = directory / "catalog.csv"
    products = sorted({r.product_id for r in records})
    catalog.write_text("product_id,brand\n" + "".join(f"{p},{brand}\n" for p in products), encoding="utf-8")
    return reviews, catalog
