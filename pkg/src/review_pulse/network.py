"""Per-brand temporal review network.

A brand's reviews form a customer/product bipartite graph.  Projecting it
onto customers and orienting each edge along time gives the influence
network: every earlier reviewer of a product points at every later one.
That projection has k(k-1)/2 edges per product, so it is never built for
scoring.  Each product keeps its reviews sorted by
``(timestamp, reviewer_id, seq)`` and the out-degree of a review is just
the number of entries after it that fall inside the snapshot.
"""

from __future__ import annotations

import bisect
import csv
import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, NamedTuple

import numpy as np

from .ingest import ReviewRecord

DEFAULT_EDGE_CAP = 10_000_000
NORMALIZATION_MODES = ("snapshot", "full")


class ReviewNotFound(KeyError):
    pass


class CapacityError(RuntimeError):
    pass


class ReviewRef(NamedTuple):
    """Position of a review inside its product's sorted list."""

    product_id: str
    index: int


@dataclass(frozen=True)
class ReviewEntry:
    reviewer_id: str
    timestamp: int
    seq: int
    record: ReviewRecord

    @property
    def sort_key(self) -> tuple[int, str, int]:
        return (self.timestamp, self.reviewer_id, self.seq)


@dataclass(frozen=True)
class CentralityScore:
    raw: int
    normalized: float


def _canonical_key(record: ReviewRecord):
    return (
        record.timestamp,
        record.reviewer_id,
        record.product_id,
        record.rating,
        record.helpful_yes,
        record.helpful_total,
        record.review_text or "",
        record.summary or "",
    )


@dataclass(frozen=True, eq=False)
class ReviewNetwork:
    brand: str
    products: dict[str, tuple[ReviewEntry, ...]]
    customers: frozenset[str]
    review_count: int
    _arrays: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        # flat arrays in (product_id, position) order, shared by all snapshot queries
        product_ids = list(self.products)
        lengths = np.array([len(self.products[p]) for p in product_ids], dtype=np.int64)
        n = int(lengths.sum()) if len(lengths) else 0
        prod_idx = np.repeat(np.arange(len(product_ids), dtype=np.int64), lengths)
        starts = np.concatenate(([0], np.cumsum(lengths)[:-1])) if len(lengths) else lengths
        pos = np.arange(n, dtype=np.int64) - np.repeat(starts, lengths)
        entries = [e for p in product_ids for e in self.products[p]]
        self._arrays.update(
            product_ids=product_ids,
            product_index={p: i for i, p in enumerate(product_ids)},
            lengths=lengths,
            prod_idx=prod_idx,
            pos=pos,
            timestamp=np.fromiter((e.timestamp for e in entries), np.int64, n),
            rating=np.fromiter((e.record.rating for e in entries), np.int64, n),
            helpful_yes=np.fromiter((e.record.helpful_yes for e in entries), np.int64, n),
            helpful_total=np.fromiter((e.record.helpful_total for e in entries), np.int64, n),
            product_times={p: [e.timestamp for e in self.products[p]] for p in product_ids},
        )

    def __eq__(self, other):
        if not isinstance(other, ReviewNetwork):
            return NotImplemented
        return (
            self.brand == other.brand
            and self.products == other.products
            and self.customers == other.customers
            and self.review_count == other.review_count
        )

    @property
    def n_products(self) -> int:
        return len(self.products)

    @property
    def n_customers(self) -> int:
        return len(self.customers)

    def entry(self, ref: ReviewRef) -> ReviewEntry:
        try:
            entries = self.products[ref.product_id]
        except KeyError:
            raise ReviewNotFound(f"product {ref.product_id!r} not in network") from None
        if not 0 <= ref.index < len(entries):
            raise ReviewNotFound(f"no review #{ref.index} on product {ref.product_id!r}")
        return entries[ref.index]

    def refs(self) -> Iterator[ReviewRef]:
        """All review references in scoring order."""
        for pid, entries in self.products.items():
            for i in range(len(entries)):
                yield ReviewRef(pid, i)

    def find(self, reviewer_id: str, product_id: str) -> list[ReviewRef]:
        entries = self.products.get(product_id, ())
        return [ReviewRef(product_id, i) for i, e in enumerate(entries) if e.reviewer_id == reviewer_id]

    def first_timestamp(self) -> int | None:
        ts = self._arrays["timestamp"]
        return int(ts.min()) if len(ts) else None

    def last_timestamp(self) -> int | None:
        ts = self._arrays["timestamp"]
        return int(ts.max()) if len(ts) else None

    def summary(self) -> dict:
        return {
            "brand": self.brand,
            "reviews": self.review_count,
            "customers": self.n_customers,
            "products": self.n_products,
        }


def build_network(records: Iterable[tuple[ReviewRecord, str]], brand: str) -> ReviewNetwork:
    """Build the review network of ``brand``.

    Records are canonically re-sequenced before sorting so that any input
    order of the same multiset gives the same network.  Repeat reviews of
    one product by one customer are all kept (parallel edges).
    """
    records = list(records)
    for record, rec_brand in records:
        if rec_brand != brand:
            raise ValueError(f"record for {record.product_id} resolved to {rec_brand!r}, not {brand!r}")
    ordered = sorted((r for r, _ in records), key=_canonical_key)
    by_product: dict[str, list[ReviewEntry]] = defaultdict(list)
    for seq, record in enumerate(ordered):
        by_product[record.product_id].append(
            ReviewEntry(record.reviewer_id, record.timestamp, seq, record)
        )
    products = {}
    for pid in sorted(by_product):
        products[pid] = tuple(sorted(by_product[pid], key=lambda e: e.sort_key))
    return ReviewNetwork(
        brand=brand,
        products=products,
        customers=frozenset(r.reviewer_id for r in ordered),
        review_count=len(ordered),
    )


def build_networks(pairs: Iterable[tuple[ReviewRecord, str | None]]) -> dict[str, ReviewNetwork]:
    """Group resolved records by brand; unresolved ones are dropped."""
    grouped: dict[str, list] = defaultdict(list)
    for record, brand in pairs:
        if brand is not None:
            grouped[brand].append((record, brand))
    return {b: build_network(grouped[b], b) for b in sorted(grouped)}


def _snapshot_size(net: ReviewNetwork, product_id: str, snapshot_time: int) -> int:
    return bisect.bisect_right(net._arrays["product_times"][product_id], snapshot_time)


def raw_centrality(net: ReviewNetwork, review: ReviewRef, snapshot_time: int) -> int:
    """Number of reviews on the same product after ``review`` within the snapshot."""
    entry = net.entry(review)
    if entry.timestamp > snapshot_time:
        raise ValueError(f"review at {entry.timestamp} is after snapshot {snapshot_time}")
    return _snapshot_size(net, review.product_id, snapshot_time) - review.index - 1


def brand_max_centrality(net: ReviewNetwork, snapshot_time: int | None = None) -> int:
    """Largest raw centrality in the snapshot (``None`` means the whole history).

    The first review of a product sees every later one, so the maximum is
    the largest per-product snapshot size minus one.
    """
    best = 0
    for pid, times in net._arrays["product_times"].items():
        k = len(times) if snapshot_time is None else bisect.bisect_right(times, snapshot_time)
        best = max(best, k - 1)
    return best


def normalized_centrality(
    net: ReviewNetwork,
    review: ReviewRef,
    snapshot_time: int,
    normalization: str = "snapshot",
) -> CentralityScore:
    raw = raw_centrality(net, review, snapshot_time)
    denom = brand_max_centrality(net, snapshot_time if normalization == "snapshot" else None)
    return CentralityScore(raw, raw / denom if denom > 0 else 0.0)


def snapshot_centralities(
    net: ReviewNetwork, snapshot_time: int, normalization: str = "snapshot"
) -> tuple[np.ndarray, np.ndarray, int]:
    """Vectorized raw centrality for every review in the snapshot.

    Returns ``(mask, raw, brand_max)`` where ``mask`` selects snapshot
    reviews from the network's flat order and ``raw`` is aligned with the
    selected reviews.
    """
    if normalization not in NORMALIZATION_MODES:
        raise ValueError(f"unknown normalization mode {normalization!r}")
    a = net._arrays
    mask = a["timestamp"] <= snapshot_time
    idx = a["prod_idx"][mask]
    counts = np.bincount(idx, minlength=len(a["lengths"]))
    raw = counts[idx] - a["pos"][mask] - 1
    if normalization == "full":
        brand_max = int(a["lengths"].max()) - 1 if len(a["lengths"]) else 0
    else:
        brand_max = int(counts.max()) - 1 if len(counts) and counts.max() > 0 else 0
    return mask, raw, max(brand_max, 0)


def projection_edge_count(net: ReviewNetwork, snapshot_time: int | None = None) -> int:
    total = 0
    for times in net._arrays["product_times"].values():
        k = len(times) if snapshot_time is None else bisect.bisect_right(times, snapshot_time)
        total += k * (k - 1) // 2
    return total


def export_projection(
    net: ReviewNetwork,
    snapshot_time: int | None = None,
    max_edges: int = DEFAULT_EDGE_CAP,
) -> list[tuple[str, str, str]]:
    """Directed influence edges ``(source, target, product_id)``.

    For inspection only; scoring never calls this.
    """
    count = projection_edge_count(net, snapshot_time)
    if count > max_edges:
        raise CapacityError(f"projection has {count} edges, cap is {max_edges}")
    edges = []
    for pid, entries in net.products.items():
        k = len(entries) if snapshot_time is None else _snapshot_size(net, pid, snapshot_time)
        for i in range(k):
            for j in range(i + 1, k):
                edges.append((entries[i].reviewer_id, entries[j].reviewer_id, pid))
    return edges


def write_projection(edges: list[tuple[str, str, str]], fh: IO[str], fmt: str = "csv") -> None:
    if fmt == "csv":
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["source", "target", "product_id"])
        writer.writerows(edges)
    elif fmt in ("json", "jsonl"):
        for s, t, p in edges:
            fh.write(json.dumps({"source": s, "target": t, "product_id": p}) + "\n")
    else:
        raise ValueError(f"unknown edge format {fmt!r}")
