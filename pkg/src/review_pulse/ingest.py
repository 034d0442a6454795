"""Parsing of newline-delimited review records and brand resolution.

Input lines follow the Amazon review dump layout::

    {"reviewerID": "A2SUAM1J3GNN3B", "asin": "0000013714",
     "helpful": [2, 3], "overall": 5.0, "unixReviewTime": 1252800000, ...}

Brands come from an external catalog (CSV ``product_id,brand``) with an
optional keyword section used as a fallback against the review text.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator

log = logging.getLogger(__name__)

KEYWORD_MARKER = "# keywords"
DEFAULT_MAX_ERRORS = 100


class ReviewDataError(ValueError):
    """Base class for problems with a single input record."""


class ParseError(ReviewDataError):
    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class ValidationError(ReviewDataError):
    pass


class FormatError(ValueError):
    """Malformed brand catalog."""


class IngestAborted(RuntimeError):
    """Raised when the error budget of a stream is exhausted."""


@dataclass(frozen=True)
class ReviewRecord:
    reviewer_id: str
    product_id: str
    helpful_yes: int
    helpful_total: int
    rating: int
    timestamp: int
    review_text: str | None = None
    summary: str | None = None

    def __post_init__(self):
        if not 0 <= self.helpful_yes <= self.helpful_total:
            raise ValidationError(
                f"helpful votes out of order: {self.helpful_yes} > {self.helpful_total}"
                if self.helpful_yes > self.helpful_total
                else f"negative helpful votes: {self.helpful_yes}"
            )
        if self.rating not in (1, 2, 3, 4, 5):
            raise ValidationError(f"rating out of range: {self.rating}")
        if self.timestamp <= 0:
            raise ValidationError(f"timestamp must be positive: {self.timestamp}")

    def to_json(self) -> str:
        """Serialize back to the input line layout."""
        obj = {
            "reviewerID": self.reviewer_id,
            "asin": self.product_id,
            "helpful": [self.helpful_yes, self.helpful_total],
            "overall": float(self.rating),
            "unixReviewTime": self.timestamp,
        }
        if self.review_text is not None:
            obj["reviewText"] = self.review_text
        if self.summary is not None:
            obj["summary"] = self.summary
        return json.dumps(obj, ensure_ascii=False)


def _require(obj: dict, key: str):
    try:
        return obj[key]
    except KeyError:
        raise ParseError(f"missing required field {key!r}", field=key) from None


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _identifier(obj: dict, key: str) -> str:
    value = _require(obj, key)
    if not isinstance(value, str) or not value:
        raise ParseError(f"field {key!r} must be a non-empty string", field=key)
    return value


def _optional_text(obj: dict, key: str) -> str | None:
    value = obj.get(key)
    if value is None:
        return None
    if not isinstance(value, str):
        raise ParseError(f"field {key!r} must be a string", field=key)
    return value


def parse_review_record(line: str | bytes) -> ReviewRecord:
    """Parse one JSON review line into a :class:`ReviewRecord`.

    Unknown fields are ignored.  ``overall`` may be written as a float
    (the dump uses ``5.0``) but must be integral; fractional ratings are
    rejected instead of rounded.
    """
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise ParseError("record is not a JSON object")

    reviewer_id = _identifier(obj, "reviewerID")
    product_id = _identifier(obj, "asin")

    helpful = _require(obj, "helpful")
    if (
        not isinstance(helpful, list)
        or len(helpful) != 2
        or not all(_is_int(v) for v in helpful)
    ):
        raise ParseError("field 'helpful' must be a two-element integer array", field="helpful")
    yes, total = helpful
    if yes < 0 or total < 0:
        raise ValidationError(f"negative helpful votes: {helpful}")
    if yes > total:
        raise ValidationError(f"helpful yes votes exceed total: {helpful}")

    overall = _require(obj, "overall")
    if isinstance(overall, bool) or not isinstance(overall, (int, float)):
        raise ParseError("field 'overall' must be numeric", field="overall")
    if overall != int(overall):
        raise ValidationError(f"fractional rating: {overall}")
    rating = int(overall)
    if not 1 <= rating <= 5:
        raise ValidationError(f"rating out of range: {overall}")

    ts = _require(obj, "unixReviewTime")
    if not _is_int(ts):
        raise ParseError("field 'unixReviewTime' must be an integer", field="unixReviewTime")
    if ts <= 0:
        raise ValidationError(f"timestamp must be positive: {ts}")

    return ReviewRecord(
        reviewer_id=reviewer_id,
        product_id=product_id,
        helpful_yes=yes,
        helpful_total=total,
        rating=rating,
        timestamp=ts,
        review_text=_optional_text(obj, "reviewText"),
        summary=_optional_text(obj, "summary"),
    )


@dataclass(frozen=True)
class BrandCatalog:
    entries: dict[str, str] = field(default_factory=dict)
    fallback_keywords: tuple[tuple[str, str], ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def brands(self) -> list[str]:
        names = set(self.entries.values()) | {b for _, b in self.fallback_keywords}
        return sorted(names)


def _decode(source) -> str:
    if isinstance(source, (str, Path)):
        return Path(source).read_text(encoding="utf-8")
    if isinstance(source, bytes):
        return source.decode("utf-8")
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def load_brand_catalog(source: IO[bytes] | IO[str] | bytes | str | Path) -> BrandCatalog:
    """Load a ``product_id,brand`` table, optionally followed by a
    ``# keywords`` line and ``keyword,brand`` rows.

    A path (``str``/``Path``) is read from disk; file objects and raw bytes
    are decoded as UTF-8.
    """
    text = _decode(source)
    entries: dict[str, str] = {}
    keywords: list[tuple[str, str]] = []
    section = "products"
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        first = row[0].strip()
        if first.lower() == KEYWORD_MARKER:
            section = "keywords"
            continue
        if first.startswith("#"):
            continue
        key_header = "product_id" if section == "products" else "keyword"
        if first.lower() == key_header and len(row) > 1 and row[1].strip().lower() == "brand":
            continue
        if len(row) != 2:
            raise FormatError(f"line {lineno}: expected 2 columns, got {len(row)}")
        key, brand = first, row[1].strip()
        if not key:
            raise FormatError(f"line {lineno}: empty {key_header}")
        if not brand:
            raise FormatError(f"line {lineno}: empty brand name for {key}")
        if section == "products":
            known = entries.get(key)
            if known is not None and known != brand:
                raise FormatError(f"conflicting brand for {key}: {known!r} vs {brand!r}")
            entries[key] = brand
        else:
            keywords.append((key, brand))
    return BrandCatalog(entries, tuple(keywords))


def resolve_brand(record: ReviewRecord, catalog: BrandCatalog) -> str | None:
    """Brand for ``record``; ``None`` when unresolved.

    Exact product match wins, then the first keyword (catalog order) found
    case-insensitively in the review text.
    """
    brand = catalog.entries.get(record.product_id)
    if brand is not None:
        return brand
    if record.review_text and catalog.fallback_keywords:
        text = record.review_text.casefold()
        for keyword, kw_brand in catalog.fallback_keywords:
            if keyword.casefold() in text:
                return kw_brand
    return None


@dataclass
class IngestReport:
    lines: int = 0
    resolved: int = 0
    unresolved: int = 0
    errors: list[tuple[int, str]] = field(default_factory=list)

    @property
    def error_count(self) -> int:
        return len(self.errors)


def iter_reviews(
    lines: Iterable[str | bytes],
    catalog: BrandCatalog | None = None,
    *,
    max_errors: int = DEFAULT_MAX_ERRORS,
    report: IngestReport | None = None,
) -> Iterator[tuple[ReviewRecord, str | None]]:
    """Yield ``(record, brand)`` pairs in input order.

    Blank lines are skipped.  Bad lines are logged with their line number
    and counted in ``report``; once more than ``max_errors`` lines have
    failed, :class:`IngestAborted` is raised.  With no catalog every brand
    is ``None``.
    """
    report = report if report is not None else IngestReport()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        report.lines += 1
        try:
            record = parse_review_record(line)
        except ReviewDataError as exc:
            report.errors.append((lineno, str(exc)))
            log.warning("line %d: %s", lineno, exc)
            if report.error_count > max_errors:
                raise IngestAborted(
                    f"aborting after {report.error_count} bad lines (max {max_errors})"
                ) from exc
            continue
        brand = resolve_brand(record, catalog) if catalog is not None else None
        if brand is None:
            report.unresolved += 1
        else:
            report.resolved += 1
        yield record, brand


def read_reviews(
    path: str | Path,
    catalog: BrandCatalog | None = None,
    *,
    max_errors: int = DEFAULT_MAX_ERRORS,
) -> tuple[list[tuple[ReviewRecord, str | None]], IngestReport]:
    report = IngestReport()
    with open(path, encoding="utf-8") as fh:
        pairs = list(iter_reviews(fh, catalog, max_errors=max_errors, report=report))
    return pairs, report
