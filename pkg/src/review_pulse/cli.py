"""``review-pulse`` command line.

Subcommands: stats, score, sps-r, correlate, export-graph, runs.

Settings come from (highest first) command-line flags, a ``key=value``
config file named by ``--config`` or ``$REVIEW_PULSE_CONFIG``, then
defaults.  Exit codes: 0 ok, 1 runtime/I-O failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from . import analytics as an
from .ingest import DEFAULT_MAX_ERRORS, IngestAborted, FormatError, load_brand_catalog, read_reviews
from .network import (
    DEFAULT_EDGE_CAP,
    NORMALIZATION_MODES,
    CapacityError,
    ReviewNetwork,
    build_network,
    export_projection,
    write_projection,
)
from .scoring import ConfigurationError, compute_sps, compute_sps_r

log = logging.getLogger("review_pulse")

CONFIG_ENV = "REVIEW_PULSE_CONFIG"
WINDOW_MONTHS = 12
BREAKDOWN_FIELDS = ["reviewer_id", "product_id", "timestamp", "R", "x", "y", "H", "raw_D", "norm_D", "L", "term"]
SERIES_FIELDS = ["month", "sps_snapshot", "sps_increment", "sps_r", "sales_proxy"]


class ConfigError(Exception):
    pass


def fmt(value) -> str:
    """Report float format: 6 significant digits, ``undefined`` for None."""
    if value is None:
        return "undefined"
    if isinstance(value, float):
        out = f"{value:.6g}"
        return "0" if out == "-0" else out
    return str(value)


def parse_offsets(text: str) -> tuple[int, ...]:
    """``"1..10"``, ``"2"`` or ``"1,3,5"``."""
    text = text.strip()
    try:
        m = re.fullmatch(r"(\d+)\.\.(\d+)", text)
        if m:
            lo, hi = int(m.group(1)), int(m.group(2))
            if lo > hi:
                raise ValueError
            offsets = tuple(range(lo, hi + 1))
        else:
            offsets = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise ConfigError(f"bad offsets {text!r}") from None
    if not offsets or min(offsets) < 1:
        raise ConfigError(f"offsets must be positive: {text!r}")
    return tuple(sorted(set(offsets)))


@dataclass
class RunConfig:
    input_path: Path | None = None
    catalog_path: Path | None = None
    brands: list[str] = field(default_factory=list)
    date_from: an.Month | None = None
    date_to: an.Month | None = None
    promoter_floor: int = 1
    detractor_ceiling: int = -1
    normalization_window: str = "snapshot"
    offsets: tuple[int, ...] = an.DEFAULT_OFFSETS
    out_dir: Path = Path("out")
    output_format: str = "csv"
    jobs: int = 1
    max_errors: int = DEFAULT_MAX_ERRORS
    max_edges: int = DEFAULT_EDGE_CAP
    high_threshold: float | None = None
    low_threshold: float | None = None
    min_run: int = 2

    def validate(self) -> None:
        if self.input_path is None:
            raise ConfigError("--input is required")
        if self.catalog_path is None:
            raise ConfigError("--catalog is required")
        if self.date_from and self.date_to and self.date_from > self.date_to:
            raise ConfigError(f"date range is empty: {self.date_from} > {self.date_to}")
        if self.detractor_ceiling >= self.promoter_floor:
            raise ConfigError("detractor ceiling must be below promoter floor")
        if self.normalization_window not in NORMALIZATION_MODES:
            raise ConfigError(f"normalization must be one of {NORMALIZATION_MODES}")
        if self.output_format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.jobs < 1 or self.max_errors < 0 or self.max_edges < 0:
            raise ConfigError("jobs must be >= 1, max-errors and max-edges >= 0")
        if self.min_run < 2:
            raise ConfigError("min-run must be at least 2")
        if (
            self.high_threshold is not None
            and self.low_threshold is not None
            and self.high_threshold <= self.low_threshold
        ):
            raise ConfigError("high threshold must exceed low threshold")


# config key -> (RunConfig field, converter)
_CONVERTERS: dict[str, tuple[str, Callable]] = {
    "input": ("input_path", Path),
    "catalog": ("catalog_path", Path),
    "brand": ("brands", lambda v: [b.strip() for b in v.split(",") if b.strip()] if isinstance(v, str) else list(v)),
    "from": ("date_from", an.Month.parse),
    "to": ("date_to", an.Month.parse),
    "promoter_floor": ("promoter_floor", int),
    "detractor_ceiling": ("detractor_ceiling", int),
    "normalization": ("normalization_window", str),
    "normalization_window": ("normalization_window", str),
    "offsets": ("offsets", parse_offsets),
    "out": ("out_dir", Path),
    "format": ("output_format", str),
    "jobs": ("jobs", int),
    "max_errors": ("max_errors", int),
    "max_edges": ("max_edges", int),
    "high": ("high_threshold", float),
    "low": ("low_threshold", float),
    "min_run": ("min_run", int),
}


def read_config_file(path: str | Path) -> dict[str, str]:
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONVERTERS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def resolve_config(args: argparse.Namespace, environ=os.environ) -> RunConfig:
    merged: dict[str, object] = {}
    config_path = getattr(args, "config", None) or environ.get(CONFIG_ENV)
    if config_path:
        merged.update(read_config_file(config_path))
    for key in _CONVERTERS:
        value = getattr(args, key, None)
        if value is not None and value != []:
            merged[key] = value
    cfg = RunConfig()
    for key, raw in merged.items():
        attr, conv = _CONVERTERS[key]
        try:
            value = conv(raw) if isinstance(raw, str) or attr == "brands" else raw
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from None
        setattr(cfg, attr, value)
    cfg.validate()
    return cfg


def _load(cfg: RunConfig) -> dict[str, ReviewNetwork]:
    """Ingest input and build one network per brand (filtered by config)."""
    try:
        catalog = load_brand_catalog(cfg.catalog_path)
    except FormatError as exc:
        raise ConfigError(f"{cfg.catalog_path}: {exc}") from None
    pairs, report = read_reviews(cfg.input_path, catalog, max_errors=cfg.max_errors)
    log.info(
        "ingested %d lines: %d resolved, %d unresolved, %d errors",
        report.lines, report.resolved, report.unresolved, report.error_count,
    )
    grouped: dict[str, list] = {}
    for record, brand in pairs:
        if brand is not None:
            grouped.setdefault(brand, []).append((record, brand))
    brands = cfg.brands or sorted(grouped)
    networks = {}
    for brand in brands:
        if brand not in grouped:
            log.warning("no resolvable reviews for brand %r", brand)
        networks[brand] = build_network(grouped.get(brand, []), brand)
    return networks


def _restrict(net: ReviewNetwork, cfg: RunConfig) -> ReviewNetwork:
    if cfg.date_from is None and cfg.date_to is None:
        return net
    lo = cfg.date_from.start if cfg.date_from else float("-inf")
    hi = cfg.date_to.end if cfg.date_to else float("inf")
    kept = [(e.record, net.brand) for es in net.products.values() for e in es if lo <= e.timestamp < hi]
    return build_network(kept, net.brand)


def _snapshot_time(net: ReviewNetwork, cfg: RunConfig) -> int:
    if cfg.date_to is not None:
        return cfg.date_to.end - 1
    last = net.last_timestamp()
    return last if last is not None else 0


def _months(net: ReviewNetwork, cfg: RunConfig) -> list[an.Month]:
    data = an.network_months(net)
    first = cfg.date_from or (data[0] if data else None)
    last = cfg.date_to or (data[-1] if data else None)
    if first is None or last is None:
        return []
    return an.month_range(first, last)


def _brand_dir(cfg: RunConfig, brand: str) -> Path:
    safe = re.sub(r"[^A-Za-z0-9._-]+", "_", brand) or "_"
    path = cfg.out_dir / safe
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_table(path: Path, header: Sequence[str], rows: Sequence[Sequence], output_format: str) -> Path:
    """Write ``rows`` as CSV or as a JSON array of objects (values pre-formatted)."""
    rows = [[fmt(v) for v in row] for row in rows]
    if output_format == "json":
        path = path.with_suffix(".json")
        payload = [dict(zip(header, row)) for row in rows]
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    else:
        path = path.with_suffix(".csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    return path


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def _per_brand(cfg: RunConfig, networks: dict[str, ReviewNetwork], fn):
    brands = list(networks)
    if cfg.jobs == 1 or len(brands) < 2:
        return [fn(networks[b]) for b in brands]
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(pool.map(lambda b: fn(networks[b]), brands))


def stats_rows(networks: dict[str, ReviewNetwork]) -> list[tuple[str, int, int, int]]:
    return [(b, n.review_count, n.n_customers, n.n_products) for b, n in networks.items()]


def cmd_stats(cfg: RunConfig, stdout=sys.stdout) -> int:
    networks = {b: _restrict(n, cfg) for b, n in _load(cfg).items()}
    header = ["brand", "reviews", "customers", "products"]
    rows = stats_rows(networks)
    if cfg.output_format == "json":
        stdout.write(json.dumps([n.summary() for n in networks.values()], indent=2) + "\n")
    else:
        writer = csv.writer(stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    _write_table(cfg.out_dir / "stats", header, rows, cfg.output_format)
    return 0


def cmd_score(cfg: RunConfig, stdout=sys.stdout) -> int:
    networks = {b: _restrict(n, cfg) for b, n in _load(cfg).items()}

    def score(net: ReviewNetwork):
        t = _snapshot_time(net, cfg)
        result = compute_sps(net, t, normalization=cfg.normalization_window)
        rows = []
        for term in result.terms:
            rows.append(
                (
                    term.reviewer_id, term.review.product_id, term.timestamp, term.sentiment,
                    term.helpful_yes, term.helpful_total, term.helpfulness,
                    term.centrality.raw, term.centrality.normalized, term.loyalty, term.contribution,
                )
            )
        out = _brand_dir(cfg, net.brand)
        _write_table(out / "breakdown", BREAKDOWN_FIELDS, rows, cfg.output_format)
        summary = {
            "brand": net.brand,
            "sps": fmt(result.value),
            "snapshot_time": t,
            "normalization": result.normalization,
            "brand_max_centrality": result.brand_max,
            "terms": len(rows),
            **{k: v for k, v in net.summary().items() if k != "brand"},
        }
        _write_json(out / "summary.json", summary)
        return summary

    summaries = _per_brand(cfg, networks, score)
    writer = csv.writer(stdout, lineterminator="\n")
    writer.writerow(["brand", "sps", "reviews", "normalization"])
    for s in summaries:
        writer.writerow([s["brand"], s["sps"], s["reviews"], s["normalization"]])
    return 0


def cmd_sps_r(cfg: RunConfig, stdout=sys.stdout) -> int:
    networks = _load(cfg)
    header = ["month", "sps_r", "promoters", "passives", "detractors", "total"]

    def run(net: ReviewNetwork):
        rows = []
        for m in _months(net, cfg):
            res = compute_sps_r(net, (m.start, m.end), cfg.promoter_floor, cfg.detractor_ceiling)
            t = res.tally
            rows.append((str(m), res.value, t.promoters, t.passives, t.detractors, t.total))
        _write_table(_brand_dir(cfg, net.brand) / "sps_r", header, rows, cfg.output_format)
        return net.brand, rows

    writer = csv.writer(stdout, lineterminator="\n")
    writer.writerow(["brand"] + header)
    for brand, rows in _per_brand(cfg, networks, run):
        for row in rows:
            writer.writerow([brand] + [fmt(v) for v in row])
    return 0


def _correlation_window(net: ReviewNetwork, cfg: RunConfig) -> list[an.Month]:
    months = _months(net, cfg)
    needed = WINDOW_MONTHS + max(cfg.offsets)
    if len(months) < needed:
        raise ConfigError(
            f"brand {net.brand!r}: correlation needs {needed} months "
            f"({WINDOW_MONTHS} + max offset {max(cfg.offsets)}), range has {len(months)}"
        )
    return months[:needed]


def cmd_correlate(cfg: RunConfig, stdout=sys.stdout) -> int:
    networks = _load(cfg)
    windows = {b: _correlation_window(n, cfg) for b, n in networks.items()}

    def run(net: ReviewNetwork):
        months = windows[net.brand]
        series = an.brand_series(
            net, months,
            normalization=cfg.normalization_window,
            promoter_floor=cfg.promoter_floor,
            detractor_ceiling=cfg.detractor_ceiling,
        )
        _write_table(_brand_dir(cfg, net.brand) / "series", SERIES_FIELDS, [(str(r[0]), *r[1:]) for r in series.rows()], cfg.output_format)
        head = months[:WINDOW_MONTHS]
        sps = an.latency_scan(series.sps_increment[:WINDOW_MONTHS], series.sales_proxy, cfg.offsets, brand=net.brand, window=head)
        sps_r_window = series.sps_r[:WINDOW_MONTHS]
        if any(v is None for v in sps_r_window):
            sps_r = an.CorrelationReport(net.brand, {d: None for d in cfg.offsets}, None, head)
        else:
            sps_r = an.latency_scan(sps_r_window, series.sales_proxy, cfg.offsets, brand=net.brand, window=head)
        return sps, sps_r

    results = _per_brand(cfg, networks, run)
    header = ["brand"] + [f"offset_{d}" for d in cfg.offsets] + ["best_latency"]
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    for idx, name in ((0, "correlation_sps"), (1, "correlation_sps_r")):
        rows = [[r[idx].brand] + [r[idx].coefficients[d] for d in cfg.offsets] + [r[idx].best_latency] for r in results]
        _write_table(cfg.out_dir / name, header, rows, cfg.output_format)
    writer = csv.writer(stdout, lineterminator="\n")
    writer.writerow(["brand", "between"] + header[1:])
    for sps, sps_r in results:
        for label, rep in (("SPS", sps), ("SPS-R", sps_r)):
            writer.writerow([rep.brand, label] + [fmt(rep.coefficients[d]) for d in cfg.offsets] + [fmt(rep.best_latency)])
    return 0


def cmd_export_graph(cfg: RunConfig, stdout=sys.stdout) -> int:
    networks = _load(cfg)
    for brand, net in networks.items():
        edges = export_projection(net, _snapshot_time(net, cfg), max_edges=cfg.max_edges)
        out = _brand_dir(cfg, brand)
        fmt_ = "csv" if cfg.output_format == "csv" else "jsonl"
        path = out / f"projection.{fmt_}"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            write_projection(edges, fh, fmt_)
        stdout.write(f"{brand}\t{len(edges)}\t{path}\n")
    return 0


def cmd_runs(cfg: RunConfig, stdout=sys.stdout) -> int:
    networks = _load(cfg)
    header = ["month", "length", "polarity", "duration"]

    def run(net: ReviewNetwork):
        months = _months(net, cfg)
        if not months:
            rows = []
        else:
            inc = an.sps_increment_series(net, months, cfg.normalization_window)
            found = an.detect_duration_effects(inc, cfg.high_threshold, cfg.low_threshold, cfg.min_run, months)
            rows = [(str(r.month), r.length, r.polarity, r.duration) for r in found]
        _write_table(_brand_dir(cfg, net.brand) / "runs", header, rows, cfg.output_format)
        return net.brand, rows

    writer = csv.writer(stdout, lineterminator="\n")
    writer.writerow(["brand"] + header)
    for brand, rows in _per_brand(cfg, networks, run):
        for row in rows:
            writer.writerow([brand] + [fmt(v) for v in row])
    return 0


COMMANDS = {
    "stats": cmd_stats,
    "score": cmd_score,
    "sps-r": cmd_sps_r,
    "correlate": cmd_correlate,
    "export-graph": cmd_export_graph,
    "runs": cmd_runs,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"key=value config file (default ${CONFIG_ENV})")
    common.add_argument("--input", help="newline-delimited JSON reviews")
    common.add_argument("--catalog", help="product_id,brand CSV")
    common.add_argument("--brand", action="append", help="restrict to brand (repeatable)")
    common.add_argument("--from", dest="from", metavar="YYYY-MM")
    common.add_argument("--to", metavar="YYYY-MM")
    common.add_argument("--offsets", help="latency offsets, e.g. 1..10")
    common.add_argument("--normalization", choices=NORMALIZATION_MODES)
    common.add_argument("--promoter-floor", dest="promoter_floor", type=int)
    common.add_argument("--detractor-ceiling", dest="detractor_ceiling", type=int)
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--out", help="output directory")
    common.add_argument("--jobs", type=int)
    common.add_argument("--max-errors", dest="max_errors", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="review-pulse", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("stats", parents=[common], help="reviews/customers/products per brand")
    sub.add_parser("score", parents=[common], help="SPS snapshot with per-review breakdown")
    sub.add_parser("sps-r", parents=[common], help="monthly baseline SPS-R")
    sub.add_parser("correlate", parents=[common], help="lagged correlation against sales proxy")
    eg = sub.add_parser("export-graph", parents=[common], help="write the directed influence edges")
    eg.add_argument("--max-edges", dest="max_edges", type=int)
    runs = sub.add_parser("runs", parents=[common], help="long/short runs of SPS increments")
    runs.add_argument("--high", type=float)
    runs.add_argument("--low", type=float)
    runs.add_argument("--min-run", dest="min_run", type=int)
    return parser


def main(argv: Sequence[str] | None = None, stdout=None, environ=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = resolve_config(args, os.environ if environ is None else environ)
        return COMMANDS[args.command](cfg, stdout)
    except (ConfigError, ConfigurationError) as exc:
        print(f"review-pulse: configuration error: {exc}", file=sys.stderr)
        return 2
    except (OSError, IngestAborted, CapacityError) as exc:
        print(f"review-pulse: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
