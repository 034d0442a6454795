"""Brand statistics and 2009 latency table on the public Amazon review dump.

    python scripts/replicate_amazon.py reviews.json catalog.csv --brand Nokia --brand Canon

Needs the dataset and a product->brand catalog; neither ships with the repo.
"""

import argparse

from review_pulse import Month, brand_series, latency_scan, load_brand_catalog, month_range
from review_pulse.ingest import read_reviews
from review_pulse.network import build_networks


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("reviews")
    ap.add_argument("catalog")
    ap.add_argument("--brand", action="append")
    ap.add_argument("--year", type=int, default=2009)
    args = ap.parse_args()

    pairs, report = read_reviews(args.reviews, load_brand_catalog(args.catalog), max_errors=10**9)
    print(f"{report.resolved} resolved, {report.unresolved} unresolved, {report.error_count} bad lines")
    nets = build_networks(pairs)
    months = month_range(Month(args.year, 1), Month(args.year + 1, 10))
    for brand in args.brand or sorted(nets):
        net = nets.get(brand)
        if net is None:
            print(f"{brand}: no reviews")
            continue
        s = brand_series(net, months)
        sps = latency_scan(s.sps_increment[:12], s.sales_proxy)
        row = " ".join(f"{c:.3f}" if c is not None else "n/a" for c in sps.coefficients.values())
        print(f"{brand}: {net.review_count} reviews, {net.n_customers} customers, {net.n_products} products")
        print(f"  SPS   {row}  best={sps.best_latency}")
        if all(v is not None for v in s.sps_r[:12]):
            base = latency_scan(s.sps_r[:12], s.sales_proxy)
            row = " ".join(f"{c:.3f}" if c is not None else "n/a" for c in base.coefficients.values())
            print(f"  SPS-R {row}  best={base.best_latency}")


if __name__ == "__main__":
    main()
