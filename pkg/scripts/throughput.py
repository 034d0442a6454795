"""Time ingest + build + score on synthetic reviews.

    python scripts/throughput.py --reviews 100000
"""

import argparse
import tempfile
import time

from review_pulse import build_network, compute_sps, load_brand_catalog
from review_pulse.ingest import read_reviews
from review_pulse.network import projection_edge_count
from review_pulse.synthetic import random_reviews, write_dataset


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reviews", type=int, default=100_000)
    ap.add_argument("--products", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        path, catalog = write_dataset(tmp, random_reviews(args.reviews, n_products=args.products, seed=args.seed))
        t0 = time.perf_counter()
        pairs, _ = read_reviews(path, load_brand_catalog(catalog))
        t1 = time.perf_counter()
        net = build_network(pairs, "Acme")
        t2 = time.perf_counter()
        result = compute_sps(net, net.last_timestamp())
        t3 = time.perf_counter()
    print(f"ingest {t1 - t0:.2f}s  build {t2 - t1:.2f}s  score {t3 - t2:.2f}s  total {t3 - t0:.2f}s")
    print(f"SPS {result.value:.6g} over {len(result.terms)} reviews; "
          f"projection would have {projection_edge_count(net):,} edges (not built)")


if __name__ == "__main__":
    main()
