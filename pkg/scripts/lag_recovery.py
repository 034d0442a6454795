"""Recover a planted sales latency from synthetic reviews at every offset 1..10."""

from review_pulse import Month, brand_series, build_network, latency_scan, month_range
from review_pulse.synthetic import lagged_reviews


def main():
    months = month_range(Month(2009, 1), Month(2010, 10))
    print("lag  best  " + "  ".join(f"@{d:<5}" for d in range(1, 11)))
    for lag in range(1, 11):
        net = build_network([(r, "Acme") for r in lagged_reviews(lag, seed=lag)], "Acme")
        s = brand_series(net, months)
        rep = latency_scan(s.sps_increment[:12], s.sales_proxy)
        cells = "  ".join(f"{c:6.3f}" if c is not None else "  n/a " for c in rep.coefficients.values())
        print(f"{lag:3}  {rep.best_latency:4}  {cells}")


if __name__ == "__main__":
    main()
