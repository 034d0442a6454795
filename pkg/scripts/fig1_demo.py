"""Build the 7-review influence example and print centralities, edges and SPS."""

from review_pulse import build_network, compute_sps, export_projection
from review_pulse.synthetic import fig1_reviews


def main():
    net = build_network([(r, "Acme") for r in fig1_reviews()], "Acme")
    end = net.last_timestamp()
    result = compute_sps(net, end)
    print("reviewer product raw_D norm_D term")
    for t in result.terms:
        print(f"{t.reviewer_id:8} {t.review.product_id:7} {t.centrality.raw:5} {t.centrality.normalized:6.2f} {t.contribution:5.2f}")
    print("edges:", export_projection(net, end))
    print(f"SPS = {result.value:g}")


if __name__ == "__main__":
    main()
