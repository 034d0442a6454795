import random

import pytest

from review_pulse.ingest import ReviewRecord
from review_pulse.network import build_network

# 2009-05-01T00:00:00Z
MAY_2009 = 1241136000
DAY = 86400

FIG1_ORDER = [("u1", "p1"), ("u2", "p1"), ("u1", "p2"), ("u3", "p1"), ("u4", "p2"), ("u5", "p3"), ("u4", "p3")]


def make_record(reviewer, product, ts, rating=5, yes=0, total=0, text=None):
    return ReviewRecord(reviewer, product, yes, total, rating, ts, text)


def fig1_records(rating=5, yes=0, total=0):
    """The 7 reviews of the influence-network figure, one per day of May 2009."""
    return [
        make_record(u, p, MAY_2009 + i * DAY, rating, yes, total)
        for i, (u, p) in enumerate(FIG1_ORDER)
    ]


@pytest.fixture
def fig1():
    return build_network([(r, "Acme") for r in fig1_records()], "Acme")


def random_records(rng: random.Random, max_reviews=200, max_products=10, max_customers=30, span=40):
    """Random review set with frequent timestamp ties and repeat reviews."""
    n = rng.randint(0, max_reviews)
    n_products = rng.randint(1, max_products)
    n_customers = rng.randint(1, max_customers)
    out = []
    for _ in range(n):
        total = rng.choice([0, 0, rng.randint(0, 12)])
        out.append(
            make_record(
                f"c{rng.randrange(n_customers)}",
                f"p{rng.randrange(n_products)}",
                MAY_2009 + rng.randrange(span) * DAY,
                rating=rng.randint(1, 5),
                yes=rng.randint(0, total),
                total=total,
            )
        )
    return out


# --- acceptance reporting -------------------------------------------------

_ACCEPTANCE: dict[int, set] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or (report.when != "call" and not report.skipped):
        return
    state = "SKIP" if report.skipped else ("PASS" if report.passed else "FAIL")
    _ACCEPTANCE.setdefault(marker.args[0], set()).add(state)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        states = _ACCEPTANCE[n]
        verdict = "FAIL" if "FAIL" in states else "PASS" if "PASS" in states else "SKIP"
        terminalreporter.write_line(f"criterion {n}: {verdict}")
