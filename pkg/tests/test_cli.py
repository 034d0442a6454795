import csv
import io
import json

import pytest

from review_pulse.cli import fmt, main, parse_offsets, ConfigError
from review_pulse.synthetic import fig1_reviews, lagged_reviews, write_dataset
from review_pulse.ingest import ReviewRecord
from review_pulse.analytics import Month


def run(*argv, environ=None):
    out = io.StringIO()
    code = main(list(argv), stdout=out, environ=environ or {})
    return code, out.getvalue()


@pytest.fixture
def fig1_files(tmp_path):
    return write_dataset(tmp_path / "data", fig1_reviews())


def base_args(files, out):
    return ["--input", str(files[0]), "--catalog", str(files[1]), "--out", str(out)]


def test_fmt():
    assert fmt(None) == "undefined"
    assert fmt(2 / 3) == "0.666667"
    assert fmt(-0.0) == "0"
    assert fmt(5.0) == "5"
    assert fmt(12345678.9) == "1.23457e+07"
    assert fmt(3) == "3"


def test_parse_offsets():
    assert parse_offsets("1..10") == tuple(range(1, 11))
    assert parse_offsets("3,1") == (1, 3)
    for bad in ("0..3", "5..2", "x", ""):
        with pytest.raises(ConfigError):
            parse_offsets(bad)


def test_stats_fig1(fig1_files, tmp_path):
    code, out = run("stats", *base_args(fig1_files, tmp_path / "o"))
    assert code == 0
    assert out.splitlines() == ["brand,reviews,customers,products", "Acme,7,5,3"]
    assert (tmp_path / "o" / "stats.csv").read_text() == out


def test_stats_empty_input(tmp_path):
    files = write_dataset(tmp_path / "d", [])
    code, out = run("stats", *base_args(files, tmp_path / "o"))
    assert code == 0 and out.splitlines() == ["brand,reviews,customers,products"]


def test_stats_json(fig1_files, tmp_path):
    code, out = run("stats", *base_args(fig1_files, tmp_path / "o"), "--format", "json")
    assert code == 0
    assert json.loads(out) == [{"brand": "Acme", "reviews": 7, "customers": 5, "products": 3}]


def test_score_fig1(fig1_files, tmp_path):
    out_dir = tmp_path / "o"
    code, out = run("score", *base_args(fig1_files, out_dir))
    assert code == 0
    summary = json.loads((out_dir / "Acme" / "summary.json").read_text())
    assert summary["sps"] == "5" and summary["terms"] == 7
    rows = list(csv.DictReader(open(out_dir / "Acme" / "breakdown.csv")))
    assert list(rows[0]) == ["reviewer_id", "product_id", "timestamp", "R", "x", "y", "H", "raw_D", "norm_D", "L", "term"]
    assert rows[0]["reviewer_id"] == "u1" and rows[0]["raw_D"] == "2" and rows[0]["H"] == "undefined"


def test_score_empty_range(fig1_files, tmp_path):
    code, _ = run("score", *base_args(fig1_files, tmp_path / "o"), "--from", "2001-01", "--to", "2001-03")
    assert code == 0
    assert json.loads((tmp_path / "o" / "Acme" / "summary.json").read_text())["sps"] == "0"


def test_score_single_review(tmp_path):
    files = write_dataset(tmp_path / "d", [ReviewRecord("u", "p", 2, 3, 5, Month(2009, 5).start)])
    code, _ = run("score", *base_args(files, tmp_path / "o"))
    assert code == 0
    lines = (tmp_path / "o" / "Acme" / "breakdown.csv").read_text().splitlines()
    assert len(lines) == 2 and lines[1].endswith(",2.66667")


def test_score_unknown_brand_warns(fig1_files, tmp_path):
    code, out = run("score", *base_args(fig1_files, tmp_path / "o"), "--brand", "Nobody")
    assert code == 0
    assert "Nobody,0,0" in out
    assert (tmp_path / "o" / "Nobody" / "breakdown.csv").read_text().count("\n") == 1


def test_sps_r_command(fig1_files, tmp_path):
    code, out = run("sps-r", *base_args(fig1_files, tmp_path / "o"))
    assert code == 0
    assert out.splitlines()[1] == "Acme,2009-05,100,7,0,0,7"


def test_correlate_lag_fixture(tmp_path):
    files = write_dataset(tmp_path / "d", lagged_reviews(2, n_months=22))
    code, out = run("correlate", *base_args(files, tmp_path / "o"))
    assert code == 0, out
    rows = list(csv.DictReader(open(tmp_path / "o" / "correlation_sps.csv")))
    assert rows[0]["offset_2"] == "1" and rows[0]["best_latency"] == "2"
    assert (tmp_path / "o" / "correlation_sps_r.csv").exists()
    series = (tmp_path / "o" / "Acme" / "series.csv").read_text().splitlines()
    assert series[0] == "month,sps_snapshot,sps_increment,sps_r,sales_proxy" and len(series) == 23


def test_correlate_constant_sales(tmp_path):
    recs = [
        ReviewRecord(f"c{m}{j}", f"P{m}-{j}", 0, 0, 1 + (m + j) % 5, Month(2009, 1).shift(m).start + 60 * (j + 1))
        for m in range(22) for j in range(5)
    ]
    files = write_dataset(tmp_path / "d", recs)
    code, _ = run("correlate", *base_args(files, tmp_path / "o"))
    assert code == 0
    row = list(csv.DictReader(open(tmp_path / "o" / "correlation_sps.csv")))[0]
    assert all(row[f"offset_{d}"] == "undefined" for d in range(1, 11))
    assert row["best_latency"] == "undefined"


def test_correlate_insufficient_span(fig1_files, tmp_path):
    code, _ = run("correlate", *base_args(fig1_files, tmp_path / "o"))
    assert code == 2


def test_export_graph(fig1_files, tmp_path):
    code, out = run("export-graph", *base_args(fig1_files, tmp_path / "o"))
    assert code == 0
    lines = (tmp_path / "o" / "Acme" / "projection.csv").read_text().splitlines()
    assert lines[0] == "source,target,product_id" and len(lines) == 6
    code, _ = run("export-graph", *base_args(fig1_files, tmp_path / "o2"), "--max-edges", "3")
    assert code == 1
    code, _ = run("export-graph", *base_args(fig1_files, tmp_path / "o3"), "--format", "json")
    assert len((tmp_path / "o3" / "Acme" / "projection.jsonl").read_text().splitlines()) == 5


def test_runs_command(tmp_path):
    files = write_dataset(tmp_path / "d", lagged_reviews(3, n_months=14, seed=4))
    code, out = run("runs", *base_args(files, tmp_path / "o"), "--high", "1000", "--low", "-1000")
    assert code == 0 and out.splitlines() == ["brand,month,length,polarity,duration"]
    code, _ = run("runs", *base_args(files, tmp_path / "o"))
    assert code == 0
    assert (tmp_path / "o" / "Acme" / "runs.csv").exists()


@pytest.mark.parametrize(
    "extra",
    [
        ["--from", "2010-05", "--to", "2010-01"],
        ["--promoter-floor", "0", "--detractor-ceiling", "0"],
        ["--offsets", "0..3"],
        ["--from", "May"],
    ],
)
def test_config_errors_exit_2(fig1_files, tmp_path, extra):
    code, _ = run("score", *base_args(fig1_files, tmp_path / "o"), *extra)
    assert code == 2


def test_missing_input_exit_2(tmp_path):
    assert run("stats")[0] == 2
    assert run("bogus")[0] == 2


def test_unreadable_input_exit_1(fig1_files, tmp_path):
    code, _ = run("stats", "--input", str(tmp_path / "missing.json"), "--catalog", str(fig1_files[1]), "--out", str(tmp_path))
    assert code == 1


def test_error_budget_exit_1(fig1_files, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("oops\n" * 3)
    assert run("stats", "--input", str(bad), "--catalog", str(fig1_files[1]), "--out", str(tmp_path), "--max-errors", "2")[0] == 1
    assert run("stats", "--input", str(bad), "--catalog", str(fig1_files[1]), "--out", str(tmp_path), "--max-errors", "3")[0] == 0


def test_bad_catalog_exit_2(fig1_files, tmp_path):
    cat = tmp_path / "cat.csv"
    cat.write_text("product_id,brand\nX,A\nX,B\n")
    assert run("stats", "--input", str(fig1_files[0]), "--catalog", str(cat), "--out", str(tmp_path))[0] == 2


def test_config_file_precedence(fig1_files, tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text(f"# comment\ninput = {fig1_files[0]}\ncatalog={fig1_files[1]}\nout={tmp_path / 'o'}\nformat=json\n")
    code, out = run("stats", environ={"REVIEW_PULSE_CONFIG": str(conf)})
    assert code == 0 and out.startswith("[")
    code, out = run("stats", "--format", "csv", environ={"REVIEW_PULSE_CONFIG": str(conf)})
    assert code == 0 and out.startswith("brand,")
    code, out = run("stats", "--config", str(conf))
    assert code == 0
    conf.write_text("colour=blue\n")
    assert run("stats", "--config", str(conf))[0] == 2


def test_jobs_same_output(tmp_path):
    recs = lagged_reviews(2, seed=1)
    path, _ = write_dataset(tmp_path / "d", recs)
    products = sorted({r.product_id for r in recs})
    cat = tmp_path / "d" / "two.csv"
    cat.write_text("product_id,brand\n" + "".join(f"{p},{'A' if i % 2 else 'B'}\n" for i, p in enumerate(products)))
    outs = []
    for jobs in ("1", "4"):
        code, out = run("score", "--input", str(path), "--catalog", str(cat), "--out", str(tmp_path / jobs), "--jobs", jobs)
        assert code == 0
        outs.append((out, (tmp_path / jobs / "A" / "breakdown.csv").read_bytes()))
    assert outs[0] == outs[1]
