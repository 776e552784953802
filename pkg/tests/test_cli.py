"""End-to-end drives of the command line entry point.

Every test calls ``main(argv)`` in-process and parses the JSON the
command prints, so exit codes, payload shapes, and the determinism
contract are all checked without spawning subprocesses.
"""

import json

import pytest

from zml.cache import cache_io
from zml.cli import main


@pytest.fixture(scope="module")
def cache_dir(cache_1k, tmp_path_factory):
    """The session cache persisted where the CLI can read it."""
    cache, _ = cache_1k
    d = tmp_path_factory.mktemp("clicache")
    cache_io(d / "zeros.zcache", "write", cache)
    return d


def _run(capsys, *argv):
    rc = main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def _cache_flag(cache_dir):
    return ["--cache", str(cache_dir / "zeros.zcache")]


# -- zeros -------------------------------------------------------------

def test_zeros_builds_and_persists(tmp_path, capsys):
    dest = tmp_path / "small.zcache"
    rc, out, _ = _run(capsys, "zeros", "--to", "250", "--cache", str(dest))
    assert rc == 0
    payload = json.loads(out)
    assert payload["status"] == "ok"
    assert payload["turing"]["certified"]
    assert payload["zeros"] > 90  # N(250) = 103
    back = cache_io(dest, "read")
    assert back.certified
    assert back.content_crc() == payload["cache_crc"]


def test_cache_dir_env_fallback(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("ZML_CACHE_DIR", str(tmp_path))
    rc, out, _ = _run(capsys, "zeros", "--to", "120")
    assert rc == 0
    assert (tmp_path / "zeros.zcache").exists()


# -- moments and families ----------------------------------------------

def test_moments_rows_and_csv(cache_dir, tmp_path, capsys):
    rc, out, _ = _run(capsys, "moments", "--k=-1,1", "--T", "200,400",
                      *_cache_flag(cache_dir), "--out", str(tmp_path))
    assert rc == 0
    payload = json.loads(out)
    rows = payload["rows"]
    assert [r["k"] for r in rows] == [-1.0, -1.0, 1.0, 1.0]
    assert all(r["J"] > 0 for r in rows)
    assert "cache_crc" in payload
    lines = (tmp_path / "moments.csv").read_text().splitlines()
    assert lines[0].startswith("k,") and len(lines) == 5


def test_moments_negative_k_is_gonek_normalized(cache_dir, capsys):
    rc, out, _ = _run(capsys, "moments", "--k=-1", "--T", "400",
                      *_cache_flag(cache_dir))
    assert rc == 0
    row = json.loads(out)["rows"][0]
    # J_{-1}(T)/T should sit near 3/pi^3 ~ 0.0968 already at T = 400
    assert 0.05 < row["normalized"] < 0.2
    assert 0.5 < row["gonek_ratio"] < 2.0


def test_moments_gap_family_uses_interior_window(cache_dir, capsys):
    rc, out, _ = _run(capsys, "moments", "--k=-1", "--T", "400",
                      "--family", "F", "--c-gap", "1.0",
                      *_cache_flag(cache_dir))
    assert rc == 0
    row = json.loads(out)["rows"][0]
    assert row["used"] > 100


def test_families_sweep(cache_dir, capsys):
    rc, out, _ = _run(capsys, *_cache_flag(cache_dir), "families",
                      "--T", "900")
    assert rc == 0
    rows = json.loads(out)["rows"]
    assert [r["kind"] for r in rows] == ["full", "F", "F", "F", "F", "F_enl"]
    full = rows[0]
    assert full["threshold"] == 0.0 and full["excluded"] == 0
    assert all(0.0 <= r["fraction_excluded"] < 1.0 for r in rows)


def test_families_single_spec(cache_dir, capsys):
    rc, out, _ = _run(capsys, "families", "--family", "F", "--c-gap", "2.0",
                      "--T", "500", *_cache_flag(cache_dir))
    assert rc == 0
    rows = json.loads(out)["rows"]
    assert len(rows) == 1 and rows[0]["c_gap"] == 2.0


# -- formula checks ----------------------------------------------------

def test_mvt_ones_within_budget(cache_dir, capsys):
    rc, out, _ = _run(capsys, "verify-mvt", "--x", "30", "--coeffs", "ones",
                      "--T", "400", *_cache_flag(cache_dir))
    assert rc == 0
    rep = json.loads(out)["report"]
    assert 0.0 < rep["ratio"] <= 1.0


def test_mvt_unit_is_exact(cache_dir, capsys):
    rc, out, _ = _run(capsys, "verify-mvt", "--x", "2", "--coeffs", "unit",
                      "--T", "400", *_cache_flag(cache_dir))
    assert rc == 0
    rep = json.loads(out)["report"]
    assert rep["residual"] == 0.0 and rep["ratio"] == 0.0


def test_landau_gonek_rows(cache_dir, capsys):
    rc, out, _ = _run(capsys, "verify-landau-gonek", "--y", "2,5/2",
                      "--T", "400", *_cache_flag(cache_dir))
    assert rc == 0
    rows = json.loads(out)["rows"]
    assert [r["y"] for r in rows] == ["2", "5/2"]
    assert all(r["report"]["ratio"] <= 1.0 for r in rows)


def test_kirila_range(cache_dir, capsys):
    rc, out, _ = _run(capsys, "kirila", "--n", "1:20", "--H", "50",
                      *_cache_flag(cache_dir))
    assert rc == 0
    rows = json.loads(out)["rows"]
    assert len(rows) == 20
    assert max(abs(r["discrepancy"]) for r in rows) <= 10.0
    assert max(r["m1_count"] for r in rows) <= 5


# -- ladder ------------------------------------------------------------

def test_ladder_feasible_point(capsys):
    rc, out, _ = _run(capsys, "ladder", "--k", "0.4", "--eps", "0.1",
                      "--T", "1e6")
    assert rc == 0
    payload = json.loads(out)
    assert payload["params"]["a"] == pytest.approx(0.9897959183673469)
    checks = payload["checks"]
    assert all(c["ok"] for c in checks if c["asserted"])
    assert all(c["slack"] >= 0.0 for c in checks if c["asserted"])


def test_ladder_infeasible_names_invariant(capsys):
    rc, out, _ = _run(capsys, "ladder", "--k", "0.4", "--eps", "0.1",
                      "--T", "1e3")
    assert rc == 1
    payload = json.loads(out)
    assert payload["status"] == "failed"
    assert payload["invariant"] == "ladder-feasibility"
    assert "cap" in payload["detail"]


# -- mertens -----------------------------------------------------------

def test_mertens_known_values(tmp_path, capsys):
    rc, out, _ = _run(capsys, "mertens", "--x", "100000",
                      "--out", str(tmp_path))
    assert rc == 0
    rows = json.loads(out)["rows"]
    assert [r["M"] for r in rows] == [2, -23, -48]
    assert all(r["ratio"] <= 0.5 for r in rows)
    assert (tmp_path / "mertens.csv").exists()


# -- report bundle -----------------------------------------------------

def test_report_bundle(cache_dir, tmp_path, capsys):
    rc, out, _ = _run(capsys, "report", *_cache_flag(cache_dir),
                      "--out", str(tmp_path))
    assert rc == 0
    payload = json.loads(out)
    sections = payload["sections"]
    for key in ("cache", "moments", "families", "s_envelope", "zero_sums",
                "landau_gonek", "mvt"):
        assert key in sections
    assert sections["cache"]["certified"]
    for name in ("report.json", "moments.csv", "families.csv",
                 "s_envelope.csv"):
        assert (tmp_path / name).exists()


def test_report_deterministic_modulo_timestamp(cache_dir, capsys):
    _, out1, _ = _run(capsys, "report", *_cache_flag(cache_dir))
    _, out2, _ = _run(capsys, "report", *_cache_flag(cache_dir))
    a, b = json.loads(out1), json.loads(out2)
    a.pop("timestamp"), b.pop("timestamp")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


# -- config handling ---------------------------------------------------

def test_config_file_supplies_defaults(cache_dir, tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text(
        f'cache = "{cache_dir / "zeros.zcache"}"\n'
        '[moments]\nk = "-1"\nT = "200,400"\n')
    rc, out, _ = _run(capsys, "--config", str(cfg), "moments")
    assert rc == 0
    assert [r["T"] for r in json.loads(out)["rows"]] == [200.0, 400.0]


def test_flags_override_config(cache_dir, tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text(
        f'cache = "{cache_dir / "zeros.zcache"}"\n'
        '[moments]\nk = "-1"\nT = "200,400"\n')
    rc, out, _ = _run(capsys, "moments", "--config", str(cfg), "--T", "300")
    assert rc == 0
    assert [r["T"] for r in json.loads(out)["rows"]] == [300.0]


def test_missing_cache_is_config_error(tmp_path, capsys):
    rc, _, err = _run(capsys, "moments", "--k=-1", "--T", "200",
                      "--cache", str(tmp_path / "absent.zcache"))
    assert rc == 2
    assert "config error" in err


def test_decreasing_grid_is_config_error(cache_dir, capsys):
    rc, _, err = _run(capsys, "moments", "--k=-1", "--T", "400,200",
                      *_cache_flag(cache_dir))
    assert rc == 2
    assert "increasing" in err


def test_unreadable_toml_is_config_error(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("not toml [")
    rc, _, err = _run(capsys, "--config", str(bad), "mertens", "--x", "1000")
    assert rc == 2
    assert "config error" in err
