"""End-to-end checks of the command-line front end.

Every test drives ``main`` in-process with an explicit ``--cache-dir`` so
nothing touches the user's real store.  The persistence contract (five
JSON fields, sha256 over the canonical dump of the other four) is
restated here independently rather than imported, so a format drift in
the implementation fails these tests instead of being mirrored by them.
Expected numbers were frozen from manual runs that were checked against
the module-level oracles.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json

import pytest

from heckemass.cli import build_parser, main, run_config

# ---------------------------------------------------------------------------
# Harness


def run_cli(capsys, *argv: str):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def rows_json(out: str):
    return json.loads(out)


def rows_csv(out: str):
    table = list(csv.reader(io.StringIO(out)))
    head, body = table[0], table[1:]
    return [dict(zip(head, row)) for row in body]


def store_checksum(payload: dict) -> str:
    # the documented contract: sha256 over the sorted compact dump of the
    # four data fields, never over the checksum field itself
    body = {k: payload[k] for k in ("weight", "precision", "dimension", "forms")}
    canon = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


@pytest.fixture(scope="session")
def shared_cache(tmp_path_factory):
    """One store shared by the read-only tests, so rebuilds happen once."""
    return str(tmp_path_factory.mktemp("store"))


# ---------------------------------------------------------------------------
# basis


def test_basis_reports_known_eigenvalues(capsys, shared_cache):
    code, out, err = run_cli(
        capsys, "--cache-dir", shared_cache, "basis", "--weight", "12"
    )
    assert code == 0
    (row,) = rows_json(out)
    assert row["label"] == "12.0"
    assert row["dim"] == 1
    assert row["lam_2"] == pytest.approx(-0.5303300858899106, rel=1e-12)
    assert row["lam_3"] == pytest.approx(0.5987336124929452, rel=1e-12)
    assert "dimension 1" in err


def test_basis_empty_space(capsys, shared_cache):
    code, out, _ = run_cli(
        capsys, "--cache-dir", shared_cache, "basis", "--weight", "14"
    )
    assert code == 0
    assert rows_json(out) == []


def test_second_run_reads_the_store(capsys, tmp_path, monkeypatch):
    args = ("--cache-dir", str(tmp_path), "basis", "--weight", "12")
    code, first, _ = run_cli(capsys, *args)
    assert code == 0

    def boom(weight, precision):  # pragma: no cover - must never run
        raise RuntimeError("store miss: recomputing the echelon basis")

    # a cache miss would now blow up instead of silently rebuilding
    monkeypatch.setattr("heckemass.cli.victor_miller_basis", boom)
    code, second, _ = run_cli(capsys, *args)
    assert code == 0
    assert second == first


def test_store_file_shape(capsys, tmp_path):
    run_cli(capsys, "--cache-dir", str(tmp_path), "basis", "--weight", "12")
    payload = json.loads((tmp_path / "basis-12.json").read_text())
    assert sorted(payload) == ["checksum", "dimension", "forms", "precision", "weight"]
    assert payload["weight"] == 12
    assert payload["dimension"] == 1 == len(payload["forms"])
    assert payload["checksum"] == store_checksum(payload)
    row = payload["forms"][0]
    assert len(row) == payload["precision"]
    # echelon normalization pins the leading coefficients of the cusp row
    assert row[:4] == ["0", "1", "-24", "252"]


def test_scribbled_store_heals(capsys, tmp_path):
    args = ("--cache-dir", str(tmp_path), "basis", "--weight", "12")
    code, fresh, _ = run_cli(capsys, *args)
    assert code == 0
    target = tmp_path / "basis-12.json"
    target.write_text('{"weight": 12, "forms": "gone"}')
    code, healed, err = run_cli(capsys, *args)
    assert code == 0
    assert healed == fresh
    assert "unusable" in err and "recomputing" in err
    payload = json.loads(target.read_text())
    assert payload["checksum"] == store_checksum(payload)


def test_short_store_rebuilds_quietly(capsys, tmp_path):
    args = ("--cache-dir", str(tmp_path), "basis", "--weight", "12")
    run_cli(capsys, *args, "--terms", "60")
    assert json.loads((tmp_path / "basis-12.json").read_text())["precision"] == 60
    # a valid but short store is not corruption, so no warning is due
    code, _, err = run_cli(capsys, *args, "--terms", "80")
    assert code == 0
    assert "unusable" not in err
    assert json.loads((tmp_path / "basis-12.json").read_text())["precision"] == 80


def test_cache_dir_env_and_flag(capsys, tmp_path, monkeypatch):
    env_dir = tmp_path / "from-env"
    flag_dir = tmp_path / "from-flag"
    monkeypatch.setenv("HECKEMASS_CACHE_DIR", str(env_dir))
    run_cli(capsys, "basis", "--weight", "12")
    assert (env_dir / "basis-12.json").exists()
    run_cli(capsys, "--cache-dir", str(flag_dir), "basis", "--weight", "12")
    assert (flag_dir / "basis-12.json").exists()


# ---------------------------------------------------------------------------
# output formats


def test_csv_mirrors_json(capsys, shared_cache):
    _, out_j, _ = run_cli(capsys, "--cache-dir", shared_cache, "exponents")
    _, out_c, _ = run_cli(capsys, "--out", "csv", "--cache-dir", shared_cache, "exponents")
    (row_j,) = rows_json(out_j)
    (row_c,) = rows_csv(out_c)
    assert set(row_c) == set(row_j)
    for key, val in row_j.items():
        # repr round-trips floats exactly, so the CSV cell parses back equal
        assert float(row_c[key]) == val


def test_exponent_row(capsys, shared_cache):
    code, out, _ = run_cli(capsys, "--cache-dir", shared_cache, "exponents")
    assert code == 0
    (row,) = rows_json(out)
    assert row["eta"] == pytest.approx(0.004764390888916547, rel=1e-12)
    assert row["delta"] == 0.6
    assert row["bound_exponent"] == pytest.approx(0.9952356091110834, rel=1e-12)
    assert row["delta2"] == row["bound_exponent"]
    assert row["max_residual"] < 1e-15


# ---------------------------------------------------------------------------
# validation and exit codes

_REJECTED = [
    ("mass", "--weight", "24"),  # half-weight parity
    ("amplify", "--weight", "24"),
    ("trace-check", "--weight", "13"),  # odd weight
    ("basis", "--weight", "12", "--terms", "59"),
    ("bn-scan", "--weight", "22", "--grid", "100,50"),  # not ascending
    ("bn-scan", "--weight", "22", "--grid", "8,100"),  # floor on entries
    ("amplify", "--weight", "30", "--amp-N", "3"),
    ("mass-average", "--weights", "26,24"),
]


@pytest.mark.parametrize("argv", _REJECTED, ids=lambda a: " ".join(a))
def test_bad_inputs_exit_2(capsys, tmp_path, argv):
    code, out, err = run_cli(capsys, "--cache-dir", str(tmp_path), *argv)
    assert code == 2
    assert err.startswith(("error:", "warning:")) and "error:" in err
    assert out == ""


def test_unknown_subcommand_bails_in_the_parser(capsys):
    with pytest.raises(SystemExit):
        main(["frobnicate"])


def test_tiny_tolerance_trips_the_invariant(capsys, shared_cache):
    code, out, err = run_cli(
        capsys,
        "--cache-dir", shared_cache,
        "trace-check", "--weight", "12", "--mmax", "1", "--cmax", "300",
        "--tol", "1e-20",
    )
    assert code == 1
    assert err.startswith("invariant failed:")
    # the table is still emitted before the gate fires
    (row,) = rows_json(out)
    assert row["lhs"] == pytest.approx(2.8402873751675055, rel=1e-12)


def test_defaults(shared_cache):
    ns = build_parser().parse_args(["basis", "--weight", "12"])
    cfg = run_config(ns)
    assert cfg.out == "json"
    assert cfg.grid == (100, 10_000, 1_000_000)
    assert cfg.tolerance == 1e-6
    assert cfg.jobs == 1
    assert cfg.command == "basis"


# ---------------------------------------------------------------------------
# trace-check


def test_trace_grid_path(capsys, shared_cache):
    code, out, _ = run_cli(
        capsys,
        "--cache-dir", shared_cache,
        "trace-check", "--weight", "12", "--mmax", "2",
    )
    assert code == 0
    rows = rows_json(out)
    assert [(r["m"], r["n"]) for r in rows] == [(1, 1), (1, 2), (2, 2)]
    for r in rows:
        assert r["residual"] < 1e-6
        assert r["c_max"] >= 1
        assert isinstance(r["c_max"], int)
    assert rows[0]["lhs"] == pytest.approx(2.8402873751675055, rel=1e-12)


def test_trace_threads_match_serial(capsys, shared_cache):
    tail = (
        "trace-check", "--weight", "12",
        "--mmax", "3", "--nmax", "2", "--cmax", "400",
    )
    code, serial, _ = run_cli(capsys, "--cache-dir", shared_cache, *tail)
    assert code == 0
    code, threaded, _ = run_cli(capsys, "--jobs", "2", "--cache-dir", shared_cache, *tail)
    assert code == 0
    assert threaded == serial
    assert len(rows_json(serial)) == 6


# ---------------------------------------------------------------------------
# lvalue / mass / amplify / bn-scan


def test_lvalue_rows(capsys, shared_cache):
    code, out, _ = run_cli(
        capsys, "--cache-dir", shared_cache, "lvalue", "--weight", "22"
    )
    assert code == 0
    rows = rows_json(out)
    by_kind = {r["kind"]: r for r in rows}
    assert set(by_kind) == {"degree2", "sym2", "central"}
    assert by_kind["degree2"]["value"] == pytest.approx(0.6417647377790611, rel=1e-10)
    assert by_kind["sym2"]["value"] == pytest.approx(0.9409902119169433, rel=1e-10)
    central = by_kind["central"]
    assert central["partner"] == "12.0"
    assert central["value"] == pytest.approx(0.7015237305068, rel=1e-9)
    assert central["value"] >= -1e-6
    assert central["flagged"] is False


def test_mass_row(capsys, shared_cache):
    code, out, _ = run_cli(
        capsys, "--out", "csv", "--cache-dir", shared_cache, "mass", "--weight", "22"
    )
    assert code == 0
    (row,) = rows_csv(out)
    assert float(row["mass_value"]) == pytest.approx(0.8338318059859303, rel=1e-10)
    assert float(row["scaled_mass"]) == pytest.approx(0.5351238503204014, rel=1e-10)
    assert float(row["error_estimate"]) < 1e-9


def test_mass_average_row(capsys, shared_cache):
    code, out, _ = run_cli(
        capsys, "--cache-dir", shared_cache, "mass-average", "--weights", "26"
    )
    assert code == 0
    (row,) = rows_json(out)
    assert row["weight"] == 26
    assert row["dimension"] == 1
    assert row["average"] == 0.0
    assert row["distance_to_limit"] == 2.0


def test_amplify_holds(capsys, shared_cache):
    code, out, _ = run_cli(
        capsys, "--cache-dir", shared_cache, "amplify", "--weight", "30"
    )
    assert code == 0
    (row,) = rows_json(out)
    assert row["holds"] is True
    assert row["n_cap"] == 100
    assert row["lhs"] == pytest.approx(3.109615177704672, rel=1e-10)
    assert row["rhs"] == pytest.approx(4.779392820228586, rel=1e-10)
    assert row["lhs"] <= row["rhs"]


def test_amplify_unknown_label(capsys, shared_cache):
    code, out, err = run_cli(
        capsys, "--cache-dir", shared_cache,
        "amplify", "--weight", "30", "--g0", "nope",
    )
    assert code == 2
    assert "no form labelled" in err


def test_bn_scan_zero_dimension(capsys, shared_cache):
    code, out, err = run_cli(
        capsys, "--cache-dir", shared_cache,
        "bn-scan", "--weight", "14", "--grid", "100,10000",
    )
    assert code == 0
    rows = rows_json(out)
    assert len(rows) == 8
    assert all(r["value"] == 0.0 and r["ratio"] == 0.0 for r in rows)
    assert all(r["reference"] > 0.0 for r in rows)
    assert "dimension 0" in err


def test_bn_scan_rows(capsys, shared_cache):
    code, out, _ = run_cli(
        capsys, "--cache-dir", shared_cache,
        "bn-scan", "--weight", "22", "--grid", "100,10000",
    )
    assert code == 0
    rows = rows_json(out)
    assert len(rows) == 8
    flat = {(r["u"], r["v"], r["n_cap"]): r for r in rows}
    origin_small = flat[(0.0, 0.0, 100)]
    assert origin_small["variant"] == "estimation"
    assert origin_small["value"] == pytest.approx(17.36799883003544, rel=1e-10)
    assert flat[(0.0, 0.0, 10000)]["value"] == pytest.approx(27.63387739807881, rel=1e-10)
    shifted = flat[(-0.25, 0.0, 10000)]
    assert shifted["variant"] == "epsilon"
    assert shifted["value"] == pytest.approx(64.86833861572421, rel=1e-10)
    for r in rows:
        assert r["ratio"] == pytest.approx(r["value"] / r["reference"], rel=1e-12)
