"""Command-line front end: configuration, eigenbasis persistence, tabular output.

Every command validates its inputs into a ``RunConfig`` before any
computation starts, emits a fixed-column table on stdout (JSON or CSV,
mirroring each other field for field), and exits 0 exactly when every
invariant asserted by the invoked pipeline held.  Human-oriented notes go
to stderr so stdout stays machine-readable.

Persistence covers the expensive half of a basis build: the echelonized
integer coefficient rows are stored one file per weight, every coefficient
a decimal string, with a checksum over the canonical payload.  Loading
feeds the rows back into the diagonalization step, which reproduces the
eigenforms bit for bit; a corrupt file is reported on stderr, recomputed,
and overwritten.  All file writes happen on the main thread, before any
worker pool starts.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

# names, not the submodule: the package root re-exports a function called
# `mass`, which shadows the module attribute of the same name
from .mass import _companion_basis, average_mass, mass_basis, required_precision
from .mass import mass as mass_report
from .amplifier import (
    amplifier_coeffs,
    b_n_growth_scan,
    exponent_optimizer,
    lower_bound_check,
)
from .lseries import l_central, l_g_special, l_sym2_accurate
from .qseries import QExpansion, cusp_dim, hecke_eigenbasis, victor_miller_basis
from .trace import trace_check, trace_check_grid

__all__ = ["RunConfig", "main", "run_config"]

_ENV_CACHE = "HECKEMASS_CACHE_DIR"
_LAM_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19)


def default_cache_dir() -> Path:
    base = os.environ.get("XDG_DATA_HOME")
    root = Path(base) if base else Path.home() / ".local" / "share"
    return root / "heckemass"


@dataclass(frozen=True)
class RunConfig:
    """Checked inputs for one command invocation.

    Built through ``run_config``, which rejects anything a module
    precondition would reject later, so failures happen before work starts.
    """

    command: str
    weight: int
    weights: tuple
    terms: int
    c_max: int
    m_max: int
    n_max: int
    amp_n: int
    grid: tuple
    g0: str
    tolerance: float
    out: str
    cache_dir: Path
    jobs: int


def run_config(ns: argparse.Namespace) -> RunConfig:
    weight = getattr(ns, "weight", None)
    if weight is not None and (weight < 4 or weight % 2):
        raise ValueError("--weight must be even and at least 4")
    weights = tuple(getattr(ns, "weights", ()) or ())
    for w in weights:
        if w < 4 or w % 2:
            raise ValueError("--weights entries must be even and at least 4")
    terms = getattr(ns, "terms", None)
    if terms is not None and terms < 60:
        raise ValueError("--terms below 60 serves no command")
    c_max = getattr(ns, "cmax", None)
    if c_max is not None and c_max < 1:
        raise ValueError("--cmax must be positive")
    m_max = getattr(ns, "mmax", None) or 12
    n_max = getattr(ns, "nmax", None) or m_max
    if m_max < 1 or n_max < 1:
        raise ValueError("index bounds must be positive")
    amp_n = getattr(ns, "amp_n", None) or 100
    if amp_n < 4:
        raise ValueError("--amp-N below 4 leaves an empty amplifier")
    grid = getattr(ns, "grid", None)
    grid = tuple(grid) if grid else (100, 10_000, 1_000_000)
    if any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 16:
        raise ValueError("--grid must be ascending, all entries at least 16")
    tolerance = getattr(ns, "tol", None)
    if tolerance is None:
        tolerance = 1e-6
    if not tolerance > 0.0:
        raise ValueError("--tol must be positive")
    out = getattr(ns, "out", None) or "json"
    if out not in ("json", "csv"):
        raise ValueError("--out must be json or csv")
    cache_dir = getattr(ns, "cache_dir", None) or os.environ.get(_ENV_CACHE)
    cache_dir = Path(cache_dir) if cache_dir else default_cache_dir()
    jobs = getattr(ns, "jobs", None) or 1
    if jobs < 1:
        raise ValueError("--jobs must be at least 1")
    return RunConfig(
        command=ns.command,
        weight=weight if weight is not None else 0,
        weights=weights,
        terms=terms if terms is not None else 0,
        c_max=c_max if c_max is not None else 0,
        m_max=m_max,
        n_max=n_max,
        amp_n=amp_n,
        grid=grid,
        g0=getattr(ns, "g0", None) or "",
        tolerance=tolerance,
        out=out,
        cache_dir=cache_dir,
        jobs=jobs,
    )


# ---------------------------------------------------------------------------
# Eigenbasis persistence


def _cache_path(cfg: RunConfig, weight: int) -> Path:
    return cfg.cache_dir / f"basis-{weight}.json"


def _checksum(payload: dict) -> str:
    body = {key: payload[key] for key in ("weight", "precision", "dimension", "forms")}
    canon = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _write_cache(path: Path, weight: int, rows, precision: int) -> None:
    payload = {
        "weight": weight,
        "precision": precision,
        "dimension": len(rows),
        "forms": [[str(c) for c in row.coeffs] for row in rows],
    }
    payload["checksum"] = _checksum(payload)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n")


def _read_cache(path: Path, weight: int):
    """Cached echelon rows and their length, or None after a stderr warning."""
    try:
        payload = json.loads(path.read_text())
        if payload["weight"] != weight:
            raise ValueError("weight mismatch")
        if payload["checksum"] != _checksum(payload):
            raise ValueError("checksum mismatch")
        precision = int(payload["precision"])
        if int(payload["dimension"]) != len(payload["forms"]):
            raise ValueError("dimension mismatch")
        rows = []
        for row in payload["forms"]:
            if len(row) != precision:
                raise ValueError("row length mismatch")
            rows.append(QExpansion([int(s) for s in row], precision))
        return rows, precision
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(
            f"warning: eigenbasis cache {path} unusable ({exc}); recomputing",
            file=sys.stderr,
        )
        return None


def load_basis(cfg: RunConfig, weight: int, precision: int):
    """Eigenbasis through the on-disk store, rebuilding what is missing or stale."""
    precision = max(precision, 60)
    if cusp_dim(weight) == 0:
        return hecke_eigenbasis(weight, precision)
    path = _cache_path(cfg, weight)
    rows = None
    if path.exists():
        got = _read_cache(path, weight)
        if got is not None and got[1] >= precision:
            rows = got[0]
    if rows is None:
        rows = victor_miller_basis(weight, precision)
        _write_cache(path, weight, rows, precision)
    return hecke_eigenbasis(weight, rows[0].precision, echelon=rows)


# ---------------------------------------------------------------------------
# Output


def _emit(cfg: RunConfig, columns, rows) -> None:
    table = [{col: row[col] for col in columns} for row in rows]
    if cfg.out == "json":
        sys.stdout.write(json.dumps(table, indent=2) + "\n")
        return
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in table:
        cells = []
        for col in columns:
            val = row[col]
            if isinstance(val, bool):
                cells.append("true" if val else "false")
            elif isinstance(val, float):
                cells.append(repr(val))
            else:
                cells.append(str(val))
        writer.writerow(cells)
    sys.stdout.write(buf.getvalue())


def _note(text: str) -> None:
    print(text, file=sys.stderr)


# ---------------------------------------------------------------------------
# Commands


def cmd_basis(cfg: RunConfig) -> None:
    precision = cfg.terms or max(60, 4 * cfg.weight)
    basis = load_basis(cfg, cfg.weight, precision)
    _note(f"weight {cfg.weight}: dimension {basis.dim}")
    columns = ["weight", "label", "dim"] + [f"lam_{p}" for p in _LAM_PRIMES]
    rows = []
    for f in basis.forms:
        row = {"weight": cfg.weight, "label": f.label, "dim": basis.dim}
        for p in _LAM_PRIMES:
            row[f"lam_{p}"] = f.lam(p)
        rows.append(row)
    _emit(cfg, columns, rows)


def _trace_rows(cfg: RunConfig):
    from .trace import _spectral_precision

    basis = None
    if cusp_dim(cfg.weight) > 0:
        basis = load_basis(cfg, cfg.weight, _spectral_precision(cfg.weight))
    if cfg.c_max == 0 and cfg.m_max == cfg.n_max:
        return trace_check_grid(cfg.weight, cfg.m_max, basis=basis)
    pairs = [
        (m, n)
        for m in range(1, cfg.m_max + 1)
        for n in range(1, cfg.n_max + 1)
    ]
    c_max = cfg.c_max or None
    if basis is not None and pairs:
        # warm the per-form symmetric-square values on the main thread so
        # worker threads only read caches
        trace_check(cfg.weight, 1, 1, c_max=c_max, basis=basis)
    if cfg.jobs == 1:
        return [trace_check(cfg.weight, m, n, c_max=c_max, basis=basis) for m, n in pairs]
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(
            pool.map(lambda p: trace_check(cfg.weight, p[0], p[1], c_max=c_max, basis=basis), pairs)
        )


def cmd_trace_check(cfg: RunConfig) -> None:
    reports = _trace_rows(cfg)
    columns = ["weight", "m", "n", "lhs", "rhs", "residual", "c_max", "tail_estimate"]
    # the grid path hands back numpy scalars; the table wants builtins
    rows = [
        {
            "weight": r.weight,
            "m": r.pair[0],
            "n": r.pair[1],
            "lhs": float(r.lhs),
            "rhs": float(r.rhs),
            "residual": float(r.residual),
            "c_max": int(r.c_max),
            "tail_estimate": float(r.tail_estimate),
        }
        for r in reports
    ]
    _emit(cfg, columns, rows)
    worst = max((r.residual for r in reports), default=0.0)
    assert worst < cfg.tolerance, (
        f"identity residual {worst:.3e} at weight {cfg.weight} exceeds {cfg.tolerance:.1e}"
    )


def cmd_lvalue(cfg: RunConfig) -> None:
    basis = load_basis(cfg, cfg.weight, required_precision(cfg.weight))
    k = cfg.weight // 2
    cap2 = 2 * int(10.0 * k * k)
    companions = _companion_basis(k + 1, max(cap2 + 1, 4 * (k + 1), 60))
    columns = ["weight", "label", "kind", "partner", "s", "value", "error_estimate", "method", "flagged"]
    rows = []
    for g in sorted(basis.forms, key=lambda f: f.label):
        for kind, res, s in (
            ("degree2", l_g_special(g, 1.5), 1.5),
            ("sym2", l_sym2_accurate(g, 1.0), 1.0),
        ):
            rows.append(
                {
                    "weight": cfg.weight,
                    "label": g.label,
                    "kind": kind,
                    "partner": "",
                    "s": s,
                    "value": res.value,
                    "error_estimate": res.error_estimate,
                    "method": res.method,
                    "flagged": res.flagged,
                }
            )
        for f in sorted(companions.forms, key=lambda h: h.label):
            res = l_central(f, g, cutoff_mult=10.0)
            rows.append(
                {
                    "weight": cfg.weight,
                    "label": g.label,
                    "kind": "central",
                    "partner": f.label,
                    "s": 0.5,
                    # the double-sum route hands back numpy scalars
                    "value": float(res.value),
                    "error_estimate": float(res.error_estimate),
                    "method": res.method,
                    "flagged": bool(res.flagged),
                }
            )
    _emit(cfg, columns, rows)
    low = min((r["value"] for r in rows if r["kind"] == "central"), default=0.0)
    assert low >= -1e-6, f"central value {low:.3e} below the nonnegativity floor"


def _mass_parity(weight: int) -> None:
    # reject before any basis work; mirrors the mass module's precondition
    if weight % 4 != 2:
        raise ValueError(
            f"weight {weight} has even half-weight; the mass pipeline needs "
            "weight 2 mod 4"
        )


def cmd_mass(cfg: RunConfig) -> None:
    _mass_parity(cfg.weight)
    basis = load_basis(cfg, cfg.weight, required_precision(cfg.weight))
    columns = [
        "weight",
        "label",
        "mass_value",
        "scaled_mass",
        "l_three_halves",
        "l_sym_square",
        "error_estimate",
    ]
    rows = []
    for g in sorted(basis.forms, key=lambda f: f.label):
        report = mass_report(g)
        rows.append(
            {
                "weight": report.weight,
                "label": report.label,
                "mass_value": report.mass_value,
                "scaled_mass": report.scaled_mass,
                "l_three_halves": report.l_three_halves,
                "l_sym_square": report.l_sym_square,
                "error_estimate": report.error_estimate,
            }
        )
    _emit(cfg, columns, rows)


def cmd_mass_average(cfg: RunConfig) -> None:
    weights = cfg.weights or ((cfg.weight,) if cfg.weight else ())
    if not weights:
        raise ValueError("mass-average needs --weights")
    for w in weights:
        # reject the whole batch before computing any entry of it
        _mass_parity(w)
    columns = ["weight", "dimension", "average", "distance_to_limit"]
    rows = []
    for w in weights:
        report = average_mass(w)
        rows.append(
            {
                "weight": report.weight,
                "dimension": len(report.masses),
                "average": report.value,
                "distance_to_limit": report.distance_to_limit,
            }
        )
    _emit(cfg, columns, rows)


def _pick_form(forms, label: str):
    if not label:
        return forms[0]
    for f in forms:
        if f.label == label:
            return f
    raise ValueError(f"no form labelled {label!r} at this weight")


def cmd_amplify(cfg: RunConfig) -> None:
    _mass_parity(cfg.weight)
    forms = mass_basis(cfg.weight).forms
    if not forms:
        raise ValueError(f"no cusp forms at weight {cfg.weight}")
    g0 = _pick_form(forms, cfg.g0)
    got = lower_bound_check(cfg.weight, g0, cfg.amp_n)
    columns = ["weight", "n_cap", "g0", "lhs", "rhs", "holds"]
    _emit(
        cfg,
        columns,
        [
            {
                "weight": cfg.weight,
                "n_cap": cfg.amp_n,
                "g0": g0.label,
                "lhs": got.lhs,
                "rhs": got.rhs,
                "holds": got.holds,
            }
        ],
    )
    assert got.holds, (
        f"drop-term bound failed at weight {cfg.weight}, n_cap {cfg.amp_n}: "
        f"{got.lhs!r} > {got.rhs!r}"
    )


def cmd_bn_scan(cfg: RunConfig) -> None:
    columns = ["u", "v", "variant", "n_cap", "value", "reference", "ratio"]
    if cusp_dim(cfg.weight) == 0:
        # no reference form, no amplifier: the sums are identically zero
        _note(f"weight {cfg.weight}: dimension 0, emitting zero rows")
        points = ((0.0, 0.0), (-0.005, 0.01), (-0.25, 0.0), (-0.6, 0.0))
        rows = []
        for u, v in points:
            variant = "estimation" if u == 0.0 and v == 0.0 else "epsilon"
            for n in cfg.grid:
                ref = float(n) ** (-0.5 - 4.0 * u) if u < -0.5 else math.log(math.log(n))
                rows.append(
                    {"u": u, "v": v, "variant": variant, "n_cap": n,
                     "value": 0.0, "reference": ref, "ratio": 0.0}
                )
        _emit(cfg, columns, rows)
        return
    precision = max(60, 4 * cfg.weight, math.isqrt(max(cfg.grid)) + 2)
    basis = load_basis(cfg, cfg.weight, precision)
    g0 = _pick_form(basis.forms, cfg.g0)
    scan = b_n_growth_scan(g0, n_grid=cfg.grid)
    rows = [
        {
            "u": r.u,
            "v": r.v,
            "variant": r.variant,
            "n_cap": r.n_cap,
            "value": r.value,
            "reference": r.reference,
            "ratio": r.ratio,
        }
        for r in scan.rows
    ]
    _emit(cfg, columns, rows)


def cmd_exponents(cfg: RunConfig) -> None:
    sol = exponent_optimizer()
    columns = ["eta", "delta1", "delta2", "delta3", "delta", "bound_exponent", "max_residual"]
    _emit(
        cfg,
        columns,
        [
            {
                "eta": sol.eta,
                "delta1": sol.delta1,
                "delta2": sol.delta2,
                "delta3": sol.delta3,
                "delta": sol.delta,
                "bound_exponent": sol.bound_exponent,
                "max_residual": max(sol.residuals),
            }
        ],
    )


_COMMANDS = {
    "basis": cmd_basis,
    "trace-check": cmd_trace_check,
    "lvalue": cmd_lvalue,
    "mass": cmd_mass,
    "mass-average": cmd_mass_average,
    "amplify": cmd_amplify,
    "bn-scan": cmd_bn_scan,
    "exponents": cmd_exponents,
}


def _int_list(text: str):
    return tuple(int(part) for part in text.split(",") if part)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heckemass",
        description="Eigenform bases, trace-identity checks, L-values, "
        "spectral masses, and amplified averages at level 1.",
    )
    parser.add_argument("--out", choices=("json", "csv"), help="output format (default json)")
    parser.add_argument("--cache-dir", help=f"eigenbasis cache directory (env {_ENV_CACHE})")
    parser.add_argument("--jobs", type=int, help="worker threads for independent rows")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("basis", help="build or load an eigenbasis, print eigenvalue rows")
    p.add_argument("--weight", type=int, required=True)
    p.add_argument("--terms", type=int, help="coefficient table length")

    p = sub.add_parser("trace-check", help="verify the spectral identity on an index grid")
    p.add_argument("--weight", type=int, required=True)
    p.add_argument("--mmax", type=int, help="largest first index (default 12)")
    p.add_argument("--nmax", type=int, help="largest second index (default --mmax)")
    p.add_argument("--cmax", type=int, help="modulus cutoff override")
    p.add_argument("--tol", type=float, help="residual tolerance (default 1e-6)")

    p = sub.add_parser("lvalue", help="L-values for every form at a weight")
    p.add_argument("--weight", type=int, required=True)

    p = sub.add_parser("mass", help="mass reports for every form at a weight")
    p.add_argument("--weight", type=int, required=True)

    p = sub.add_parser("mass-average", help="basis-averaged masses")
    p.add_argument("--weights", type=_int_list, required=True, help="comma-separated weights")

    p = sub.add_parser("amplify", help="drop-term lower bound for the amplified average")
    p.add_argument("--weight", type=int, required=True)
    p.add_argument("--amp-N", "--N", dest="amp_n", type=int, help="amplifier length (default 100)")
    p.add_argument("--g0", help="reference form label (default first)")

    p = sub.add_parser("bn-scan", help="growth scan of the diagonal double sums")
    p.add_argument("--weight", type=int, required=True)
    p.add_argument("--grid", type=_int_list, help="comma-separated support sizes")
    p.add_argument("--g0", help="reference form label (default first)")

    sub.add_parser("exponents", help="solve the exponent system for the power saving")
    return parser


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = run_config(ns)
        _COMMANDS[cfg.command](cfg)
    except AssertionError as exc:
        print(f"invariant failed: {exc}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
