"""Sweep the restriction masses over the desk weights.

For each weight the script prints one row per eigenform (mass, scaled
mass, the two global L-factors, error estimate) followed by the basis
average and its distance to the limiting value 2.  Weights whose
companion space is empty report exact zeros and are kept in the table:
the dichotomy is part of the picture.

    python3 scripts/mass_sweep.py --weights 18,22,26,30,34
    python3 scripts/mass_sweep.py --json out/masses.json
"""

from __future__ import annotations

import argparse
import json
import time
from dataclasses import dataclass
from pathlib import Path

from heckemass import average_mass, mass_basis, mass_cached


@dataclass(frozen=True)
class SweepConfig:
    weights: tuple[int, ...] = (18, 22, 26, 30, 34, 38, 42)
    json_path: Path | None = None

    def __post_init__(self):
        for w in self.weights:
            if w < 4 or w % 2:
                raise ValueError(f"weight {w} is not an even weight >= 4")
            if (w // 2) % 2 == 0:
                raise ValueError(f"weight {w} has even half-weight; no lift")


def sweep(cfg: SweepConfig) -> list[dict]:
    rows = []
    for weight in cfg.weights:
        t0 = time.perf_counter()
        forms = sorted(mass_basis(weight).forms, key=lambda f: f.label)
        for g in forms:
            rep = mass_cached(g)
            rows.append(
                {
                    "weight": weight,
                    "label": rep.label,
                    "mass": rep.mass_value,
                    "scaled": rep.scaled_mass,
                    "l_three_halves": rep.l_three_halves,
                    "l_sym_square": rep.l_sym_square,
                    "error": rep.error_estimate,
                }
            )
        avg = average_mass(weight)
        elapsed = time.perf_counter() - t0
        print(f"\nweight {weight}  ({len(forms)} forms, {elapsed:.1f}s)")
        print(f"  {'label':>8} {'mass':>14} {'scaled':>14} {'err':>9}")
        for row in rows:
            if row["weight"] != weight:
                continue
            print(
                f"  {row['label']:>8} {row['mass']:>14.9f} "
                f"{row['scaled']:>14.9f} {row['error']:>9.1e}"
            )
        print(
            f"  average {avg.value:.9f}   distance to limit {avg.distance_to_limit:.6f}"
        )
    return rows


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--weights", default=None, help="comma-separated even weights")
    parser.add_argument("--json", default=None, help="also write rows to this file")
    ns = parser.parse_args()
    kwargs = {}
    if ns.weights:
        kwargs["weights"] = tuple(int(w) for w in ns.weights.split(","))
    if ns.json:
        kwargs["json_path"] = Path(ns.json)
    cfg = SweepConfig(**kwargs)
    rows = sweep(cfg)
    if cfg.json_path is not None:
        cfg.json_path.parent.mkdir(parents=True, exist_ok=True)
        cfg.json_path.write_text(json.dumps(rows, indent=2) + "\n")
        print(f"\nwrote {len(rows)} rows to {cfg.json_path}")


if __name__ == "__main__":
    main()
