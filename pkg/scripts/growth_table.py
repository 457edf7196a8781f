"""Tabulate the growth of the absolute diagonal double sums.

Runs the scan at one weight over an ascending grid of amplifier lengths
and prints, per evaluation point, the measured sums next to their
reference curve: log log N at the bounded points, a power of N at the
strongly shifted one.  The spread (bounded regime) or fitted log-log
slope (power regime) lands in the last column.

    python3 scripts/growth_table.py --weight 22
    python3 scripts/growth_table.py --weight 22 --grid 100,1000,10000,100000
"""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass

from heckemass import b_n_growth_scan, mass_basis


@dataclass(frozen=True)
class ScanConfig:
    weight: int = 22
    grid: tuple[int, ...] = (100, 10_000, 1_000_000)
    label: str = ""

    def __post_init__(self):
        if self.weight < 4 or self.weight % 2:
            raise ValueError("weight must be even and at least 4")
        if (self.weight // 2) % 2 == 0:
            raise ValueError("half-weight must be odd for the reference family")


def run(cfg: ScanConfig) -> None:
    forms = sorted(mass_basis(cfg.weight).forms, key=lambda f: f.label)
    if not forms:
        print(f"weight {cfg.weight}: no cusp forms, nothing to scan")
        return
    g0 = forms[0]
    if cfg.label:
        g0 = next(f for f in forms if f.label == cfg.label)
    t0 = time.perf_counter()
    scan = b_n_growth_scan(g0, n_grid=cfg.grid)
    elapsed = time.perf_counter() - t0

    print(f"reference form {g0.label}, grid {cfg.grid}  ({elapsed:.1f}s)")
    print(f"{'point':>16} {'variant':>11} {'N':>9} {'value':>13} {'reference':>11} {'ratio':>9}")
    for row in scan.rows:
        point = f"({row.u:g}, {row.v:g})"
        print(
            f"{point:>16} {row.variant:>11} {row.n_cap:>9} "
            f"{row.value:>13.5f} {row.reference:>11.5f} {row.ratio:>9.4f}"
        )
    for point, spread in sorted(scan.spreads.items()):
        print(f"bounded at {point}: ratio spread {spread:.4f} (< 10 required)")
    for point, slope in sorted(scan.slopes.items()):
        limit = -0.5 - 4.0 * point[0] + 0.05
        print(f"power regime at {point}: fitted slope {slope:.4f} (limit {limit:.2f})")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--weight", type=int, default=22)
    parser.add_argument("--grid", default=None, help="comma-separated support caps")
    parser.add_argument("--label", default="", help="reference form (default first)")
    ns = parser.parse_args()
    kwargs = {"weight": ns.weight, "label": ns.label}
    if ns.grid:
        kwargs["grid"] = tuple(int(n) for n in ns.grid.split(","))
    run(ScanConfig(**kwargs))


if __name__ == "__main__":
    main()
