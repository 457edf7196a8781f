"""Report the exponent bookkeeping behind the power saving.

Solves the equalized exponent system, prints every component with the
residuals of the equations it satisfies, and walks the margin by which
the amplified diagonal dominates the error block across the allowed
window of the length exponent.  Everything here is closed-form or a
one-dimensional root; the script exists to show the numbers side by
side rather than to compute anything new.

    python3 scripts/exponent_report.py
"""

from __future__ import annotations

from heckemass import exponent_optimizer


def main() -> None:
    sol = exponent_optimizer()
    print("equalized exponent system")
    print(f"  eta            {sol.eta:.18f}")
    print(f"  1/210          {1.0 / 210.0:.18f}")
    print(f"  delta1         {sol.delta1:.18f}")
    print(f"  27/91          {27.0 / 91.0:.18f}")
    print(f"  delta2         {sol.delta2:.18f}")
    print(f"  delta3         {sol.delta3:.18f}")
    print(f"  window         ({1.0 / 210.0:.12f}, {1.0 / 209.0:.12f})")
    print(f"  length delta   {sol.delta:.6f}")
    print(f"  bound exponent {sol.bound_exponent:.18f}")
    print(f"  1 - 1/210      {1.0 - 1.0 / 210.0:.18f}")
    print("residuals of the three equalities")
    for i, res in enumerate(sol.residuals, start=1):
        print(f"  eq{i}  {res:.3e}")
    print("domination margin -eta/2 + delta(4 eta - 2) over delta in (1/2, 1)")
    for delta in (0.51, 0.6, 0.75, 0.9, 0.99):
        margin = -0.5 * sol.eta + delta * (4.0 * sol.eta - 2.0)
        print(f"  delta {delta:.2f}: {margin:+.6f}")


if __name__ == "__main__":
    main()
