"""Spectral mass of an eigenform: the normalized norm ratio and its average.

For an eigenform g of weight 2k (k odd) the mass is assembled from three
L-factors: the degree-2 value at 3/2, the symmetric-square value at 1, and
a sum of central values over the companion basis one weight step above
half.  The companion space is empty for 2k in {18, 26}, which forces the
mass to vanish exactly; every desk weight in between gives a finite
nonnegative value.  ``scaled_mass`` multiplies the mass by the degree-2
factor; that product is the weight each form carries in the amplified
averages.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass
from functools import lru_cache

from .lseries import LValueResult, l_central, l_g_special, l_sym2_accurate
from .qseries import EigenBasis, HeckeEigenform, cusp_dim, hecke_eigenbasis

__all__ = [
    "MassReport",
    "AverageMassReport",
    "mass",
    "mass_cached",
    "mass_basis",
    "average_mass",
]

# Central-value cutoff multiple used throughout this module.  10 puts the
# doubled stability window at 20*k^2 coefficients; against the default-40
# route the assembled value moves by ~1e-12 at weight 22, far inside the
# reported error estimate, while keeping the full desk sweep under a
# minute.
_CENTRAL_CUTOFF = 10.0

# The balanced-AFE routes for the two global factors stop near 4600 terms
# at weight 42; 6001 covers every desk weight with headroom.
_MIN_PRECISION = 6001


def required_precision(weight: int, cutoff_mult: float = _CENTRAL_CUTOFF) -> int:
    """Coefficient count a weight-``weight`` basis needs for mass work."""
    k = weight // 2
    return max(2 * int(cutoff_mult * k * k) + 1, _MIN_PRECISION)


@dataclass(frozen=True)
class MassReport:
    """One form's mass with every factor that built it.

    ``central_values`` maps companion-form labels to central L-values;
    ``error_estimate`` is first-order: the relative errors of the three
    L-factors and of the central sum, added, then scaled by the value.
    """

    label: str
    weight: int
    central_values: dict
    l_three_halves: float
    l_sym_square: float
    mass_value: float
    scaled_mass: float
    error_estimate: float


@dataclass(frozen=True)
class AverageMassReport:
    """Basis-averaged mass at one weight, against the conjectural limit 2.

    Desk weights are far from the asymptotic regime, so ``distance_to_limit``
    is reported, never asserted small.
    """

    weight: int
    value: float
    masses: tuple
    distance_to_limit: float

    def __float__(self) -> float:
        return self.value


@lru_cache(maxsize=8)
def mass_basis(weight: int) -> EigenBasis:
    """Eigenbasis at the precision every mass-pipeline consumer needs."""
    return hecke_eigenbasis(weight, required_precision(weight))


@lru_cache(maxsize=8)
def _companion_basis(weight: int, precision: int) -> EigenBasis:
    return hecke_eigenbasis(weight, precision)


def mass(
    g: HeckeEigenform,
    *,
    cutoff_mult: float = _CENTRAL_CUTOFF,
    allow_even_weight: bool = False,
) -> MassReport:
    """Mass of ``g``: norm ratio of the pulled-back lift, by the spectral formula.

    The lift behind the mass exists for weight 2k with k odd, so other even
    weights are rejected; ``allow_even_weight`` evaluates the same finite
    sum anyway (exploratory only, outside the source construction — the
    companion space then has odd weight and the sum is empty).  The
    prefactor is (pi^2/15)*(12/k) divided by the two global L-factors; the
    spectral sum runs over the companion basis in sorted label order.
    """
    if g.weight % 2:
        raise ValueError("eigenforms have even weight")
    k = g.weight // 2
    if k % 2 == 0 and not allow_even_weight:
        raise ValueError(
            "mass needs weight 2 mod 4 (odd half-weight); pass "
            "allow_even_weight=True to evaluate the sum anyway"
        )

    deg2 = l_g_special(g, 1.5)
    sym2 = l_sym2_accurate(g, 1.0)
    assert deg2.value > 0.0, "degree-2 factor at 3/2 must be positive"

    dim = cusp_dim(k + 1)
    if dim == 0:
        return MassReport(
            label=g.label,
            weight=g.weight,
            central_values={},
            l_three_halves=deg2.value,
            l_sym_square=sym2.value,
            mass_value=0.0,
            scaled_mass=0.0,
            error_estimate=0.0,
        )

    cap2 = 2 * int(cutoff_mult * k * k)
    if g.precision <= cap2:
        raise ValueError(
            f"the form's coefficient table stops at {g.precision}; the "
            f"central values need more than {cap2} (see required_precision)"
        )
    companions = _companion_basis(k + 1, max(cap2 + 1, 4 * (k + 1), 60))

    centrals: dict[str, LValueResult] = {}
    for f in sorted(companions.forms, key=lambda h: h.label):
        centrals[f.label] = l_central(f, g, cutoff_mult=cutoff_mult)

    total = math.fsum(res.value for res in centrals.values())
    prefactor = (math.pi ** 2 / 15.0) * (12.0 / k) / (deg2.value * sym2.value)
    value = prefactor * total
    assert value >= -1e-6 * prefactor * dim, "mass violated nonnegativity"

    central_err = math.fsum(res.error_estimate for res in centrals.values())
    rel = (
        central_err / abs(total)
        + deg2.error_estimate / deg2.value
        + sym2.error_estimate / abs(sym2.value)
        if total != 0.0
        else central_err
    )
    return MassReport(
        label=g.label,
        weight=g.weight,
        central_values={lab: res.value for lab, res in centrals.items()},
        l_three_halves=deg2.value,
        l_sym_square=sym2.value,
        mass_value=value,
        scaled_mass=deg2.value * value,
        error_estimate=abs(value) * rel,
    )


_mass_memo: "weakref.WeakKeyDictionary[HeckeEigenform, MassReport]" = (
    weakref.WeakKeyDictionary()
)


def mass_cached(g: HeckeEigenform) -> MassReport:
    """Default-parameter ``mass``, memoized on the form object."""
    got = _mass_memo.get(g)
    if got is None:
        got = mass(g)
        _mass_memo[g] = got
    return got


def average_mass(weight: int) -> AverageMassReport:
    """Basis average 12/(2k-1) * sum of masses at the given weight.

    Builds its own basis at ``required_precision``.  The average tends to 2
    in the large-weight limit; at desk weights the distance is recorded as
    data.  Weights with an empty companion space average to exactly 0.
    """
    basis = mass_basis(weight)
    reports = tuple(
        mass_cached(g) for g in sorted(basis.forms, key=lambda h: h.label)
    )
    value = (12.0 / (weight - 1)) * math.fsum(r.mass_value for r in reports)
    return AverageMassReport(
        weight=weight,
        value=value,
        masses=reports,
        distance_to_limit=abs(value - 2.0),
    )
