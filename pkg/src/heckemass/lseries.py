"""L-function evaluation for eigenforms and their symmetric squares.

Three families of values are computed here, and every public entry point
returns an ``LValueResult`` carrying the value together with a truncation
record and an explicit error estimate:

* ``l_g_special`` evaluates the degree-2 L-function of an eigenform at a
  real point right of the center, via a balanced approximate functional
  equation with a Gaussian regularizer.
* ``l_sym2_accurate`` and ``l_sym2_at_1`` evaluate the symmetric-square
  L-function at the edge point 1; the first with the functional-equation
  machinery, the second through the smoothed double sum at a finite scale
  (direct summation with exact Hecke data at small scales, a residue
  expansion at large ones).
* ``l_central`` evaluates the central value of the triple-product family
  through the weighted double sum built on ``specfun.weight_w``.

Error estimates come from explicit tail bounds and step-halving of the
contour quadrature, never from guesses.  Results that miss their target
accuracy are flagged, not discarded.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import loggamma

from .arith import divisors, factorize, mobius
from .qseries import HeckeEigenform
from .specfun import WeightFnParams, weight_w_many

__all__ = [
    "LValueResult",
    "SymSquareCoeffs",
    "sym_square_coeff",
    "l_g_special",
    "l_sym2_accurate",
    "l_sym2_at_1",
    "dirichlet_poly_approx",
    "l_central",
    "l_central_cached",
]


@dataclass
class LValueResult:
    """An L-value with provenance: how it was truncated and how far to trust it.

    ``error_estimate`` is always nonnegative and is built from computable
    quantities (tail bounds, quadrature step-halving, scale doubling).
    ``flagged`` is set when the estimate misses the accuracy target of the
    routine that produced the result; flagged values are still returned.
    """

    value: float
    truncation: dict
    error_estimate: float
    method: str
    flagged: bool = False

    def __float__(self) -> float:
        return self.value


# ---------------------------------------------------------------------------
# symmetric-square Dirichlet coefficients


class SymSquareCoeffs:
    """Memoized coefficient table for the symmetric square of an eigenform.

    ``a1(r)`` is the Dirichlet coefficient of the symmetric-square
    L-function itself; the two-index ``coeff(m, n)`` extends it by the
    Moebius-twisted product rule shared by the whole degree-3 family.
    """

    def __init__(self, form: HeckeEigenform):
        self.form = form
        self._a1: dict[int, float] = {1: 1.0}
        self._pair: dict[tuple[int, int], float] = {}

    def a1(self, r: int) -> float:
        if r < 1:
            raise ValueError("coefficient index must be positive")
        got = self._a1.get(r)
        if got is not None:
            return got
        total = 0.0
        b = 1
        while b * b <= r:
            if r % (b * b) == 0:
                a = r // (b * b)
                total += _lam_square_part(self.form, a)
            b += 1
        self._a1[r] = total
        return total

    def coeff(self, m: int, n: int) -> float:
        if m < 1 or n < 1:
            raise ValueError("coefficient indices must be positive")
        if m > n:
            m, n = n, m  # symmetric; halves the memo table
        got = self._pair.get((m, n))
        if got is not None:
            return got
        total = 0.0
        for d in divisors(math.gcd(m, n)):
            mu = mobius(d)
            if mu:
                total += mu * self.a1(m // d) * self.a1(n // d)
        self._pair[(m, n)] = total
        return total


_sym2_tables: "weakref.WeakKeyDictionary[HeckeEigenform, SymSquareCoeffs]" = (
    weakref.WeakKeyDictionary()
)


def _sym2_table(form: HeckeEigenform) -> SymSquareCoeffs:
    table = _sym2_tables.get(form)
    if table is None:
        table = SymSquareCoeffs(form)
        _sym2_tables[form] = table
    return table


def sym_square_coeff(form: HeckeEigenform, m: int, n: int) -> float:
    """Two-index symmetric-square coefficient, memoized per form."""
    return _sym2_table(form).coeff(m, n)


def _lam_square_part(form: HeckeEigenform, a: int) -> float:
    """lambda(a^2) computed prime by prime, so a^2 never gets factorized."""
    out = 1.0
    for p, e in factorize(a):
        out *= form._lam_prime_power(p, 2 * e)
    return out


# ---------------------------------------------------------------------------
# balanced approximate functional equation engine
#
# Both completed L-functions used here have the shape
#     Lambda(s) = q^s * prod_i Gamma(a_i s + b_i) * L(s),   Lambda(s) = eps * Lambda(1-s)
# with real eps = +-1, and we evaluate at a real point s0 through
#     L(s0) = sum_n c_n n^{-s0} V1(n) + eps * sum_n c_n n^{-(1-s0)} V2(n)
# where V1, V2 are contour integrals of the gamma-factor ratio against the
# even regularizer exp(u^2/4) (value 1 at the origin, Gaussian decay on
# vertical lines).  The ratio is formed in log scale so nothing overflows.

_AFE_HEIGHT = 13.0  # exp(-13^2/4) ~ 4e-19 closes the Gaussian tail
_AFE_STEP = 0.05
_AFE_CAP = 1 << 17  # hard ceiling on Dirichlet terms
_AFE_BLOCK = 512


def _deg2_gamma(weight: int) -> tuple[float, tuple[tuple[float, float], ...]]:
    return math.log(2 * math.pi), ((1.0, (weight - 1) / 2.0),)


def _sym2_gamma(weight: int) -> tuple[float, tuple[tuple[float, float], ...]]:
    return (
        1.5 * math.log(math.pi),
        ((0.5, 0.5), (0.5, (weight - 1) / 2.0), (0.5, weight / 2.0)),
    )


def _log_gamma_factor(log_q, shifts, s):
    out = -s * log_q
    for a, b in shifts:
        out = out + loggamma(a * s + b)
    return out


@lru_cache(maxsize=512)
def _afe_prefactor(log_q, shifts, w, lognorm, sigma, height, step):
    """Quadrature nodes u and weights for V(n) = sum_j pref_j * n^{-u_j}."""
    half = int(math.ceil(height / step))
    t = np.arange(-half, half + 1) * step
    u = sigma + 1j * t
    log_ratio = _log_gamma_factor(log_q, shifts, w + u) - lognorm
    pref = np.exp(log_ratio + u * u / 4.0) / u * (step / (2 * math.pi))
    pref[0] *= 0.5
    pref[-1] *= 0.5
    return u, pref


def _afe_v_block(log_q, shifts, w, lognorm, sigma, height, step, ns):
    u, pref = _afe_prefactor(log_q, shifts, w, lognorm, sigma, height, step)
    # V(n) = Re sum_j pref_j exp(-u_j log n); rows are n-values
    mat = np.exp(-np.outer(np.log(ns), u))
    return (mat @ pref).real


def _afe_eval(
    log_q,
    shifts,
    eps,
    coeff_fn,
    s0,
    *,
    sigma=None,
    height=_AFE_HEIGHT,
    step=_AFE_STEP,
    n_cap=_AFE_CAP,
):
    """Evaluate L(s0) by the balanced AFE.  Returns (value, error, truncation).

    The Dirichlet sums stop when an entire block of weighted V-values falls
    below 1e-17 against the crude coefficient bound 5*sqrt(n); with the
    Gaussian regularizer the weights decay faster than any power, so the
    recorded tail estimate is that threshold times the stopping index.
    """
    if sigma is None:
        sigma = max(1.5, s0 + 1.2)
    lognorm = float(_log_gamma_factor(log_q, shifts, s0))
    args = (log_q, shifts, sigma, height, step)

    def one_pass(h):
        total = 0.0
        n_used = n_cap
        for start in range(1, n_cap + 1, _AFE_BLOCK):
            ns = np.arange(start, min(start + _AFE_BLOCK, n_cap + 1))
            v1 = _afe_v_block(log_q, shifts, s0, lognorm, sigma, height, h, ns)
            v2 = _afe_v_block(log_q, shifts, 1.0 - s0, lognorm, sigma, height, h, ns)
            cs = np.array([coeff_fn(int(n)) for n in ns])
            nf = ns.astype(float)
            total += float(
                np.dot(cs, v1 * nf ** (-s0)) + eps * np.dot(cs, v2 * nf ** (s0 - 1.0))
            )
            weight_sup = np.max(
                (np.abs(v1) * nf ** (-s0) + np.abs(v2) * nf ** (s0 - 1.0))
                * 5.0
                * np.sqrt(nf)
            )
            if weight_sup < 1e-17 and start > 1:
                n_used = int(ns[-1])
                break
        return total, n_used

    coarse, _ = one_pass(step)
    fine, n_used = one_pass(step / 2.0)
    quad_err = abs(fine - coarse)
    tail_err = 1e-17 * n_used
    trunc = {
        "terms": n_used,
        "contour_re": sigma,
        "contour_height": height,
        "quadrature_step": step / 2.0,
    }
    return fine, quad_err + tail_err, trunc


# ---------------------------------------------------------------------------
# degree-2 values right of the center


def l_g_special(form: HeckeEigenform, s: float) -> LValueResult:
    """L(s) for an eigenform at a real point s in (1, 3].

    The target accuracy is 1e-8; a result whose tail-plus-quadrature
    estimate misses it comes back flagged.  Points at or left of 1 are
    rejected: the balanced-AFE contract here is calibrated for the region
    where the direct Dirichlet series still dominates.
    """
    if not 1.0 < s <= 3.0:
        raise ValueError("evaluation point must lie in (1, 3]")
    weight = form.weight
    eps = -1.0 if (weight // 2) % 2 else 1.0  # i^weight for even weight
    log_q, shifts = _deg2_gamma(weight)
    value, err, trunc = _afe_eval(log_q, shifts, eps, form.lam, s)
    return LValueResult(
        value=value,
        truncation=trunc,
        error_estimate=err,
        method="balanced-afe-deg2",
        flagged=err > 1e-8,
    )


# ---------------------------------------------------------------------------
# symmetric square at and around the edge


def _sym2_afe(form: HeckeEigenform, s0: float, **kw):
    log_q, shifts = _sym2_gamma(form.weight)
    table = _sym2_table(form)
    return _afe_eval(log_q, shifts, 1.0, table.a1, s0, **kw)


# right of here the reflected contour would sit so far out that its float
# noise floor swamps the (tiny) true reflected sum; the plain series is
# absolutely convergent there anyway
_SYM2_AFE_LIMIT = 2.2
_SYM2_DIRECT_TERMS = 400


def _sym2_direct_value(form: HeckeEigenform, s0: float) -> float:
    """Plain Dirichlet sum, for points well right of the critical strip.

    The coefficients are bounded by the triple divisor function, so the
    dropped tail is under log^2(N)/2 * N^(1-s0)/(s0-1); at 400 terms and
    s0 >= 3 that is below 2e-4, which is all the residue expansion needs
    from these values.
    """
    assert s0 >= 3.0
    table = _sym2_table(form)
    return sum(
        table.a1(n) * n ** (-s0) for n in range(1, _SYM2_DIRECT_TERMS + 1)
    )


def l_sym2_accurate(form: HeckeEigenform, s: float = 1.0) -> LValueResult:
    """Symmetric-square L-value by the functional-equation route.

    Evaluates at ``s`` (default the edge point 1) with the degree-3 gamma
    data; points must lie in [0, 2.2], where the balanced contours are
    numerically stable.  This is the reference evaluator the trace-formula
    and mass routines divide by; the smoothed-sum routine ``l_sym2_at_1``
    is the finite-scale object of study and carries its own bias.
    """
    s0 = float(s)
    if not 0.0 <= s0 <= _SYM2_AFE_LIMIT:
        raise ValueError("evaluation point must lie in [0, 2.2]")
    value, err, trunc = _sym2_afe(form, s0)
    return LValueResult(
        value=value,
        truncation=trunc,
        error_estimate=err,
        method="balanced-afe-sym2",
        flagged=err > 1e-8,
    )


_sym2_special: "weakref.WeakKeyDictionary[HeckeEigenform, dict]" = (
    weakref.WeakKeyDictionary()
)


def _sym2_value_cached(form: HeckeEigenform, s0: float) -> float:
    memo = _sym2_special.setdefault(form, {})
    got = memo.get(s0)
    if got is None:
        if s0 > _SYM2_AFE_LIMIT:
            got = _sym2_direct_value(form, s0)
        else:
            got, _, _ = _sym2_afe(form, s0)
        memo[s0] = got
    return got


def _sym2_continued(form: HeckeEigenform, s: float) -> float:
    """Continue the symmetric square to s <= 0 through the functional equation.

    Trivial zeros (gamma-factor poles on the right of the equation) come out
    as exact 0.0.
    """
    log_q, shifts = _sym2_gamma(form.weight)

    def gamma_real(x):
        # prod Gamma(a x + b) * q^{-x} for real x, sign included; None at a pole
        out = math.exp(-x * log_q)
        for a, b in shifts:
            arg = a * x + b
            if arg <= 0 and arg == int(arg):
                return None
            out *= math.gamma(arg)
        return out

    g_right = gamma_real(1.0 - s)
    g_left = gamma_real(s)
    if g_left is None:
        return 0.0
    assert g_right is not None, "unexpected gamma pole right of the center"
    return g_right / g_left * _sym2_value_cached(form, 1.0 - s)


_DIRECT_SCALE_LIMIT = 2000.0
_SMOOTH_CUT = 30.0  # exp(-30) ~ 9e-14 closes the smoothed tail


def _lam_square_table(form: HeckeEigenform, limit: int) -> np.ndarray:
    """lambda(d^2) for d = 1..limit as a dense float array."""
    out = np.empty(limit + 1)
    out[0] = np.nan
    prime_pow: dict[tuple[int, int], float] = {}
    for d in range(1, limit + 1):
        val = 1.0
        for p, e in factorize(d):
            got = prime_pow.get((p, e))
            if got is None:
                got = form._lam_prime_power(p, 2 * e)
                prime_pow[(p, e)] = got
            val *= got
        out[d] = val
    return out


def _smoothed_sum_direct(form: HeckeEigenform, scale: float) -> float:
    """The smoothed double sum at a given scale, by direct summation.

    Terms with d1*d2^2 > 30*scale are dropped; the exponential weight makes
    the discarded tail smaller than 1e-13 of the leading term.
    """
    cut = int(math.ceil(_SMOOTH_CUT * scale))
    lam2 = _lam_square_table(form, cut)
    total = 0.0
    d2 = 1
    while d2 * d2 <= cut:
        top = cut // (d2 * d2)
        d1 = np.arange(1, top + 1)
        weights = np.exp(-(d1 * (d2 * d2)) / scale) / (d1 * (d2 * d2))
        total += float(np.dot(lam2[1 : top + 1], weights))
        d2 += 1
    return total


def _smoothed_sum_residue(form: HeckeEigenform, scale: float) -> float:
    """The same smoothed sum at a large scale, by its residue expansion.

    Unfolding the exponential against the gamma function leaves the edge
    value plus an alternating series in negative powers of the scale whose
    coefficients are L-values at 0, -2, -4, ...; odd negative integers are
    trivial zeros and contribute nothing.
    """
    total = 0.0
    for j in range(0, 8):
        s_j = 1.0 - j
        if j == 0:
            lval = _sym2_value_cached(form, 1.0)
        elif s_j > 0:
            lval = _sym2_value_cached(form, s_j)
        else:
            lval = _sym2_continued(form, s_j)
        term = ((-1.0) ** j / math.factorial(j)) * lval * scale ** (-j)
        total += term
    return total


def _smoothed_sum(form: HeckeEigenform, scale: float) -> tuple[float, str]:
    if scale <= _DIRECT_SCALE_LIMIT:
        return _smoothed_sum_direct(form, scale), "smoothed-direct"
    return _smoothed_sum_residue(form, scale), "residue-expansion"


def l_sym2_at_1(form: HeckeEigenform, smoothing_scale: float) -> LValueResult:
    """Symmetric-square edge value through the smoothed series at one scale.

    The error estimate is the difference against a rerun at four times the
    scale; an estimate above 1e-4 flags the result.  Scales up to 2000 are
    summed directly with exact Hecke data (the coefficient table must reach
    30 times the scale); larger scales go through the residue expansion.
    """
    scale = float(smoothing_scale)
    if scale < 10.0:
        raise ValueError("smoothing scale must be at least 10")
    value, method = _smoothed_sum(form, scale)
    check, _ = _smoothed_sum(form, 4.0 * scale)
    err = abs(value - check)
    return LValueResult(
        value=value,
        truncation={"scale": scale, "comparison_scale": 4.0 * scale},
        error_estimate=err,
        method=method,
        flagged=err > 1e-4,
    )


def dirichlet_poly_approx(
    form: HeckeEigenform,
    delta1: float,
    k: int,
    scale: float | None = None,
) -> tuple[float, float]:
    """Smoothed-series approximation at scale k^delta1 and its defect.

    ``k`` must be one less than the form's weight.  The defect is measured
    against the functional-equation reference value, so it isolates the
    finite-scale bias of the smoothed series itself.  An explicit ``scale``
    overrides the power law (used when scanning fixed scales).
    """
    if k != form.weight - 1:
        raise ValueError("spectral parameter must be the weight minus one")
    x = float(scale) if scale is not None else float(k) ** float(delta1)
    if x < 2.0:
        raise ValueError("smoothing scale below 2 is outside the series' range")
    value, _ = _smoothed_sum(form, x)
    reference = _sym2_value_cached(form, 1.0)
    return value, abs(value - reference)


# ---------------------------------------------------------------------------
# central values of the triple-product family


def l_central(
    f: HeckeEigenform,
    g: HeckeEigenform,
    params: WeightFnParams | None = None,
    *,
    cutoff_mult: float = 40.0,
    sigma: float = 1.0,
    _reverse_order: bool = False,
) -> LValueResult:
    """Central value L(1/2) for the pairing of ``f`` with ``g``.

    ``g`` has even weight 2k and ``f`` must have weight k+1; the value is
    the weighted double sum over (n, m) with n*m^2 below ``cutoff_mult``
    times k^2, using the archimedean weight from ``specfun``.  The result
    is flagged when doubling the cutoff moves it by more than 1e-5, and the
    error estimate adds that shift to the summed quadrature flags of the
    weight function.  Nonnegativity is asserted down to -1e-6: the family
    has nonnegative central values, so anything below that is a bug.
    """
    if g.weight % 2:
        raise ValueError("the larger form must have even weight")
    k = g.weight // 2
    if f.weight != k + 1:
        raise ValueError("weights must pair as (k+1, 2k)")
    if params is None:
        params = WeightFnParams(k=k)
    cap = int(cutoff_mult * k * k)
    cap2 = 2 * cap  # the stability rerun extends the sum out to here
    if min(f.precision, g.precision) <= cap2:
        raise ValueError(
            "coefficient tables must reach the doubled cutoff; rebuild the "
            f"bases with precision > {cap2}"
        )
    table = _sym2_table(f)

    pairs = []
    pairs2 = []
    for n in range(1, cap2 + 1):
        m_top = math.isqrt(cap2 // n)
        for m in range(1, m_top + 1):
            (pairs if n * m * m <= cap else pairs2).append((n, m))

    if _reverse_order:
        pairs = sorted(pairs, key=lambda nm: (nm[1], nm[0]))

    unique_x = sorted({n * m * m for n, m in pairs} | {n * m * m for n, m in pairs2})
    wval, werr = weight_w_many([float(x) for x in unique_x], params, sigma=sigma)
    wmap = dict(zip(unique_x, zip(wval, werr)))

    def accumulate(chunk):
        total = 0.0
        werr_sum = 0.0
        for n, m in chunk:
            wv, we = wmap[n * m * m]
            total += g.lam(n) * table.coeff(m, n) / (math.sqrt(n) * m) * wv
            werr_sum += we
        return 2.0 * total, 2.0 * werr_sum

    value, werr_main = accumulate(pairs)
    extra, werr_extra = accumulate(pairs2)
    shift = abs(extra)
    err = shift + werr_main + werr_extra
    assert value > -1e-6, "central value violated nonnegativity"
    return LValueResult(
        value=value,
        truncation={
            "cutoff": cap,
            "pairs": len(pairs),
            "contour_height": params.contour_height,
        },
        error_estimate=err,
        method="weighted-double-sum",
        flagged=shift > 1e-5,
    )


_central_memo: "weakref.WeakKeyDictionary[HeckeEigenform, dict]" = (
    weakref.WeakKeyDictionary()
)


def l_central_cached(f: HeckeEigenform, g: HeckeEigenform) -> LValueResult:
    """Default-parameter central value, memoized on the form pair.

    The spectral-average routines evaluate the same pairing for several
    Hecke indices; the central value itself does not depend on the index,
    so one evaluation per (f, g) is enough.
    """
    per_f = _central_memo.setdefault(f, weakref.WeakKeyDictionary())
    got = per_f.get(g)
    if got is None:
        got = l_central(f, g)
        per_f[g] = got
    return got
