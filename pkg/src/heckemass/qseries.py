"""Exact q-expansions and Hecke eigenbases for level-1 modular forms.

Everything upstream of the analytic machinery lives here: integer (or
rational) q-expansions with truncation-order bookkeeping, the Eisenstein
generators, echelonized cusp-form bases, and Hecke operator matrices
diagonalized into labelled eigenforms.  All linear algebra over the
coefficient ring is exact; floating point enters only when a Hecke matrix
of dimension >= 2 is diagonalized, and then at 60 significant digits with
a residual check before anything is accepted.

Coefficient tables are plain Python ints wherever the classical theory
guarantees integrality (echelon bases, one-dimensional eigenspaces), so
downstream consumers can normalize late and lose nothing to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath

from .arith import factorize
from ._polymul import poly_mul, poly_mul_schoolbook

__all__ = [
    "QExpansion",
    "bernoulli",
    "eisenstein_series",
    "delta_series",
    "cusp_dim",
    "modular_dim",
    "victor_miller_basis",
    "hecke_image",
    "hecke_operator_matrix",
    "charpoly",
    "HeckeEigenform",
    "EigenBasis",
    "hecke_eigenbasis",
]


# ---------------------------------------------------------------------------
# q-expansions


class QExpansion:
    """A power series in q known modulo q^precision.

    ``coeffs[n]`` is the coefficient of q^n; the list always has length
    exactly ``precision``.  Entries are ints or Fractions.  Ring operations
    truncate to the smaller precision of the operands, so a product never
    pretends to know more than its inputs.
    """

    __slots__ = ("coeffs", "precision")

    def __init__(self, coeffs, precision=None):
        coeffs = list(coeffs)
        if precision is None:
            precision = len(coeffs)
        if len(coeffs) < precision:
            coeffs = coeffs + [0] * (precision - len(coeffs))
        else:
            coeffs = coeffs[:precision]
        self.coeffs = coeffs
        self.precision = precision

    def __getitem__(self, n):
        if not 0 <= n < self.precision:
            raise IndexError(
                f"coefficient of q^{n} not known at precision {self.precision}"
            )
        return self.coeffs[n]

    def __eq__(self, other):
        if not isinstance(other, QExpansion):
            return NotImplemented
        return self.precision == other.precision and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.precision, tuple(self.coeffs)))

    def truncate(self, precision):
        assert 0 < precision <= self.precision
        return QExpansion(self.coeffs[:precision], precision)

    def is_integral(self):
        return all(isinstance(c, int) for c in self.coeffs)

    def __add__(self, other):
        prec = min(self.precision, other.precision)
        return QExpansion(
            [a + b for a, b in zip(self.coeffs[:prec], other.coeffs[:prec])], prec
        )

    def __sub__(self, other):
        prec = min(self.precision, other.precision)
        return QExpansion(
            [a - b for a, b in zip(self.coeffs[:prec], other.coeffs[:prec])], prec
        )

    def __neg__(self):
        return QExpansion([-a for a in self.coeffs], self.precision)

    def scale(self, c):
        """Multiply every coefficient by the scalar c (int or Fraction)."""
        return QExpansion([c * a for a in self.coeffs], self.precision)

    def __mul__(self, other):
        if not isinstance(other, QExpansion):
            return NotImplemented
        prec = min(self.precision, other.precision)
        if self.is_integral() and other.is_integral():
            out = poly_mul(self.coeffs, other.coeffs, prec)
        else:
            out = poly_mul_schoolbook(self.coeffs[:prec], other.coeffs[:prec], prec)
        return QExpansion(out, prec)

    def __pow__(self, e):
        assert isinstance(e, int) and e >= 0
        result = QExpansion([1], self.precision)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __repr__(self):
        shown = self.coeffs[: min(6, self.precision)]
        tail = " + ..." if self.precision > 6 else ""
        return f"QExpansion({shown}{tail}, precision={self.precision})"


@lru_cache(maxsize=None)
def bernoulli(n):
    """Exact Bernoulli number B_n as a Fraction (B_1 = -1/2 convention)."""
    assert n >= 0
    if n == 0:
        return Fraction(1)
    if n == 1:
        return Fraction(-1, 2)
    if n % 2 == 1:
        return Fraction(0)
    # sum_{j=0}^{n} C(n+1, j) B_j = 0
    acc = Fraction(0)
    for j in range(n):
        acc += math.comb(n + 1, j) * bernoulli(j)
    return -acc / (n + 1)


def eisenstein_series(weight, precision):
    """Normalized Eisenstein series of even weight >= 4, constant term 1.

    The q^n coefficient is -(2*weight/B_weight) * sigma_{weight-1}(n); the
    factor is an integer for weight in {4, 6, 8, 10, 14} and a Fraction in
    general.  Integer coefficients are returned as ints.
    """
    assert weight >= 4 and weight % 2 == 0, "weight must be even and >= 4"
    assert precision >= 1
    factor = Fraction(-2 * weight) / bernoulli(weight)
    if factor.denominator == 1:
        factor = int(factor)
    # divisor-power sieve: sigma_{weight-1}(n) for n < precision
    sig = [0] * precision
    for d in range(1, precision):
        dp = d ** (weight - 1)
        for m in range(d, precision, d):
            sig[m] += dp
    coeffs = [factor * s for s in sig]
    coeffs[0] = 1
    return QExpansion(coeffs, precision)


def delta_series(precision):
    """The discriminant cusp form of weight 12, computed as (E4^3 - E6^2)/1728."""
    e4 = eisenstein_series(4, precision)
    e6 = eisenstein_series(6, precision)
    diff = e4 ** 3 - e6 ** 2
    out = []
    for c in diff.coeffs:
        q, r = divmod(c, 1728)
        assert r == 0, "E4^3 - E6^2 not divisible by 1728; arithmetic bug"
        out.append(q)
    return QExpansion(out, precision)


# ---------------------------------------------------------------------------
# dimensions and echelon bases


def cusp_dim(weight):
    """Dimension of the space of level-1 cusp forms of the given weight."""
    if weight % 2 == 1 or weight < 0:
        return 0
    d = weight // 12
    if weight % 12 == 2:
        d -= 1
    return max(0, d)


def modular_dim(weight):
    """Dimension of the full space of level-1 modular forms."""
    if weight % 2 == 1 or weight < 0:
        return 0
    if weight == 0:
        return 1
    if weight == 2:
        return 0
    return cusp_dim(weight) + 1


def _monomial_exponents(weight):
    """All (a, b) with 4a + 6b = weight, b descending; empty for odd weight."""
    out = []
    if weight % 2:
        return out
    for b in range(weight // 6, -1, -1):
        rem = weight - 6 * b
        if rem % 4 == 0:
            out.append((rem // 4, b))
    return out


def victor_miller_basis(weight, precision):
    """Echelonized integer basis of the weight-k level-1 cusp forms.

    Returns a list of d = cusp_dim(weight) expansions e_1, ..., e_d with
    e_i = q^i + O(q^(d+1)); the echelon pivots make coefficient extraction
    against this basis trivial.  Every coefficient is a Python int: the
    elimination runs over Fractions and asserts that all denominators
    cancel, which they must for level 1.
    """
    d = cusp_dim(weight)
    if d == 0:
        return []
    assert precision > d, f"need precision > {d} to echelonize weight {weight}"
    # spanning set: Delta * (monomials in E4, E6 of weight k-12);
    # multiplication by Delta is an isomorphism M_{k-12} -> S_k.
    delta = delta_series(precision)
    e4 = eisenstein_series(4, precision)
    e6 = eisenstein_series(6, precision)
    span = []
    for a, b in _monomial_exponents(weight - 12):
        span.append(delta * (e4 ** a) * (e6 ** b))
    assert len(span) == d, (weight, len(span), d)

    # invert the d x d leading block (columns q^1..q^d) exactly, then apply
    # the inverse as row combinations across the full coefficient tables.
    block = [[Fraction(span[j][i + 1]) for j in range(d)] for i in range(d)]
    inv = _invert_fraction_matrix(block)
    basis = []
    for i in range(d):
        row = [Fraction(0)] * precision
        for j in range(d):
            # block holds span columns, so the combination weights sit in
            # the transpose of its inverse
            cij = inv[j][i]
            if cij == 0:
                continue
            gj = span[j].coeffs
            for m in range(precision):
                if gj[m]:
                    row[m] += cij * gj[m]
        ints = []
        for c in row:
            assert c.denominator == 1, "echelon basis not integral; bad pivot block"
            ints.append(int(c))
        basis.append(QExpansion(ints, precision))
    for i in range(d):
        for j in range(1, d + 1):
            assert basis[i][j] == (1 if j == i + 1 else 0)
    return basis


def _invert_fraction_matrix(m):
    """Exact inverse of a square Fraction matrix by Gauss-Jordan elimination."""
    d = len(m)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(d)] for i, row in enumerate(m)]
    for col in range(d):
        piv = next((r for r in range(col, d) if aug[r][col] != 0), None)
        assert piv is not None, "singular leading block"
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for r in range(d):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[d:] for row in aug]


# ---------------------------------------------------------------------------
# Hecke action


def hecke_image(f, n, weight):
    """Apply the n-th Hecke operator to a q-expansion of the given weight.

    Coefficient m of the image is sum over d | gcd(n, m) of
    d^(weight-1) * f[m*n/d^2].  The result is known to precision
    floor(precision/n) since coefficient m consumes f up to index m*n.
    """
    assert n >= 1
    prec = f.precision // n
    assert prec >= 1, "expansion too short for this Hecke index"
    out = [0] * prec
    for m in range(prec):
        acc = 0
        for d in range(1, min(n, m) + 1):
            if n % d == 0 and m % d == 0:
                acc += d ** (weight - 1) * f[m * n // (d * d)]
        out[m] = acc
    out[0] = f[0] * _sigma_power(n, weight - 1) if f[0] else 0
    return QExpansion(out, prec)


def _sigma_power(n, e):
    return sum(d ** e for d in range(1, n + 1) if n % d == 0)


def hecke_operator_matrix(weight, n, basis=None):
    """Integer matrix of the n-th Hecke operator on the echelon cusp basis.

    Column i holds the image of basis vector e_{i+1}; entry [j][i] is the
    q^(j+1) coefficient of that image.  Needs basis precision > n * dim,
    and computes one at precision n * (dim + 1) when none is supplied.
    """
    d = cusp_dim(weight)
    if d == 0:
        return []
    if basis is None:
        basis = victor_miller_basis(weight, n * (d + 1) + 1)
    assert basis[0].precision > n * d, "basis precision too small for T_n"
    mat = [[0] * d for _ in range(d)]
    for i in range(d):
        img = hecke_image(basis[i], n, weight)
        for j in range(1, d + 1):
            mat[j - 1][i] = img[j]
    return mat


def charpoly(mat):
    """Characteristic polynomial coefficients of an integer matrix.

    Faddeev-LeVerrier over Fractions; returns [1, c_1, ..., c_d] for
    x^d + c_1 x^(d-1) + ... + c_d, all entries exact ints.
    """
    d = len(mat)
    m = [[Fraction(x) for x in row] for row in mat]
    coeffs = [Fraction(1)]
    aux = [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]  # B_0 = I
    for k in range(1, d + 1):
        # A_k = M * (A_{k-1} + c_{k-1} I); first step multiplies by I.
        if k > 1:
            for i in range(d):
                aux[i][i] += coeffs[-1]
            aux = [
                [sum(m[i][t] * aux[t][j] for t in range(d)) for j in range(d)]
                for i in range(d)
            ]
        else:
            aux = [row[:] for row in m]
        c = -sum(aux[i][i] for i in range(d)) / k
        coeffs.append(c)
    out = []
    for c in coeffs:
        assert c.denominator == 1, "charpoly of integer matrix must be integral"
        out.append(int(c))
    return out


# ---------------------------------------------------------------------------
# eigenforms


@dataclass(eq=False)  # identity semantics: forms key memo tables downstream
class HeckeEigenform:
    """A normalized Hecke eigenform with an extendable coefficient table.

    ``coeffs[n]`` is the raw Fourier coefficient a(n) with a(1) = 1; exact
    ints when the eigenspace is one-dimensional, floats otherwise.  The
    ``lam`` method returns the unitarily normalized eigenvalue
    a(n) / n^((weight-1)/2), extended multiplicatively to arbitrary n whose
    prime factors lie below the table length.
    """

    weight: int
    label: str
    coeffs: list
    exact: bool
    _lam_cache: dict = field(default_factory=dict, repr=False)

    @property
    def precision(self):
        return len(self.coeffs)

    def a(self, n):
        assert 1 <= n < self.precision, (
            f"a({n}) beyond table (precision {self.precision}); extend the basis"
        )
        return self.coeffs[n]

    def lam(self, n):
        """Normalized Hecke eigenvalue at n, as a float.

        Multiplicative over coprime factors; within a prime power the
        three-term recursion lam(p^(j+1)) = lam(p)lam(p^j) - lam(p^(j-1))
        extends beyond the stored table, so only lam(p) itself needs a
        stored coefficient.
        """
        assert n >= 1
        if n == 1:
            return 1.0
        got = self._lam_cache.get(n)
        if got is not None:
            return got
        out = 1.0
        for p, e in factorize(n):
            out *= self._lam_prime_power(p, e)
        self._lam_cache[n] = out
        return out

    def _lam_prime_power(self, p, e):
        key = (p, e)
        got = self._lam_cache.get(key)
        if got is not None:
            return got
        if p >= self.precision:
            raise ValueError(
                f"lam({p}^{e}) needs a({p}); table stops at {self.precision}. "
                "Extend the eigenbasis to a larger precision."
            )
        lp = self.coeffs[p] / p ** ((self.weight - 1) / 2)
        prev, cur = 1.0, lp
        for _ in range(e - 1):
            prev, cur = cur, lp * cur - prev
        self._lam_cache[key] = cur
        return cur

    def to_payload(self):
        return {
            "weight": self.weight,
            "label": self.label,
            "exact": self.exact,
            "coeffs": [str(c) if self.exact else float(c) for c in self.coeffs],
        }

    @classmethod
    def from_payload(cls, payload):
        exact = bool(payload["exact"])
        conv = (lambda s: int(s)) if exact else float
        return cls(
            weight=int(payload["weight"]),
            label=str(payload["label"]),
            coeffs=[conv(c) for c in payload["coeffs"]],
            exact=exact,
        )


@dataclass
class EigenBasis:
    """The full Hecke eigenbasis of a level-1 cusp space, sorted by lam(2)."""

    weight: int
    forms: list

    @property
    def dim(self):
        return len(self.forms)

    @property
    def precision(self):
        return min((f.precision for f in self.forms), default=0)

    def __iter__(self):
        return iter(self.forms)

    def __getitem__(self, i):
        return self.forms[i]

    def extend(self, precision):
        """Return a basis whose coefficient tables reach at least precision."""
        if self.precision >= precision:
            return self
        return hecke_eigenbasis(self.weight, precision)

    def to_payload(self):
        return {
            "weight": self.weight,
            "precision": self.precision,
            "dimension": self.dim,
            "forms": [f.to_payload() for f in self.forms],
        }

    @classmethod
    def from_payload(cls, payload):
        forms = [HeckeEigenform.from_payload(p) for p in payload["forms"]]
        basis = cls(weight=int(payload["weight"]), forms=forms)
        assert basis.dim == int(payload["dimension"])
        return basis


def hecke_eigenbasis(weight, precision=None, *, echelon=None):
    """Diagonalize the Hecke action on the weight-k level-1 cusp forms.

    For a one-dimensional space the echelon basis vector is already the
    eigenform and stays exact.  Otherwise the T_2 matrix is diagonalized:
    characteristic polynomial exactly, roots via mpmath at 60 digits,
    eigenvectors by elimination, and each (eigenvalue, vector) pair must
    pass a residual check at 1e-20 relative before use.  Coincident T_2
    eigenvalues would make the labelling ill-defined and raise instead
    (they never occur at level 1 in any known range).

    ``echelon`` short-circuits the integer basis construction with rows
    built earlier (the persistence layer feeds cached ones back in); the
    rows must be the echelonized basis of this same space, with tables at
    least ``precision`` long.  The eigen checks downstream still apply, so
    rows from a stale or foreign space fail loudly rather than silently.

    Forms are sorted by lam(2) ascending and labelled "<weight>.<index>".
    """
    d = cusp_dim(weight)
    if precision is None:
        if echelon:
            precision = min(f.precision for f in echelon)
        else:
            precision = max(60, 4 * weight)
    if d == 0:
        return EigenBasis(weight=weight, forms=[])
    precision = max(precision, 2 * (d + 1) + 2)
    if echelon is None:
        basis = victor_miller_basis(weight, precision)
    else:
        assert len(echelon) == d, "echelon row count must match the dimension"
        assert all(f.precision >= precision for f in echelon), (
            "echelon rows shorter than the requested table"
        )
        basis = echelon

    if d == 1:
        f = HeckeEigenform(weight=weight, label=f"{weight}.0",
                           coeffs=basis[0].coeffs[:], exact=True)
        # sanity: echelon vector must actually be an eigenvector of T_2
        img = hecke_image(basis[0], 2, weight)
        a2 = basis[0][2]
        for m in range(1, img.precision):
            assert img[m] == a2 * basis[0][m], "one-dimensional space not eigen"
        return EigenBasis(weight=weight, forms=[f])

    mat = hecke_operator_matrix(weight, 2, basis)
    poly = charpoly(mat)
    with mpmath.workdps(60):
        roots = mpmath.polyroots([mpmath.mpf(c) for c in poly], maxsteps=200,
                                 extraprec=120)
        eigs = []
        for r in roots:
            assert abs(mpmath.im(r)) < mpmath.mpf(10) ** -30, (
                "complex T_2 eigenvalue on a cusp space; arithmetic bug"
            )
            eigs.append(mpmath.re(r))
        scale = max(abs(mpmath.mpf(x)) for row in mat for x in row) + 1
        for i in range(d):
            for j in range(i + 1, d):
                if abs(eigs[i] - eigs[j]) < scale * mpmath.mpf(10) ** -30:
                    raise ArithmeticError(
                        f"coincident T_2 eigenvalues in weight {weight}; "
                        "labelling by lam(2) is ill-defined"
                    )
        forms = []
        for ev in eigs:
            vec = _eigenvector(mat, ev, d)
            assert abs(vec[0]) > mpmath.mpf(10) ** -20, "eigenform with a(1) = 0"
            vec = [x / vec[0] for x in vec]  # a(1) = sum v_i e_i[1] = v_1
            residual = mpmath.mpf(0)
            for i in range(d):
                row = sum(mpmath.mpf(mat[i][j]) * vec[j] for j in range(d))
                residual = max(residual, abs(row - ev * vec[i]))
            vnorm = max(abs(x) for x in vec)
            assert residual / (scale * vnorm) < mpmath.mpf(10) ** -20, (
                "eigenvector residual too large"
            )
            coeffs = [0.0] * precision
            for m in range(precision):
                acc = mpmath.mpf(0)
                for i in range(d):
                    c = basis[i][m]
                    if c:
                        acc += vec[i] * c
                coeffs[m] = float(acc)
            lam2 = coeffs[2] / 2 ** ((weight - 1) / 2)
            forms.append((lam2, coeffs))
    forms.sort(key=lambda t: t[0])
    out = [
        HeckeEigenform(weight=weight, label=f"{weight}.{i}", coeffs=c, exact=False)
        for i, (_, c) in enumerate(forms)
    ]
    return EigenBasis(weight=weight, forms=out)


def _eigenvector(mat, ev, d):
    """Nullspace vector of (mat - ev*I) by elimination with partial pivoting."""
    a = [[mpmath.mpf(mat[i][j]) - (ev if i == j else 0) for j in range(d)]
         for i in range(d)]
    piv_cols = []
    row = 0
    for col in range(d):
        piv, best = None, mpmath.mpf(0)
        for r in range(row, d):
            if abs(a[r][col]) > best:
                piv, best = r, abs(a[r][col])
        # threshold relative to the matrix scale: below it the column is free
        if piv is None or best < mpmath.mpf(10) ** -35 * (1 + abs(ev)):
            continue
        a[row], a[piv] = a[piv], a[row]
        inv = 1 / a[row][col]
        a[row] = [x * inv for x in a[row]]
        for r in range(d):
            if r != row and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[row])]
        piv_cols.append(col)
        row += 1
    free = [c for c in range(d) if c not in piv_cols]
    assert free, "no free column: ev is not an eigenvalue to working precision"
    vec = [mpmath.mpf(0)] * d
    vec[free[0]] = mpmath.mpf(1)
    for r, col in enumerate(piv_cols):
        vec[col] = -a[r][free[0]]
    return vec
