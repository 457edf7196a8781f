"""Elementary multiplicative arithmetic shared by every other module.

Everything here is exact: integer in, integer (or Fraction/float for the
real-exponent divisor sums) out.  Sieves are cached at module level and only
ever grow.
"""

from __future__ import annotations

import math
from functools import lru_cache

_spf_limit = 0
_spf: list[int] = []


def _ensure_spf(n: int) -> None:
    """Grow the smallest-prime-factor sieve to cover 1..n."""
    global _spf_limit, _spf
    if n <= _spf_limit:
        return
    limit = max(n, 2 * _spf_limit, 1 << 10)
    spf = list(range(limit + 1))
    for p in range(2, int(limit ** 0.5) + 1):
        if spf[p] == p:  # p prime
            for m in range(p * p, limit + 1, p):
                if spf[m] == m:
                    spf[m] = p
    _spf = spf
    _spf_limit = limit


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization of n >= 1 as [(p, e), ...] with p ascending."""
    if n < 1:
        raise ValueError("factorize needs n >= 1")
    if n == 1:
        return []
    _ensure_spf(n)
    out: list[tuple[int, int]] = []
    while n > 1:
        p = _spf[n]
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        out.append((p, e))
    return out


def primes_up_to(n: int) -> list[int]:
    """All primes <= n, ascending."""
    if n < 2:
        return []
    _ensure_spf(n)
    return [p for p in range(2, n + 1) if _spf[p] == p]


def prime_pi(x: float) -> int:
    """pi(x) = number of primes <= x, by sieve."""
    return len(primes_up_to(int(math.floor(x))))


def mobius(n: int) -> int:
    if n < 1:
        raise ValueError("mobius needs n >= 1")
    mu = 1
    for _, e in factorize(n):
        if e > 1:
            return 0
        mu = -mu
    return mu


def divisors(n: int) -> list[int]:
    """All positive divisors of n, ascending."""
    divs = [1]
    for p, e in factorize(n):
        pk = [p ** j for j in range(e + 1)]
        divs = [d * q for d in divs for q in pk]
    return sorted(divs)


def tau_divisors(n: int) -> int:
    """Number of divisors of n."""
    t = 1
    for _, e in factorize(n):
        t *= e + 1
    return t


def sigma_alpha(n: int, alpha) -> int | float:
    """Divisor power sum sum_{d|n} d^alpha.

    Integer alpha >= 0 gives an exact int; anything else a float.
    """
    if isinstance(alpha, int) and alpha >= 0:
        s = 1
        for p, e in factorize(n):
            if alpha == 0:
                s *= e + 1
            else:
                s *= (p ** (alpha * (e + 1)) - 1) // (p ** alpha - 1)
        return s
    return float(sum(d ** alpha for d in divisors(n)))


def gcd(a: int, b: int) -> int:
    return math.gcd(a, b)


@lru_cache(maxsize=None)
def euler_phi(n: int) -> int:
    phi = n
    for p, _ in factorize(n):
        phi = phi // p * (p - 1)
    return phi


def arith(kind: str, n: int, alpha=None):
    """Dispatch used by the CLI and tests: one name, four elementary maps."""
    if kind == "mobius":
        return mobius(n)
    if kind == "sigma_alpha":
        return sigma_alpha(n, 0 if alpha is None else alpha)
    if kind == "tau_divisors":
        return tau_divisors(n)
    if kind == "gcd":
        raise ValueError("gcd needs two arguments; call arith_gcd")
    raise ValueError(f"unknown arith kind {kind!r}")


def sigma_table(alpha: int, n_max: int) -> list[int]:
    """[sigma_alpha(n) for n in 0..n_max] with sigma(0) := 0, by divisor sieve.

    Exact Python ints throughout; alpha is a nonnegative integer.
    """
    out = [0] * (n_max + 1)
    for d in range(1, n_max + 1):
        dp = d ** alpha
        for m in range(d, n_max + 1, d):
            out[m] += dp
    return out
