"""Exact dense integer polynomial multiplication.

The hot path packs coefficient lists into single big integers (Kronecker
substitution) and lets GMP's multiplication do the work; that keeps 1e5-term
q-expansion products in the sub-second range where schoolbook convolution in
Python would take minutes.  Schoolbook stays available as the reference
implementation for tests.
"""

from __future__ import annotations

import gmpy2


def poly_mul_schoolbook(a: list[int], b: list[int], prec: int) -> list[int]:
    """Reference O(n^2) convolution, truncated to `prec` coefficients."""
    la, lb = min(len(a), prec), min(len(b), prec)
    out = [0] * prec
    for i in range(la):
        ai = a[i]
        if ai == 0:
            continue
        for j in range(min(lb, prec - i)):
            out[i + j] += ai * b[j]
    return out


def _pack_mul(a: list[int], b: list[int], bits: int) -> list[int]:
    pa = gmpy2.pack(a, bits)
    pb = gmpy2.pack(b, bits)
    return gmpy2.unpack(pa * pb, bits)


def poly_mul(a: list[int], b: list[int], prec: int) -> list[int]:
    """Product of integer coefficient lists, truncated to `prec` terms.

    Signed input is handled by splitting into positive/negative parts, since
    the packed representation needs nonnegative slots.
    """
    la, lb = min(len(a), prec), min(len(b), prec)
    a = a[:la]
    b = b[:lb]
    if la == 0 or lb == 0:
        return [0] * prec
    ma = max(abs(c) for c in a)
    mb = max(abs(c) for c in b)
    if ma == 0 or mb == 0:
        return [0] * prec
    if la * lb <= 4096:
        out = poly_mul_schoolbook(a, b, prec)
        return out + [0] * (prec - len(out))

    # Slot width: every convolution coefficient of the split (nonnegative)
    # parts is < min(la, lb) * ma * mb, plus one bit of headroom.
    bits = (min(la, lb) * ma * mb).bit_length() + 1

    a_pos = [c if c > 0 else 0 for c in a]
    a_neg = [-c if c < 0 else 0 for c in a]
    b_pos = [c if c > 0 else 0 for c in b]
    b_neg = [-c if c < 0 else 0 for c in b]
    any_an = any(a_neg)
    any_bn = any(b_neg)

    # The four part-products can unpack to different limb counts (trailing
    # zero limbs are trimmed), so accumulate into a fixed-size buffer.
    out = [0] * (la + lb)
    pp = _pack_mul(a_pos, b_pos, bits)
    for i, c in enumerate(pp):
        out[i] += int(c)
    if any_an and any_bn:
        nn = _pack_mul(a_neg, b_neg, bits)
        for i, c in enumerate(nn):
            out[i] += int(c)
    if any_an:
        np_ = _pack_mul(a_neg, b_pos, bits)
        for i, c in enumerate(np_):
            out[i] -= int(c)
    if any_bn:
        pn = _pack_mul(a_pos, b_neg, bits)
        for i, c in enumerate(pn):
            out[i] -= int(c)

    out = out[:prec]
    return out + [0] * (prec - len(out))
