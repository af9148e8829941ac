"""Directed rounding helpers for float64 arrays.

Addition and multiplication use error-free transformations (TwoSum and
Dekker's TwoProduct), so a result is widened only when the float operation
was actually inexact.  Library transcendental functions are not correctly
rounded; their results are widened by a fixed number of ulps instead.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1
_INF = np.inf


def _down(x, err):
    mask = err < 0
    if not np.isfinite(err).all():
        mask |= ~np.isfinite(err)
    return np.where(mask, np.nextafter(x, -_INF), x)


def _up(x, err):
    mask = err > 0
    if not np.isfinite(err).all():
        mask |= ~np.isfinite(err)
    return np.where(mask, np.nextafter(x, _INF), x)


def two_sum(a, b):
    s = a + b
    bb = s - a
    with np.errstate(invalid="ignore"):
        err = (a - (s - bb)) + (b - bb)
    return s, err


def _split(a):
    with np.errstate(over="ignore", invalid="ignore"):
        c = _SPLITTER * a
        hi = c - (c - a)
    return hi, a - hi


def _prod_err(a, ah, al, b, bh, bl):
    p = a * b
    with np.errstate(invalid="ignore", over="ignore"):
        err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    # zero products are exact even when a factor is infinite
    return p, np.where(p == 0, 0.0, err)


def two_prod(a, b):
    return _prod_err(a, *_split(a), b, *_split(b))


def add_down(a, b):
    s, e = two_sum(np.asarray(a, float), np.asarray(b, float))
    return _down(s, e)


def add_up(a, b):
    s, e = two_sum(np.asarray(a, float), np.asarray(b, float))
    return _up(s, e)


def sub_down(a, b):
    return add_down(a, -np.asarray(b, float))


def sub_up(a, b):
    return add_up(a, -np.asarray(b, float))


def mul_down(a, b):
    p, e = two_prod(np.asarray(a, float), np.asarray(b, float))
    return _down(p, e)


def mul_up(a, b):
    p, e = two_prod(np.asarray(a, float), np.asarray(b, float))
    return _up(p, e)


def widen(lo, hi, ulps: int = 2):
    """Push [lo, hi] outward by `ulps` units in the last place."""
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    for _ in range(ulps):
        lo = np.nextafter(lo, -_INF)
        hi = np.nextafter(hi, _INF)
    return lo, hi


def interval_mul(alo, ahi, blo, bhi):
    """Outward-rounded product of interval arrays [alo, ahi] * [blo, bhi]."""
    # exact unit factors are common (bare differentials have density [1, 1])
    if bhi is blo and np.all(np.asarray(blo) == 1.0):
        return np.asarray(alo, float), np.asarray(ahi, float)
    if ahi is alo and np.all(np.asarray(alo) == 1.0):
        return np.asarray(blo, float), np.asarray(bhi, float)
    a = [np.asarray(alo, float)]
    if ahi is not alo:
        a.append(np.asarray(ahi, float))
    b = [np.asarray(blo, float)]
    if bhi is not blo:
        b.append(np.asarray(bhi, float))
    sb = [_split(y) for y in b]
    lo = hi = None
    for x in a:
        sx = _split(x)
        for y, sy in zip(b, sb):
            p, e = _prod_err(x, *sx, y, *sy)
            d, u = _down(p, e), _up(p, e)
            lo = d if lo is None else np.fmin(lo, d)
            hi = u if hi is None else np.fmax(hi, u)
    return lo, hi


def frac_down(q) -> float:
    """Largest float not above the rational q."""
    q = Fraction(q)
    f = float(q)
    if Fraction(f) > q:
        f = float(np.nextafter(f, -_INF))
    return f


def frac_up(q) -> float:
    q = Fraction(q)
    f = float(q)
    if Fraction(f) < q:
        f = float(np.nextafter(f, _INF))
    return f


def is_exact_float(q) -> bool:
    q = Fraction(q)
    return Fraction(float(q)) == q
