"""Property suites run by ``leibniz verify``.

Each suite returns a :class:`SuiteReport` whose lines are printed by the CLI.
The random families here are seeded, so a suite run is reproducible.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .distribution import dist_combine, form_f_dmu, indicator_dist, scale, schedule_multiple
from .expr import Expr, X, to_text
from .integrate import darboux_sums, integrate, newton_leibniz_report
from .measure import Length
from .partition import build_dyadic_scheme

__all__ = ["SuiteReport", "SUITES", "run_suite", "random_polynomial", "random_union",
           "union_length", "newton_leibniz_suite", "berkeley_suite", "indicator_suite",
           "linearity_suite", "comparison_suite"]


@dataclass
class SuiteReport:
    name: str
    passed: bool
    lines: list = field(default_factory=list)

    def text(self) -> str:
        return "\n".join([f"suite {self.name}", *self.lines, "PASS" if self.passed else "FAIL"])


def random_polynomial(rng: random.Random, degree: int, coef: Fraction = Fraction(1, 2),
                      nonneg: bool = False, denom: int = 16) -> Expr:
    """Polynomial with rational coefficients in ``[-coef, coef]`` (``[0, coef]``
    when ``nonneg``)."""
    top = int(coef * denom)
    out = None
    for k in range(degree + 1):
        c = Fraction(rng.randint(0 if nonneg else -top, top), denom)
        if c == 0 and (k or degree):
            continue
        mono = Expr._wrap(abs(c)) if k == 0 else (X if k == 1 else X ** k)
        if k and abs(c) != 1:
            mono = Expr._wrap(abs(c)) * mono
        if out is None:
            out = -mono if c < 0 else mono
        else:
            out = out - mono if c < 0 else out + mono
    return out if out is not None else Expr._wrap(0)


def random_union(rng: random.Random, max_parts: int = 5, denom: int = 997) -> list:
    """Up to ``max_parts`` closed intervals in [0, 1] with rational endpoints."""
    parts = []
    for _ in range(rng.randint(1, max_parts)):
        c, d = sorted(Fraction(rng.randint(0, denom), denom) for _ in range(2))
        parts.append((c, d))
    return parts


def union_length(parts) -> Fraction:
    """Exact Lebesgue length of a finite union of closed intervals."""
    total, reach = Fraction(0), None
    for c, d in sorted(parts):
        if reach is None or c > reach:
            total += d - c
            reach = d
        elif d > reach:
            total += d - reach
            reach = d
    return total


def newton_leibniz_suite(f="x^2", fprime="2*x", domain=(0, 1), epsilon=1e-6,
                         max_depth=24, **_) -> SuiteReport:
    scheme = build_dyadic_scheme(*domain)
    rep = newton_leibniz_report(f, fprime, scheme, epsilon, max_depth)
    return SuiteReport("newton-leibniz", rep.passed, rep.lines()[:-1])


def berkeley_suite(depth=20, seed=0, count=5, **_) -> SuiteReport:
    """``|Phi| <= (1/n) dx`` at level ``n``: the depth-``depth`` interval must
    contain 0 and have width at most ``2/depth``."""
    rng = random.Random(seed)
    scheme = build_dyadic_scheme(0, 1)
    schedule = lambda n: Fraction(1, max(n, 1))  # noqa: E731
    eps = 1 / depth
    lines, ok = [], True
    for _ in range(count):
        # |g| <= 1 on [0, 1]: coefficients sum to at most 1 in absolute value
        g = random_polynomial(rng, 3, Fraction(1, 4))
        phi = schedule_multiple(form_f_dmu(g, Length(), scheme), schedule)
        cert = integrate(phi, eps, depth, min_depth=depth)
        if not cert.certified:
            ok = False
            lines.append(f"g = {to_text(g)}: not certified ({cert.reason})")
            continue
        lo, hi = cert.lower_total, cert.upper_total
        good = lo <= 0 <= hi and hi - lo <= 2 / depth
        ok &= good
        lines.append(f"g = {to_text(g)}: [{lo!r}, {hi!r}] width {hi - lo:.4g} "
                     f"{'ok' if good else 'BAD'}")
    return SuiteReport("berkeley", ok, lines)


def indicator_suite(count=20, seed=0, epsilon=1e-6, max_depth=24, **_) -> SuiteReport:
    rng = random.Random(seed)
    scheme = build_dyadic_scheme(0, 1)
    lines, ok = [], True
    for _ in range(count):
        Y = random_union(rng)
        exact = union_length(Y)
        cert = integrate(indicator_dist(Y, Length(), scheme), epsilon, max_depth)
        good = cert.certified and abs(Fraction(cert.value) - exact) <= Fraction(epsilon)
        ok &= good
        where = f"depth {cert.certified_depth}" if cert.certified else cert.reason
        lines.append(f"{len(Y)} intervals, length {float(exact)!r}: "
                     f"{cert.value if cert.certified else '-'} ({where}) {'ok' if good else 'BAD'}")
    return SuiteReport("indicator", ok, lines)


def linearity_suite(count=10, seed=0, epsilon=1e-6, max_depth=24, **_) -> SuiteReport:
    rng = random.Random(seed)
    scheme = build_dyadic_scheme(0, 1)
    lines, ok = [], True
    for _ in range(count):
        a = Fraction(rng.randint(-8, 8), 8)
        b = Fraction(rng.randint(-8, 8), 8)
        phi = form_f_dmu(random_polynomial(rng, 3), Length(), scheme)
        psi = form_f_dmu(random_polynomial(rng, 3), Length(), scheme)
        both = dist_combine(scale(phi, a), scale(psi, b), "add")
        c1, c2, c3 = (integrate(d, epsilon, max_depth) for d in (phi, psi, both))
        if not (c1.certified and c2.certified and c3.certified):
            ok = False
            lines.append("not certified")
            continue
        err = abs(c3.value - (float(a) * c1.value + float(b) * c2.value))
        bound = abs(float(a)) * epsilon + abs(float(b)) * epsilon + epsilon
        good = err <= bound
        ok &= good
        lines.append(f"alpha={a} beta={b}: |error| {err:.3g} <= {bound:.3g} {'ok' if good else 'BAD'}")
    return SuiteReport("linearity", ok, lines)


def comparison_suite(count=10, seed=0, depth=12, **_) -> SuiteReport:
    """``f = g + p`` with ``p >= 0``: Darboux sums of ``f dx`` dominate ``g dx``."""
    rng = random.Random(seed)
    scheme = build_dyadic_scheme(0, 1)
    lines, ok = [], True
    for _ in range(count):
        g = random_polynomial(rng, 3)
        f = g + random_polynomial(rng, 3, nonneg=True)
        sf = darboux_sums(form_f_dmu(f, Length(), scheme), depth)
        sg = darboux_sums(form_f_dmu(g, Length(), scheme), depth)
        bad = [s.level for s, t in zip(sf, sg) if s.lower < t.lower or s.upper < t.upper]
        ok &= not bad
        lines.append(f"g = {to_text(g)}: {'ok' if not bad else f'violated at levels {bad}'}")
    return SuiteReport("comparison", ok, lines)


SUITES = {
    "newton-leibniz": newton_leibniz_suite,
    "berkeley": berkeley_suite,
    "indicator": indicator_suite,
    "linearity": linearity_suite,
    "comparison": comparison_suite,
}


def run_suite(name: str, **params) -> SuiteReport:
    return SUITES[name](**params)
