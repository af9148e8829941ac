from fractions import Fraction as F

import pytest
import sympy
from hypothesis import given, strategies as st

from leibniz.distribution import (constant_dist, delta_dist, df_dist, differential_dist,
                                  dist_combine, form_f_dmu, indicator_dist, scale,
                                  tagged_dist)
from leibniz.errors import SchemeMismatch, SelectorOutOfFraction, ZeroDifferentialAtAtom
from leibniz.expr import parse_expression
from leibniz.measure import Atom, Length, Stieltjes
from leibniz.partition import Monad, build_dyadic_scheme, build_regular_scheme, monad_at

W = [2.0 ** -n for n in range(8)]


def test_form_examples(unit):
    one = form_f_dmu("1", Length(), unit)
    assert one(Monad.random(unit, 3)).prefix(8) == W
    x = form_f_dmu("x", Length(), unit)
    assert x(monad_at(unit, F(1, 2))).prefix(8) == [w / 2 for w in W]
    zero = form_f_dmu("0", Length(), unit)
    assert zero(monad_at(unit, F(1, 5))).prefix(8) == [0.0] * 8


def test_indicator_examples(unit):
    full = indicator_dist([(0, 1)], Length(), unit)
    assert full(monad_at(unit, F(2, 7))).prefix(8) == W
    empty = indicator_dist([], Length(), unit)
    assert empty(monad_at(unit, F(2, 7))).prefix(8) == [0.0] * 8
    quarter = indicator_dist([(0, F(1, 4))], Length(), unit)
    assert quarter(monad_at(unit, F(1, 2))).prefix(8) == [0.0] * 8


def test_delta_examples(unit):
    d = delta_dist(F(1, 2), Length(), unit)
    assert d(monad_at(unit, F(1, 2))).prefix(5) == [1.0, 2.0, 4.0, 8.0, 16.0]
    prod = dist_combine(d, differential_dist(Length(), unit), "mul")
    assert prod(monad_at(unit, F(1, 2))).prefix(8) == [1.0] * 8
    # the chain of 1/3 leaves the atom's cells after level 2: zero from then on
    off = d(monad_at(unit, F(1, 3))).prefix(8)
    assert off[:3] == [1.0, 2.0, 4.0] and off[3:] == [0.0] * 5
    assert prod(monad_at(unit, F(1, 3))).prefix(8)[3:] == [0.0] * 5


def test_delta_rejects_vanishing_measure(unit):
    with pytest.raises(ZeroDifferentialAtAtom):
        delta_dist(F(1, 3), Atom(unit, F(2, 3)), unit)


def test_df_examples(unit):
    assert df_dist("x", unit)(Monad.random(unit, 1)).prefix(8) == W
    assert df_dist("5", unit)(Monad.random(unit, 1)).prefix(8) == [0.0] * 8
    assert df_dist("x^2", unit)(monad_at(unit, 0)).prefix(8) == [w * w for w in W]


def test_tagged_examples(unit):
    t = tagged_dist("x", "left", Length(), unit)
    m = monad_at(unit, F(1, 3))
    assert t(m).prefix(6) == [float(c.lo * c.width) for c in m.cells(5)]
    bad = tagged_dist("x", lambda c: c.hi + 1, Length(), unit)
    with pytest.raises(SelectorOutOfFraction):
        bad(m)(2)


def test_tagged_differs_from_limit_form_for_irrationals(unit):
    irr = lambda x: 0 if isinstance(x, (int, F)) or getattr(x, "is_rational", False) else 1  # noqa: E731
    p = sympy.sqrt(2) / 2
    m = monad_at(unit, p)
    limit_form = form_f_dmu(irr, Length(), unit)(m)
    tagged = tagged_dist(irr, "left", Length(), unit)(m)
    assert limit_form.prefix(6) == W[:6]
    assert tagged.prefix(6) == [0.0] * 6


def test_scheme_mismatch(unit):
    other = build_dyadic_scheme(0, 2)
    with pytest.raises(SchemeMismatch):
        differential_dist(Length(), unit)(monad_at(other, 1))
    with pytest.raises(SchemeMismatch):
        dist_combine(differential_dist(Length(), unit), differential_dist(Length(), other), "add")


def test_bound_hints(unit):
    phi = form_f_dmu(parse_expression("x^2"), Length(), unit)
    assert phi.bound_hint(unit.cell(1, 1)) == (0.125, 0.5)
    dl = differential_dist(Length(), unit)
    assert dl.bound_hint(unit.cell(3, 2)) == (0.125, 0.125)
    assert constant_dist(0, unit).bound_hint(unit.cell(2, 1)) == (0.0, 0.0)


def test_product_of_two_differentials_has_no_bounds(unit):
    dl = differential_dist(Length(), unit)
    sq = dist_combine(dl, dl, "mul")
    assert not sq.has_bounds
    assert sq(monad_at(unit, F(1, 3))).prefix(3) == [1.0, 0.25, 0.0625]


def test_grades(unit):
    f = form_f_dmu("x", Length(), unit)
    assert f.grade == 1
    assert scale(f, F(-3, 2)).grade == 1
    assert delta_dist(F(1, 4), Length(), unit).grade == -1


# property tests ------------------------------------------------------------

def _families(scheme):
    g = Stieltjes(parse_expression("x^3 + x"))
    return {
        "f dx": form_f_dmu(parse_expression("sin(3*x) - x^2"), Length(), scheme),
        "f dg": form_f_dmu(parse_expression("exp(-x)"), g, scheme),
        "indicator": indicator_dist([(F(1, 7), F(3, 5)), (F(4, 5), 1)], Length(), scheme),
        "df": df_dist("x^3 - x", scheme),
        "tagged": tagged_dist("cos(5*x)", "mid", Length(), scheme),
        "sum": dist_combine(scale(form_f_dmu("x", Length(), scheme), F(2)),
                            form_f_dmu("1", g, scheme), "add"),
        "delta dx": dist_combine(delta_dist(F(3, 8), Length(), scheme, "rightmost"),
                                 differential_dist(Length(), scheme), "mul"),
    }


SCHEME = build_dyadic_scheme(F(-1, 2), 1)
FAMILIES = _families(SCHEME)


@given(st.sampled_from(sorted(FAMILIES)), st.integers(0, 20), st.integers(0, 2 ** 20),
       st.integers(0, 6))
def test_density_bounds_are_hereditary(name, seed, pick, extra):
    """Any monad through a cell U stays inside U's bound at U's level and inside
    density x base on every finer cell."""
    phi = FAMILIES[name]
    for n in (0, 3, 9):
        i = pick % SCHEME.size(n)
        u = SCHEME.cell(n, i)
        block = SCHEME.block(n, [i])
        d_lo, d_hi = (float(v[0]) for v in phi.density(block))
        path = [u]
        while path[-1].level:
            path.append(SCHEME.parent(path[-1]))
        path.reverse()
        m = Monad.from_choices(
            SCHEME, lambda k, kids: kids.index(path[k]) if k <= n else (seed >> k) % len(kids))
        seq = phi(m)
        for k in range(n, n + extra + 1):
            v = seq(k)
            nu = float(phi.base.value(m.cell(k)))
            lo, hi = sorted((d_lo * nu, d_hi * nu))
            slack = 1e-12 * (abs(lo) + abs(hi))
            assert lo - slack <= v <= hi + slack, (name, n, k)


def test_delta_times_differential_is_exact_off_binary_grids():
    # 1/3^n has no float form; the product is formed exactly, then rounded once
    tri = build_regular_scheme(0, 1, 3)
    for x0 in (F(1, 2), F(1, 3), F(4, 7)):
        d = delta_dist(x0, Length(), tri, "rightmost")
        prod = dist_combine(d, differential_dist(Length(), tri), "mul")
        assert prod(monad_at(tri, x0, "rightmost")).prefix(20) == [1.0] * 20
