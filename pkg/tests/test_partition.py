from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from leibniz.errors import (DegenerateDomain, NotShrinking, PointOutsideDomain,
                            SchemeViolation)
from leibniz.partition import (CustomScheme, Monad, build_dyadic_scheme,
                               build_regular_scheme, is_infinitesimal_scheme, monad_at,
                               monad_limit, parent)


def half_only(n):
    """Refines [0, 1/2] dyadically and never touches [1/2, 1]."""
    if n == 0:
        return [(0, 1)]
    k = 2 ** (n - 1)
    return [(F(i, 2 * k), F(i + 1, 2 * k)) for i in range(k)] + [(F(1, 2), 1)]


def thirds(n):
    return [(F(i, 3 ** n), F(i + 1, 3 ** n)) for i in range(3 ** n)]


def test_dyadic_levels(unit):
    assert [(c.lo, c.hi) for c in unit.level(1)] == [(0, F(1, 2)), (F(1, 2), 1)]
    c = unit.cell(3, 5)
    assert (c.lo, c.hi) == (F(5, 8), F(6, 8))
    assert {c.width for c in build_dyadic_scheme(-1, 1).level(2)} == {F(1, 2)}


def test_degenerate_domain():
    with pytest.raises(DegenerateDomain):
        build_dyadic_scheme(1, 1)


def test_parent(unit):
    u = unit.locate(F(5, 16), 3)
    assert (u.lo, u.hi) == (F(1, 4), F(3, 8))
    p = parent(unit, u)
    assert (p.lo, p.hi, p.level) == (F(1, 4), F(1, 2), 2)
    assert parent(unit, unit.cell(1, 0)) == unit.cell(0, 0)


def test_monad_at_half_leftmost(unit):
    chain = [(c.lo, c.hi) for c in monad_at(unit, F(1, 2), "leftmost").cells(3)]
    assert chain == [(0, 1), (0, F(1, 2)), (F(1, 4), F(1, 2)), (F(3, 8), F(1, 2))]
    right = [(c.lo, c.hi) for c in monad_at(unit, F(1, 2), "rightmost").cells(2)]
    assert right == [(0, 1), (F(1, 2), 1), (F(1, 2), F(3, 4))]


def test_monad_at_zero_and_third(unit):
    assert all(c.lo == 0 and c.width == F(1, 2 ** c.level) for c in monad_at(unit, 0).cells(10))
    for tie in ("leftmost", "rightmost"):
        m = monad_at(unit, F(1, 3), tie)
        assert all(c.width == F(1, 2 ** c.level) and F(1, 3) in c for c in m.cells(20))


def test_monad_outside_domain(unit):
    with pytest.raises(PointOutsideDomain):
        monad_at(unit, 2)


def test_monad_limit(unit):
    assert abs(monad_limit(monad_at(unit, F(1, 3)), 1e-6) - F(1, 3)) <= F(1, 10 ** 6)
    assert abs(monad_limit(monad_at(unit, 0), 1e-6)) <= F(1, 10 ** 6)
    stuck = CustomScheme(0, 1, lambda n: [(0, 1)], name="stuck")
    with pytest.raises(NotShrinking):
        monad_limit(Monad.random(stuck, 0), 1e-3, probe_depth=16)


def test_is_infinitesimal_scheme(unit):
    v = is_infinitesimal_scheme(unit, 20, 1e-5)
    assert v.certified and v.index == 17
    assert is_infinitesimal_scheme(unit, 3, 1e-5).undetermined
    stalled = CustomScheme(0, 1, half_only)
    assert not is_infinitesimal_scheme(stalled, 10, 1e-3).certified


def test_custom_scheme_matches_regular():
    cs = CustomScheme(0, 1, thirds, name="thirds")
    rs = build_regular_scheme(0, 1, 3)
    for n in range(4):
        assert [(c.lo, c.hi) for c in cs.level(n)] == [(c.lo, c.hi) for c in rs.level(n)]
    idx = np.arange(9)
    for a, b in zip(cs.child_indices(2, idx), rs.child_indices(2, idx)):
        assert np.array_equal(a, b)


def test_custom_scheme_violations():
    with pytest.raises(SchemeViolation):
        CustomScheme(0, 1, lambda n: [(0, F(1, 2))]).level(0)
    gap = CustomScheme(0, 1, lambda n: [(0, 1)] if n == 0 else [(0, F(1, 3)), (F(1, 2), 1)])
    with pytest.raises(SchemeViolation):
        gap.level(1)
    # a level-2 cell straddling the level-1 boundary has no parent
    straddle = CustomScheme(0, 1, lambda n: [[(0, 1)], [(0, F(1, 2)), (F(1, 2), 1)],
                                             [(0, F(1, 4)), (F(1, 4), F(3, 4)), (F(3, 4), 1)]][n])
    with pytest.raises(SchemeViolation):
        straddle.level(2)


def test_random_monad_is_reproducible(unit):
    a = Monad.random(unit, 7).cells(30)
    b = Monad.random(unit, 7).cells(30)
    assert a == b


def test_describe():
    assert build_regular_scheme(0, 2, 3).describe() == {
        "kind": "custom", "domain": ["0", "2"], "params": {"branching": 3}}
    assert build_dyadic_scheme(0, 1).describe()["kind"] == "dyadic"


# property tests ------------------------------------------------------------

rationals = st.fractions(min_value=0, max_value=1, max_denominator=10 ** 6)


@given(rationals, st.sampled_from(["leftmost", "rightmost"]), st.integers(2, 5))
def test_monads_are_nested_and_hold_the_point(p, tie, k):
    s = build_regular_scheme(0, 1, k)
    cells = monad_at(s, p, tie).cells(12)
    for c, d in zip(cells, cells[1:]):
        assert d.within(c) and parent(s, d) == c
    assert all(p in c for c in cells)


@given(st.integers(1, 12), st.data())
def test_children_partition_their_parent(n, data):
    s = build_dyadic_scheme(F(-1, 3), F(2, 7))
    i = data.draw(st.integers(0, s.size(n) - 1))
    u = s.cell(n, i)
    kids = s.children(u)
    assert kids[0].lo == u.lo and kids[-1].hi == u.hi
    assert all(a.hi == b.lo for a, b in zip(kids, kids[1:]))
    assert all(parent(s, c) == u for c in kids)


@given(st.integers(0, 14), st.data())
def test_endpoint_boxes_enclose_exact_endpoints(n, data):
    s = build_regular_scheme(F(-2, 3), F(5, 7), 3 if n < 10 else 2)
    i = data.draw(st.integers(0, s.size(n) - 1))
    c = s.cell(n, i)
    lo_dn, lo_up, hi_dn, hi_up = (float(x[0]) for x in s.endpoint_boxes(n, np.array([i])))
    assert F(lo_dn) <= c.lo <= F(lo_up)
    assert F(hi_dn) <= c.hi <= F(hi_up)
