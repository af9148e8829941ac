"""Monadic distributions: maps from monads to eventual sequences.

Besides evaluation, a distribution may carry a *reference measure* ``base``
and a *density bound*: a function that, for a batch of cells ``U``, returns
``[lo, hi]`` such that for every cell ``V`` inside ``U`` (``U`` itself or any
descendant) and every monad through ``V``, the value at ``V``'s level lies in
``[lo * base(V), hi * base(V)]``.  Because the bound holds on every finer
cell, a Darboux step measure built from it dominates the distribution from its
level on, which is what the integrator needs.

Grades describe how a distribution scales with cell size:

* 0 -- function-like (``f(lim x)``, indicators); density bounds are ranges;
* 1 -- measure-like (``f dmu``, ``df``, ``delta * dmu``);
* -1 -- reciprocal of a measure differential (``delta``).

Products of two grade-1 distributions are still evaluable but carry no bound.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from . import _rounding as rnd
from .errors import (NotShrinkingScheme, SchemeMismatch, SelectorOutOfFraction,
                     ZeroDifferentialAtAtom)
from .expr import Expr
from .measure import (Atom, FinAddMeasure, Increment, as_function,
                      differential)
from .partition import (LEFTMOST, Block, Cell, CustomScheme, Monad, PartitionScheme,
                        _tie, as_point, is_infinitesimal_scheme)
from .seqcore import EventualSeq, combine

__all__ = [
    "MonadicDistribution", "function_dist", "constant_dist", "indicator_function",
    "differential_dist", "form_f_dmu", "indicator_dist", "delta_dist", "df_dist",
    "tagged_dist", "dist_combine", "scale", "schedule_multiple", "monad_value_point",
]

SAMPLES_PER_CELL = 9

Density = Callable[[Block], tuple]


def _const_density(lo: float, hi: float) -> Density:
    def density(block):
        n = len(block)
        out = np.full(n, lo)
        return (out, out) if lo == hi else (out, np.full(n, hi))
    return density


@dataclass(frozen=True, eq=False)
class MonadicDistribution:
    scheme: PartitionScheme
    evaluator: Callable[[Monad], EventualSeq]
    grade: Optional[int]
    base: Optional[FinAddMeasure] = None
    density: Optional[Density] = None
    kind: str = "distribution"
    caveats: tuple = ()
    # delta only: the atom marking the distinguished monad
    atom: Optional[Atom] = None
    # points whose monads are worth probing (atoms, indicator edges)
    points: tuple = ()
    # float level values per cell, for distributions whose level-n value
    # depends on the level-n cell alone
    cellwise: Optional[Callable[[Block], np.ndarray]] = None
    # exact level values (Fractions) per monad, when every ingredient is
    # rational; products and sums are then rounded once instead of per step
    exact: Optional[Callable[[Monad], Callable[[int], object]]] = None

    def eval_on(self, m: Monad) -> EventualSeq:
        if m.scheme != self.scheme:
            raise SchemeMismatch("monad and distribution live on different schemes")
        return self.evaluator(m)

    __call__ = eval_on

    @property
    def has_bounds(self) -> bool:
        return self.density is not None and self.grade in (0, 1, -1)

    def bound_hint(self, cell: Cell) -> Optional[tuple[float, float]]:
        """Range of level-``cell.level`` values over monads through ``cell``."""
        if not self.has_bounds:
            return None
        lo, hi = self.block_bounds(self.scheme.block(cell.level, [cell.index]))
        return float(lo[0]), float(hi[0])

    def block_bounds(self, block: Block, density=None) -> tuple[np.ndarray, np.ndarray]:
        """``density x base`` on a batch of cells (grade 0: the density itself)."""
        d_lo, d_hi = density if density is not None else self.density(block)
        if self.grade == 0:
            return d_lo, d_hi
        if self.grade == 1:
            m_lo, m_hi = self.base.enclose(block)
            return rnd.interval_mul(d_lo, d_hi, m_lo, m_hi)
        # grade -1: density / base on the owner cell, 0 elsewhere
        m_lo, m_hi = self.base.enclose(block)
        own = block.idx == self.atom.owner(block.level).index
        safe_lo = np.where(own, m_lo, 1.0)
        safe_hi = np.where(own, m_hi, 1.0)
        if np.any(own & (safe_lo <= 0)):
            raise ZeroDifferentialAtAtom("measure vanishes on the atom's cell")
        r_lo, r_hi = rnd.widen(1.0 / safe_hi, 1.0 / safe_lo, 1)
        p_lo, p_hi = rnd.interval_mul(d_lo, d_hi, r_lo, r_hi)
        return np.where(own, p_lo, 0.0), np.where(own, p_hi, 0.0)


def monad_value_point(m: Monad, n: int):
    """Point at which a function is read on monad ``m`` at level ``n``: the exact
    point when the monad was built around one, else the cell midpoint."""
    return m.point if m.point is not None else m.cell(n).midpoint


def _call(f, x):
    if isinstance(f, Expr):
        if not isinstance(x, (Fraction, int, float)):
            x = float(x)
        return f.evaluate(x)
    return f(x)


def _range_density(f) -> tuple[Density, tuple]:
    """Range of ``f`` over each cell: interval arithmetic for expressions,
    sampling for opaque callables (recorded as a caveat)."""
    if isinstance(f, Expr):
        return (lambda block: f.interval(block.lo, block.hi)), ()

    def sampled(block):
        lo, hi = block.lo, block.hi
        t = np.linspace(0.0, 1.0, SAMPLES_PER_CELL)
        pts = lo[:, None] + (hi - lo)[:, None] * t[None, :]
        flat = pts.ravel()
        try:
            vals = np.asarray(f(flat), dtype=float)
            if vals.shape != flat.shape:
                raise ValueError
        except Exception:
            vals = np.array([float(f(float(x))) for x in flat])
        vals = vals.reshape(pts.shape)
        return vals.min(axis=1), vals.max(axis=1)

    name = getattr(f, "__name__", repr(f))
    return sampled, (f"range of {name} sampled at {SAMPLES_PER_CELL} points per cell; bounds not rigorous",)


def function_dist(f, scheme: PartitionScheme) -> MonadicDistribution:
    """Grade-0 distribution ``x -> f(lim x)``."""
    f = as_function(f)
    density, caveats = _range_density(f)

    def evaluator(m):
        return EventualSeq(lambda n: _call(f, monad_value_point(m, n)), note=f"f({m})")

    return MonadicDistribution(scheme, evaluator, 0, None, density, "function", caveats)


def constant_dist(c, scheme: PartitionScheme) -> MonadicDistribution:
    c = Fraction(c)
    return replace(function_dist(Expr._wrap(c), scheme), kind="constant",
                   exact=lambda m: lambda n: c)


def _normalize_closed(Y) -> tuple:
    items = sorted((Fraction(c), Fraction(d)) for c, d in Y)
    for c, d in items:
        if c > d:
            raise ValueError(f"interval [{c}, {d}] is reversed")
    return tuple(items)


def indicator_function(Y: Sequence, scheme: PartitionScheme) -> MonadicDistribution:
    """Grade-0 indicator of a finite union of closed intervals, read at the limit."""
    Y = _normalize_closed(Y)

    def member(x) -> float:
        return 1.0 if any(c <= x <= d for c, d in Y) else 0.0

    enc = [(rnd.frac_down(c), rnd.frac_up(c), rnd.frac_down(d), rnd.frac_up(d)) for c, d in Y]

    def density(block):
        lo, hi = block.lo, block.hi
        inside = np.zeros(len(block), bool)
        touches = np.zeros(len(block), bool)
        for c_dn, c_up, d_dn, d_up in enc:
            inside |= (lo >= c_up) & (hi <= d_dn)
            touches |= (hi >= c_dn) & (lo <= d_up)
        return inside.astype(float), touches.astype(float)

    def evaluator(m):
        return EventualSeq(lambda n: member(monad_value_point(m, n)), note="indicator")

    pts = tuple(p for c, d in Y for p in (c, d))
    return MonadicDistribution(scheme, evaluator, 0, None, density, "indicator", points=pts)


def _require_shrinking(scheme: PartitionScheme) -> None:
    if isinstance(scheme, CustomScheme):
        verdict = is_infinitesimal_scheme(scheme, 8, float(scheme.max_width(0)) * 1e-9)
        if verdict.refuted:
            raise NotShrinkingScheme(f"{scheme!r} stops refining ({verdict})")


def differential_dist(mu: FinAddMeasure, scheme: PartitionScheme) -> MonadicDistribution:
    """``dmu`` as a distribution: the sequence of ``mu`` along each monad."""

    def cellwise(block):
        lo, hi = mu.enclose(block)
        return (lo + hi) / 2

    pts = ((mu.x0, mu.tie),) if isinstance(mu, Atom) else ()
    return MonadicDistribution(scheme, lambda m: differential(mu, m), 1, mu,
                               _const_density(1.0, 1.0), f"d{mu.name}", points=pts,
                               cellwise=cellwise, exact=lambda m: lambda n: mu.value(m.cell(n)))


def form_f_dmu(f, mu: FinAddMeasure, scheme: PartitionScheme) -> MonadicDistribution:
    """``f(lim x) dmu(x)``."""
    _require_shrinking(scheme)
    out = dist_combine(function_dist(f, scheme), differential_dist(mu, scheme), "mul")
    return replace(out, kind="f dmu")


def indicator_dist(Y: Sequence, mu: FinAddMeasure, scheme: PartitionScheme) -> MonadicDistribution:
    """``1_Y(lim x) dmu(x)`` for a finite union ``Y`` of closed intervals."""
    _require_shrinking(scheme)
    out = dist_combine(indicator_function(Y, scheme), differential_dist(mu, scheme), "mul")
    return replace(out, kind="indicator dmu")


def delta_dist(x0, mu: FinAddMeasure, scheme: PartitionScheme, tie: str = LEFTMOST,
               check_depth: int = 40) -> MonadicDistribution:
    """Dirac delta at ``x0`` relative to ``mu``.

    On the monad of ``x0`` (chosen by ``tie``) the value at level ``n`` is
    ``1 / mu(cell_n)``.  Any other monad leaves the atom's chain at some level
    and is 0 from there on, i.e. it is the zero eventual sequence.
    """
    tie = _tie(tie)
    x0 = as_point(x0)
    atom = Atom(scheme, x0, Fraction(1), tie)
    for n in range(check_depth + 1):
        if mu.value(atom.owner(n)) == 0:
            raise ZeroDifferentialAtAtom(f"mu vanishes on {atom.owner(n)}")

    def exact(m):
        def term(n):
            c = m.cell(n)
            if c.index != atom.owner(n).index:
                return Fraction(0)
            v = mu.value(c)
            if v == 0:
                raise ZeroDifferentialAtAtom(f"mu vanishes on {c}")
            return 1 / v
        return term

    def evaluator(m):
        return EventualSeq(exact(m), note=f"delta at {x0}")

    return MonadicDistribution(scheme, evaluator, -1, mu, _const_density(1.0, 1.0), "delta",
                               atom=atom, points=((x0, tie),), exact=exact)


def df_dist(f, scheme: PartitionScheme) -> MonadicDistribution:
    """``df`` on the monad ``{[a_n, b_n]}``: the sequence ``f(b_n) - f(a_n)``."""
    f = as_function(f)
    inc = Increment(f)

    def evaluator(m):
        return EventualSeq(lambda n: inc.value(m.cell(n)), note="df")

    def cellwise(block):
        lo_dn, lo_up, hi_dn, hi_up = block.boxes
        lo = (lo_dn + lo_up) / 2
        hi = (hi_dn + hi_up) / 2
        if isinstance(f, Expr):
            return f.evaluate_array(hi) - f.evaluate_array(lo)
        return np.array([f(float(b)) - f(float(a)) for a, b in zip(lo, hi)])

    return MonadicDistribution(scheme, evaluator, 1, inc, _const_density(1.0, 1.0), "df",
                               cellwise=cellwise)


_SELECTORS = {
    "left": lambda c: c.lo,
    "right": lambda c: c.hi,
    "mid": lambda c: c.midpoint,
}


def tagged_dist(f, selector, mu: FinAddMeasure, scheme: PartitionScheme) -> MonadicDistribution:
    """``f(p(U_n)) mu(U_n)`` with ``p`` choosing a point in every cell.

    ``selector`` is ``"left"``, ``"right"``, ``"mid"`` or a callable on cells.
    """
    f = as_function(f)
    pick = _SELECTORS[selector] if isinstance(selector, str) else selector
    density, caveats = _range_density(f)

    def evaluator(m):
        def term(n):
            c = m.cell(n)
            p = pick(c)
            if not c.contains(p):
                raise SelectorOutOfFraction(f"selector gave {p} outside {c}")
            return _call(f, p) * mu.value(c)
        return EventualSeq(term, note="tagged")

    cellwise = None
    if isinstance(selector, str) and isinstance(f, Expr):
        def cellwise(block):
            lo_dn, lo_up, hi_dn, hi_up = block.boxes
            lo, hi = (lo_dn + lo_up) / 2, (hi_dn + hi_up) / 2
            p = {"left": lo, "right": hi, "mid": (lo + hi) / 2}[selector]
            m_lo, m_hi = mu.enclose(block)
            return f.evaluate_array(p) * (m_lo + m_hi) / 2

    return MonadicDistribution(scheme, evaluator, 1, mu, density, "tagged", caveats,
                               cellwise=cellwise)


def _interval_add(d1, d2):
    return rnd.add_down(d1[0], d2[0]), rnd.add_up(d1[1], d2[1])


def _interval_prod(d1, d2):
    return rnd.interval_mul(d1[0], d1[1], d2[0], d2[1])


def _sum_density(p, q):
    return lambda block: _interval_add(p.density(block), q.density(block))


def _hull_density(p, q):
    def density(block):
        a, b = p.density(block), q.density(block)
        return np.minimum(a[0], b[0]), np.maximum(a[1], b[1])
    return density


def _prod_density(p, q):
    return lambda block: _interval_prod(p.density(block), q.density(block))


def dist_combine(p: MonadicDistribution, q: MonadicDistribution, op: str) -> MonadicDistribution:
    """Termwise ``p + q`` or ``p * q`` on every monad, with bounds combined by
    interval arithmetic when the grades allow it."""
    if p.scheme != q.scheme:
        raise SchemeMismatch("distributions live on different schemes")
    if op not in ("add", "mul"):
        raise ValueError("op must be 'add' or 'mul'")

    exact = None
    if p.exact is not None and q.exact is not None:
        def exact(m):
            a, b = p.exact(m), q.exact(m)
            return (lambda n: a(n) + b(n)) if op == "add" else (lambda n: a(n) * b(n))

        def evaluator(m):
            if m.scheme != p.scheme:
                raise SchemeMismatch("monad and distribution live on different schemes")
            return EventualSeq(exact(m), note=op)
    else:
        def evaluator(m):
            return combine(p.eval_on(m), q.eval_on(m), op)

    caveats = tuple(dict.fromkeys(p.caveats + q.caveats))
    points = tuple(dict.fromkeys(p.points + q.points))
    grade = None
    base = None
    density = None
    atom = None
    bounded = p.has_bounds and q.has_bounds
    if op == "add":
        if bounded and p.grade == q.grade == 0:
            grade, density = 0, _sum_density(p, q)
        elif bounded and p.grade == q.grade == 1:
            grade = 1
            if p.base == q.base:
                base, density = p.base, _sum_density(p, q)
            elif p.base.nonnegative and q.base.nonnegative:
                base, density = p.base + q.base, _hull_density(p, q)
        elif bounded and p.grade == q.grade == -1 and p.atom == q.atom and p.base == q.base:
            grade, base, atom, density = -1, p.base, p.atom, _sum_density(p, q)
    else:
        if bounded:
            a, b = (p, q) if (p.grade or 0) <= (q.grade or 0) else (q, p)
            if a.grade == 0:
                grade, base, atom, density = b.grade, b.base, b.atom, _prod_density(a, b)
            elif a.grade == -1 and b.grade == 1 and a.base == b.base:
                # (1 / dmu) on the atom's chain times (psi dmu): psi on that chain
                grade, base, density = 1, a.atom, _prod_density(a, b)
    cellwise = None
    if p.cellwise is not None and q.cellwise is not None:
        fn = np.add if op == "add" else np.multiply
        cellwise = lambda block: fn(p.cellwise(block), q.cellwise(block))  # noqa: E731
    return MonadicDistribution(p.scheme, evaluator, grade, base, density,
                               f"({p.kind} {'+' if op == 'add' else '*'} {q.kind})", caveats,
                               atom, points, cellwise, exact)


def scale(p: MonadicDistribution, c) -> MonadicDistribution:
    """``c * p`` for a rational constant ``c``."""
    return dist_combine(constant_dist(c, p.scheme), p, "mul")


def schedule_multiple(p: MonadicDistribution, schedule: Callable[[int], float]) -> MonadicDistribution:
    """``n -> schedule(n) * p(x)(n)`` for a non-negative, non-increasing schedule.

    Below level ``k`` the factor stays in ``[0, schedule(k)]``, so the density
    bound at level ``k`` is the hull of 0 and ``schedule(k)`` times ``p``'s.
    """
    def evaluator(m):
        seq = p.eval_on(m)
        return EventualSeq(lambda n: schedule(n) * seq(n), note="scheduled")

    density = None
    if p.has_bounds:
        def density(block):
            d_lo, d_hi = p.density(block)
            s = float(schedule(block.level))
            if s < 0:
                raise ValueError("schedule must be non-negative")
            s_arr = np.full(len(block), s)
            lo, hi = rnd.interval_mul(s_arr, s_arr, d_lo, d_hi)
            return np.minimum(lo, 0.0), np.maximum(hi, 0.0)

    return MonadicDistribution(p.scheme, evaluator, p.grade, p.base, density,
                               f"scheduled {p.kind}", p.caveats, p.atom, p.points)
