"""Finitely additive measures on cells, their differentials, restriction.

Every measure exposes two evaluation paths:

* ``value(cell)`` -- exact rational whenever the construction allows it;
* ``enclose(block)`` -- float arrays ``(lo, hi)`` bracketing the values of a
  batch of cells, used by the integrator.

Atoms are tied to a scheme: at each level exactly one cell owns the atom,
namely the one :func:`~leibniz.partition.monad_at` picks for ``x0`` under the
atom's tie rule.  Closed cells share endpoints, so this is what keeps an atom
on a grid point from being counted twice.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import _rounding as rnd
from .errors import NonMonotoneStieltjes, SchemeMismatch, UnsupportedMeasureKind
from .expr import Expr, parse_expression
from .partition import (LEFTMOST, Block, Cell, Monad, PartitionScheme, RegularScheme,
                        _tie, as_point)
from .seqcore import EventualSeq

__all__ = [
    "FinAddMeasure", "Length", "Stieltjes", "Atom", "Increment", "Combination",
    "Restricted", "LeafTable", "SetFunction", "make_measure", "differential",
    "restrict", "check_additivity", "AdditivityReport", "as_function",
]

Function = Union[Expr, Callable]


def as_function(f) -> Function:
    """Accept an expression, its text, a number or a Python callable."""
    if isinstance(f, str):
        return parse_expression(f)
    if isinstance(f, (int, Fraction)):
        return Expr._wrap(f)
    if isinstance(f, float):
        return Expr._wrap(Fraction(f))
    if isinstance(f, Expr) or callable(f):
        return f
    raise TypeError(f"cannot use {f!r} as a function")


def _point_enclosure(f: Function, dn: np.ndarray, up: np.ndarray):
    """Enclosure of ``f`` at points known to lie in ``[dn, up]``."""
    if isinstance(f, Expr):
        return f.interval(dn, up)
    vals = np.asarray([float(f(float(x))) for x in dn]) if len(dn) < 64 else _vec_call(f, dn)
    # opaque callables: trust the float value to a relative 1e-12
    slack = 1e-12 * np.abs(vals) + 1e-300
    return vals - slack, vals + slack


def _vec_call(f, xs):
    try:
        out = np.asarray(f(xs), dtype=float)
        if out.shape == xs.shape:
            return out
    except Exception:
        pass
    return np.asarray([float(f(float(x))) for x in xs])


def _fn_value(f: Function, x: Fraction):
    return f.evaluate(x) if isinstance(f, Expr) else f(float(x))


def _enclose_exact(values) -> tuple[np.ndarray, np.ndarray]:
    lo = np.empty(len(values))
    hi = np.empty(len(values))
    for i, v in enumerate(values):
        if isinstance(v, (Fraction, int)):
            lo[i], hi[i] = rnd.frac_down(v), rnd.frac_up(v)
        else:
            lo[i], hi[i] = float(np.nextafter(v, -np.inf)), float(np.nextafter(v, np.inf))
    return lo, hi


class FinAddMeasure:
    """Base class.  Subclasses are immutable value objects."""

    name: str = "measure"

    @property
    def nonnegative(self) -> bool:
        return True

    def value(self, cell: Cell):
        raise NotImplementedError

    __call__ = value

    def enclose(self, block: Block) -> tuple[np.ndarray, np.ndarray]:
        return _enclose_exact([self.value(c) for c in block.cells()])

    def total(self, scheme: PartitionScheme):
        return self.value(scheme.cell(0, 0))

    def __add__(self, other: "FinAddMeasure") -> "Combination":
        return Combination(((Fraction(1), self), (Fraction(1), other)))

    def __rmul__(self, c) -> "Combination":
        return Combination(((Fraction(c), self),))

    def __mul__(self, c) -> "Combination":
        return Combination(((Fraction(c), self),))


@dataclass(frozen=True)
class Length(FinAddMeasure):
    name: str = "length"

    def value(self, cell):
        return cell.width

    def enclose(self, block):
        sch = block.scheme
        if isinstance(sch, RegularScheme):
            w = sch.width(block.level)
            n = len(block)
            dn, up = rnd.frac_down(w), rnd.frac_up(w)
            out = np.full(n, dn)
            return (out, out) if dn == up else (out, np.full(n, up))
        return super().enclose(block)


@dataclass(frozen=True)
class Stieltjes(FinAddMeasure):
    """``[c, d] -> g(d) - g(c)`` for a non-decreasing ``g``."""

    g: Function
    name: str = "stieltjes"

    def value(self, cell):
        v = _fn_value(self.g, cell.hi) - _fn_value(self.g, cell.lo)
        if v < 0:
            raise NonMonotoneStieltjes(f"g decreases on {cell}")
        return v

    def enclose(self, block):
        lo_dn, lo_up, hi_dn, hi_up = block.boxes
        a_lo, a_hi = _point_enclosure(self.g, lo_dn, lo_up)
        b_lo, b_hi = _point_enclosure(self.g, hi_dn, hi_up)
        # g is non-decreasing, so increments are >= 0
        return np.maximum(rnd.sub_down(b_lo, a_hi), 0.0), np.maximum(rnd.sub_up(b_hi, a_lo), 0.0)


@dataclass(frozen=True)
class Increment(FinAddMeasure):
    """Signed increment ``[c, d] -> f(d) - f(c)`` of an arbitrary function."""

    f: Function
    name: str = "increment"

    @property
    def nonnegative(self):
        return False

    def value(self, cell):
        return _fn_value(self.f, cell.hi) - _fn_value(self.f, cell.lo)

    def enclose(self, block):
        lo_dn, lo_up, hi_dn, hi_up = block.boxes
        a_lo, a_hi = _point_enclosure(self.f, lo_dn, lo_up)
        b_lo, b_hi = _point_enclosure(self.f, hi_dn, hi_up)
        return rnd.sub_down(b_lo, a_hi), rnd.sub_up(b_hi, a_lo)


@dataclass(frozen=True)
class Atom(FinAddMeasure):
    """Point mass at ``x0`` owned, level by level, by the tie-rule cell."""

    scheme: PartitionScheme
    x0: Fraction
    mass: Fraction = Fraction(1)
    tie: str = LEFTMOST
    name: str = "atom"

    @property
    def nonnegative(self):
        return self.mass >= 0

    def owner(self, level: int) -> Cell:
        return self.scheme.locate(self.x0, level, self.tie)

    def value(self, cell):
        if self.owner(cell.level).index == cell.index:
            return self.mass
        return Fraction(0)

    def enclose(self, block):
        own = self.owner(block.level).index
        hit = block.idx == own
        return (np.where(hit, rnd.frac_down(self.mass), 0.0),
                np.where(hit, rnd.frac_up(self.mass), 0.0))


@dataclass(frozen=True)
class Combination(FinAddMeasure):
    """Finite linear combination ``sum(c_i * mu_i)``."""

    terms: tuple
    name: str = "combination"

    @property
    def nonnegative(self):
        return all(c >= 0 and m.nonnegative for c, m in self.terms)

    @property
    def scheme(self):
        schemes = {m.scheme for _, m in self.terms if getattr(m, "scheme", None) is not None}
        return schemes.pop() if len(schemes) == 1 else None

    def value(self, cell):
        return sum((c * m.value(cell) for c, m in self.terms), Fraction(0))

    def enclose(self, block):
        lo = np.zeros(len(block))
        hi = np.zeros(len(block))
        for c, m in self.terms:
            m_lo, m_hi = m.enclose(block)
            c_lo = np.full(len(block), rnd.frac_down(c))
            c_hi = np.full(len(block), rnd.frac_up(c))
            p_lo, p_hi = rnd.interval_mul(c_lo, c_hi, m_lo, m_hi)
            lo, hi = rnd.add_down(lo, p_lo), rnd.add_up(hi, p_hi)
        return lo, hi


def _normalize_open_set(open_set) -> tuple:
    """Sorted, merged tuple of open intervals ``(c, d)``; ends may be infinite."""
    items = []
    for c, d in open_set:
        c = -math.inf if c is None or c == -math.inf else Fraction(c)
        d = math.inf if d is None or d == math.inf else Fraction(d)
        if c < d:
            items.append((c, d))
    items.sort()
    merged: list = []
    for c, d in items:
        if merged and c < merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], d))
        else:
            merged.append((c, d))
    return tuple(merged)


@dataclass(frozen=True)
class Restricted(FinAddMeasure):
    """``T -> mu(U ∩ T)`` for ``U`` a finite union of open intervals."""

    base: FinAddMeasure
    open_set: tuple
    name: str = "restricted"

    def value(self, cell):
        total = Fraction(0)
        for c, d in self.open_set:
            left = max(c, cell.lo)
            right = min(d, cell.hi)
            if left < right:
                part = Cell(Fraction(left), Fraction(right), cell.level, cell.index)
                total += self.base.value(part) if not isinstance(self.base, Length) else part.width
        return total

    def enclose(self, block):
        lo_dn, lo_up, hi_dn, hi_up = block.boxes
        out_lo = np.zeros(len(block))
        out_hi = np.zeros(len(block))
        for c, d in self.open_set:
            c_dn = -np.inf if c == -math.inf else rnd.frac_down(c)
            c_up = -np.inf if c == -math.inf else rnd.frac_up(c)
            d_dn = np.inf if d == math.inf else rnd.frac_down(d)
            d_up = np.inf if d == math.inf else rnd.frac_up(d)
            # inner and outer overlaps
            l_in, r_in = np.maximum(c_up, lo_up), np.minimum(d_dn, hi_dn)
            l_out, r_out = np.maximum(c_dn, lo_dn), np.minimum(d_up, hi_up)
            if isinstance(self.base, Length):
                part_lo = np.maximum(rnd.sub_down(r_in, l_in), 0.0)
                part_hi = np.maximum(rnd.sub_up(r_out, l_out), 0.0)
            else:
                g = self.base.g
                gl_lo, gl_hi = _point_enclosure(g, np.minimum(l_out, r_out), np.minimum(l_in, r_out))
                gr_lo, gr_hi = _point_enclosure(g, np.maximum(r_in, l_out), np.maximum(r_out, l_out))
                part_lo = np.where(r_in > l_in, np.maximum(rnd.sub_down(gr_lo, gl_hi), 0.0), 0.0)
                part_hi = np.where(r_out > l_out, np.maximum(rnd.sub_up(gr_hi, gl_lo), 0.0), 0.0)
            out_lo = rnd.add_down(out_lo, part_lo)
            out_hi = rnd.add_up(out_hi, part_hi)
        return out_lo, out_hi


@dataclass(frozen=True, eq=False)
class LeafTable(FinAddMeasure):
    """Measure given by weights on the cells of one level of a regular scheme.

    Coarser cells get the sum of their leaves; finer cells split their leaf's
    weight evenly among siblings, which keeps the measure additive at every
    level.
    """

    scheme: RegularScheme
    depth: int
    weights: tuple
    name: str = "table"
    _prefix: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if len(self.weights) != self.scheme.size(self.depth):
            raise ValueError("need one weight per cell of the leaf level")
        acc = [Fraction(0)]
        for w in self.weights:
            acc.append(acc[-1] + Fraction(w))
        object.__setattr__(self, "_prefix", tuple(acc))

    @property
    def nonnegative(self):
        return all(w >= 0 for w in self.weights)

    def value(self, cell):
        k = self.scheme.branching
        if cell.level <= self.depth:
            span = k ** (self.depth - cell.level)
            return self._prefix[(cell.index + 1) * span] - self._prefix[cell.index * span]
        up = k ** (cell.level - self.depth)
        return Fraction(self.weights[cell.index // up]) / up


@dataclass(frozen=True, eq=False)
class SetFunction(FinAddMeasure):
    """Any map from cells to numbers.  Additivity is not assumed; use
    :func:`check_additivity` to test it."""

    fn: Callable[[Cell], object]
    name: str = "set function"
    signed: bool = True

    @property
    def nonnegative(self):
        return not self.signed

    def value(self, cell):
        return self.fn(cell)


def make_measure(kind: str, *, g=None, x0=None, mass=1, tie: str = LEFTMOST,
                 scheme: Optional[PartitionScheme] = None, domain=None) -> FinAddMeasure:
    """Build a length, Stieltjes or atom measure.

    ``stieltjes`` needs ``g`` and is checked for monotonicity on ``domain`` (or
    the scheme's domain) when one is given.  ``atom`` needs ``x0`` and the
    scheme that decides ownership at shared endpoints.
    """
    if kind == "length":
        return Length()
    if kind == "stieltjes":
        if g is None:
            raise ValueError("stieltjes measure needs g")
        g = as_function(g)
        dom = domain or (scheme.domain if scheme is not None else None)
        if dom is not None:
            _check_monotone(g, Fraction(dom[0]), Fraction(dom[1]))
        return Stieltjes(g)
    if kind == "atom":
        if scheme is None or x0 is None:
            raise ValueError("atom measure needs x0 and a scheme")
        return Atom(scheme, as_point(x0), Fraction(mass), _tie(tie))
    raise UnsupportedMeasureKind(f"unknown measure kind {kind!r}")


def _check_monotone(g, a: Fraction, b: Fraction, samples: int = 1024) -> None:
    pts = [a + (b - a) * i / samples for i in range(samples + 1)]
    vals = [_fn_value(g, p) for p in pts]
    for p, v1, v2 in zip(pts, vals, vals[1:]):
        if v2 < v1:
            raise NonMonotoneStieltjes(f"g decreases near x = {float(p):g}")


def differential(mu: FinAddMeasure, m: Monad) -> EventualSeq:
    """The sequence ``n -> mu(m.cell(n))``."""
    bound = getattr(mu, "scheme", None)
    if bound is not None and bound != m.scheme:
        raise SchemeMismatch("measure and monad live on different schemes")
    return EventualSeq(lambda n: float(mu.value(m.cell(n))), note=f"d{mu.name}")


def restrict(mu: FinAddMeasure, open_set: Sequence) -> FinAddMeasure:
    """Restriction of ``mu`` to a finite union of open intervals.

    ``open_set`` is a list of ``(c, d)`` pairs; ``None`` or infinities stand for
    unbounded ends.  Atoms restrict to themselves or to zero, except when the
    atom sits on a boundary point, where membership is ambiguous.
    """
    norm = _normalize_open_set(open_set)
    if isinstance(mu, (Length, Stieltjes)):
        return Restricted(mu, norm)
    if isinstance(mu, Atom):
        for c, d in norm:
            if mu.x0 == c or mu.x0 == d:
                raise UnsupportedMeasureKind(f"atom at {mu.x0} lies on the boundary of the open set")
        inside = any(c < mu.x0 < d for c, d in norm)
        return mu if inside else Combination(())
    raise UnsupportedMeasureKind(f"cannot restrict a {mu.name} measure")


@dataclass
class AdditivityReport:
    passed: bool
    worst: float
    location: Optional[Cell]
    checked: int

    def __bool__(self):
        return self.passed


def check_additivity(mu: FinAddMeasure, scheme: PartitionScheme, depth: int,
                     tol: float = 0.0) -> AdditivityReport:
    """Compare every cell above ``depth`` with the sum over its children.

    Rational-valued measures are compared exactly; ``tol`` allows for float
    valued ones.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    worst = 0
    where = None
    checked = 0
    frontier = [scheme.cell(0, 0)]
    for _ in range(depth):
        nxt = []
        for u in frontier:
            kids = scheme.children(u)
            gap = abs(sum((mu.value(c) for c in kids), Fraction(0)) - mu.value(u))
            checked += 1
            if gap > worst:
                worst, where = gap, u
            nxt.extend(kids)
        frontier = nxt
    return AdditivityReport(worst <= tol, float(worst), where if worst > tol else None, checked)
