"""Monotone partition sequences of a closed segment, their cells and monads.

A scheme is a sequence of finite partitions ``level(0) = {[a, b]}``,
``level(1)``, ... of the segment, each refining the previous one.  Cells
(elements of some level) are closed intervals with exact rational endpoints.
A monad is a nested chain of cells, one per level.

Regular schemes (dyadic, or k-adic for any branching k) are index
arithmetic and never materialize a level unless asked to.  Custom schemes
are driven by a user generator and validated level by level on first use.
"""
from __future__ import annotations

import math
import random
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import _rounding as rnd
from .errors import (DegenerateDomain, NotShrinking, PointOutsideDomain,
                     RootHasNoParent, SchemeViolation)
from .seqcore import CompareVerdict, Verdict

__all__ = [
    "Cell", "Block", "PartitionScheme", "RegularScheme", "CustomScheme", "Monad",
    "build_dyadic_scheme", "build_regular_scheme", "parent", "monad_at",
    "monad_limit", "is_infinitesimal_scheme", "LEFTMOST", "RIGHTMOST",
]

LEFTMOST = "leftmost"
RIGHTMOST = "rightmost"
_TIES = (LEFTMOST, RIGHTMOST)


def _tie(rule: str) -> str:
    aliases = {"left": LEFTMOST, "right": RIGHTMOST}
    rule = aliases.get(rule, rule)
    if rule not in _TIES:
        raise ValueError(f"tie rule must be leftmost or rightmost, got {rule!r}")
    return rule


def as_point(p):
    """Exact rational for ordinary numbers; other real types pass through."""
    if isinstance(p, (Fraction, int, float, str)):
        return Fraction(p)
    return p


@dataclass(frozen=True)
class Cell:
    """A closed interval ``[lo, hi]`` sitting at position ``index`` of a level."""

    lo: Fraction
    hi: Fraction
    level: int
    index: int

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def __contains__(self, x) -> bool:
        return self.contains(x)

    def within(self, other: "Cell") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def __repr__(self) -> str:
        return f"Cell([{self.lo}, {self.hi}] @ {self.level}:{self.index})"


class PartitionScheme:
    """Common interface; see :class:`RegularScheme` and :class:`CustomScheme`."""

    kind: str = "custom"
    # deepest level probes may visit; None means unbounded
    level_limit: Optional[int] = None

    def __init__(self, a, b):
        a, b = Fraction(a), Fraction(b)
        if a >= b:
            raise DegenerateDomain(f"empty or reversed domain [{a}, {b}]")
        self.a = a
        self.b = b

    @property
    def domain(self) -> tuple[Fraction, Fraction]:
        return (self.a, self.b)

    # exact interface ------------------------------------------------------
    def size(self, n: int) -> int:
        raise NotImplementedError

    def cell(self, n: int, i: int) -> Cell:
        raise NotImplementedError

    def level(self, n: int) -> tuple[Cell, ...]:
        return tuple(self.cell(n, i) for i in range(self.size(n)))

    def parent(self, u: Cell) -> Cell:
        raise NotImplementedError

    def parent_index(self, n: int, i: int) -> int:
        """Index at level ``n - 1`` of the parent of cell ``(n, i)``."""
        return self.parent(self.cell(n, i)).index

    def children(self, u: Cell) -> list[Cell]:
        raise NotImplementedError

    def locate(self, point, n: int, tie: str = LEFTMOST) -> Cell:
        """Cell of level ``n`` holding ``point`` under the tie rule."""
        raise NotImplementedError

    def max_width(self, n: int) -> Fraction:
        return max(c.width for c in self.level(n))

    # vectorized interface used by the integrator ---------------------------
    def child_indices(self, n: int, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Children (at level n+1) of the level-n cells ``idx``.

        Returns ``(child_idx, owner)`` where ``owner[j]`` is the position in
        ``idx`` of the parent of ``child_idx[j]``; children come out in
        left-to-right order.
        """
        raise NotImplementedError

    def endpoint_boxes(self, n: int, idx: np.ndarray):
        """Float enclosures ``(lo_dn, lo_up, hi_dn, hi_up)`` of both endpoints."""
        raise NotImplementedError

    def float_bounds(self, n: int, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Outward float enclosure ``(lo_dn, hi_up)`` of the cells."""
        lo_dn, _, _, hi_up = self.endpoint_boxes(n, idx)
        return lo_dn, hi_up

    def describe(self) -> dict:
        return {"kind": self.kind, "domain": [str(self.a), str(self.b)]}

    def __contains__(self, x) -> bool:
        return self.a <= x <= self.b

    def block(self, n: int, idx=None) -> "Block":
        if idx is None:
            idx = np.arange(self.size(n), dtype=np.int64)
        return Block(self, n, np.asarray(idx, dtype=np.int64))


class Block:
    """A batch of cells from one level, addressed by index, for vectorized work."""

    def __init__(self, scheme: "PartitionScheme", level: int, idx: np.ndarray):
        self.scheme = scheme
        self.level = level
        self.idx = idx
        self._boxes = None

    def __len__(self):
        return len(self.idx)

    @property
    def boxes(self):
        """``(lo_dn, lo_up, hi_dn, hi_up)`` float enclosures of the endpoints."""
        if self._boxes is None:
            self._boxes = self.scheme.endpoint_boxes(self.level, self.idx)
        return self._boxes

    @property
    def lo(self) -> np.ndarray:
        return self.boxes[0]

    @property
    def hi(self) -> np.ndarray:
        return self.boxes[3]

    def cells(self) -> list["Cell"]:
        return [self.scheme.cell(self.level, int(i)) for i in self.idx]


class RegularScheme(PartitionScheme):
    """Level ``n`` splits ``[a, b]`` into ``branching**n`` equal cells."""

    def __init__(self, a, b, branching: int = 2):
        super().__init__(a, b)
        if branching < 2:
            raise ValueError("branching must be at least 2")
        self.branching = branching
        self.kind = "dyadic" if branching == 2 else "custom"
        self._a_f = float(self.a)
        self._a_exact = rnd.is_exact_float(self.a)

    def __eq__(self, other):
        return (isinstance(other, RegularScheme) and self.branching == other.branching
                and self.a == other.a and self.b == other.b)

    def __hash__(self):
        return hash((self.a, self.b, self.branching))

    def __repr__(self):
        return f"RegularScheme([{self.a}, {self.b}], branching={self.branching})"

    def size(self, n: int) -> int:
        return self.branching ** n

    def width(self, n: int) -> Fraction:
        return (self.b - self.a) / self.branching ** n

    def max_width(self, n: int) -> Fraction:
        return self.width(n)

    def cell(self, n: int, i: int) -> Cell:
        if not 0 <= i < self.size(n):
            raise IndexError(f"level {n} has no cell {i}")
        w = self.width(n)
        return Cell(self.a + i * w, self.a + (i + 1) * w, n, i)

    def parent(self, u: Cell) -> Cell:
        if u.level == 0:
            raise RootHasNoParent("the root cell has no parent")
        return self.cell(u.level - 1, u.index // self.branching)

    def parent_index(self, n: int, i: int) -> int:
        if n == 0:
            raise RootHasNoParent("the root cell has no parent")
        return i // self.branching

    def children(self, u: Cell) -> list[Cell]:
        k = self.branching
        return [self.cell(u.level + 1, u.index * k + j) for j in range(k)]

    def locate(self, point, n: int, tie: str = LEFTMOST) -> Cell:
        tie = _tie(tie)
        p = as_point(point)
        if not (self.a <= p <= self.b):
            raise PointOutsideDomain(f"{point} not in [{self.a}, {self.b}]")
        m = self.size(n)
        t = (p - self.a) * m / (self.b - self.a)
        i = math.floor(t)
        if i == t:  # grid point
            i = int(i)
            if tie == LEFTMOST:
                i = i - 1 if i > 0 else 0
            else:
                i = i if i < m else m - 1
        else:
            i = int(i)
        return self.cell(n, i)

    def child_indices(self, n, idx):
        k = self.branching
        idx = np.asarray(idx, dtype=np.int64)
        child = (idx[:, None] * k + np.arange(k, dtype=np.int64)[None, :]).ravel()
        owner = np.repeat(np.arange(len(idx)), k)
        return child, owner

    def endpoint_boxes(self, n, idx):
        idx = np.asarray(idx, dtype=np.int64)
        h = self.width(n)
        h_f = float(h)
        h_exact = rnd.is_exact_float(h)
        out = []
        for off in (0, 1):
            i_f = (idx + off).astype(float)
            p, pe = rnd.two_prod(np.full_like(i_f, h_f), i_f)
            s, se = rnd.two_sum(np.full_like(i_f, self._a_f), p)
            slack = np.abs(pe) + np.abs(se)
            if not h_exact:
                slack = slack + i_f * np.spacing(abs(h_f))
            if not self._a_exact:
                slack = slack + np.spacing(abs(self._a_f))
            slack = slack * (1 + 2.0 ** -40)
            out.append(rnd.sub_down(s, slack))
            out.append(rnd.add_up(s, slack))
        return tuple(out)

    def describe(self) -> dict:
        d = super().describe()
        d["params"] = {"branching": self.branching}
        return d


class CustomScheme(PartitionScheme):
    """Scheme driven by ``generator(n) -> [(lo, hi), ...]`` in left-to-right order.

    Each level is validated the first time it is requested; the first broken
    rule raises :class:`SchemeViolation`.  Levels are materialized in full,
    so ``level_limit`` caps how deep the integrator's probes descend.
    """

    def __init__(self, a, b, generator: Callable[[int], Iterable[Sequence]],
                 name: str = "custom", level_limit: Optional[int] = None):
        super().__init__(a, b)
        self._gen = generator
        self.name = name
        self.level_limit = level_limit
        self._levels: dict[int, tuple[Cell, ...]] = {}
        self._parents: dict[int, np.ndarray] = {}
        self._child_start: dict[int, np.ndarray] = {}
        self._floats: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self._lock = threading.Lock()

    def __repr__(self):
        return f"CustomScheme([{self.a}, {self.b}], {self.name!r})"

    def _build(self, n: int) -> tuple[Cell, ...]:
        raw = [(Fraction(lo), Fraction(hi)) for lo, hi in self._gen(n)]
        cells = tuple(Cell(lo, hi, n, i) for i, (lo, hi) in enumerate(raw))
        if not cells:
            raise SchemeViolation(f"level {n} is empty")
        if n == 0 and (len(cells) != 1 or (cells[0].lo, cells[0].hi) != (self.a, self.b)):
            raise SchemeViolation("level 0 must be the whole domain")
        if cells[0].lo != self.a or cells[-1].hi != self.b:
            raise SchemeViolation(f"level {n} does not cover [{self.a}, {self.b}]")
        for c in cells:
            if not c.lo < c.hi:
                raise SchemeViolation(f"level {n}: cell {c} has empty interior")
        for c1, c2 in zip(cells, cells[1:]):
            if c1.hi != c2.lo:
                raise SchemeViolation(f"level {n}: cells {c1} and {c2} leave a gap or overlap")
        if n > 0:
            prev = self.level(n - 1)
            parents = np.empty(len(cells), dtype=np.int64)
            j = 0
            for i, c in enumerate(cells):
                while j < len(prev) and prev[j].hi <= c.lo:
                    j += 1
                if j == len(prev) or not c.within(prev[j]):
                    raise SchemeViolation(f"level {n}: {c} lies in no level-{n - 1} cell")
                parents[i] = j
            self._parents[n] = parents
            self._child_start[n - 1] = np.searchsorted(parents, np.arange(len(prev) + 1))
        return cells

    def level(self, n: int) -> tuple[Cell, ...]:
        try:
            return self._levels[n]
        except KeyError:
            pass
        if n > 0:
            self.level(n - 1)
        with self._lock:
            if n not in self._levels:
                self._levels[n] = self._build(n)
        return self._levels[n]

    def size(self, n: int) -> int:
        return len(self.level(n))

    def cell(self, n: int, i: int) -> Cell:
        return self.level(n)[i]

    def parent(self, u: Cell) -> Cell:
        if u.level == 0:
            raise RootHasNoParent("the root cell has no parent")
        self.level(u.level)
        return self.level(u.level - 1)[int(self._parents[u.level][u.index])]

    def parent_index(self, n: int, i: int) -> int:
        if n == 0:
            raise RootHasNoParent("the root cell has no parent")
        self.level(n)
        return int(self._parents[n][i])

    def children(self, u: Cell) -> list[Cell]:
        nxt = self.level(u.level + 1)
        cs = self._child_start[u.level]
        return list(nxt[cs[u.index]:cs[u.index + 1]])

    def locate(self, point, n: int, tie: str = LEFTMOST) -> Cell:
        tie = _tie(tie)
        p = as_point(point)
        if not (self.a <= p <= self.b):
            raise PointOutsideDomain(f"{point} not in [{self.a}, {self.b}]")
        cells = self.level(n)
        hits = [c for c in cells if c.contains(p)]
        return hits[0] if tie == LEFTMOST else hits[-1]

    def child_indices(self, n, idx):
        self.level(n + 1)
        cs = self._child_start[n]
        idx = np.asarray(idx, dtype=np.int64)
        starts, stops = cs[idx], cs[idx + 1]
        counts = stops - starts
        owner = np.repeat(np.arange(len(idx)), counts)
        offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        return np.repeat(starts, counts) + offsets, owner

    def endpoint_boxes(self, n, idx):
        if n not in self._floats:
            cells = self.level(n)
            self._floats[n] = tuple(
                np.array([f(getattr(c, end)) for c in cells])
                for end in ("lo", "hi") for f in (rnd.frac_down, rnd.frac_up))
        idx = np.asarray(idx, dtype=np.int64)
        return tuple(arr[idx] for arr in self._floats[n])

    def describe(self) -> dict:
        d = super().describe()
        d["params"] = {"name": self.name}
        return d


def build_dyadic_scheme(a, b) -> RegularScheme:
    """Level ``n`` holds ``2**n`` equal cells of width ``(b - a) / 2**n``."""
    return RegularScheme(a, b, 2)


def build_regular_scheme(a, b, branching: int) -> RegularScheme:
    return RegularScheme(a, b, branching)


def parent(scheme: PartitionScheme, u: Cell) -> Cell:
    return scheme.parent(u)


class Monad:
    """A nested chain of cells, one per level, evaluated lazily.

    ``point`` is set when the monad was built around a known point; its limit
    is then exact.  Anonymous chains (random descents) have ``point=None``.
    """

    def __init__(self, scheme: PartitionScheme, step: Callable[[int], Cell],
                 point=None, tie: str = LEFTMOST, label: str = ""):
        self.scheme = scheme
        self._step = step
        self.point = point
        self.tie = tie
        self.label = label
        self._chain: dict[int, Cell] = {}

    def cell(self, n: int) -> Cell:
        try:
            return self._chain[n]
        except KeyError:
            c = self._step(n)
            self._chain[n] = c
            return c

    chain = cell

    def cells(self, depth: int) -> list[Cell]:
        return [self.cell(n) for n in range(depth + 1)]

    def __repr__(self):
        if self.point is not None:
            return f"Monad(at {self.point}, {self.tie})"
        return f"Monad({self.label or 'anonymous'})"

    @classmethod
    def random(cls, scheme: PartitionScheme, seed: int) -> "Monad":
        """Uniformly random descent through the refinement tree."""
        root = scheme.cell(0, 0)
        path: list[Cell] = [root]

        def step(n):
            while len(path) <= n:
                kids = scheme.children(path[-1])
                rng = random.Random(f"{seed}:{len(path)}")
                path.append(kids[rng.randrange(len(kids))])
            return path[n]

        return cls(scheme, step, label=f"random seed={seed}")

    @classmethod
    def from_choices(cls, scheme: PartitionScheme, choose: Callable[[int, list[Cell]], int],
                     label: str = "") -> "Monad":
        """Descent where ``choose(n, children)`` picks the child for level ``n``."""
        path: list[Cell] = [scheme.cell(0, 0)]

        def step(n):
            while len(path) <= n:
                kids = scheme.children(path[-1])
                path.append(kids[choose(len(path), kids)])
            return path[n]

        return cls(scheme, step, label=label)


def monad_at(scheme: PartitionScheme, point, tie: str = LEFTMOST) -> Monad:
    """The monad of cells holding ``point``; shared endpoints follow ``tie``.

    With ``leftmost`` a grid point follows the cell that has it as right
    endpoint (when such a cell exists), with ``rightmost`` the one that has it
    as left endpoint.
    """
    tie = _tie(tie)
    p = as_point(point)
    if not (scheme.a <= p <= scheme.b):
        raise PointOutsideDomain(f"{point} not in [{scheme.a}, {scheme.b}]")
    if isinstance(scheme, RegularScheme):
        return Monad(scheme, lambda n: scheme.locate(p, n, tie), point=p, tie=tie)
    path: list[Cell] = [scheme.cell(0, 0)]

    def step(n):
        while len(path) <= n:
            hits = [c for c in scheme.children(path[-1]) if c.contains(p)]
            path.append(hits[0] if tie == LEFTMOST else hits[-1])
        return path[n]

    return Monad(scheme, step, point=p, tie=tie)


def monad_limit(m: Monad, tol: float, probe_depth: int = 256) -> Fraction:
    """Midpoint of the first chain cell of width ``<= tol``.

    The true limit lies within ``tol`` of the returned value (in fact within
    ``tol / 2``).  Raises :class:`NotShrinking` if no chain cell up to
    ``probe_depth`` is narrow enough.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    t = Fraction(tol)
    for n in range(probe_depth + 1):
        c = m.cell(n)
        if c.width <= t:
            return c.midpoint
    raise NotShrinking(f"chain width {float(m.cell(probe_depth).width):g} > {tol:g} "
                       f"at depth {probe_depth}")


def is_infinitesimal_scheme(scheme: PartitionScheme, depth: int, tol: float) -> CompareVerdict:
    """Finite-depth evidence that every monad of ``scheme`` shrinks to a point.

    Certified from the first level whose widest cell is ``<= tol`` when that
    happens by ``depth``; Refuted when the widest cell has not narrowed at all
    over the second half of the inspected levels; Undetermined otherwise.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    widths = [scheme.max_width(n) for n in range(depth + 1)]
    t = Fraction(tol)
    if any(w2 > w1 for w1, w2 in zip(widths, widths[1:])):
        return CompareVerdict(Verdict.REFUTED, depth, next(
            n + 1 for n, (w1, w2) in enumerate(zip(widths, widths[1:])) if w2 > w1))
    if widths[depth] <= t:
        return CompareVerdict(Verdict.CERTIFIED, depth, next(n for n, w in enumerate(widths) if w <= t))
    if widths[depth] == widths[depth // 2]:
        return CompareVerdict(Verdict.REFUTED, depth, depth)
    return CompareVerdict(Verdict.UNDETERMINED, depth)
