"""Eventual sequences and finite-horizon comparison verdicts.

An :class:`EventualSeq` is a lazily evaluated infinite sequence of floats.
Two sequences are regarded as the same object when they agree from some
index on, so every comparison here is made on a finite horizon and reports
what was actually inspected.  Nothing beyond the horizon is ever claimed.

Evidence rule shared by the eventual and ultra modes: a relation is
*Certified* from ``n0`` when it holds on ``[n0, horizon]`` and ``n0`` lies in
the first half of the window (``n0 <= horizon // 2``), so at least half of the
inspected indices back the claim.  It is *Refuted* when the relation fails on
the whole second half.  Anything else is *Undetermined*.
"""
from __future__ import annotations

import enum
import math
import operator
from dataclasses import dataclass
from typing import Callable, Optional

__all__ = [
    "EventualSeq",
    "Verdict",
    "CompareVerdict",
    "IndeterminateEntry",
    "combine",
    "totally_majorizes",
    "eventually_majorizes",
    "ultra_compare",
    "is_infinitesimal",
    "eventually_equal",
]


class IndeterminateEntry(ArithmeticError):
    """Raised for 0/0 entries, which have no signed-infinity reading."""


def _div(x: float, y: float) -> float:
    if y == 0:
        if x == 0 or math.isnan(x):
            raise IndeterminateEntry("0/0 entry in termwise division")
        return math.copysign(math.inf, x) * math.copysign(1.0, y)
    return x / y


_OPS: dict[str, Callable[[float, float], float]] = {
    "add": operator.add,
    "sub": operator.sub,
    "mul": operator.mul,
    "div": _div,
    "abs": lambda x, _y: abs(x),
}


class EventualSeq:
    """Deterministic lazy sequence ``n -> float`` with a compute-once memo."""

    __slots__ = ("_gen", "_memo", "note")

    def __init__(self, generator: Callable[[int], float], note: str = ""):
        self._gen = generator
        self._memo: dict[int, float] = {}
        self.note = note

    def __call__(self, n: int) -> float:
        if n < 0:
            raise IndexError("sequence indices are natural numbers")
        try:
            return self._memo[n]
        except KeyError:
            value = float(self._gen(n))
            # concurrent readers may race here; the generator is pure so
            # whichever write lands is identical
            self._memo[n] = value
            return value

    __getitem__ = __call__

    def prefix(self, length: int) -> list[float]:
        return [self(n) for n in range(length)]

    def __repr__(self) -> str:
        head = ", ".join(f"{v:g}" for v in self.prefix(5))
        return f"EventualSeq([{head}, ...]{' ' + repr(self.note) if self.note else ''})"

    # constructors -------------------------------------------------------
    @classmethod
    def constant(cls, c: float) -> "EventualSeq":
        c = float(c)
        return cls(lambda n: c, note=f"const {c:g}")

    @classmethod
    def from_prefix(cls, head, tail: float) -> "EventualSeq":
        """Finite ``head`` followed by the constant ``tail``."""
        head = [float(v) for v in head]
        tail = float(tail)
        return cls(lambda n: head[n] if n < len(head) else tail)

    # arithmetic ---------------------------------------------------------
    @staticmethod
    def _lift(other) -> "EventualSeq":
        return other if isinstance(other, EventualSeq) else EventualSeq.constant(other)

    def __add__(self, other):
        return combine(self, self._lift(other), "add")

    __radd__ = __add__

    def __sub__(self, other):
        return combine(self, self._lift(other), "sub")

    def __rsub__(self, other):
        return combine(self._lift(other), self, "sub")

    def __mul__(self, other):
        return combine(self, self._lift(other), "mul")

    __rmul__ = __mul__

    def __truediv__(self, other):
        return combine(self, self._lift(other), "div")

    def __rtruediv__(self, other):
        return combine(self._lift(other), self, "div")

    def __neg__(self):
        return EventualSeq(lambda n: -self(n), note="neg")

    def __abs__(self):
        return combine(self, self, "abs")


def combine(a: EventualSeq, b: EventualSeq, op: str) -> EventualSeq:
    """Termwise ``op`` of two sequences; ``op`` is add, sub, mul, div or abs.

    ``abs`` takes the absolute value of ``a`` and ignores ``b``.  Division by a
    zero entry yields an infinity signed by the operands; 0/0 raises
    :class:`IndeterminateEntry` when that entry is evaluated.
    """
    try:
        f = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown op {op!r}") from None
    note = op
    if op == "div":
        note = "div (signed infinity where the denominator vanishes)"
    return EventualSeq(lambda n: f(a(n), b(n)), note=note)


class Verdict(enum.Enum):
    CERTIFIED = "certified"
    REFUTED = "refuted"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class CompareVerdict:
    kind: Verdict
    horizon: int
    # start index for CERTIFIED, counterexample index for REFUTED
    index: Optional[int] = None

    @property
    def certified(self) -> bool:
        return self.kind is Verdict.CERTIFIED

    @property
    def refuted(self) -> bool:
        return self.kind is Verdict.REFUTED

    @property
    def undetermined(self) -> bool:
        return self.kind is Verdict.UNDETERMINED

    def __str__(self) -> str:
        if self.kind is Verdict.UNDETERMINED:
            return f"undetermined@{self.horizon}"
        return f"{self.kind.value}({self.index})@{self.horizon}"

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "index": self.index, "horizon": self.horizon}


def _certified(n0, h):
    return CompareVerdict(Verdict.CERTIFIED, h, n0)


def _refuted(i, h):
    return CompareVerdict(Verdict.REFUTED, h, i)


def _check_horizon(horizon: int) -> None:
    if horizon < 1:
        raise ValueError("horizon must be >= 1")


def _mask(a, b, horizon, rel=operator.ge) -> list[bool]:
    return [bool(rel(a(n), b(n))) for n in range(horizon + 1)]


def _tail_verdict(mask: list[bool], horizon: int) -> CompareVerdict:
    half = horizon // 2
    last_bad = max((i for i, ok in enumerate(mask) if not ok), default=-1)
    n0 = last_bad + 1
    if n0 <= half:
        return _certified(n0, horizon)
    if not any(mask[half:]):
        return _refuted(horizon, horizon)
    return CompareVerdict(Verdict.UNDETERMINED, horizon)


def totally_majorizes(a: EventualSeq, b: EventualSeq, horizon: int) -> CompareVerdict:
    """``a(n) >= b(n)`` at every index ``0..horizon``."""
    _check_horizon(horizon)
    for n in range(horizon + 1):
        if not a(n) >= b(n):
            return _refuted(n, horizon)
    return _certified(0, horizon)


def eventually_majorizes(a: EventualSeq, b: EventualSeq, horizon: int) -> CompareVerdict:
    """``a(n) >= b(n)`` for all but finitely many ``n``, judged up to ``horizon``.

    >>> eventually_majorizes(EventualSeq.constant(1),
    ...                      EventualSeq.from_prefix([2], 0), 50).index
    1
    """
    _check_horizon(horizon)
    return _tail_verdict(_mask(a, b, horizon), horizon)


def ultra_compare(a: EventualSeq, b: EventualSeq, horizon: int) -> CompareVerdict:
    """``a >= b`` on a member of every free ultrafilter, decided on the
    finite/cofinite fragment only.

    A cofinite agreement set belongs to every free ultrafilter, so that case is
    Certified; a finite one belongs to none, so Refuted.  The witness for a
    refutation is the index where the trailing run of failures begins.
    Anything else depends on the ultrafilter and stays Undetermined.
    """
    _check_horizon(horizon)
    mask = _mask(a, b, horizon)
    half = horizon // 2
    if not any(mask[half:]):
        last_good = max((i for i, ok in enumerate(mask) if ok), default=-1)
        return _refuted(last_good + 1, horizon)
    return _tail_verdict(mask, horizon)


def is_infinitesimal(a: EventualSeq, tol_schedule: Callable[[int], float],
                     horizon: int) -> CompareVerdict:
    """``|a(n)| <= tol_schedule(n)`` from some index on (same evidence rule).

    The schedule must be positive and non-increasing; ``tol_schedule(0)`` may be
    ``inf``.
    """
    _check_horizon(horizon)
    tols = [float(tol_schedule(n)) for n in range(horizon + 1)]
    if any(t <= 0 for t in tols) or any(t2 > t1 for t1, t2 in zip(tols, tols[1:])):
        raise ValueError("tolerance schedule must be positive and non-increasing")
    mask = [abs(a(n)) <= tols[n] for n in range(horizon + 1)]
    return _tail_verdict(mask, horizon)


def eventually_equal(a: EventualSeq, b: EventualSeq, horizon: int) -> CompareVerdict:
    """Equality of eventual sequences, judged up to ``horizon``."""
    _check_horizon(horizon)
    return _tail_verdict(_mask(a, b, horizon, operator.eq), horizon)
