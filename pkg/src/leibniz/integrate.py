"""Sandwich-measure certification of Leibniz integrals.

``integrate`` refines the scheme level by level.  On every active cell it
takes the distribution's hereditary density bound and turns it into a lower
and an upper value (density x reference measure).  Cells whose density bound
is exact stop refining: their descendants add up to the same value.  Once the
level sums are within ``2 * epsilon`` the two step measures are assembled
into :class:`MeasureTable` objects:

* above the certified depth a cell's value is the sum of its children;
* on a leaf it is the cell's own bound;
* below a leaf the leaf density is continued against the reference measure.

Both tables are finitely additive, and the upper one dominates the
distribution from the certified depth on along every monad.  Symmetrically
the lower one is dominated by it.
"""
from __future__ import annotations

import json
import math
import re
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import chain
from typing import Callable, Optional, Union

import numpy as np
from scipy import integrate as sp_integrate

from .distribution import MonadicDistribution, form_f_dmu
from .errors import HypothesisNotMet, LeibnizError, ToleranceNotReached
from .expr import Expr
from .measure import FinAddMeasure, Increment, Length, as_function
from .partition import Cell, Monad, PartitionScheme, monad_at
from .seqcore import (CompareVerdict, EventualSeq, Verdict, eventually_majorizes,
                      totally_majorizes, ultra_compare)

__all__ = [
    "MeasureTable", "IntegralCertificate", "NotCertified", "LevelSums",
    "bound_on_fraction", "integrate", "darboux_sums", "verify_certificate",
    "VerificationReport", "comparison_witness", "newton_leibniz_report",
    "NewtonLeibnizReport", "reference_quadrature", "probe_monads", "MODES",
    "cross_scheme_check", "CrossSchemeReport", "dumps_json",
]

MODES = ("total", "eventual", "ultra")
MAX_DEPTH_LIMIT = 50
# relative slack for float comparisons of table values against distribution
# values; both sides are rounded independently
COMPARE_RTOL = 1e-9


@dataclass(frozen=True)
class FractionBound:
    lo: float
    hi: float
    caveat: Optional[str] = None

    def __iter__(self):
        return iter((self.lo, self.hi))


def bound_on_fraction(phi: MonadicDistribution, u: Cell, samples: int = 32,
                      seed: int = 0) -> FractionBound:
    """Range of ``phi``'s level-``u.level`` values over monads through ``u``.

    Uses the distribution's bound when it has one; otherwise samples monads
    through ``u`` and says so in ``caveat``.
    """
    hint = phi.bound_hint(u)
    if hint is not None:
        return FractionBound(*hint)
    scheme = phi.scheme
    path = [u]
    while path[-1].level > 0:
        path.append(scheme.parent(path[-1]))
    path.reverse()
    vals = []
    for s in range(samples):
        rng = np.random.default_rng([seed, s])

        def choose(n, kids, rng=rng):
            if n <= u.level:
                return next(i for i, k in enumerate(kids) if k == path[n])
            return int(rng.integers(len(kids)))

        vals.append(phi.eval_on(Monad.from_choices(scheme, choose))(u.level))
    return FractionBound(min(vals), max(vals), f"sampled from {samples} monads")


# ---------------------------------------------------------------------------
# tables

@dataclass
class _Level:
    idx: np.ndarray
    value: np.ndarray  # table value (children sum for internal nodes)
    leaf: np.ndarray  # bool
    density: np.ndarray  # leaf density used for continuation
    own: Optional[np.ndarray] = None  # the cell's own bound (total mode checks)


class MeasureTable(FinAddMeasure):
    """A step measure recorded on a refinement tree up to ``depth``."""

    def __init__(self, scheme: PartitionScheme, base: FinAddMeasure, levels: list,
                 depth: int, name: str):
        self.scheme = scheme
        self.base = base
        self.levels = levels
        self.depth = depth
        self.name = name

    def __repr__(self):
        return f"MeasureTable({self.name}, depth={self.depth}, nodes={self.node_count})"

    @property
    def node_count(self) -> int:
        return sum(len(lv.idx) for lv in self.levels)

    def _find(self, level: int, index: int) -> Optional[int]:
        if level >= len(self.levels):
            return None
        lv = self.levels[level]
        pos = int(np.searchsorted(lv.idx, index))
        if pos < len(lv.idx) and lv.idx[pos] == index:
            return pos
        return None

    def value(self, cell: Cell) -> float:
        pos = self._find(cell.level, cell.index)
        if pos is not None:
            return float(self.levels[cell.level].value[pos])
        n, i = cell.level, cell.index
        while n > 0:
            i = self.scheme.parent_index(n, i)
            n -= 1
            pos = self._find(n, i)
            if pos is not None:
                lv = self.levels[n]
                if not lv.leaf[pos]:
                    raise KeyError(f"{cell} is not under a leaf of the table")
                return float(lv.density[pos]) * float(self.base.value(cell))
        raise KeyError(f"{cell} not covered by the table")

    def total(self, scheme=None) -> float:
        return float(self.levels[0].value[0])

    def with_value(self, cell: Cell, new_value: float) -> "MeasureTable":
        """Copy of the table with one recorded entry replaced."""
        pos = self._find(cell.level, cell.index)
        if pos is None:
            raise KeyError(f"{cell} is not a node of the table")
        levels = []
        for n, lv in enumerate(self.levels):
            if n == cell.level:
                val = lv.value.copy()
                val[pos] = new_value
                lv = _Level(lv.idx, val, lv.leaf, lv.density, lv.own)
            levels.append(lv)
        return MeasureTable(self.scheme, self.base, levels, self.depth, self.name)

    def nodes(self):
        """Iterate ``(cell, value, is_leaf)`` over recorded entries."""
        for n, lv in enumerate(self.levels):
            for i, v, leaf in zip(lv.idx, lv.value, lv.leaf):
                yield self.scheme.cell(n, int(i)), float(v), bool(leaf)

    def additivity_violations(self, rtol: float = COMPARE_RTOL, limit: int = 10) -> list[tuple]:
        """Entries that differ from the sum of their children (recorded children
        for internal nodes, the density continuation for leaves)."""
        bad = []
        for n, lv in enumerate(self.levels):
            internal = ~lv.leaf
            if internal.any():
                nxt = self.levels[n + 1]
                parents = self.scheme_parent_positions(n)
                sums = np.bincount(parents, weights=nxt.value, minlength=len(lv.idx))
                mags = np.bincount(parents, weights=np.abs(nxt.value), minlength=len(lv.idx))
                diff = np.abs(sums - lv.value)
                tol = rtol * (mags + np.abs(lv.value)) + 1e-300
                for p in np.nonzero(internal & (diff > tol))[0][:limit]:
                    bad.append((n, int(lv.idx[p]), float(lv.value[p]), float(sums[p])))
            if lv.leaf.any():
                where = np.nonzero(lv.leaf)[0]
                block = self.scheme.block(n, lv.idx[where])
                m_lo, m_hi = self.base.enclose(block)
                d = lv.density[where]
                c_lo = np.minimum(d * m_lo, d * m_hi)
                c_hi = np.maximum(d * m_lo, d * m_hi)
                v = lv.value[where]
                tol = rtol * (np.abs(c_lo) + np.abs(c_hi) + np.abs(v)) + 1e-300
                off = (v < c_lo - tol) | (v > c_hi + tol)
                for p in np.nonzero(off)[0][:limit]:
                    bad.append((n, int(block.idx[p]), float(v[p]), float(d[p] * (m_lo[p] + m_hi[p]) / 2)))
        return bad

    def scheme_parent_positions(self, n: int) -> np.ndarray:
        """Position in level ``n`` of the parent of each level ``n+1`` entry."""
        lv, nxt = self.levels[n], self.levels[n + 1]
        internal = lv.idx[~lv.leaf]
        child, owner = self.scheme.child_indices(n, internal)
        parent_pos = np.nonzero(~lv.leaf)[0][owner]
        order = np.searchsorted(child, nxt.idx)
        if not np.array_equal(child[np.minimum(order, len(child) - 1)], nxt.idx):
            raise LeibnizError(f"table level {n + 1} does not match the children of level {n}")
        return parent_pos[order]


# ---------------------------------------------------------------------------
# certificates

@dataclass
class LevelSums:
    level: int
    lower: float
    upper: float

    @property
    def gap(self) -> float:
        return self.upper - self.lower


def _fmt(x: float):
    return None if x is None else float(x)


_FLOAT_MARK = "\x00"


def _float17(x: float) -> str:
    t = format(x, ".17g")
    return t if ("." in t or "e" in t) else t + ".0"


def _mark_floats(obj):
    if isinstance(obj, float):
        return _FLOAT_MARK + _float17(obj) if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _mark_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_mark_floats(v) for v in obj]
    return obj


def dumps_json(obj, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits.

    Key order is preserved and non-finite floats become ``null``, so equal
    inputs give byte-identical text.
    """
    text = json.dumps(_mark_floats(obj), indent=indent)
    return re.sub(r'"\\u0000([^"]*)"', r"\1", text)


@dataclass
class IntegralCertificate:
    value: float
    epsilon: float
    certified_depth: int
    mode: str
    lower_table: MeasureTable
    upper_table: MeasureTable
    lower_total: float
    upper_total: float
    levels: list
    verdicts: dict
    caveats: list = field(default_factory=list)

    certified = True

    @property
    def gap_by_level(self) -> list[float]:
        return [lv.gap for lv in self.levels]

    @property
    def interval(self) -> tuple[float, float]:
        return (self.lower_total, self.upper_total)

    def to_json(self) -> dict:
        return {
            "value": _fmt(self.value),
            "epsilon": _fmt(self.epsilon),
            "certifiedDepth": self.certified_depth,
            "mode": self.mode,
            "gapByLevel": [_fmt(g) for g in self.gap_by_level],
            "caveats": list(self.caveats),
            "lowerTotal": _fmt(self.lower_total),
            "upperTotal": _fmt(self.upper_total),
            "verdicts": {k: v.to_json() for k, v in self.verdicts.items()},
        }

    def dumps(self) -> str:
        return dumps_json(self.to_json())


@dataclass
class NotCertified:
    """The gap did not close by ``max_depth`` (or no sandwich exists here)."""

    max_depth: int
    gap: float
    reason: str
    levels: list = field(default_factory=list)
    caveats: list = field(default_factory=list)

    certified = False

    @property
    def gap_by_level(self) -> list[float]:
        return [lv.gap for lv in self.levels]

    def to_json(self) -> dict:
        return {
            "certified": False,
            "maxDepth": self.max_depth,
            "gap": _fmt(self.gap),
            "reason": self.reason,
            "gapByLevel": [_fmt(g) for g in self.gap_by_level],
            "caveats": list(self.caveats),
        }

    def dumps(self) -> str:
        return dumps_json(self.to_json())


Result = Union[IntegralCertificate, NotCertified]


# ---------------------------------------------------------------------------
# the sweep

class _Sweep:
    """Level-by-level Darboux refinement with settling of exact cells."""

    def __init__(self, phi: MonadicDistribution, keep_tables: bool, keep_own: bool):
        self.phi = phi
        self.scheme = phi.scheme
        self.keep_tables = keep_tables
        self.keep_own = keep_own
        self.records: list[dict] = []
        self.settled_lo: list[np.ndarray] = []
        self.settled_hi: list[np.ndarray] = []
        self.sums: list[LevelSums] = []
        self.active = np.zeros(1, dtype=np.int64)
        self.parent_density = None
        self.level = -1
        self.signed = not phi.base.nonnegative

    def step(self) -> LevelSums:
        self.level += 1
        n = self.level
        block = self.scheme.block(n, self.active)
        d_lo, d_hi = self.phi.density(block)
        if self.parent_density is not None:
            p_lo, p_hi = self.parent_density
            n_lo, n_hi = np.maximum(d_lo, p_lo), np.minimum(d_hi, p_hi)
            ok = n_lo <= n_hi
            d_lo, d_hi = np.where(ok, n_lo, d_lo), np.where(ok, n_hi, d_hi)
        lo, hi = self.phi.block_bounds(block, (d_lo, d_hi))
        lower = math.fsum(chain(*self.settled_lo, lo))
        upper = math.fsum(chain(*self.settled_hi, hi))
        sums = LevelSums(n, lower, upper)
        self.sums.append(sums)
        self._current = (block, d_lo, d_hi, lo, hi)
        return sums

    def advance(self) -> None:
        """Settle exact cells of the current level and move to the children."""
        block, d_lo, d_hi, lo, hi = self._current
        tight = d_lo == d_hi
        if self.keep_tables:
            self.records.append(dict(idx=block.idx, d_lo=d_lo, d_hi=d_hi, lo=lo, hi=hi, tight=tight))
        self.settled_lo.append(lo[tight])
        self.settled_hi.append(hi[tight])
        keep = ~tight
        child, owner = self.scheme.child_indices(self.level, block.idx[keep])
        self.active = child
        self.parent_density = (d_lo[keep][owner], d_hi[keep][owner])

    def finish_tables(self, base: FinAddMeasure) -> tuple[MeasureTable, MeasureTable]:
        block, d_lo, d_hi, lo, hi = self._current
        recs = self.records + [dict(idx=block.idx, d_lo=d_lo, d_hi=d_hi, lo=lo, hi=hi,
                                    tight=np.ones(len(block), bool))]
        lower_levels: list[_Level] = [None] * len(recs)
        upper_levels: list[_Level] = [None] * len(recs)
        child_lo = child_hi = None
        for n in range(len(recs) - 1, -1, -1):
            r = recs[n]
            leaf = r["tight"]
            v_lo = r["lo"].copy()
            v_hi = r["hi"].copy()
            if child_lo is not None and (~leaf).any():
                internal = np.nonzero(~leaf)[0]
                _, owner = self.scheme.child_indices(n, r["idx"][internal])
                v_lo[internal] = np.bincount(owner, weights=child_lo, minlength=len(internal))
                v_hi[internal] = np.bincount(owner, weights=child_hi, minlength=len(internal))
            lower_levels[n] = _Level(r["idx"], v_lo, leaf, r["d_lo"], r["lo"] if self.keep_own else None)
            upper_levels[n] = _Level(r["idx"], v_hi, leaf, r["d_hi"], r["hi"] if self.keep_own else None)
            child_lo, child_hi = v_lo, v_hi
        depth = len(recs) - 1
        return (MeasureTable(self.scheme, base, lower_levels, depth, "lower"),
                MeasureTable(self.scheme, base, upper_levels, depth, "upper"))


def _no_sandwich_reason(phi: MonadicDistribution) -> Optional[str]:
    if phi.grade is None or phi.density is None:
        return "distribution carries no density bound (e.g. a product of two differentials)"
    if phi.grade == 0:
        return "grade-0 distribution (a function without a measure differential) has no finite sandwich"
    if phi.grade == -1:
        return "reciprocal differential (delta without dmu) has no finite sandwich"
    return None


def darboux_sums(phi: MonadicDistribution, depth: int) -> list[LevelSums]:
    """Lower/upper level sums for levels ``0..depth`` (no certification)."""
    reason = _no_sandwich_reason(phi)
    if reason:
        raise LeibnizError(reason)
    sweep = _Sweep(phi, keep_tables=False, keep_own=False)
    for n in range(depth + 1):
        sweep.step()
        if n < depth:
            sweep.advance()
    return sweep.sums


def _exact_ok(lower: float, upper: float, value: float, eps: float) -> bool:
    fv, fe = Fraction(value), Fraction(eps)
    return Fraction(upper) <= fv + fe and Fraction(lower) >= fv - fe


def integrate(phi: MonadicDistribution, epsilon: float, max_depth: int = 24,
              mode: str = "eventual", min_depth: int = 0, probes: int = 8,
              seed: int = 0) -> Result:
    """Certify ``phi``'s integral to within ``epsilon`` or report why not.

    Returns an :class:`IntegralCertificate`, or a :class:`NotCertified` that
    carries the residual gap.  Failure is a result, not an exception.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if not 0 <= max_depth <= MAX_DEPTH_LIMIT:
        raise ValueError(f"max_depth must be in [0, {MAX_DEPTH_LIMIT}]")
    caveats = list(phi.caveats)
    reason = _no_sandwich_reason(phi)
    if reason:
        return NotCertified(max_depth, math.inf, reason, caveats=caveats)
    sweep = _Sweep(phi, keep_tables=True, keep_own=(mode == "total"))
    for n in range(max_depth + 1):
        sums = sweep.step()
        value = (sums.lower + sums.upper) / 2
        if n >= min_depth and _exact_ok(sums.lower, sums.upper, value, epsilon):
            _, d_lo, d_hi, _, _ = sweep._current
            if sweep.signed and np.any(d_lo != d_hi):
                return NotCertified(n, sums.gap, "signed reference measure needs exact densities "
                                    "on every leaf", sweep.sums, caveats)
            return _assemble(phi, sweep, sums, value, epsilon, mode, probes, seed, caveats)
        if n < max_depth:
            sweep.advance()
    last = sweep.sums[-1]
    return NotCertified(max_depth, last.gap, f"gap {last.gap:.3g} > 2*epsilon at depth {max_depth}",
                        sweep.sums, caveats)


def _total_mode_violation(table: MeasureTable, upper: bool) -> Optional[tuple]:
    for n, lv in enumerate(table.levels):
        tol = COMPARE_RTOL * (np.abs(lv.value) + np.abs(lv.own))
        bad = (lv.own - lv.value > tol) if upper else (lv.value - lv.own > tol)
        if bad.any():
            return n, int(lv.idx[np.argmax(bad)])
    return None


def _assemble(phi, sweep, sums, value, epsilon, mode, probes, seed, caveats) -> Result:
    lower_t, upper_t = sweep.finish_tables(phi.base)
    depth = sweep.level
    if mode == "total":
        for table, upper in ((upper_t, True), (lower_t, False)):
            hit = _total_mode_violation(table, upper)
            if hit:
                return NotCertified(depth, sums.gap,
                                    f"total majorization fails at level {hit[0]} cell {hit[1]}: "
                                    "the step measure does not bound coarse cells",
                                    sweep.sums, caveats)
    cert = IntegralCertificate(value, epsilon, depth, mode, lower_t, upper_t,
                               sums.lower, sums.upper, list(sweep.sums), {}, caveats)
    horizon = _horizon(depth, phi.scheme)
    if horizon < _horizon(depth):
        caveats.append(f"probe horizon capped at scheme level limit {horizon}")
    monads = probe_monads(phi, probes, seed)
    cert.verdicts = {
        "upper_dominates": _aggregate([_sandwich(cert, phi, m, horizon, True) for m in monads], horizon),
        "lower_dominated": _aggregate([_sandwich(cert, phi, m, horizon, False) for m in monads], horizon),
        "upper_total": _endpoint(sums.upper <= value + epsilon, horizon),
        "lower_total": _endpoint(sums.lower >= value - epsilon, horizon),
    }
    cert.caveats.append(f"sandwich comparisons allow relative slack {COMPARE_RTOL:g} for float rounding")
    return cert


def _horizon(depth: int, scheme: Optional[PartitionScheme] = None) -> int:
    h = max(2 * depth + 4, 8)
    limit = getattr(scheme, "level_limit", None)
    return h if limit is None else max(min(h, limit), depth)


def _endpoint(ok: bool, horizon: int) -> CompareVerdict:
    return CompareVerdict(Verdict.CERTIFIED if ok else Verdict.REFUTED, horizon, 0)


def _aggregate(verdicts: list[CompareVerdict], horizon: int) -> CompareVerdict:
    for v in verdicts:
        if v.refuted:
            return v
    for v in verdicts:
        if v.undetermined:
            return v
    return CompareVerdict(Verdict.CERTIFIED, horizon, max((v.index for v in verdicts), default=0))


_COMPARATORS = {"total": totally_majorizes, "eventual": eventually_majorizes,
                "ultra": ultra_compare}


def _sandwich(cert: IntegralCertificate, phi: MonadicDistribution, m: Monad, horizon: int,
              upper: bool, table: Optional[MeasureTable] = None) -> CompareVerdict:
    table = table or (cert.upper_table if upper else cert.lower_table)
    dmu = EventualSeq(lambda n: table.value(m.cell(n)))
    val = phi.eval_on(m)
    slack = EventualSeq(lambda n: COMPARE_RTOL * (abs(dmu(n)) + abs(val(n))))
    cmp = _COMPARATORS[cert.mode]
    if upper:
        return cmp(dmu + slack, val, horizon)
    return cmp(val + slack, dmu, horizon)


def probe_monads(phi: MonadicDistribution, count: int, seed: int = 0) -> list[Monad]:
    """Random descents plus the monads of the distribution's marked points."""
    scheme = phi.scheme
    out = [Monad.random(scheme, seed * 100003 + k) for k in range(count)]
    for p in phi.points:
        if isinstance(p, tuple):
            out.append(monad_at(scheme, p[0], p[1]))
        else:
            out.extend(monad_at(scheme, p, t) for t in ("leftmost", "rightmost"))
    return out


# ---------------------------------------------------------------------------
# verification

@dataclass
class VerificationReport:
    passed: bool
    violations: list
    checks: dict

    def __bool__(self):
        return self.passed

    def lines(self) -> list[str]:
        out = [f"{k}: {v}" for k, v in self.checks.items()]
        out += [f"VIOLATION {v}" for v in self.violations]
        out.append("PASS" if self.passed else "FAIL")
        return out


def verify_certificate(cert: IntegralCertificate, phi: MonadicDistribution, probes: int = 16,
                       seed: int = 1) -> VerificationReport:
    """Re-check additivity of both tables, the two total inequalities, and
    the sandwich on ``probes`` random monads in the certificate's mode."""
    violations = []
    checks = {}
    for name, table in (("lower", cert.lower_table), ("upper", cert.upper_table)):
        bad = table.additivity_violations()
        checks[f"{name} additivity"] = "ok" if not bad else f"{len(bad)} bad entries"
        violations += [f"{name} table not additive at level {n} cell {i}: {v!r} vs children {s!r}"
                       for n, i, v, s in bad]
    lo_root, hi_root = cert.lower_table.total(), cert.upper_table.total()
    tol = COMPARE_RTOL * (abs(lo_root) + abs(hi_root)) + 1e-300
    if hi_root > cert.value + cert.epsilon + tol:
        violations.append(f"upper total {hi_root!r} exceeds value + epsilon")
    if lo_root < cert.value - cert.epsilon - tol:
        violations.append(f"lower total {lo_root!r} below value - epsilon")
    checks["totals"] = f"[{lo_root!r}, {hi_root!r}] vs {cert.value!r} +- {cert.epsilon!r}"
    if probes > 0:
        horizon = _horizon(cert.certified_depth, phi.scheme)
        for m in probe_monads(phi, probes, seed):
            for upper in (True, False):
                v = _sandwich(cert, phi, m, horizon, upper)
                if not v.certified:
                    side = "d(upper) >= phi" if upper else "phi >= d(lower)"
                    violations.append(f"{side} on {m}: {v}")
        checks["probes"] = probes
    return VerificationReport(not violations, violations, checks)


# ---------------------------------------------------------------------------
# comparison witness

def comparison_witness(mu1: FinAddMeasure, mu2: FinAddMeasure, scheme: PartitionScheme,
                       depth: int) -> list[Cell]:
    """Nested cells ``U_0 ⊃ ... ⊃ U_depth`` with ``mu1(U_n) < mu2(U_n)`` on each.

    Requires ``mu1(X) < mu2(X)``.  At every level some child keeps the strict
    inequality, since the children's values add up to the parent's.
    """
    root = scheme.cell(0, 0)
    if not mu1.value(root) < mu2.value(root):
        raise HypothesisNotMet(f"mu1(X) = {mu1.value(root)} is not below mu2(X) = {mu2.value(root)}")
    chain_ = [root]
    for _ in range(depth):
        nxt = next((c for c in scheme.children(chain_[-1]) if mu1.value(c) < mu2.value(c)), None)
        if nxt is None:
            raise HypothesisNotMet(f"no child of {chain_[-1]} keeps the strict inequality; "
                                   "the measures are not additive there")
        chain_.append(nxt)
    return chain_


# ---------------------------------------------------------------------------
# Newton-Leibniz

@dataclass
class NewtonLeibnizReport:
    derivative_integral: Result
    telescoped: object  # exact when f and the domain allow it
    difference: Optional[float]
    epsilon: float
    passed: bool
    ratio_gap_by_level: list
    note: str

    def lines(self) -> list[str]:
        d = self.derivative_integral
        i1 = f"{d.value!r} (depth {d.certified_depth})" if d.certified else f"not certified: {d.reason}"
        return [
            f"integral of f' dx: {i1}",
            f"telescoped df: {self.telescoped}",
            f"|difference|: {self.difference!r} (epsilon {self.epsilon!r})",
            "max |df/dx - f'(mid)| by level: " + ", ".join(f"{g:.3g}" for g in self.ratio_gap_by_level),
            self.note,
            "PASS" if self.passed else "FAIL",
        ]


def newton_leibniz_report(f, fprime, scheme: PartitionScheme, epsilon: float,
                          max_depth: int = 24, diag_depth: int = 12,
                          mode: str = "eventual") -> NewtonLeibnizReport:
    """Compare the certified integral of ``f' dx`` with the telescoped ``df``."""
    f = as_function(f)
    fprime = as_function(fprime)
    cert = integrate(form_f_dmu(fprime, Length(), scheme), epsilon, max_depth, mode)
    telescoped = Increment(f).value(scheme.cell(0, 0))
    diff = abs(cert.value - float(telescoped)) if cert.certified else None
    ratio = []
    for n in range(min(diag_depth, max_depth) + 1):
        block = scheme.block(n)
        lo_dn, lo_up, hi_dn, hi_up = block.boxes
        lo, hi = (lo_dn + lo_up) / 2, (hi_dn + hi_up) / 2
        fv = (lambda xs: f.evaluate_array(xs)) if isinstance(f, Expr) else np.vectorize(f)
        fp = (lambda xs: fprime.evaluate_array(xs)) if isinstance(fprime, Expr) else np.vectorize(fprime)
        q = (fv(hi) - fv(lo)) / (hi - lo) - fp((lo + hi) / 2)
        ratio.append(float(np.max(np.abs(q))))
    a, b = scheme.domain
    note = (f"df telescopes to f(b) - f(a); it equals b - a = {b - a} only for f(x) = x + const")
    passed = diff is not None and diff <= epsilon
    return NewtonLeibnizReport(cert, telescoped, diff, epsilon, passed, ratio, note)


# ---------------------------------------------------------------------------
# scheme independence

@dataclass
class CrossSchemeReport:
    results: list
    agree: bool
    spread: float


def cross_scheme_check(build: Callable[[PartitionScheme], MonadicDistribution], schemes,
                       epsilon: float, max_depth: int = 24) -> CrossSchemeReport:
    """Integrate the same descriptor on several schemes.

    ``agree`` means every scheme certified and the certified intervals
    ``[value - eps, value + eps]`` share a point.  This checks the given
    schemes only, not every scheme.
    """
    results = [integrate(build(s), epsilon, max_depth) for s in schemes]
    ok = [r for r in results if r.certified]
    if len(ok) != len(results):
        return CrossSchemeReport(results, False, math.inf)
    lo = max(r.value - r.epsilon for r in ok)
    hi = min(r.value + r.epsilon for r in ok)
    spread = max(r.value for r in ok) - min(r.value for r in ok)
    return CrossSchemeReport(results, lo <= hi, spread)


# ---------------------------------------------------------------------------
# independent oracle

def reference_quadrature(f, a, b, tol: float = 1e-9) -> float:
    """Adaptive Gauss-Kronrod quadrature of ``f`` over ``[a, b]``.

    Test and report oracle only; never used inside certificates.
    """
    f = as_function(f)
    fn = (lambda x: float(f.evaluate(x))) if isinstance(f, Expr) else (lambda x: float(f(x)))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", sp_integrate.IntegrationWarning)
        value, err = sp_integrate.quad(fn, float(a), float(b), epsabs=tol, epsrel=0.0, limit=500)
    if not err <= tol or caught:
        why = f": {caught[0].message}" if caught else ""
        raise ToleranceNotReached(f"estimated error {err:.3g} vs {tol:.3g}{why}")
    return float(value)
