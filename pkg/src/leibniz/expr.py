"""Expressions in one variable ``x``: parsing, printing and evaluation.

Grammar (standard precedence, left associative)::

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := base ('^' rational)?
    rational := ['-'] NUMBER | '(' ['-'] NUMBER ['/' NUMBER] ')'
    base     := NUMBER | 'x' | 'pi' | 'e' | FUNC '(' expr ')' | '(' expr ')'
    FUNC     := abs | sin | cos | exp | log | sqrt

A fractional exponent needs parentheses, so ``x^3/3`` is ``(x^3)/3``.
Decimal literals become exact rationals.  Evaluation at a rational point is
exact whenever only rational operations are involved; interval evaluation
returns outward-rounded enclosures and works on numpy arrays of boxes.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from . import _rounding as rnd
from .errors import DomainError, ParseError

__all__ = [
    "Expr", "Const", "Named", "Var", "Unary", "Binary", "Pow",
    "parse_expression", "to_text", "eval_interval", "X",
]

FUNCS = ("abs", "sin", "cos", "exp", "log", "sqrt")
_BIN_SYMBOL = {"add": "+", "sub": "-", "mul": "*", "div": "/"}
_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2}
_TWO_PI = 2 * math.pi

Number = Union[Fraction, float]


class Expr:
    """Base node.  Supports ``+ - * / **`` with numbers for building trees."""

    def __call__(self, x):
        if isinstance(x, np.ndarray):
            return self.evaluate_array(x)
        return self.evaluate(x)

    def __str__(self):
        return to_text(self)

    # building helpers
    @staticmethod
    def _wrap(v) -> "Expr":
        if isinstance(v, Expr):
            return v
        v = Fraction(v)
        return Const(v) if v >= 0 else Unary("neg", Const(-v))

    def __add__(self, o):
        return Binary("add", self, self._wrap(o))

    def __radd__(self, o):
        return Binary("add", self._wrap(o), self)

    def __sub__(self, o):
        return Binary("sub", self, self._wrap(o))

    def __rsub__(self, o):
        return Binary("sub", self._wrap(o), self)

    def __mul__(self, o):
        return Binary("mul", self, self._wrap(o))

    def __rmul__(self, o):
        return Binary("mul", self._wrap(o), self)

    def __truediv__(self, o):
        return Binary("div", self, self._wrap(o))

    def __rtruediv__(self, o):
        return Binary("div", self._wrap(o), self)

    def __neg__(self):
        return Unary("neg", self)

    def __pow__(self, r):
        return Pow(self, Fraction(r))

    def is_rational(self) -> bool:
        """True when exact evaluation at a rational point stays rational."""
        raise NotImplementedError

    def evaluate(self, x) -> Number:
        raise NotImplementedError

    def evaluate_array(self, xs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def interval(self, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: Fraction

    def is_rational(self):
        return True

    def evaluate(self, x):
        return self.value

    def evaluate_array(self, xs):
        return np.full(np.shape(xs), float(self.value))

    def interval(self, lo, hi):
        shape = np.shape(lo)
        dn, up = rnd.frac_down(self.value), rnd.frac_up(self.value)
        out = np.full(shape, dn)
        # one shared array for exact constants lets products skip a corner
        return (out, out) if dn == up else (out, np.full(shape, up))


@dataclass(frozen=True, eq=True)
class Named(Expr):
    name: str  # "pi" or "e"

    @property
    def float_value(self) -> float:
        return math.pi if self.name == "pi" else math.e

    def is_rational(self):
        return False

    def evaluate(self, x):
        return self.float_value

    def evaluate_array(self, xs):
        return np.full(np.shape(xs), self.float_value)

    def interval(self, lo, hi):
        v = np.full(np.shape(lo), self.float_value)
        return rnd.widen(v, v, 1)


@dataclass(frozen=True, eq=True)
class Var(Expr):
    def is_rational(self):
        return True

    def evaluate(self, x):
        return x

    def evaluate_array(self, xs):
        return np.asarray(xs, float)

    def interval(self, lo, hi):
        return np.asarray(lo, float), np.asarray(hi, float)


X = Var()


# vectorized sin/cos/exp/log may be off by a few ulps (SIMD builds)
_LIB_ULPS = 4


def _as_number(v) -> Number:
    if isinstance(v, (Fraction, int)):
        return Fraction(v)
    return float(v)


def _sin_range(lo, hi, phase):
    """Enclosure of sin(t + phase) for t in [lo, hi] (phase 0 or pi/2, i.e.
    sin or cos).  Endpoint values come from the library function itself;
    the phase only locates the extrema."""
    fn = np.cos if phase else np.sin
    s_lo = fn(lo)
    s_hi = fn(hi)
    out_lo = np.minimum(s_lo, s_hi)
    out_hi = np.maximum(s_lo, s_hi)
    out_lo, out_hi = rnd.widen(out_lo, out_hi, _LIB_ULPS)
    # sin(u) peaks at u = pi/2 + 2k pi; u = t + phase
    slack = 1e-12 * (1.0 + np.abs(lo) + np.abs(hi))
    peak = math.pi / 2 - phase
    trough = -math.pi / 2 - phase
    has_max = np.ceil((lo - peak) / _TWO_PI - slack) <= np.floor((hi - peak) / _TWO_PI + slack)
    has_min = np.ceil((lo - trough) / _TWO_PI - slack) <= np.floor((hi - trough) / _TWO_PI + slack)
    wide = (hi - lo) >= _TWO_PI
    out_hi = np.where(has_max | wide, 1.0, out_hi)
    out_lo = np.where(has_min | wide, -1.0, out_lo)
    return np.clip(out_lo, -1.0, 1.0), np.clip(out_hi, -1.0, 1.0)


def _pow_pos_bounds(x, n):
    """Bounds on ``x**n`` for ``x >= 0``.  Squares use an exact product check;
    other powers come from the library power, accurate to within an ulp, so
    4 ulps either way is a safe margin."""
    if n == 2:
        p, err = rnd.two_prod(x, x)
        return rnd._down(p, err), rnd._up(p, err)
    p = np.power(x, float(n))
    exact = (x == 0) | (x == 1) | (n == 1)
    lo, hi = rnd.widen(p, p, 4)
    return np.where(exact, p, np.maximum(lo, 0.0)), np.where(exact, p, hi)


def _pow_pos_down(x, n):
    return _pow_pos_bounds(x, n)[0]


def _pow_pos_up(x, n):
    return _pow_pos_bounds(x, n)[1]


def _pow_int(lo, hi, n):
    if n % 2 == 0:
        mn = np.where(lo >= 0, lo, np.where(hi <= 0, -hi, 0.0))
        mx = np.maximum(np.abs(lo), np.abs(hi))
        return _pow_pos_down(mn, n), _pow_pos_up(mx, n)
    lo_dn, lo_up = _pow_pos_bounds(np.abs(lo), n)
    hi_dn, hi_up = _pow_pos_bounds(np.abs(hi), n)
    out_lo = np.where(lo >= 0, lo_dn, -lo_up)
    out_hi = np.where(hi >= 0, hi_up, -hi_dn)
    return out_lo, out_hi


def _recip(lo, hi, node):
    if np.any((lo <= 0) & (hi >= 0)):
        raise DomainError(f"division by an interval containing 0 in {to_text(node)}", node)
    r_lo, r_hi = rnd.widen(1.0 / hi, 1.0 / lo, 1)
    return r_lo, r_hi


@dataclass(frozen=True, eq=True)
class Unary(Expr):
    op: str  # neg, abs, sin, cos, exp, log, sqrt
    arg: Expr

    def is_rational(self):
        return self.op in ("neg", "abs") and self.arg.is_rational()

    def evaluate(self, x):
        v = self.arg.evaluate(x)
        op = self.op
        if op == "neg":
            return -v
        if op == "abs":
            return abs(v)
        v = float(v)
        if op == "sin":
            return math.sin(v)
        if op == "cos":
            return math.cos(v)
        if op == "exp":
            return math.exp(v)
        if op == "log":
            if v <= 0:
                raise DomainError(f"log of non-positive value in {to_text(self)}", self)
            return math.log(v)
        if op == "sqrt":
            if v < 0:
                raise DomainError(f"sqrt of negative value in {to_text(self)}", self)
            return math.sqrt(v)
        raise ValueError(op)

    def evaluate_array(self, xs):
        v = self.arg.evaluate_array(xs)
        fn = {"neg": np.negative, "abs": np.abs, "sin": np.sin, "cos": np.cos,
              "exp": np.exp, "log": np.log, "sqrt": np.sqrt}[self.op]
        with np.errstate(all="ignore"):
            return fn(v)

    def interval(self, lo, hi):
        a, b = self.arg.interval(lo, hi)
        op = self.op
        if op == "neg":
            return -b, -a
        if op == "abs":
            out_lo = np.where(a >= 0, a, np.where(b <= 0, -b, 0.0))
            return out_lo, np.maximum(np.abs(a), np.abs(b))
        if op == "sin":
            return _sin_range(a, b, 0.0)
        if op == "cos":
            return _sin_range(a, b, math.pi / 2)
        if op == "exp":
            with np.errstate(over="ignore"):
                r_lo, r_hi = rnd.widen(np.exp(a), np.exp(b), _LIB_ULPS)
            return np.maximum(r_lo, 0.0), r_hi
        if op == "log":
            if np.any(a <= 0):
                raise DomainError(f"log over an interval reaching 0 or below in {to_text(self)}", self)
            return rnd.widen(np.log(a), np.log(b), _LIB_ULPS)
        if op == "sqrt":
            if np.any(a < 0):
                raise DomainError(f"sqrt over an interval with negative values in {to_text(self)}", self)
            r_lo, r_hi = rnd.widen(np.sqrt(a), np.sqrt(b), 1)
            return np.maximum(r_lo, 0.0), r_hi
        raise ValueError(op)


@dataclass(frozen=True, eq=True)
class Binary(Expr):
    op: str  # add, sub, mul, div
    left: Expr
    right: Expr

    def is_rational(self):
        return self.left.is_rational() and self.right.is_rational()

    def evaluate(self, x):
        a = self.left.evaluate(x)
        b = self.right.evaluate(x)
        if self.op == "add":
            return a + b
        if self.op == "sub":
            return a - b
        if self.op == "mul":
            return a * b
        if b == 0:
            raise DomainError(f"division by zero in {to_text(self)}", self)
        return a / b

    def evaluate_array(self, xs):
        a = self.left.evaluate_array(xs)
        b = self.right.evaluate_array(xs)
        with np.errstate(all="ignore"):
            return {"add": np.add, "sub": np.subtract, "mul": np.multiply,
                    "div": np.divide}[self.op](a, b)

    def interval(self, lo, hi):
        alo, ahi = self.left.interval(lo, hi)
        blo, bhi = self.right.interval(lo, hi)
        if self.op == "add":
            return rnd.add_down(alo, blo), rnd.add_up(ahi, bhi)
        if self.op == "sub":
            return rnd.sub_down(alo, bhi), rnd.sub_up(ahi, blo)
        if self.op == "mul":
            return rnd.interval_mul(alo, ahi, blo, bhi)
        r_lo, r_hi = _recip(blo, bhi, self)
        return rnd.interval_mul(alo, ahi, r_lo, r_hi)


@dataclass(frozen=True, eq=True)
class Pow(Expr):
    base: Expr
    exponent: Fraction

    def is_rational(self):
        return self.exponent.denominator == 1 and self.base.is_rational()

    def evaluate(self, x):
        v = self.base.evaluate(x)
        r = self.exponent
        if r.denominator == 1 and isinstance(v, Fraction):
            if v == 0 and r < 0:
                raise DomainError(f"0 to a negative power in {to_text(self)}", self)
            return v ** int(r)
        v = float(v)
        if r.denominator != 1 and v < 0:
            raise DomainError(f"fractional power of a negative value in {to_text(self)}", self)
        if v == 0 and r < 0:
            raise DomainError(f"0 to a negative power in {to_text(self)}", self)
        return v ** float(r)

    def evaluate_array(self, xs):
        with np.errstate(all="ignore"):
            return np.power(self.base.evaluate_array(xs), float(self.exponent))

    def interval(self, lo, hi):
        a, b = self.base.interval(lo, hi)
        r = self.exponent
        if r.denominator == 1:
            n = int(r)
            if n == 0:
                one = np.ones_like(a)
                return one, one.copy()
            p_lo, p_hi = _pow_int(a, b, abs(n))
            if n > 0:
                return p_lo, p_hi
            return _recip(p_lo, p_hi, self)
        if np.any(a < 0) or (r < 0 and np.any(a <= 0)):
            raise DomainError(f"fractional power over an interval leaving the domain in {to_text(self)}", self)
        rf = float(r)
        with np.errstate(divide="ignore"):
            if rf > 0:
                r_lo, r_hi = rnd.widen(np.power(a, rf), np.power(b, rf), 4)
            else:
                r_lo, r_hi = rnd.widen(np.power(b, rf), np.power(a, rf), 4)
        return np.maximum(r_lo, 0.0), r_hi


def eval_interval(ast: Expr, box) -> tuple[float, float]:
    """Outward enclosure of ``ast`` over the box ``[lo, hi]`` (scalars).

    >>> eval_interval(parse_expression("x^2"), (0.5, 1))
    (0.25, 1.0)
    """
    lo, hi = box
    lo_f = rnd.frac_down(lo) if isinstance(lo, Fraction) else float(lo)
    hi_f = rnd.frac_up(hi) if isinstance(hi, Fraction) else float(hi)
    a, b = ast.interval(np.array([lo_f]), np.array([hi_f]))
    return float(a[0]), float(b[0])


# --------------------------------------------------------------------------
# printing

def _decimal_text(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    d = q.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"({q.numerator}/{q.denominator})"
    places = max(twos, fives)
    scaled = q * 10 ** places
    digits = str(abs(scaled.numerator)).rjust(places + 1, "0")
    return ("-" if q < 0 else "") + digits[:-places] + "." + digits[-places:]


def _prec(node: Expr) -> int:
    if isinstance(node, Binary):
        return _PREC[node.op]
    if isinstance(node, Unary) and node.op == "neg":
        return 3
    if isinstance(node, Pow):
        return 4
    if isinstance(node, Const) and node.value < 0:
        return 0
    return 5


def _exponent_text(r: Fraction) -> str:
    if r.denominator == 1 and r >= 0:
        return str(r.numerator)
    return f"({r.numerator}/{r.denominator})" if r.denominator != 1 else f"({r.numerator})"


def to_text(node: Expr) -> str:
    """Render an expression so that parsing the text gives the same tree."""
    if isinstance(node, Const):
        return _decimal_text(node.value) if node.value >= 0 else f"({_decimal_text(node.value)})"
    if isinstance(node, Named):
        return node.name
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Unary):
        if node.op == "neg":
            inner = to_text(node.arg)
            return "-" + (f"({inner})" if _prec(node.arg) < 3 else inner)
        return f"{node.op}({to_text(node.arg)})"
    if isinstance(node, Binary):
        p = _PREC[node.op]
        left = to_text(node.left)
        right = to_text(node.right)
        if _prec(node.left) < p:
            left = f"({left})"
        if _prec(node.right) <= p or _prec(node.right) == 3:
            right = f"({right})"
        sym = _BIN_SYMBOL[node.op]
        return f"{left} {sym} {right}" if p == 1 else f"{left}*{right}" if sym == "*" else f"{left}/{right}"
    if isinstance(node, Pow):
        base = to_text(node.base)
        if _prec(node.base) < 5:
            base = f"({base})"
        return f"{base}^{_exponent_text(node.exponent)}"
    raise TypeError(f"not an expression node: {node!r}")


# --------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+\.\d*|\.\d+|\d+)|(?P<id>[A-Za-z_]+)|(?P<sym>[-+*/^()]))")


@dataclass
class _Tok:
    kind: str  # num, id, sym, end
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append(_Tok(kind, m.group(kind), start))
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


_BASE_START = frozenset({"NUMBER", "x", "pi", "e", "(", *FUNCS})
_UNARY_START = _BASE_START | {"-"}


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def advance(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, expected):
        t = self.tok
        what = "end of input" if t.kind == "end" else repr(t.text)
        raise ParseError(f"unexpected {what}", t.pos, frozenset(expected))

    def expect(self, sym: str):
        if self.tok.kind == "sym" and self.tok.text == sym:
            return self.advance()
        self.fail({sym})

    def is_sym(self, *syms) -> bool:
        return self.tok.kind == "sym" and self.tok.text in syms

    def parse(self) -> Expr:
        node = self.expr()
        if self.tok.kind != "end":
            self.fail({"+", "-", "*", "/", "^", "end of input"})
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.is_sym("+", "-"):
            op = "add" if self.advance().text == "+" else "sub"
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.is_sym("*", "/"):
            op = "mul" if self.advance().text == "*" else "div"
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.is_sym("-"):
            self.advance()
            return Unary("neg", self.unary())
        return self.power()

    def power(self) -> Expr:
        node = self.base()
        if self.is_sym("^"):
            self.advance()
            node = Pow(node, self.rational())
        return node

    def _number(self) -> Fraction:
        if self.tok.kind != "num":
            self.fail({"NUMBER"})
        return Fraction(self.advance().text)

    def _signed_ratio(self, allow_slash: bool = True) -> Fraction:
        sign = 1
        if self.is_sym("-"):
            self.advance()
            sign = -1
        q = self._number()
        if allow_slash and self.is_sym("/"):
            self.advance()
            den = self._number()
            if den == 0:
                raise ParseError("zero denominator in exponent", self.toks[self.i - 1].pos)
            q = q / den
        return sign * q

    def rational(self) -> Fraction:
        if self.is_sym("("):
            self.advance()
            q = self._signed_ratio()
            self.expect(")")
            return q
        if self.tok.kind == "num" or self.is_sym("-"):
            return self._signed_ratio(allow_slash=False)
        self.fail({"NUMBER", "-", "("})

    def base(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Const(Fraction(t.text))
        if t.kind == "id":
            name = t.text
            if name == "x":
                self.advance()
                return X
            if name in ("pi", "e"):
                self.advance()
                return Named(name)
            if name in FUNCS:
                self.advance()
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(name, arg)
            raise ParseError(f"unknown name {name!r}", t.pos, _BASE_START)
        if self.is_sym("("):
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        self.fail(_UNARY_START)


def parse_expression(text: str) -> Expr:
    """Parse ``text`` into an expression tree; raises :class:`ParseError`."""
    return _Parser(text).parse()
