from fractions import Fraction as F
from pathlib import Path

import mpmath
import pytest
from hypothesis import assume, given, settings, strategies as st

from leibniz.errors import DomainError, ParseError
from leibniz.expr import (Binary, Const, Named, Pow, Unary, Var, X, eval_interval,
                          parse_expression, to_text)

CORPUS = Path(__file__).parent / "data" / "expressions.txt"


def test_precedence_examples():
    ast = parse_expression("sin(x)^2 + 1")
    assert ast == Binary("add", Pow(Unary("sin", X), F(2)), Const(F(1)))
    assert parse_expression("2*x - x") == Binary("sub", Binary("mul", Const(F(2)), X), X)
    assert parse_expression("-x^2") == Unary("neg", Pow(X, F(2)))
    assert parse_expression("x^3/3") == Binary("div", Pow(X, F(3)), Const(F(3)))
    assert parse_expression("x^(3/4)") == Pow(X, F(3, 4))
    assert parse_expression("x^-2") == Pow(X, F(-2))
    assert parse_expression("1 - 2 - 3") == Binary("sub", Binary("sub", Const(F(1)), Const(F(2))),
                                                   Const(F(3)))


def test_decimals_are_exact():
    assert parse_expression("0.1") == Const(F(1, 10))
    assert to_text(parse_expression("3.25")) == "3.25"


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        parse_expression("log(")
    assert info.value.position == 4
    assert "x" in info.value.expected
    with pytest.raises(ParseError) as info:
        parse_expression("2 +* x")
    assert info.value.position == 3
    with pytest.raises(ParseError):
        parse_expression("x^y")
    with pytest.raises(ParseError):
        parse_expression("foo(x)")


def test_interval_examples():
    assert eval_interval(parse_expression("x^2"), (F(1, 2), 1)) == (0.25, 1.0)
    lo, hi = eval_interval(parse_expression("x*x - x"), (0, 1))
    assert lo <= -0.25 and hi >= 0 and (lo, hi) == (-1.0, 1.0)
    assert eval_interval(parse_expression("3"), (F(-5), F(7))) == (3.0, 3.0)


def test_domain_errors_name_the_node():
    with pytest.raises(DomainError) as info:
        eval_interval(parse_expression("1 + log(x)"), (0, 1))
    assert info.value.node == parse_expression("log(x)")
    with pytest.raises(DomainError):
        eval_interval(parse_expression("sqrt(x - 1)"), (0, 2))
    with pytest.raises(DomainError):
        eval_interval(parse_expression("1/x"), (-1, 1))
    with pytest.raises(DomainError):
        parse_expression("log(x)").evaluate(F(0))


def test_exact_evaluation():
    f = parse_expression("x^3/3 - x + 1/7")
    assert f.evaluate(F(1, 2)) == F(1, 24) - F(1, 2) + F(1, 7)
    assert parse_expression("pi").evaluate(0) == pytest.approx(3.141592653589793)


def test_corpus_round_trips():
    lines = [ln.strip() for ln in CORPUS.read_text().splitlines() if ln.strip()]
    assert len(lines) == 50
    for text in lines:
        ast = parse_expression(text)
        printed = to_text(ast)
        assert parse_expression(printed) == ast, text
        assert to_text(parse_expression(printed)) == printed


# property tests ------------------------------------------------------------

# constants the grammar can spell as one literal: terminating decimals
decimals = st.builds(lambda n, k: Const(F(n, 10 ** k)), st.integers(0, 10 ** 4), st.integers(0, 4))
leaves = st.one_of(
    st.just(X),
    decimals,
    st.sampled_from([Named("pi"), Named("e")]),
)
exponents = st.fractions(min_value=-3, max_value=4, max_denominator=3)


def _extend(children):
    return st.one_of(
        st.builds(Unary, st.sampled_from(["neg", "abs", "sin", "cos", "exp", "log", "sqrt"]), children),
        st.builds(Binary, st.sampled_from(["add", "sub", "mul", "div"]), children, children),
        st.builds(Pow, children, exponents),
    )


trees = st.recursive(leaves, _extend, max_leaves=8)


@given(trees)
def test_print_parse_is_a_fixed_point(ast):
    assert parse_expression(to_text(ast)) == ast


def _mp(node, x):
    """High-precision reference evaluation, independent of the package."""
    if isinstance(node, Var):
        return x
    if isinstance(node, Const):
        return mpmath.mpf(node.value.numerator) / node.value.denominator
    if isinstance(node, Named):
        return mpmath.pi if node.name == "pi" else mpmath.e
    if isinstance(node, Unary):
        v = _mp(node.arg, x)
        return {"neg": lambda: -v, "abs": lambda: abs(v), "sin": lambda: mpmath.sin(v),
                "cos": lambda: mpmath.cos(v), "exp": lambda: mpmath.exp(v),
                "log": lambda: mpmath.log(v), "sqrt": lambda: mpmath.sqrt(v)}[node.op]()
    if isinstance(node, Binary):
        a, b = _mp(node.left, x), _mp(node.right, x)
        return {"add": a + b, "sub": a - b, "mul": a * b}[node.op] if node.op != "div" else a / b
    r = node.exponent
    return _mp(node.base, x) ** (mpmath.mpf(r.numerator) / r.denominator)


safe_trees = st.recursive(
    leaves,
    lambda c: st.one_of(
        st.builds(Unary, st.sampled_from(["neg", "abs", "sin", "cos", "exp"]), c),
        st.builds(Binary, st.sampled_from(["add", "sub", "mul"]), c, c),
        st.builds(Pow, c, st.integers(0, 4).map(F)),
    ),
    max_leaves=6,
)
points = st.fractions(min_value=-2, max_value=2, max_denominator=1000)


@settings(max_examples=1000)
@given(safe_trees, points, points, st.floats(0, 1))
def test_enclosure_contains_sampled_values(ast, p, q, t):
    lo, hi = sorted((p, q))
    x = lo + (hi - lo) * F(t)
    with mpmath.workdps(60):
        v = _mp(ast, mpmath.mpf(x.numerator) / x.denominator)
        assume(abs(v) < mpmath.mpf(10) ** 300)
        e_lo, e_hi = eval_interval(ast, (lo, hi))
        assert mpmath.mpf(e_lo) <= v <= mpmath.mpf(e_hi)


@given(trees, points, points)
def test_enclosure_is_ordered_or_domain_error(ast, p, q):
    lo, hi = sorted((p, q))
    try:
        e_lo, e_hi = eval_interval(ast, (lo, hi))
    except DomainError:
        return
    except OverflowError:
        return
    assert not e_lo > e_hi
