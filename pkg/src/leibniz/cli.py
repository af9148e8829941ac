"""Command-line front end.

    leibniz integrate --config cfg.json [--out cert.json] [--format json|csv]
    leibniz table     --config cfg.json
    leibniz verify    newton-leibniz --config cfg.json
    leibniz witness   --config cfg.json

The config comes from ``--config FILE`` or, failing that, from stdin.  Exit
status is 0 for a certificate or a passing suite, 2 for NotCertified or a
failing suite and 1 for usage, schema and parse errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from decimal import Decimal
from fractions import Fraction
from typing import Optional

import jsonschema

from .distribution import (delta_dist, df_dist, differential_dist, dist_combine,
                           form_f_dmu, function_dist, indicator_dist, indicator_function,
                           scale, tagged_dist)
from .errors import DomainError, LeibnizError, ParseError
from .expr import parse_expression
from .integrate import MODES, comparison_witness, darboux_sums, dumps_json, integrate
from .measure import Combination, FinAddMeasure, make_measure
from .partition import build_dyadic_scheme, build_regular_scheme
from .suites import SUITES, run_suite

__all__ = ["main", "build_parser", "load_config", "CONFIG_SCHEMA", "parse_rational",
           "build_scheme", "build_measure", "build_dist", "ConfigError"]

EXIT_OK, EXIT_USAGE, EXIT_NOT_CERTIFIED = 0, 1, 2

_RATIONAL = {"oneOf": [{"type": "number"}, {"type": "string", "minLength": 1}]}
_EXPR = {"type": "string", "minLength": 1}

_MEASURE = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["length", "stieltjes", "atom", "sum"]},
        "g": _EXPR,
        "x0": _RATIONAL,
        "mass": _RATIONAL,
        "tie": {"enum": ["left", "right", "leftmost", "rightmost"]},
        "terms": {"type": "array", "items": {"$ref": "#/$defs/measure"}},
        "coefs": {"type": "array", "items": _RATIONAL},
    },
    "additionalProperties": False,
}

_DIST_KINDS = ["differential", "f_dmu", "indicator", "delta", "delta_dmu", "df", "tagged",
               "function", "indicator_function", "sum", "product"]

_DIST = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": _DIST_KINDS},
        "f": _EXPR,
        "Y": {"type": "array", "items": {"type": "array", "items": _RATIONAL,
                                         "minItems": 2, "maxItems": 2}},
        "x0": _RATIONAL,
        "tie": {"enum": ["left", "right", "leftmost", "rightmost"]},
        "selector": {"enum": ["left", "right", "mid"]},
        "measure": {"$ref": "#/$defs/measure"},
        "terms": {"type": "array", "minItems": 1, "items": {
            "type": "object", "required": ["dist"],
            "properties": {"coef": _RATIONAL, "dist": {"$ref": "#/$defs/dist"}},
            "additionalProperties": False}},
        "factors": {"type": "array", "minItems": 1, "items": {"$ref": "#/$defs/dist"}},
    },
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "$defs": {"measure": _MEASURE, "dist": _DIST},
    "properties": {
        "domain": {"type": "array", "items": _RATIONAL, "minItems": 2, "maxItems": 2},
        "scheme": {"type": "object", "required": ["kind"], "properties": {
            "kind": {"enum": ["dyadic", "regular"]},
            "params": {"type": "object", "properties": {
                "branching": {"type": "integer", "minimum": 2}}}},
            "additionalProperties": False},
        "dist": {"$ref": "#/$defs/dist"},
        "measure": {"$ref": "#/$defs/measure"},
        "epsilon": {"type": "number", "exclusiveMinimum": 0},
        "maxDepth": {"type": "integer", "minimum": 0, "maximum": 50},
        "minDepth": {"type": "integer", "minimum": 0},
        "mode": {"enum": list(MODES)},
        "tie": {"enum": ["left", "right", "leftmost", "rightmost"]},
        "probes": {"type": "integer", "minimum": 0},
        "seed": {"type": "integer"},
        # verify
        "f": _EXPR,
        "fprime": _EXPR,
        "count": {"type": "integer", "minimum": 1},
        "depth": {"type": "integer", "minimum": 0},
        # witness
        "mu1": {"$ref": "#/$defs/measure"},
        "mu2": {"$ref": "#/$defs/measure"},
    },
    "additionalProperties": False,
}


class ConfigError(LeibnizError):
    """Config is valid JSON but cannot be turned into objects."""


def parse_rational(v) -> Fraction:
    """``"p/q"``, a decimal string or number, or an expression such as ``"pi/2"``.

    Decimals are exact.  An expression that is not rational is rounded to the
    nearest float first.
    """
    if isinstance(v, bool):
        raise ConfigError(f"expected a number, got {v!r}")
    if isinstance(v, (int, Decimal, Fraction)):
        return Fraction(v)
    if isinstance(v, float):
        return Fraction(Decimal(repr(v)))
    try:
        return Fraction(v.strip())
    except (ValueError, AttributeError):
        pass
    node = parse_expression(v)
    val = node.evaluate(0)
    return Fraction(val) if isinstance(val, (int, Fraction)) else Fraction(float(val))


def load_config(text: str) -> dict:
    """Parse and validate a JSON config; numbers keep their exact decimals."""
    try:
        cfg = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ConfigError(f"config error at {err.json_path}: {err.message}")
    return cfg


def build_scheme(cfg: dict):
    a, b = (parse_rational(v) for v in cfg.get("domain", [0, 1]))
    spec = cfg.get("scheme", {"kind": "dyadic"})
    if spec["kind"] == "dyadic":
        return build_dyadic_scheme(a, b)
    return build_regular_scheme(a, b, spec.get("params", {}).get("branching", 2))


def build_measure(spec: Optional[dict], scheme, tie: str) -> FinAddMeasure:
    if spec is None:
        return make_measure("length")
    kind = spec["kind"]
    if kind == "sum":
        terms = [build_measure(t, scheme, tie) for t in spec.get("terms", [])]
        coefs = [parse_rational(c) for c in spec.get("coefs", [1] * len(terms))]
        if len(coefs) != len(terms):
            raise ConfigError("measure sum: coefs and terms differ in length")
        return Combination(tuple(zip(coefs, terms)))
    kwargs = {"scheme": scheme, "tie": spec.get("tie", tie)}
    if "g" in spec:
        kwargs["g"] = parse_expression(spec["g"])
    if "x0" in spec:
        kwargs["x0"] = parse_rational(spec["x0"])
    if "mass" in spec:
        kwargs["mass"] = parse_rational(spec["mass"])
    return make_measure(kind, **kwargs)


def _need(spec: dict, key: str, what: Optional[str] = None):
    if key not in spec:
        raise ConfigError(f"{what or 'dist of kind ' + repr(spec['kind'])} needs {key!r}")
    return spec[key]


def build_dist(spec: dict, scheme, default_measure: Optional[dict], tie: str):
    kind = spec["kind"]
    mu = build_measure(spec.get("measure", default_measure), scheme, tie)
    if kind == "differential":
        return differential_dist(mu, scheme)
    if kind == "f_dmu":
        return form_f_dmu(parse_expression(_need(spec, "f")), mu, scheme)
    if kind == "function":
        return function_dist(parse_expression(_need(spec, "f")), scheme)
    if kind in ("indicator", "indicator_function"):
        Y = [tuple(parse_rational(v) for v in pair) for pair in _need(spec, "Y")]
        return indicator_dist(Y, mu, scheme) if kind == "indicator" else indicator_function(Y, scheme)
    if kind in ("delta", "delta_dmu"):
        d = delta_dist(parse_rational(_need(spec, "x0")), mu, scheme, spec.get("tie", tie))
        return d if kind == "delta" else dist_combine(d, differential_dist(mu, scheme), "mul")
    if kind == "df":
        return df_dist(parse_expression(_need(spec, "f")), scheme)
    if kind == "tagged":
        return tagged_dist(parse_expression(_need(spec, "f")), spec.get("selector", "left"), mu, scheme)
    if kind == "sum":
        out = None
        for term in _need(spec, "terms"):
            d = scale(build_dist(term["dist"], scheme, default_measure, tie),
                      parse_rational(term.get("coef", 1)))
            out = d if out is None else dist_combine(out, d, "add")
        return out
    out = None
    for f in _need(spec, "factors"):
        d = build_dist(f, scheme, default_measure, tie)
        out = d if out is None else dist_combine(out, d, "mul")
    return out


def _tie_name(t: Optional[str]) -> str:
    return {"left": "leftmost", "right": "rightmost"}.get(t, t or "leftmost")


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _level_rows(levels):
    return [(lv.level, repr(lv.lower), repr(lv.upper), repr(lv.gap)) for lv in levels]


_TABLE_HEADER = ("level", "lowerSum", "upperSum", "gap")


def _cmd_integrate(cfg, args):
    scheme = build_scheme(cfg)
    tie = _tie_name(cfg.get("tie"))
    phi = build_dist(_need(cfg, "dist", "integrate"), scheme, cfg.get("measure"), tie)
    result = integrate(phi, float(cfg.get("epsilon", 1e-6)), cfg.get("maxDepth", 24),
                       cfg.get("mode", "eventual"), cfg.get("minDepth", 0),
                       cfg.get("probes", 8), cfg.get("seed", 0))
    if args.format == "csv":
        text = _csv(_level_rows(result.levels), _TABLE_HEADER)
    else:
        text = result.dumps() + "\n"
    return text, EXIT_OK if result.certified else EXIT_NOT_CERTIFIED


def _cmd_table(cfg, args):
    scheme = build_scheme(cfg)
    phi = build_dist(_need(cfg, "dist", "table"), scheme, cfg.get("measure"),
                     _tie_name(cfg.get("tie")))
    levels = darboux_sums(phi, cfg.get("maxDepth", 24))
    if args.format == "json":
        rows = [{"level": lv.level, "lowerSum": lv.lower, "upperSum": lv.upper, "gap": lv.gap}
                for lv in levels]
        return dumps_json(rows) + "\n", EXIT_OK
    return _csv(_level_rows(levels), _TABLE_HEADER), EXIT_OK


def _cmd_verify(cfg, args):
    params = {}
    if "domain" in cfg:
        params["domain"] = tuple(parse_rational(v) for v in cfg["domain"])
    for key, name in (("f", "f"), ("fprime", "fprime"), ("epsilon", "epsilon"),
                      ("maxDepth", "max_depth"), ("seed", "seed"), ("count", "count"),
                      ("depth", "depth")):
        if key in cfg:
            params[name] = float(cfg[key]) if key == "epsilon" else cfg[key]
    report = run_suite(args.suite, **params)
    if args.format == "json":
        text = json.dumps({"suite": report.name, "passed": report.passed,
                           "lines": report.lines}, indent=2) + "\n"
    else:
        text = report.text() + "\n"
    return text, EXIT_OK if report.passed else EXIT_NOT_CERTIFIED


def _cmd_witness(cfg, args):
    scheme = build_scheme(cfg)
    tie = _tie_name(cfg.get("tie"))
    mu1 = build_measure(_need(cfg, "mu1", "witness"), scheme, tie)
    mu2 = build_measure(_need(cfg, "mu2", "witness"), scheme, tie)
    chain = comparison_witness(mu1, mu2, scheme, cfg.get("depth", cfg.get("maxDepth", 12)))
    rows = [(c.level, str(c.lo), str(c.hi), str(mu1.value(c)), str(mu2.value(c))) for c in chain]
    if args.format == "csv":
        return _csv(rows, ("level", "lo", "hi", "mu1", "mu2")), EXIT_OK
    out = [dict(zip(("level", "lo", "hi", "mu1", "mu2"), r)) for r in rows]
    return json.dumps(out, indent=2) + "\n", EXIT_OK


_COMMANDS = {"integrate": _cmd_integrate, "table": _cmd_table, "verify": _cmd_verify,
             "witness": _cmd_witness}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="JSON config (default: read stdin)")
    common.add_argument("--out", metavar="FILE", help="write output here instead of stdout")
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--depth", type=int, help="override maxDepth")
    common.add_argument("--epsilon", type=str, help="override epsilon")
    common.add_argument("--mode", choices=list(MODES))
    common.add_argument("--tie", choices=["left", "right"])

    parser = argparse.ArgumentParser(prog="leibniz", description="Certified Leibniz integrals "
                                     "on partition schemes.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("integrate", parents=[common], help="certify an integral")
    sub.add_parser("table", parents=[common], help="lower/upper sums by level (CSV)")
    v = sub.add_parser("verify", parents=[common], help="run a property suite")
    v.add_argument("suite", choices=sorted(SUITES))
    sub.add_parser("witness", parents=[common], help="nested cells where mu1 < mu2 at every level")
    return parser


def _apply_overrides(cfg: dict, args) -> dict:
    cfg = dict(cfg)
    if args.depth is not None:
        cfg["maxDepth"] = args.depth
        cfg["depth"] = args.depth
    if args.epsilon is not None:
        cfg["epsilon"] = Decimal(args.epsilon)
    if args.mode is not None:
        cfg["mode"] = args.mode
    if args.tie is not None:
        cfg["tie"] = args.tie
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.format is None:
        args.format = {"table": "csv", "verify": "text"}.get(args.command, "json")
    elif args.command == "verify" and args.format == "csv":
        args.format = "text"
    try:
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        else:
            text = sys.stdin.read() if not sys.stdin.isatty() else "{}"
        cfg = _apply_overrides(load_config(text or "{}"), args)
        out, code = _COMMANDS[args.command](cfg, args)
    except (ParseError, DomainError, LeibnizError, ValueError, OSError) as exc:
        print(f"leibniz: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
