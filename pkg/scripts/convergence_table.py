"""Gap between upper and lower Darboux sums, level by level.

Runs a few integrands on the dyadic and triadic schemes and writes one CSV
row per (integrand, scheme, level).  The certificate value and depth for
``--epsilon`` go to stderr.

    python scripts/convergence_table.py --depth 14 --out gaps.csv
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

from leibniz import (Length, build_dyadic_scheme, build_regular_scheme, darboux_sums,
                     form_f_dmu, indicator_dist, integrate)


@dataclass
class Config:
    depth: int = 14
    epsilon: float = 1e-4
    integrands: tuple = ("x^2", "sin(x)", "exp(-x^2)", "sqrt(x)", "indicator")
    branchings: tuple = (2, 3)
    indicator_set: list = field(default_factory=lambda: [(0, Fraction(1, 3)),
                                                         (Fraction(1, 2), Fraction(5, 7))])


def build(name, scheme, cfg):
    if name == "indicator":
        return indicator_dist(cfg.indicator_set, Length(), scheme)
    return form_f_dmu(name, Length(), scheme)


def run(cfg: Config, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["integrand", "branching", "level", "lower", "upper", "gap"])
    for k in cfg.branchings:
        scheme = build_dyadic_scheme(0, 1) if k == 2 else build_regular_scheme(0, 1, k)
        # about as many leaf cells as the dyadic run: k^depth ~ 2^cfg.depth
        depth = max(1, round(cfg.depth * math.log(2) / math.log(k)))
        for name in cfg.integrands:
            phi = build(name, scheme, cfg)
            for lv in darboux_sums(phi, depth):
                w.writerow([name, k, lv.level, repr(lv.lower), repr(lv.upper), repr(lv.gap)])
            t0 = time.perf_counter()
            cert = integrate(phi, cfg.epsilon, 30)
            dt = time.perf_counter() - t0
            if cert.certified:
                print(f"{name:>10} k={k}: {cert.value!r} +- {cfg.epsilon:g} at depth "
                      f"{cert.certified_depth} ({dt:.2f}s)", file=sys.stderr)
            else:
                print(f"{name:>10} k={k}: not certified ({cert.reason})", file=sys.stderr)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--depth", type=int, default=Config.depth)
    p.add_argument("--epsilon", type=float, default=Config.epsilon)
    p.add_argument("--out", help="CSV path (default stdout)")
    args = p.parse_args(argv)
    cfg = Config(depth=args.depth, epsilon=args.epsilon)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            run(cfg, fh)
    else:
        run(cfg, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
