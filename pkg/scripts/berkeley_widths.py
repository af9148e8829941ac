"""Width of the certified interval for an infinitesimal distribution.

``Phi = (1/n) g(x) dx`` at level ``n`` with ``|g| <= 1``.  Integrating with
``min_depth = d`` gives an interval that must contain 0 and shrink like
``1/d``; this prints the width against ``2/d`` for several depths.

    python scripts/berkeley_widths.py --depths 4 8 12 16 20
"""
from __future__ import annotations

import argparse
import random
import sys
from dataclasses import dataclass
from fractions import Fraction

from leibniz import Length, build_dyadic_scheme, form_f_dmu, integrate, schedule_multiple, to_text
from leibniz.suites import random_polynomial


@dataclass
class Config:
    depths: tuple = (4, 8, 12, 16, 20)
    functions: int = 4
    seed: int = 0


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--depths", type=int, nargs="+", default=list(Config.depths))
    p.add_argument("--functions", type=int, default=Config.functions)
    p.add_argument("--seed", type=int, default=Config.seed)
    args = p.parse_args(argv)
    cfg = Config(tuple(args.depths), args.functions, args.seed)

    rng = random.Random(cfg.seed)
    scheme = build_dyadic_scheme(0, 1)
    gs = [random_polynomial(rng, 3, Fraction(1, 4)) for _ in range(cfg.functions)]
    print("depth  bound(2/d)  " + "  ".join(f"{to_text(g)[:18]:>18}" for g in gs))
    bad = 0
    for d in cfg.depths:
        row = []
        for g in gs:
            phi = schedule_multiple(form_f_dmu(g, Length(), scheme), lambda n: Fraction(1, max(n, 1)))
            cert = integrate(phi, 1 / d, d, min_depth=d)
            if not cert.certified:
                row.append(f"{'n/c':>18}")
                bad += 1
                continue
            w = cert.upper_total - cert.lower_total
            ok = cert.lower_total <= 0 <= cert.upper_total and w <= 2 / d
            bad += not ok
            row.append(f"{w:>17.3g}{' ' if ok else '!'}")
        print(f"{d:>5}  {2 / d:>10.3g}  " + "  ".join(row))
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
