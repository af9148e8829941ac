"""Computable Leibniz integrals over monotone partition schemes.

Monads are nested chains of cells, distributions map monads to eventual
sequences, and an integral is certified by a pair of finitely additive step
measures that sandwich the distribution.
"""
from . import errors
from .distribution import (MonadicDistribution, constant_dist, delta_dist, df_dist,
                           differential_dist, dist_combine, form_f_dmu, function_dist,
                           indicator_dist, indicator_function, scale, schedule_multiple,
                           tagged_dist)
from .errors import *  # noqa: F401,F403
from .expr import X, eval_interval, parse_expression, to_text
from .integrate import (IntegralCertificate, MeasureTable, NotCertified, bound_on_fraction,
                        comparison_witness, cross_scheme_check, darboux_sums, dumps_json,
                        integrate, newton_leibniz_report, reference_quadrature,
                        verify_certificate)
from .measure import (Atom, Combination, FinAddMeasure, Increment, LeafTable, Length,
                      Stieltjes, check_additivity, differential, make_measure, restrict)
from .partition import (LEFTMOST, RIGHTMOST, Cell, CustomScheme, Monad, RegularScheme,
                        build_dyadic_scheme, build_regular_scheme, is_infinitesimal_scheme,
                        monad_at, monad_limit, parent)
from .seqcore import (CompareVerdict, EventualSeq, Verdict, combine, eventually_equal,
                      eventually_majorizes, is_infinitesimal, totally_majorizes,
                      ultra_compare)

__version__ = "0.1.0"

__all__ = [
    # seqcore
    "EventualSeq", "Verdict", "CompareVerdict", "combine", "totally_majorizes",
    "eventually_majorizes", "ultra_compare", "is_infinitesimal", "eventually_equal",
    # partition
    "Cell", "Monad", "RegularScheme", "CustomScheme", "LEFTMOST", "RIGHTMOST",
    "build_dyadic_scheme", "build_regular_scheme", "parent", "monad_at", "monad_limit",
    "is_infinitesimal_scheme",
    # expressions
    "X", "parse_expression", "to_text", "eval_interval",
    # measures
    "FinAddMeasure", "Length", "Stieltjes", "Increment", "Atom", "Combination", "LeafTable",
    "make_measure", "differential", "restrict", "check_additivity",
    # distributions
    "MonadicDistribution", "function_dist", "constant_dist", "indicator_function",
    "differential_dist", "form_f_dmu", "indicator_dist", "delta_dist", "df_dist",
    "tagged_dist", "dist_combine", "scale", "schedule_multiple",
    # integration
    "integrate", "IntegralCertificate", "NotCertified", "MeasureTable", "bound_on_fraction",
    "darboux_sums", "verify_certificate", "comparison_witness", "newton_leibniz_report",
    "reference_quadrature", "cross_scheme_check", "dumps_json",
    *errors.__all__,
]
