"""Exact arithmetic for algebraic generalized power series over F_q(t).

Series are Hahn series with well-ordered rational support, represented by
finite automata reading base-p expansions of the exponents; every ring
operation and decision below is exact at the automaton level.  Truncated
objects carry an explicit window (exponent bound, depth bound) instead.
"""

__version__ = "0.1.0"

from autoseries.errors import (
    AutoseriesError,
    BudgetError,
    ExpansionError,
    MachineError,
    SolveError,
    WindowError,
)

# finite fields and rational functions
from autoseries.gfq import Fq, FqElem, PolyFq, RatFun, field_make

# automata and radix-point languages
from autoseries.automata import Alphabet, Dfa, Dfao, Nfa, to_dot
from autoseries.radix import (
    expansion_of,
    in_sp,
    valid_language,
    value_of,
    word_of,
)

# the series ring
from autoseries.series import (
    AutoSeries,
    WellOrderVerdict,
    all_ones,
    chevalley_series,
    coefficient,
    decimate,
    equals,
    frobenius_series,
    from_rational_function,
    from_terms,
    hadamard,
    is_well_ordered,
    mul,
    pth_root_series,
    scale,
    series_add,
    series_shift,
    standard_catalog,
    support_language,
    truncate,
    zero_series,
)

# truncated series, polygons, twisted polynomials
from autoseries.valued import (
    INF,
    NewtonPolygon,
    TruncPoly,
    TruncSeries,
    TwistedPoly,
    newton_polygon,
    render_trunc,
    slope_factorization,
    twisted_apply,
    twisted_mul,
    twisted_rdiv,
)

# solvers
from autoseries.solver import (
    AdditiveWitness,
    RootSet,
    artin_schreier_auto,
    artin_schreier_check,
    artin_schreier_trunc,
    expand_ratfun,
    is_additive,
    moore_additive,
    newton_solve,
    ore_additive,
    residual_ok,
    roots_of_polynomial,
    verify,
)
