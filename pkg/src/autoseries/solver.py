"""Root-finding in the algebraic closure of F_q(t).

Additive-polynomial constructions (Moore products, Ore reduction), exact and
truncated Artin-Schreier solving, the polygon kernel solver for additive
operators, and residual verification of algebraicity claims.
"""

from dataclasses import dataclass
from fractions import Fraction

from .automata import Alphabet, Nfa, dfao_from_levels, nfa_count_mod
from .errors import BudgetError, SolveError, WindowError
from .gfq import Fq, FqElem, PolyFq, RatFun, field_make
from .radix import affine_map_rational, geq_const_language, min_accepted_value, valid_language
from .series import (
    AutoSeries,
    _levels,
    equals,
    frobenius_series,
    from_rational_function,
    is_well_ordered,
    mul,
    pth_root_series,
    scale,
    series_add,
    support_language,
    truncate,
    zero_series,
)
from .valued import (
    INF,
    TruncPoly,
    TruncSeries,
    TwistedPoly,
    _hull_height,
    _lower_hull,
    _require_monic,
    exp_depth,
    twisted_apply,
    twisted_mul,
)

__all__ = [
    "AdditiveWitness",
    "RootSet",
    "DEFAULT_DEPTH",
    "DEFAULT_EXTENSION",
    "DEFAULT_WINDOW",
    "artin_schreier_auto",
    "artin_schreier_check",
    "artin_schreier_trunc",
    "expand_ratfun",
    "is_additive",
    "moore_additive",
    "newton_solve",
    "ore_additive",
    "residual_ok",
    "roots_of_polynomial",
    "verify",
]

DEFAULT_WINDOW = Fraction(10)
DEFAULT_DEPTH = 24
DEFAULT_EXTENSION = 8

_MAX_NEWTON_STEPS = 64


# ---------------------------------------------------------------------------
# polynomials over F_q(t), stored as coefficient lists (z^0 first)


def _rf_zero(field: Fq) -> RatFun:
    return RatFun.constant(field, field.zero())


def _rf_one(field: Fq) -> RatFun:
    return RatFun.constant(field, field.one())


def _rp_trim(cs: list) -> list:
    while cs and cs[-1].is_zero():
        cs.pop()
    return cs


def _rp_degree(a: list) -> int:
    return len(a) - 1


def _rp_add(a: list, b: list, field: Fq) -> list:
    n = max(len(a), len(b))
    z = _rf_zero(field)
    out = [(a[i] if i < len(a) else z) + (b[i] if i < len(b) else z)
           for i in range(n)]
    return _rp_trim(out)


def _rp_neg(a: list) -> list:
    return [-c for c in a]


def _rp_sub(a: list, b: list, field: Fq) -> list:
    return _rp_add(a, _rp_neg(b), field)


def _rp_mul(a: list, b: list, field: Fq) -> list:
    if not a or not b:
        return []
    out = [_rf_zero(field)] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca.is_zero():
            continue
        for j, cb in enumerate(b):
            out[i + j] = out[i + j] + ca * cb
    return _rp_trim(out)


def _rp_scale(a: list, c: RatFun) -> list:
    return _rp_trim([x * c for x in a])


def _rp_divmod(a: list, b: list, field: Fq) -> tuple[list, list]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(a)
    quo = [_rf_zero(field)] * max(0, len(a) - len(b) + 1)
    inv_lead = _rf_one(field) / b[-1]
    while len(rem) >= len(b) and _rp_trim(rem):
        if rem[-1].is_zero():
            rem.pop()
            continue
        shift = len(rem) - len(b)
        c = rem[-1] * inv_lead
        quo[shift] = c
        for i, cb in enumerate(b):
            rem[shift + i] = rem[shift + i] - c * cb
        rem.pop()
    return _rp_trim(quo), _rp_trim(rem)


def _rp_gcd(a: list, b: list, field: Fq) -> list:
    a, b = list(a), list(b)
    while b:
        a, b = b, _rp_divmod(a, b, field)[1]
    if a:
        a = _rp_scale(a, _rf_one(field) / a[-1])
    return a


def _rp_derivative(a: list, field: Fq) -> list:
    p = field.p
    out = []
    for i in range(1, len(a)):
        k = i % p
        out.append(a[i] * RatFun.constant(field, field.from_int(k)))
    return _rp_trim(out)


def _rp_frobenius(a: list, field: Fq) -> list:
    """a(z)^p in characteristic p: coefficients to the p, exponents times p."""
    p = field.p
    if not a:
        return []
    out = [_rf_zero(field)] * ((len(a) - 1) * p + 1)
    for i, c in enumerate(a):
        acc = _rf_one(field)
        for _ in range(p):
            acc = acc * c
        out[i * p] = acc
    return _rp_trim(out)


def expand_ratfun(field: Fq, r: RatFun, window) -> TruncSeries:
    """Laurent expansion of a rational function at t = 0, exact below window."""
    if r.is_zero():
        return TruncSeries.zero(field)
    window = Fraction(window)
    num, den = r.num, r.den
    k = 0
    while den.coeffs[0].is_zero():
        den = PolyFq.make(field, list(den.coeffs[1:]))
        k += 1
    c0_inv = den.coeffs[0].inv()
    terms = []
    state = num
    e = -k
    while e < window and not state.is_zero():
        c = state.coeffs[0] * c0_inv
        if not c.is_zero():
            terms.append((Fraction(e), c))
        state = PolyFq.make(field, list((state - den.scale(c)).coeffs[1:]))
        e += 1
    return TruncSeries.make(field, terms,
                            window=INF if state.is_zero() else window)


# ---------------------------------------------------------------------------
# additive polynomials


def is_additive(P) -> bool:
    """True when only p-power z-exponents (p^0 = 1 included) carry nonzero
    coefficients.  Accepts a TruncPoly or a RatFun coefficient list; for a
    TruncPoly the verdict is relative to the windows (a coefficient with no
    visible terms counts as zero)."""
    if isinstance(P, TruncPoly):
        coeffs = list(P.coeffs)
        p = P.field.p
        zero = lambda c: not c.terms
    else:
        coeffs = list(P)
        if not coeffs:
            return True
        p = coeffs[0].field.p
        zero = lambda c: c.is_zero()
    for i, c in enumerate(coeffs):
        if zero(c):
            continue
        if i == 0:
            return False
        n = i
        while n % p == 0:
            n //= p
        if n != 1:
            return False
    return True


def moore_additive(basis: list, e: int = 0) -> TwistedPoly:
    """Monic additive operator whose kernel is the F_p-span of basis, each
    root with multiplicity p^e, built by iterated linear extension."""
    if not basis:
        raise SolveError("empty basis")
    field = basis[0].field
    p = field.p
    one = TruncSeries.from_const(field, field.one())
    A = TwistedPoly.make(field, [one])
    for r in basis:
        v = twisted_apply(A, r)
        if v.is_exact_zero():
            raise SolveError("basis is F_p-linearly dependent")
        if not v.terms:
            raise WindowError("window too small to certify independence")
        lin = TwistedPoly.make(field, [-(v ** (p - 1)), one])
        A = twisted_mul(lin, A)
    frob = TwistedPoly.from_consts(field, [0, 1])
    for _ in range(e):
        A = twisted_mul(frob, A)
    return A


@dataclass(frozen=True)
class AdditiveWitness:
    """Additive multiple of a source polynomial over F_q(t).

    additive[k] is the coefficient of z^(p^k); ordinary and cofactor are
    plain z-coefficient lists with ordinary = cofactor * source."""

    field: Fq
    additive: tuple
    ordinary: tuple
    cofactor: tuple
    cofactor_note: str

    def twisted(self, window=DEFAULT_WINDOW) -> TwistedPoly:
        coeffs = [expand_ratfun(self.field, c, window) for c in self.additive]
        return TwistedPoly.make(self.field, coeffs)


def ore_additive(P: list) -> AdditiveWitness:
    """Smallest-degree monic additive polynomial divisible by P, found by
    reducing the p-power maps z, z^p, z^(p^2), ... modulo P."""
    field = P[0].field
    n = _rp_degree(P)
    if n < 1:
        raise SolveError("degree must be at least 1")
    if not (P[-1] - _rf_one(field)).is_zero():
        raise SolveError("polynomial must be monic")
    # echelon basis over F_q(t) with combination tracking
    pivots: list[tuple[int, list, list]] = []
    r = _rp_divmod([_rf_zero(field), _rf_one(field)], P, field)[1]
    combo_len = n + 1
    k = 0
    while True:
        vec = list(r) + [_rf_zero(field)] * (n - len(r))
        combo = [_rf_zero(field)] * combo_len
        combo[k] = _rf_one(field)
        for lead, bvec, bcombo in pivots:
            if not vec[lead].is_zero():
                c = vec[lead]
                vec = [x - c * y for x, y in zip(vec, bvec)]
                combo = [x - c * y for x, y in zip(combo, bcombo)]
        nz = [i for i, c in enumerate(vec) if not c.is_zero()]
        if not nz:
            additive = _rp_trim(combo[:k + 1])
            break
        lead = nz[-1]
        c_inv = _rf_one(field) / vec[lead]
        pivots.append((lead, [x * c_inv for x in vec],
                       [x * c_inv for x in combo]))
        if k == n:
            raise SolveError("no additive relation found; P may be degenerate")
        r = _rp_divmod(_rp_frobenius(r, field), P, field)[1]
        k += 1
    m = len(additive) - 1
    lead_inv = _rf_one(field) / additive[m]
    additive = [c * lead_inv for c in additive]
    # expand sum c_k z^(p^k) as an ordinary polynomial and verify division
    p = field.p
    ordinary = [_rf_zero(field)] * (p ** m + 1)
    for i, c in enumerate(additive):
        ordinary[p ** i] = c
    ordinary = _rp_trim(ordinary)
    cof, rem = _rp_divmod(ordinary, P, field)
    if rem:
        raise SolveError("additive candidate does not annihilate P")
    note = f"ordinary form has degree p^{m}; cofactor degree {_rp_degree(cof)}"
    return AdditiveWitness(field, tuple(additive), tuple(ordinary),
                           tuple(cof), note)


# ---------------------------------------------------------------------------
# Artin-Schreier equations


@dataclass(frozen=True)
class RootSet:
    """Solutions within a window, over a possibly extended field."""

    field: Fq
    roots: list
    window: object  # Fraction or INF

    def __iter__(self):
        return iter(self.roots)

    def __len__(self):
        return len(self.roots)


def _root_sort_key(r: TruncSeries):
    return tuple((e, c.to_int()) for e, c in r.terms)


def _embed_const(c: FqElem, src: Fq, dst: Fq) -> FqElem:
    return c if src == dst else src.embed(c, dst)


def _constant_pth_root_shift(field: Fq, beta: FqElem, max_extension: int):
    """Some c with c^p - c = beta, extending the field when necessary.
    An extension of degree p always works (its relative trace kills beta)."""
    p = field.p
    for k in range(1, max_extension + 1):
        if field.e * k > 14:
            break
        big = field if k == 1 else field_make(p, field.e * k)
        b = _embed_const(beta, field, big)
        for x in sorted(big.elements(), key=lambda u: u.to_int()):
            if (x ** p - x - b).is_zero():
                return x, big
    raise BudgetError("no extension within budget solves c^p - c = constant")


def _root_of_unity_part(field: Fq, c: FqElem, max_extension: int):
    """Some d with d^(p-1) = c, extending the field when necessary."""
    p = field.p
    if p == 2:
        return c, field
    for k in range(1, max_extension + 1):
        if field.e * k > 14:
            break
        big = field if k == 1 else field_make(p, field.e * k)
        cc = _embed_const(c, field, big)
        for x in sorted(big.elements(), key=lambda u: u.to_int()):
            if x.is_zero():
                continue
            if (x ** (p - 1) - cc).is_zero():
                return x, big
    raise BudgetError("no extension within budget yields the (p-1)-th root")


def _linear_normalizer(a: TruncSeries, max_extension: int, window=INF):
    """lam with lam^(p-1) = a, so z = lam*y turns z^p - a z = b into
    y^p - y = b lam^(-p).  May extend the coefficient field.

    window caps the refinement when a is exact; without a cap an exact
    multi-term a would iterate forever."""
    field = a.field
    p = field.p
    v, c = a.terms[0]
    d, big = _root_of_unity_part(field, c, max_extension)
    a2 = a.embed(big) if big != field else a
    unit = a2.shift_exp(-v).scale(_embed_const(c, field, big).inv())
    if unit.window == INF and window != INF:
        unit = unit.clamp(window=Fraction(window))
    if p == 2:
        w = unit
    else:
        # Hensel for w^(p-1) = unit from w = 1; the derivative is a unit
        w = TruncSeries.from_const(big, big.one())
        inv_exp = big.from_int(p - 1).inv()
        for _ in range(_MAX_NEWTON_STEPS):
            g = w ** (p - 1) - unit
            if not g.terms:
                break
            step = g * (w ** (p - 2)).inv() * TruncSeries.from_const(big, inv_exp)
            w = w - step
        else:
            raise BudgetError("unit-root refinement did not settle")
    lam = w.shift_exp(v / (p - 1)).scale(d)
    return lam, big


def _negative_part_sum(bneg: TruncSeries, depth) -> TruncSeries:
    """sum of p^k-th roots of a strictly negative-support series; the depth
    cap makes the tail vanish."""
    field = bneg.field
    acc = TruncSeries.zero(field)
    term = bneg
    guard = 0
    while term.terms:
        term = term.pth_root().clamp(depth=depth)
        acc = acc + term
        guard += 1
        if guard > (depth if depth != INF else DEFAULT_DEPTH) + 64:
            raise BudgetError("negative-part sum failed to terminate")
    return acc


def _positive_part_sum(bpos: TruncSeries, window) -> TruncSeries:
    """minus the sum of p^j-th powers of a strictly positive-support series;
    exponents grow, so the window cap makes the tail vanish."""
    field = bpos.field
    acc = TruncSeries.zero(field)
    term = bpos.clamp(window=window)
    guard = 0
    while term.terms:
        acc = acc - term
        term = term.frobenius_power(1).clamp(window=window)
        guard += 1
        if guard > _MAX_NEWTON_STEPS + int(window if window != INF else 0):
            raise BudgetError("positive-part sum failed to terminate")
    return acc


def artin_schreier_trunc(a: TruncSeries, b: TruncSeries,
                         window=DEFAULT_WINDOW, depth=DEFAULT_DEPTH,
                         max_extension: int = DEFAULT_EXTENSION) -> RootSet:
    """All p roots of z^p - a z = b as truncated series.

    Normalizes by lam with lam^(p-1) = a, splits the right side into
    negative, constant, and positive parts, and solves each part by the
    appropriate convergent sum; the constant part may extend the field."""
    if a.is_exact_zero():
        raise SolveError("coefficient a must be nonzero")
    if not a.terms:
        raise WindowError("coefficient a has no determinate term")
    field = a.field
    p = field.p
    wcap = INF if window == INF else Fraction(window) + 8
    lam, big = _linear_normalizer(a, max_extension, window=wcap)
    b2 = b.embed(big) if b.field != big else b
    rhs = b2 * (lam.inv() ** p)
    if rhs.window != INF and rhs.window <= 0:
        raise WindowError("right side is not determined to positive window")
    # below any positive window the negative and constant parts are exact
    neg = TruncSeries.make(big, [tc for tc in rhs.terms if tc[0] < 0],
                           depth=rhs.depth)
    const = rhs.coeff(Fraction(0))
    pos = TruncSeries.make(big, [tc for tc in rhs.terms if tc[0] > 0],
                           window=rhs.window, depth=rhs.depth)
    y_neg = _negative_part_sum(neg, depth)
    c0, big2 = _constant_pth_root_shift(big, const, max_extension)
    if big2 != big:
        lam = lam.embed(big2)
        y_neg = y_neg.embed(big2)
        pos = pos.embed(big2)
    y_pos = _positive_part_sum(pos, window)
    base = y_neg + y_pos
    roots = []
    for i in range(p):
        shift = TruncSeries.from_const(big2, c0 + big2.from_int(i))
        roots.append((lam * (base + shift)).clamp(window=window, depth=depth))
    roots.sort(key=_root_sort_key)
    wmin = min((r.window for r in roots), default=window)
    return RootSet(big2, roots, wmin)


def _run_strip_nfa(level, p: int) -> Nfa:
    """Paths guess how many leading (p-1) fraction digits to strip, then run
    the level acceptor on the remainder as its own fraction digits; exactly
    one accepting path per viable strip count k >= 1."""
    a = Alphabet(p)
    n = level.n_states
    start, wait = n, n + 1
    rows = [dict() for _ in range(n + 2)]
    for q in range(n):
        for d in range(p):
            rows[q][d] = {level.transitions[q][d]}
    q_pt = level.transitions[level.initial][a.point]
    rows[start][a.point] = {wait}
    rows[wait][p - 1] = {wait, q_pt}
    return Nfa(a, n + 2, rows, {start}, set(level.accepting))


def _tail_sum(z: AutoSeries, a_out: int) -> AutoSeries:
    """sum of z^(1/p^k) for k >= 1, when a_out * (-i) <= 1 for every support
    index i of z.  Result offsets are (a_out, 1).

    A support index i rebases to u = a_out*i + 1 in [0, 1); the k-th root
    term sits at word value 1 - (1-u)/p^k, whose canonical expansion is a
    point, k digits p-1, then u's fraction digits.  The coefficient at an
    output word is the mod-p path count over strip lengths, weighted per
    level."""
    field = z.field
    p = field.p
    alphabet = Alphabet(p)
    mulf = Fraction(a_out, z.a)
    shift = 1 - Fraction(a_out * z.b, z.a)
    total = zero_series(field).machine
    valid = valid_language(p)
    for alpha, lang in _levels(z).items():
        mapped = affine_map_rational(lang, mulf, shift)
        if mapped.is_empty():
            continue
        counts = nfa_count_mod(_run_strip_nfa(mapped, p), p)
        levels = {}
        for r in range(1, p):
            lev = counts.level_dfa(lambda o, R=r: o == R)
            lev = lev.intersection(valid).minimize()
            if not lev.is_empty():
                levels[field.from_int(r) * alpha] = lev
        if not levels:
            continue
        contrib = dfao_from_levels(levels, alphabet, field.zero())
        total = total.product(contrib, lambda u, v: u + v).minimize()
    return AutoSeries(field, a_out, 1, total)


def artin_schreier_auto(x: AutoSeries) -> AutoSeries:
    """Exact automatic solution y of y^p - y = x for strictly negative
    support: y = x^(1/p) + x^(1/p^2) + ...

    Enough p-th roots are taken up front that the remaining geometric tail
    has support in [-1/a, 0); the tail machine then counts, per index word,
    how many strip lengths of its leading (p-1)-run land in the support."""
    field = x.field
    p = field.p
    supp = support_language(x)
    if supp.is_empty():
        return zero_series(field)
    verdict = is_well_ordered(x)
    if not verdict.ok:
        raise SolveError("support is not well ordered")
    if not supp.intersection(geq_const_language(p, x.b)).is_empty():
        raise SolveError("support is not certified strictly negative")
    v_min, _ = min_accepted_value(supp)
    j_extra = 0
    while p ** j_extra < x.b - v_min:
        j_extra += 1
    z = x
    for _ in range(j_extra):
        z = pth_root_series(z)
    y = _tail_sum(z, x.a)
    w = x
    for _ in range(j_extra):
        w = pth_root_series(w)
        y = series_add(y, w)
    return y


def artin_schreier_check(x: AutoSeries, y: AutoSeries) -> bool:
    """Exact check that y^p - y = x at the automaton level."""
    minus_one = y.field.from_int(y.field.p - 1)
    lhs = series_add(frobenius_series(y), scale(y, minus_one))
    return equals(lhs, x)


# ---------------------------------------------------------------------------
# kernels of additive operators


def _frob_iter(c: FqElem, k: int) -> FqElem:
    for _ in range(k):
        c = c.frobenius()
    return c


def _frob_inv_iter(c: FqElem, k: int) -> FqElem:
    for _ in range(k):
        c = c.frobenius_inv()
    return c


def _semilinear_solutions(field: Fq, pairs, beta: FqElem) -> list:
    """All x in the field with sum of c * x^(p^k) over pairs equal to beta."""
    out = []
    for x in field.elements():
        acc = field.zero()
        for k, c in pairs:
            acc = acc + c * _frob_iter(x, k)
        if (acc - beta).is_zero():
            out.append(x)
    return out


def _fp_independent(field: Fq, sols: list, dim: int) -> list:
    """Up to dim many F_p-independent elements of sols, in scan order."""
    basis = []
    span = [field.zero()]
    keys = {span[0].coeffs}
    for s in sols:
        if s.coeffs in keys:
            continue
        basis.append(s)
        if len(basis) == dim:
            break
        bigger = list(span)
        step = s
        for _ in range(1, field.p):
            bigger.extend(v + step for v in span)
            step = step + s
        span = bigger
        keys = {v.coeffs for v in span}
    return basis


def _const_ladder(field: Fq, max_extension: int):
    for j in range(1, max_extension + 1):
        if field.e * j > 14:
            return
        yield field if j == 1 else field_make(field.p, field.e * j)


def _segment_constants(field: Fq, pairs, dim: int, max_extension: int):
    """F_p-basis of the gamma with sum c * gamma^(p^k) = 0, over the first
    ladder field reaching the segment dimension."""
    for big in _const_ladder(field, max_extension):
        bpairs = [(k, _embed_const(c, field, big)) for k, c in pairs]
        sols = _semilinear_solutions(big, bpairs, big.zero())
        basis = _fp_independent(big, sols, dim)
        if len(basis) == dim:
            return basis, big
    raise BudgetError("no extension within budget splits the residual "
                      "equation of a polygon segment")


def _affine_constant(field: Fq, pairs, beta: FqElem, max_extension: int):
    """Some x with sum c * x^(p^k) = beta, extending the field as needed."""
    for big in _const_ladder(field, max_extension):
        bpairs = [(k, _embed_const(c, field, big)) for k, c in pairs]
        sols = _semilinear_solutions(big, bpairs,
                                     _embed_const(beta, field, big))
        if sols:
            return sols[0], big
    raise BudgetError("no extension within budget solves the tied residual "
                      "equation")


class _KernelState:
    """Operator coefficients plus the field they currently live in."""

    def __init__(self, field: Fq, coeffs: list):
        self.field = field
        self.coeffs = coeffs

    def embed_to(self, big: Fq):
        if big != self.field:
            self.coeffs = [c.embed(big) for c in self.coeffs]
            self.field = big


def _operator_polygon(coeffs: list, p: int):
    """Lower hull of the points (p^k, val c_k), plus the determinate vals.

    A coefficient with no determinate term may not reach down to the hull,
    otherwise the polygon itself is uncertain."""
    det = {}
    for k, c in enumerate(coeffs):
        if c.is_exact_zero():
            continue
        if c.terms:
            det[k] = c.terms[0][0]
    pts = sorted((p ** k, v) for k, v in det.items())
    hull = _lower_hull(pts)
    for k, c in enumerate(coeffs):
        if c.is_exact_zero() or c.terms:
            continue
        if c.window <= _hull_height(hull, p ** k):
            raise WindowError("a coefficient window reaches the operator "
                              "polygon")
    return hull, det


def _line_base(c: TruncSeries):
    # certified lower bound of the valuation, whether or not a term is known
    return c.terms[0][0] if c.terms else c.window


def _stop_level(st: _KernelState, w_eff: Fraction):
    p = st.field.p
    lev = INF
    for k, c in enumerate(st.coeffs):
        if c.is_exact_zero():
            continue
        lev = min(lev, _line_base(c) + p ** k * w_eff)
    return lev


def _cert_window(st: _KernelState, r_window):
    """Valuation below which a correction y with val(A(y)) >= r_window can
    still move the result."""
    out = None
    p = st.field.p
    for k, c in enumerate(st.coeffs):
        if c.is_exact_zero():
            continue
        cand = (r_window - _line_base(c)) / Fraction(p ** k)
        if out is None or cand > out:
            out = cand
    return out


def _next_exponent(st: _KernelState, rho: Fraction):
    """Unique tau with min over k of (val c_k + p^k tau) equal to rho; the
    argmin set are the critical indices."""
    p = st.field.p
    taus = []
    for k, c in enumerate(st.coeffs):
        if c.is_exact_zero():
            continue
        taus.append(((rho - _line_base(c)) / Fraction(p ** k), k,
                     bool(c.terms)))
    tmax = max(t for t, _, _ in taus)
    crit = [k for t, k, d in taus if t == tmax and d]
    from_window = any(t == tmax and not d for t, _, d in taus)
    return tmax, crit, from_window


def _apply_term(st: _KernelState, delta: FqElem, tau: Fraction) -> TruncSeries:
    """Image of the monomial delta * t^tau under the operator; exact up to
    the coefficient windows."""
    p = st.field.p
    acc = TruncSeries.zero(st.field)
    for k, c in enumerate(st.coeffs):
        if c.is_exact_zero():
            continue
        acc = acc + c.scale(_frob_iter(delta, k)).shift_exp(p ** k * tau)
    return acc


def _refine_kernel_element(st: _KernelState, gamma: FqElem, v: Fraction,
                           w_eff, wdepth, max_extension: int) -> TruncSeries:
    """Grow gamma * t^v into a kernel element digit by digit.

    Additivity makes the residual update exact: appending delta * t^tau adds
    its operator image to the residual.  Digits beyond the working depth are
    dropped together with their images; the damage stays beyond the depth
    guard band."""
    field = st.field
    p = field.p
    if gamma.field != field:
        gamma = _embed_const(gamma, gamma.field, field)
    terms = [(v, gamma)]
    stop = _stop_level(st, w_eff)
    r = _apply_term(st, gamma, v).clamp(window=stop, depth=wdepth)
    rounds = 0
    while r.terms:
        rounds += 1
        if rounds > 4096:
            raise BudgetError("kernel refinement failed to stabilize")
        rho, lead = r.terms[0]
        tau, crit, from_window = _next_exponent(st, rho)
        if from_window:
            raise WindowError("coefficient windows too small to certify the "
                              "next kernel digit")
        if wdepth != INF and exp_depth(tau, p) > wdepth:
            r = r - TruncSeries.monomial(st.field, rho, lead)
            continue
        if len(crit) == 1:
            k0 = crit[0]
            c0 = st.coeffs[k0].terms[0][1]
            delta = _frob_inv_iter(-lead * c0.inv(), k0)
        else:
            pairs = [(k, st.coeffs[k].terms[0][1]) for k in crit]
            delta, big = _affine_constant(st.field, pairs, -lead,
                                          max_extension)
            if big != st.field:
                old = st.field
                st.embed_to(big)
                terms = [(e, _embed_const(c, old, big)) for e, c in terms]
                r = r.embed(big)
        terms.append((tau, delta))
        r = (r + _apply_term(st, delta, tau)).clamp(window=stop, depth=wdepth)
    w_cert = _cert_window(st, r.window)
    return TruncSeries.make(st.field, terms, window=min(w_eff, w_cert),
                            depth=wdepth)


def newton_solve(P: TwistedPoly, window=DEFAULT_WINDOW, depth=DEFAULT_DEPTH,
                 max_extension: int = DEFAULT_EXTENSION) -> RootSet:
    """All distinct kernel elements of a monic additive operator.

    Works slope by slope on the polygon of the points (p^k, val c_k): each
    segment of horizontal span p^k1 to p^k2 contributes k2 - k1 independent
    leading constants from its residual equation, every leading term refines
    to a kernel element, and the kernel is the F_p-span of the results."""
    field = P.field
    p = field.p
    if window == INF:
        raise WindowError("kernel certification needs a finite window")
    window = Fraction(window)
    _require_monic(P)
    m0 = 0
    while m0 < len(P.coeffs) and P.coeffs[m0].is_exact_zero():
        m0 += 1
    coeffs = list(P.coeffs[m0:])
    m = len(coeffs) - 1
    if m == 0:
        return RootSet(field, [TruncSeries.zero(field)], window)
    if not coeffs[0].terms:
        raise WindowError("constant operator coefficient indeterminate")
    if p ** m > 4096:
        raise BudgetError("kernel too large to enumerate")
    w_eff = window * p ** m0
    # dropped too-deep digits contaminate the residual at shallower depths,
    # climbing at most m levels per round of consequences; the guard band
    # keeps the damage inside the top junk levels of the requested depth
    wdepth = depth if depth == INF else depth + max(6, 3 * m)
    st = _KernelState(field, coeffs)
    hull, det = _operator_polygon(st.coeffs, p)
    xk = {p ** k: k for k in det}
    basis = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        slope = (y2 - y1) / (x2 - x1)
        k1, k2 = xk[x1], xk[x2]
        crit = [k for k in det if x1 <= p ** k <= x2
                and det[k] == y1 + slope * (p ** k - x1)]
        pairs = [(k, st.coeffs[k].terms[0][1]) for k in crit]
        gammas, big = _segment_constants(st.field, pairs, k2 - k1,
                                         max_extension)
        st.embed_to(big)
        for g in gammas:
            basis.append(_refine_kernel_element(st, g, -slope, w_eff, wdepth,
                                                max_extension))
    fld = st.field
    basis = [b.embed(fld) if b.field != fld else b for b in basis]
    roots = [TruncSeries.zero(fld)]
    for b in basis:
        bigger = list(roots)
        step = b
        for _ in range(1, p):
            bigger.extend(r + step for r in roots)
            step = step + b
        roots = bigger
    for _ in range(m0):
        roots = [r.pth_root() for r in roots]
    roots = [r.clamp(window=window, depth=depth) for r in roots]
    roots.sort(key=_root_sort_key)
    wmin = min((r.window for r in roots), default=window)
    return RootSet(fld, roots, wmin)


# ---------------------------------------------------------------------------
# the full pipeline


def residual_ok(r: TruncSeries, e_cert, depth=DEFAULT_DEPTH) -> bool:
    """True when every determinate term at trustworthy depth sits at or
    above e_cert and the window itself reaches e_cert.  The two deepest
    levels are working junk from truncated p-th root tails."""
    e_cert = Fraction(e_cert)
    if r.window != INF and r.window < e_cert:
        return False
    cutoff = depth - 2 if depth != INF else INF
    for e, _ in r.terms:
        if cutoff != INF and exp_depth(e, r.field.p) > cutoff:
            continue
        if e < e_cert:
            return False
    return True


def _eval_ratfun_poly(P: list, x: TruncSeries, window) -> TruncSeries:
    field = P[0].field
    coeffs = [expand_ratfun(field, c, window) for c in P]
    if x.field != field:
        coeffs = [c.embed(x.field) for c in coeffs]
    acc = TruncSeries.zero(x.field)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def roots_of_polynomial(P: list, window=DEFAULT_WINDOW, depth=DEFAULT_DEPTH,
                        max_extension: int = DEFAULT_EXTENSION) -> RootSet:
    """All deg P roots of a monic squarefree polynomial over F_q(t):
    Ore's additive multiple, the kernel of its twisted form, then residual
    filtering of the kernel elements."""
    field = P[0].field
    n = _rp_degree(P)
    if n < 1:
        raise SolveError("degree must be at least 1")
    if not (P[-1] - _rf_one(field)).is_zero():
        raise SolveError("polynomial must be monic")
    if n == 1:
        root = expand_ratfun(field, -P[0], window)
        return RootSet(field, [root.clamp(window=window, depth=depth)],
                       window)
    dP = _rp_derivative(P, field)
    if not dP:
        raise SolveError(
            "derivative vanishes; substitute z -> z^(1/p) powers first")
    g = _rp_gcd(P, dP, field)
    if _rp_degree(g) > 0:
        raise SolveError("polynomial is not squarefree")
    witness = ore_additive(P)
    work = (Fraction(window) + 4) * field.p
    kernel = newton_solve(witness.twisted(window=work), window=work,
                          depth=depth, max_extension=max_extension)
    kept = []
    for cand in kernel.roots:
        res = _eval_ratfun_poly(P, cand, work)
        if residual_ok(res, window, depth):
            kept.append(cand.clamp(window=window, depth=depth))
    if len(kept) != n:
        raise SolveError(
            f"expected {n} roots, certified {len(kept)}; "
            "widen the window or extension budget")
    kept.sort(key=_root_sort_key)
    return RootSet(kernel.field, kept, window)


def verify(P: list, x: AutoSeries, window=DEFAULT_WINDOW,
           depth=DEFAULT_DEPTH) -> bool:
    """Truncated vanishing of P(x) computed in the automatic series ring.

    A necessary condition at finite precision, not a proof: coefficients of
    P(x) must vanish for exponents below window at depth up to depth."""
    field = x.field
    if P and P[0].field != field:
        raise SolveError("coefficient field does not match the series field")
    acc = zero_series(field)
    power = None
    for i, c in enumerate(P):
        if i == 0:
            pass
        elif power is None:
            power = x
        else:
            power = mul(power, x)
        if c.is_zero():
            continue
        piece = from_rational_function(field, c)
        if i > 0:
            piece = mul(piece, power)
        acc = series_add(acc, piece)
    return not truncate(acc, window, depth).terms
