"""Hahn series over F_q whose coefficient function is computed by a finite
automaton with output.

A series is stored as (field, a, b, machine): the coefficient of t^i is the
machine's output on the base-p expansion of a*i + b when that index lies in
S_p (nonnegative, denominator a power of p), and zero otherwise.  All ring
operations work on the level languages of the machine through the affine
expansion calculus, so results are exact automata again.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .automata import Alphabet, Dfa, Dfao, Nfa, dfao_from_levels, nfa_count_mod, reverse
from .errors import MachineError
from .gfq import Fq, FqElem, PolyFq, RatFun
from .radix import (
    _relax,
    _valid_labeled,
    affine_map_rational,
    in_sp,
    singleton_language,
    valid_language,
    word_of,
)
from .valued import TruncSeries, exp_depth

__all__ = [
    "AutoSeries",
    "WellOrderVerdict",
    "all_ones",
    "chevalley_series",
    "coefficient",
    "decimate",
    "equals",
    "from_rational_function",
    "from_terms",
    "frobenius_series",
    "hadamard",
    "is_well_ordered",
    "mul",
    "normalize",
    "pth_root_series",
    "scale",
    "series_add",
    "series_shift",
    "standard_catalog",
    "support_language",
    "truncate",
    "unify",
    "zero_series",
]


@dataclass(frozen=True, eq=False)
class AutoSeries:
    """Automatic Hahn series: coefficient(i) = machine(expansion(a*i + b))."""

    field: Fq
    a: int
    b: int
    machine: Dfao

    def __post_init__(self):
        if self.a < 1:
            raise MachineError("offset slope must be a positive integer")
        if self.machine.alphabet.p != self.field.p:
            raise MachineError("machine alphabet does not match the field")
        for o in self.machine.outputs:
            if not isinstance(o, FqElem) or o.field != self.field:
                raise MachineError("machine outputs must lie in the field")

    def coefficient(self, i) -> FqElem:
        i = Fraction(i)
        v = self.a * i + self.b
        if not in_sp(v, self.field.p):
            return self.field.zero()
        return self.machine.run(word_of(v, self.field.p))

    def __add__(self, other):
        return series_add(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __repr__(self):
        return (f"AutoSeries(F_{self.field.p}^{self.field.e}, a={self.a}, "
                f"b={self.b}, {self.machine.n_states} states)")


def coefficient(x: AutoSeries, i) -> FqElem:
    return x.coefficient(i)


def zero_series(field: Fq) -> AutoSeries:
    a = Alphabet(field.p)
    machine = Dfao(a, (tuple(0 for _ in a.symbols()),), 0, (field.zero(),))
    return AutoSeries(field, 1, 0, machine)


def _levels(x: AutoSeries) -> dict:
    """Nonzero output value -> Dfa of valid index words carrying it."""
    valid = valid_language(x.field.p)
    out = {}
    for alpha in set(x.machine.outputs):
        if alpha.is_zero():
            continue
        l = x.machine.level_dfa(lambda o, A=alpha: o == A).intersection(valid)
        l = l.minimize()
        if not l.is_empty():
            out[alpha] = l
    return out


def support_language(x: AutoSeries) -> Dfa:
    """Valid index words whose coefficient is nonzero."""
    valid = valid_language(x.field.p)
    l = x.machine.level_dfa(lambda o: not o.is_zero()).intersection(valid)
    return l.minimize()


def _recombine(field: Fq, levels: dict) -> Dfao:
    return dfao_from_levels(levels, Alphabet(field.p), field.zero())


def normalize(x: AutoSeries, a2: int, b2: int) -> AutoSeries:
    """The same series re-indexed to offsets (a2, b2); a2 must be a multiple
    of a and every old index must stay representable."""
    if a2 % x.a != 0:
        raise MachineError("target slope must be a multiple of the current one")
    k = a2 // x.a
    m = b2 - k * x.b
    if m < 0:
        raise MachineError("target offsets drop part of the index range")
    if k == 1 and m == 0:
        return x
    levels = {alpha: affine_map_rational(l, Fraction(k), Fraction(m), "image")
              for alpha, l in _levels(x).items()}
    return AutoSeries(x.field, a2, b2, _recombine(x.field, levels))


def unify(x: AutoSeries, y: AutoSeries) -> tuple[AutoSeries, AutoSeries]:
    if x.field != y.field:
        raise MachineError("series live over different fields")
    a = math.lcm(x.a, y.a)
    b = max((a // x.a) * x.b, (a // y.a) * y.b)
    return normalize(x, a, b), normalize(y, a, b)


def series_add(x: AutoSeries, y: AutoSeries) -> AutoSeries:
    x2, y2 = unify(x, y)
    m = x2.machine.product(y2.machine, lambda u, v: u + v).minimize()
    return AutoSeries(x2.field, x2.a, x2.b, m)


def hadamard(x: AutoSeries, y: AutoSeries) -> AutoSeries:
    """Coefficientwise product."""
    x2, y2 = unify(x, y)
    m = x2.machine.product(y2.machine, lambda u, v: u * v).minimize()
    return AutoSeries(x2.field, x2.a, x2.b, m)


def scale(x: AutoSeries, c: FqElem) -> AutoSeries:
    return AutoSeries(x.field, x.a, x.b,
                      x.machine.map_outputs(lambda o: o * c).minimize())


def frobenius_series(x: AutoSeries) -> AutoSeries:
    """x^p: exponents scale by p, coefficients by Frobenius."""
    p = x.field.p
    if x.a % p == 0:
        return AutoSeries(x.field, x.a // p, x.b,
                          x.machine.map_outputs(lambda o: o.frobenius()))
    levels = {alpha.frobenius(): affine_map_rational(l, Fraction(p), Fraction(0))
              for alpha, l in _levels(x).items()}
    return AutoSeries(x.field, x.a, p * x.b, _recombine(x.field, levels))


def pth_root_series(x: AutoSeries) -> AutoSeries:
    """x^(1/p), exact: the machine is reused with roots of the outputs."""
    p = x.field.p
    return AutoSeries(x.field, p * x.a, x.b,
                      x.machine.map_outputs(lambda o: o.frobenius_inv()))


def decimate(x: AutoSeries, a0, b0) -> AutoSeries:
    """The series with coefficient(i) = x.coefficient(a0*i + b0).

    A pure offset reinterpretation after coarsening the representation far
    enough that the new offsets are integral; the state graph is untouched."""
    a0, b0 = Fraction(a0), Fraction(b0)
    if a0 <= 0:
        raise MachineError("decimation step must be positive")
    k = math.lcm((x.a * a0).denominator, (x.a * b0).denominator)
    new_a = x.a * k * a0
    big_b = max(k * x.b, -int(x.a * k * b0))
    x2 = normalize(x, x.a * k, big_b)
    return AutoSeries(x.field, int(new_a), int(x2.a * b0) + x2.b, x2.machine)


def series_shift(x: AutoSeries, s) -> AutoSeries:
    """Multiply by t^s: coefficient(i) = x.coefficient(i - s)."""
    return decimate(x, 1, -Fraction(s))


def equals(x: AutoSeries, y: AutoSeries) -> bool:
    x2, y2 = unify(x, y)
    diff = x2.machine.product(y2.machine, lambda u, v: u - v)
    bad = diff.level_dfa(lambda o: not o.is_zero())
    return bad.intersection(valid_language(x2.field.p)).is_empty()


# ---------------------------------------------------------------------------
# multiplication: counting aligned index splittings


def _pair_sum_nfa(lx: Dfa, ly: Dfa) -> Nfa:
    """Reads the reversed target expansion; paths choose digits of two
    addends (tracked by lx, ly on their reversed relaxed expansions) whose
    values sum to the target.  One accepting path per value pair.

    States carry the x-digit just consumed (p for the point or the start).
    Without the tag, two digit choices can land in the same state pair when
    the level acceptors merge residuals, and the path count would drop
    parallel edges; with it, choice sequences and paths correspond 1-1."""
    a = lx.alphabet
    p = a.p
    ny = ly.n_states
    tags = p + 1
    n = lx.n_states * ny * 2 * tags

    def sid(qx, qy, c, tag):
        return ((qx * ny + qy) * 2 + c) * tags + tag

    rows = [dict() for _ in range(n)]
    for qx in range(lx.n_states):
        for qy in range(ly.n_states):
            for c in (0, 1):
                for tag in range(tags):
                    row = rows[sid(qx, qy, c, tag)]
                    tx = lx.transitions[qx][a.point]
                    ty = ly.transitions[qy][a.point]
                    row.setdefault(a.point, set()).add(sid(tx, ty, c, p))
                    for dx in range(p):
                        for dy in range(p):
                            tot = dx + dy + c
                            d, c2 = tot % p, tot // p
                            row.setdefault(d, set()).add(
                                sid(lx.transitions[qx][dx],
                                    ly.transitions[qy][dy], c2, dx))
    initials = {sid(lx.initial, ly.initial, 0, p)}
    accepting = {sid(qx, qy, 0, tag)
                 for qx in lx.accepting for qy in ly.accepting
                 for tag in range(tags)}
    return Nfa(a, n, rows, initials, accepting)


def mul(x: AutoSeries, y: AutoSeries) -> AutoSeries:
    """Cauchy product.  Requires both supports to be well ordered in the
    sense that each target index has finitely many splittings; counting is
    done mod p so only that finiteness matters."""
    x2, y2 = unify(x, y)
    field = x2.field
    p = field.p
    alphabet = Alphabet(p)
    lx = _levels(x2)
    ly = _levels(y2)
    total = zero_series(field).machine
    for alpha, la in lx.items():
        ra = _relax(reverse(la)).minimize()
        for beta, lb in ly.items():
            rb = _relax(reverse(lb)).minimize()
            nfa = _pair_sum_nfa(ra, rb)
            counts = nfa_count_mod(nfa, p)
            # deeper fraction tails of the addends appear as low-order zeros
            # of the target; absorbing pump-length many keeps every pair
            m = nfa.n_states + 1
            init2 = counts.walk(counts.initial, [0] * m)
            counts = Dfao(alphabet, counts.transitions, init2,
                          counts.outputs).minimize()
            weight = alpha * beta
            levels = {}
            for r in range(1, p):
                lev = counts.level_dfa(lambda o, R=r: o == R)
                lev = reverse(lev).intersection(valid_language(p)).minimize()
                if not lev.is_empty():
                    levels[field.from_int(r) * weight] = lev
            if not levels:
                continue
            contrib = _merge_levels_additive(field, levels)
            total = total.product(contrib, lambda u, v: u + v).minimize()
    return AutoSeries(field, x2.a, 2 * x2.b, total)


def _merge_levels_additive(field: Fq, levels: dict) -> Dfao:
    """Like dfao_from_levels but level keys may collide after weighting:
    colliding keys are summed, which dfao_from_levels cannot express."""
    merged: dict[FqElem, Dfa] = {}
    for val, l in levels.items():
        if val in merged:
            merged[val] = merged[val].union(l).minimize()
        else:
            merged[val] = l
    return dfao_from_levels(merged, Alphabet(field.p), field.zero())


# ---------------------------------------------------------------------------
# well-ordered support


@dataclass(frozen=True)
class WellOrderVerdict:
    """ok=True: the value set is well ordered.  Otherwise witness is
    (w0, s, w, s2, w1): the words w0 (s w)^n s2 w1 are all accepted and have
    strictly decreasing values."""

    ok: bool
    witness: tuple | None = None

    def family(self, n: int) -> str:
        if self.ok:
            raise MachineError("no witness for a well-ordered language")
        w0, s, w, s2, w1 = self.witness
        return w0 + (s + w) * n + s2 + w1


def is_well_ordered(obj) -> WellOrderVerdict:
    """Decide whether the set of values of a language (or of the support of a
    series) is well ordered; refutations come with a pumpable witness."""
    if isinstance(obj, AutoSeries):
        l = support_language(obj)
    elif isinstance(obj, Dfa):
        l = obj.intersection(valid_language(obj.alphabet.p)).minimize()
    else:
        raise MachineError("expected a series or an acceptor")
    a = l.alphabet
    point = a.point
    digits = range(a.p)

    # states reachable along a prefix containing the point, with shortest
    # witnessing prefixes
    seen = {(l.initial, False): ()}
    queue = deque([(l.initial, False)])
    while queue:
        q, flag = queue.popleft()
        w = seen[(q, flag)]
        for s in a.symbols():
            key = (l.transitions[q][s], flag or s == point)
            if key not in seen:
                seen[key] = w + (s,)
                queue.append(key)
    after = {q: w for (q, flag), w in seen.items() if flag}

    # states completing to acceptance through digits only
    rev = [[] for _ in range(l.n_states)]
    for q in range(l.n_states):
        for d in digits:
            rev[l.transitions[q][d]].append(q)
    relevant = set(l.accepting)
    queue = deque(relevant)
    while queue:
        q = queue.popleft()
        for prev in rev[q]:
            if prev not in relevant:
                relevant.add(prev)
                queue.append(prev)

    cand = sorted(set(after) & relevant)
    comp = _digit_sccs(l, cand)
    for u in cand:
        for s in digits:
            v = l.transitions[u][s]
            # a digit cycle through u: v in the same component (or a self
            # loop); singleton components without self loops never match
            if comp.get(u) is None or comp.get(v) != comp.get(u):
                continue
            for s2 in digits:
                if s2 <= s:
                    continue
                if l.transitions[u][s2] in relevant:
                    w0 = a.format(after[u])
                    w = a.format(_digit_path(l, l.transitions[u][s], {u}))
                    w1 = a.format(_digit_path(l, l.transitions[u][s2],
                                              l.accepting))
                    return WellOrderVerdict(False, (w0, a.symbol_name(s), w,
                                                    a.symbol_name(s2), w1))
    return WellOrderVerdict(True)


def _digit_sccs(l: Dfa, cand) -> dict:
    """Strongly connected components of the digit graph on cand (iterative
    Tarjan); returns state -> component id."""
    cset = set(cand)
    adj = {u: [l.transitions[u][d] for d in range(l.alphabet.p)
               if l.transitions[u][d] in cset] for u in cand}
    index = {}
    low = {}
    on_stack = set()
    stack = []
    comp = {}
    counter = [0]
    next_comp = [0]

    for root in cand:
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            u, pi = work[-1]
            if pi == 0:
                index[u] = low[u] = counter[0]
                counter[0] += 1
                stack.append(u)
                on_stack.add(u)
            advanced = False
            for j in range(pi, len(adj[u])):
                v = adj[u][j]
                if v not in index:
                    work[-1] = (u, j + 1)
                    work.append((v, 0))
                    advanced = True
                    break
                if v in on_stack:
                    low[u] = min(low[u], index[v])
            if advanced:
                continue
            if low[u] == index[u]:
                while True:
                    v = stack.pop()
                    on_stack.discard(v)
                    comp[v] = next_comp[0]
                    if v == u:
                        break
                next_comp[0] += 1
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[u])
    return comp


def _digit_path(l: Dfa, start: int, targets) -> tuple:
    """Shortest digit word from start into targets (may be empty)."""
    targets = set(targets)
    if start in targets:
        return ()
    seen = {start: ()}
    queue = deque([start])
    while queue:
        q = queue.popleft()
        for d in range(l.alphabet.p):
            t = l.transitions[q][d]
            if t not in seen:
                seen[t] = seen[q] + (d,)
                if t in targets:
                    return seen[t]
                queue.append(t)
    raise MachineError("no completing digit path")


# ---------------------------------------------------------------------------
# truncation


def truncate(x: AutoSeries, window, depth: int) -> TruncSeries:
    """Exact coefficients with exponent below the window and exponent depth
    at most the cap, as a truncated series."""
    field = x.field
    p = field.p
    window = Fraction(window)
    ap = 0
    a0 = x.a
    while a0 % p == 0:
        a0 //= p
        ap += 1
    frac_cap = depth + ap
    bound = x.a * window + x.b
    vdfa, _phases = _valid_labeled(p)
    live = _live_product_states(x.machine, vdfa)
    terms = []
    stack = [(x.machine.initial, vdfa.initial, Fraction(0), 0, False)]
    point = x.machine.alphabet.point
    while stack:
        mq, vq, val, fdepth, seen_point = stack.pop()
        if (mq, vq) not in live:
            continue
        if vq in vdfa.accepting:
            out = x.machine.outputs[mq]
            if not out.is_zero():
                i = Fraction(val - x.b, x.a)
                if i < window and exp_depth(i, p) <= depth:
                    terms.append((i, out))
        if not seen_point:
            if val < bound:
                stack.append((x.machine.step(mq, point),
                              vdfa.transitions[vq][point], val, 0, True))
            for d in range(p):
                nval = val * p + d
                if nval >= bound:
                    continue
                stack.append((x.machine.step(mq, d),
                              vdfa.transitions[vq][d], nval, 0, False))
        elif fdepth < frac_cap:
            for d in range(p):
                nval = val + Fraction(d, p ** (fdepth + 1))
                stack.append((x.machine.step(mq, d),
                              vdfa.transitions[vq][d], nval, fdepth + 1, True))
    return TruncSeries.make(field, terms, window, depth)


def _live_product_states(machine: Dfao, vdfa: Dfa) -> set:
    """(machine, validity) pairs from which a valid nonzero-output end is
    reachable."""
    edges_rev = {}
    states = set()
    queue = deque()
    start = (machine.initial, vdfa.initial)
    states.add(start)
    queue.append(start)
    while queue:
        mq, vq = queue.popleft()
        for s in machine.alphabet.symbols():
            nxt = (machine.step(mq, s), vdfa.transitions[vq][s])
            edges_rev.setdefault(nxt, set()).add((mq, vq))
            if nxt not in states:
                states.add(nxt)
                queue.append(nxt)
    good = {(mq, vq) for (mq, vq) in states
            if vq in vdfa.accepting and not machine.outputs[mq].is_zero()}
    live = set(good)
    queue = deque(good)
    while queue:
        cur = queue.popleft()
        for prev in edges_rev.get(cur, ()):
            if prev not in live:
                live.add(prev)
                queue.append(prev)
    return live


# ---------------------------------------------------------------------------
# constructors


def from_terms(field: Fq, pairs) -> AutoSeries:
    """Exact finite-support series."""
    items = [(Fraction(e), c) for e, c in pairs if not c.is_zero()]
    if not items:
        return zero_series(field)
    p = field.p
    a = 1
    for e, _ in items:
        den = e.denominator
        while den % p == 0:
            den //= p
        a = math.lcm(a, den)
    low = min(a * e for e, _ in items)
    b = max(0, -math.floor(low))
    by_coeff: dict[FqElem, Dfa] = {}
    for e, c in items:
        w = word_of(a * e + b, p)
        l = singleton_language(p, w)
        if c in by_coeff:
            by_coeff[c] = by_coeff[c].union(l).minimize()
        else:
            by_coeff[c] = l
    return AutoSeries(field, a, b, _recombine(field, by_coeff))


def all_ones(field: Fq) -> AutoSeries:
    """Sum of t^i over all integers i >= 0, i.e. 1/(1-t)."""
    a = Alphabet(field.p)
    digit_row = lambda q: [q] * a.p
    trans = [tuple(digit_row(0) + [1]),      # reading integer digits
             tuple(digit_row(2) + [2]),      # just crossed the point
             tuple(digit_row(2) + [2])]      # fractional part: not integral
    outs = (field.zero(), field.one(), field.zero())
    return AutoSeries(field, 1, 0, Dfao(a, tuple(trans), 0, outs).minimize())


def chevalley_series(field: Fq) -> AutoSeries:
    """The root sum of t^(-1/p^k) for k >= 1 of z^p - z = t^(-1); index words
    are '.' followed by a run of digit p-1 under offsets (1, 1)."""
    p = field.p
    a = Alphabet(p)
    top = p - 1
    # states: 0 start, 1 after point, 2 in a top-digit run, 3 dead
    def row(q):
        out = []
        for s in a.symbols():
            if q == 0:
                out.append(1 if s == a.point else 3)
            elif q in (1, 2):
                out.append(2 if s == top else 3)
            else:
                out.append(3)
        return tuple(out)
    trans = tuple(row(q) for q in range(4))
    outs = (field.zero(), field.zero(), field.one(), field.zero())
    return AutoSeries(field, 1, 1, Dfao(a, trans, 0, outs).minimize())


def from_rational_function(field: Fq, r: RatFun) -> AutoSeries:
    """Laurent expansion of a rational function at t = 0."""
    if r.is_zero():
        return zero_series(field)
    num, den = r.num, r.den

    def drop_low(poly):
        # divide by t; the constant term must already be zero
        return PolyFq.make(field, list(poly.coeffs[1:]))

    k = 0
    while den.coeffs[0].is_zero():
        den = drop_low(den)
        k += 1
    c0_inv = den.coeffs[0].inv()
    # long division; remainder states repeat, giving preperiod and period
    seen = {}
    outs = []
    state = num
    while True:
        key = tuple(state.coeffs)
        if key in seen:
            start = seen[key]
            break
        seen[key] = len(outs)
        c = state.coeffs[0] * c0_inv if state.coeffs else field.zero()
        outs.append(c)
        state = drop_low(state - den.scale(c))
    preperiod, period = start, len(outs) - start
    return AutoSeries(field, 1, k,
                      _eventually_periodic_dfao(field, outs, preperiod, period))


def _eventually_periodic_dfao(field: Fq, outs, n0: int, l: int) -> Dfao:
    """DFAO sending the expansion of an integer j to the j-th entry of the
    eventually periodic sequence (preperiod n0, period l); non-integer
    indices give zero.

    Pre-point states track (min(value, n0), value mod l), which is enough to
    look up the entry at the point."""
    p = field.p
    a = Alphabet(p)
    index = {}
    trans = []
    out_list = []
    queue = deque()

    def state_id(key):
        if key not in index:
            index[key] = len(index)
            trans.append(None)
            out_list.append(None)
            queue.append(key)
        return index[key]

    zero_sink = state_id(("sink",))
    start = state_id(("pre", 0, 0))
    while queue:
        key = queue.popleft()
        i = index[key]
        if key[0] == "sink":
            trans[i] = tuple(zero_sink for _ in a.symbols())
            out_list[i] = field.zero()
            continue
        if key[0] == "post":
            trans[i] = tuple(zero_sink for _ in a.symbols())
            out_list[i] = key[1]
            continue
        _, m, r = key
        row = [state_id(("pre", min(m * p + d, n0), (r * p + d) % l))
               for d in range(p)]
        hit = outs[m] if m < n0 else outs[n0 + (r - n0) % l]
        row.append(state_id(("post", hit)))
        trans[i] = tuple(row)
        out_list[i] = field.zero()
    return Dfao(a, tuple(trans), start, tuple(out_list)).minimize()


def standard_catalog(field: Fq) -> list:
    """Named reference series used by the oracle test batteries."""
    one = field.one()
    half = Fraction(1, 2) if field.p == 2 else Fraction(1, field.p)
    items = [
        ("zero", zero_series(field)),
        ("one", from_terms(field, [(Fraction(0), one)])),
        ("t", from_terms(field, [(Fraction(1), one)])),
        ("inv_t", from_terms(field, [(Fraction(-1), one)])),
        ("binomial", from_terms(field, [(Fraction(0), one), (Fraction(1), one)])),
        ("deep_pair", from_terms(field, [(half, one), (Fraction(3), one)])),
        ("neg_deep", from_terms(field, [(-half, one), (Fraction(2), one)])),
        ("all_ones", all_ones(field)),
        ("all_ones_shift", series_shift(all_ones(field), Fraction(2))),
        ("all_ones_even", decimate(all_ones(field), 2, 0)),
        ("all_ones_frob", frobenius_series(all_ones(field))),
        ("chevalley", chevalley_series(field)),
        ("chevalley_plus_one",
         series_add(chevalley_series(field),
                    from_terms(field, [(Fraction(0), one)]))),
        ("chevalley_root", pth_root_series(chevalley_series(field))),
    ]
    if field.e > 1:
        g = field.gen()
        items.append(("gen_scaled", scale(all_ones(field), g)))
    return items
