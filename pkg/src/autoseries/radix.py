"""Base-p expansions with a radix point.

A valid expansion has exactly one point, does not start with the digit 0 and
does not end with it; zero is written as the bare point.  Values live in
S_p = { m / p^n : m, n >= 0 }, held exactly as Fraction.

Affine maps x -> r*x + s act on languages of expansions through transducers
that read the reversed string (least significant symbol first), so carries
propagate in reading order.  Between stages, languages are kept closed under
zero padding at both ends of the reversed string, which never changes the
value; preconditions select representatives padded enough for carries to
flush before the word ends.
"""

from __future__ import annotations

import functools
from collections import deque
from fractions import Fraction

from .automata import Alphabet, Dfa, Dfao, Nfa, Transducer, _EpsNfa, reverse, transduce
from .errors import ExpansionError, MachineError


# ---------------------------------------------------------------------------
# values and expansions


def p_power_valuation(n: int, p: int) -> int | None:
    """k with n = p^k, or None if n is not a power of p."""
    if n < 1:
        return None
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k if n == 1 else None


def in_sp(v: Fraction, p: int) -> bool:
    return v >= 0 and p_power_valuation(v.denominator, p) is not None


def value_of(s, p: int) -> Fraction:
    """Value of a valid expansion (string or symbol tuple)."""
    alphabet = Alphabet(p)
    word = alphabet.parse(s) if isinstance(s, str) else tuple(s)
    _check_valid_word(word, alphabet)
    k = word.index(alphabet.point)
    total = Fraction(0)
    for i, sym in enumerate(word):
        if i < k:
            total += sym * Fraction(p) ** (k - 1 - i)
        elif i > k:
            total += sym * Fraction(1, p ** (i - k))
    return total


def _check_valid_word(word, alphabet):
    if word.count(alphabet.point) != 1:
        raise ExpansionError("expansion must contain exactly one point")
    if word[0] == 0 or word[-1] == 0:
        raise ExpansionError("expansion must not start or end with the digit 0")
    if any(s > alphabet.point for s in word):
        raise ExpansionError("symbol outside the alphabet")


def expansion_of(v, p: int) -> str:
    """The unique valid expansion of a value in S_p."""
    v = Fraction(v)
    if v < 0:
        raise ExpansionError(f"{v} is negative, not in S_{p}")
    k = p_power_valuation(v.denominator, p)
    if k is None:
        raise ExpansionError(f"denominator of {v} is not a power of {p}")
    m = v.numerator
    whole, rem = divmod(m, p ** k)
    int_digits = []
    while whole:
        whole, d = divmod(whole, p)
        int_digits.append(str(d))
    int_digits.reverse()
    frac_digits = []
    for _ in range(k):
        rem, d = divmod(rem, p)
        frac_digits.append(str(d))
    frac_digits.reverse()
    while frac_digits and frac_digits[-1] == "0":
        frac_digits.pop()
    return "".join(int_digits) + "." + "".join(frac_digits)


def word_of(v, p: int) -> tuple[int, ...]:
    """expansion_of as a symbol tuple."""
    return Alphabet(p).parse(expansion_of(v, p))


# ---------------------------------------------------------------------------
# the language of valid expansions


@functools.lru_cache(maxsize=None)
def _valid_labeled(p: int):
    """Unminimized validity acceptor with a phase label per state.

    States: 0 start, 1 integer digits seen, 2 after point (accepting),
    3 after point with pending zero, 4 dead.  Phases mark whether a state is
    visited before or after the point on live runs.
    """
    a = Alphabet(p)
    digits = list(range(p))
    trans = []
    for q in range(5):
        row = [0] * a.size
        for d in digits:
            if q == 0:
                row[d] = 4 if d == 0 else 1
            elif q == 1:
                row[d] = 1
            elif q in (2, 3):
                row[d] = 3 if d == 0 else 2
            else:
                row[d] = 4
        row[a.point] = {0: 2, 1: 2, 2: 4, 3: 4, 4: 4}[q]
        trans.append(tuple(row))
    dfa = Dfa(a, trans, 0, [2])
    phases = ("pre", "pre", "post", "post", None)
    return dfa, phases


@functools.lru_cache(maxsize=None)
def valid_language(p: int) -> Dfa:
    """Acceptor of all valid base-p expansions.

    The language is closed under string reversal: the defining constraints
    (one point, first and last symbol nonzero) are symmetric.
    """
    return _valid_labeled(p)[0].minimize()


def singleton_language(p: int, word) -> Dfa:
    """Acceptor of exactly one word."""
    a = Alphabet(p)
    w = a.parse(word) if isinstance(word, str) else tuple(word)
    n = len(w)
    dead = n + 1
    trans = []
    for i in range(n + 1):
        trans.append(tuple((i + 1 if i < n and w[i] == s else dead)
                           for s in a.symbols()))
    trans.append((dead,) * a.size)
    return Dfa(a, trans, 0, [n])


# ---------------------------------------------------------------------------
# zero padding closure on reversed strings


def _relax(l: Dfa) -> Dfa:
    """0^* L 0^*: all zero paddings at both ends."""
    a = l.alphabet
    eps = _EpsNfa(a)
    base = [eps.add_state() for _ in range(l.n_states)]
    i0 = eps.add_state()
    f0 = eps.add_state()
    eps.add_edge(i0, 0, i0)
    eps.add_eps(i0, base[l.initial])
    eps.add_edge(f0, 0, f0)
    for q in range(l.n_states):
        for s in a.symbols():
            eps.add_edge(base[q], s, base[l.transitions[q][s]])
        if q in l.accepting:
            eps.add_eps(base[q], f0)
    eps.initials.add(i0)
    eps.finals.add(f0)
    return eps.to_dfa()


def _strip(l: Dfa) -> Dfa:
    """Words w with 0^a w 0^b in L for some a, b >= 0."""
    a = l.alphabet
    rows = [{s: {l.transitions[q][s]} for s in a.symbols()}
            for q in range(l.n_states)]
    initials = set()
    q = l.initial
    while q not in initials:
        initials.add(q)
        q = l.transitions[q][0]
    co = set(l.accepting)
    changed = True
    while changed:
        changed = False
        for q in range(l.n_states):
            if q not in co and l.transitions[q][0] in co:
                co.add(q)
                changed = True
    return Nfa(a, l.n_states, rows, initials, co).determinize().minimize()


def _canon(l: Dfa) -> Dfa:
    """Strip padding, drop malformed words, re-close under padding."""
    return _relax(_strip(l).intersection(valid_language(l.alphabet.p))).minimize()


# ---------------------------------------------------------------------------
# precondition languages


@functools.lru_cache(maxsize=None)
def _one_point(p: int) -> Dfa:
    a = Alphabet(p)
    trans = []
    for q in range(3):
        row = [q] * a.size
        row[a.point] = min(q + 1, 2)
        trans.append(tuple(row))
    return Dfa(a, trans, 0, [1])


@functools.lru_cache(maxsize=None)
def _ends_with_zeros(p: int, k: int) -> Dfa:
    a = Alphabet(p)
    trans = []
    for q in range(k + 1):
        row = []
        for s in a.symbols():
            row.append(min(q + 1, k) if s == 0 else 0)
        trans.append(tuple(row))
    return Dfa(a, trans, 0, [k])


@functools.lru_cache(maxsize=None)
def _min_digits_before_point(p: int, h: int) -> Dfa:
    # counting states 0..h, then h+1 = after point (good), h+2 = dead
    a = Alphabet(p)
    good, dead = h + 1, h + 2
    trans = []
    for q in range(h + 3):
        row = []
        for s in a.symbols():
            if q == good:
                row.append(good if s != a.point else dead)
            elif q == dead:
                row.append(dead)
            elif s == a.point:
                row.append(good if q == h else dead)
            else:
                row.append(min(q + 1, h))
        trans.append(tuple(row))
    return Dfa(a, trans, 0, [good])


# ---------------------------------------------------------------------------
# stage transducers on reversed strings


@functools.lru_cache(maxsize=None)
def _deepen_transducer(p: int, h: int) -> Transducer:
    """Multiply the value by p^h: the point moves h slots toward the start of
    the reversed string.  A length-h buffer delays digits; at the point the
    buffer is released after the point symbol."""
    if h < 1:
        raise MachineError("deepen stage needs h >= 1")
    a = Alphabet(p)
    states = {}
    order = []

    def sid(st):
        if st not in states:
            states[st] = len(order)
            order.append(st)
        return states[st]

    sid(())
    i = 0
    while i < len(order):
        st = order[i]
        i += 1
        if st == "post" or st == "dead":
            continue
        for d in range(p):
            sid(st + (d,) if len(st) < h else st[1:] + (d,))
        sid("post" if len(st) == h else "dead")
    sid("post")
    sid("dead")
    trans = []
    emits = []
    for st in order:
        row_t = []
        row_e = []
        for s in a.symbols():
            if st == "post":
                if s == a.point:
                    row_t.append(sid("dead"))
                    row_e.append(())
                else:
                    row_t.append(sid("post"))
                    row_e.append((s,))
            elif st == "dead":
                row_t.append(sid("dead"))
                row_e.append(())
            elif s == a.point:
                if len(st) == h:
                    row_t.append(sid("post"))
                    row_e.append((a.point,) + st)
                else:
                    row_t.append(sid("dead"))
                    row_e.append(())
            else:
                if len(st) < h:
                    row_t.append(sid(st + (s,)))
                    row_e.append(())
                else:
                    row_t.append(sid(st[1:] + (s,)))
                    row_e.append((st[0],))
        trans.append(row_t)
        emits.append(row_e)
    return Transducer(a, a, trans, emits, 0)


@functools.lru_cache(maxsize=None)
def _times_transducer(p: int, r: int) -> Transducer:
    """Multiply the value by the integer r >= 1; states are carries 0..r-1,
    which pass through the point unchanged."""
    a = Alphabet(p)
    trans = []
    emits = []
    for c in range(r):
        row_t = []
        row_e = []
        for s in a.symbols():
            if s == a.point:
                row_t.append(c)
                row_e.append((a.point,))
            else:
                total = r * s + c
                row_t.append(total // p)
                row_e.append((total % p,))
        trans.append(row_t)
        emits.append(row_e)
    return Transducer(a, a, trans, emits, 0)


@functools.lru_cache(maxsize=None)
def _plus_transducer(p: int, m: int) -> Transducer:
    """Add the integer m >= 1 to the value: identity before the point, then
    digit addition with the remaining addend as state."""
    a = Alphabet(p)
    states = {"pre": 0, "dead": 1}
    order = ["pre", "dead"]

    def sid(st):
        if st not in states:
            states[st] = len(order)
            order.append(st)
        return states[st]

    pending = deque([("add", m)])
    sid(("add", m))
    while pending:
        st = pending.popleft()
        for d in range(p):
            nxt = ("add", (d + st[1]) // p)
            if nxt not in states:
                sid(nxt)
                pending.append(nxt)
    trans = []
    emits = []
    for st in order:
        row_t = []
        row_e = []
        for s in a.symbols():
            if st == "pre":
                if s == a.point:
                    row_t.append(sid(("add", m)))
                    row_e.append((a.point,))
                else:
                    row_t.append(sid("pre"))
                    row_e.append((s,))
            elif st == "dead":
                row_t.append(sid("dead"))
                row_e.append(())
            else:
                n = st[1]
                if s == a.point:
                    row_t.append(sid("dead"))
                    row_e.append(())
                else:
                    total = s + n
                    row_t.append(sid(("add", total // p)))
                    row_e.append((total % p,))
        trans.append(row_t)
        emits.append(row_e)
    return Transducer(a, a, trans, emits, 0)


def _digits_needed(p: int, m: int) -> int:
    k = 1
    while p ** k <= m:
        k += 1
    return k


def _stage_forward(l: Dfa, t: Transducer, pre: Dfa) -> Dfa:
    return _canon(transduce(t, l.intersection(pre), "image"))


def _stage_backward(l: Dfa, t: Transducer, pre: Dfa) -> Dfa:
    return _canon(transduce(t, l, "preimage").intersection(pre))


# ---------------------------------------------------------------------------
# affine maps on expansion languages


def affine_map_rational(l: Dfa, mul: Fraction, shift: Fraction,
                        mode: str = "image") -> Dfa:
    """Language of expansions of { mul*x + shift : x in values(l) } (image),
    or of { x in S_p : mul*x + shift in values(l) } (preimage).

    mul must be a positive rational; shift may be any rational.  Words whose
    mapped value leaves S_p are dropped, which is exactly the stated set
    semantics.
    """
    mul = Fraction(mul)
    shift = Fraction(shift)
    if mul <= 0:
        raise MachineError("affine slope must be positive")
    if mode == "preimage":
        mul, shift = 1 / mul, -shift / mul
    elif mode != "image":
        raise MachineError(f"unknown affine mode {mode!r}")
    p = l.alphabet.p
    u, w = mul.numerator, mul.denominator
    h = p_power_valuation(_p_part(shift.denominator, p), p)
    w_prime = shift.denominator // p ** h
    n_prime = shift.numerator
    one_point = _one_point(p)

    x = _canon(reverse(l))
    if h:
        x = _stage_forward(
            x, _deepen_transducer(p, h),
            one_point.intersection(_min_digits_before_point(p, h)))
    if u * w_prime > 1:
        r = u * w_prime
        x = _stage_forward(
            x, _times_transducer(p, r),
            one_point.intersection(_ends_with_zeros(p, _digits_needed(p, r - 1))))
    if w > 1:
        x = _stage_backward(
            x, _times_transducer(p, w),
            one_point.intersection(_ends_with_zeros(p, _digits_needed(p, w - 1))))
    if n_prime > 0:
        x = _stage_forward(
            x, _plus_transducer(p, n_prime),
            one_point.intersection(_ends_with_zeros(p, _digits_needed(p, n_prime) + 1)))
    elif n_prime < 0:
        x = _stage_backward(
            x, _plus_transducer(p, -n_prime),
            one_point.intersection(_ends_with_zeros(p, _digits_needed(p, -n_prime) + 1)))
    if w_prime > 1:
        x = _stage_backward(
            x, _times_transducer(p, w_prime),
            one_point.intersection(_ends_with_zeros(p, _digits_needed(p, w_prime - 1))))
    if h:
        x = _stage_backward(
            x, _deepen_transducer(p, h),
            one_point.intersection(_min_digits_before_point(p, h)))
    return reverse(_strip(x).intersection(valid_language(p))).minimize()


def _p_part(n: int, p: int) -> int:
    out = 1
    while n % p == 0:
        n //= p
        out *= p
    return out


def affine_map(l: Dfa, r: int, s, mode: str = "image") -> Dfa:
    """x -> r*x + s on expansion languages, r a nonnegative integer and s a
    value in S_p."""
    if not isinstance(r, int) or r < 0:
        raise MachineError("slope must be a nonnegative integer")
    s = Fraction(s)
    p = l.alphabet.p
    if not in_sp(s, p):
        raise ExpansionError(f"shift {s} is not in S_{p}")
    if r == 0:
        restricted = l.intersection(valid_language(p))
        target = singleton_language(p, word_of(s, p))
        if mode == "image":
            return (Dfa(l.alphabet, [(0,) * l.alphabet.size], 0, [])
                    if restricted.is_empty() else target.minimize())
        if mode == "preimage":
            if restricted.intersection(target).is_empty():
                return Dfa(l.alphabet, [(0,) * l.alphabet.size], 0, [])
            return valid_language(p)
        raise MachineError(f"unknown affine mode {mode!r}")
    return affine_map_rational(l, Fraction(r), s, mode)


def geq_const_language(p: int, c) -> Dfa:
    """Valid expansions whose value is at least c.

    c may be negative or zero (then every valid expansion qualifies) but its
    denominator must be a power of p, so that the comparison reduces to
    membership of v - c in S_p.
    """
    c = Fraction(c)
    if c <= 0:
        return valid_language(p)
    if p_power_valuation(c.denominator, p) is None:
        raise ExpansionError(
            f"comparison constant {c} needs a power-of-{p} denominator")
    return affine_map_rational(valid_language(p), Fraction(1), -c, "preimage")


# ---------------------------------------------------------------------------
# preradix / postradix classification


def classify_states(m) -> dict:
    """Partition of states by their position relative to the point on live runs.

    A state is preradix (postradix) if some valid word carrying the machine's
    acceptance witnesses it before (after) the point; for a Dfao the witnesses
    are valid words with nonzero output.  States with no witness are neither.
    For machines whose language lies inside the valid expansions the two sets
    are disjoint.
    """
    if isinstance(m, Dfao):
        acc = m.level_dfa(_output_nonzero)
    else:
        acc = m
    p = m.alphabet.p
    labeled, phases = _valid_labeled(p)
    index = {}
    edges = []
    pairs = []
    queue = deque()

    def pid(pair):
        if pair not in index:
            index[pair] = len(pairs)
            pairs.append(pair)
            edges.append([])
            queue.append(pair)
        return index[pair]

    pid((acc.initial, labeled.initial))
    while queue:
        qa, qv = pair = queue.popleft()
        i = index[pair]
        for s in m.alphabet.symbols():
            edges[i].append(pid((acc.transitions[qa][s], labeled.transitions[qv][s])))
    goal = {i for i, (qa, qv) in enumerate(pairs)
            if qa in acc.accepting and qv in labeled.accepting}
    rev: list[set] = [set() for _ in pairs]
    for i, row in enumerate(edges):
        for j in row:
            rev[j].add(i)
    live = set(goal)
    bfs = deque(goal)
    while bfs:
        j = bfs.popleft()
        for i in rev[j]:
            if i not in live:
                live.add(i)
                bfs.append(i)
    pre = {pairs[i][0] for i in live if phases[pairs[i][1]] == "pre"}
    post = {pairs[i][0] for i in live if phases[pairs[i][1]] == "post"}
    neither = set(range(m.n_states)) - pre - post
    return {"preradix": frozenset(pre), "postradix": frozenset(post),
            "neither": frozenset(neither)}


def _output_nonzero(o) -> bool:
    if o is None or o == 0:
        return False
    if hasattr(o, "is_zero"):
        return not o.is_zero()
    return True


# ---------------------------------------------------------------------------
# least value of a language


def min_accepted_value(l: Dfa):
    """(value, word) of the least-valued accepted valid expansion.

    Greedy: the shortest integer part wins, then the lexicographically least
    digits, then the least fraction continuation, stopping at the first
    acceptance since any valid extension strictly increases the value.  If the
    fraction phase revisits a state without accepting, the language has no
    least value (its value set is not well ordered) and this raises.
    """
    p = l.alphabet.p
    a = l.alphabet
    m = l.intersection(valid_language(p)).minimize()
    if m.initial not in m.relevant_states():
        raise MachineError("empty language has no least value")
    digits = list(range(p))
    # states from which acceptance is reachable by digits alone
    frel = set(m.accepting)
    changed = True
    while changed:
        changed = False
        for q in range(m.n_states):
            if q not in frel and any(m.transitions[q][d] in frel for d in digits):
                frel.add(q)
                changed = True
    point_ok = {q for q in range(m.n_states) if m.transitions[q][a.point] in frel}
    # layered targets: T[j] = states that reach point_ok in exactly j digit steps
    targets = [set(point_ok)]
    length = None
    for j in range(m.n_states + 1):
        if m.initial in targets[j]:
            length = j
            break
        targets.append({q for q in range(m.n_states)
                        if any(m.transitions[q][d] in targets[j] for d in digits)})
    if length is None:
        raise MachineError("no valid word accepted")
    word = []
    cur = m.initial
    for j in range(length, 0, -1):
        d = next(d for d in digits if m.transitions[cur][d] in targets[j - 1])
        word.append(d)
        cur = m.transitions[cur][d]
    word.append(a.point)
    cur = m.transitions[cur][a.point]
    seen = set()
    while cur not in m.accepting:
        if cur in seen:
            raise MachineError("value set has no least element")
        seen.add(cur)
        d = next(d for d in digits if m.transitions[cur][d] in frel)
        word.append(d)
        cur = m.transitions[cur][d]
    word_t = tuple(word)
    return value_of(word_t, p), word_t
