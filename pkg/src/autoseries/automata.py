"""Finite automata over small alphabets: DFAs, DFAs with output, NFAs, transducers.

States are integers 0..n-1 and every machine is complete (a transition is
defined for every state and symbol).  Minimization renumbers states by breadth
first search in symbol order, so equal languages and output functions yield
structurally identical machines.
"""

from __future__ import annotations

from dataclasses import dataclass
from collections import deque

from .errors import MachineError


class Alphabet:
    """Digits 0..p-1 plus a radix point symbol, encoded as the integer p."""

    def __init__(self, p: int):
        if p < 2:
            raise MachineError(f"alphabet base must be at least 2, got {p}")
        self.p = p
        self.point = p
        self.size = p + 1

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self.p == other.p

    def __hash__(self):
        return hash(("alphabet", self.p))

    def __repr__(self):
        return f"Alphabet(p={self.p})"

    def symbols(self):
        return range(self.size)

    def symbol_name(self, s: int) -> str:
        return "." if s == self.point else str(s)

    def parse(self, text: str) -> tuple[int, ...]:
        out = []
        for ch in text:
            if ch == ".":
                out.append(self.point)
            elif ch.isdigit() and int(ch) < self.p:
                out.append(int(ch))
            else:
                raise MachineError(f"symbol {ch!r} not in base-{self.p} alphabet")
        return tuple(out)

    def format(self, word) -> str:
        return "".join(self.symbol_name(s) for s in word)


def _as_word(alphabet: Alphabet, w):
    return alphabet.parse(w) if isinstance(w, str) else tuple(w)


def _check_same_alphabet(a, b):
    if a.alphabet != b.alphabet:
        raise MachineError("machines have different alphabets")


# ---------------------------------------------------------------------------


class _Machine:
    """Shared deterministic core: complete transition table plus initial state."""

    def __init__(self, alphabet: Alphabet, transitions, initial: int):
        self.alphabet = alphabet
        self.transitions = tuple(tuple(row) for row in transitions)
        self.initial = initial
        n = len(self.transitions)
        for row in self.transitions:
            if len(row) != alphabet.size or any(not 0 <= t < n for t in row):
                raise MachineError("malformed transition table")
        if not 0 <= initial < n:
            raise MachineError("initial state out of range")

    @property
    def n_states(self) -> int:
        return len(self.transitions)

    def step(self, state: int, symbol: int) -> int:
        return self.transitions[state][symbol]

    def walk(self, state: int, word) -> int:
        for s in _as_word(self.alphabet, word):
            state = self.transitions[state][s]
        return state

    def _reachable(self):
        seen = [False] * self.n_states
        seen[self.initial] = True
        order = [self.initial]
        queue = deque([self.initial])
        while queue:
            q = queue.popleft()
            for s in self.alphabet.symbols():
                t = self.transitions[q][s]
                if not seen[t]:
                    seen[t] = True
                    order.append(t)
                    queue.append(t)
        return order

    def _minimized_parts(self, labels):
        """Trim, merge label-equivalent states, renumber by BFS; returns
        (transitions, initial, label list)."""
        order = self._reachable()
        index = {q: i for i, q in enumerate(order)}
        trans = [[index[self.transitions[q][s]] for s in self.alphabet.symbols()]
                 for q in order]
        labs = [labels[q] for q in order]
        n = len(order)
        # Moore refinement
        distinct = {}
        cls = [distinct.setdefault(l, len(distinct)) for l in labs]
        while True:
            sigs = {}
            new = [0] * n
            for q in range(n):
                sig = (cls[q], tuple(cls[t] for t in trans[q]))
                new[q] = sigs.setdefault(sig, len(sigs))
            if new == cls:
                break
            cls = new
        # canonical numbering by BFS over classes
        rep = {}
        for q in range(n):
            rep.setdefault(cls[q], q)
        number = {cls[0]: 0}
        order2 = [cls[0]]
        queue = deque([cls[0]])
        while queue:
            c = queue.popleft()
            q = rep[c]
            for s in self.alphabet.symbols():
                tc = cls[trans[q][s]]
                if tc not in number:
                    number[tc] = len(number)
                    order2.append(tc)
                    queue.append(tc)
        out_trans = []
        out_labs = []
        for c in order2:
            q = rep[c]
            out_trans.append(tuple(number[cls[t]] for t in trans[q]))
            out_labs.append(labs[q])
        return tuple(out_trans), 0, out_labs


class Dfa(_Machine):
    """Deterministic acceptor."""

    def __init__(self, alphabet, transitions, initial, accepting):
        super().__init__(alphabet, transitions, initial)
        self.accepting = frozenset(accepting)

    def accepts(self, word) -> bool:
        return self.walk(self.initial, word) in self.accepting

    def minimize(self) -> "Dfa":
        labels = [q in self.accepting for q in range(self.n_states)]
        trans, init, labs = self._minimized_parts(labels)
        return Dfa(self.alphabet, trans, init,
                   [i for i, l in enumerate(labs) if l])

    def complement(self) -> "Dfa":
        return Dfa(self.alphabet, self.transitions, self.initial,
                   set(range(self.n_states)) - self.accepting)

    def _product(self, other, keep) -> "Dfa":
        _check_same_alphabet(self, other)
        syms = list(self.alphabet.symbols())
        index = {}
        trans = []
        accepting = []
        queue = deque()

        def state_id(pair):
            if pair not in index:
                index[pair] = len(index)
                trans.append(None)
                queue.append(pair)
            return index[pair]

        start = state_id((self.initial, other.initial))
        while queue:
            qa, qb = pair = queue.popleft()
            i = index[pair]
            trans[i] = tuple(
                state_id((self.transitions[qa][s], other.transitions[qb][s]))
                for s in syms)
            if keep(qa in self.accepting, qb in other.accepting):
                accepting.append(i)
        return Dfa(self.alphabet, trans, start, accepting)

    def intersection(self, other) -> "Dfa":
        return self._product(other, lambda x, y: x and y)

    def union(self, other) -> "Dfa":
        return self._product(other, lambda x, y: x or y)

    def difference(self, other) -> "Dfa":
        return self._product(other, lambda x, y: x and not y)

    def is_empty(self) -> bool:
        return not any(q in self.accepting for q in self._reachable())

    def contains(self, other) -> bool:
        """Language containment: other subset of self."""
        return other.difference(self).is_empty()

    def some_word(self):
        """A shortest accepted word, or None if the language is empty."""
        if self.initial in self.accepting:
            return ()
        back = {self.initial: None}
        queue = deque([self.initial])
        while queue:
            q = queue.popleft()
            for s in self.alphabet.symbols():
                t = self.transitions[q][s]
                if t not in back:
                    back[t] = (q, s)
                    if t in self.accepting:
                        word = []
                        while back[t] is not None:
                            t, s2 = back[t]
                            word.append(s2)
                        return tuple(reversed(word))
                    queue.append(t)
        return None

    def to_dfao(self, out_true=True, out_false=False) -> "Dfao":
        return Dfao(self.alphabet, self.transitions, self.initial,
                    [out_true if q in self.accepting else out_false
                     for q in range(self.n_states)])

    def relevant_states(self) -> frozenset:
        """States from which some accepting state is reachable."""
        rev = [set() for _ in range(self.n_states)]
        for q in range(self.n_states):
            for s in self.alphabet.symbols():
                rev[self.transitions[q][s]].add(q)
        seen = set(self.accepting)
        queue = deque(self.accepting)
        while queue:
            q = queue.popleft()
            for r in rev[q]:
                if r not in seen:
                    seen.add(r)
                    queue.append(r)
        return frozenset(seen)

    def enumerate_words(self, max_len: int, cap: int | None = None):
        """All accepted words of length <= max_len, pruned to relevant states."""
        relevant = self.relevant_states()
        out = []
        stack = [(self.initial, ())]
        while stack:
            q, word = stack.pop()
            if q in self.accepting:
                out.append(word)
                if cap is not None and len(out) > cap:
                    raise MachineError("enumeration cap exceeded")
            if len(word) < max_len:
                for s in self.alphabet.symbols():
                    t = self.transitions[q][s]
                    if t in relevant:
                        stack.append((t, word + (s,)))
        out.sort()
        return out


class Dfao(_Machine):
    """Deterministic automaton with an output attached to every state."""

    def __init__(self, alphabet, transitions, initial, outputs):
        super().__init__(alphabet, transitions, initial)
        self.outputs = tuple(outputs)
        if len(self.outputs) != self.n_states:
            raise MachineError("one output per state required")

    def run(self, word):
        return self.outputs[self.walk(self.initial, word)]

    def minimize(self) -> "Dfao":
        trans, init, labs = self._minimized_parts(list(self.outputs))
        return Dfao(self.alphabet, trans, init, labs)

    def map_outputs(self, fn) -> "Dfao":
        return Dfao(self.alphabet, self.transitions, self.initial,
                    [fn(o) for o in self.outputs])

    def level_dfa(self, pred) -> Dfa:
        """Acceptor of the words whose output satisfies pred."""
        return Dfa(self.alphabet, self.transitions, self.initial,
                   [q for q, o in enumerate(self.outputs) if pred(o)])

    def product(self, other, combine) -> "Dfao":
        _check_same_alphabet(self, other)
        syms = list(self.alphabet.symbols())
        index = {}
        trans = []
        outs = []
        queue = deque()

        def state_id(pair):
            if pair not in index:
                index[pair] = len(index)
                trans.append(None)
                outs.append(combine(self.outputs[pair[0]], other.outputs[pair[1]]))
                queue.append(pair)
            return index[pair]

        start = state_id((self.initial, other.initial))
        while queue:
            qa, qb = pair = queue.popleft()
            i = index[pair]
            trans[i] = tuple(
                state_id((self.transitions[qa][s], other.transitions[qb][s]))
                for s in syms)
        return Dfao(self.alphabet, trans, start, outs)

    def structurally_equal(self, other) -> bool:
        return (self.alphabet == other.alphabet
                and self.transitions == other.transitions
                and self.initial == other.initial
                and self.outputs == other.outputs)


def run_dfao(m: Dfao, word):
    """Output of m on a word (symbol tuple or text such as "101.01")."""
    return m.run(word)


def boolean_op(op: str, a: Dfa, b: Dfa | None = None) -> Dfa:
    """Regular language operations: union, intersection, difference, complement,
    reverse.  Results are minimized."""
    if op == "complement":
        return a.complement().minimize()
    if op == "reverse":
        return reverse(a)
    if b is None:
        raise MachineError(f"operation {op} needs two machines")
    if op == "union":
        return a.union(b).minimize()
    if op == "intersection":
        return a.intersection(b).minimize()
    if op == "difference":
        return a.difference(b).minimize()
    raise MachineError(f"unknown boolean operation {op!r}")


def dfa_equivalent(a: Dfa, b: Dfa) -> bool:
    """Language equality, decided on canonical minimal machines."""
    _check_same_alphabet(a, b)
    ma, mb = a.minimize(), b.minimize()
    return (ma.transitions == mb.transitions and ma.initial == mb.initial
            and ma.accepting == mb.accepting)


def dfao_equivalent(a: Dfao, b: Dfao) -> bool:
    _check_same_alphabet(a, b)
    return a.minimize().structurally_equal(b.minimize())


# ---------------------------------------------------------------------------


class Nfa:
    """Nondeterministic acceptor with a set of initial states."""

    def __init__(self, alphabet, n_states, transitions, initials, accepting):
        self.alphabet = alphabet
        self.n_states = n_states
        # transitions: list of dicts symbol -> frozenset of targets
        self.transitions = [
            {s: frozenset(ts) for s, ts in row.items()} for row in transitions]
        self.initials = frozenset(initials)
        self.accepting = frozenset(accepting)

    def targets(self, state: int, symbol: int) -> frozenset:
        return self.transitions[state].get(symbol, frozenset())

    def determinize(self) -> Dfa:
        syms = list(self.alphabet.symbols())
        index = {}
        trans = []
        accepting = []
        queue = deque()

        def state_id(subset):
            if subset not in index:
                index[subset] = len(index)
                trans.append(None)
                queue.append(subset)
            return index[subset]

        start = state_id(frozenset(self.initials))
        while queue:
            subset = queue.popleft()
            i = index[subset]
            row = []
            for s in syms:
                nxt = frozenset().union(*(self.targets(q, s) for q in subset)) \
                    if subset else frozenset()
                row.append(state_id(nxt))
            trans[i] = tuple(row)
            if subset & self.accepting:
                accepting.append(i)
        return Dfa(self.alphabet, trans, start, accepting)


def reverse(dfa: Dfa) -> Dfa:
    """Acceptor of reversed words, built by determinizing the edge-reversed NFA."""
    rows = [dict() for _ in range(dfa.n_states)]
    for q in range(dfa.n_states):
        for s in dfa.alphabet.symbols():
            t = dfa.transitions[q][s]
            rows[t].setdefault(s, set()).add(q)
    nfa = Nfa(dfa.alphabet, dfa.n_states, rows, dfa.accepting, {dfa.initial})
    return nfa.determinize().minimize()


def nfa_count_mod(nfa: Nfa, n: int) -> Dfao:
    """DFAO computing the number of accepting paths of the input word, mod n.

    States of the result are functions from NFA states to Z/n giving the number
    of paths from an initial state to each NFA state; only reachable functions
    are materialized.
    """
    syms = list(nfa.alphabet.symbols())
    index = {}
    trans = []
    outs = []
    queue = deque()

    def state_id(vec):
        if vec not in index:
            index[vec] = len(index)
            trans.append(None)
            outs.append(sum(vec[q] for q in nfa.accepting) % n)
            queue.append(vec)
        return index[vec]

    start_vec = tuple(1 if q in nfa.initials else 0 for q in range(nfa.n_states))
    start = state_id(start_vec)
    while queue:
        vec = queue.popleft()
        i = index[vec]
        row = []
        for s in syms:
            nxt = [0] * nfa.n_states
            for q, c in enumerate(vec):
                if c:
                    for t in nfa.targets(q, s):
                        nxt[t] = (nxt[t] + c) % n
            row.append(state_id(tuple(nxt)))
        trans[i] = tuple(row)
    return Dfao(nfa.alphabet, trans, start, outs).minimize()


# ---------------------------------------------------------------------------


class _EpsNfa:
    """Builder for NFAs with epsilon edges; used by constructions that insert
    or delete padding and by transducer images."""

    def __init__(self, alphabet: Alphabet):
        self.alphabet = alphabet
        self.edges = []        # list of dict symbol -> set
        self.eps = []          # list of set
        self.initials = set()
        self.finals = set()

    def add_state(self) -> int:
        self.edges.append({})
        self.eps.append(set())
        return len(self.edges) - 1

    def add_edge(self, u: int, symbol: int, v: int):
        self.edges[u].setdefault(symbol, set()).add(v)

    def add_eps(self, u: int, v: int):
        self.eps[u].add(v)

    def _closure(self, states) -> frozenset:
        seen = set(states)
        queue = deque(states)
        while queue:
            q = queue.popleft()
            for t in self.eps[q]:
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
        return frozenset(seen)

    def to_dfa(self) -> Dfa:
        n = len(self.edges)
        rows = [dict() for _ in range(n)]
        closures = [self._closure({q}) for q in range(n)]
        for q in range(n):
            for s, ts in self.edges[q].items():
                acc = set()
                for t in ts:
                    acc |= closures[t]
                rows[q][s] = frozenset(acc)
        init = set()
        for q in self.initials:
            init |= closures[q]
        nfa = Nfa(self.alphabet, n, rows, init, self.finals)
        return nfa.determinize().minimize()


# ---------------------------------------------------------------------------


class Transducer:
    """Deterministic transducer: on each input symbol it follows a transition
    and emits a (possibly empty) word over the output alphabet."""

    def __init__(self, alphabet_in: Alphabet, alphabet_out: Alphabet,
                 transitions, emissions, initial: int, uniform: int | None = None):
        self.alphabet_in = alphabet_in
        self.alphabet_out = alphabet_out
        self.transitions = tuple(tuple(row) for row in transitions)
        self.emissions = tuple(tuple(tuple(w) for w in row) for row in emissions)
        self.initial = initial
        self.uniform = uniform
        n = len(self.transitions)
        if len(self.emissions) != n:
            raise MachineError("emission table size mismatch")
        for row_t, row_e in zip(self.transitions, self.emissions):
            if len(row_t) != alphabet_in.size or len(row_e) != alphabet_in.size:
                raise MachineError("transducer tables must cover the alphabet")
            if uniform is not None and any(len(w) != uniform for w in row_e):
                raise MachineError(f"transducer declared {uniform}-uniform")

    @property
    def n_states(self) -> int:
        return len(self.transitions)

    def apply(self, word) -> tuple[int, ...]:
        """Transduce a single word."""
        q = self.initial
        out = []
        for s in _as_word(self.alphabet_in, word):
            out.extend(self.emissions[q][s])
            q = self.transitions[q][s]
        return tuple(out)


def transduce(t: Transducer, l: Dfa, mode: str = "image") -> Dfa:
    """Image of a regular language under a transducer, or its preimage.

    image: the language { t(w) : w accepted by l }, over the output alphabet.
    preimage: the language { w : t(w) accepted by l }, over the input alphabet.
    """
    if mode == "image":
        if l.alphabet != t.alphabet_in:
            raise MachineError("language alphabet does not match transducer input")
        eps = _EpsNfa(t.alphabet_out)
        base = {}

        def base_id(pair):
            if pair not in base:
                base[pair] = eps.add_state()
            return base[pair]

        pairs = deque([(t.initial, l.initial)])
        seen = {(t.initial, l.initial)}
        eps.initials.add(base_id((t.initial, l.initial)))
        while pairs:
            qt, ql = pair = pairs.popleft()
            u = base_id(pair)
            if ql in l.accepting:
                eps.finals.add(u)
            for s in t.alphabet_in.symbols():
                emitted = t.emissions[qt][s]
                nxt = (t.transitions[qt][s], l.transitions[ql][s])
                v = base_id(nxt)
                if not emitted:
                    eps.add_eps(u, v)
                else:
                    cur = u
                    for sym in emitted[:-1]:
                        mid = eps.add_state()
                        eps.add_edge(cur, sym, mid)
                        cur = mid
                    eps.add_edge(cur, emitted[-1], v)
                if nxt not in seen:
                    seen.add(nxt)
                    pairs.append(nxt)
        return eps.to_dfa()

    if mode == "preimage":
        if l.alphabet != t.alphabet_out:
            raise MachineError("language alphabet does not match transducer output")
        index = {}
        trans = []
        accepting = []
        queue = deque()

        def state_id(pair):
            if pair not in index:
                index[pair] = len(index)
                trans.append(None)
                queue.append(pair)
            return index[pair]

        start = state_id((t.initial, l.initial))
        while queue:
            qt, ql = pair = queue.popleft()
            i = index[pair]
            row = []
            for s in t.alphabet_in.symbols():
                ql2 = l.walk(ql, t.emissions[qt][s])
                row.append(state_id((t.transitions[qt][s], ql2)))
            trans[i] = tuple(row)
            if ql in l.accepting:
                accepting.append(i)
        return Dfa(t.alphabet_in, trans, start, accepting).minimize()

    raise MachineError(f"unknown transduce mode {mode!r}")


# ---------------------------------------------------------------------------


def dfao_from_levels(levels: dict, alphabet: Alphabet, default, invalid=None) -> Dfao:
    """Combine disjoint level acceptors into one DFAO.

    levels maps an output value to the Dfa of words carrying that value; words
    accepted by no level get the default output.  Level languages must be
    pairwise disjoint.
    """
    keys = sorted(levels.keys(), key=_output_sort_key)
    machines = [levels[k] for k in keys]
    syms = list(alphabet.symbols())
    index = {}
    trans = []
    outs = []
    queue = deque()

    def out_of(vec):
        hits = [k for k, m, q in zip(keys, machines, vec) if q in m.accepting]
        if len(hits) > 1:
            raise MachineError("level languages overlap")
        return hits[0] if hits else default

    def state_id(vec):
        if vec not in index:
            index[vec] = len(index)
            trans.append(None)
            outs.append(out_of(vec))
            queue.append(vec)
        return index[vec]

    start = state_id(tuple(m.initial for m in machines))
    while queue:
        vec = queue.popleft()
        i = index[vec]
        trans[i] = tuple(
            state_id(tuple(m.transitions[q][s] for m, q in zip(machines, vec)))
            for s in syms)
    return Dfao(alphabet, trans, start, outs).minimize()


def _output_sort_key(v):
    return repr(v)


def to_dot(machine, name: str = "machine") -> str:
    """GraphViz rendering; acceptors show double circles, DFAOs label states
    with their outputs."""
    lines = [f"digraph {name} {{", "  rankdir=LR;",
             '  start [shape=point, label=""];']
    alphabet = machine.alphabet
    for q in range(machine.n_states):
        if isinstance(machine, Dfa):
            shape = "doublecircle" if q in machine.accepting else "circle"
            lines.append(f'  q{q} [shape={shape}, label="{q}"];')
        else:
            out = machine.outputs[q]
            label = "*" if out is None else str(out)
            lines.append(f'  q{q} [shape=circle, label="{q}|{label}"];')
    lines.append(f"  start -> q{machine.initial};")
    for q in range(machine.n_states):
        grouped = {}
        for s in alphabet.symbols():
            grouped.setdefault(machine.transitions[q][s], []).append(
                alphabet.symbol_name(s))
        for t, labels in grouped.items():
            lines.append(f'  q{q} -> q{t} [label="{",".join(labels)}"];')
    lines.append("}")
    return "\n".join(lines)
