"""Automatic series: coefficients, ring operations, well-ordering, truncation."""

import random
from fractions import Fraction as Fr

import pytest

from autoseries.automata import Alphabet, Dfa
from autoseries.errors import MachineError
from autoseries.gfq import PolyFq, RatFun, field_make
from autoseries.radix import valid_language, value_of, word_of
from autoseries.series import (
    all_ones,
    chevalley_series,
    decimate,
    equals,
    from_rational_function,
    from_terms,
    frobenius_series,
    hadamard,
    is_well_ordered,
    mul,
    normalize,
    pth_root_series,
    scale,
    series_add,
    series_shift,
    standard_catalog,
    support_language,
    truncate,
    unify,
    zero_series,
)
from autoseries.valued import exp_depth

F2 = field_make(2, 1)
F3 = field_make(3, 1)
F4 = field_make(2, 2)
ONE = F2.one()

PROBES = [Fr(n, 8) for n in range(-40, 65)] + [Fr(-1, 2 ** k) for k in range(1, 9)]


def terms2(pairs):
    return from_terms(F2, [(Fr(e), ONE) for e in pairs])


def ratfun2(num, den):
    return RatFun.make(PolyFq.make(F2, num), PolyFq.make(F2, den))


class TestCoefficients:
    def test_finite_support(self):
        x = from_terms(F2, [(Fr(1, 2), ONE), (Fr(3), ONE)])
        assert x.coefficient(Fr(1, 2)) == ONE
        assert x.coefficient(3) == ONE
        assert x.coefficient(1).is_zero()
        assert x.coefficient(Fr(1, 3)).is_zero()
        assert x.coefficient(Fr(-7)).is_zero()

    def test_negative_exponents_use_offset(self):
        y = from_terms(F2, [(Fr(-3, 2), ONE), (Fr(2), ONE)])
        assert y.b > 0
        assert y.coefficient(Fr(-3, 2)) == ONE
        assert y.coefficient(2) == ONE
        assert y.coefficient(0).is_zero()

    def test_all_ones(self):
        ao = all_ones(F2)
        assert ao.machine.n_states == 3
        for i in range(12):
            assert ao.coefficient(i) == ONE
        assert ao.coefficient(-1).is_zero()
        assert ao.coefficient(Fr(1, 2)).is_zero()

    def test_chevalley_support(self):
        ch = chevalley_series(F2)
        for k in range(1, 9):
            assert ch.coefficient(Fr(-1, 2 ** k)) == ONE
        for off in [Fr(0), Fr(-1), Fr(-3, 4), Fr(1, 2), Fr(3)]:
            assert ch.coefficient(off).is_zero()

    def test_zero_series(self):
        z = zero_series(F3)
        for i in PROBES:
            assert z.coefficient(i).is_zero()

    def test_catalog_members_well_formed(self):
        cat = standard_catalog(F2)
        assert len(cat) >= 12
        names = [n for n, _ in cat]
        assert len(set(names)) == len(names)


class TestRational:
    def test_geometric_mod2(self):
        # 1/(1+t) over F_2 is the all-ones expansion
        e = from_rational_function(F2, ratfun2([1], [1, 1]))
        assert e.machine.n_states <= 4
        for i in range(60):
            assert e.coefficient(i) == ONE
        assert equals(e, all_ones(F2))

    def test_long_division_oracle(self):
        # (1+t)/(1+t+t^3): coefficients recomputed by explicit long division
        num, den = [1, 1], [1, 1, 0, 1]
        e = from_rational_function(F2, ratfun2(num, den))
        state = list(num)
        coeffs = []
        for _ in range(80):
            c = state[0] if state else 0
            coeffs.append(c)
            work = state + [0] * (len(den) - len(state))
            for j, dj in enumerate(den):
                work[j] = (work[j] - c * dj) % 2
            state = work[1:]
        for i, want in enumerate(coeffs):
            assert e.coefficient(i).to_int() == want, i

    def test_pole_at_origin(self):
        # 1/(t^2 + t^3) = t^-2/(1+t)
        e = from_rational_function(F2, ratfun2([1], [0, 0, 1, 1]))
        for i in range(-2, 30):
            assert e.coefficient(i) == ONE
        assert e.coefficient(-3).is_zero()
        assert e.coefficient(Fr(-1, 2)).is_zero()

    def test_f3_all_ones(self):
        # 1/(1-t) over F_3
        num = PolyFq.make(F3, [1])
        den = PolyFq.make(F3, [1, 2])
        e = from_rational_function(F3, RatFun.make(num, den))
        assert equals(e, all_ones(F3))

    def test_zero_function(self):
        z = from_rational_function(F2, RatFun.constant(F2, F2.zero()))
        assert equals(z, zero_series(F2))


class TestNormalize:
    def test_coarser_offsets_preserve_coefficients(self):
        ch = chevalley_series(F2)
        n2 = normalize(ch, 2, 3)
        assert (n2.a, n2.b) == (2, 3)
        for i in PROBES:
            assert n2.coefficient(i) == ch.coefficient(i), i

    def test_rejects_non_multiple(self):
        with pytest.raises(MachineError):
            normalize(chevalley_series(F2), 3, 0)

    def test_rejects_negative_shift(self):
        n2 = normalize(all_ones(F2), 2, 3)
        with pytest.raises(MachineError):
            normalize(n2, 2, 0)

    def test_unify(self):
        x = normalize(chevalley_series(F2), 2, 3)
        y = all_ones(F2)
        u1, u2 = unify(x, y)
        assert (u1.a, u1.b) == (u2.a, u2.b)
        for i in PROBES:
            assert u1.coefficient(i) == x.coefficient(i)
            assert u2.coefficient(i) == y.coefficient(i)


class TestRingOps:
    def test_add_pointwise(self):
        x = terms2([Fr(1, 2), 3])
        ao = all_ones(F2)
        s = series_add(ao, x)
        for i in PROBES:
            assert s.coefficient(i) == ao.coefficient(i) + x.coefficient(i), i

    def test_add_cancels(self):
        x = terms2([Fr(1, 2), 3])
        assert equals(series_add(x, x), zero_series(F2))

    def test_add_f3(self):
        x = from_terms(F3, [(Fr(0), F3.one())])
        s = series_add(series_add(x, x), x)
        assert equals(s, zero_series(F3))

    def test_hadamard_pointwise(self):
        x = terms2([Fr(1, 2), 0, 2, 5])
        ao = all_ones(F2)
        h = hadamard(ao, x)
        for i in PROBES:
            assert h.coefficient(i) == ao.coefficient(i) * x.coefficient(i), i

    def test_scale(self):
        g = F4.gen()
        u = scale(all_ones(F4), g)
        for i in range(6):
            assert u.coefficient(i) == g
        assert equals(scale(u, g.inv()), all_ones(F4))
        assert equals(scale(u, F4.zero()), zero_series(F4))

    def test_operator_sugar(self):
        x = terms2([0, 1])
        assert equals(x + x, zero_series(F2))
        assert equals(x * terms2([0]), x)


class TestFrobeniusAndRoots:
    def test_frobenius_coefficients(self):
        ch = chevalley_series(F2)
        f = frobenius_series(ch)
        for i in PROBES:
            assert f.coefficient(i) == ch.coefficient(i / 2) ** 2, i

    def test_pth_root_coefficients(self):
        ch = chevalley_series(F2)
        r = pth_root_series(ch)
        for i in PROBES:
            assert r.coefficient(i) == ch.coefficient(2 * i), i

    def test_round_trips(self):
        for s in (chevalley_series(F2), all_ones(F2), terms2([Fr(-1, 2), 0, 3])):
            assert equals(frobenius_series(pth_root_series(s)), s)
            assert equals(pth_root_series(frobenius_series(s)), s)

    def test_frobenius_is_additive(self):
        x, y = chevalley_series(F2), all_ones(F2)
        lhs = frobenius_series(series_add(x, y))
        rhs = series_add(frobenius_series(x), frobenius_series(y))
        assert equals(lhs, rhs)

    def test_frobenius_is_multiplicative(self):
        x, y = terms2([Fr(1, 2), 1]), all_ones(F2)
        lhs = frobenius_series(mul(x, y))
        rhs = mul(frobenius_series(x), frobenius_series(y))
        assert equals(lhs, rhs)

    def test_frobenius_f4_applies_to_outputs(self):
        g = F4.gen()
        u = scale(all_ones(F4), g)
        f = frobenius_series(u)
        assert f.coefficient(0) == g * g
        assert f.coefficient(Fr(1, 2)).is_zero()


class TestDecimateShift:
    def test_decimate_even(self):
        ao = all_ones(F2)
        d = decimate(ao, 2, 0)
        for i in PROBES:
            assert d.coefficient(i) == ao.coefficient(2 * i), i

    def test_decimate_offset(self):
        ch = chevalley_series(F2)
        d = decimate(ch, Fr(1, 2), Fr(0))
        for i in PROBES:
            assert d.coefficient(i) == ch.coefficient(i / 2), i

    def test_shift(self):
        ao = all_ones(F2)
        sh = series_shift(ao, Fr(3, 2))
        for i in PROBES:
            assert sh.coefficient(i) == ao.coefficient(i - Fr(3, 2)), i

    def test_shift_then_unshift(self):
        ch = chevalley_series(F2)
        assert equals(series_shift(series_shift(ch, 2), -2), ch)


class TestEquals:
    def test_reflexive_and_cross_construction(self):
        assert equals(chevalley_series(F2), chevalley_series(F2))
        e = from_rational_function(F2, ratfun2([1], [1, 1]))
        assert equals(e, all_ones(F2))

    def test_distinguishes(self):
        assert not equals(all_ones(F2), chevalley_series(F2))
        assert not equals(all_ones(F2), zero_series(F2))
        assert not equals(terms2([0]), terms2([1]))

    def test_offset_invariance(self):
        ch = chevalley_series(F2)
        assert equals(normalize(ch, 4, 5), ch)


class TestMul:
    def test_square_mod2(self):
        x = terms2([0, 1])
        prod = mul(x, x)
        for i in [Fr(0), Fr(1), Fr(2), Fr(3), Fr(1, 2)]:
            want = ONE if i in (0, 2) else F2.zero()
            assert prod.coefficient(i) == want, i

    def test_fractional_supports(self):
        c = terms2([Fr(1, 2), 1])
        d = terms2([Fr(1, 2), 2])
        pr = mul(c, d)
        want = {Fr(1), Fr(3, 2), Fr(5, 2), Fr(3)}
        for i in [Fr(n, 4) for n in range(0, 17)]:
            got = pr.coefficient(i)
            assert got == (ONE if i in want else F2.zero()), i

    def test_f3_cross_terms(self):
        e1 = from_terms(F3, [(Fr(0), F3.one()), (Fr(1), F3.one())])
        e2 = from_terms(F3, [(Fr(0), F3.one()), (Fr(1), F3.from_int(2))])
        pr = mul(e1, e2)
        # (1+t)(1+2t) = 1 + 2t^2 mod 3
        for i, want in [(0, 1), (1, 0), (2, 2), (3, 0)]:
            assert pr.coefficient(i).to_int() == want, i

    def test_all_ones_square_is_parity(self):
        sq = mul(all_ones(F2), all_ones(F2))
        for i in range(14):
            assert sq.coefficient(i).to_int() == (i + 1) % 2, i
        assert sq.coefficient(Fr(1, 2)).is_zero()

    def test_rational_inverse(self):
        inv1pt = from_rational_function(F2, ratfun2([1], [1, 1]))
        assert equals(mul(inv1pt, terms2([0, 1])), terms2([0]))

    def test_chevalley_equation(self):
        # y = sum t^(-1/2^k) satisfies y^2 + y = 1/t
        ch = chevalley_series(F2)
        sq = mul(ch, ch)
        assert equals(series_add(sq, ch), terms2([-1]))
        assert equals(sq, frobenius_series(ch))

    def test_distributive(self):
        a, c, d = terms2([0, 1]), terms2([Fr(1, 2), 1]), chevalley_series(F2)
        lhs = mul(series_add(a, c), d)
        rhs = series_add(mul(a, d), mul(c, d))
        assert equals(lhs, rhs)

    def test_commutative_associative(self):
        xs = [terms2([0, 1]), chevalley_series(F2), all_ones(F2)]
        a, b, c = xs
        assert equals(mul(a, b), mul(b, a))
        assert equals(mul(mul(a, b), c), mul(a, mul(b, c)))

    def test_catalog_windowed_convolution(self):
        # compare against truncated-series products on the trusted region:
        # inside the product window, one depth level above the input caps
        e0, d0 = 4, 5
        cat = standard_catalog(F2)
        rng = random.Random(11)
        pairs = [(x, y) for x in cat for y in cat]
        for (nx, sx), (ny, sy) in rng.sample(pairs, 40):
            tp = truncate(sx, e0, d0) * truncate(sy, e0, d0)
            prod = mul(sx, sy)
            probes = {e for e, _ in tp.terms} | {Fr(0), Fr(1), Fr(-1)}
            for e in probes:
                if e >= tp.window or exp_depth(e, 2) > d0 - 1:
                    continue
                assert prod.coefficient(e) == tp.coeff(e), (nx, ny, e)


class TestWellOrdered:
    def test_catalog_is_well_ordered(self):
        for name, s in standard_catalog(F2):
            assert is_well_ordered(s).ok, name

    def test_valid_language_not_well_ordered(self):
        # all of S_2 contains 1/2 > 1/4 > 1/8 > ...
        v = is_well_ordered(valid_language(2))
        assert not v.ok

    def test_descending_chain_language(self):
        # ".0^n 1" has values 2^-(n+1) decreasing to 0
        a2 = Alphabet(2)
        trans = [(3, 3, 1), (1, 2, 3), (3, 3, 3), (3, 3, 3)]
        bad = Dfa(a2, tuple(trans), 0, [2])
        v = is_well_ordered(bad)
        assert not v.ok
        prev = None
        for n in range(4):
            w = v.family(n)
            word = a2.parse(w)
            assert bad.accepts(word), w
            val = value_of(w, 2)
            if prev is not None:
                assert val < prev
            prev = val

    def test_witness_family_values_decrease(self):
        v = is_well_ordered(valid_language(3))
        assert not v.ok
        vals = [value_of(v.family(n), 3) for n in range(5)]
        assert all(x > y for x, y in zip(vals, vals[1:]))

    def test_powers_of_two_fine(self):
        # "1 0* ." is unbounded increasing, still well ordered
        a2 = Alphabet(2)
        trans = [(3, 1, 3), (1, 3, 2), (3, 3, 3), (3, 3, 3)]
        dfa = Dfa(a2, tuple(trans), 0, [2])
        assert is_well_ordered(dfa).ok


class TestTruncate:
    def test_all_ones_window(self):
        tr = truncate(all_ones(F2), 5, 3)
        assert [(e, c.to_int()) for e, c in tr.terms] == [
            (0, 1), (1, 1), (2, 1), (3, 1), (4, 1)]
        assert tr.window == 5
        assert tr.depth == 3

    def test_chevalley_depth(self):
        tr = truncate(chevalley_series(F2), Fr(0), 4)
        assert [(e, c.to_int()) for e, c in tr.terms] == [
            (Fr(-1, 2), 1), (Fr(-1, 4), 1), (Fr(-1, 8), 1), (Fr(-1, 16), 1)]

    def test_matches_coefficient(self):
        for _, s in standard_catalog(F2)[:10]:
            tr = truncate(s, 3, 4)
            for e, c in tr.terms:
                assert s.coefficient(e) == c

    def test_zero(self):
        tr = truncate(zero_series(F2), 10, 10)
        assert not tr.terms


class TestSupportLanguage:
    def test_chevalley_support_words(self):
        ch = chevalley_series(F2)
        supp = support_language(ch)
        for k in range(1, 6):
            v = ch.a * Fr(-1, 2 ** k) + ch.b
            assert supp.accepts(word_of(v, 2))
        assert not supp.accepts(word_of(ch.a * 1 + ch.b, 2))
