"""Root solvers: rational expansion, additive witnesses, Artin-Schreier,
additive kernels, and the full polynomial pipeline."""

import random
from fractions import Fraction as Fr

import pytest

from autoseries.errors import BudgetError, SolveError, WindowError
from autoseries.gfq import PolyFq, RatFun, field_make
from autoseries.series import (
    chevalley_series,
    coefficient,
    equals,
    from_rational_function,
    series_add,
    truncate,
)
from autoseries.solver import (
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
from autoseries.valued import (
    INF,
    TruncPoly,
    TruncSeries,
    TwistedPoly,
    exp_depth,
    twisted_apply,
    twisted_mul,
)

F2 = field_make(2, 1)
F3 = field_make(3, 1)
F4 = field_make(2, 2)
ONE = F2.one()

T = RatFun.t(F2)
R1 = RatFun.constant(F2, 1)
R0 = RatFun.constant(F2, 0)


def rf(num, den=None, field=F2):
    n = PolyFq.make(field, list(num))
    d = PolyFq.make(field, list(den)) if den is not None else None
    return RatFun.from_poly(n) if d is None else RatFun.make(n, d)


def ts(pairs, window=INF, depth=INF, field=F2):
    return TruncSeries.make(field, [(Fr(e), field.from_int(c)) for e, c in pairs],
                            window, depth)


def term_ints(x):
    return [(e, c.to_int()) for e, c in x.terms]


def shallow_terms(x, depth):
    # drop the two working junk levels before comparing digits
    return [(e, c.to_int()) for e, c in x.terms
            if exp_depth(e, x.field.p) <= depth - 2]


class TestExpandRatfun:
    def test_geometric(self):
        x = expand_ratfun(F2, rf([1], [1, 1]), Fr(6))
        assert term_ints(x) == [(k, 1) for k in range(6)]
        assert x.window == 6

    def test_laurent_part_exact(self):
        # (1 + t) / t^2 terminates, so the window is infinite
        x = expand_ratfun(F2, rf([1, 1], [0, 0, 1]), Fr(4))
        assert term_ints(x) == [(-2, 1), (-1, 1)]
        assert x.window == INF

    def test_zero(self):
        x = expand_ratfun(F2, R0, Fr(3))
        assert x.terms == () and x.window == INF

    def test_char3(self):
        # 1/(1 - t) = sum t^k over F_3
        x = expand_ratfun(F3, rf([1], [1, 2], field=F3), Fr(5), )
        assert term_ints(x) == [(k, 1) for k in range(5)]

    def test_matches_automaton_expansion(self):
        r = rf([1, 1], [1, 1, 0, 1])
        x = expand_ratfun(F2, r, Fr(12))
        y = from_rational_function(F2, r)
        assert term_ints(x) == term_ints(truncate(y, Fr(12), 0))


class TestIsAdditive:
    def test_ratfun_lists(self):
        assert is_additive([R0, T, R1])            # t z + z^2
        assert is_additive([R0, R1, R0, R0, R1])   # z + z^4
        assert not is_additive([T, R1])            # constant term t
        assert not is_additive([R0, R1, R0, R1])   # z^3 term
        assert is_additive([])

    def test_trunc_poly_windows(self):
        w = Fr(8)
        zz = TruncSeries.zero(F2, window=w)
        c1 = TruncSeries.from_const(F2, ONE, window=w)
        tc = TruncSeries.monomial(F2, Fr(1), ONE, window=w)
        assert is_additive(TruncPoly.make(F2, [zz, tc, c1, zz, c1]))
        assert not is_additive(TruncPoly.make(F2, [tc, c1, c1]))
        assert not is_additive(TruncPoly.make(F2, [zz, tc, c1, c1]))


class TestMoore:
    def test_single_generator(self):
        P = moore_additive([ts([(1, 1)])])
        assert [term_ints(c) for c in P.coeffs] == [[(1, 1)], [(0, 1)]]
        # kernel check: annihilates 0 and t
        assert not twisted_apply(P, ts([(1, 1)])).terms

    def test_multiplicity_factor(self):
        P = moore_additive([ts([(1, 1)])], e=1)
        assert [term_ints(c) for c in P.coeffs] == [[], [(2, 1)], [(0, 1)]]

    def test_two_generators(self):
        basis = [ts([(0, 1)]), ts([(1, 1)])]
        P = moore_additive(basis)
        assert P.degree == 2
        for b in basis:
            assert not twisted_apply(P, b).terms
        # spans too: 1 + t killed as well
        assert not twisted_apply(P, ts([(0, 1), (1, 1)])).terms

    def test_dependent_basis_rejected(self):
        with pytest.raises(SolveError):
            moore_additive([ts([(0, 1)]), ts([(0, 1)])])

    def test_empty_basis_rejected(self):
        with pytest.raises(SolveError):
            moore_additive([])


class TestOre:
    def test_quadratic_witness(self):
        w = ore_additive([T, R1, R1])
        assert list(w.additive) == [T, R1 + T, R1]
        assert list(w.ordinary) == [R0, T, R1 + T, R0, R1]
        assert list(w.cofactor) == [R0, R1, R1]
        assert is_additive(list(w.ordinary))

    def test_linear_witness(self):
        w = ore_additive([T, R1])
        assert list(w.additive) == [T, R1]
        assert list(w.cofactor) == [R0, R1]

    def test_already_additive(self):
        # z^2 + z is its own smallest additive multiple
        w = ore_additive([R0, R1, R1])
        assert list(w.additive) == [R1, R1]
        assert list(w.cofactor) == [R1]

    def test_constant_coefficient_cubic(self):
        # z^2 + z + 1 divides z^4 + z
        w = ore_additive([R1, R1, R1])
        assert list(w.additive) == [R1, R0, R1]
        assert list(w.cofactor) == [R0, R1, R1]

    def test_ordinary_equals_cofactor_times_source(self):
        random.seed(5)
        for _ in range(10):
            P = [rf([random.randrange(2) for _ in range(3)],
                    [1] + [random.randrange(2) for _ in range(2)])
                 for _ in range(2)] + [R1]
            if P[0].is_zero():
                continue
            w = ore_additive(P)
            # multiply back: sum cof_j z^j * P == ordinary
            prod = [R0] * (len(w.cofactor) + len(P) - 1)
            for i, c in enumerate(w.cofactor):
                for j, d in enumerate(P):
                    prod[i + j] = prod[i + j] + c * d
            while prod and prod[-1].is_zero():
                prod.pop()
            assert prod == list(w.ordinary)

    def test_non_monic_rejected(self):
        with pytest.raises(SolveError):
            ore_additive([T, T])


class TestArtinSchreierTrunc:
    def test_constant_needs_f4(self):
        one = TruncSeries.from_const(F2, ONE)
        rs = artin_schreier_trunc(one, one, window=Fr(6))
        assert rs.field.e == 2 and len(rs) == 2
        for r in rs:
            c = r.coeff(0)
            assert (c * c - c - rs.field.one()).is_zero()

    def test_negative_support(self):
        one = TruncSeries.from_const(F2, ONE)
        b = ts([(-1, 1)])
        rs = artin_schreier_trunc(one, b, window=Fr(4), depth=8)
        assert len(rs) == 2
        digits = [(Fr(-1, 2 ** k), 1) for k in range(1, 9)]
        lo = [r for r in rs if r.coeff(0).is_zero()][0]
        hi = [r for r in rs if not r.coeff(0).is_zero()][0]
        assert term_ints(lo) == digits
        assert term_ints(hi) == digits + [(Fr(0), 1)]

    def test_positive_support(self):
        one = TruncSeries.from_const(F2, ONE)
        rs = artin_schreier_trunc(one, ts([(1, 1)]), window=Fr(10))
        lo = [r for r in rs if r.coeff(0).is_zero()][0]
        assert term_ints(lo) == [(1, 1), (2, 1), (4, 1), (8, 1)]
        assert lo.window == 10

    def test_char3_positive(self):
        one3 = TruncSeries.from_const(F3, F3.one())
        rs = artin_schreier_trunc(one3, ts([(1, 1)], field=F3), window=Fr(10))
        assert len(rs) == 3
        lo = [r for r in rs if r.coeff(0).is_zero()][0]
        # y = -(t + t^3 + t^9 + ...) in char 3
        assert term_ints(lo) == [(1, 2), (3, 2), (9, 2)]

    def test_normalizer(self):
        # z^2 - t z = t normalizes via lam = t to w^2 - w = 1/t
        rs = artin_schreier_trunc(ts([(1, 1)]), ts([(1, 1)]),
                                  window=Fr(3), depth=6)
        vals = sorted(r.val() for r in rs)
        assert vals == [Fr(1, 2), Fr(1, 2)]
        lo = min(rs, key=lambda r: len(r.terms))
        assert term_ints(lo)[:3] == [(Fr(1, 2), 1), (Fr(3, 4), 1), (Fr(7, 8), 1)]

    def test_residual_property(self):
        random.seed(11)
        one = TruncSeries.from_const(F2, ONE)
        for _ in range(8):
            pairs = [(Fr(random.randrange(-4, 9)), 1) for _ in range(4)]
            b = ts(pairs, window=8)
            rs = artin_schreier_trunc(one, b, window=Fr(8), depth=12)
            for r in rs:
                res = r * r - r - b.embed(rs.field)
                # squaring costs the root's (possibly negative) valuation
                cert = Fr(8) + min(Fr(0), r.val())
                assert residual_ok(res.clamp(window=cert), cert, 12)

    def test_zero_a_rejected(self):
        with pytest.raises(SolveError):
            artin_schreier_trunc(TruncSeries.zero(F2), ts([(1, 1)]))

    def test_indeterminate_a_rejected(self):
        with pytest.raises(WindowError):
            artin_schreier_trunc(TruncSeries.zero(F2, window=3), ts([(1, 1)]))

    def test_unusable_window_rejected(self):
        one = TruncSeries.from_const(F2, ONE)
        with pytest.raises(WindowError):
            artin_schreier_trunc(one, ts([(-2, 1)], window=-1))


class TestArtinSchreierAuto:
    def test_chevalley(self):
        x = from_rational_function(F2, R1 / T)
        y = artin_schreier_auto(x)
        assert artin_schreier_check(x, y)
        ch = chevalley_series(F2)
        assert equals(y, ch) or equals(
            series_add(y, from_rational_function(F2, R1)), ch)

    def test_chevalley_char3(self):
        t3 = RatFun.t(F3)
        x = from_rational_function(F3, RatFun.constant(F3, 1) / t3)
        y = artin_schreier_auto(x)
        assert artin_schreier_check(x, y)

    def test_deep_pole(self):
        # v_min = -5 forces three preliminary p-th roots
        x = from_rational_function(F2, R1 / (T * T * T * T * T))
        y = artin_schreier_auto(x)
        assert artin_schreier_check(x, y)
        assert coefficient(y, Fr(-5, 2)) == ONE

    def test_two_pole_terms(self):
        x = from_rational_function(F2, rf([1, 0, 1], [0, 0, 0, 1]))
        y = artin_schreier_auto(x)
        assert artin_schreier_check(x, y)

    def test_zero_input(self):
        from autoseries.series import zero_series
        y = artin_schreier_auto(zero_series(F2))
        assert equals(y, zero_series(F2))

    def test_positive_support_rejected(self):
        with pytest.raises(SolveError):
            artin_schreier_auto(from_rational_function(F2, T))

    def test_mixed_support_rejected(self):
        with pytest.raises(SolveError):
            artin_schreier_auto(from_rational_function(F2, R1 / (R1 + T)))


class TestNewtonSolve:
    def test_ore_witness_kernel(self):
        P = TwistedPoly.make(F2, [ts([(1, 1)]), ts([(0, 1), (1, 1)]),
                                  ts([(0, 1)])])
        rs = newton_solve(P, window=Fr(10))
        assert len(rs) == 4
        keys = sorted(term_ints(r) for r in rs)
        assert keys == [
            [],
            [(0, 1)],
            [(0, 1), (1, 1), (2, 1), (4, 1), (8, 1)],
            [(1, 1), (2, 1), (4, 1), (8, 1)],
        ]

    def test_two_slope_polygon(self):
        # (F + 1/t)(F + t) has kernel values 1 and -1/2
        c = TwistedPoly.make(F2, [ts([(-1, 1)]), ts([(0, 1)])])
        d = TwistedPoly.make(F2, [ts([(1, 1)]), ts([(0, 1)])])
        P = twisted_mul(c, d)
        assert [term_ints(x) for x in P.coeffs] == [
            [(0, 1)], [(-1, 1), (2, 1)], [(0, 1)]]
        rs = newton_solve(P, window=Fr(4), depth=10)
        assert len(rs) == 4
        vals = sorted(r.val() for r in rs if r.terms)
        assert vals == [Fr(-1, 2), Fr(-1, 2), Fr(1)]
        deep = [r for r in rs if r.terms and r.val() == Fr(-1, 2)]
        # z = t w with w^2 + w = t^-3: digits t^(1 - 3/2^k)
        digits = [(Fr(1) - Fr(3, 2 ** k), 1) for k in range(1, 9)]
        want = [d for d in digits if d[0] < 4]
        got = sorted(shallow_terms(r, 10) for r in deep)
        assert want in got

    def test_low_zero_coefficients(self):
        # t z^2 + z^4 has kernel {0, t^(1/2)}
        P = TwistedPoly.make(F2, [TruncSeries.zero(F2), ts([(1, 1)]),
                                  ts([(0, 1)])])
        rs = newton_solve(P, window=Fr(6))
        assert sorted(term_ints(r) for r in rs) == [[], [(Fr(1, 2), 1)]]

    def test_char3_constants(self):
        P = TwistedPoly.make(F3, [TruncSeries.from_const(F3, F3.from_int(2)),
                                  TruncSeries.from_const(F3, F3.one())])
        rs = newton_solve(P, window=Fr(5))
        assert sorted(term_ints(r) for r in rs) == [[], [(0, 1)], [(0, 2)]]

    def test_extension_constants(self):
        # z^4 + z: kernel is all of F_4
        P = TwistedPoly.make(F2, [ts([(0, 1)]), TruncSeries.zero(F2),
                                  ts([(0, 1)])])
        rs = newton_solve(P, window=Fr(5))
        assert rs.field.e == 2 and len(rs) == 4
        consts = sorted(r.coeff(0).to_int() for r in rs)
        assert consts == [0, 1, 2, 3]

    def test_identity_only(self):
        P = TwistedPoly.make(F2, [ts([(0, 1)])])
        rs = newton_solve(P, window=Fr(5))
        assert len(rs) == 1 and not rs.roots[0].terms

    def test_residual_property(self):
        random.seed(23)
        for _ in range(6):
            es = random.sample(range(-3, 7), 2)
            c = TwistedPoly.make(F2, [ts([(es[0], 1)]), ts([(0, 1)])])
            d = TwistedPoly.make(F2, [ts([(es[1], 1)]), ts([(0, 1)])])
            P = twisted_mul(c, d)
            rs = newton_solve(P, window=Fr(6), depth=16)
            assert len(rs) == 4
            for r in rs:
                res = twisted_apply(P, r)
                # applying P to a negative-valuation root costs window
                cert = rs.window if res.window == INF else min(rs.window,
                                                               res.window)
                assert cert >= 0
                assert residual_ok(res, cert, 16)

    def test_infinite_window_rejected(self):
        P = TwistedPoly.make(F2, [ts([(1, 1)]), ts([(0, 1)])])
        with pytest.raises(WindowError):
            newton_solve(P, window=INF)

    def test_non_monic_rejected(self):
        P = TwistedPoly.make(F2, [ts([(0, 1)]), ts([(1, 1)])])
        with pytest.raises(SolveError):
            newton_solve(P, window=Fr(5))

    def test_kernel_budget(self):
        coeffs = [ts([(0, 1)])] + [TruncSeries.zero(F2)] * 12 + [ts([(0, 1)])]
        P = TwistedPoly.make(F2, coeffs)
        with pytest.raises(BudgetError):
            newton_solve(P, window=Fr(3))

    def test_indeterminate_constant_rejected(self):
        P = TwistedPoly.make(F2, [TruncSeries.zero(F2, window=2),
                                  ts([(0, 1)])])
        with pytest.raises(WindowError):
            newton_solve(P, window=Fr(5))


class TestResidualOk:
    def test_empty_with_window(self):
        assert residual_ok(TruncSeries.zero(F2, window=8), Fr(8), 12)
        assert not residual_ok(TruncSeries.zero(F2, window=7), Fr(8), 12)

    def test_low_term_fails(self):
        assert not residual_ok(ts([(3, 1)], window=9), Fr(8), 12)

    def test_junk_band_ignored(self):
        r = ts([(Fr(1, 2 ** 12), 1)], window=9, depth=12)
        assert residual_ok(r, Fr(8), 12)
        r2 = ts([(Fr(1, 2 ** 9), 1)], window=9, depth=12)
        assert not residual_ok(r2, Fr(8), 12)


class TestRootsOfPolynomial:
    def test_quadratic_positive(self):
        rs = roots_of_polynomial([T, R1, R1], window=Fr(10))
        assert len(rs) == 2
        keys = sorted(term_ints(r) for r in rs)
        assert keys == [
            [(0, 1), (1, 1), (2, 1), (4, 1), (8, 1)],
            [(1, 1), (2, 1), (4, 1), (8, 1)],
        ]

    def test_quadratic_pole(self):
        rs = roots_of_polynomial([R1 / T, R1, R1], window=Fr(8), depth=24)
        assert len(rs) == 2
        lo = [r for r in rs if r.coeff(0).is_zero()][0]
        want = [(Fr(-1, 2 ** k), 1) for k in range(1, 23)]
        assert shallow_terms(lo, 24) == want

    def test_matches_chevalley_truncation(self):
        rs = roots_of_polynomial([R1 / T, R1, R1], window=Fr(6), depth=20)
        ch = truncate(chevalley_series(F2), Fr(6), 18)
        lo = [r for r in rs if r.coeff(0).is_zero()][0]
        assert shallow_terms(lo, 20) == term_ints(ch)

    def test_linear(self):
        rs = roots_of_polynomial([T / (R1 + T), R1], window=Fr(5))
        assert term_ints(rs.roots[0]) == [(k, 1) for k in range(1, 5)]

    def test_constant_roots_need_extension(self):
        rs = roots_of_polynomial([R1, R1, R1], window=Fr(5))
        assert rs.field.e == 2 and len(rs) == 2
        for r in rs:
            c = r.coeff(0)
            assert (c * c + c + rs.field.one()).is_zero()

    def test_splits_product(self):
        # (z + t)(z + t^2) = z^2 + (t + t^2) z + t^3
        P = [rf([0, 0, 0, 1]), rf([0, 1, 1]), R1]
        rs = roots_of_polynomial(P, window=Fr(8))
        assert sorted(term_ints(r) for r in rs) == [[(1, 1)], [(2, 1)]]

    def test_verify_consistency(self):
        random.seed(31)
        count = 0
        while count < 5:
            c0 = rf([random.randrange(2) for _ in range(3)],
                    [1] + [random.randrange(2) for _ in range(2)])
            c1 = rf([random.randrange(2) for _ in range(3)])
            P = [c0, c1, R1]
            try:
                rs = roots_of_polynomial(P, window=Fr(6), depth=20)
            except (SolveError, WindowError):
                continue
            count += 1
            for r in rs:
                from autoseries.solver import _eval_ratfun_poly
                res = _eval_ratfun_poly(P, r, Fr(6))
                assert residual_ok(res, Fr(6), 20)

    def test_cubic(self):
        # (z + t)(z^2 + z + t) = z^3 + (1 + t) z^2 + 2t z + ... in char 2:
        # z^3 + (1+t) z^2 + 0 z... compute: (z+t)(z^2+z+t)
        # = z^3 + z^2 + tz + t z^2 + t z + t^2 = z^3 + (1+t) z^2 + t^2
        P = [rf([0, 0, 1]), R0, rf([1, 1]), R1]
        rs = roots_of_polynomial(P, window=Fr(8), depth=20)
        assert len(rs) == 3
        assert [(1, 1)] in [shallow_terms(r, 20) for r in rs]

    def test_non_squarefree_rejected(self):
        # (z + t)^3 has gcd (z + t)^2 with its derivative
        P = [rf([0, 0, 0, 1]), rf([0, 0, 1]), rf([0, 1]), R1]
        with pytest.raises(SolveError):
            roots_of_polynomial(P, window=Fr(5))

    def test_vanishing_derivative_rejected(self):
        with pytest.raises(SolveError):
            roots_of_polynomial([rf([0, 0, 1]), R0, R1], window=Fr(5))

    def test_non_monic_rejected(self):
        with pytest.raises(SolveError):
            roots_of_polynomial([T, T], window=Fr(5))


class TestVerify:
    def test_chevalley_root(self):
        ch = chevalley_series(F2)
        assert verify([R1 / T, R1, R1], ch, window=Fr(5), depth=20)

    def test_shifted_root(self):
        ch = chevalley_series(F2)
        other = series_add(ch, from_rational_function(F2, R1))
        assert verify([R1 / T, R1, R1], other, window=Fr(5), depth=20)

    def test_non_root(self):
        ch = chevalley_series(F2)
        bad = series_add(ch, from_rational_function(F2, T))
        assert not verify([R1 / T, R1, R1], bad, window=Fr(5), depth=20)

    def test_field_mismatch(self):
        ch = chevalley_series(F2)
        with pytest.raises(SolveError):
            verify([RatFun.constant(F3, 1)], ch)


class TestRootSet:
    def test_iteration(self):
        rs = roots_of_polynomial([T, R1, R1], window=Fr(4))
        assert len(list(rs)) == len(rs) == 2
        assert rs.window == 4
