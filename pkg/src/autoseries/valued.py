"""Truncated Laurent-style series with fractional exponents, Newton polygons,
slope factorization, and twisted polynomials.

A TruncSeries stores finitely many (exponent, coefficient) terms together with
a window (E, d): the data is exact for exponents below E whose denominator has
p-adic depth at most d.  Operations propagate windows pessimistically and a
WindowError is raised where a result cannot be certified at all.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import BudgetError, SolveError, WindowError
from .gfq import Fq, FqElem, field_make

INF = float("inf")

_MAX_GEOMETRIC = 10000
_MAX_SPLIT_ROUNDS = 500


def exp_depth(e: Fraction, p: int) -> int:
    """p-adic depth of an exponent's denominator."""
    den = e.denominator
    k = 0
    while den % p == 0:
        den //= p
        k += 1
    return k


@dataclass(frozen=True, eq=False)
class TruncSeries:
    """Finitely many exact terms plus a window of certified exactness."""

    field: Fq
    terms: tuple[tuple[Fraction, FqElem], ...]
    window: object  # Fraction or INF
    depth: object   # int or INF

    @staticmethod
    def make(field: Fq, items, window=INF, depth=INF) -> "TruncSeries":
        if window != INF:
            window = Fraction(window)
        acc: dict[Fraction, FqElem] = {}
        for e, c in items:
            if type(e) is not Fraction:
                e = Fraction(e)
            if c.is_zero():
                continue
            if e in acc:
                s = acc[e] + c
                if s.is_zero():
                    del acc[e]
                else:
                    acc[e] = s
            else:
                acc[e] = c
        kept = [(e, c) for e, c in acc.items()
                if e < window and exp_depth(e, field.p) <= depth]
        kept.sort(key=lambda t: t[0])
        return TruncSeries(field, tuple(kept), window, depth)

    @staticmethod
    def zero(field: Fq, window=INF, depth=INF) -> "TruncSeries":
        return TruncSeries.make(field, [], window, depth)

    @staticmethod
    def monomial(field: Fq, e, c, window=INF, depth=INF) -> "TruncSeries":
        if not isinstance(c, FqElem):
            c = field.from_int(int(c))
        return TruncSeries.make(field, [(Fraction(e), c)], window, depth)

    @staticmethod
    def from_const(field: Fq, c, window=INF, depth=INF) -> "TruncSeries":
        return TruncSeries.monomial(field, 0, c, window, depth)

    # ------------------------------------------------------------------

    def is_exact_zero(self) -> bool:
        return not self.terms and self.window == INF and self.depth == INF

    def val(self):
        """Least exponent of the support; INF for the exact zero series."""
        if self.terms:
            return self.terms[0][0]
        if self.is_exact_zero():
            return INF
        raise WindowError("valuation indeterminate: no terms inside the window")

    def val_lower(self):
        """A certified lower bound for the valuation."""
        if self.terms:
            return self.terms[0][0]
        return self.window

    def coeff(self, e) -> FqElem:
        e = Fraction(e)
        for ex, c in self.terms:
            if ex == e:
                return c
        return self.field.zero()

    def clamp(self, window=None, depth=None) -> "TruncSeries":
        w = self.window if window is None else min(self.window, window)
        d = self.depth if depth is None else min(self.depth, depth)
        return TruncSeries.make(self.field, self.terms, w, d)

    # ------------------------------------------------------------------

    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        w = min(self.window, other.window)
        d = min(self.depth, other.depth)
        return TruncSeries.make(self.field, self.terms + other.terms, w, d)

    def __neg__(self) -> "TruncSeries":
        return TruncSeries(self.field, tuple((e, -c) for e, c in self.terms),
                           self.window, self.depth)

    def __sub__(self, other: "TruncSeries") -> "TruncSeries":
        return self + (-other)

    def __mul__(self, other: "TruncSeries") -> "TruncSeries":
        w = min(self.window + other.val_lower(), other.window + self.val_lower())
        d = min(self.depth, other.depth)
        if w == INF:
            items = [(e1 + e2, c1 * c2)
                     for e1, c1 in self.terms for e2, c2 in other.terms]
            return TruncSeries.make(self.field, items, w, d)
        # both term lists are sorted, so rows and columns cut off at the window
        items = []
        ot = other.terms
        low2 = ot[0][0] if ot else None
        for e1, c1 in self.terms:
            if low2 is None or e1 + low2 >= w:
                break
            for e2, c2 in ot:
                e = e1 + e2
                if e >= w:
                    break
                items.append((e, c1 * c2))
        return TruncSeries.make(self.field, items, w, d)

    def scale(self, c: FqElem) -> "TruncSeries":
        if c.is_zero():
            return TruncSeries.make(self.field, [], self.window, self.depth)
        return TruncSeries(self.field, tuple((e, x * c) for e, x in self.terms),
                           self.window, self.depth)

    def shift_exp(self, delta) -> "TruncSeries":
        delta = Fraction(delta)
        w = self.window if self.window == INF else self.window + delta
        return TruncSeries.make(self.field,
                                [(e + delta, c) for e, c in self.terms],
                                w, self.depth)

    def __pow__(self, n: int) -> "TruncSeries":
        if n < 0:
            return self.inv() ** (-n)
        out = TruncSeries.from_const(self.field, self.field.one())
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def frobenius_power(self, i: int) -> "TruncSeries":
        """x^(p^i): exponents scale by p^i and coefficients take Frobenius^i."""
        p = self.field.p
        scale = p ** i
        w = self.window if self.window == INF else self.window * scale
        items = []
        for e, c in self.terms:
            x = c
            for _ in range(i):
                x = x.frobenius()
            items.append((e * scale, x))
        return TruncSeries.make(self.field, items, w, self.depth)

    def pth_root(self) -> "TruncSeries":
        """x^(1/p); terms deeper than the depth cap are dropped."""
        p = self.field.p
        w = self.window if self.window == INF else self.window / p
        items = [(e / p, c.frobenius_inv()) for e, c in self.terms]
        return TruncSeries.make(self.field, items, w, self.depth)

    def inv(self) -> "TruncSeries":
        if not self.terms:
            if self.is_exact_zero():
                raise ZeroDivisionError("inverse of the zero series")
            raise WindowError("cannot invert: indistinguishable from zero")
        v0, c0 = self.terms[0]
        unit = self * TruncSeries.monomial(self.field, -v0, c0.inv())
        one = TruncSeries.from_const(self.field, self.field.one())
        u = unit - one
        target = unit.window
        if u.terms and target == INF:
            raise WindowError("inverse of a non-monomial needs a finite window")
        acc = one.clamp(window=target)
        term = one
        neg_u = -u
        for _ in range(_MAX_GEOMETRIC):
            term = (term * neg_u).clamp(window=target)
            if not term.terms:
                acc = acc + term
                break
            acc = acc + term
        else:
            raise BudgetError("geometric inversion did not stabilize")
        return acc * TruncSeries.monomial(self.field, -v0, c0.inv())

    def embed(self, target: Fq) -> "TruncSeries":
        src = self.field
        return TruncSeries(target,
                           tuple((e, src.embed(c, target)) for e, c in self.terms),
                           self.window, self.depth)

    def __eq__(self, other):
        return (isinstance(other, TruncSeries) and self.field == other.field
                and self.terms == other.terms and self.window == other.window
                and self.depth == other.depth)

    def __hash__(self):
        return hash((self.field.key, self.terms, self.window, self.depth))

    def __repr__(self):
        return f"TruncSeries({render_trunc(self)})"


def trunc_arith(op: str, x: TruncSeries, y: TruncSeries | None = None):
    """Dispatcher: add, mul, inv, val."""
    if op == "add":
        return x + y
    if op == "mul":
        return x * y
    if op == "inv":
        return x.inv()
    if op == "val":
        return x.val()
    raise SolveError(f"unknown truncated-series operation {op!r}")


def render_fq(c: FqElem) -> str:
    if c.field.e == 1:
        return str(c.to_int())
    parts = []
    for i, x in enumerate(c.coeffs):
        if x == 0:
            continue
        if i == 0:
            parts.append(str(x))
        else:
            head = "" if x == 1 else str(x) + "*"
            parts.append(f"{head}g" if i == 1 else f"{head}g^{i}")
    return "+".join(parts) if parts else "0"


def _render_power(e: Fraction) -> str:
    if e == 0:
        return ""
    if e == 1:
        return "t"
    if e.denominator == 1 and e > 0:
        return f"t^{e.numerator}"
    return f"t^({e})"


def render_trunc(x: TruncSeries) -> str:
    parts = []
    for e, c in x.terms:
        cs = render_fq(c)
        ps = _render_power(e)
        if not ps:
            parts.append(cs)
        elif cs == "1":
            parts.append(ps)
        elif "+" in cs:
            parts.append(f"({cs})*{ps}")
        else:
            parts.append(f"{cs}*{ps}")
    if x.window != INF:
        tail = f"O(t^({x.window}))" if x.window.denominator != 1 or x.window <= 0 \
            else f"O(t^{x.window})"
        if x.depth != INF:
            tail = tail[:-1] + f"; depth {x.depth})"
        parts.append(tail)
    if not parts:
        return "0"
    return " + ".join(parts)


# ---------------------------------------------------------------------------
# polynomials with truncated-series coefficients


@dataclass(frozen=True, eq=False)
class TruncPoly:
    """Ordinary polynomial in z with TruncSeries coefficients, constant first."""

    field: Fq
    coeffs: tuple[TruncSeries, ...]

    @staticmethod
    def make(field: Fq, coeffs) -> "TruncPoly":
        cs = list(coeffs)
        while cs and cs[-1].is_exact_zero():
            cs.pop()
        return TruncPoly(field, tuple(cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, i: int) -> TruncSeries:
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return TruncSeries.zero(self.field)

    def __add__(self, other: "TruncPoly") -> "TruncPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return TruncPoly.make(self.field,
                              [self.coeff(i) + other.coeff(i) for i in range(n)])

    def __neg__(self) -> "TruncPoly":
        return TruncPoly(self.field, tuple(-c for c in self.coeffs))

    def __sub__(self, other: "TruncPoly") -> "TruncPoly":
        return self + (-other)

    def __mul__(self, other: "TruncPoly") -> "TruncPoly":
        if not self.coeffs or not other.coeffs:
            return TruncPoly(self.field, ())
        out = [TruncSeries.zero(self.field)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return TruncPoly.make(self.field, out)

    def scale(self, s: TruncSeries) -> "TruncPoly":
        return TruncPoly.make(self.field, [c * s for c in self.coeffs])

    def eval(self, z: TruncSeries) -> TruncSeries:
        acc = TruncSeries.zero(self.field)
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def shift_root(self, z0: TruncSeries) -> "TruncPoly":
        """The polynomial w -> P(z0 + w)."""
        zero = TruncPoly(self.field, ())
        lin = TruncPoly.make(self.field, [z0, TruncSeries.from_const(self.field, self.field.one())])
        acc = zero
        for c in reversed(self.coeffs):
            acc = acc * lin + TruncPoly.make(self.field, [c])
        return acc

    def __repr__(self):
        return "TruncPoly([" + ", ".join(render_trunc(c) for c in self.coeffs) + "])"


# ---------------------------------------------------------------------------
# Newton polygons


@dataclass(frozen=True)
class NewtonPolygon:
    """Slope segments of the lower hull of (-i, v(c_i)), slopes increasing;
    a trailing (INF, k) segment reports the order of vanishing at z = 0."""

    segments: tuple

    def slopes(self):
        return [s for s, _ in self.segments]

    def finite_segments(self):
        return [(s, m) for s, m in self.segments if s != INF]

    def __repr__(self):
        return f"NewtonPolygon({list(self.segments)})"


def newton_polygon(P: TruncPoly) -> NewtonPolygon:
    coeffs = P.coeffs
    if not coeffs:
        raise SolveError("zero polynomial has no polygon")
    if not coeffs[-1].terms:
        raise WindowError("leading coefficient indeterminate")
    # order of vanishing at z=0: leading run of exact zeros
    ord0 = 0
    while ord0 < len(coeffs) and coeffs[ord0].is_exact_zero():
        ord0 += 1
    if not coeffs[ord0].terms:
        raise WindowError("trailing coefficient indeterminate within window")
    pts = []      # (x, y) with x = -i, determinate
    bounds = []   # (x, y_lower) for coefficients empty within a finite window
    for i in range(ord0, len(coeffs)):
        c = coeffs[i]
        if c.terms:
            pts.append((-i, c.terms[0][0]))
        elif c.is_exact_zero():
            continue
        else:
            bounds.append((-i, c.window))
    pts.sort()
    hull = _lower_hull(pts)
    for x, y_low in bounds:
        if _hull_height(hull, x) > y_low:
            raise WindowError("polygon indeterminate: a coefficient window is "
                              "below the hull")
    segments = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        slope = Fraction(y2 - y1, x2 - x1)
        segments.append((slope, x2 - x1))
    if ord0 > 0:
        segments.append((INF, ord0))
    return NewtonPolygon(tuple(segments))


def _lower_hull(pts):
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            x3, y3 = pt
            # middle point on or above the chord: not a lower-hull vertex
            if (y2 - y1) * (x3 - x2) >= (y3 - y2) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    return hull


def _hull_height(hull, x):
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        if x1 <= x <= x2:
            return y1 + Fraction(y2 - y1, x2 - x1) * (x - x1)
    return -INF if not hull else INF


# ---------------------------------------------------------------------------
# slope splitting (Hensel along the polygon)


def slope_split(P: TruncPoly, u) -> tuple[TruncPoly, TruncPoly]:
    """Factor P = Q*R with Q monic carrying the slopes below u and R the
    slopes above u; u must not be a slope of P."""
    u = Fraction(u)
    field = P.field
    if not P.coeffs:
        raise SolveError("cannot split the zero polynomial")
    n = P.degree
    best = None
    for i, c in enumerate(P.coeffs):
        if c.terms:
            key = c.terms[0][0] + u * i
            if best is None or key < best[0]:
                best = (key, i, False)
            elif key == best[0]:
                best = (key, i, True)
    if best is None:
        raise WindowError("no determinate coefficient")
    key, e, tie = best
    if tie:
        raise SolveError(f"{u} occurs as a slope of the polygon")
    for i, c in enumerate(P.coeffs):
        if not c.terms and not c.is_exact_zero():
            if c.window + u * i <= key:
                raise WindowError("slope split indeterminate within window")

    ce = P.coeffs[e]
    ce_inv = ce.inv()
    x = {}
    for i, c in enumerate(P.coeffs):
        if c.is_exact_zero():
            continue
        x[i - e] = c * ce_inv
    w0 = min((c.window + u * k for k, c in x.items()), default=INF)

    def cap(k):
        return INF if w0 == INF else w0 - u * k

    def lclamp(d):
        # windows provably never drop below the uniform cap, so termless
        # entries carry nothing beyond the default and are dropped
        out = {}
        for k, c in d.items():
            cc = c.clamp(window=cap(k))
            if cc.terms:
                out[k] = cc
        return out

    def lmul(a, b):
        out = {}
        for ka, ca in a.items():
            for kb, cb in b.items():
                k = ka + kb
                prod = ca * cb
                out[k] = out[k] + prod if k in out else prod
        return lclamp(out)

    def lsub(a, b):
        out = dict(a)
        for k, c in b.items():
            out[k] = out[k] - c if k in out else -c
        return lclamp(out)

    one = TruncSeries.from_const(field, field.one())
    one_d = {0: one}
    x = lclamp(x)
    big_u = dict(one_d)
    for _ in range(_MAX_SPLIT_ROUNDS):
        f = {k: c for k, c in x.items() if k >= 1}
        if not any(c.terms for c in f.values()):
            break
        factor = lsub(one_d, f)
        x = lmul(x, factor)
        big_u = lmul(big_u, factor)
    else:
        raise WindowError("slope splitting did not stabilize within budget")

    # invert U = 1 + g (positive powers, positive twisted valuation)
    g = {k: c for k, c in big_u.items() if k != 0}
    u_inv = dict(one_d)
    pw = dict(one_d)
    for _ in range(_MAX_SPLIT_ROUNDS):
        pw = lmul(pw, {k: -c for k, c in g.items()})
        if not any(c.terms for c in pw.values()):
            break
        for k, c in pw.items():
            u_inv[k] = u_inv[k] + c if k in u_inv else c
        u_inv = lclamp(u_inv)
    else:
        raise WindowError("unit inversion did not stabilize within budget")

    def entry(d, k, capk):
        c = d.get(k)
        if c is None:
            w = INF if capk == INF else capk
            return TruncSeries.make(field, [], w, INF)
        return c.clamp(window=capk)

    # Q_raw = ce * U^{-1}: degree n-e, slopes < u
    q_raw = [entry(u_inv, j, cap(j)) * ce for j in range(n - e + 1)]
    lam = q_raw[-1]
    if not lam.terms:
        raise WindowError("cannot normalize: leading factor coefficient "
                          "indeterminate")
    lam_inv = lam.inv()
    q_coeffs = [c * lam_inv for c in q_raw]
    # R_raw = z^e * x_inf: degree e, slopes > u; absorbs the unit
    r_coeffs = [entry(x, j - e, cap(j - e)) * lam for j in range(e + 1)]
    return TruncPoly.make(field, q_coeffs), TruncPoly.make(field, r_coeffs)


def slope_factorization(P: TruncPoly) -> tuple[int, list]:
    """(k, factors): P = z^k * f_1 * ... * f_m within windows, each f_i pure
    with slopes strictly increasing; factors are (TruncPoly, slope) pairs."""
    field = P.field
    ord0 = 0
    coeffs = list(P.coeffs)
    while ord0 < len(coeffs) and coeffs[ord0].is_exact_zero():
        ord0 += 1
    if ord0 and ord0 < len(coeffs) and not coeffs[ord0].terms:
        raise WindowError("vanishing order indeterminate")
    body = TruncPoly.make(field, coeffs[ord0:])
    factors = []
    while body.degree >= 1:
        poly = newton_polygon(body)
        fins = poly.finite_segments()
        if len(fins) <= 1:
            factors.append((body, fins[0][0] if fins else None))
            break
        s1 = fins[0][0]
        s2 = fins[1][0]
        q, r = slope_split(body, (s1 + s2) / 2)
        factors.append((q, s1))
        body = r
    return ord0, factors


# ---------------------------------------------------------------------------
# twisted polynomials: F*c = c^p * F


@dataclass(frozen=True, eq=False)
class TwistedPoly:
    """Sum of c_i F^i acting as z -> sum c_i z^(p^i)."""

    field: Fq
    coeffs: tuple[TruncSeries, ...]

    @staticmethod
    def make(field: Fq, coeffs) -> "TwistedPoly":
        cs = list(coeffs)
        while cs and cs[-1].is_exact_zero():
            cs.pop()
        return TwistedPoly(field, tuple(cs))

    @staticmethod
    def from_consts(field: Fq, values) -> "TwistedPoly":
        out = []
        for v in values:
            if isinstance(v, TruncSeries):
                out.append(v)
            else:
                out.append(TruncSeries.from_const(field, v))
        return TwistedPoly.make(field, out)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, i: int) -> TruncSeries:
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return TruncSeries.zero(self.field)

    def __add__(self, other: "TwistedPoly") -> "TwistedPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return TwistedPoly.make(self.field,
                                [self.coeff(i) + other.coeff(i) for i in range(n)])

    def __neg__(self) -> "TwistedPoly":
        return TwistedPoly(self.field, tuple(-c for c in self.coeffs))

    def __sub__(self, other: "TwistedPoly") -> "TwistedPoly":
        return self + (-other)

    def embed(self, target: Fq) -> "TwistedPoly":
        return TwistedPoly(target, tuple(c.embed(target) for c in self.coeffs))

    def __repr__(self):
        parts = []
        for i, c in enumerate(self.coeffs):
            if c.is_exact_zero():
                continue
            body = render_trunc(c)
            if i == 0:
                parts.append(body)
            else:
                f = "F" if i == 1 else f"F^{i}"
                parts.append(f if body == "1" else f"({body})*{f}")
        return "TwistedPoly(" + (" + ".join(parts) if parts else "0") + ")"


def twisted_mul(s: TwistedPoly, t: TwistedPoly) -> TwistedPoly:
    field = s.field
    if not s.coeffs or not t.coeffs:
        return TwistedPoly(field, ())
    out = [TruncSeries.zero(field)] * (len(s.coeffs) + len(t.coeffs) - 1)
    for i, c in enumerate(s.coeffs):
        for j, d in enumerate(t.coeffs):
            out[i + j] = out[i + j] + c * d.frobenius_power(i)
    return TwistedPoly.make(field, out)


def twisted_rdiv(s: TwistedPoly, t: TwistedPoly) -> tuple[TwistedPoly, TwistedPoly]:
    """Q, R with S = Q*T + R and deg R < deg T."""
    field = s.field
    if not t.coeffs:
        raise ZeroDivisionError("twisted division by zero")
    d = t.degree
    lead = t.coeffs[-1]
    rem = list(s.coeffs)
    qn = max(0, len(rem) - d)
    q = [TruncSeries.zero(field)] * qn
    while len(rem) - 1 >= d:
        top = rem[-1]
        if not top.terms and not top.is_exact_zero():
            # indeterminate leading remainder: treat as zero within its window
            rem.pop()
            continue
        if top.is_exact_zero():
            rem.pop()
            continue
        k = len(rem) - 1 - d
        qc = top * lead.frobenius_power(k).inv()
        q[k] = q[k] + qc
        for j in range(len(t.coeffs)):
            rem[k + j] = rem[k + j] - qc * t.coeffs[j].frobenius_power(k)
        rem.pop()
    return (TwistedPoly.make(field, q), TwistedPoly.make(field, rem))


def twisted_apply(t: TwistedPoly, z: TruncSeries) -> TruncSeries:
    acc = TruncSeries.zero(t.field)
    for i, c in enumerate(t.coeffs):
        acc = acc + c * z.frobenius_power(i)
    return acc


def twisted_to_ordinary(t: TwistedPoly) -> TruncPoly:
    """The ordinary polynomial sum c_i z^(p^i)."""
    field = t.field
    p = field.p
    if not t.coeffs:
        return TruncPoly(field, ())
    n = p ** t.degree
    out = [TruncSeries.zero(field)] * (n + 1)
    for i, c in enumerate(t.coeffs):
        out[p ** i] = c
    return TruncPoly.make(field, out)


# ---------------------------------------------------------------------------
# splitting twisted polynomials into pure and linear factors


def twisted_pure_split(P: TwistedPoly, mode: str = "pure",
                       max_extension: int = 8) -> tuple[list, Fq]:
    """Factor a monic twisted polynomial into pure factors (product order,
    inner factors rightmost), or into linear factors F - c over a possibly
    extended field in linear mode.  Returns (factors, field)."""
    if mode not in ("pure", "linear"):
        raise SolveError(f"unknown split mode {mode!r}")
    field = P.field
    _require_monic(P)
    m = 0
    while m < len(P.coeffs) and P.coeffs[m].is_exact_zero():
        m += 1
    if m < len(P.coeffs) and not P.coeffs[m].terms:
        raise WindowError("twisted constant coefficient indeterminate")
    body = TwistedPoly.make(field, P.coeffs[m:])
    f_only = TwistedPoly.from_consts(field, [0, 1])
    pures = _split_pure(body)
    tail = [f_only] * m
    if mode == "pure":
        return pures + tail, field
    out = []
    cur_field = field
    for factor in pures:
        lifted = factor.embed(cur_field) if factor.field != cur_field else factor
        linear, cur_field = _split_linear(lifted, max_extension)
        out.extend(linear)
    out = [f.embed(cur_field) if f.field != cur_field else f for f in out]
    tail = [TwistedPoly.from_consts(cur_field, [0, 1])] * m
    return out + tail, cur_field


def _require_monic(P: TwistedPoly):
    if not P.coeffs:
        raise SolveError("zero twisted polynomial")
    lead = P.coeffs[-1]
    if lead.terms != ((Fraction(0), P.field.one()),):
        raise SolveError("twisted polynomial must be monic")


def _split_pure(P: TwistedPoly) -> list:
    """Monic twisted P with invertible constant part -> pure factors, inner
    (highest slope) factors last."""
    field = P.field
    p = field.p
    if P.degree == 0:
        return []
    ordinary = twisted_to_ordinary(P)
    # divide by z: exponents p^i - 1
    reduced = TruncPoly.make(field, ordinary.coeffs[1:])
    poly = newton_polygon(reduced)
    fins = poly.finite_segments()
    if len(fins) <= 1:
        return [P]
    top_slope = fins[-1][0]
    prev_slope = fins[-2][0]
    _, r_part = slope_split(reduced, (prev_slope + top_slope) / 2)
    # R carries the top slope; z * R must be additive: its twisted form
    lifted = TruncPoly.make(field, [TruncSeries.zero(field)] + list(r_part.coeffs))
    inner = _ordinary_to_twisted(lifted)
    quot, rem = twisted_rdiv(P, inner)
    _assert_negligible(rem)
    return _split_pure(quot) + [inner]


def _ordinary_to_twisted(A: TruncPoly) -> TwistedPoly:
    """Read a twisted polynomial off an additive ordinary polynomial; degrees
    that are not p-powers must be invisible within the window."""
    field = A.field
    p = field.p
    n = A.degree
    k = 0
    while p ** k < n:
        k += 1
    if p ** k != n:
        raise SolveError("degree is not a power of p")
    coeffs = []
    for i in range(k + 1):
        coeffs.append(A.coeff(p ** i))
    for j in range(n + 1):
        if j != 0 and not _is_p_power(j, p) and A.coeff(j).terms:
            raise SolveError("polynomial is not additive within its window")
    return TwistedPoly.make(field, coeffs)


def _is_p_power(n: int, p: int) -> bool:
    while n % p == 0:
        n //= p
    return n == 1


def _assert_negligible(rem: TwistedPoly):
    for c in rem.coeffs:
        if c.terms:
            raise SolveError("twisted factor does not divide within the window")


def _split_linear(P: TwistedPoly, max_extension: int) -> tuple[list, Fq]:
    """Refine a monic twisted polynomial with unit constant part into linear
    factors F - c, extending the coefficient field as needed.  Peels the
    highest remaining slope each round, so it never assumes the quotient of a
    pure polynomial stays pure."""
    field = P.field
    out = []
    body = P
    while body.degree >= 1:
        body, factor, field = _peel_linear(body, max_extension)
        out.append(factor)
    out = [f.embed(field) if f.field != field else f for f in out]
    out.reverse()
    return out, field


def _peel_linear(P: TwistedPoly, max_extension: int):
    field = P.field
    p = field.p
    n = P.degree
    ordinary = twisted_to_ordinary(P)
    reduced = TruncPoly.make(field, ordinary.coeffs[1:])
    poly = newton_polygon(reduced)
    fins = poly.finite_segments()
    slope = fins[-1][0]
    level = _support_level(P, slope)
    # supporting-line residues give a constant additive equation; the top
    # slope always touches the constant end, so a_0 is a unit
    a_consts = [P.coeff(i).coeff(level - slope * (p ** i)) for i in range(n + 1)]
    if a_consts[0].is_zero():
        raise SolveError("top slope does not reach the constant coefficient")
    root0, field2 = _constant_additive_root(a_consts, field, max_extension)
    P2 = P.embed(field2) if field2 != field else P
    # substitute z = t^slope * w, normalize by t^level, and Hensel-refine
    coeffs = [TruncSeries.zero(field2)] * (p ** n + 1)
    for i in range(n + 1):
        coeffs[p ** i] = P2.coeff(i).shift_exp(slope * (p ** i) - level)
    a_tilde = TruncPoly.make(field2, coeffs)
    w0 = TruncSeries.from_const(field2, root0)
    shifted = a_tilde.shift_root(w0)
    if not shifted.coeff(0).terms:
        w_root = w0
    else:
        spoly = newton_polygon(shifted)
        pos = [s for s, _ in spoly.finite_segments() if s > 0]
        if not pos:
            raise SolveError("residue root does not refine")
        _, r = slope_split(shifted, min(pos) / 2)
        if r.degree != 1:
            raise SolveError("residue root is not simple")
        delta = r.coeff(0) * r.coeff(1).inv()
        w_root = w0 - delta
    z0 = w_root.shift_exp(slope)
    c_lin = z0 ** (p - 1)
    factor = TwistedPoly.make(field2,
                              [-c_lin, TruncSeries.from_const(field2, field2.one())])
    quot, rem = twisted_rdiv(P2, factor)
    _assert_negligible(rem)
    return quot, factor, field2


def _support_level(P: TwistedPoly, slope: Fraction):
    """min over coefficients of v(c_i) + slope * p^i, the supporting level."""
    p = P.field.p
    best = None
    for i in range(P.degree + 1):
        c = P.coeff(i)
        if c.terms:
            k = c.terms[0][0] + slope * (p ** i)
            if best is None or k < best:
                best = k
    if best is None:
        raise WindowError("no determinate coefficient")
    return best


def _constant_additive_root(a_consts, field: Fq, max_extension: int):
    """Least nonzero root of sum a_i x^(p^i) = 0 in the smallest extension
    where the root count is full."""
    p = field.p
    nz = [i for i, a in enumerate(a_consts) if not a.is_zero()]
    if len(nz) < 2 or nz[0] != 0:
        raise SolveError("degenerate residue equation")
    want = p ** nz[-1]
    for k in range(1, max_extension + 1):
        if field.e * k > 14:
            break
        big = field_make(p, field.e * k)
        lifted = [(i, field.embed(a_consts[i], big)) for i in nz]
        roots = []
        for x in big.elements():
            acc = big.zero()
            xp = x
            at = 0
            for i, a in lifted:
                while at < i:
                    xp = xp.frobenius()
                    at += 1
                acc = acc + a * xp
            if acc.is_zero():
                roots.append(x)
        if len(roots) == want:
            nonzero = [r for r in roots if not r.is_zero()]
            nonzero.sort(key=lambda r: r.to_int())
            return nonzero[0], big
    raise BudgetError("no extension within budget splits the residue equation")
