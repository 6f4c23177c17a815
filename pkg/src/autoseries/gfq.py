"""Finite fields F_q with q = p^e, polynomials over them, and rational functions.

Elements of F_q are coefficient vectors over F_p in the power basis of a fixed
monic irreducible modulus, constant term first.  The modulus for (p, e) is the
least monic irreducible of degree e in the integer encoding sum(c_i * p^i), so
every (p, e) names one canonical field and fields compare by (p, e, modulus).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

from .errors import BudgetError, AutoseriesError

FIELD_SIZE_CAP = 1 << 20


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


# ---------------------------------------------------------------------------
# dense polynomials over F_p as int tuples, constant first, no trailing zeros


def _pp_trim(c: list[int]) -> tuple[int, ...]:
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _pp_add(a, b, p):
    n = max(len(a), len(b))
    return _pp_trim([((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)) % p
                     for i in range(n)])


def _pp_scale(a, k, p):
    return _pp_trim([x * k % p for x in a])


def _pp_mul(a, b, p):
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _pp_trim(out)


def _pp_divmod(a, b, p):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    q = [0] * max(0, len(a) - len(b) + 1)
    inv_lead = pow(b[-1], p - 2, p)
    while len(a) >= len(b):
        if a[-1] == 0:
            a.pop()
            continue
        k = (len(a) - len(b))
        c = a[-1] * inv_lead % p
        q[k] = c
        for i, y in enumerate(b):
            a[k + i] = (a[k + i] - c * y) % p
        a.pop()
    return _pp_trim(q), _pp_trim(a)


def _pp_irreducible(f, p) -> bool:
    # trial division by every monic polynomial of degree 1..deg(f)//2
    deg = len(f) - 1
    for d in range(1, deg // 2 + 1):
        for n in range(p ** d):
            cand = _int_digits(n, p, d) + (1,)
            if not _pp_divmod(f, cand, p)[1]:
                return False
    return True


def _int_digits(n: int, p: int, width: int) -> tuple[int, ...]:
    out = []
    for _ in range(width):
        out.append(n % p)
        n //= p
    return tuple(out)


def _digits_int(digits, p: int) -> int:
    n = 0
    for d in reversed(digits):
        n = n * p + d
    return n


# ---------------------------------------------------------------------------


class Fq:
    """The finite field F_{p^e} with its canonical modulus."""

    def __init__(self, p: int, e: int, modulus: tuple[int, ...]):
        self.p = p
        self.e = e
        self.q = p ** e
        self.modulus = modulus
        self.key = (p, e, modulus)
        self._zero = FqElem(self, (0,) * e)
        self._one = FqElem(self, (1,) + (0,) * (e - 1))
        self._add_table = None
        self._mul_table = None

    def __repr__(self):
        return f"Fq(p={self.p}, e={self.e})"

    def __eq__(self, other):
        return isinstance(other, Fq) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    # construction ---------------------------------------------------------

    def zero(self) -> FqElem:
        return self._zero

    def one(self) -> FqElem:
        return self._one

    def gen(self) -> FqElem:
        """The power basis generator (the class of x), equal to one() when e = 1."""
        if self.e == 1:
            return self._one
        return FqElem(self, (0, 1) + (0,) * (self.e - 2))

    def elem(self, coeffs) -> FqElem:
        c = tuple(int(x) % self.p for x in coeffs)
        if len(c) != self.e:
            raise AutoseriesError(f"need {self.e} coefficients, got {len(c)}")
        return FqElem(self, c)

    def from_int(self, n: int) -> FqElem:
        """Element with integer encoding n = sum(c_i p^i)."""
        if not 0 <= n < self.q:
            n %= self.q
        return FqElem(self, _int_digits(n, self.p, self.e))

    def elements(self):
        """All field elements in integer-encoding order."""
        return [self.from_int(n) for n in range(self.q)]

    # arithmetic -----------------------------------------------------------

    def _ensure_tables(self):
        # interned operation tables; q stays tiny in practice
        els = [FqElem(self, _int_digits(n, self.p, self.e))
               for n in range(self.q)]
        p = self.p
        add = {}
        mul = {}
        for a in els:
            arow_add = {}
            arow_mul = {}
            for b in els:
                s = tuple((x + y) % p for x, y in zip(a.coeffs, b.coeffs))
                arow_add[b.coeffs] = els[_digits_int(s, p)]
                prod = _pp_mul(a.coeffs, b.coeffs, p)
                _, rem = _pp_divmod(prod, self.modulus, p)
                rem = rem + (0,) * (self.e - len(rem))
                arow_mul[b.coeffs] = els[_digits_int(rem, p)]
            add[a.coeffs] = arow_add
            mul[a.coeffs] = arow_mul
        neg = {}
        for a in els:
            nc = tuple(-x % p for x in a.coeffs)
            neg[a.coeffs] = els[_digits_int(nc, p)]
        self._add_table = add
        self._mul_table = mul
        self._neg_table = neg

    def add(self, a: FqElem, b: FqElem) -> FqElem:
        if self._add_table is None:
            if self.q <= 256:
                self._ensure_tables()
            else:
                p = self.p
                return FqElem(self, tuple((x + y) % p
                                          for x, y in zip(a.coeffs, b.coeffs)))
        return self._add_table[a.coeffs][b.coeffs]

    def sub(self, a: FqElem, b: FqElem) -> FqElem:
        return self.add(a, self.neg(b))

    def neg(self, a: FqElem) -> FqElem:
        if self._add_table is not None:
            return self._neg_table[a.coeffs]
        p = self.p
        return FqElem(self, tuple(-x % p for x in a.coeffs))

    def mul(self, a: FqElem, b: FqElem) -> FqElem:
        if self._mul_table is None:
            if self.q <= 256:
                self._ensure_tables()
            else:
                prod = _pp_mul(a.coeffs, b.coeffs, self.p)
                _, rem = _pp_divmod(prod, self.modulus, self.p)
                return FqElem(self, rem + (0,) * (self.e - len(rem)))
        return self._mul_table[a.coeffs][b.coeffs]

    def inv(self, a: FqElem) -> FqElem:
        if a.is_zero():
            raise ZeroDivisionError("inverse of zero in F_q")
        # extended Euclid in F_p[x] against the modulus
        p = self.p
        r0, r1 = self.modulus, _pp_trim(list(a.coeffs))
        s0, s1 = (), (1,)
        while r1:
            q, r = _pp_divmod(r0, r1, p)
            r0, r1 = r1, r
            s0, s1 = s1, _pp_add(s0, _pp_scale(_pp_mul(q, s1, p), p - 1, p), p)
        lead_inv = pow(r0[-1], p - 2, p)
        s0 = _pp_scale(s0, lead_inv, p)
        return FqElem(self, s0 + (0,) * (self.e - len(s0)))

    def frobenius(self, a: FqElem) -> FqElem:
        return a ** self.p

    def frobenius_inv(self, a: FqElem) -> FqElem:
        out = a
        for _ in range(self.e - 1):
            out = self.frobenius(out)
        return out

    # embedding ------------------------------------------------------------

    def embed(self, a: FqElem, target: "Fq") -> FqElem:
        """Image of a under the canonical embedding F_{p^e} -> F_{p^(e*k)}.

        The embedding sends the power basis generator to the least root (in
        integer encoding order) of this field's modulus in the target field.
        """
        if a.field is not self and a.field != self:
            raise AutoseriesError("element not in this field")
        if target == self:
            return a
        root = _embedding_root(self.key, target.key)
        root = FqElem(target, root)
        out = target.zero()
        for c in reversed(a.coeffs):
            out = out * root + target.from_int(c)
        return out


@functools.lru_cache(maxsize=None)
def _embedding_root(src_key, tgt_key) -> tuple[int, ...]:
    p, e, modulus = src_key
    tp, te, _ = tgt_key
    if tp != p or te % e != 0:
        raise AutoseriesError(f"no embedding of F_{p}^{e} into F_{tp}^{te}")
    tgt = field_make(tp, te)
    for n in range(tgt.q):
        x = tgt.from_int(n)
        acc = tgt.zero()
        for c in reversed(modulus):
            acc = acc * x + tgt.from_int(c)
        if acc.is_zero():
            return x.coeffs
    raise AutoseriesError("modulus has no root in target field")  # unreachable


@dataclass(frozen=True, eq=False)
class FqElem:
    """An element of F_q, immutable and hashable."""

    field: Fq
    coeffs: tuple[int, ...]

    def __eq__(self, other):
        return (isinstance(other, FqElem) and self.field.key == other.field.key
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.field.key, self.coeffs))

    def __repr__(self):
        return f"FqElem({self.to_int()} in GF({self.field.q}))"

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def to_int(self) -> int:
        n = 0
        for c in reversed(self.coeffs):
            n = n * self.field.p + c
        return n

    def inv(self) -> "FqElem":
        return self.field.inv(self)

    def frobenius(self) -> "FqElem":
        return self.field.frobenius(self)

    def frobenius_inv(self) -> "FqElem":
        return self.field.frobenius_inv(self)

    def __add__(self, other):
        return self.field.add(self, other)

    def __sub__(self, other):
        return self.field.sub(self, other)

    def __neg__(self):
        return self.field.neg(self)

    def __mul__(self, other):
        return self.field.mul(self, other)

    def __truediv__(self, other):
        return self.field.mul(self, self.field.inv(other))

    def __pow__(self, n: int):
        if n < 0:
            return self.field.inv(self) ** (-n)
        out = self.field.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out


@functools.lru_cache(maxsize=None)
def field_make(p: int, e: int) -> Fq:
    """The canonical F_{p^e}: least monic irreducible modulus in integer encoding."""
    if not _is_prime(p):
        raise AutoseriesError(f"p = {p} is not prime")
    if e < 1:
        raise AutoseriesError(f"extension degree must be positive, got {e}")
    if p ** e > FIELD_SIZE_CAP:
        raise BudgetError(f"field size {p}^{e} exceeds cap {FIELD_SIZE_CAP}")
    if e == 1:
        return Fq(p, 1, (0, 1))
    for n in range(p ** e):
        cand = _int_digits(n, p, e) + (1,)
        if _pp_irreducible(cand, p):
            return Fq(p, e, cand)
    raise AutoseriesError("no irreducible modulus found")  # unreachable


# ---------------------------------------------------------------------------
# polynomials over F_q


@dataclass(frozen=True, eq=False)
class PolyFq:
    """Polynomial over F_q, coefficient tuple with constant term first."""

    field: Fq
    coeffs: tuple[FqElem, ...]

    @staticmethod
    def make(field: Fq, coeffs) -> "PolyFq":
        cs = [c if isinstance(c, FqElem) else field.from_int(int(c)) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        return PolyFq(field, tuple(cs))

    @staticmethod
    def t(field: Fq) -> "PolyFq":
        return PolyFq.make(field, [0, 1])

    def __eq__(self, other):
        return (isinstance(other, PolyFq) and self.field.key == other.field.key
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.field.key, self.coeffs))

    def __repr__(self):
        return f"PolyFq({[c.to_int() for c in self.coeffs]})"

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def leading(self) -> FqElem:
        if self.is_zero():
            raise AutoseriesError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __add__(self, other):
        f = self.field
        n = max(len(self.coeffs), len(other.coeffs))
        z = f.zero()
        out = [(self.coeffs[i] if i < len(self.coeffs) else z) +
               (other.coeffs[i] if i < len(other.coeffs) else z) for i in range(n)]
        return PolyFq.make(f, out)

    def __neg__(self):
        return PolyFq.make(self.field, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        f = self.field
        if self.is_zero() or other.is_zero():
            return PolyFq(f, ())
        out = [f.zero()] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            if x.is_zero():
                continue
            for j, y in enumerate(other.coeffs):
                out[i + j] = out[i + j] + x * y
        return PolyFq.make(f, out)

    def scale(self, c: FqElem) -> "PolyFq":
        return PolyFq.make(self.field, [x * c for x in self.coeffs])

    def monic(self) -> "PolyFq":
        if self.is_zero():
            return self
        return self.scale(self.field.inv(self.leading()))

    def shift(self, k: int) -> "PolyFq":
        """Multiply by t^k, k >= 0."""
        if self.is_zero():
            return self
        return PolyFq(self.field, (self.field.zero(),) * k + self.coeffs)

    def eval(self, x: FqElem) -> FqElem:
        acc = self.field.zero()
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "PolyFq":
        f = self.field
        out = []
        for i in range(1, len(self.coeffs)):
            out.append(self.coeffs[i] * f.from_int(i % f.p))
        return PolyFq.make(f, out)

    def map_coeffs(self, fn) -> "PolyFq":
        return PolyFq.make(self.field, [fn(c) for c in self.coeffs])


def poly_divmod(a: PolyFq, b: PolyFq) -> tuple[PolyFq, PolyFq]:
    """Quotient and remainder of polynomial division over F_q."""
    f = a.field
    if b.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(a.coeffs)
    q = [f.zero()] * max(0, len(rem) - len(b.coeffs) + 1)
    inv_lead = f.inv(b.leading())
    while len(rem) >= len(b.coeffs):
        if rem[-1].is_zero():
            rem.pop()
            continue
        k = len(rem) - len(b.coeffs)
        c = rem[-1] * inv_lead
        q[k] = c
        for i, y in enumerate(b.coeffs):
            rem[k + i] = rem[k + i] - c * y
        rem.pop()
    return PolyFq.make(f, q), PolyFq.make(f, rem)


def poly_gcd(a: PolyFq, b: PolyFq) -> PolyFq:
    """Monic gcd over F_q."""
    while not b.is_zero():
        a, b = b, poly_divmod(a, b)[1]
    return a.monic()


# ---------------------------------------------------------------------------
# rational functions over F_q


@dataclass(frozen=True, eq=False)
class RatFun:
    """Element of F_q(t), stored as num/den with den monic and gcd 1."""

    num: PolyFq
    den: PolyFq

    @staticmethod
    def make(num: PolyFq, den: PolyFq) -> "RatFun":
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            return RatFun(num, PolyFq.make(num.field, [1]))
        g = poly_gcd(num, den)
        if g.degree() > 0:
            num = poly_divmod(num, g)[0]
            den = poly_divmod(den, g)[0]
        lead = den.leading()
        if lead != den.field.one():
            inv = den.field.inv(lead)
            num = num.scale(inv)
            den = den.scale(inv)
        return RatFun(num, den)

    @staticmethod
    def from_poly(pol: PolyFq) -> "RatFun":
        return RatFun(pol, PolyFq.make(pol.field, [1]))

    @staticmethod
    def constant(field: Fq, c) -> "RatFun":
        c = c if isinstance(c, FqElem) else field.from_int(int(c))
        return RatFun.from_poly(PolyFq.make(field, [c]))

    @staticmethod
    def t(field: Fq) -> "RatFun":
        return RatFun.from_poly(PolyFq.t(field))

    @property
    def field(self) -> Fq:
        return self.num.field

    def __eq__(self, other):
        return (isinstance(other, RatFun) and self.num == other.num
                and self.den == other.den)

    def __hash__(self):
        return hash((self.num, self.den))

    def __repr__(self):
        return f"RatFun({self.num!r}/{self.den!r})"

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __add__(self, other):
        return RatFun.make(self.num * other.den + other.num * self.den,
                           self.den * other.den)

    def __neg__(self):
        return RatFun(-self.num, self.den)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        return RatFun.make(self.num * other.num, self.den * other.den)

    def __truediv__(self, other):
        if other.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RatFun.make(self.num * other.den, self.den * other.num)

    def map_coeffs(self, fn) -> "RatFun":
        return RatFun.make(self.num.map_coeffs(fn), self.den.map_coeffs(fn))
