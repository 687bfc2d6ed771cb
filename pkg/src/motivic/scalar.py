"""Scalars: F_q, F_q[θ], F_q(θ) and the completion K_∞ = F_q((1/θ)).

Every element is immutable.  Polynomials store their coefficients in a
kernel-native form (see ``_kernels``); ``coeffs`` exposes them as
``FqElement`` lists.  Laurent series are u^v·P(u) + O(u^N) with u = 1/θ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

from ._kernels import Gf2Kernel, TupleKernel, poly_gcd, series_inverse
from .errors import NegativeTwist, PrecisionExhausted

INF = math.inf

# Small irreducible moduli, ascending coefficients over F_p, keyed by (p, r).
MODULI = {
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (2, 5): (1, 0, 1, 0, 0, 1),
    (2, 6): (1, 1, 0, 0, 0, 0, 1),
    (2, 7): (1, 1, 0, 0, 0, 0, 0, 1),
    (2, 8): (1, 0, 1, 1, 1, 0, 0, 0, 1),
    (3, 2): (1, 0, 1),
    (3, 3): (1, 2, 0, 1),
    (3, 4): (2, 0, 0, 1, 1),
    (3, 5): (1, 2, 0, 0, 0, 1),
    (5, 2): (2, 0, 1),
    (5, 3): (1, 1, 0, 1),
    (7, 2): (1, 0, 1),
}


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


def prime_power(q: int):
    """Return (p, r) with q = p^r, or None."""
    if q < 2:
        return None
    for p in range(2, q + 1):
        if q % p == 0:
            if not is_prime(p):
                return None
            r, m = 0, q
            while m % p == 0:
                m //= p
                r += 1
            return (p, r) if m == 1 else None
    return None


def _fp_poly_mod(a, b, p):
    a = list(a)
    inv = pow(b[-1], p - 2, p)
    while len(a) >= len(b):
        c = a[-1] * inv % p
        off = len(a) - len(b)
        for j, y in enumerate(b):
            a[off + j] = (a[off + j] - c * y) % p
        while a and a[-1] == 0:
            a.pop()
    return a


def _irreducible(poly, p):
    r = len(poly) - 1
    for deg in range(1, r // 2 + 1):
        for tail in range(p ** deg):
            cand = [(tail // p ** k) % p for k in range(deg)] + [1]
            if not _fp_poly_mod(poly, cand, p):
                return False
    return True


def lucas_binomial(m: int, j: int, p: int) -> int:
    """C(m, j) mod p, digit by digit in base p."""
    if j < 0 or m < 0 or j > m:
        return 0
    out = 1
    while m or j:
        mi, ji = m % p, j % p
        if ji > mi:
            return 0
        out = out * math.comb(mi, ji) % p
        m //= p
        j //= p
    return out


class FqContext:
    """The finite field F_q, q = p^r, with lookup tables.

    Elements are integer codes: for r > 1 the code of Σ c_i x^i is Σ c_i p^i.
    """

    def __init__(self, p: int, r: int = 1, modulus=None, bound: int = 256):
        if not is_prime(p):
            raise ValueError(f"p={p} is not prime")
        if r < 1:
            raise ValueError("extension degree must be >= 1")
        q = p ** r
        if q > bound:
            raise ValueError(f"q={q} exceeds the configured bound {bound}")
        self.p, self.r, self.q = p, r, q
        if r == 1:
            self.modulus = None
        else:
            mod = tuple(modulus) if modulus is not None else MODULI.get((p, r))
            if mod is None:
                mod = self._search_modulus(p, r)
            mod = tuple(int(c) % p for c in mod)
            if len(mod) != r + 1 or mod[-1] != 1:
                raise ValueError("modulus must be monic of degree r")
            if not _irreducible(mod, p):
                raise ValueError(f"modulus {mod} is reducible over F_{p}")
            self.modulus = mod
        self._build_tables()
        self.kernel = Gf2Kernel() if q == 2 else TupleKernel(self)

    @classmethod
    def from_q(cls, q: int, bound: int = 256):
        pr = prime_power(q)
        if pr is None:
            raise ValueError(f"q={q} is not a prime power")
        return cls(pr[0], pr[1], bound=max(bound, q))

    @staticmethod
    def _search_modulus(p, r):
        for tail in range(p ** r):
            cand = tuple((tail // p ** k) % p for k in range(r)) + (1,)
            if cand[0] and _irreducible(cand, p):
                return cand
        raise ValueError("no irreducible polynomial found")

    def _digits(self, code):
        return [(code // self.p ** k) % self.p for k in range(self.r)]

    def _code(self, digits):
        return sum((d % self.p) * self.p ** k for k, d in enumerate(digits))

    def _build_tables(self):
        q, p = self.q, self.p
        if self.r == 1:
            self._add = [[(a + b) % p for b in range(q)] for a in range(q)]
            self._mul = [[(a * b) % p for b in range(q)] for a in range(q)]
        else:
            digits = [self._digits(c) for c in range(q)]
            self._add = [[self._code([x + y for x, y in zip(digits[a], digits[b])])
                          for b in range(q)] for a in range(q)]
            self._mul = [[0] * q for _ in range(q)]
            for a in range(q):
                for b in range(a, q):
                    prod = [0] * (2 * self.r - 1)
                    for i, x in enumerate(digits[a]):
                        for j, y in enumerate(digits[b]):
                            prod[i + j] += x * y
                    red = _fp_poly_mod([c % p for c in prod], self.modulus, p) if any(prod) else []
                    self._mul[a][b] = self._mul[b][a] = self._code(red)
        self._neg = [next(b for b in range(q) if self._add[a][b] == 0) for a in range(q)]
        self._inv = [0] + [next(b for b in range(1, q) if self._mul[a][b] == 1)
                           for a in range(1, q)]

    # -- element helpers --------------------------------------------
    def code(self, x) -> int:
        """Convert int / FqElement / F_p vector to a field code."""
        if isinstance(x, FqElement):
            if x.ctx != self:
                raise ValueError("element from a different field")
            return x.code
        if isinstance(x, (list, tuple)):
            if len(x) > self.r:
                raise ValueError("coefficient vector too long")
            return self._code(list(x) + [0] * (self.r - len(x)))
        return int(x) % self.p

    def element(self, x) -> "FqElement":
        return FqElement(self, self.code(x))

    def elements(self):
        return [FqElement(self, c) for c in range(self.q)]

    def add(self, a, b):
        return self._add[a][b]

    def mul(self, a, b):
        return self._mul[a][b]

    def neg(self, a):
        return self._neg[a]

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero in F_q")
        return self._inv[a]

    def code_to_json(self, c):
        return c if self.r == 1 else self._digits(c)

    def to_json(self):
        return {"p": self.p, "r": self.r, "q": self.q,
                "modulus": list(self.modulus) if self.modulus else None}

    def _key(self):
        return (self.p, self.r, self.modulus)

    def __eq__(self, other):
        return isinstance(other, FqContext) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"FqContext(q={self.q})"

    # convenient constructors
    def theta(self) -> "ThetaPoly":
        return ThetaPoly._raw(self, self.kernel.monomial(1, 1))

    def const(self, c) -> "ThetaPoly":
        return ThetaPoly._raw(self, self.kernel.monomial(self.code(c), 0))


@dataclass(frozen=True)
class FqElement:
    ctx: FqContext = field(compare=False)
    code: int

    def __post_init__(self):
        if not 0 <= self.code < self.ctx.q:
            raise ValueError("code out of range")

    @property
    def repr(self):
        return self.ctx._digits(self.code)

    def _other(self, o):
        return o.code if isinstance(o, FqElement) else self.ctx.code(o)

    def __add__(self, o):
        return FqElement(self.ctx, self.ctx.add(self.code, self._other(o)))

    __radd__ = __add__

    def __neg__(self):
        return FqElement(self.ctx, self.ctx.neg(self.code))

    def __sub__(self, o):
        return FqElement(self.ctx, self.ctx.add(self.code, self.ctx.neg(self._other(o))))

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        return FqElement(self.ctx, self.ctx.mul(self.code, self._other(o)))

    __rmul__ = __mul__

    def inverse(self):
        return FqElement(self.ctx, self.ctx.inv(self.code))

    def __truediv__(self, o):
        return self * FqElement(self.ctx, self.ctx.inv(self._other(o)))

    def __pow__(self, k):
        out = FqElement(self.ctx, 1)
        base = self if k >= 0 else self.inverse()
        for _ in range(abs(k)):
            out = out * base
        return out

    def __bool__(self):
        return self.code != 0

    def __eq__(self, o):
        if isinstance(o, FqElement):
            return self.ctx == o.ctx and self.code == o.code
        if isinstance(o, int):
            return self.code == self.ctx.code(o)
        return NotImplemented

    def __hash__(self):
        return hash(("Fq", self.code))

    def __repr__(self):
        return str(self.ctx.code_to_json(self.code))


def _check_twist(i):
    if i < 0:
        raise NegativeTwist(f"negative Frobenius twist {i} requested")


# ---------------------------------------------------------------------------
# ThetaPoly
# ---------------------------------------------------------------------------


def _fmt_poly(ctx, coeffs, var):
    terms = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if not c:
            continue
        cs = str(ctx.code_to_json(c))
        if k == 0:
            terms.append(cs)
            continue
        mono = var if k == 1 else f"{var}^{k}"
        terms.append(mono if cs == "1" else f"{cs}*{mono}")
    return " + ".join(terms) if terms else "0"


class ThetaPoly:
    """Polynomial in θ over F_q."""

    __slots__ = ("ctx", "data", "_hash")

    def __init__(self, ctx: FqContext, coeffs=()):
        self.ctx = ctx
        self.data = ctx.kernel.from_list([ctx.code(c) for c in coeffs])
        self._hash = None

    @classmethod
    def _raw(cls, ctx, data):
        obj = cls.__new__(cls)
        obj.ctx = ctx
        obj.data = data
        obj._hash = None
        return obj

    # -- introspection ------------------------------------------------
    @property
    def coeffs(self):
        return [FqElement(self.ctx, c) for c in self.ctx.kernel.to_list(self.data)]

    def codes(self):
        return self.ctx.kernel.to_list(self.data)

    def degree(self) -> int:
        """Degree in θ; -1 for zero."""
        return self.ctx.kernel.degree(self.data)

    def is_zero(self):
        return self.ctx.kernel.is_zero(self.data)

    def is_one(self):
        return self.data == self.ctx.kernel.one

    def lead(self) -> int:
        return self.ctx.kernel.lead(self.data)

    def valuation(self):
        """u-adic valuation, i.e. minus the θ-degree."""
        return INF if self.is_zero() else -self.degree()

    def norm(self) -> float:
        return 0.0 if self.is_zero() else float(self.ctx.q) ** self.degree()

    # -- arithmetic -----------------------------------------------------
    def _coerce(self, o):
        if isinstance(o, ThetaPoly):
            return o
        if isinstance(o, (int, FqElement)):
            return self.ctx.const(o)
        return None

    def __add__(self, o):
        c = self._coerce(o)
        if c is None:
            return NotImplemented
        return ThetaPoly._raw(self.ctx, self.ctx.kernel.add(self.data, c.data))

    __radd__ = __add__

    def __neg__(self):
        return ThetaPoly._raw(self.ctx, self.ctx.kernel.neg(self.data))

    def __sub__(self, o):
        c = self._coerce(o)
        if c is None:
            return NotImplemented
        return ThetaPoly._raw(self.ctx, self.ctx.kernel.sub(self.data, c.data))

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        c = self._coerce(o)
        if c is None:
            return NotImplemented
        return ThetaPoly._raw(self.ctx, self.ctx.kernel.mul(self.data, c.data))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return RatFunc(self.ctx.const(1), self) ** (-k)
        out, base = self.ctx.const(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __divmod__(self, o):
        c = self._coerce(o)
        qd, rd = self.ctx.kernel.divmod(self.data, c.data)
        return ThetaPoly._raw(self.ctx, qd), ThetaPoly._raw(self.ctx, rd)

    def __floordiv__(self, o):
        return divmod(self, o)[0]

    def __mod__(self, o):
        return divmod(self, o)[1]

    def __truediv__(self, o):
        if isinstance(o, (ThetaPoly, int, FqElement)):
            return RatFunc(self, self._coerce(o))
        return NotImplemented

    def __rtruediv__(self, o):
        return RatFunc(self._coerce(o), self)

    def exact_div(self, o):
        quo, rem = divmod(self, o)
        if not rem.is_zero():
            raise ArithmeticError("inexact polynomial division")
        return quo

    def monic(self):
        if self.is_zero():
            return self
        inv = self.ctx.inv(self.lead())
        return ThetaPoly._raw(self.ctx, self.ctx.kernel.scale(inv, self.data))

    def scale_code(self, c):
        return ThetaPoly._raw(self.ctx, self.ctx.kernel.scale(c, self.data))

    def twist(self, i: int = 1):
        _check_twist(i)
        if i == 0:
            return self
        return ThetaPoly._raw(self.ctx, self.ctx.kernel.spread(self.data, self.ctx.q ** i))

    def eval_code(self, c: int) -> int:
        return self.ctx.kernel.eval_code(self.data, c)

    def __call__(self, x):
        """Evaluate at a scalar x (Horner); the result has x's kind."""
        acc = x * 0
        for c in reversed(self.codes()):
            acc = acc * x + FqElement(self.ctx, c)
        return acc

    # -- comparison / output -------------------------------------------
    def __eq__(self, o):
        if isinstance(o, ThetaPoly):
            return self.ctx == o.ctx and self.data == o.data
        if isinstance(o, (int, FqElement)):
            return self.data == self._coerce(o).data
        if isinstance(o, RatFunc):
            return o == self
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("poly", self.data))
        return self._hash

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        return _fmt_poly(self.ctx, self.codes(), "θ")

    def to_json(self):
        return [self.ctx.code_to_json(c) for c in self.codes()]

    @classmethod
    def from_json(cls, ctx, data):
        return cls(ctx, data)


def poly_gcd_theta(a: ThetaPoly, b: ThetaPoly) -> ThetaPoly:
    return ThetaPoly._raw(a.ctx, poly_gcd(a.ctx.kernel, a.data, b.data)).monic()


# ---------------------------------------------------------------------------
# RatFunc
# ---------------------------------------------------------------------------


class RatFunc:
    """Reduced fraction num/den in F_q(θ) with den monic."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=None):
        if not isinstance(num, ThetaPoly):
            raise TypeError("numerator must be a ThetaPoly")
        ctx = num.ctx
        if den is None:
            den = ctx.const(1)
        elif not isinstance(den, ThetaPoly):
            den = ctx.const(den)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if num.is_zero():
            self.num, self.den = num, ctx.const(1)
        else:
            g = poly_gcd_theta(num, den)
            if not g.is_one():
                num, den = num.exact_div(g), den.exact_div(g)
            lc = den.lead()
            if lc != 1:
                inv = ctx.inv(lc)
                num, den = num.scale_code(inv), den.scale_code(inv)
            self.num, self.den = num, den
        self._hash = None

    @classmethod
    def _raw(cls, num, den):
        obj = cls.__new__(cls)
        obj.num, obj.den, obj._hash = num, den, None
        return obj

    @classmethod
    def lift(cls, x, ctx=None):
        if isinstance(x, RatFunc):
            return x
        if isinstance(x, ThetaPoly):
            return cls._raw(x, x.ctx.const(1))
        if ctx is None:
            raise TypeError("cannot lift without a context")
        return cls._raw(ctx.const(x), ctx.const(1))

    @property
    def ctx(self):
        return self.num.ctx

    def is_zero(self):
        return self.num.is_zero()

    def is_polynomial(self):
        return self.den.is_one()

    def valuation(self):
        return INF if self.is_zero() else self.den.degree() - self.num.degree()

    def norm(self):
        return 0.0 if self.is_zero() else float(self.ctx.q) ** (-self.valuation())

    def _coerce(self, o):
        if isinstance(o, RatFunc):
            return o
        if isinstance(o, ThetaPoly):
            return RatFunc._raw(o, o.ctx.const(1))
        if isinstance(o, (int, FqElement)):
            return RatFunc._raw(self.ctx.const(o), self.ctx.const(1))
        return None

    def __add__(self, o):
        c = self._coerce(o)
        if c is None:
            return NotImplemented
        if self.den == c.den:
            return RatFunc(self.num + c.num, self.den)
        if self.den.is_one():
            return RatFunc._raw(self.num * c.den + c.num, c.den)
        if c.den.is_one():
            return RatFunc._raw(self.num + c.num * self.den, self.den)
        g = poly_gcd_theta(self.den, c.den)
        if g.is_one():
            return RatFunc._raw(self.num * c.den + c.num * self.den, self.den * c.den)
        b1 = self.den.exact_div(g)
        d1 = c.den.exact_div(g)
        return RatFunc(self.num * d1 + c.num * b1, b1 * c.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc._raw(-self.num, self.den)

    def __sub__(self, o):
        c = self._coerce(o)
        if c is None:
            return NotImplemented
        return self + (-c)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        c = self._coerce(o)
        if c is None:
            return NotImplemented
        if self.is_zero() or c.is_zero():
            return RatFunc._raw(self.ctx.const(0), self.ctx.const(1))
        g1 = poly_gcd_theta(self.num, c.den)
        g2 = poly_gcd_theta(c.num, self.den)
        n1 = self.num if g1.is_one() else self.num.exact_div(g1)
        d2 = c.den if g1.is_one() else c.den.exact_div(g1)
        n2 = c.num if g2.is_one() else c.num.exact_div(g2)
        d1 = self.den if g2.is_one() else self.den.exact_div(g2)
        num, den = n1 * n2, d1 * d2
        lc = den.lead()
        if lc != 1:
            inv = self.ctx.inv(lc)
            num, den = num.scale_code(inv), den.scale_code(inv)
        return RatFunc._raw(num, den)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        lc = self.num.lead()
        inv = self.ctx.inv(lc)
        return RatFunc._raw(self.den.scale_code(inv), self.num.scale_code(inv))

    def __truediv__(self, o):
        c = self._coerce(o)
        if c is None:
            return NotImplemented
        return self * c.inverse()

    def __rtruediv__(self, o):
        return self.inverse() * o

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        return RatFunc._raw(self.num ** k, self.den ** k)

    def twist(self, i: int = 1):
        _check_twist(i)
        if i == 0:
            return self
        # Frobenius is injective on F_q[θ], so reduced fractions stay reduced.
        return RatFunc._raw(self.num.twist(i), self.den.twist(i))

    def to_laurent(self, precision):
        return LaurentSeries.from_ratfunc(self, precision)

    def __eq__(self, o):
        c = self._coerce(o) if not isinstance(o, LaurentSeries) else None
        if c is None:
            return NotImplemented
        return self.num == c.num and self.den == c.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.num) if self.den.is_one() else hash((self.num, self.den))
        return self._hash

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        if self.den.is_one():
            return repr(self.num)
        return f"({self.num!r})/({self.den!r})"

    def to_json(self):
        return {"num": self.num.to_json(), "den": self.den.to_json()}

    @classmethod
    def from_json(cls, ctx, data):
        return cls(ThetaPoly(ctx, data["num"]), ThetaPoly(ctx, data["den"]))


# ---------------------------------------------------------------------------
# LaurentSeries in u = 1/θ
# ---------------------------------------------------------------------------


class LaurentSeries:
    """u^val·P(u) + O(u^prec); ``prec`` is INF for exact elements."""

    __slots__ = ("ctx", "val", "data", "prec")

    def __init__(self, ctx, valuation, coeffs, precision=INF):
        """Public constructor: coefficients of u^valuation, u^(valuation+1), ..."""
        k = ctx.kernel
        data = k.from_list([ctx.code(c) for c in coeffs])
        self._set(ctx, valuation, data, precision)

    def _set(self, ctx, val, data, prec):
        k = ctx.kernel
        self.ctx = ctx
        if k.is_zero(data):
            self.val, self.data, self.prec = prec, k.zero, prec
            return
        lo = k.low(data)
        if lo:
            data = k.shift(data, -lo)
            val += lo
        if prec != INF:
            if val >= prec:
                self.val, self.data, self.prec = prec, k.zero, prec
                return
            data = k.trunc(data, prec - val)
        self.val, self.data, self.prec = val, data, prec

    @classmethod
    def _make(cls, ctx, val, data, prec):
        obj = cls.__new__(cls)
        obj._set(ctx, val, data, prec)
        return obj

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls, ctx, precision=INF):
        return cls._make(ctx, 0, ctx.kernel.zero, precision)

    @classmethod
    def one(cls, ctx):
        return cls._make(ctx, 0, ctx.kernel.one, INF)

    @classmethod
    def u(cls, ctx):
        return cls._make(ctx, 1, ctx.kernel.one, INF)

    @classmethod
    def theta(cls, ctx):
        return cls._make(ctx, -1, ctx.kernel.one, INF)

    @classmethod
    def big_o(cls, ctx, n):
        return cls._make(ctx, n, ctx.kernel.zero, n)

    @classmethod
    def from_thetapoly(cls, p: ThetaPoly):
        ctx = p.ctx
        if p.is_zero():
            return cls.zero(ctx)
        codes = p.codes()
        deg = len(codes) - 1
        return cls._make(ctx, -deg, ctx.kernel.from_list(codes[::-1]), INF)

    @classmethod
    def from_ratfunc(cls, r, precision):
        if isinstance(r, ThetaPoly):
            return cls.from_thetapoly(r)
        num = cls.from_thetapoly(r.num)
        if r.den.is_one():
            return num
        den = cls.from_thetapoly(r.den)
        return num.div(den, precision)

    @classmethod
    def coerce(cls, x, ctx=None, precision=INF):
        if isinstance(x, LaurentSeries):
            return x
        if isinstance(x, ThetaPoly):
            return cls.from_thetapoly(x)
        if isinstance(x, RatFunc):
            if precision == INF and not x.den.is_one():
                raise ValueError("a finite precision is needed to expand a fraction")
            return cls.from_ratfunc(x, precision)
        if isinstance(x, (int, FqElement)):
            ctx = ctx or x.ctx
            return cls._make(ctx, 0, ctx.kernel.monomial(ctx.code(x), 0), INF)
        raise TypeError(f"cannot coerce {type(x).__name__} to LaurentSeries")

    # -- introspection -------------------------------------------------------
    @property
    def exact(self):
        return self.prec == INF

    @property
    def valuation(self):
        return self.val

    @property
    def precision(self):
        return self.prec

    @property
    def coeffs(self):
        if self.is_zero():
            return []
        lst = self.ctx.kernel.to_list(self.data)
        if self.prec != INF:
            lst = lst + [0] * (self.prec - self.val - len(lst))
        return [FqElement(self.ctx, c) for c in lst]

    def coeff(self, e: int) -> int:
        """Code of the u^e coefficient (must be below the precision)."""
        if e >= self.prec:
            raise PrecisionExhausted(f"coefficient u^{e} beyond precision {self.prec}")
        if self.is_zero():
            return 0
        return self.ctx.kernel.coeff(self.data, e - self.val)

    def is_zero(self):
        return self.ctx.kernel.is_zero(self.data)

    def norm(self) -> float:
        return 0.0 if self.is_zero() else float(self.ctx.q) ** (-self.val)

    def relative_precision(self):
        return self.prec - self.val

    # -- arithmetic ----------------------------------------------------------
    def _co(self, o, mode):
        if isinstance(o, LaurentSeries):
            return o
        if isinstance(o, RatFunc) and not o.den.is_one():
            if self.prec == INF:
                raise ValueError("exact series mixed with a fraction: convert explicitly")
            prec = self.prec if mode == "add" else self.prec - self.val + o.valuation()
            return LaurentSeries.from_ratfunc(o, prec)
        if isinstance(o, RatFunc):
            return LaurentSeries.from_thetapoly(o.num)
        if isinstance(o, (ThetaPoly, int, FqElement)):
            return LaurentSeries.coerce(o, self.ctx)
        return None

    def __add__(self, o):
        o = self._co(o, "add")
        if o is None:
            return NotImplemented
        k = self.ctx.kernel
        prec = min(self.prec, o.prec)
        if self.is_zero():
            return LaurentSeries._make(self.ctx, o.val, o.data, prec)
        if o.is_zero():
            return LaurentSeries._make(self.ctx, self.val, self.data, prec)
        v = min(self.val, o.val)
        a = k.shift(self.data, self.val - v)
        b = k.shift(o.data, o.val - v)
        return LaurentSeries._make(self.ctx, v, k.add(a, b), prec)

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries._make(self.ctx, self.val, self.ctx.kernel.neg(self.data), self.prec)

    def __sub__(self, o):
        o = self._co(o, "add")
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        o = self._co(o, "mul")
        if o is None:
            return NotImplemented
        k = self.ctx.kernel
        val = self.val + o.val
        prec = min(self.val + o.prec, o.val + self.prec)
        if prec == INF:
            data = k.mul(self.data, o.data)
        else:
            data = k.mul_trunc(self.data, o.data, prec - val)
        return LaurentSeries._make(self.ctx, val, data, prec)

    __rmul__ = __mul__

    def inv(self, target_precision=None):
        """Multiplicative inverse.

        Exact monomials invert exactly.  Otherwise the result has absolute
        precision ``target_precision`` capped by what the input supports.
        """
        if self.is_zero():
            raise PrecisionExhausted("series indistinguishable from zero")
        k = self.ctx.kernel
        if self.exact and k.degree(self.data) == 0:
            c = self.ctx.inv(k.coeff(self.data, 0))
            return LaurentSeries._make(self.ctx, -self.val, k.monomial(c, 0), INF)
        cap = INF if self.exact else self.prec - 2 * self.val
        n = cap if target_precision is None else min(cap, target_precision)
        if n == INF:
            raise ValueError("target precision required for a non-monomial inverse")
        rel = n + self.val
        if rel <= 0:
            return LaurentSeries.big_o(self.ctx, n)
        data = series_inverse(k, self.ctx.inv, self.data, rel)
        return LaurentSeries._make(self.ctx, -self.val, data, n)

    def div(self, o, target_precision=None):
        o = self._co(o, "mul")
        if self.is_zero():
            prec = self.prec - o.val if self.prec != INF else INF
            if target_precision is not None:
                prec = min(prec, target_precision)
            return LaurentSeries.zero(self.ctx, prec)
        monomial = o.exact and not o.is_zero() and o.ctx.kernel.degree(o.data) == 0
        if target_precision is not None:
            inv = o.inv(target_precision - self.val)
            return (self * inv).with_precision(target_precision)
        if monomial:
            return self * o.inv()
        if self.exact and o.exact:
            raise ValueError("target precision required to divide exact series")
        want = INF if self.exact else self.prec - self.val - o.val
        return self * o.inv(want if want != INF else None)

    def __truediv__(self, o):
        return self.div(o)

    def __rtruediv__(self, o):
        return LaurentSeries.coerce(o, self.ctx).div(self)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("use inv() for negative powers")
        out = LaurentSeries.one(self.ctx)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def twist(self, i: int = 1):
        _check_twist(i)
        if i == 0:
            return self
        f = self.ctx.q ** i
        prec = self.prec * f if self.prec != INF else INF
        if self.is_zero():
            return LaurentSeries.zero(self.ctx, prec)
        return LaurentSeries._make(self.ctx, self.val * f,
                                   self.ctx.kernel.spread(self.data, f), prec)

    def with_precision(self, n):
        if n >= self.prec:
            return self
        return LaurentSeries._make(self.ctx, self.val, self.data, n)

    def agreement(self, o):
        """Valuation of self - o (capped by the common precision)."""
        d = self - o
        return d.val

    # -- comparison / output ------------------------------------------
    def __eq__(self, o):
        if not isinstance(o, LaurentSeries):
            try:
                o = self._co(o, "add")
            except (TypeError, ValueError):
                return NotImplemented
            if o is None:
                return NotImplemented
        return (self.val, self.data, self.prec) == (o.val, o.data, o.prec)

    def __hash__(self):
        return hash(("laurent", self.val, self.data, self.prec))

    def __repr__(self):
        if self.is_zero():
            return f"O(u^{self.prec})" if self.prec != INF else "0"
        lst = self.ctx.kernel.to_list(self.data)
        terms = []
        for j, c in enumerate(lst):
            if not c:
                continue
            e = self.val + j
            cs = str(self.ctx.code_to_json(c))
            mono = "" if e == 0 else ("u" if e == 1 else f"u^{e}")
            if not mono:
                terms.append(cs)
            else:
                terms.append(mono if cs == "1" else f"{cs}*{mono}")
        s = " + ".join(terms)
        if self.prec != INF:
            s += f" + O(u^{self.prec})"
        return s

    def to_json(self):
        prec = None if self.prec == INF else self.prec
        val = None if self.val == INF else self.val
        return {"var": "1/theta", "valuation": val, "precision": prec,
                "coeffs": [self.ctx.code_to_json(c.code) for c in self.coeffs]}

    @classmethod
    def from_json(cls, ctx, data):
        prec = INF if data["precision"] is None else data["precision"]
        if data["valuation"] is None:
            return cls.zero(ctx, prec)
        return cls(ctx, data["valuation"], data["coeffs"], prec)


def frobenius_twist(a, i: int):
    """a^{(i)} for any scalar, polynomial or series object with ``twist``."""
    _check_twist(i)
    return a.twist(i)


def valuation(x):
    """u-adic valuation of any scalar kind."""
    if isinstance(x, (int, FqElement)):
        return INF if (x == 0) else 0
    if isinstance(x, LaurentSeries):
        return x.val
    return x.valuation()


def is_zero(x):
    if isinstance(x, (int, FqElement)):
        return x == 0
    return x.is_zero()


def to_laurent(x, precision):
    """Embed any scalar into K_∞ at the given absolute precision."""
    if isinstance(x, LaurentSeries):
        return x.with_precision(precision)
    if isinstance(x, RatFunc):
        return LaurentSeries.from_ratfunc(x, precision).with_precision(precision)
    return LaurentSeries.coerce(x).with_precision(precision)
