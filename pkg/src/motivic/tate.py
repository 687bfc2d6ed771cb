"""Elements of the Tate algebra in t over K_∞ scalars, and rational
functions of t whose denominators are products of (t - θ^{q^j}).

A ``TateElement`` is a polynomial in t whose coefficients are ThetaPoly,
RatFunc or LaurentSeries scalars.  If it is a truncation of an infinite
series, ``trunc`` is the truncation degree and ``tail_log`` bounds
log_q of the Gauss norm ‖h - trunc(h)‖_θ.

A ``TRational`` is num / ∏_j (t - θ^{q^j})^{m_j} with the exponents
held in a dict keyed by the twist level j.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import product as iproduct

from .errors import DivergentEvaluation, NegativeTwist, PoleAtEvaluationPoint
from .scalar import (INF, FqElement, LaurentSeries, RatFunc, ThetaPoly,
                     is_zero, lucas_binomial, valuation)

NEG_INF = -math.inf


def _lift(ctx, c):
    if isinstance(c, (int, FqElement)):
        return ctx.const(c)
    return c


def _fp(ctx, n):
    """The F_p-image of an integer, as an FqElement."""
    return FqElement(ctx, n % ctx.p)


def _exact_zero(c):
    return is_zero(c) and getattr(c, "prec", INF) == INF


def _strip(cs):
    """Drop trailing exact zeros; an O(u^k) zero still carries precision."""
    n = len(cs)
    while n and _exact_zero(cs[n - 1]):
        n -= 1
    return cs[:n]


class TateElement:
    __slots__ = ("ctx", "coeffs", "tail_log", "trunc")

    def __init__(self, ctx, coeffs=(), tail_log=NEG_INF, trunc=None):
        self.ctx = ctx
        cs = [_lift(ctx, c) for c in coeffs]
        if trunc is not None:
            if len(cs) > trunc + 1:
                raise ValueError("coefficients beyond the truncation degree")
        elif tail_log != NEG_INF:
            raise ValueError("a tail bound needs a truncation degree")
        self.coeffs = tuple(_strip(cs))
        self.tail_log = tail_log
        self.trunc = trunc

    # -- constructors -----------------------------------------------
    @classmethod
    def t(cls, ctx):
        return cls(ctx, [0, 1])

    @classmethod
    def const(cls, ctx, c):
        return cls(ctx, [c])

    @classmethod
    def linear(cls, ctx, c):
        """t - c."""
        return cls(ctx, [-_lift(ctx, c), 1])

    @classmethod
    def zero(cls, ctx):
        return cls(ctx, [])

    # -- introspection -----------------------------------------------
    @property
    def exact(self):
        return self.trunc is None

    @property
    def tail_bound(self) -> float:
        return 0.0 if self.tail_log == NEG_INF else float(self.ctx.q) ** self.tail_log

    def degree(self):
        return len(self.coeffs) - 1

    def coeff(self, i):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else self.ctx.const(0)

    def is_zero(self):
        return not self.coeffs

    def gauss_log_norm(self):
        """log_q ‖h‖_θ = max_i (i - v(b_i)); -inf for zero."""
        best = NEG_INF
        for i, c in enumerate(self.coeffs):
            v = valuation(c)
            if v != INF:
                best = max(best, i - v)
        return best

    def norm(self) -> float:
        g = self.gauss_log_norm()
        return 0.0 if g == NEG_INF else float(self.ctx.q) ** g

    def is_numeric(self):
        return any(isinstance(c, LaurentSeries) for c in self.coeffs)

    # -- ring operations ------------------------------------------------
    def _as_tate(self, o):
        if isinstance(o, TateElement):
            return o
        if isinstance(o, (int, FqElement, ThetaPoly, RatFunc, LaurentSeries)):
            return None
        raise TypeError(f"unsupported operand {type(o).__name__}")

    @staticmethod
    def _cut(ctx, cs, trunc, tail):
        if trunc is not None and len(cs) > trunc + 1:
            dropped = TateElement(ctx, [ctx.const(0)] * (trunc + 1) + list(cs[trunc + 1:]))
            tail = max(tail, dropped.gauss_log_norm())
            cs = cs[:trunc + 1]
        return cs, tail

    def __add__(self, o):
        if not isinstance(o, TateElement):
            o = TateElement(self.ctx, [o])
        n = max(len(self.coeffs), len(o.coeffs))
        cs = [self.coeff(i) + o.coeff(i) for i in range(n)]
        trunc = _min_trunc(self.trunc, o.trunc)
        tail = max(self.tail_log, o.tail_log)
        cs, tail = self._cut(self.ctx, cs, trunc, tail)
        return TateElement(self.ctx, cs, tail, trunc)

    __radd__ = __add__

    def __neg__(self):
        return TateElement(self.ctx, [-c for c in self.coeffs], self.tail_log, self.trunc)

    def __sub__(self, o):
        if not isinstance(o, TateElement):
            o = TateElement(self.ctx, [o])
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if not isinstance(o, TateElement):
            return self.scale(o)
        return tate_mul(self, o)

    def __rmul__(self, o):
        return self.scale(o)

    def scale(self, c):
        c = _lift(self.ctx, c)
        if is_zero(c):
            return TateElement(self.ctx, [], NEG_INF, None) if self.exact else \
                TateElement(self.ctx, [], NEG_INF, self.trunc)
        tail = self.tail_log - valuation(c) if self.tail_log != NEG_INF else NEG_INF
        return TateElement(self.ctx, [b * c for b in self.coeffs], tail, self.trunc)

    def __pow__(self, k):
        out = TateElement.const(self.ctx, 1)
        for _ in range(k):
            out = out * self
        return out

    def twist(self, i=1):
        return tate_twist(self, i)

    def hyperderivative(self, j):
        return hyperderivative(self, j)

    def __call__(self, c):
        return eval_at(self, c)

    def divide_linear(self, x):
        """Synthetic division by (t - x): returns (quotient, remainder)."""
        cs = self.coeffs
        if not cs:
            return self, self.ctx.const(0)
        out = [None] * (len(cs) - 1)
        acc = cs[-1]
        for k in range(len(cs) - 2, -1, -1):
            out[k] = acc
            acc = cs[k] + acc * x
        trunc = None if self.trunc is None else max(self.trunc - 1, 0)
        return TateElement(self.ctx, out, self.tail_log, trunc), acc

    def taylor(self, x, count):
        """[∂^k h (x) for k < count] by repeated synthetic division."""
        out, cur = [], self
        for _ in range(count):
            cur, r = cur.divide_linear(x)
            out.append(r)
        return out

    def truncate(self, degree):
        cs, tail = self._cut(self.ctx, list(self.coeffs), degree, self.tail_log)
        trunc = degree if self.trunc is None else min(self.trunc, degree)
        return TateElement(self.ctx, cs, tail, trunc)

    def __eq__(self, o):
        if not isinstance(o, TateElement):
            o = TateElement(self.ctx, [o])
        if len(self.coeffs) != len(o.coeffs):
            return False
        return all(a == b for a, b in zip(self.coeffs, o.coeffs)) and \
            self.tail_log == o.tail_log

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if is_zero(c):
                continue
            mono = "" if i == 0 else ("t" if i == 1 else f"t^{i}")
            cs = repr(c)
            if not mono:
                terms.append(f"({cs})")
            else:
                terms.append(mono if cs == "1" else f"({cs})*{mono}")
        s = " + ".join(terms) if terms else "0"
        if not self.exact:
            s += f" + O(tail q^{self.tail_log})"
        return s

    def to_json(self):
        return {"coeffs": [c.to_json() for c in self.coeffs],
                "tail_bound": self.tail_bound}


def _min_trunc(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def tate_mul(a: TateElement, b: TateElement) -> TateElement:
    """Truncated product with an ultrametric tail bound."""
    ctx = a.ctx
    if not a.coeffs or not b.coeffs:
        trunc = _min_trunc(a.trunc, b.trunc)
        tail = max(a.tail_log + b.gauss_log_norm(), b.tail_log + a.gauss_log_norm(),
                   a.tail_log + b.tail_log)
        return TateElement(ctx, [], tail if trunc is not None else NEG_INF, trunc)
    trunc = _min_trunc(a.trunc, b.trunc)
    n = len(a.coeffs) + len(b.coeffs) - 1
    if trunc is not None:
        n = min(n, trunc + 1)
    out = []
    for k in range(n):
        acc = None
        for i in range(max(0, k - len(b.coeffs) + 1), min(k, len(a.coeffs) - 1) + 1):
            x, y = a.coeffs[i], b.coeffs[k - i]
            if is_zero(x) or is_zero(y):
                continue
            term = x * y
            acc = term if acc is None else acc + term
        out.append(ctx.const(0) if acc is None else acc)
    tail = NEG_INF
    if trunc is not None:
        na, nb = a.gauss_log_norm(), b.gauss_log_norm()
        tail = max(na + b.tail_log, nb + a.tail_log, a.tail_log + b.tail_log)
        # discarded high-degree part of the truncated product
        full = len(a.coeffs) + len(b.coeffs) - 1
        if full > n:
            hi = NEG_INF
            for k in range(n, full):
                for i in range(max(0, k - len(b.coeffs) + 1), min(k, len(a.coeffs) - 1) + 1):
                    x, y = a.coeffs[i], b.coeffs[k - i]
                    if not (is_zero(x) or is_zero(y)):
                        hi = max(hi, k - valuation(x) - valuation(y))
            tail = max(tail, hi)
    return TateElement(ctx, out, tail, trunc)


def tate_twist(h: TateElement, i: int) -> TateElement:
    if i < 0:
        raise NegativeTwist(f"negative twist {i}")
    if i == 0:
        return h
    tail = h.tail_log * h.ctx.q ** i if h.tail_log != NEG_INF else NEG_INF
    return TateElement(h.ctx, [c.twist(i) for c in h.coeffs], tail, h.trunc)


def hyperderivative(h, j: int):
    """∂_t^j; accepts TateElement or TRational."""
    if isinstance(h, TRational):
        return h.hyperderivative(j)
    if j < 0:
        raise ValueError("negative derivative order")
    ctx = h.ctx
    cs = []
    for i in range(j, len(h.coeffs)):
        b = lucas_binomial(i, j, ctx.p)
        cs.append(h.coeffs[i] * FqElement(ctx, b) if b else ctx.const(0))
    trunc = None if h.trunc is None else max(h.trunc - j, 0)
    return TateElement(ctx, cs, h.tail_log, trunc)


def _horner(cs, c):
    acc = None
    for b in reversed(cs):
        acc = b if acc is None else acc * c + b
    return acc


def eval_at(h: TateElement, c):
    """Σ b_i c^i; for truncated series the error is folded into the precision."""
    ctx = h.ctx
    c = _lift(ctx, c)
    if not h.exact and valuation(c) < -1:
        raise DivergentEvaluation("tail bound does not control |c| > q")
    val = _horner(h.coeffs, c) if h.coeffs else ctx.const(0)
    if h.exact:
        return val
    if h.tail_log == NEG_INF:
        return val
    prec = math.ceil(-h.tail_log)
    if isinstance(val, LaurentSeries):
        return val.with_precision(prec)
    return LaurentSeries.from_ratfunc(val, prec) if isinstance(val, RatFunc) \
        else LaurentSeries.coerce(val).with_precision(prec)


# ---------------------------------------------------------------------------
# Rational functions with factored denominators
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def node(ctx, j: int) -> ThetaPoly:
    """θ^{q^j}."""
    return ThetaPoly._raw(ctx, ctx.kernel.monomial(1, ctx.q ** j))


@lru_cache(maxsize=None)
def factor_power(ctx, j: int, m: int) -> TateElement:
    """(t - θ^{q^j})^m."""
    if m == 0:
        return TateElement.const(ctx, 1)
    return factor_power(ctx, j, m - 1) * TateElement.linear(ctx, node(ctx, j))


def _neg_binom(ctx, m, k):
    """Code of C(-m, k) = (-1)^k C(m+k-1, k) in F_p."""
    v = lucas_binomial(m + k - 1, k, ctx.p)
    return (-v) % ctx.p if k % 2 else v


def _lcm_den(ctx, cs):
    den = ctx.const(1)
    for c in cs:
        if isinstance(c, RatFunc) and not c.den.is_one():
            from .scalar import poly_gcd_theta
            g = poly_gcd_theta(den, c.den)
            den = den * c.den.exact_div(g)
    return den


class TRational:
    __slots__ = ("num", "poles")

    def __init__(self, num, poles=None):
        if not isinstance(num, TateElement):
            raise TypeError("numerator must be a TateElement")
        self.num = num
        self.poles = {j: m for j, m in (poles or {}).items() if m}
        for j, m in self.poles.items():
            if j < 0 or m < 0:
                raise ValueError("pole levels and multiplicities must be nonnegative")

    @classmethod
    def lift(cls, x, ctx=None):
        if isinstance(x, TRational):
            return x
        if isinstance(x, TateElement):
            return cls(x)
        return cls(TateElement(ctx, [x]))

    @property
    def ctx(self):
        return self.num.ctx

    def is_zero(self):
        return self.num.is_zero()

    def __repr__(self):
        if not self.poles:
            return repr(self.num)
        den = "·".join(f"(t-θ^{self.ctx.q ** j})^{m}" for j, m in sorted(self.poles.items()))
        return f"[{self.num!r}] / [{den}]"

    # -- arithmetic ---------------------------------------------------
    def _bring(self, poles):
        """Numerator over the (larger) denominator ``poles``."""
        num = self.num
        for j, m in poles.items():
            extra = m - self.poles.get(j, 0)
            if extra:
                num = num * factor_power(self.ctx, j, extra)
        return num

    def __add__(self, o):
        o = TRational.lift(o, self.ctx)
        poles = dict(self.poles)
        for j, m in o.poles.items():
            poles[j] = max(poles.get(j, 0), m)
        return TRational(self._bring(poles) + o._bring(poles), poles)

    __radd__ = __add__

    def __neg__(self):
        return TRational(-self.num, self.poles)

    def __sub__(self, o):
        return self + (-TRational.lift(o, self.ctx))

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if isinstance(o, (TRational, TateElement)):
            o = TRational.lift(o)
            poles = dict(self.poles)
            for j, m in o.poles.items():
                poles[j] = poles.get(j, 0) + m
            return TRational(self.num * o.num, poles)
        return TRational(self.num.scale(o), self.poles)

    __rmul__ = __mul__

    def divide_by_factor(self, j, m=1):
        poles = dict(self.poles)
        poles[j] = poles.get(j, 0) + m
        return TRational(self.num, poles)

    def twist(self, i=1):
        if i < 0:
            raise NegativeTwist(f"negative twist {i}")
        return TRational(self.num.twist(i), {j + i: m for j, m in self.poles.items()})

    def simplify(self, tolerance=None):
        """Cancel linear factors dividing the numerator.

        For numeric numerators a remainder whose valuation reaches
        ``tolerance`` (or that is zero at its precision) counts as zero.
        """
        num, poles = self.num, dict(self.poles)
        for j in sorted(poles):
            x = node(self.ctx, j)
            while poles[j]:
                quo, rem = num.divide_linear(x)
                if not _negligible(rem, tolerance):
                    break
                num = quo
                poles[j] -= 1
        return TRational(num, poles)

    def is_polynomial(self, tolerance=None):
        return not self.simplify(tolerance).poles

    def to_tate(self, tolerance=None):
        s = self.simplify(tolerance)
        if s.poles:
            raise PoleAtEvaluationPoint(f"not a polynomial: poles at levels {sorted(s.poles)}")
        return s.num

    def pole_order(self, j):
        return self.simplify().poles.get(j, 0)

    # -- local expansions -------------------------------------------
    def laurent_at(self, x, count):
        """Expansion around t = x.

        Returns (order, [c_0, ..., c_{count-1}]) with
        f = (t-x)^{-order} · Σ c_k (t-x)^k.  ``x`` is a ThetaPoly or an
        integer twist level (meaning θ^{q^x}).
        """
        ctx = self.ctx
        if isinstance(x, int):
            x = node(ctx, x)
        order = 0
        others = []
        for j, m in self.poles.items():
            xj = node(ctx, j)
            if xj == x:
                order = m
            else:
                others.append((x - xj, m))
        cs = self.num.coeffs
        numeric = any(isinstance(c, LaurentSeries) for c in cs)
        if numeric:
            prec = min(c.prec for c in cs if isinstance(c, LaurentSeries))
            cs = [c if isinstance(c, LaurentSeries) else
                  (LaurentSeries.from_ratfunc(c, prec) if isinstance(c, RatFunc)
                   else LaurentSeries.coerce(c, ctx)) for c in cs]
        content = ctx.const(1) if numeric else _lcm_den(ctx, cs)
        if not content.is_one():
            cs = [c * content for c in cs]
            cs = [c.num if isinstance(c, RatFunc) else c for c in cs]
        series = TateElement(ctx, cs).taylor(x, count) if cs else [ctx.const(0)] * count
        den = content
        for delta, m in others:
            # δ^{m+count-1} (s + δ)^{-m} truncated, as a polynomial series in s
            dpow = [delta ** e for e in range(count)]
            fac = [dpow[count - 1 - k] * FqElement(ctx, _neg_binom(ctx, m, k))
                   for k in range(count)]
            series = _series_mul(series, fac, count)
            den = den * delta ** (m + count - 1)
        if numeric:
            dl = LaurentSeries.from_thetapoly(den)
            out = [_to_laurent_scalar(c).div(dl) if not is_zero(c) else
                   _to_laurent_scalar(c) for c in series]
        else:
            out = [RatFunc(c, den) if isinstance(c, ThetaPoly) else c / den for c in series]
        return order, out

    def stack(self, x, depth):
        """(∂^{depth-1} f, ..., ∂f, f) at t = x, highest derivative first."""
        f = self
        if isinstance(x, int):
            level = x
            if self.poles.get(level):
                f = self.simplify()
                if f.poles.get(level):
                    raise PoleAtEvaluationPoint(f"pole of order {f.poles[level]} at level {level}")
        else:
            for j, m in self.poles.items():
                if node(self.ctx, j) == x:
                    f = self.simplify()
                    if f.poles.get(j):
                        raise PoleAtEvaluationPoint("pole at the evaluation point")
        order, cs = f.laurent_at(x, depth)
        assert order == 0
        return list(reversed(cs))

    def value(self, x):
        return self.stack(x, 1)[0]

    def residue(self, x):
        """Coefficient of (t - x)^{-1}."""
        f = self.simplify()
        order, cs = f.laurent_at(x, max(f._order_at(x), 1))
        if order == 0:
            return _zero_like(cs[0], self.ctx)
        return cs[order - 1]

    def _order_at(self, x):
        if isinstance(x, int):
            return self.poles.get(x, 0)
        for j, m in self.poles.items():
            if node(self.ctx, j) == x:
                return m
        return 0

    def denominator(self) -> TateElement:
        den = TateElement.const(self.ctx, 1)
        for j, m in sorted(self.poles.items()):
            den = den * factor_power(self.ctx, j, m)
        return den

    def residue_at_infinity(self):
        """res_∞ f dt = minus the coefficient of t^{-1} at infinity."""
        ctx = self.ctx
        num, den = self.num, self.denominator()
        if num.is_zero():
            return ctx.const(0)
        # remainder of num / den (den monic in t)
        rem = list(num.coeffs)
        dd = den.degree()
        for k in range(len(rem) - 1, dd - 1, -1):
            c = rem[k]
            if is_zero(c):
                continue
            for i, b in enumerate(den.coeffs):
                rem[k - dd + i] = rem[k - dd + i] - c * b
        rem = _strip(rem[:dd])
        if len(rem) == dd and dd > 0:
            return -rem[dd - 1]
        return ctx.const(0)

    def hyperderivative(self, j):
        """∂_t^j via the product rule and the pole rule
        ∂^b (t-c)^{-m} = (-1)^b C(m+b-1, b) (t-c)^{-m-b}."""
        ctx = self.ctx
        if not self.poles:
            return TRational(hyperderivative(self.num, j))
        levels = sorted(self.poles)
        new_poles = {l: self.poles[l] + j for l in levels}
        total = TateElement.zero(ctx)
        for a in range(j + 1):
            da = hyperderivative(self.num, a)
            if da.is_zero():
                continue
            rest = j - a
            for split in _compositions(rest, len(levels)):
                coef = 1
                term = da
                for l, b in zip(levels, split):
                    m = self.poles[l]
                    coef = coef * _neg_binom(ctx, m, b) % ctx.p
                    term = term * factor_power(ctx, l, j - b)
                if coef:
                    total = total + term.scale(FqElement(ctx, coef))
        return TRational(total, new_poles)

    def equals(self, o):
        o = TRational.lift(o, self.ctx)
        poles = dict(self.poles)
        for j, m in o.poles.items():
            poles[j] = max(poles.get(j, 0), m)
        return (self._bring(poles) - o._bring(poles)).is_zero()

    def __eq__(self, o):
        if isinstance(o, (TRational, TateElement)):
            return self.equals(o)
        return NotImplemented

    __hash__ = None


def _compositions(total, parts):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _series_mul(a, b, count):
    out = []
    for k in range(count):
        acc = None
        for i in range(k + 1):
            x, y = a[i], b[k - i]
            if is_zero(x) or is_zero(y):
                continue
            term = x * y
            acc = term if acc is None else acc + term
        out.append(acc if acc is not None else a[0] * 0)
    return out


def _negligible(x, tolerance):
    if is_zero(x):
        return True
    if tolerance is None:
        return False
    return valuation(x) >= tolerance


def _to_laurent_scalar(c):
    if isinstance(c, LaurentSeries):
        return c
    return LaurentSeries.coerce(c)


def _zero_like(c, ctx):
    if isinstance(c, LaurentSeries):
        return LaurentSeries.zero(ctx, c.prec)
    return ctx.const(0)


def rational_pole_stack(f, c, depth):
    """(∂^{depth-1} f, ..., f) evaluated at t = c.

    ``c`` may be an integer twist level (θ^{q^c}) or a ThetaPoly point.
    """
    f = TRational.lift(f)
    return f.stack(c, depth)


def taylor_stack(f, c, depth, lowest_first=False):
    s = rational_pole_stack(f, c, depth)
    return s[::-1] if lowest_first else s
