"""Special values: Carlitz products, factorials, ζ_A and MZVs, the period ratio
π̃/ω_C, Bernoulli–Carlitz numbers and special points."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import Unsupported
from .scalar import INF, FqContext, LaurentSeries, RatFunc, ThetaPoly, is_zero, valuation
from .tate import TateElement


@dataclass
class SpecialValue:
    label: str
    params: dict
    value: object
    provenance: str
    precision: float = INF
    data: dict = field(default_factory=dict)

    def to_json(self):
        return {"label": self.label, "params": self.params, "provenance": self.provenance,
                "precision": None if self.precision == INF else self.precision,
                "value": self.value.to_json(), "data": self.data}


# ---------------------------------------------------------------------------
# D_i, L_i, Γ
# ---------------------------------------------------------------------------


def carlitz_products(ctx: FqContext, i_max: int):
    """(D_0..D_{i_max}, L_0..L_{i_max}) as exact ThetaPolys."""
    th = ctx.theta()
    q = ctx.q
    D, L = [ctx.const(1)], [ctx.const(1)]
    for i in range(1, i_max + 1):
        acc = ctx.const(1)
        top = th ** (q ** i)
        for j in range(i):
            acc = acc * (top - th ** (q ** j))
        D.append(acc)
        L.append(L[-1] * (th - th ** (q ** i)))
    return D, L


def base_q_digits(n: int, q: int):
    out = []
    while n:
        n, r = divmod(n, q)
        out.append(r)
    return out


def gamma_factorial(ctx: FqContext, m: int) -> ThetaPoly:
    """Γ_m = ∏ D_i^{n_i} where m - 1 = Σ n_i q^i."""
    if m < 1:
        raise ValueError("Γ_m needs m >= 1")
    digits = base_q_digits(m - 1, ctx.q)
    D, _ = carlitz_products(ctx, max(len(digits) - 1, 0))
    out = ctx.const(1)
    for i, e in enumerate(digits):
        if e:
            out = out * D[i] ** e
    return out


# ---------------------------------------------------------------------------
# power sums, ζ_A, MZVs
# ---------------------------------------------------------------------------


def power_sum_floor(q: int, d: int, k: int) -> int:
    """Lower bound for the valuation of S_d(k) = Σ_{a monic, deg a = d} a^{-k}.

    Every monic a of degree d is θ^d(1 + x) with |x| < 1; expanding
    (1 + x)^{-k} and summing over the free lower coefficients kills every
    monomial in which some coefficient variable appears with total degree
    not a positive multiple of q - 1.  Each of the d variables c_j (j < d,
    weight d - j in u) must therefore appear at least q - 1 times.
    """
    return d * k + (q - 1) * d * (d + 1) // 2


def monic_polys(ctx: FqContext, d: int):
    kern = ctx.kernel
    if ctx.q == 2:
        top = 1 << d
        for low in range(top):
            yield ThetaPoly._raw(ctx, top | low)
        return
    for lows in itertools.product(range(ctx.q), repeat=d):
        yield ThetaPoly._raw(ctx, kern.from_list(list(lows) + [1]))


def power_sum(ctx: FqContext, d: int, k: int, precision: int) -> LaurentSeries:
    """S_d(k) to O(u^precision), by enumeration."""
    return _power_sum_cached(ctx, d, k, precision)


@lru_cache(maxsize=512)
def _power_sum_cached(ctx, d, k, precision):
    if power_sum_floor(ctx.q, d, k) >= precision:
        return LaurentSeries.zero(ctx, precision)
    total = LaurentSeries.zero(ctx, precision)
    for a in monic_polys(ctx, d):
        ak = LaurentSeries.from_thetapoly(a ** k)
        total = total + ak.inv(precision)
    return total


def zeta_naive(ctx: FqContext, n: int, precision: int = 40, max_degree: int = 64) -> SpecialValue:
    """ζ_A(n) = Σ_{a monic} a^{-n}, summed by degree blocks.

    Stops once the guaranteed floor of the next block reaches the target
    and the last two blocks were already below it.
    """
    if n < 1:
        raise ValueError("n must be positive")
    total = LaurentSeries.zero(ctx, precision)
    small = 0
    blocks = []
    for d in range(max_degree + 1):
        block = power_sum(ctx, d, n, precision)
        blocks.append(None if block.is_zero() else block.val)
        total = total + block
        small = small + 1 if block.is_zero() or block.val >= precision else 0
        if small >= 2 and power_sum_floor(ctx.q, d + 1, n) >= precision:
            break
    return SpecialValue("zeta", {"q": ctx.q, "n": n}, total, "brute_force", precision,
                        {"block_valuations": blocks, "degrees": len(blocks)})


def zeta_partial(ctx: FqContext, n: int, max_degree: int, precision: int = 40) -> LaurentSeries:
    total = LaurentSeries.zero(ctx, precision)
    for d in range(max_degree + 1):
        total = total + power_sum(ctx, d, n, precision)
    return total


def mzv_naive(ctx: FqContext, s, precision: int = 40, max_degree: int = 64,
              outer_max: int = None) -> SpecialValue:
    """ζ_A(s_1, …, s_r) over monic tuples with deg a_1 > ⋯ > deg a_r.

    ``outer_max`` caps the degree of a_1 (for partial sums).
    """
    s = tuple(int(x) for x in s)
    if not s or any(x < 1 for x in s):
        raise ValueError("MZV entries must be positive")
    r = len(s)
    cap = max_degree if outer_max is None else outer_max
    total = LaurentSeries.zero(ctx, precision)
    used = 0
    # build from the innermost index outward, degree by degree
    prefix = [None] * r  # running prefix sums Σ_{e<d} inner_j(e)
    for j in range(r):
        prefix[j] = LaurentSeries.zero(ctx, precision)
    small = 0
    for d in range(cap + 1):
        # inner_j(d) for j = r-1 .. 0
        vals = [None] * r
        for j in range(r - 1, -1, -1):
            ps = power_sum(ctx, d, s[j], precision)
            if j == r - 1:
                vals[j] = ps
            else:
                vals[j] = ps * prefix[j + 1] if not ps.is_zero() else ps
        for j in range(r):
            prefix[j] = prefix[j] + vals[j]
        block = vals[0]
        total = prefix[0]
        used = d
        if outer_max is None:
            small = small + 1 if block.is_zero() or block.val >= precision else 0
            if small >= 2 and power_sum_floor(ctx.q, d + 1, s[0]) >= precision:
                break
    return SpecialValue("mzv", {"q": ctx.q, "s": list(s)}, total.with_precision(precision),
                        "brute_force", precision, {"outer_degree": used})


def mzv_brute_nested(ctx: FqContext, s, outer_degree: int, precision: int = 30) -> LaurentSeries:
    """Direct enumeration of all tuples (small cross-check oracle)."""
    r = len(s)
    total = LaurentSeries.zero(ctx, precision)
    for degs in itertools.combinations(range(outer_degree + 1), r):
        degs = degs[::-1]  # strictly decreasing
        pools = [list(monic_polys(ctx, d)) for d in degs]
        for tup in itertools.product(*pools):
            den = ctx.const(1)
            for a, e in zip(tup, s):
                den = den * a ** e
            total = total + LaurentSeries.from_thetapoly(den).inv(precision)
    return total


def log_series_zeta1(ctx: FqContext, precision: int = 40) -> LaurentSeries:
    """Σ_i 1/L_i (the Carlitz logarithm at 1)."""
    total = LaurentSeries.zero(ctx, precision)
    i = 0
    while True:
        _, L = carlitz_products(ctx, i)
        term = LaurentSeries.from_thetapoly(L[i])
        if -term.val >= precision:
            break
        total = total + term.inv(precision)
        i += 1
    return total


# ---------------------------------------------------------------------------
# π̃/ω_C
# ---------------------------------------------------------------------------


def period_constant(ctx: FqContext, precision: int) -> LaurentSeries:
    """C = ∏_{i≥1} (1 - θ^{1-q^i})^{-1} to O(u^precision)."""
    q = ctx.q
    prod = LaurentSeries.one(ctx)
    i = 1
    while q ** i - 1 < precision:
        u_pow = LaurentSeries._make(ctx, q ** i - 1, ctx.kernel.one, INF)
        prod = (prod * (LaurentSeries.one(ctx) - u_pow)).with_precision(precision)
        i += 1
    return prod.with_precision(precision).inv(precision)


def pi_power_q_minus_1(ctx: FqContext, precision: int) -> LaurentSeries:
    """π̃^{q-1} = (-θ)^q C^{q-1}."""
    q = ctx.q
    mth = -LaurentSeries.theta(ctx)
    C = period_constant(ctx, precision + q)
    return (mth ** q * C ** (q - 1)).with_precision(precision)


def _smallest_sum_valuation(q, n, k, extra_linear):
    """Minimal valuation of the t^k coefficient of
    (1 - t u)^{extra_linear} ∏_{i≥1} (1 - t u^{q^i})^n."""
    pool = [1] * extra_linear
    i = 1
    while len(pool) < k:
        pool.extend([q ** i] * n)
        i += 1
    return sum(sorted(pool)[:k])


def _linear_product_coeffs(ctx, factors, t_degree, precision):
    """Coefficients of ∏ (1 - t·c) for LaurentSeries c, up to t^t_degree."""
    coeffs = [LaurentSeries.one(ctx)]
    for c in factors:
        new = list(coeffs) + [LaurentSeries.zero(ctx, precision)]
        for k in range(1, len(new)):
            if k - 1 < len(coeffs):
                new[k] = (new[k] - coeffs[k - 1] * c).with_precision(precision)
        coeffs = new[: t_degree + 1]
    return coeffs


def _rho_pieces(ctx, n, t_degree, precision, over_t_minus_theta):
    q = ctx.q
    linear = n - 1 if over_t_minus_theta else n
    factors = [LaurentSeries.u(ctx)] * linear
    i = 1
    while q ** i < precision:
        factors.extend([LaurentSeries._make(ctx, q ** i, ctx.kernel.one, INF)] * n)
        i += 1
    coeffs = _linear_product_coeffs(ctx, factors, t_degree, precision + n)
    mth = -LaurentSeries.theta(ctx)
    front = mth ** linear * period_constant(ctx, precision + n) ** n
    coeffs = [(front * c).with_precision(precision) for c in coeffs]
    tail = linear - _smallest_sum_valuation(q, n, t_degree + 1, linear)
    return TateElement(ctx, coeffs, tail_log=tail, trunc=t_degree)


def pi_omega_ratio(ctx: FqContext, n: int, t_degree: int = 64, precision: int = 40) -> TateElement:
    """ρ^n with ρ = π̃/ω_C = (-θ) C ∏_{i≥0} (1 - t/θ^{q^i}), truncated at t^T."""
    if n < 1:
        raise ValueError("n must be positive")
    return _rho_pieces(ctx, n, t_degree, precision, False)


def pi_omega_over_t_minus_theta(ctx: FqContext, n: int, t_degree: int = 64,
                                precision: int = 40) -> TateElement:
    """ρ^n/(t-θ) = (-θ)^{n-1} C^n (1 - t/θ)^{n-1} ∏_{i≥1} (1 - t/θ^{q^i})^n."""
    if n < 1:
        raise ValueError("n must be positive")
    return _rho_pieces(ctx, n, t_degree, precision, True)


# ---------------------------------------------------------------------------
# Bernoulli–Carlitz numbers
# ---------------------------------------------------------------------------


def bernoulli_carlitz(ctx: FqContext, n_max: int):
    """B_{n,C} for n ≤ n_max, normalized by z/exp_C(z) = Σ B_{n,C} z^n / Γ_{n+1}.

    Γ_{n+1} is the Carlitz factorial of n, so B_{0,C} = 1.  Also returns the
    series of exp_C(z)/z and of its reciprocal.
    """
    q = ctx.q
    D, _ = carlitz_products(ctx, _levels_for(q, n_max))
    # a = exp_C(z)/z = Σ_i z^{q^i - 1}/D_i
    a = [RatFunc.lift(ctx.const(0))] * (n_max + 1)
    for i, Di in enumerate(D):
        e = q ** i - 1
        if e <= n_max:
            a[e] = RatFunc(ctx.const(1), Di)
    b = [RatFunc.lift(ctx.const(1))]
    for n in range(1, n_max + 1):
        acc = RatFunc.lift(ctx.const(0))
        for k in range(1, n + 1):
            if not is_zero(a[k]):
                acc = acc + a[k] * b[n - k]
        b.append(-acc)
    return [b[n] * gamma_factorial(ctx, n + 1) for n in range(n_max + 1)], a, b


def _levels_for(q, n_max):
    i = 0
    while q ** (i + 1) - 1 <= n_max:
        i += 1
    return i


# ---------------------------------------------------------------------------
# Anderson–Thakur polynomials and special points
# ---------------------------------------------------------------------------


def anderson_thakur_poly(ctx: FqContext, n: int, supplied=None) -> TateElement:
    """H_n = 1 for n ≤ q; otherwise a caller-supplied polynomial."""
    if n < 1:
        raise ValueError("n must be positive")
    if supplied is not None:
        return supplied
    if n <= ctx.q:
        return TateElement.const(ctx, 1)
    raise Unsupported(f"H_{n} for n > q must be supplied (see --hn-file)")


def special_point(spec, H: TateElement):
    """z = δ_1^N(H) on C^{⊗n}."""
    from .motive import MotiveElement, delta1N
    el = MotiveElement(spec, "N", (H,))
    return delta1N(el)


def special_point_delta0(spec, H: TateElement):
    """δ_0^N(H), the δ_0-based variant of the special point."""
    from .motive import MotiveElement, delta0N
    return delta0N(MotiveElement(spec, "N", (H,)))


def poly_from_json(ctx: FqContext, data) -> TateElement:
    """JSON polynomial in (t, θ): list over t-degree of θ-coefficient lists."""
    if isinstance(data, dict):
        data = data["coeffs"]
    return TateElement(ctx, [ThetaPoly.from_json(ctx, c) for c in data])
