import pytest

from motivic.errors import DivergentEvaluation, NegativeTwist
from motivic.scalar import INF, FqContext, LaurentSeries, RatFunc
from motivic.tate import (TateElement, TRational, eval_at, factor_power, hyperderivative, node,
                          rational_pole_stack, taylor_stack)

from helpers import as_dict


@pytest.fixture
def f2():
    return FqContext(2)


def test_square_of_linear_char2(f2):
    th = f2.theta()
    lin = TateElement.linear(f2, th)
    assert lin * lin == TateElement(f2, [th ** 2, f2.const(0), f2.const(1)])


def test_twist_of_product(f2):
    th = f2.theta()
    a = TateElement.linear(f2, th) * TateElement.linear(f2, th ** 2)
    b = TateElement.linear(f2, th ** 2) * TateElement.linear(f2, th ** 4)
    assert a.twist(1) == b
    with pytest.raises(NegativeTwist):
        a.twist(-1)


def test_pole_hyperderivative(f2):
    f = TRational(TateElement.const(f2, 1), {1: 1})
    d = f.hyperderivative(1)
    # -1/(t - θ^2)^2, and -1 = 1 in characteristic 2
    assert d.equals(TRational(TateElement.const(f2, 1), {1: 2}))
    f3 = FqContext(3)
    g = TRational(TateElement.const(f3, 1), {1: 1}).hyperderivative(1)
    assert g.equals(TRational(TateElement.const(f3, -1), {1: 2}))


def test_pole_hyperderivative_binomial_rule():
    ctx = FqContext(3)
    for m in (1, 2, 3):
        f = TRational(TateElement.const(ctx, 1), {1: m})
        for j in range(1, 5):
            from math import comb
            coeff = ((-1) ** j * comb(m + j - 1, j)) % 3
            want = TRational(TateElement.const(ctx, coeff), {1: m + j})
            assert f.hyperderivative(j).equals(want)


def test_evaluation_at_theta(f2):
    th = f2.theta()
    g = TateElement(f2, [th, f2.const(0), f2.const(1)])
    assert eval_at(g, th) == th ** 2 + th


def test_truncated_geometric_series_at_one(f2):
    T = 30
    u = LaurentSeries.u(f2)
    cs = [u ** i for i in range(T + 1)]
    g = TateElement(f2, cs, tail_log=-(T + 1), trunc=T)
    val = eval_at(g, f2.const(1))
    want = LaurentSeries.one(f2).div(LaurentSeries.one(f2) - u, T + 1)
    assert val.prec == T + 1
    assert as_dict(val, T + 1) == as_dict(want, T + 1)


def test_truncated_series_diverges_for_large_argument(f2):
    g = TateElement(f2, [f2.const(1)], tail_log=-5, trunc=3)
    with pytest.raises(DivergentEvaluation):
        eval_at(g, f2.theta() ** 2)


def test_value_at_theta_of_pole(f2):
    th = f2.theta()
    f = TRational(TateElement.const(f2, 1), {1: 1})
    assert f.value(th) == RatFunc(f2.const(1), th - th ** 2)
    assert f.residue(1) == 1


def test_residue_theorem_small(f2):
    f = TRational(TateElement.const(f2, 1), {1: 1})
    total = RatFunc.lift(f.residue(1)) + RatFunc.lift(f.residue_at_infinity())
    assert total.is_zero()


def test_nodes_and_factor_powers():
    ctx = FqContext(3)
    th = ctx.theta()
    assert node(ctx, 0) == th
    assert node(ctx, 2) == th ** 9
    lin = TateElement.linear(ctx, th ** 3)
    assert factor_power(ctx, 1, 2) == lin * lin
    assert factor_power(ctx, 1, 0) == TateElement.const(ctx, 1)


def test_rational_pole_stack_order():
    ctx = FqContext(3)
    th = ctx.theta()
    f = TRational(TateElement(ctx, [th, ctx.const(1), ctx.const(1)]))  # t^2 + t + θ
    s = rational_pole_stack(f, 0, 3)  # (∂^2 f, ∂f, f) at t = θ
    assert s[0] == 1
    assert s[1] == th * 2 + 1
    assert s[2] == th ** 2 + th * 2
    assert taylor_stack(f, 0, 3, lowest_first=True) == s[::-1]


def test_simplify_cancels_common_factor():
    ctx = FqContext(2)
    lin = factor_power(ctx, 1, 1)
    f = TRational(lin * TateElement.t(ctx), {1: 2})
    g = f.simplify()
    assert g.poles == {1: 1}
    assert g.equals(TRational(TateElement.t(ctx), {1: 1}))


def test_divide_linear_is_exact_quotient():
    ctx = FqContext(3)
    th = ctx.theta()
    a = TateElement(ctx, [th, ctx.const(2), ctx.const(1)])
    x = th ** 3
    q, r = a.divide_linear(x)
    assert r == eval_at(a, x)
    assert TateElement.linear(ctx, x) * q + TateElement.const(ctx, r) == a


def test_hyperderivative_of_polynomial():
    ctx = FqContext(2)
    t = TateElement.t(ctx)
    f = t * t * t  # t^3
    assert hyperderivative(f, 1) == TateElement(ctx, [ctx.const(0), ctx.const(0), ctx.const(1)])
    assert hyperderivative(f, 2) == TateElement(ctx, [ctx.const(0), ctx.const(1)])
    assert hyperderivative(f, 3) == TateElement.const(ctx, 1)
