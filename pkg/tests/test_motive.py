import random

import pytest

from motivic.errors import NegativeTwist
from motivic.motive import (MotiveElement, MotiveSpec, basis_element, delta0M, delta0N, delta1N,
                            deltaM1z, make_carlitz_tensor, make_mzv_star, mzv_13_example,
                            sigma_apply_up, sigma_inv_pow, tau_expansion,
                            tau_inv_pow_normalized)
from motivic.scalar import FqContext, LaurentSeries, RatFunc, is_zero
from motivic.tate import TateElement, TRational, factor_power, hyperderivative, eval_at, node

F2, F3 = FqContext(2), FqContext(3)


def lin(ctx, j=0):
    return factor_power(ctx, j, 1)


def rand_poly(ctx, rng, tdeg=3, thdeg=3):
    from motivic.scalar import ThetaPoly
    cs = [ThetaPoly._raw(ctx, ctx.kernel.from_list([rng.randrange(ctx.q) for _ in range(thdeg + 1)]))
          for _ in range(tdeg + 1)]
    return TateElement(ctx, cs)


def test_carlitz_n1_spec():
    s = make_carlitz_tensor(1, F2)
    assert (s.r, s.d, s.blocks) == (1, 1, (1,))
    assert s.phi[0][0] == lin(F2)
    assert s.sigma_basis == ((TateElement.const(F2, 1),),)
    assert s.tau_basis == ((TateElement.const(F2, 1),),)


def test_carlitz_n2_bases():
    s = make_carlitz_tensor(2, F2)
    assert s.phi[0][0] == factor_power(F2, 0, 2)
    assert [b[0] for b in s.tau_basis] == [TateElement.const(F2, 1), lin(F2)]
    assert [b[0] for b in s.sigma_basis] == [lin(F2), TateElement.const(F2, 1)]


def test_det_phi_has_required_shape():
    for s in (make_carlitz_tensor(3, F3), mzv_13_example()):
        assert s.unit is not None


def test_mzv_phi_matches_display():
    s = mzv_13_example()
    t4 = factor_power(F2, 0, 4)
    assert s.phi[0][0] == t4 and s.phi[0][1] == TateElement.zero(F2)
    assert s.phi[1][0] == t4 * lin(F2)  # -(t-θ)^5 in characteristic 2
    assert s.phi[1][1] == lin(F2)
    assert s.blocks == (4, 1)


def test_mzv_tau_basis_is_reproducible():
    a, b = mzv_13_example(), make_mzv_star((3, 1), [lin(F2)], F2)
    assert a.tau_basis == b.tau_basis and a.sigma_basis == b.sigma_basis


def test_sigma_inverse_power_carlitz():
    s = make_carlitz_tensor(1, F2)
    x = sigma_inv_pow(basis_element(s, "N", 0), 1)
    assert x.coords[0].equals(TRational(TateElement.const(F2, 1), {1: 1}))


@pytest.mark.parametrize("n,m", [(1, 1), (1, 3), (2, 2), (3, 2)])
def test_sigma_inverse_power_product(n, m):
    s = make_carlitz_tensor(n, F2)
    one = MotiveElement.of(s, "N", [F2.const(1)])
    x = sigma_inv_pow(one, m)
    assert x.coords[0].equals(TRational(TateElement.const(F2, 1), {j: n for j in range(1, m + 1)}))


def test_tau_inverse_evaluation_gives_Di():
    s = make_carlitz_tensor(1, F2)
    x = tau_inv_pow_normalized(basis_element(s, "M", 0), 1)
    th = F2.theta()
    assert delta0M(x, level=1) == [RatFunc(F2.const(1), th ** 2 + th)]


@pytest.mark.parametrize("n,i", [(1, 2), (2, 1), (2, 2), (3, 2)])
def test_tau_inverse_evaluation_general(n, i):
    ctx = F2
    s = make_carlitz_tensor(n, ctx)
    m = MotiveElement.of(s, "M", [ctx.const(1)])
    val = delta0M(tau_inv_pow_normalized(m, i), level=i)
    Di_at = ctx.const(1)
    for j in range(i):
        Di_at = Di_at * (node(ctx, i) - node(ctx, j))
    assert val[0] == RatFunc(ctx.const(1), Di_at ** n)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_delta0_on_basic_elements(n):
    s = make_carlitz_tensor(n, F3)
    one = MotiveElement.of(s, "N", [F3.const(1)])
    e_last = [0] * (n - 1) + [1]
    assert [RatFunc.lift(x) for x in delta0N(one)] == [RatFunc.lift(F3.const(c)) for c in e_last]
    low = MotiveElement(s, "N", (factor_power(F3, 0, n - 1),))
    e_first = [1] + [0] * (n - 1)
    assert [RatFunc.lift(x) for x in delta0N(low)] == [RatFunc.lift(F3.const(c)) for c in e_first]
    mone = MotiveElement.of(s, "M", [F3.const(1)])
    assert [RatFunc.lift(x) for x in delta0M(mone)] == [RatFunc.lift(F3.const(c)) for c in e_first]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_delta0_pairing_is_hyperderivative_of_product(n):
    ctx = F3
    s = make_carlitz_tensor(n, ctx)
    rng = random.Random(n)
    th = ctx.theta()
    for _ in range(8):
        a, b = rand_poly(ctx, rng), rand_poly(ctx, rng)
        dm = delta0M(MotiveElement(s, "M", (a,)))
        dn = delta0N(MotiveElement(s, "N", (b,)))
        lhs = sum((RatFunc.lift(x) * RatFunc.lift(y) for x, y in zip(dm, dn)),
                  RatFunc.lift(ctx.const(0)))
        rhs = RatFunc.lift(eval_at(hyperderivative(a * b, n - 1), th))
        assert lhs == rhs


@pytest.mark.parametrize("spec", [make_carlitz_tensor(2, F3), mzv_13_example()],
                         ids=["carlitz2", "mzv"])
def test_delta1N_on_sigma_basis(spec):
    for k in range(spec.d):
        got = delta1N(basis_element(spec, "N", k))
        assert [RatFunc.lift(g) for g in got] == \
            [RatFunc.lift(spec.ctx.const(1 if j == k else 0)) for j in range(spec.d)]


@pytest.mark.parametrize("spec", [make_carlitz_tensor(2, F3), mzv_13_example()],
                         ids=["carlitz2", "mzv"])
def test_delta1N_is_sigma_invariant(spec):
    """δ_1^N(σ n) = δ_1^N(n); σ n = nΦ when n has coefficients in F_q[t]."""
    ctx = spec.ctx
    rng = random.Random(7)
    els = [basis_element(spec, "N", k) for k in range(spec.d)
           if all(c.num.coeffs == () or all(x.degree() <= 0 for x in c.num.coeffs)
                  for c in basis_element(spec, "N", k).coords)]
    els += [MotiveElement(spec, "N", tuple(rand_poly(ctx, rng, 2, 0) for _ in range(spec.r)))
            for _ in range(3)]
    for n in els:
        a = [RatFunc.lift(x) for x in delta1N(n)]
        b = [RatFunc.lift(x) for x in delta1N(sigma_apply_up(n))]
        assert a == b


def test_delta1N_of_t_carlitz():
    s = make_carlitz_tensor(1, F2)
    th = F2.theta()
    got = delta1N(MotiveElement(s, "N", (TateElement.t(F2),)))
    assert RatFunc.lift(got[0]) == RatFunc.lift(th + 1)


@pytest.mark.parametrize("spec", [make_carlitz_tensor(1, F3), make_carlitz_tensor(3, F2),
                                  mzv_13_example()], ids=["c1q3", "c3q2", "mzv"])
def test_delta1N_is_A_linear(spec):
    """δ_1^N(t·n) = φ_t(δ_1^N(n)) on random polynomial elements."""
    from motivic.tmodule import from_motive
    T = from_motive(spec)
    rng = random.Random(spec.d)
    ctx = spec.ctx
    for _ in range(4):
        el = MotiveElement(spec, "N", tuple(rand_poly(ctx, rng, 2, 2) for _ in range(spec.r)))
        v = [RatFunc.lift(x) for x in delta1N(el)]
        tv = [RatFunc.lift(x) for x in delta1N(el.tmul(TateElement.t(ctx)))]
        assert tv == phi_t_exact(T, v)


def phi_t_exact(T, v):
    """d[t]·v + Σ_j E_j v^{(j)} over RatFunc."""
    out = []
    for k in range(T.d):
        acc = RatFunc.lift(T.ctx.const(0))
        for l in range(T.d):
            acc = acc + RatFunc.lift(T.dt[k][l]) * v[l]
            for j, E in enumerate(T.taus, start=1):
                acc = acc + RatFunc.lift(E[k][l]) * v[l].twist(j)
        out.append(acc)
    return out


def test_deltaM1z_A_linearity_carlitz():
    ctx = F3
    s = make_carlitz_tensor(1, ctx)
    z = LaurentSeries.u(ctx) + LaurentSeries.u(ctx) ** 4
    got = deltaM1z(MotiveElement(s, "M", (TateElement.t(ctx),)), [z])
    th = LaurentSeries.theta(ctx)
    assert got == th * z + z ** 3


@pytest.mark.parametrize("spec", [make_carlitz_tensor(2, F3), mzv_13_example()],
                         ids=["carlitz2", "mzv"])
def test_deltaM1z_on_tau_powers(spec):
    ctx = spec.ctx
    u = LaurentSeries.u(ctx)
    z = [u ** (k + 1) + u ** 7 for k in range(spec.d)]
    for i in range(3):
        for k in range(spec.d):
            m = MotiveElement(spec, "M", spec.tau_power_basis(k, i))
            got = deltaM1z(m, z, max_level=i + 1)
            assert got == z[k].twist(i)


def test_tau_expansion_reconstructs_element():
    s = mzv_13_example()
    el = MotiveElement(s, "M", (TateElement.t(F2) * lin(F2), TateElement.const(F2, 1)))
    coeffs = tau_expansion(el)
    total = [TateElement.zero(F2), TateElement.zero(F2)]
    for i, row in enumerate(coeffs):
        for k, c in enumerate(row):
            if not is_zero(c):
                total = [a + b.scale(c) for a, b in zip(total, s.tau_power_basis(k, i))]
    assert tuple(total) == tuple(c.to_tate() for c in el.coords)


def test_negative_twist_rejected():
    s = make_carlitz_tensor(1, F2)
    with pytest.raises(NegativeTwist):
        basis_element(s, "N", 0).twist(-1)


def test_spec_json_roundtrip():
    for s in (make_carlitz_tensor(2, F3), mzv_13_example()):
        back = MotiveSpec.from_json(s.to_json())
        assert back.phi == s.phi and back.tau_basis == s.tau_basis
        assert back.sigma_basis == s.sigma_basis and back.blocks == s.blocks


@pytest.mark.parametrize("n,ctx", [(1, F3), (2, F3), (3, F2), (4, F2)])
def test_delta0_A_linearity(n, ctx):
    """δ_0^N(t·x) = d[t]·δ_0^N(x) and δ_0^M(t·x) = d[t]^⊤·δ_0^M(x)."""
    from motivic.tmodule import from_motive
    s = make_carlitz_tensor(n, ctx)
    D = [[RatFunc.lift(x) for x in row] for row in from_motive(s).dt]
    zero = RatFunc.lift(ctx.const(0))
    rng = random.Random(n)
    t = TateElement.t(ctx)
    for _ in range(4):
        b = rand_poly(ctx, rng)
        for kind, delta, tr in (("N", delta0N, False), ("M", delta0M, True)):
            v = [RatFunc.lift(x) for x in delta(MotiveElement(s, kind, (b,)))]
            w = [RatFunc.lift(x) for x in delta(MotiveElement(s, kind, (b * t,)))]
            want = [sum(((D[j][i] if tr else D[i][j]) * v[j] for j in range(n)), zero)
                    for i in range(n)]
            assert w == want
