import pytest

from motivic.errors import NonConvergent, PoleOrderTooHigh, Unsupported
from motivic.motive import MotiveElement, make_carlitz_tensor, mzv_13_example
from motivic.pairings import (F_partial, G_partial, G_plateau, _agreement, agf_instance,
                              agf_taylor_check, logalg_verify, mellin_parameters, mellin_verify,
                              mzv_verify, pairing_H, pairing_I, product_formula_log,
                              residue_checks, residue_vector, theta_tau, theta_tau_telescoped,
                              verify_pairings)
from motivic.scalar import FqContext, LaurentSeries, RatFunc, is_zero
from motivic.special import carlitz_products, special_point
from motivic.tate import TateElement, TRational, factor_power
from motivic.tmodule import exp_eval, from_motive, log_eval

F2, F3 = FqContext(2), FqContext(3)


def u_pow(ctx, k):
    return LaurentSeries.u(ctx) ** k


def carlitz(n, ctx):
    return from_motive(make_carlitz_tensor(n, ctx))


# -- F and G -------------------------------------------------------------


def test_F_partial_carlitz_terms():
    """F_n on C^{⊗1} is Σ_{i≤n} z^{q^i}/D_i."""
    T = carlitz(1, F2)
    z = u_pow(F2, 1)
    D, _ = carlitz_products(F2, 4)
    for n in range(4):
        got = F_partial(T, [z], n, 40)[0]
        want = LaurentSeries.zero(F2, 40)
        for i in range(n + 1):
            want = want + z.twist(i) * LaurentSeries.from_thetapoly(D[i]).inv(40)
        assert _agreement(got, want, 40) == 40


@pytest.mark.parametrize("T,z", [
    (carlitz(1, F3), lambda c: [u_pow(c, 1)]),
    (carlitz(2, F2), lambda c: [u_pow(c, 1), u_pow(c, 2)]),
    (from_motive(mzv_13_example()), lambda c: [u_pow(c, 1), 0, u_pow(c, 2), 0, u_pow(c, 1)]),
], ids=["c1q3", "c2q2", "mzv"])
def test_F_partial_converges_to_exp(T, z):
    zz = z(T.ctx)
    full = exp_eval(T, zz, 30)
    agree = [min(_agreement(a, b, 30) for a, b in zip(F_partial(T, zz, n, 30), full))
             for n in range(6)]
    assert agree[-1] == 30
    assert all(b >= a for a, b in zip(agree, agree[1:]))


@pytest.mark.parametrize("T,z", [
    (carlitz(1, F2), lambda c: [u_pow(c, 2)]),
    (carlitz(2, F3), lambda c: [u_pow(c, 3), u_pow(c, 4)]),
], ids=["c1q2", "c2q3"])
def test_G_partial_converges_to_log(T, z):
    zz = z(T.ctx)
    full = log_eval(T, zz, 30)
    st = G_plateau(T, zz, 30)
    assert min(_agreement(a, b, 30) for a, b in zip(st.accumulated, full)) == 30


def test_G_delta_matches_stream():
    T = from_motive(mzv_13_example())
    z = [0, 0, 0, 0, -1]
    for n in range(3):
        a = G_partial(T, z, n, 30, via="delta")
        b = G_partial(T, z, n, 30, via="stream")
        assert all(_agreement(x, y, 30) == 30 for x, y in zip(a, b))


# -- Θ_{t,τ} -----------------------------------------------------------------


@pytest.mark.parametrize("T", [carlitz(1, F2), carlitz(3, F3), from_motive(mzv_13_example())],
                         ids=["c1q2", "c3q3", "mzv"])
def test_theta_tau_telescoping(T):
    a, b = theta_tau(T), theta_tau_telescoped(T)
    assert len(a.coeffs) == len(b.coeffs) == len(T.taus)
    for A, B in zip(a.coeffs, b.coeffs):
        assert all(is_zero(x - y) for ra, rb in zip(A, B) for x, y in zip(ra, rb))


def test_theta_tau_carlitz_is_single_term():
    T = carlitz(1, F2)
    TT = theta_tau(T)
    assert len(TT.coeffs) == 1
    assert RatFunc.lift(TT.coeffs[0][0][0]) == RatFunc.lift(F2.const(1))
    assert not TT.is_zero()


# -- product formula ---------------------------------------------------------


@pytest.mark.parametrize("ctx", [F2, F3], ids=["q2", "q3"])
def test_product_formula_path_a_is_log_partial_sum(ctx):
    spec = make_carlitz_tensor(1, ctx)
    z = special_point(spec, TateElement.const(ctx, 1))
    _, L = carlitz_products(ctx, 3)
    for m in range(4):
        r = product_formula_log(spec, z, m, 20)
        assert not r["skipped"]
        want = sum((RatFunc(ctx.const(1), L[i]) for i in range(m + 1)),
                   RatFunc.lift(ctx.const(0)))
        assert RatFunc.lift(r["a"]) == want


@pytest.mark.parametrize("q,n", [(2, 1), (2, 2), (3, 1)])
def test_product_formula_paths_agree_in_the_limit(q, n):
    ctx = FqContext(q)
    spec = make_carlitz_tensor(n, ctx)
    z = special_point(spec, TateElement.const(ctx, 1))
    agree = [_agreement(r["a"], r["b"], 20)
             for r in (product_formula_log(spec, z, m, 20) for m in range(6))]
    assert all(b >= a for a, b in zip(agree, agree[1:]))
    assert agree[-1] == 20


def test_product_formula_zero_point():
    spec = make_carlitz_tensor(2, F2)
    r = product_formula_log(spec, [0, 0], 1, 20)
    assert r["a"].is_zero() and r["b"].is_zero()


def test_mellin_parameters_grow_with_precision():
    a = mellin_parameters(2, 2, 20)
    b = mellin_parameters(2, 2, 40)
    assert b[0] >= a[0] and b[1] > a[1]


@pytest.mark.parametrize("q,n", [(2, 1), (3, 1), (2, 2)])
def test_mellin_identity(q, n):
    rep = mellin_verify(q, n, precision=30)
    assert rep.passed, rep.checks
    assert rep.data["agreement"] >= 30


def test_mellin_corrupted_point_fails():
    rep = mellin_verify(2, 2, precision=30, corrupt=True)
    assert not rep.passed


def test_mellin_needs_supplied_H_past_q():
    with pytest.raises(Unsupported):
        mellin_verify(2, 3, precision=20)


def test_mellin_cap():
    with pytest.raises(NonConvergent):
        mellin_verify(2, 2, precision=40, t_degree_cap=8)


def test_mzv_identity():
    rep = mzv_verify(25)
    assert rep.passed, rep.checks
    assert rep.data["agreement"] >= 25


def test_mzv_identity_zero_point():
    assert mzv_verify(20, z=(0, 0, 0, 0, 0)).passed


# -- H and I -----------------------------------------------------------------


@pytest.mark.parametrize("T", [carlitz(1, F2), carlitz(2, F3), carlitz(3, F2),
                               from_motive(mzv_13_example())],
                         ids=["c1q2", "c2q3", "c3q2", "mzv"])
def test_pairings_identities(T):
    rep = verify_pairings(T, 3)
    assert rep.passed, rep.checks


def test_pairing_I_matches_H_trace_entry():
    T = carlitz(2, F2)
    H0 = pairing_H(T, 0)
    assert RatFunc.lift(H0[0][0]) == RatFunc.lift(F2.const(1))
    assert is_zero(pairing_I(T, 2, 0, 1))


# -- log-algebraicity ----------------------------------------------------------


@pytest.mark.parametrize("q,n", [(2, 1), (2, 2), (3, 1), (3, 2), (2, 3)])
def test_logalg_polynomial(q, n):
    ctx = FqContext(q)
    spec = make_carlitz_tensor(n, ctx)
    for h in (factor_power(ctx, 0, n), factor_power(ctx, 0, n) * TateElement.t(ctx)):
        rep = logalg_verify(spec, TRational(h))
        assert rep.passed, rep.checks


@pytest.mark.parametrize("ctx", [F2, F3], ids=["q2", "q3"])
def test_logalg_generating_function(ctx):
    spec = make_carlitz_tensor(1, ctx)
    h, expz = agf_instance(spec, LaurentSeries.u(ctx), tolerance=20)
    rep = logalg_verify(spec, h, 20)
    assert rep.passed, rep.checks
    T = from_motive(spec)
    assert _agreement(exp_eval(T, [LaurentSeries.u(ctx)], 20)[0], expz, 20) == 20


def test_agf_taylor_coefficients():
    spec = make_carlitz_tensor(1, F2)
    assert all(a >= 20 for a in agf_taylor_check(spec, LaurentSeries.u(F2), 20, 3))


def test_agf_rejects_large_z_and_tensor_powers():
    with pytest.raises(ValueError):
        agf_instance(make_carlitz_tensor(1, F2), LaurentSeries.one(F2))
    with pytest.raises(Unsupported):
        agf_instance(make_carlitz_tensor(2, F2), LaurentSeries.u(F2))


# -- residues -----------------------------------------------------------------


@pytest.mark.parametrize("q,n", [(2, 1), (2, 2), (3, 2), (2, 3)])
def test_residue_checks(q, n):
    ctx = FqContext(q)
    spec = make_carlitz_tensor(n, ctx)
    for i in (1, 2):
        for m in range(1, n + 1):
            h = TRational(TateElement.const(ctx, 1), {i: m})
            rep = residue_checks(spec, h)
            assert rep.passed, (i, m, rep.checks)


def test_residue_of_simple_pole_carlitz():
    """res of (t-θ)^{-1}/(t-θ^q) at θ^q is 1/(θ^q-θ)."""
    spec = make_carlitz_tensor(1, F2)
    h = TRational(TateElement.const(F2, 1), {1: 1})
    th = F2.theta()
    assert RatFunc.lift(residue_vector(spec, h, 1)[0]) == RatFunc(F2.const(1), th ** 2 - th)


def test_residue_pole_order_limits():
    spec = make_carlitz_tensor(2, F2)
    with pytest.raises(PoleOrderTooHigh):
        residue_checks(spec, TRational(TateElement.const(F2, 1), {1: 3}))
    with pytest.raises(PoleOrderTooHigh):
        residue_checks(spec, TRational(TateElement.const(F2, 1), {0: 1}))
