"""Anderson t-modules attached to motive specs.

φ_t = d[t] + Σ_j E_j τ^j acts on column vectors; coefficient matrices Q_i
(exponential) and P_i (logarithm) come from the δ_0 maps of the motive.
Coefficients stay exact; evaluation embeds them into K_∞.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from .errors import DivergentSeries, InconsistentBases, NonConvergent
from .linalg import det, identity, mat_add, mat_mul, mat_sub, mat_twist, zeros
from .motive import (MotiveSpec, basis_element, delta0M, delta0N, sigma_inv_pow,
                     tau_expansion, tau_inv_pow_normalized)
from .reports import VerificationReport, timed
from .scalar import INF, LaurentSeries, RatFunc, ThetaPoly, is_zero, valuation
from .tate import TateElement


def _rf(x):
    return x if isinstance(x, RatFunc) else RatFunc.lift(x)


def _mat_rf(m):
    return [[_rf(x) for x in row] for row in m]


@dataclass(frozen=True, eq=False)
class TModule:
    d: int
    dt: tuple        # d×d over F_q[θ]
    taus: tuple      # E_1..E_k
    source: MotiveSpec

    @property
    def ctx(self):
        return self.source.ctx

    @property
    def phi_t(self):
        """[d[t], E_1, ..., E_k]."""
        return [self.dt] + list(self.taus)

    def nilpotent_part(self):
        th = self.ctx.theta()
        return [[x - th if i == j else x for j, x in enumerate(row)]
                for i, row in enumerate(self.dt)]

    def is_nilpotent_ok(self):
        n = _mat_rf(self.nilpotent_part())
        p = n
        for _ in range(self.d - 1):
            p = mat_mul(p, n)
        return all(is_zero(x) for row in p for x in row)

    def apply_phi_t(self, z, precision):
        """φ_t(z) for a column vector z of scalars."""
        out = _mat_vec_series(self.dt, z, precision)
        for j, E in enumerate(self.taus, start=1):
            zj = [_twist(x, j) for x in z]
            out = [a + b for a, b in zip(out, _mat_vec_series(E, zj, precision))]
        return out

    def to_json(self):
        return {"d": self.d, "dt": [[_rf(x).to_json() for x in r] for r in self.dt],
                "taus": [[[_rf(x).to_json() for x in r] for r in E] for E in self.taus],
                "source": self.source.label}

    def __repr__(self):
        return f"TModule(d={self.d}, tau-degree={len(self.taus)}, source={self.source.label})"


def _poly_entries(mat, what):
    out = []
    for row in mat:
        new = []
        for x in row:
            if isinstance(x, RatFunc):
                if not x.is_polynomial():
                    raise InconsistentBases(f"{what} has a non-polynomial entry {x!r}")
                x = x.num
            new.append(x)
        out.append(tuple(new))
    return tuple(out)


def tau_side_matrices(spec: MotiveSpec, power: int = 1):
    """Matrices [F_0, F_1, ...] with t^power·g_k = Σ_i Σ_l (F_i)_{kl} τ^i(g_l)."""
    t = TateElement.t(spec.ctx)
    tp = t ** power
    rows = []
    for k in range(spec.d):
        rows.append(tau_expansion(basis_element(spec, "M", k).tmul(tp), max_level=2 * power + 2))
    levels = max(len(r) for r in rows)
    zero = spec.ctx.const(0)
    mats = [[[zero] * spec.d for _ in range(spec.d)] for _ in range(levels)]
    for k, r in enumerate(rows):
        for i, vec in enumerate(r):
            mats[i][k] = list(vec)
    while len(mats) > 1 and all(is_zero(x) for row in mats[-1] for x in row):
        mats.pop()
    return mats


def from_motive(spec: MotiveSpec) -> TModule:
    """φ_t from the τ-expansion of t·g_k, cross-checked on the σ side."""
    m_side = tau_side_matrices(spec)
    n_side = spec.theta_star
    size = max(len(m_side), len(n_side))
    zero = spec.ctx.const(0)
    pad = [[zero] * spec.d for _ in range(spec.d)]
    for i in range(size):
        a = m_side[i] if i < len(m_side) else pad
        b = n_side[i] if i < len(n_side) else pad
        for r in range(spec.d):
            for c in range(spec.d):
                if not is_zero(_rf(a[r][c]) - _rf(b[r][c])):
                    raise InconsistentBases(
                        f"τ- and σ-side disagree at level {i}, entry ({r + 1},{c + 1})")
    dt = _poly_entries(m_side[0], "d[t]")
    taus = tuple(_poly_entries(E, f"E_{j}") for j, E in enumerate(m_side[1:], start=1))
    T = TModule(spec.d, dt, taus, spec)
    if not T.is_nilpotent_ok():
        raise InconsistentBases("d[t] - θI is not nilpotent")
    return T


# ---------------------------------------------------------------------------
# coefficient streams
# ---------------------------------------------------------------------------


class CoeffStream:
    """Lazily generated Q_i (kind 'exp') or P_i (kind 'log'); cached."""

    def __init__(self, T: TModule, kind: str):
        if kind not in ("exp", "log"):
            raise ValueError("kind must be 'exp' or 'log'")
        self.T, self.kind = T, kind
        self._mats = [identity(T.ctx, T.d)]
        spec = T.source
        side = "M" if kind == "exp" else "N"
        self._elems = [basis_element(spec, side, k) for k in range(T.d)]
        self._lock = threading.RLock()

    def __getitem__(self, i):
        if i < 0:
            raise IndexError("coefficient index must be nonnegative")
        with self._lock:
            while len(self._mats) <= i:
                self._advance()
            return self._mats[i]

    def __len__(self):
        return len(self._mats)

    def _advance(self):
        i = len(self._mats)
        d = self.T.d
        if self.kind == "exp":
            self._elems = [tau_inv_pow_normalized(m, i, start=i - 1) for m in self._elems]
            rows = [delta0M(m, level=i) for m in self._elems]
            mat = [[_rf(x) for x in row] for row in rows]
        else:
            self._elems = [sigma_inv_pow(n, 1) for n in self._elems]
            cols = [delta0N(n) for n in self._elems]
            mat = [[_rf(cols[k][r]) for k in range(d)] for r in range(d)]
        self._mats.append(mat)


_STREAMS = {}
_STREAMS_LOCK = threading.Lock()


def _stream(T, kind):
    key = (id(T), kind)
    with _STREAMS_LOCK:
        entry = _STREAMS.get(key)
        if entry is None or entry[0] is not T:
            entry = (T, CoeffStream(T, kind))
            _STREAMS[key] = entry
        return entry[1]


def exp_coeff(T: TModule, i: int):
    """Q_i; row k is δ_0^M at level i of (τ^{-i} g_k)^{(i)}."""
    return _stream(T, "exp")[i]


def log_coeff(T: TModule, i: int):
    """P_i; column k is δ_0^N(σ^{-i} h_k)."""
    return _stream(T, "log")[i]


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def _twist(x, i):
    if isinstance(x, (int,)):
        return x
    return x.twist(i)


def scalar_product(c, x, precision):
    """c·x as a LaurentSeries correct to O(u^precision) when possible."""
    ctx = getattr(c, "ctx", None) or getattr(x, "ctx", None)
    if is_zero(c) or is_zero(x):
        return LaurentSeries.zero(ctx, precision)
    vc, vx = valuation(c), valuation(x)
    cl = _series(c, precision - vx + 1)
    xl = _series(x, precision - vc + 1)
    return cl * xl


def _series(x, prec):
    if isinstance(x, LaurentSeries):
        return x
    if isinstance(x, RatFunc) and not x.den.is_one():
        return LaurentSeries.from_ratfunc(x, max(prec, valuation(x) + 1))
    if isinstance(x, RatFunc):
        return LaurentSeries.from_thetapoly(x.num)
    return LaurentSeries.coerce(x)


def _mat_vec_series(mat, z, precision):
    out = []
    for row in mat:
        acc = None
        for c, x in zip(row, z):
            if is_zero(c) or is_zero(x):
                continue
            term = scalar_product(c, x, precision)
            acc = term if acc is None else acc + term
        out.append(acc if acc is not None else LaurentSeries.zero(_ctx_of(z), precision))
    return out


def _ctx_of(z):
    for x in z:
        c = getattr(x, "ctx", None)
        if c is not None:
            return c
    raise ValueError("cannot infer the field from the vector")


def _mat_val(mat):
    return min((valuation(x) for row in mat for x in row if not is_zero(x)), default=INF)


def _vec_val(z):
    return min((valuation(x) for x in z if not is_zero(x)), default=INF)


def _series_sum(T, z, precision, kind, max_terms):
    ctx = T.ctx
    z = [x if not isinstance(x, int) else ctx.const(x) for x in z]
    if all(is_zero(x) for x in z):
        return [LaurentSeries.zero(ctx, precision) for _ in z], 0
    zval = _vec_val(z)
    stream = _stream(T, kind)
    total = [LaurentSeries.zero(ctx, precision) for _ in z]
    below = 0
    history = []
    for i in range(max_terms):
        C = stream[i]
        bound = _mat_val(C) + zval * ctx.q ** i if zval != INF else INF
        history.append(bound)
        if bound >= precision:
            below += 1
            if below >= 2:
                return [s.with_precision(precision) if s.precision > precision else s
                        for s in total], i
            continue
        below = 0
        if kind == "log" and len(history) >= 4 and \
                history[-1] < history[-2] < history[-3] < history[-4]:
            raise DivergentSeries("three consecutive logarithm terms grew; z is outside the domain")
        zi = [_twist(x, i) for x in z]
        term = _mat_vec_series(C, zi, precision)
        total = [a + b for a, b in zip(total, term)]
    raise NonConvergent(f"series did not settle within {max_terms} terms")


def exp_eval(T: TModule, z, precision: int = 40, max_terms: int = 64):
    """Σ Q_i z^{(i)} to O(u^precision)."""
    return _series_sum(T, z, precision, "exp", max_terms)[0]


def log_eval(T: TModule, z, precision: int = 40, max_terms: int = 64):
    """Σ P_i z^{(i)} to O(u^precision); DivergentSeries outside the domain."""
    return _series_sum(T, z, precision, "log", max_terms)[0]


# ---------------------------------------------------------------------------
# exact verifications
# ---------------------------------------------------------------------------


def _mat_twist_rf(m, i):
    return [[_rf(x).twist(i) for x in row] for row in m]


def verify_func_eq(T: TModule, i_max: int) -> VerificationReport:
    rep = VerificationReport("func-eq", params={"i_max": i_max, "source": T.source.label})
    with timed(rep):
        dt = _mat_rf(T.dt)
        E = [_mat_rf(m) for m in T.taus]
        for i in range(i_max + 1):
            Q = exp_coeff(T, i)
            lhs = mat_mul(Q, _mat_twist_rf(dt, i))
            rhs = mat_mul(dt, Q)
            for j, Ej in enumerate(E, start=1):
                if i - j >= 0:
                    rhs = mat_add(rhs, mat_mul(Ej, _mat_twist_rf(exp_coeff(T, i - j), j)))
            rep.add(f"exp recurrence i={i}", _zero_mat(mat_sub(lhs, rhs)))
            P = log_coeff(T, i)
            lhs = mat_mul(dt, P)
            rhs = mat_mul(P, _mat_twist_rf(dt, i))
            for j, Ej in enumerate(E, start=1):
                if i - j >= 0:
                    rhs = mat_add(rhs, mat_mul(log_coeff(T, i - j), _mat_twist_rf(Ej, i - j)))
            rep.add(f"log recurrence i={i}", _zero_mat(mat_sub(lhs, rhs)))
    return rep


def _zero_mat(m):
    return all(is_zero(x) for row in m for x in row)


def source_is_triangular(spec: MotiveSpec) -> bool:
    """Lower-triangular σ-matrix with the standard block basis."""
    return all(spec.phi[i][j].is_zero() for i in range(spec.r) for j in range(i + 1, spec.r))


def verify_invertible(T: TModule, i_max: int) -> VerificationReport:
    rep = VerificationReport("invertibility", params={"i_max": i_max, "source": T.source.label})
    with timed(rep):
        if not source_is_triangular(T.source):
            rep.notes.append("hypothesis not satisfied")
        for i in range(i_max + 1):
            rep.add(f"det Q_{i} != 0", not is_zero(det(exp_coeff(T, i))))
            rep.add(f"det P_{i} != 0", not is_zero(det(log_coeff(T, i))))
    return rep


def composition_defect(T: TModule, i: int):
    """Σ_{a+b=i} Q_a P_b^{(a)} - [i=0] I."""
    acc = zeros(T.ctx, T.d, T.d)
    for a in range(i + 1):
        acc = mat_add(acc, mat_mul(exp_coeff(T, a), _mat_twist_rf(log_coeff(T, i - a), a)))
    if i == 0:
        acc = mat_sub(acc, identity(T.ctx, T.d))
    return acc


def verify_composition(T: TModule, i_max: int = 4) -> VerificationReport:
    rep = VerificationReport("compose", params={"i_max": i_max, "source": T.source.label})
    with timed(rep):
        for i in range(i_max + 1):
            rep.add(f"Σ Q_a P_b^(a) at i={i}", _zero_mat(composition_defect(T, i)))
    return rep


def tau_poly_compose(A, B):
    """(Σ A_j τ^j)(Σ B_i τ^i) = Σ A_j B_i^{(j)} τ^{i+j}."""
    out = []
    for j, Aj in enumerate(A):
        for i, Bi in enumerate(B):
            prod = mat_mul(_mat_rf(Aj), _mat_twist_rf(Bi, j))
            while len(out) <= i + j:
                out.append(None)
            out[i + j] = prod if out[i + j] is None else mat_add(out[i + j], prod)
    return out


def verify_phi_t_squared(T: TModule) -> VerificationReport:
    """φ_{t²} from the motive against φ_t ∘ φ_t."""
    rep = VerificationReport("phi-t-squared", params={"source": T.source.label})
    with timed(rep):
        comp = tau_poly_compose(T.phi_t, T.phi_t)
        direct = tau_side_matrices(T.source, power=2)
        zero = zeros(T.ctx, T.d, T.d)
        for s in range(max(len(comp), len(direct))):
            a = comp[s] if s < len(comp) else zero
            b = _mat_rf(direct[s]) if s < len(direct) else zero
            rep.add(f"τ^{s} coefficient", _zero_mat(mat_sub(a, b)))
    return rep


def carlitz_closed_form_Q(spec: MotiveSpec, i: int):
    """Row k: (∂^j((t-θ)^{k-1}/D_i(t)^n))_{j<n} at t = θ^{q^i}."""
    from .tate import TRational
    n = spec.d
    rows = []
    for k in range(n):
        f = TRational(TateElement.linear(spec.ctx, spec.ctx.theta()) ** k,
                      {j: n for j in range(i)})
        rows.append([_rf(x) for x in f.stack(i, n)[::-1]])
    return rows


def is_identity(m):
    return all(is_zero(_rf(x) - (1 if i == j else 0)) for i, row in enumerate(m)
               for j, x in enumerate(row))


def random_small_vector(ctx, d, rng, terms: int = 8):
    """A nonzero vector with entries Σ_{j=1}^{terms} c_j u^j, c_j ∈ F_q."""
    while True:
        z = [LaurentSeries._make(ctx, 1, ctx.kernel.from_list([rng.randrange(ctx.q)
                                                               for _ in range(terms)]), INF)
             for _ in range(d)]
        if not all(x.is_zero() for x in z):
            return z


def verify_roundtrip(T: TModule, seed: int = 0, count: int = 20,
                     tolerance: int = 30) -> VerificationReport:
    """Log(Exp(z)) = z to O(u^tolerance) for ``count`` seeded z with |z| < 1."""
    import random
    rng = random.Random(seed)
    rep = VerificationReport("log-exp-roundtrip",
                             params={"seed": seed, "count": count, "tolerance": tolerance,
                                     "source": T.source.label if T.source else None})
    with timed(rep):
        worst = INF
        for _ in range(count):
            z = random_small_vector(T.ctx, T.d, rng)
            w = log_eval(T, exp_eval(T, z, tolerance + 8), tolerance + 8)
            agree = min(min((a - b).val if not (a - b).is_zero() else (a - b).prec, tolerance + 8)
                        for a, b in zip(w, z))
            worst = min(worst, agree)
        rep.data["worst_agreement"] = worst
        rep.add(f"Log(Exp(z)) = z for {count} seeded z", worst >= tolerance, f"valuation {worst}")
    return rep
