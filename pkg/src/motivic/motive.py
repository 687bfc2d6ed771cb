"""t-motives and dual t-motives over A = F_q[t] in coordinates.

Conventions (row vectors in the t-frame):

* dual side N:  σ(b) = b^{(-1)} Φ,  so  σ^{-i}(b) = b^{(i)} (Φ^{(i)})^{-1} ⋯ (Φ^{(1)})^{-1}
* motive side M: τ(b) = b^{(1)} Φ^⊤, so the twist-normalized inverse is
  (τ^{-i} b)^{(i)} = b · X · X^{(1)} ⋯ X^{(i-1)}  with X = (Φ^⊤)^{-1}.

``phi`` is stored exactly as the lower-triangular σ-matrix of the dual
motive.  Only nonnegative Frobenius twists ever occur.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass, field
from functools import cached_property

from .errors import (DecompositionFailure, InconsistentBases, NonConvergent,
                     NonPolynomialBasis, PoleAtEvaluationPoint)
from .linalg import nullspace_fq, solve
from .scalar import (INF, FqContext, LaurentSeries, RatFunc, ThetaPoly, is_zero,
                     valuation)
from .tate import TateElement, TRational, factor_power, node

# ---------------------------------------------------------------------------
# small helpers on polynomial matrices
# ---------------------------------------------------------------------------


def _tate_det(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = None
    for j in range(n):
        if m[0][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _tate_det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total if total is not None else m[0][0] * 0


def _adjugate(m):
    """adj(m) with m · adj(m) = det(m) · I."""
    n = len(m)
    ctx = m[0][0].ctx
    if n == 1:
        return [[TateElement.const(ctx, 1)]]
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(m) if k != i]
            c = _tate_det(minor)
            out[j][i] = -c if (i + j) % 2 else c
    return out


def _row_times(vec, mat):
    """Row vector of TRationals times a matrix of TateElements."""
    out = []
    for j in range(len(mat[0])):
        acc = None
        for k, v in enumerate(vec):
            e = mat[k][j]
            if e.is_zero() or v.is_zero():
                continue
            term = v * e
            acc = term if acc is None else acc + term
        out.append(acc if acc is not None else TRational(TateElement.zero(vec[0].ctx)))
    return out


def _scalar_inverse(u):
    if isinstance(u, ThetaPoly):
        if u.degree() == 0:
            return ThetaPoly._raw(u.ctx, u.ctx.kernel.monomial(u.ctx.inv(u.lead()), 0))
        return RatFunc(u.ctx.const(1), u)
    return u.inverse()


# ---------------------------------------------------------------------------
# MotiveSpec
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MotiveSpec:
    ctx: FqContext
    r: int
    d: int
    phi: tuple            # r×r tuple of TateElement (the lower-triangular σ-matrix)
    blocks: tuple         # ℓ_1..ℓ_r
    sigma_basis: tuple    # d vectors h_k, each an r-tuple of TateElement
    tau_basis: tuple      # d vectors g_k
    label: str = ""
    params: dict = field(default_factory=dict)
    m_blockwise: bool = False   # δ_0^M is the plain Taylor stack (Carlitz family)
    conventions: str = ("row vectors; sigma(b) = b^(-1) Phi; tau(b) = b^(1) Phi^T; "
                        "H factors stored already twisted down")

    def __post_init__(self):
        if len(self.phi) != self.r or any(len(row) != self.r for row in self.phi):
            raise ValueError("phi must be r×r")
        if sum(self.blocks) != self.d or len(self.blocks) != self.r:
            raise ValueError("blocks must have r entries summing to d")
        for i in range(self.r):
            for j in range(i + 1, self.r):
                if not self.phi[i][j].is_zero():
                    raise ValueError("phi must be lower triangular")
        object.__setattr__(self, "_lock", threading.RLock())
        object.__setattr__(self, "_memo", {})
        self.unit  # verifies det(phi) = unit·(t-θ)^d

    # -- determinant data ------------------------------------------------
    @cached_property
    def det_phi(self) -> TateElement:
        return _tate_det([list(r) for r in self.phi])

    @cached_property
    def unit(self):
        rest = self.det_phi
        theta = node(self.ctx, 0)
        for _ in range(self.d):
            rest, rem = rest.divide_linear(theta)
            if not is_zero(rem):
                raise ValueError("det(phi) is not divisible by (t-θ)^d")
        if rest.degree() != 0:
            raise ValueError("det(phi)/(t-θ)^d is not a unit")
        return rest.coeff(0)

    @cached_property
    def adj_phi(self):
        return _adjugate([list(r) for r in self.phi])

    def _cached(self, key, fn):
        memo = self._memo
        if key in memo:
            return memo[key]
        with self._lock:
            if key not in memo:
                memo[key] = fn()
            return memo[key]

    def phi_twisted(self, j):
        return self._cached(("phi", j), lambda: [[e.twist(j) for e in row] for row in self.phi])

    def adj_twisted(self, j):
        return self._cached(("adj", j), lambda: [[e.twist(j) for e in row] for row in self.adj_phi])

    def adjT_twisted(self, j):
        return self._cached(("adjT", j), lambda: [list(r) for r in zip(*self.adj_twisted(j))])

    def unit_inverse_twisted(self, j):
        return self._cached(("uinv", j), lambda: _scalar_inverse(self.unit.twist(j)))

    def tau_power_basis(self, k, i):
        """τ^i(g_k) = g_k^{(i)} Φ^{⊤(i-1)} ⋯ Φ^⊤ as a polynomial vector."""
        def build():
            if i == 0:
                return tuple(self.tau_basis[k])
            prev = self.tau_power_basis(k, i - 1)
            # τ(b) = b^{(1)} Φ^⊤
            tw = [e.twist(1) for e in prev]
            out = []
            for col in range(self.r):
                acc = TateElement.zero(self.ctx)
                for row in range(self.r):
                    acc = acc + tw[row] * self.phi[col][row]
                out.append(acc)
            return tuple(out)
        return self._cached(("taupow", k, i), build)

    @property
    def theta_star(self):
        """[d[t], E_1, E_2, ...] recovered by peeling t·h_k on the σ-side."""
        return self._cached(("theta_star",), lambda: _peel_phi_t(self))

    # -- serialization --------------------------------------------------
    def to_json(self):
        def vec(v):
            return [[c.to_json() for c in e.coeffs] for e in v]
        return {
            "label": self.label, "field": self.ctx.to_json(), "r": self.r, "d": self.d,
            "blocks": list(self.blocks), "conventions": self.conventions,
            "phi": [vec(row) for row in self.phi],
            "sigma_basis": [vec(v) for v in self.sigma_basis],
            "tau_basis": [vec(v) for v in self.tau_basis],
            "m_blockwise": self.m_blockwise, "params": self.params,
        }

    @classmethod
    def from_json(cls, data):
        f = data["field"]
        ctx = FqContext(f["p"], f["r"], f["modulus"])

        def vec(v):
            return tuple(TateElement(ctx, [ThetaPoly(ctx, c) for c in e]) for e in v)
        return cls(ctx, data["r"], data["d"], tuple(vec(row) for row in data["phi"]),
                   tuple(data["blocks"]), tuple(vec(v) for v in data["sigma_basis"]),
                   tuple(vec(v) for v in data["tau_basis"]), data["label"],
                   data.get("params", {}), data.get("m_blockwise", False),
                   data["conventions"])


@dataclass(frozen=True, eq=False)
class MotiveElement:
    parent: MotiveSpec
    side: str
    coords: tuple   # r TRationals

    def __post_init__(self):
        if self.side not in ("M", "N"):
            raise ValueError("side must be 'M' or 'N'")
        object.__setattr__(self, "coords", tuple(TRational.lift(c, self.parent.ctx)
                                                 for c in self.coords))

    @classmethod
    def of(cls, spec, side, coords):
        ctx = spec.ctx
        return cls(spec, side, tuple(c if isinstance(c, (TRational, TateElement))
                                     else TateElement(ctx, [c]) for c in coords))

    def _new(self, coords):
        return MotiveElement(self.parent, self.side, tuple(coords))

    def __add__(self, o):
        return self._new(a + b for a, b in zip(self.coords, o.coords))

    def __sub__(self, o):
        return self._new(a - b for a, b in zip(self.coords, o.coords))

    def __neg__(self):
        return self._new(-a for a in self.coords)

    def scale(self, c):
        return self._new(a * c for a in self.coords)

    def tmul(self, f):
        """Multiplication by a polynomial in t (TateElement)."""
        return self._new(a * f for a in self.coords)

    def twist(self, i):
        return self._new(a.twist(i) for a in self.coords)

    def is_zero(self):
        return all(c.simplify().num.is_zero() for c in self.coords)

    def equals(self, o):
        return all(a.equals(b) for a, b in zip(self.coords, o.coords))

    def polynomial(self, tolerance=None):
        return tuple(c.to_tate(tolerance) for c in self.coords)

    def __repr__(self):
        return f"{self.side}{list(self.coords)}"


def basis_element(spec, side, k):
    vec = spec.sigma_basis[k] if side == "N" else spec.tau_basis[k]
    return MotiveElement(spec, side, tuple(vec))


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def _t_minus_theta_pow(ctx, m):
    return factor_power(ctx, 0, m)


def np21_sigma_basis(ctx, r, blocks):
    """h_{ℓ_1+…+ℓ_i-j+1} = (t-θ)^{j-1} e_i."""
    d = sum(blocks)
    basis = [None] * d
    start = 0
    for i, li in enumerate(blocks):
        end = start + li
        for j in range(1, li + 1):
            vec = [TateElement.zero(ctx)] * r
            vec[i] = _t_minus_theta_pow(ctx, j - 1)
            basis[end - j] = tuple(vec)
        start = end
    return tuple(basis)


def make_carlitz_tensor(n: int, ctx: FqContext) -> MotiveSpec:
    """C^{⊗n}: Φ = ((t-θ)^n), g_k = (t-θ)^{k-1}, h_k = (t-θ)^{n-k}."""
    if n < 1:
        raise ValueError("tensor power must be >= 1")
    phi = ((_t_minus_theta_pow(ctx, n),),)
    tau = tuple((_t_minus_theta_pow(ctx, k),) for k in range(n))
    sigma = np21_sigma_basis(ctx, 1, (n,))
    spec = MotiveSpec(ctx, 1, n, phi, (n,), sigma, tau, label=f"carlitz_tensor({n})",
                      params={"n": n}, m_blockwise=True)
    # the τ^i(g_k) have pairwise distinct t-degrees n·i + k - 1
    for i in range(3):
        for k in range(n):
            if spec.tau_power_basis(k, i)[0].degree() != n * i + k:
                raise InconsistentBases("Carlitz τ-basis is not degree-triangular")
    return spec


def mzv_star_phi(s, H, ctx):
    """Φ_{j,l} = (-1)^{j-l} ∏_{l≤k<j} H_k · (t-θ)^{s_l+⋯+s_r}, l ≤ j."""
    r = len(s)
    phi = [[TateElement.zero(ctx)] * r for _ in range(r)]
    for j in range(r):
        for l in range(j + 1):
            e = _t_minus_theta_pow(ctx, sum(s[l:]))
            for k in range(l, j):
                e = e * H[k]
            if (j - l) % 2:
                e = -e
            phi[j][l] = e
    return tuple(tuple(row) for row in phi)


def make_mzv_star(s, H, ctx: FqContext, max_degree: int = 8, seed: int = 0) -> MotiveSpec:
    """Star dual motive of an MZV tuple.

    ``H`` lists the r-1 connecting polynomials already twisted down once
    (entries are TateElements or ThetaPoly constants).  Blocks are
    ℓ_j = s_j + ⋯ + s_r.
    """
    s = tuple(int(x) for x in s)
    if not s or any(x < 1 for x in s):
        raise ValueError("MZV tuple entries must be positive")
    if len(H) != len(s) - 1:
        raise ValueError("need len(s) - 1 connecting polynomials")
    H = [h if isinstance(h, TateElement) else TateElement(ctx, [h]) for h in H]
    if len(s) == 1:
        return make_carlitz_tensor(s[0], ctx)
    r = len(s)
    blocks = tuple(sum(s[j:]) for j in range(r))
    phi = mzv_star_phi(s, H, ctx)
    sigma = np21_sigma_basis(ctx, r, blocks)
    d = sum(blocks)
    provisional = MotiveSpec(ctx, r, d, phi, blocks, sigma, sigma, label="provisional")
    tau = solve_tau_basis(provisional, max_degree=max_degree, seed=seed)
    return MotiveSpec(ctx, r, d, phi, blocks, sigma, tau, label=f"mzv_star{s}",
                      params={"s": list(s), "H": [repr(h) for h in H]})


def mzv_13_example(ctx=None) -> MotiveSpec:
    """q = 2 motive whose logarithm produces ζ_A(1,3) (tuple (3,1), H = t-θ)."""
    ctx = ctx or FqContext(2)
    if ctx.q != 2:
        raise ValueError("the worked MZV example lives in characteristic 2, q = 2")
    return make_mzv_star((3, 1), [TateElement.linear(ctx, ctx.theta())], ctx)


# ---------------------------------------------------------------------------
# twist-normalized inverse powers
# ---------------------------------------------------------------------------


def sigma_inv_pow(n: MotiveElement, i: int) -> MotiveElement:
    """σ^{-i}(n) using only up-twists."""
    if i < 0:
        raise ValueError("i must be nonnegative")
    spec = n.parent
    cur = list(n.coords)
    for _ in range(i):
        cur = [c.twist(1) for c in cur]
        cur = _row_times(cur, spec.adj_twisted(1))
        uinv = spec.unit_inverse_twisted(1)
        cur = [c.divide_by_factor(1, spec.d) * uinv if not _is_one(uinv)
               else c.divide_by_factor(1, spec.d) for c in cur]
    return MotiveElement(spec, "N", tuple(cur))


def tau_inv_pow_normalized(m: MotiveElement, i: int, start: int = 0) -> MotiveElement:
    """(τ^{-i} m)^{(i)} = m · X · X^{(1)} ⋯ X^{(i-1)}, X = (Φ^⊤)^{-1}.

    With ``start = s`` the input is taken to be the level-s result already,
    so only the factors X^{(s)} ⋯ X^{(i-1)} are applied.
    """
    if i < 0 or start < 0 or start > i:
        raise ValueError("need 0 <= start <= i")
    spec = m.parent
    cur = list(m.coords)
    for j in range(start, i):
        cur = _row_times(cur, spec.adjT_twisted(j))
        uinv = spec.unit_inverse_twisted(j)
        cur = [c.divide_by_factor(j, spec.d) * uinv if not _is_one(uinv)
               else c.divide_by_factor(j, spec.d) for c in cur]
    return MotiveElement(spec, "M", tuple(cur))


def _is_one(x):
    return isinstance(x, ThetaPoly) and x.is_one()


def sigma_apply_up(b: MotiveElement) -> MotiveElement:
    """σ(b^{(1)}) = b Φ: σ applied to an up-twisted element (test helper)."""
    spec = b.parent
    return MotiveElement(spec, "N", tuple(_row_times(list(b.coords), [list(r) for r in spec.phi])))


def tau_apply(b: MotiveElement) -> MotiveElement:
    """τ(b) = b^{(1)} Φ^⊤."""
    spec = b.parent
    tw = [c.twist(1) for c in b.coords]
    phiT = [list(r) for r in zip(*spec.phi)]
    return MotiveElement(spec, "M", tuple(_row_times(tw, phiT)))


# ---------------------------------------------------------------------------
# δ_0 maps
# ---------------------------------------------------------------------------


def delta0N(n: MotiveElement, level: int = 0):
    """Blockwise stack (∂^{ℓ_i-1} α_i, …, α_i) at θ^{q^level}, highest first.

    ``level > 0`` evaluates the twisted map: δ_0^N(x)^{(level)} equals
    delta0N(x^{(level)}, level).
    """
    spec = n.parent
    out = []
    for coord, li in zip(n.coords, spec.blocks):
        out.extend(coord.stack(level, li))
    return out


def delta0M(m: MotiveElement, level: int = 0):
    """δ_0^M evaluated at θ^{q^level} on the level-twisted structure.

    For the Carlitz family this is the Taylor stack (m, ∂m, …) lowest
    first; otherwise the quotient-coordinates method is used.
    """
    spec = m.parent
    if spec.m_blockwise:
        out = []
        for coord, li in zip(m.coords, spec.blocks):
            out.extend(coord.stack(level, li)[::-1])
        return out
    return delta0M_quotient(m, level)


def _principal_vector(vec, level, d):
    """Concatenated Taylor coefficients (orders 0..d-1) at θ^{q^level}."""
    out = []
    for c in vec:
        f = c if isinstance(c, TRational) else TRational(c)
        if f.is_zero():
            out.extend([f.ctx.const(0)] * d)
            continue
        if f.poles.get(level):
            f = f.simplify()
            if f.poles.get(level):
                raise PoleAtEvaluationPoint("element is not regular at the evaluation point")
        _, cs = f.laurent_at(level, d)
        out.extend(cs)
    return out


def delta0M_quotient(m: MotiveElement, level: int = 0):
    """Unique c with (m - Σ c_k g_k^{(level)})·adj(Φ^⊤)^{(level)} ≡ 0 mod (t-θ^{q^level})^d."""
    spec = m.parent
    d = spec.d
    adjT = spec.adjT_twisted(level)
    target = _principal_vector(_row_times(list(m.coords), adjT), level, d)

    def columns():
        cols = []
        for k in range(d):
            g = [TRational(e.twist(level)) for e in spec.tau_basis[k]]
            cols.append(_principal_vector(_row_times(g, adjT), level, d))
        return cols
    cols = spec._cached(("q0M", level), columns)
    A = [[cols[k][row] for k in range(d)] for row in range(len(target))]
    return solve(A, target)


def delta0N_quotient(n: MotiveElement, level: int = 0):
    """Unique c with (n - Σ c_k h_k^{(level)})·adj(Φ)^{(level)} ≡ 0 mod (t-θ^{q^level})^d."""
    spec = n.parent
    d = spec.d
    adj = spec.adj_twisted(level)
    target = _principal_vector(_row_times(list(n.coords), adj), level, d)

    def columns():
        cols = []
        for k in range(d):
            h = [TRational(e.twist(level)) for e in spec.sigma_basis[k]]
            cols.append(_principal_vector(_row_times(h, adj), level, d))
        return cols
    cols = spec._cached(("q0N", level), columns)
    A = [[cols[k][row] for k in range(d)] for row in range(len(target))]
    return solve(A, target)


# ---------------------------------------------------------------------------
# δ_1 maps
# ---------------------------------------------------------------------------


def _vec_norm_log(vec):
    best = -INF
    for x in vec:
        v = valuation(x)
        if v != INF:
            best = max(best, -v)
    return best


def delta1N(n: MotiveElement, max_level: int = 64, tolerance=None, return_levels=False):
    """Σ_j (c_{·,j})^{(j)} from the σ-basis expansion, by δ_0-peeling.

    The level-j vector δ_0^N(remainder_j) is already the twisted
    coefficient (c_{·,j})^{(j)}, so no further twisting is applied.
    ``tolerance`` (a u-valuation) ends numeric expansions.
    """
    spec = n.parent
    cur = n
    total = None
    levels = []
    for level in range(max_level + 1):
        c = delta0N(cur)
        levels.append(c)
        total = list(c) if total is None else [a + b for a, b in zip(total, c)]
        rest = list(cur.coords)
        for k, ck in enumerate(c):
            if is_zero(ck):
                continue
            for idx in range(spec.r):
                e = spec.sigma_basis[k][idx]
                if not e.is_zero():
                    rest[idx] = rest[idx] - TRational(e * ck)
        rest_el = MotiveElement(spec, "N", tuple(rest))
        if _depleted(rest_el, tolerance):
            return (total, levels) if return_levels else total
        nxt = sigma_inv_pow(rest_el, 1)
        simplified = tuple(TRational(c.to_tate(tolerance)) for c in nxt.coords)
        cur = MotiveElement(spec, "N", simplified)
    raise NonConvergent(f"σ-expansion not exhausted after {max_level} levels")


def _depleted(el, tolerance):
    for c in el.coords:
        num = c.num
        for coef in num.coeffs:
            if is_zero(coef):
                continue
            if tolerance is not None and valuation(coef) >= tolerance:
                continue
            return False
    return True


def tau_expansion(m: MotiveElement, max_level: int = 8, hard_cap: int = 32):
    """Coefficients c[i][k] with m = Σ c_{k,i} τ^i(g_k), by linear solve.

    ``m`` must be polynomial.  A fast solve restricted to basis vectors of
    degree at most deg(m) is tried first; if leading terms must cancel, the
    unrestricted solve runs up to the level bound of ``_level_bound``.
    """
    spec = m.parent
    poly = m.polynomial()
    try:
        return _tau_solve(spec, poly, max_level)
    except DecompositionFailure:
        pass
    level = _level_bound(spec, poly)
    if level > hard_cap:
        raise DecompositionFailure(f"τ-expansion needs {level} levels, above the cap {hard_cap}")
    return _tau_solve(spec, poly, level, prune=False)


def _level_bound(spec, poly):
    """Levels sufficient for the τ-expansion of ``poly``.

    In coordinates of the t-basis m_j (first vector of each block) the
    element has degree ≤ D; t acts through φ_t with τ-degree s, so
    t^D m_j needs levels ≤ D·s.
    """
    starts, acc = [], 0
    for b in spec.blocks:
        starts.append(acc)
        acc += b
    B = [list(spec.tau_basis[k]) for k in starts]
    adj = _adjugate(B)
    deg = -1
    for col in range(spec.r):
        c = None
        for row in range(spec.r):
            if poly[row].is_zero() or adj[row][col].is_zero():
                continue
            term = poly[row] * adj[row][col]
            c = term if c is None else c + term
        if c is not None and not c.is_zero():
            deg = max(deg, c.degree())
    s = max(1, len(spec.theta_star) - 1)
    return max(deg, 0) * s + 1


def _tau_solve(spec, poly, level, prune=True):
    ctx = spec.ctx
    cols = [(k, i) for i in range(level + 1) for k in range(spec.d)]
    vecs = [spec.tau_power_basis(k, i) for k, i in cols]
    target_deg = max(e.degree() for e in poly) if any(not e.is_zero() for e in poly) else -1
    if target_deg < 0:
        return [[ctx.const(0)] * spec.d]
    if prune:
        # basis vectors above the target degree are skipped in the fast pass
        keep = [idx for idx, v in enumerate(vecs) if max(e.degree() for e in v) <= target_deg]
    else:
        keep = list(range(len(vecs)))
    if not keep:
        raise DecompositionFailure("no basis element of small enough degree")
    top = max([target_deg] + [e.degree() for c in keep for e in vecs[c]])
    rows = []
    rhs = []
    for idx in range(spec.r):
        for deg in range(top + 1):
            rows.append([vecs[c].__getitem__(idx).coeff(deg) for c in keep])
            rhs.append(poly[idx].coeff(deg))
    sol = solve(rows, rhs)
    nlev = max(cols[c][1] for c in keep) + 1
    out = [[ctx.const(0)] * spec.d for _ in range(nlev)]
    for val, c in zip(sol, keep):
        k, i = cols[c]
        out[i][k] = val
    return out


def deltaM1z(m: MotiveElement, z, max_level: int = 8, tolerance=None):
    """Σ c_{k,i} z_k^{q^i} from the τ-basis expansion of a polynomial m."""
    coeffs = tau_expansion(m, max_level)
    total = None
    for i, row in enumerate(coeffs):
        for k, c in enumerate(row):
            if is_zero(c) or is_zero(z[k]):
                continue
            term = c * z[k].twist(i)
            total = term if total is None else total + term
    if total is None:
        return m.parent.ctx.const(0)
    return total


def deltaM1z_carlitz_series(spec: MotiveSpec, m: TateElement, z, max_level: int = 64,
                            tolerance=None, return_terms=False):
    """δ_{1,z}^M for the Carlitz family on a numeric entire series.

    Bottom-up Hermite peeling: n synthetic divisions by (t - θ^{q^j})
    give c_{1,j}, …, c_{n,j}; the quotient passes to level j+1.  Stops when
    the level contribution falls below u^tolerance twice in a row.
    """
    if not spec.m_blockwise or spec.r != 1:
        raise ValueError("series peeling is implemented for the Carlitz family")
    n = spec.d
    cur = m
    total = None
    terms = []
    small = 0
    for j in range(max_level + 1):
        x = node(spec.ctx, j)
        cs = []
        for _ in range(n):
            cur, rem = cur.divide_linear(x)
            cs.append(rem)
        contrib = None
        for k in range(n):
            if is_zero(cs[k]) or is_zero(z[k]):
                continue
            term = cs[k] * z[k].twist(j)
            contrib = term if contrib is None else contrib + term
        terms.append(cs)
        if contrib is not None:
            total = contrib if total is None else total + contrib
        if tolerance is not None:
            if contrib is None or valuation(contrib) >= tolerance:
                small += 1
                if small >= 2:
                    break
            else:
                small = 0
        if cur.is_zero():
            break
    else:
        if tolerance is not None:
            raise NonConvergent("δ_{1,z} peeling did not settle")
    if total is None:
        total = spec.ctx.const(0)
    return (total, terms) if return_terms else total


# ---------------------------------------------------------------------------
# recovering φ_t
# ---------------------------------------------------------------------------


def _peel_phi_t(spec: MotiveSpec):
    """Columns of d[t] and E_j from the σ-expansion of t·h_k."""
    d = spec.d
    zero = spec.ctx.const(0)
    mats = []
    t = TateElement.t(spec.ctx)
    for k in range(d):
        hk = basis_element(spec, "N", k)
        _, levels = delta1N(hk.tmul(t), max_level=16, return_levels=True)
        for j, vec in enumerate(levels):
            while len(mats) <= j:
                mats.append([[zero] * d for _ in range(d)])
            for l in range(d):
                mats[j][l][k] = vec[l]
    while len(mats) > 1 and all(is_zero(x) for row in mats[-1] for x in row):
        mats.pop()
    return mats


def solve_tau_basis(spec: MotiveSpec, max_degree: int = 8, seed: int = 0):
    """Find polynomial g_1..g_d (over F_q[t, θ]) with
    t·g_k = Σ_l d[t]_{kl} g_l + Σ_j Σ_l (E_j)_{kl} τ^j(g_l),
    whose classes span M/τM.  Smallest degree bound first.
    """
    ctx = spec.ctx
    mats = spec.theta_star
    dt, E = mats[0], mats[1:]
    for name, mat in [("d[t]", dt)] + [(f"E_{j+1}", m) for j, m in enumerate(E)]:
        for row in mat:
            for x in row:
                if isinstance(x, RatFunc) and not x.is_polynomial():
                    raise NonPolynomialBasis(f"{name} has non-polynomial entries")
    dt = [[_poly(x) for x in row] for row in dt]
    E = [[[_poly(x) for x in row] for row in m] for m in E]
    rng = random.Random(seed)
    for D in range(1, max_degree + 1):
        cand = _tau_nullspace(spec, dt, E, D, D)
        if not cand:
            continue
        tries = list(cand)
        for _ in range(32):
            if len(cand) > 1:
                comb = [0] * len(cand[0])
                for v in cand:
                    c = rng.randrange(ctx.q)
                    comb = [ctx._add[a][ctx._mul[c][b]] for a, b in zip(comb, v)]
                tries.append(comb)
        for vec in tries:
            basis = _unpack_tau(spec, vec, D, D)
            if basis is not None and _spans_quotient(spec, basis):
                return basis
    raise NonPolynomialBasis(f"no τ-basis found with degrees ≤ {max_degree}")


def _poly(x):
    if isinstance(x, RatFunc):
        return x.num
    return x


def _tau_nullspace(spec, dt, E, Dt, Dth):
    ctx = spec.ctx
    d, r = spec.d, spec.r
    kern = ctx.kernel
    # unknown index
    unknowns = [(l, c, a, b) for l in range(d) for c in range(r)
                for a in range(Dt + 1) for b in range(Dth + 1)]
    col_of = {u: i for i, u in enumerate(unknowns)}
    # precompute P_j = Φ^{⊤(j-1)} ⋯ Φ^⊤ rows via the τ-power recursion on unit vectors
    tau_rows = {}

    def tau_unit(c, j):
        key = (c, j)
        if key not in tau_rows:
            vec = [TateElement.zero(ctx)] * r
            vec[c] = TateElement.const(ctx, 1)
            for _ in range(j):
                tw = [e.twist(1) for e in vec]
                vec = [sum((tw[row] * spec.phi[col][row] for row in range(r)),
                           TateElement.zero(ctx)) for col in range(r)]
            tau_rows[key] = vec
        return tau_rows[key]

    rows = {}

    def add(eq, coord, tdeg, thpoly, col):
        for b, code in enumerate(kern.to_list(thpoly.data)):
            if code:
                key = (eq, coord, tdeg, b)
                row = rows.setdefault(key, {})
                row[col] = ctx._add[row.get(col, 0)][code]

    q = ctx.q
    for (l, c, a, b), col in col_of.items():
        mono = ThetaPoly._raw(ctx, kern.monomial(1, b))
        # t·g_l in equation l
        add(l, c, a + 1, mono, col)
        for k in range(d):
            coef = dt[k][l]
            if not coef.is_zero():
                add(k, c, a, -(coef * mono), col)
            for j, Ej in enumerate(E, start=1):
                coef = Ej[k][l]
                if coef.is_zero():
                    continue
                twm = ThetaPoly._raw(ctx, kern.monomial(1, b * q ** j))
                for coord, poly in enumerate(tau_unit(c, j)):
                    for tdeg, th in enumerate(poly.coeffs):
                        if is_zero(th):
                            continue
                        add(k, coord, tdeg + a, -(coef * twm * th), col)
    return nullspace_fq(ctx, list(rows.values()), len(unknowns))


def _unpack_tau(spec, vec, Dt, Dth):
    ctx = spec.ctx
    d, r = spec.d, spec.r
    idx = 0
    basis = []
    for l in range(d):
        coords = []
        for c in range(r):
            tcoeffs = []
            for a in range(Dt + 1):
                codes = vec[idx: idx + Dth + 1]
                idx += Dth + 1
                tcoeffs.append(ThetaPoly._raw(ctx, ctx.kernel.from_list(codes)))
            coords.append(TateElement(ctx, tcoeffs))
        basis.append(tuple(coords))
    if all(all(e.is_zero() for e in g) for g in basis):
        return None
    return tuple(basis)


def _spans_quotient(spec, basis):
    d = spec.d
    adjT = spec.adjT_twisted(0)
    cols = []
    for g in basis:
        cols.append(_principal_vector(_row_times([TRational(e) for e in g], adjT), 0, d))
    A = [[cols[k][row] for k in range(d)] for row in range(len(cols[0]))]
    # full column rank ⇔ a generic right-hand side in the span solves uniquely
    try:
        solve(A, [sum((cols[k][row] for k in range(d)), spec.ctx.const(0))
                  for row in range(len(cols[0]))])
    except DecompositionFailure:
        return False
    return True
