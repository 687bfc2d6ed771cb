"""Small dense linear algebra over exact fields (F_q codes, F_q(θ)) and K_∞."""

from __future__ import annotations

from .errors import DecompositionFailure
from .scalar import LaurentSeries, RatFunc, ThetaPoly, is_zero, valuation


def identity(ctx, d):
    one, zero = RatFunc.lift(ctx.const(1)), RatFunc.lift(ctx.const(0))
    return [[one if i == j else zero for j in range(d)] for i in range(d)]


def zeros(ctx, rows, cols):
    zero = RatFunc.lift(ctx.const(0))
    return [[zero] * cols for _ in range(rows)]


def mat_mul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = None
            for k in range(m):
                x, y = a[i][k], b[k][j]
                if is_zero(x) or is_zero(y):
                    continue
                term = x * y
                acc = term if acc is None else acc + term
            row.append(acc if acc is not None else a[i][0] * 0)
        out.append(row)
    return out


def mat_add(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_twist(a, i):
    return [[x.twist(i) for x in row] for row in a]


def mat_vec(a, v):
    return mat_mul(a, [[x] for x in v])


def transpose(a):
    return [list(r) for r in zip(*a)]


def mat_equal(a, b):
    return all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def is_zero_matrix(a):
    return all(is_zero(x) for row in a for x in row)


def _pivot(col_entries):
    """Index of the pivot: largest norm for series, first nonzero otherwise."""
    best, best_v = None, None
    for idx, x in col_entries:
        if is_zero(x):
            continue
        if not isinstance(x, LaurentSeries):
            return idx
        v = valuation(x)
        if best is None or v < best_v:
            best, best_v = idx, v
    return best


def _div(x, y):
    if isinstance(x, ThetaPoly):
        x = RatFunc.lift(x)
    if isinstance(y, ThetaPoly):
        y = RatFunc.lift(y)
    return x / y


def det(a):
    """Determinant by Gaussian elimination (field entries)."""
    n = len(a)
    m = [[RatFunc.lift(x) if isinstance(x, ThetaPoly) else x for x in row] for row in a]
    out = None
    sign = 1
    for c in range(n):
        p = _pivot([(r, m[r][c]) for r in range(c, n)])
        if p is None:
            return m[0][0] * 0
        if p != c:
            m[c], m[p] = m[p], m[c]
            sign = -sign
        piv = m[c][c]
        out = piv if out is None else out * piv
        for r in range(c + 1, n):
            if is_zero(m[r][c]):
                continue
            f = _div(m[r][c], piv)
            m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return out if sign == 1 else -out


def solve(a, b):
    """Unique solution x of a·x = b (a is rows × cols, rows ≥ cols).

    Raises DecompositionFailure if the system is inconsistent or
    underdetermined.
    """
    rows, cols = len(a), len(a[0]) if a else 0
    m = [[RatFunc.lift(x) if isinstance(x, ThetaPoly) else x for x in a[r]] +
         [RatFunc.lift(b[r]) if isinstance(b[r], ThetaPoly) else b[r]] for r in range(rows)]
    piv_rows = []
    r = 0
    for c in range(cols):
        p = _pivot([(i, m[i][c]) for i in range(r, rows)])
        if p is None:
            raise DecompositionFailure(f"column {c} has no pivot: system underdetermined")
        m[r], m[p] = m[p], m[r]
        inv_piv = m[r][c]
        m[r] = [_div(x, inv_piv) for x in m[r]]
        for i in range(rows):
            if i != r and not is_zero(m[i][c]):
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        piv_rows.append(r)
        r += 1
    for i in range(r, rows):
        if not _negligible_residual(m[i][cols]):
            raise DecompositionFailure("inconsistent linear system")
    return [m[i][cols] for i in range(cols)]


def _negligible_residual(x):
    if isinstance(x, LaurentSeries):
        return x.is_zero()
    return is_zero(x)


# ---------------------------------------------------------------------------
# nullspace over F_q with integer codes
# ---------------------------------------------------------------------------


def nullspace_fq(ctx, rows, ncols):
    """Basis of {x : rows·x = 0} over F_q; rows are dicts col -> code."""
    add, mul, neg, inv = ctx._add, ctx._mul, ctx._neg, ctx._inv
    mat = [dict(r) for r in rows if r]
    pivots = {}  # col -> row dict (normalized, reduced)
    for row in mat:
        row = {c: v for c, v in row.items() if v}
        # reduce against existing pivots
        for c, prow in pivots.items():
            v = row.get(c)
            if v:
                f = neg[v]
                for cc, pv in prow.items():
                    nv = add[row.get(cc, 0)][mul[f][pv]]
                    if nv:
                        row[cc] = nv
                    else:
                        row.pop(cc, None)
        if not row:
            continue
        c0 = min(row)
        iv = inv[row[c0]]
        row = {c: mul[iv][v] for c, v in row.items()}
        # eliminate c0 from existing pivot rows
        for c, prow in pivots.items():
            v = prow.get(c0)
            if v:
                f = neg[v]
                for cc, rv in row.items():
                    nv = add[prow.get(cc, 0)][mul[f][rv]]
                    if nv:
                        prow[cc] = nv
                    else:
                        prow.pop(cc, None)
        pivots[c0] = row
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        vec = [0] * ncols
        vec[fcol] = 1
        for c, prow in pivots.items():
            v = prow.get(fcol)
            if v:
                vec[c] = neg[v]
        basis.append(vec)
    return basis
