from motivic.scalar import INF, LaurentSeries, ThetaPoly


def tp(ctx, coeffs):
    return ThetaPoly(ctx, list(coeffs))


def as_dict(x: LaurentSeries, prec):
    if x.is_zero():
        return {}
    top = min(prec, x.prec)
    return {e: x.coeff(e) for e in range(x.val, top) if x.coeff(e)}


def exact_series(ctx, terms):
    """Σ c u^e from a dict e -> c."""
    out = LaurentSeries.zero(ctx, INF)
    for e, c in terms.items():
        out = out + LaurentSeries._make(ctx, e, ctx.kernel.monomial(ctx.code(c), 0), INF)
    return out
