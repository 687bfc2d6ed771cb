"""Search small polynomials H(t, θ) for which the Mellin identity closes on
C^{⊗n}: a fast screen at low precision, then confirmation at --confirm.

    python3 scripts/search_hn.py --q 2 --n 3 --tdeg 2 --thdeg 2 --out h3.json
"""

import argparse
import itertools
import json
import sys

from motivic.errors import MotivicError
from motivic.pairings import mellin_verify
from motivic.scalar import FqContext, ThetaPoly
from motivic.tate import TateElement


def candidates(ctx, tdeg, thdeg):
    """All polynomials with t-degree ≤ tdeg and θ-degree ≤ thdeg, as code tables."""
    q = ctx.q
    size = (tdeg + 1) * (thdeg + 1)
    for flat in itertools.product(range(q), repeat=size):
        if not any(flat):
            continue
        rows = [list(flat[i * (thdeg + 1):(i + 1) * (thdeg + 1)]) for i in range(tdeg + 1)]
        yield rows


def to_poly(ctx, rows):
    return TateElement(ctx, [ThetaPoly(ctx, r) for r in rows])


def trimmed(rows):
    rows = [list(r) for r in rows]
    for r in rows:
        while r and r[-1] == 0:
            r.pop()
    while rows and not rows[-1]:
        rows.pop()
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q", type=int, default=2)
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--tdeg", type=int, default=2)
    ap.add_argument("--thdeg", type=int, default=2)
    ap.add_argument("--screen", type=int, default=10, help="screening precision")
    ap.add_argument("--confirm", type=int, default=40, help="confirmation precision")
    ap.add_argument("--cap", type=int, default=80, help="t-degree cap")
    ap.add_argument("--out", help="write the unique hit as JSON")
    args = ap.parse_args(argv)

    ctx = FqContext.from_q(args.q)
    hits = []
    tried = 0
    for rows in candidates(ctx, args.tdeg, args.thdeg):
        tried += 1
        H = to_poly(ctx, rows)
        try:
            if mellin_verify(args.q, args.n, args.screen, H=H, ctx=ctx,
                             t_degree_cap=args.cap).passed:
                hits.append(rows)
                print(f"screen hit: {H}")
        except MotivicError:
            continue
    print(f"{tried} candidates, {len(hits)} passed the screen at N={args.screen}")
    confirmed = []
    for rows in hits:
        rep = mellin_verify(args.q, args.n, args.confirm, H=to_poly(ctx, rows), ctx=ctx,
                            t_degree_cap=args.cap)
        print(f"{to_poly(ctx, rows)}: {'PASS' if rep.passed else 'FAIL'} "
              f"valuation {rep.data['agreement']} at N={args.confirm}")
        if rep.passed:
            confirmed.append(rows)
    if args.out and len(confirmed) == 1:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump({"q": args.q, "n": args.n, "coeffs": trimmed(confirmed[0])}, fh)
            fh.write("\n")
        print(f"wrote {args.out}")
    return 0 if len(confirmed) == 1 else 1


if __name__ == "__main__":
    sys.exit(main())
