"""Sweep the Mellin identity over (q, n) and precision; print a table or JSON.

    python3 scripts/sweep_mellin.py --cases 2:1 3:1 3:2 --prec 20 40 60
"""

import argparse
import json
import os
import sys

from motivic.errors import MotivicError
from motivic.pairings import mellin_verify
from motivic.scalar import FqContext
from motivic.special import poly_from_json


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cases", nargs="+", default=["2:1", "2:2", "3:1", "3:2"],
                    help="q:n pairs")
    ap.add_argument("--prec", nargs="+", type=int, default=[20, 40])
    ap.add_argument("--tdeg", type=int, default=64, help="t-degree cap")
    ap.add_argument("--hn-file", help="H_n polynomial (JSON) for n > q")
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)

    rows = []
    for case in args.cases:
        q, n = (int(x) for x in case.split(":"))
        ctx = FqContext.from_q(q)
        H = None
        if args.hn_file and n > q:
            with open(args.hn_file, encoding="utf-8") as fh:
                H = poly_from_json(ctx, json.load(fh))
        for prec in args.prec:
            row = {"q": q, "n": n, "precision": prec}
            try:
                rep = mellin_verify(q, n, prec, H=H, ctx=ctx, t_degree_cap=args.tdeg)
                row.update(passed=rep.passed, agreement=rep.data["agreement"],
                           t_degree=rep.data["path_b"]["t_degree"],
                           seconds=round(rep.elapsed, 3))
            except MotivicError as exc:
                row.update(passed=False, error=f"{type(exc).__name__}: {exc}")
            rows.append(row)
            if not args.json:
                if "error" in row:
                    print(f"q={q} n={n} N={prec:>3}  {row['error']}")
                else:
                    print(f"q={q} n={n} N={prec:>3}  {'PASS' if row['passed'] else 'FAIL'}"
                          f"  valuation {row['agreement']:>3}  T={row['t_degree']:>3}"
                          f"  {row['seconds']:.2f}s")
    if args.json:
        json.dump(rows, sys.stdout, indent=1)
        print()
    return 0 if all(r["passed"] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
