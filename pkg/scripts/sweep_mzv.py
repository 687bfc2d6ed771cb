"""Run the depth-two MZV identity at several precisions and report the
agreement valuation, the level where G_n plateaus and the run time.

    python3 scripts/sweep_mzv.py --prec 15 25 40
"""

import argparse
import json
import sys

from motivic.pairings import mzv_verify


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--prec", nargs="+", type=int, default=[15, 25, 40])
    ap.add_argument("--levels", type=int, default=32, help="level cap for G_n")
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)

    rows = []
    for prec in args.prec:
        rep = mzv_verify(prec, max_level=args.levels)
        row = {"precision": prec, "passed": rep.passed, "agreement": rep.data["agreement"],
               "plateau_level": rep.data["plateau_level"],
               "mzv_outer_degree": rep.data.get("mzv_outer_degree"),
               "seconds": round(rep.elapsed, 3)}
        rows.append(row)
        if not args.json:
            print(f"N={prec:>3}  {'PASS' if rep.passed else 'FAIL'}  valuation {row['agreement']:>3}"
                  f"  plateau at level {row['plateau_level']:>2}"
                  f"  outer degree {row['mzv_outer_degree']}  {row['seconds']:.2f}s")
    if args.json:
        json.dump(rows, sys.stdout, indent=1)
        print()
    return 0 if all(r["passed"] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
