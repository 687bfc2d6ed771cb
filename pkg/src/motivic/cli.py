"""Command-line front end: parses parameters, dispatches to the library and
emits text or JSON reports.

Exit codes: 0 all verifications pass, 1 a verification failed, 2 usage
error, 3 computational error (divergence, precision exhaustion, ...).
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import time
from dataclasses import dataclass, field

from . import __version__
from .errors import MotivicError, UsageError
from .motive import make_carlitz_tensor, mzv_13_example
from .pairings import (agf_instance, logalg_verify, mellin_verify, mzv_verify,
                       residue_checks, verify_pairings)
from .reports import VerificationReport
from .scalar import INF, FqContext, LaurentSeries, RatFunc, ThetaPoly, prime_power
from .special import gamma_factorial, mzv_naive, poly_from_json, zeta_naive
from .tate import TateElement, TRational, factor_power
from .tmodule import (exp_coeff, exp_eval, from_motive, log_coeff, log_eval,
                      verify_composition, verify_func_eq, verify_invertible,
                      verify_phi_t_squared, verify_roundtrip)

SCHEMA_VERSION = 1
PRECISION_ENV = "MOTIVIC_PRECISION"
VERBS = ("zeta", "mzv", "gamma", "exp-coeffs", "log-coeffs", "exp", "log", "verify")
VERIFY = ("mellin", "mzv-13", "func-eq", "invertibility", "pairings", "logalg", "residues",
          "compose")


@dataclass
class Command:
    verb: str
    sub: str = None
    params: dict = field(default_factory=dict)

    def to_json(self):
        return {"verb": self.verb, "sub": self.sub, "params": self.params}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _default_precision():
    raw = os.environ.get(PRECISION_ENV)
    if raw is None:
        return 40
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"{PRECISION_ENV}={raw!r} is not an integer") from None
    if value < 1:
        raise UsageError(f"{PRECISION_ENV} must be positive")
    return value


def _build_parser():
    ap = _Parser(prog="motivic", description="Exact arithmetic for Anderson t-modules: "
                 "exponential and logarithm coefficients, zeta values and pairing checks.")
    ap.add_argument("verb", choices=VERBS)
    ap.add_argument("sub", nargs="?", help="verification name (verify only): " + ", ".join(VERIFY))
    ap.add_argument("--q", type=int, help="field size (prime power)")
    ap.add_argument("--p", type=int, help="characteristic, with --r")
    ap.add_argument("--r", type=int, help="extension degree, with --p")
    ap.add_argument("--n", type=int, default=1, help="tensor power / zeta argument")
    ap.add_argument("--s", help="comma-separated MZV tuple, e.g. 1,3")
    ap.add_argument("--module", choices=("carlitz", "mzv"), default="carlitz",
                    help="t-module: C^{⊗n} or the q=2 MZV example")
    ap.add_argument("--i", type=int, help="coefficient index (or largest index)")
    ap.add_argument("--prec", type=int, help="u-adic precision N (default 40, env "
                    + PRECISION_ENV + ")")
    ap.add_argument("--tdeg", type=int, default=64, help="t-degree cap for Tate truncations")
    ap.add_argument("--levels", type=int, help="level cap for the G_n partial sums")
    ap.add_argument("--z", help="vector entries separated by ';', each a sum of terms "
                    "like 2*u^3 or theta^2")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--hn-file", help="JSON Anderson-Thakur polynomial in (t, θ)")
    ap.add_argument("--format", choices=("text", "json"), default="text")
    ap.add_argument("--timing", action="store_true",
                    help="include wall-clock timing (makes JSON output run-dependent)")
    return ap


def _field_params(ns):
    if ns.q is not None and (ns.p is not None or ns.r is not None):
        raise UsageError("--q cannot be combined with --p/--r")
    if ns.q is not None:
        pr = prime_power(ns.q)
        if pr is None:
            raise UsageError(f"--q {ns.q}: not a prime power")
        return ns.q, pr[0], pr[1]
    if ns.p is not None:
        r = ns.r or 1
        pr = prime_power(ns.p)
        if pr is None or pr[1] != 1:
            raise UsageError(f"--p {ns.p}: not a prime")
        if r < 1:
            raise UsageError("--r must be >= 1")
        return ns.p ** r, ns.p, r
    if ns.r is not None:
        raise UsageError("--r needs --p")
    return 2, 2, 1


def parse_args(argv) -> Command:
    ns = _build_parser().parse_args(list(argv))
    if ns.verb == "verify":
        if ns.sub not in VERIFY:
            raise UsageError(f"verify needs one of: {', '.join(VERIFY)}")
    elif ns.sub is not None:
        raise UsageError(f"unexpected argument {ns.sub!r}")
    q, p, r = _field_params(ns)
    prec = ns.prec if ns.prec is not None else _default_precision()
    if prec < 1:
        raise UsageError("--prec must be positive")
    if ns.n < 1:
        raise UsageError("--n must be >= 1")
    if ns.tdeg < 1:
        raise UsageError("--tdeg must be positive")
    if ns.i is not None and ns.i < 0:
        raise UsageError("--i must be >= 0")
    if ns.levels is not None and ns.levels < 0:
        raise UsageError("--levels must be >= 0")
    s = None
    if ns.s is not None:
        try:
            s = [int(x) for x in ns.s.split(",")]
        except ValueError:
            raise UsageError(f"--s {ns.s!r}: expected comma-separated integers") from None
        if not s or min(s) < 1:
            raise UsageError("--s entries must be positive")
    if ns.verb == "mzv" and s is None:
        raise UsageError("mzv needs --s")
    if ns.module == "mzv" and q != 2:
        raise UsageError("--module mzv is defined over F_2; drop --q or use --q 2")
    if ns.verb in ("exp", "log") and ns.z is None:
        raise UsageError(f"{ns.verb} needs --z")
    if ns.hn_file is not None and not os.path.exists(ns.hn_file):
        raise UsageError(f"--hn-file {ns.hn_file}: no such file")
    params = {"q": q, "p": p, "r": r, "n": ns.n, "s": s, "module": ns.module, "i": ns.i,
              "precision": prec, "t_degree": ns.tdeg, "levels": ns.levels, "z": ns.z,
              "seed": ns.seed, "hn_file": ns.hn_file, "format": ns.format,
              "timing": ns.timing}
    return Command(ns.verb, ns.sub, params)


# ---------------------------------------------------------------------------
# value parsing and rendering
# ---------------------------------------------------------------------------

_TERM = re.compile(r"^(?:(\d+)\*?)?(u|theta|θ)?(?:\^(-?\d+))?$")


def parse_scalar(ctx, text: str) -> LaurentSeries:
    """Parse a finite sum of terms c*u^e / c*theta^e (u = 1/θ) exactly."""
    src = text.replace(" ", "")
    if not src:
        raise UsageError("empty scalar")
    src = re.sub(r"(?<!\^)-", "+-", src)
    total = LaurentSeries.zero(ctx, INF)
    for raw in filter(None, src.split("+")):
        sign = -1 if raw.startswith("-") else 1
        m = _TERM.match(raw.lstrip("-"))
        if not m or not (m.group(1) or m.group(2)):
            raise UsageError(f"cannot parse term {raw!r} in {text!r}")
        coeff = sign * int(m.group(1) or 1)
        var, exp = m.group(2), int(m.group(3) or 1)
        if var is None:
            if m.group(3):
                raise UsageError(f"exponent without variable in {raw!r}")
            exp = 0
        e = exp if var == "u" else -exp
        term = LaurentSeries._make(ctx, e, ctx.kernel.monomial(ctx.code(coeff), 0), INF)
        total = total + term
    return total


def parse_vector(ctx, text: str, d: int):
    parts = text.split(";")
    if len(parts) != d:
        raise UsageError(f"--z has {len(parts)} entries, module dimension is {d}")
    return [parse_scalar(ctx, x) for x in parts]


def _value(x):
    """Text and JSON rendering; every number carries its precision."""
    if isinstance(x, LaurentSeries):
        return {"type": "laurent", "text": repr(x), "json": x.to_json(),
                "precision": None if x.prec == INF else x.prec}
    if isinstance(x, (RatFunc, ThetaPoly)):
        return {"type": type(x).__name__.lower(), "text": repr(x), "json": x.to_json(),
                "precision": "exact"}
    return {"type": type(x).__name__.lower(), "text": repr(x), "precision": "exact"}


def _matrix(m):
    return [[_value(RatFunc.lift(x) if isinstance(x, ThetaPoly) else x) for x in row]
            for row in m]


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def _context(cmd):
    p = cmd.params
    if p["r"] == 1:
        return FqContext(p["p"])
    return FqContext(p["p"], p["r"])


def _module(cmd, ctx):
    if cmd.params["module"] == "mzv":
        return mzv_13_example(ctx)
    return make_carlitz_tensor(cmd.params["n"], ctx)


def _read_hn(cmd, ctx):
    path = cmd.params["hn_file"]
    if path is None:
        return None
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--hn-file: invalid JSON ({exc})") from None
    return poly_from_json(ctx, data)


def _coeff_results(cmd, ctx, which):
    spec = _module(cmd, ctx)
    T = from_motive(spec)
    fn = exp_coeff if which == "exp" else log_coeff
    top = cmd.params["i"] if cmd.params["i"] is not None else 4
    return [{"label": f"{'Q' if which == 'exp' else 'P'}_{i}", "index": i,
             "module": spec.label, "matrix": _matrix(fn(T, i))} for i in range(top + 1)]


def _verify(cmd, ctx):
    p = cmd.params
    sub = cmd.sub
    prec = p["precision"]
    imax = p["i"]
    if sub == "mellin":
        return [mellin_verify(ctx.q, p["n"], prec, H=_read_hn(cmd, ctx), ctx=ctx,
                              t_degree_cap=p["t_degree"])]
    if sub == "mzv-13":
        if ctx.q != 2:
            raise UsageError("mzv-13 is defined over F_2")
        return [mzv_verify(prec, max_level=32 if p["levels"] is None else p["levels"])]
    T = from_motive(_module(cmd, ctx))
    if sub == "func-eq":
        return [verify_func_eq(T, 6 if imax is None else imax)]
    if sub == "invertibility":
        return [verify_invertible(T, 5 if imax is None else imax)]
    if sub == "compose":
        return [verify_composition(T, 4 if imax is None else imax), verify_phi_t_squared(T),
                verify_roundtrip(T, seed=p["seed"], tolerance=min(prec, 30))]
    if sub == "pairings":
        return [verify_pairings(T, 3 if imax is None else imax)]
    spec = T.source
    if sub == "logalg":
        n = spec.d
        reports = [logalg_verify(spec, TRational(factor_power(ctx, 0, n)), label="(t-θ)^n")]
        if spec.m_blockwise:
            shifted = TRational(factor_power(ctx, 0, n) * TateElement.t(ctx))
            reports.append(logalg_verify(spec, shifted, label="t(t-θ)^n"))
        if spec.m_blockwise and n == 1:
            tol = min(prec, 20)
            h, _ = agf_instance(spec, LaurentSeries.u(ctx), tolerance=tol)
            reports.append(logalg_verify(spec, h, tol, label="generating function, z = 1/θ"))
        return reports
    if sub == "residues":
        if p["module"] != "carlitz":
            raise UsageError("residues are set up for --module carlitz")
        n = spec.d
        top = 3 if imax is None else imax
        out = VerificationReport("residues", params={"q": ctx.q, "n": n, "i_max": top})
        for i in range(1, top + 1):
            for m in range(1, n + 1):
                h = TRational(TateElement.const(ctx, ctx.const(1)), {i: m})
                rep = residue_checks(spec, h)
                out.merge(rep, prefix=f"(t-θ^(q^{i}))^-{m}: ")
                out.elapsed += rep.elapsed
        return [out]
    raise UsageError(f"unknown verification {sub!r}")


def run(cmd: Command) -> dict:
    """Execute ``cmd`` and return the report dictionary."""
    t0 = time.perf_counter()
    ctx = _context(cmd)
    p = cmd.params
    results, reports = [], []
    if cmd.verb == "zeta":
        sv = zeta_naive(ctx, p["n"], p["precision"])
        results.append({"label": f"zeta_A({p['n']})", "value": _value(sv.value),
                        "provenance": sv.provenance, "data": sv.data})
    elif cmd.verb == "mzv":
        sv = mzv_naive(ctx, tuple(p["s"]), p["precision"])
        results.append({"label": f"zeta_A({','.join(map(str, p['s']))})",
                        "value": _value(sv.value), "provenance": sv.provenance, "data": sv.data})
    elif cmd.verb == "gamma":
        results.append({"label": f"Gamma_{p['n']}", "value": _value(gamma_factorial(ctx, p["n"]))})
    elif cmd.verb in ("exp-coeffs", "log-coeffs"):
        results.extend(_coeff_results(cmd, ctx, cmd.verb[:3]))
    elif cmd.verb in ("exp", "log"):
        T = from_motive(_module(cmd, ctx))
        z = parse_vector(ctx, p["z"], T.d)
        fn = exp_eval if cmd.verb == "exp" else log_eval
        out = fn(T, z, p["precision"])
        results.append({"label": f"{cmd.verb.capitalize()}(z)", "module": T.source.label,
                        "value": [_value(x) for x in out]})
    else:
        reports = _verify(cmd, ctx)
    doc = {"schema_version": SCHEMA_VERSION, "version": __version__, "command": cmd.to_json(),
           "context": ctx.to_json(), "results": results,
           "reports": [r.to_json() for r in reports],
           "passed": all(r.passed for r in reports)}
    if not p["timing"]:
        for r in doc["reports"]:
            r.pop("elapsed_s", None)
    else:
        doc["elapsed_s"] = round(time.perf_counter() - t0, 4)
    return doc


def render_text(doc) -> str:
    lines = []
    cmd = doc["command"]
    head = cmd["verb"] + (f" {cmd['sub']}" if cmd["sub"] else "")
    lines.append(f"motivic {doc['version']}: {head} over F_{doc['context']['q']}")
    for res in doc["results"]:
        if "matrix" in res:
            lines.append(f"{res['label']} =")
            for row in res["matrix"]:
                lines.append("  [" + ", ".join(x["text"] for x in row) + "]")
        elif isinstance(res["value"], list):
            lines.append(f"{res['label']} = ({'; '.join(x['text'] for x in res['value'])})")
        else:
            lines.append(f"{res['label']} = {res['value']['text']}  "
                         f"[precision {res['value']['precision']}]")
    for rep in doc["reports"]:
        ok = sum(c["passed"] for c in rep["checks"])
        status = "PASS" if rep["passed"] else "FAIL"
        timing = f" ({rep['elapsed_s']:.2f}s)" if "elapsed_s" in rep else ""
        label = rep["params"].get("instance")
        label = f" [{label}]" if label else ""
        lines.append(f"{status} {rep['name']}{label}: {ok}/{len(rep['checks'])} checks{timing}")
        for c in rep["checks"]:
            mark = "ok " if c["passed"] else "BAD"
            detail = f" ({c['detail']})" if c["detail"] else ""
            lines.append(f"  {mark} {c['label']}{detail}")
        for note in rep["notes"]:
            lines.append(f"  note: {note}")
    if "elapsed_s" in doc:
        lines.append(f"elapsed {doc['elapsed_s']:.2f}s")
    return "\n".join(lines)


def _emit(doc, fmt, stream):
    if fmt == "json":
        stream.write(json.dumps(doc, sort_keys=True, ensure_ascii=False) + "\n")
    else:
        stream.write(render_text(doc) + "\n")


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    fmt = "json" if "--format=json" in argv or ("--format" in argv and "json" in argv) else "text"
    try:
        cmd = parse_args(argv)
    except UsageError as exc:
        _emit_error(fmt, "usage", exc)
        return 2
    try:
        doc = run(cmd)
    except UsageError as exc:
        _emit_error(fmt, "usage", exc)
        return 2
    except (MotivicError, ZeroDivisionError, ArithmeticError) as exc:
        _emit_error(fmt, type(exc).__name__, exc)
        return 3
    _emit(doc, cmd.params["format"], sys.stdout)
    return 0 if doc["passed"] else 1


def _emit_error(fmt, kind, exc):
    err = {"schema_version": SCHEMA_VERSION, "error": {"kind": kind, "message": str(exc)}}
    if fmt == "json":
        sys.stdout.write(json.dumps(err, sort_keys=True, ensure_ascii=False) + "\n")
    else:
        sys.stderr.write(f"motivic: {kind}: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
