"""Command line runner: every check as a subcommand with seeded, byte-stable
JSON or CSV output.

Exit status: 0 when every check in the report holds, 1 on a contract
violation or an error raised by the library, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import acceptance
from .characters import CharacterSystem, digit_reversal
from .errors import LocalFieldError, ParameterError
from .field import FieldParams, LocalElement, elem_add, elem_mul, prime_power, to_base, u_of
from .functions import SampledFunction, indicator, random_function
from .kernels import (
    dirichlet,
    dirichlet_exact,
    dirichlet_recursion_check,
    function_bank,
    kernel_bound_violations,
    kernel_constancy_check,
    kernel_hat_check,
    kernel_operator,
    opnorm_lower_bound_Lp,
    sn_norms,
)
from .maximal import buckley_experiment, buckley_slope, m_s, m_to_sharp_probe, maximal, maximal_bruteforce, sharp_maximal
from .shift_invariant import (
    PhiSpec,
    TilingSpec,
    coverage,
    coverage_histogram,
    schauder_verdict,
    spectral_gram,
    standard_tiling,
    tiling_from_json,
)
from .transform import fast_fourier, naive_fourier
from .weights import a_infty_probe, ap_characteristic, doubling_ratio, parse_weight, reverse_holder_probe

SCHEMA_VERSION = "1.0.0"
OUT_DIR_ENV = "LFHARMONIC_OUT_DIR"


def report_schema_version() -> str:
    return SCHEMA_VERSION


# ---------------------------------------------------------------------------
# output

def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def _scalar(x):
    """Plain Python value for numpy scalars, Fractions and complex numbers."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    return x


def to_json(obj) -> str:
    """JSON with floats at 17 significant digits and rationals as "num/den"."""
    obj = _scalar(obj)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, Fraction):
        return f'"{obj.numerator}/{obj.denominator}"' if obj.denominator != 1 else str(obj.numerator)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{to_json(str(k))}: {to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_cell(v) -> str:
    v = _scalar(v)
    if isinstance(v, float):
        return _fmt_float(v).strip('"')
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple, dict, np.ndarray)):
        return to_json(v)
    return "" if v is None else str(v)


def _flatten(d: dict, prefix: str = "") -> list[tuple[str, object]]:
    out = []
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.extend(_flatten(v, key + "."))
        else:
            out.append((key, v))
    return out


def to_csv(report: dict) -> str:
    """The ``rows`` table when the report has one, else key/value pairs."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    rows = report.get("rows")
    if rows:
        cols = list(rows[0].keys())
        w.writerow(cols)
        for r in rows:
            w.writerow([_csv_cell(r.get(c)) for c in cols])
    else:
        w.writerow(["key", "value"])
        for k, v in _flatten(report):
            w.writerow([k, _csv_cell(v)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# arguments

def _field(args) -> FieldParams:
    modulus = tuple(int(t) for t in args.modulus.split(",")) if getattr(args, "modulus", None) else None
    if args.q is not None:
        p, c = prime_power(args.q)
    else:
        p, c = getattr(args, "prime", None) or 2, args.c
    if args.char == "0":
        if c != 1:
            raise ParameterError("characteristic zero covers Q_p only (c = 1)")
        return FieldParams.qp(p)
    return FieldParams.laurent(p, c, modulus)


def _floats(text: str) -> list[float]:
    return [float(Fraction(t)) for t in text.split(",") if t.strip()]


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _field_dict(fld: FieldParams) -> dict:
    d = {"name": str(fld), "p": fld.p, "c": fld.c, "q": fld.q, "char": 0 if fld.is_padic else fld.p}
    if fld.c > 1:
        d["modulus"] = list(fld.modulus)
    return d


# ---------------------------------------------------------------------------
# subcommands; each returns a report dict with a boolean "passed"

def cmd_field_selftest(args) -> dict:
    fld = _field(args)
    q, k = fld.q, args.k
    fq = fld.fq
    checks = {}
    els = range(q)
    if q <= 9:
        checks["F_q associativity"] = all(
            fq.mul(fq.mul(a, b), c) == fq.mul(a, fq.mul(b, c)) for a, b, c in itertools.product(els, repeat=3)
        )
        checks["F_q distributivity"] = all(
            fq.mul(a, fq.add(b, c)) == fq.add(fq.mul(a, b), fq.mul(a, c)) for a, b, c in itertools.product(els, repeat=3)
        )
    checks["F_q inverses"] = all(fq.mul(a, fq.inverse(a)) == 1 for a in range(1, q))
    checks["F_q identity"] = all(fq.mul(a, 1) == a for a in els)
    rng = np.random.default_rng(args.seed)
    ultra, mult = True, True
    for _ in range(200):
        x = LocalElement.from_digits(fld, rng.integers(0, q, 6).tolist(), int(rng.integers(-3, 4)))
        y = LocalElement.from_digits(fld, rng.integers(0, q, 6).tolist(), int(rng.integers(-3, 4)))
        s = elem_add(x, y)
        ultra &= s.abs() <= max(x.abs(), y.abs())
        if x.abs() != y.abs():
            ultra &= s.abs() == max(x.abs(), y.abs())
        mult &= elem_mul(x, y).abs() == x.abs() * y.abs()
    checks["ultrametric"] = ultra
    checks["multiplicative norm"] = mult
    checks["u(n) norm law"] = all(
        u_of(fld, n).abs() == Fraction(q) ** len(to_base(n, q)) for n in range(1, q**k)
    )
    checks["characters orthonormal"] = CharacterSystem(fld, k).is_orthonormal()
    return {"field": _field_dict(fld), "level": k, "checks": checks, "passed": all(checks.values())}


def cmd_characters(args) -> dict:
    fld = _field(args)
    q, k = fld.q, args.k
    cs = CharacterSystem(fld, k)
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.bank):
        f = random_function(fld, k, rng)
        worst = max(worst, float(np.max(np.abs(fast_fourier(fld, f.values) - naive_fourier(fld, f.values)))))
    ph, N = cs.phases
    rows = [
        {"n": n, "u_word": to_base(int(digit_reversal(n, q, k)), q, k), "phases": ph[n].tolist(), "order": N}
        for n in range(min(cs.size, args.rows))
    ]
    ortho = cs.is_orthonormal()
    return {
        "field": _field_dict(fld),
        "level": k,
        "orthonormal_exact": ortho,
        "fast_vs_naive_max_error": worst,
        "rows": rows,
        "passed": ortho and worst <= 1e-10,
    }


def cmd_dirichlet(args) -> dict:
    fld = _field(args)
    q, k, n = fld.q, args.k, args.n
    if fld.p == 2:
        vals = list(dirichlet_exact(fld, n, k).to_rational())
    else:
        vals = [complex(v) for v in dirichlet(fld, n, k).values]
    splits = {str(l): dirichlet_recursion_check(fld, n, l, k) for l in range(1, k + 1)}
    rows = [{"cell": i, "value": v} for i, v in enumerate(vals)]
    return {
        "field": _field_dict(fld),
        "level": k,
        "n": n,
        "recursion": splits,
        "rows": rows,
        "passed": all(splits.values()),
    }


def cmd_kernel_audit(args) -> dict:
    fld = _field(args)
    q = fld.q
    nmax = args.nmax if args.nmax is not None else q**4
    k = args.k if args.k is not None else len(to_base(nmax, q))  # smallest k with nmax < q^k
    viol, worst = 0, 0.0
    for n in range(1, nmax + 1):
        c, w = kernel_bound_violations(fld, n, k)
        viol += c
        worst = max(worst, w)
    kh = min(k, 4)
    hat = all(kernel_hat_check(fld, n, kh) for n in range(1, min(nmax, q**kh - 1) + 1))
    const = all(kernel_constancy_check(fld, n, 3) for n in range(1, min(nmax, q**3 - 1) + 1))
    return {
        "field": _field_dict(fld),
        "level": k,
        "nmax": nmax,
        "bound_violations": viol,
        "max_abs_Kn_times_abs_x": worst,
        "bound": q,
        "kernel_hat_indicator": hat,
        "constancy_window_3": const,
        "passed": viol == 0 and hat and const,
    }


def cmd_sn_norms(args) -> dict:
    fld = _field(args)
    w = parse_weight(args.w, fld)
    k = args.k
    nmax = args.nmax if args.nmax is not None else fld.q**k
    rows = []
    if args.p == 2:
        for n, r in enumerate(sn_norms(fld, w, k, nmax), start=1):
            rows.append({"n": n, "norm": r.value, "residual": r.residual})
    else:
        for n in range(1, nmax + 1):
            op = kernel_operator(fld, "S_n", n, k)
            rows.append({"n": n, "norm_lower_bound": opnorm_lower_bound_Lp(op, w, args.p, args.budget, args.seed)})
    key = "norm" if args.p == 2 else "norm_lower_bound"
    return {
        "field": _field_dict(fld),
        "weight": args.w,
        "p": args.p,
        "level": k,
        "sup": max(r[key] for r in rows),
        "rows": rows,
        "passed": all(math.isfinite(r[key]) for r in rows),
    }


def cmd_ap(args) -> dict:
    fld = _field(args)
    rep = ap_characteristic(parse_weight(args.w, fld), args.p, args.k)
    d = rep.as_dict()
    d.update({"field": _field_dict(fld), "weight": args.w, "passed": True})
    return d


def cmd_doubling(args) -> dict:
    fld = _field(args)
    rep = doubling_ratio(parse_weight(args.w, fld), args.k)
    return {
        "field": _field_dict(fld),
        "weight": args.w,
        "level": rep.level,
        "value": rep.value,
        "ratios": sorted(rep.ratios),
        "passed": True,
    }


def _probe(args, fn, **kw) -> dict:
    fld = _field(args)
    rep = fn(parse_weight(args.w, fld), args.k, cap=args.cap, **kw)
    return {
        "field": _field_dict(fld),
        "weight": args.w,
        "level": rep.level,
        "best": rep.best,
        "C": rep.C,
        "constant_cap": rep.constant_cap,
        "note": "grid and cap are conventions; only existence is asserted by the theory",
        "rows": [{"exponent": e, "C": c} for e, c in rep.table],
        "passed": rep.best > 0 and math.isfinite(rep.C),
    }


def cmd_rhi_probe(args) -> dict:
    return _probe(args, reverse_holder_probe)


def cmd_ainf_probe(args) -> dict:
    return _probe(args, a_infty_probe, samples=args.samples, seed=args.seed)


def cmd_maximal(args) -> dict:
    fld = _field(args)
    if args.f:
        with open(args.f) as fh:
            f = SampledFunction.from_json(fh.read())
    else:
        f = indicator(fld, args.j, k=args.k)
    g = f.extend(args.m) if args.m > f.window else f
    if args.s is not None:
        out = m_s(g, args.s)
        kind = f"M_{args.s:g}"
    elif args.sharp:
        out = sharp_maximal(g)
        kind = "sharp"
    else:
        out = maximal(g)
        kind = "M"
    checks = {}
    if g.size <= 4096 and args.s is None:
        oracle = maximal_bruteforce(g, sharp=args.sharp)
        checks["tree pass = ball enumeration"] = bool(
            np.max(np.abs(np.asarray(out.values, dtype=float) - np.asarray(oracle.values, dtype=float))) <= 1e-12
        )
    rows = [{"cell": i, "value": v} for i, v in enumerate(out.values)]
    return {
        "field": _field_dict(fld),
        "operator": kind,
        "level": g.level,
        "window": g.window,
        "checks": checks,
        "rows": rows,
        "passed": all(checks.values()),
    }


def cmd_buckley(args) -> dict:
    fld = _field(args)
    rows, slopes = [], {}
    for p in _floats(args.p):
        recs = [buckley_experiment(fld, p, th, args.k, args.m) for th in _floats(args.theta)]
        slope = buckley_slope(recs) if len(recs) > 1 else math.nan
        slopes[str(p)] = slope
        for r in recs:
            rows.append(
                {
                    "p": p,
                    "theta": r.theta,
                    "ap": r.ap,
                    "ratio": r.ratio,
                    "paper_bound": r.paper_bound,
                    "bound_holds": r.bound_holds,
                    "pointwise_violations": r.pointwise_violations,
                    "slope": slope,
                    "target_slope": 1 / (p - 1),
                }
            )
    return {
        "field": _field_dict(fld),
        "level": args.k,
        "window": args.m,
        "slopes": slopes,
        "rows": rows,
        "passed": all(r["bound_holds"] for r in rows),
    }


def cmd_m_sharp_probe(args) -> dict:
    fld = _field(args)
    w = parse_weight(args.w, fld)
    bank = function_bank(fld, args.bank_level, args.bank, args.seed)
    rep = m_to_sharp_probe(args.p, w, bank, args.k)
    return {
        "field": _field_dict(fld),
        "weight": args.w,
        "p": args.p,
        "level": args.k,
        "value": rep.value,
        "skipped": list(rep.skipped),
        "passed": math.isfinite(rep.value),
    }


def cmd_schauder(args) -> dict:
    if args.phi:
        with open(args.phi) as fh:
            spec = PhiSpec.from_json(fh.read())
    else:
        fld = _field(args)
        ks = _ints(args.klist)
        spec = PhiSpec.power(fld, float(Fraction(args.alpha)), max(ks))
    rep = schauder_verdict(spec, tuple(_ints(args.klist)), args.N)
    d = rep.as_dict()
    d["field"] = _field_dict(spec.field)
    d["passed"] = True
    return d


def cmd_tiling(args) -> dict:
    fld = _field(args)
    k, m = args.k, args.m
    if args.omega:
        with open(args.omega) as fh:
            spec = tiling_from_json(fld, fh.read())
        if args.t:
            with open(args.t) as fh:
                spec = TilingSpec(fld, spec.omega, tiling_from_json(fld, fh.read()).translations, spec.spectrum)
    else:
        spec = standard_tiling(fld, k, m)
    cov = coverage(spec, m, k)
    hist = coverage_histogram(cov)
    tiles = bool(np.all(cov == 1))
    d = {
        "field": _field_dict(fld),
        "level": k,
        "window": m,
        "tiles": tiles,
        "coverage_histogram": {str(c): n for c, n in hist.items()},
        "rows": [{"coverage": c, "cells": n} for c, n in hist.items()],
    }
    if spec.spectrum:
        d["spectral_gram_defect"] = spectral_gram(spec, m, k)
    d["passed"] = True
    return d


def cmd_acceptance(args) -> dict:
    nums = sorted(acceptance.CRITERIA) if args.criterion == "all" else _ints(args.criterion)
    results = [acceptance.run(n) for n in nums]
    for r in results:
        print(r.line(), file=sys.stderr)
    rows = [{"criterion": r.number, "title": r.title, "passed": r.passed} for r in results]
    return {
        "results": [{k: v for k, v in r.as_dict().items() if k != "seconds"} for r in results],
        "rows": rows,
        "passed": all(r.passed for r in results),
    }


def cmd_version(args) -> dict:
    return {"schema_version": report_schema_version(), "passed": True}


# ---------------------------------------------------------------------------
# parser

def _add_field(sp, prime_flag: str = "--p"):
    sp.add_argument("--char", choices=["0", "p"], default="p", help="0 for Q_p, p for F_q((X))")
    sp.add_argument(prime_flag, dest="prime", type=int, default=None, help="residue characteristic")
    sp.add_argument("--c", type=int, default=1, help="q = p^c")
    sp.add_argument("--q", type=int, default=None, help="residue field size (overrides the prime)")
    sp.add_argument("--modulus", default=None, help="comma separated base-p coefficients, lowest first")


def _add_common(sp):
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--format", choices=["json", "csv"], default="json")
    sp.add_argument("--out", default=None, help=f"output file (default: ${OUT_DIR_ENV}/<command>.<format> or stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lfharmonic", description="Harmonic analysis checks on local fields.")
    ap.add_argument("--version", action="version", version=f"report schema {SCHEMA_VERSION}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, prime_flag="--p"):
        sp = sub.add_parser(name)
        _add_field(sp, prime_flag)
        _add_common(sp)
        sp.set_defaults(func=fn)
        return sp

    sp = add("field-selftest", cmd_field_selftest)
    sp.add_argument("--k", type=int, default=5)

    sp = add("characters", cmd_characters)
    sp.add_argument("--k", type=int, default=4)
    sp.add_argument("--bank", type=int, default=20)
    sp.add_argument("--rows", type=int, default=64)

    sp = add("dirichlet", cmd_dirichlet)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, default=4)

    sp = add("kernel-audit", cmd_kernel_audit)
    sp.add_argument("--nmax", type=int, default=None)
    sp.add_argument("--k", type=int, default=None)

    # on weighted subcommands --p is the Lebesgue exponent; the prime is --prime
    sp = add("sn-norms", cmd_sn_norms, "--prime")
    sp.add_argument("--w", default="ONE")
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--k", type=int, default=4)
    sp.add_argument("--nmax", type=int, default=None)
    sp.add_argument("--budget", type=int, default=200)

    sp = add("ap", cmd_ap, "--prime")
    sp.add_argument("--w", required=True)
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--k", type=int, default=5)

    sp = add("doubling", cmd_doubling)
    sp.add_argument("--w", required=True)
    sp.add_argument("--k", type=int, default=5)

    for name, fn in (("rhi-probe", cmd_rhi_probe), ("ainf-probe", cmd_ainf_probe)):
        sp = add(name, fn)
        sp.add_argument("--w", required=True)
        sp.add_argument("--k", type=int, default=5)
        sp.add_argument("--cap", type=float, default=4.0)
        if name == "ainf-probe":
            sp.add_argument("--samples", type=int, default=16)

    sp = add("maximal", cmd_maximal)
    sp.add_argument("--f", default=None, help="function JSON; default the indicator of P^j")
    sp.add_argument("--j", type=int, default=0)
    sp.add_argument("--k", type=int, default=4)
    sp.add_argument("--m", type=int, default=3, help="ambient window P^-m")
    sp.add_argument("--sharp", action="store_true")
    sp.add_argument("--s", type=float, default=None, help="M_s instead of M")

    sp = add("buckley", cmd_buckley, "--prime")
    sp.add_argument("--p", default="2", help="exponent(s), comma separated")
    sp.add_argument("--theta", default="0.5,0.25,0.1", help="comma separated")
    sp.add_argument("--k", type=int, default=8)
    sp.add_argument("--m", type=int, default=4)

    sp = add("m-sharp-probe", cmd_m_sharp_probe, "--prime")
    sp.add_argument("--w", required=True)
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--k", type=int, default=5)
    sp.add_argument("--bank", type=int, default=100)
    sp.add_argument("--bank-level", type=int, default=3)

    sp = add("schauder", cmd_schauder)
    sp.add_argument("--phi", default=None, help="symbol JSON")
    sp.add_argument("--alpha", default="0.5", help="|phi_hat|^2 = |xi|^alpha 1_D when no file is given")
    sp.add_argument("--klist", default="3,4,5")
    sp.add_argument("--N", type=int, default=32)

    sp = add("tiling", cmd_tiling)
    sp.add_argument("--omega", default=None, help="JSON with omega balls (and optionally spectrum)")
    sp.add_argument("--t", default=None, help="JSON with translations")
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--m", type=int, default=1)

    sp = add("acceptance", cmd_acceptance)
    sp.add_argument("--criterion", default="all", help="number(s) 1-11, comma separated, or all")

    add("version", cmd_version)
    return ap


def _write(text: str, args) -> None:
    path = args.out
    if path is None and os.environ.get(OUT_DIR_ENV):
        path = os.path.join(os.environ[OUT_DIR_ENV], f"{args.command}.{args.format}")
    if path is None:
        sys.stdout.write(text)
        return
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        report = args.func(args)
    except ParameterError as e:
        print(f"lfharmonic {args.command}: {e}", file=sys.stderr)
        return 2
    except LocalFieldError as e:
        print(f"lfharmonic {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    report = {"schema_version": SCHEMA_VERSION, "command": args.command, **report}
    text = to_json(report) + "\n" if args.format == "json" else to_csv(report)
    _write(text, args)
    return 0 if report.get("passed", True) else 1


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
