"""The acceptance suite: one function per criterion, each returning a
``CriterionResult`` with the measured quantities and its own pass/fail.

Tolerances and runtime budgets are pinned here; the CLI subcommand
``acceptance`` and ``tests/test_acceptance.py`` both call these functions.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from . import transform as tr
from .characters import CharacterSystem
from .field import Ball, FieldParams, LocalElement, elem_add, elem_mul, u_of
from .functions import random_function
from .kernels import (
    apply_Sn,
    averaging_errors,
    dirichlet_exact,
    dirichlet_recursion_check,
    function_bank,
    kernel_bound_violations,
    kernel_constancy_check,
    kernel_hat_check,
    sup_sn_norm,
)
from .maximal import buckley_experiment, buckley_slope, m_to_sharp_probe, tn_sharp_probe
from .shift_invariant import (
    PhiSpec,
    TilingSpec,
    biorthogonality_check,
    coverage,
    schauder_verdict,
    spectral_gram,
    standard_tiling,
    tiling_check,
)
from .weights import PowerWeight, a_infty_probe, ap_characteristic, ap_power_closed_form, power_mass_ideal, reverse_holder_probe

FLOAT_TOL = 1e-10
A2_ALPHAS = (-0.5, 0.25, 0.5)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float
    budget: float
    details: dict = dc_field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  criterion {self.number:2d}  {self.title}  ({self.seconds:.1f}s of {self.budget:.0f}s)"

    def as_dict(self) -> dict:
        return {
            "criterion": self.number,
            "title": self.title,
            "passed": self.passed,
            "seconds": self.seconds,
            "budget": self.budget,
            "details": self.details,
        }


def _backends(qs) -> list[FieldParams]:
    out = []
    for q in qs:
        out.append(FieldParams.from_q(q))
        if q in (2, 3, 5, 7):
            out.append(FieldParams.qp(q))
    return out


def _finish(number, title, budget, start, checks: dict, details: dict) -> CriterionResult:
    secs = time.perf_counter() - start
    details = dict(details)
    details["checks"] = {k: bool(v) for k, v in checks.items()}
    passed = all(checks.values()) and secs < budget
    return CriterionResult(number, title, passed, secs, budget, details)


# ---------------------------------------------------------------------------
# 1. characters and transforms

def criterion_1(seed: int = 0, functions: int = 200) -> CriterionResult:
    start = time.perf_counter()
    checks, details = {}, {}
    rng = np.random.default_rng(seed)
    for fld in _backends((2, 3, 4)):
        q = fld.q
        exact = fld.p == 2
        for k in range(1, 6):
            if q**k > 1024:
                continue
            tag = f"{fld} k={k}"
            cs = CharacterSystem(fld, k)
            if exact:
                checks[f"orthonormal exact {tag}"] = cs.is_orthonormal()
            else:
                checks[f"orthonormal {tag}"] = float(np.max(np.abs(cs.gram() - np.eye(q**k)))) <= FLOAT_TOL
            worst_pars, worst_fast = 0.0, 0.0
            for _ in range(functions):
                f = random_function(fld, k, rng)
                F = tr.fast_fourier(fld, f.values)
                G = tr.naive_fourier(fld, f.values)
                l2 = float(np.sum(np.abs(f.values) ** 2)) / q**k
                worst_pars = max(worst_pars, abs(float(np.sum(np.abs(F) ** 2)) - l2) / l2)
                worst_fast = max(worst_fast, float(np.max(np.abs(F - G))))
            checks[f"parseval {tag}"] = worst_pars <= FLOAT_TOL
            checks[f"fast=naive {tag}"] = worst_fast <= FLOAT_TOL
            details[f"parseval rel err {tag}"] = worst_pars
            details[f"fast-naive max err {tag}"] = worst_fast
            if exact:
                ok_fast, ok_pars = True, True
                for _ in range(3):
                    vals = np.array([Fraction(int(v), 7) for v in rng.integers(-20, 21, q**k)], dtype=object)
                    A = tr.exact_fourier(fld, vals)
                    B = tr.exact_naive_fourier(fld, vals)
                    ok_fast &= A.equals(B)
                    energy = A.abs2().sum(axis=0).to_rational()
                    ok_pars &= energy == sum(v * v for v in vals) / q**k
                checks[f"fast=naive exact {tag}"] = ok_fast
                checks[f"parseval exact {tag}"] = ok_pars
    return _finish(1, "characters orthonormal, Parseval, fast transform = naive", 30, start, checks, details)


# ---------------------------------------------------------------------------
# 2. u(n) laws

def _power_of_prime(fld: FieldParams, e: int) -> LocalElement:
    return LocalElement.from_digits(fld, [1], e)


def criterion_2() -> CriterionResult:
    start = time.perf_counter()
    checks, details = {}, {}
    for fld in _backends((2, 3, 4)):
        q = fld.q
        ok = u_of(fld, 0).is_zero
        for n in range(1, q**6):
            s = len(np.base_repr(n, q))
            ok &= u_of(fld, n).abs() == Fraction(q) ** s
        checks[f"norm law n<q^6 {fld}"] = ok
        ok = True
        for k in range(0, 4):
            shift = _power_of_prime(fld, -k)
            for r in range(q**2):
                ur = elem_mul(u_of(fld, r), shift)
                for s in range(q**k):
                    ok &= u_of(fld, r * q**k + s) == elem_add(ur, u_of(fld, s))
        checks[f"composition r<q^2 k<=3 {fld}"] = ok
        if not fld.is_padic:
            k = 3
            window = {u_of(fld, n) for n in range(q**k)}
            checks[f"-U = U on window {fld}"] = {-x for x in window} == window
            checks[f"u(l) + U = U on window {fld}"] = all(
                {elem_add(u_of(fld, l), x) for x in window} == window for l in range(q**k)
            )
    return _finish(2, "u(n) norm law, composition, group laws", 10, start, checks, details)


# ---------------------------------------------------------------------------
# 3. Dirichlet facts

def criterion_3(seed: int = 0) -> CriterionResult:
    start = time.perf_counter()
    checks, details = {}, {}
    for fld in _backends((2, 3)):
        q, k = fld.q, 4
        ok = True
        idx = np.arange(q**k)
        for r in range(k + 1):
            D = dirichlet_exact(fld, q**r, k).to_rational()
            want = np.where(idx % q**r == 0, q**r, 0)
            ok &= all(Fraction(a) == b for a, b in zip(D, want))
        checks[f"D_(q^r) = q^r 1_(P^r) exact {fld}"] = ok
        ok = all(
            dirichlet_recursion_check(fld, n, l, k) for n in range(q**k + 1) for l in range(1, k + 1)
        )
        checks[f"recursion n<=q^4 all splits {fld}"] = ok
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(100):
            f = random_function(fld, k, rng)
            for r in range(k + 1):
                avg = f.coarsen(r).refine(k)
                worst = max(worst, float(np.max(np.abs(apply_Sn(q**r, f).values - avg.values))))
        checks[f"S_(q^r) = ball averaging {fld}"] = worst <= FLOAT_TOL
        details[f"S_(q^r) max err {fld}"] = worst
    return _finish(3, "Dirichlet kernel identities", 60, start, checks, details)


# ---------------------------------------------------------------------------
# 4. kernel audit

def criterion_4() -> CriterionResult:
    start = time.perf_counter()
    checks, details = {}, {}
    for fld in _backends((2, 3)):
        q = fld.q
        k = 5  # K_n needs n < q^k; this resolves every n <= q^4
        viol, worst = 0, 0.0
        hat_ok = True
        for n in range(1, q**4 + 1):
            c, w = kernel_bound_violations(fld, n, k)
            viol += c
            worst = max(worst, w)
        for n in range(1, q**3 + 1):
            hat_ok &= kernel_hat_check(fld, n, 4)
        checks[f"|K_n||x| <= q {fld}"] = viol == 0
        details[f"max |K_n||x| {fld}"] = worst
        checks[f"K^_n indicator of n cosets {fld}"] = hat_ok
        checks[f"constancy window 3 {fld}"] = all(kernel_constancy_check(fld, n, 3) for n in range(1, q**3))
    return _finish(4, "modified kernel bound, transform and constancy", 120, start, checks, details)


# ---------------------------------------------------------------------------
# 5. A_p closed forms

def criterion_5(k: int = 6) -> CriterionResult:
    start = time.perf_counter()
    checks, details = {}, {}
    for fld in _backends((2, 3)):
        q = fld.q
        for a in A2_ALPHAS:
            got = float(ap_characteristic(PowerWeight(fld, a), 2, k).value)
            want = ap_power_closed_form(q, a, 2)
            details[f"[|x|^{a}]_A2 {fld}"] = got
            checks[f"A_2 of |x|^{a} {fld}"] = abs(got - want) <= FLOAT_TOL * want
    mass = power_mass_ideal(2, 1, 0)
    details["int_D |x| (q=2)"] = str(mass)
    checks["int_D |x| = 2/3 exact"] = mass == Fraction(2, 3)
    return _finish(5, "A_2 characteristic of power weights", 10, start, checks, details)


# ---------------------------------------------------------------------------
# 6. Buckley sharpness

BUCKLEY_THETAS = (0.5, 0.25, 0.1)


def criterion_6(k: int = 8, m: int = 4) -> CriterionResult:
    start = time.perf_counter()
    checks, details = {}, {}
    fld = FieldParams.laurent(2)
    for p in (1.5, 2.0, 3.0):
        recs = [buckley_experiment(fld, p, th, k, m) for th in BUCKLEY_THETAS]
        for r in recs:
            checks[f"pointwise p={p} theta={r.theta}"] = r.pointwise_violations == 0
        slope = buckley_slope(recs)
        target = 1 / (p - 1)
        details[f"slope p={p}"] = slope
        checks[f"slope p={p} within 15% of {target:g}"] = abs(slope - target) <= 0.15 * target
    return _finish(6, "Buckley sharpness of the maximal operator", 300, start, checks, details)


# ---------------------------------------------------------------------------
# 7. weighted uniform boundedness of S_n

def criterion_7() -> CriterionResult:
    start = time.perf_counter()
    checks, details = {}, {}
    for fld in _backends((2,)):
        for alpha, want_growth in ((0.5, False), (1.0, True)):
            w = PowerWeight(fld, alpha)
            s4 = sup_sn_norm(fld, w, 4, 16)
            s5 = sup_sn_norm(fld, w, 5, 32)
            growth = s5 / s4 - 1
            details[f"sup ||S_n|| alpha={alpha} {fld}"] = {"k=4": s4, "k=5": s5, "growth": growth}
            if want_growth:
                checks[f"alpha=1 grows >= 20% {fld}"] = growth >= 0.20
            else:
                checks[f"alpha=1/2 grows < 5% {fld}"] = growth < 0.05
    return _finish(7, "sup ||S_n|| on L^2(w): bounded for A_2, growing at the boundary", 120, start, checks, details)


# ---------------------------------------------------------------------------
# 8. convergence of ball averages

def criterion_8(seed: int = 0, functions: int = 50) -> CriterionResult:
    start = time.perf_counter()
    checks, details = {}, {}
    for fld, k in ((FieldParams.laurent(2), 5), (FieldParams.qp(2), 5), (FieldParams.laurent(3), 4), (FieldParams.qp(3), 4)):
        for a in A2_ALPHAS:
            rng = np.random.default_rng(seed)
            w = PowerWeight(fld, a)
            bad, worst, end = 0, 0.0, 0.0
            for _ in range(functions):
                e = np.array(averaging_errors(random_function(fld, k, rng), w))
                inc = np.diff(e) / e[:-1]
                if np.any(inc > 1e-12):
                    bad += 1
                    worst = max(worst, float(inc.max()))
                end = max(end, e[-1] / e[0])
            details[f"alpha={a} {fld}"] = {"non-monotone": bad, "worst relative increase": worst, "final/initial": end}
            checks[f"monotone alpha={a} {fld}"] = bad == 0
            checks[f"reaches 0 alpha={a} {fld}"] = end <= 1e-12
    return _finish(8, "||S_(q^r) f - f||_(L^2(w)) decreases to 0", 60, start, checks, details)


# ---------------------------------------------------------------------------
# 9. Schauder pipeline

def criterion_9() -> CriterionResult:
    start = time.perf_counter()
    checks, details = {}, {}
    for fld in (FieldParams.laurent(2), FieldParams.laurent(3)):
        k = 5 if fld.q == 2 else 3
        klist = (k - 2, k - 1, k)
        for a, want in ((0.0, "schauder_basis"), (0.5, "schauder_basis"), (1.0, None)):
            rep = schauder_verdict(PhiSpec.power(fld, a, k), klist, 32)
            details[f"|xi|^{a} {fld}"] = rep.verdict.value
            if want:
                checks[f"|xi|^{a} -> {want} {fld}"] = rep.verdict.value == want
            else:
                checks[f"|xi|^{a} never schauder_basis {fld}"] = rep.verdict.value != "schauder_basis"
    fld = FieldParams.laurent(2)
    res = biorthogonality_check(PowerWeight(fld, 0.5), 8, 5)
    details["biorthogonality residual |xi|^0.5 N=8"] = res
    checks["biorthogonality <= 1e-10"] = res <= FLOAT_TOL
    return _finish(9, "Schauder verdicts for 1_D, |xi|^(1/2), |xi|", 120, start, checks, details)


# ---------------------------------------------------------------------------
# 10. tiling and spectral checkers

def mutated_omega(fld: FieldParams, k: int) -> tuple:
    """D with the level-k cell at 1 moved to u(1) + p.

    The target is a translate by u(1) of the cell at p, which stays in Omega,
    so the translation by u(1) covers it twice.
    """
    q = fld.q
    cells = [Ball(k, tuple(int(d) for d in np.base_repr(i, q).zfill(k)[::-1]), 0) for i in range(q**k) if i != 1]
    moved = Ball(k, (1, 0, 1) + (0,) * (k - 2), -1)
    return tuple(cells) + (moved,)


def criterion_10(k: int = 3, m: int = 2) -> CriterionResult:
    start = time.perf_counter()
    checks, details = {}, {}
    for fld in _backends((2,)) + [FieldParams.laurent(3)]:
        spec = standard_tiling(fld, k, m)
        g = spectral_gram(spec, 0, k)
        if fld.p == 2:
            checks[f"spectral gram = 0 exactly {fld}"] = g == 0
        else:
            checks[f"spectral gram <= 1e-10 {fld}"] = float(g) <= FLOAT_TOL
        checks[f"D tiles the window {fld}"] = tiling_check(spec, m, k)
        bad = TilingSpec(fld, mutated_omega(fld, k), spec.translations)
        cov = coverage(bad, m, k)
        twice = np.flatnonzero(cov == 2)
        details[f"mutated coverage-2 cells {fld}"] = [int(c) for c in twice]
        checks[f"mutated fails {fld}"] = not tiling_check(bad, m, k) and twice.size > 0
    return _finish(10, "tiling and spectral checkers", 10, start, checks, details)


# ---------------------------------------------------------------------------
# 11. probes

def criterion_11(seed: int = 0) -> CriterionResult:
    start = time.perf_counter()
    checks, details = {}, {}
    levels = (3, 4, 5)
    tn_levels = (4, 5, 6)  # T_n with n = q^3 needs level > 3

    def stable(vals):
        return all(math.isfinite(v) and v > 0 for v in vals) and max(vals) <= 1.5 * min(vals)

    for fld in _backends((2, 3)):
        bank3 = function_bank(fld, 3, 100, seed)
        for a in A2_ALPHAS:
            w = PowerWeight(fld, a)
            eps = [reverse_holder_probe(w, k).best for k in levels]
            dlt = [a_infty_probe(w, k, seed=seed).best for k in levels]
            shp = [m_to_sharp_probe(2, w, bank3, k).value for k in levels]
            details[f"alpha={a} {fld}"] = {"rhi eps": eps, "ainf delta": dlt, "M/sharp ratio": shp}
            checks[f"rhi stable alpha={a} {fld}"] = stable(eps)
            checks[f"ainf stable alpha={a} {fld}"] = stable(dlt)
            checks[f"M/sharp stable alpha={a} {fld}"] = stable(shp)
        q = fld.q
        for s in (1.5, 2.0):
            vals = [tn_sharp_probe(s, function_bank(fld, k, 100, seed), (q, q**3)) for k in tn_levels]
            details[f"T_n probe s={s} {fld}"] = {f"k={p.level}": list(p.values) for p in vals}
            checks[f"T_n probe stable s={s} {fld}"] = stable([p.value for p in vals])
            checks[f"T_n probe n=q^3 <= 1.2 x n=q s={s} {fld}"] = all(p.spread <= 1.2 for p in vals)
    return _finish(11, "reverse Holder, A_inf, M/sharp and T_n probes", 180, start, checks, details)


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
    11: criterion_11,
}


def run(number: int) -> CriterionResult:
    return CRITERIA[number]()
