"""Translates of one function in positive characteristic: periodization, the
A_2 Schauder criterion, canonical duals and finite tiling/spectral checkers.

The symbol ``phi_hat`` lives on a frequency window ``P^-m / P^k``.  In positive
characteristic the set {u(n)} is the group of digit strings at negative
positions, so a window cell splits as (digits on D, negative digits) and the
periodization is a sum over the second factor.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from enum import Enum
from fractions import Fraction

import numpy as np

from .characters import pairing_phases, roots_of_unity
from .cyclo import Cyclo
from .errors import DomainError, ParameterError, ResolutionError, UnsupportedError, WindowError
from .field import Ball, FieldParams, LocalElement, cell_add
from .functions import SampledFunction
from .kernels import kernel_operator, weighted_opnorm_L2
from .weights import PowerWeight, SampledWeight, Weight, a2_check

TAIL_LIMIT = 1e-3
STABLE_REL = 0.05   # a2 values agree to 5% on the last two levels
TRACE_RATIO = 2.0   # max/min of the upper half of the norm trace
GROWTH = 0.20       # per-level growth of sup ||S_n|| counted as divergence


# ---------------------------------------------------------------------------
# symbols

@dataclass(frozen=True)
class PhiSpec:
    """Cell values of phi_hat on ``P^-window / P^level``.

    ``alpha`` marks the symbol ``|phi_hat|^2 = |xi|^alpha 1_D``; the periodized
    weight is then the power weight itself and every level is exact.  ``tail``
    is the declared mass of ``|phi_hat|^2`` outside the window.
    """

    phi_hat: SampledFunction
    alpha: float | None = None
    total: float | None = None
    tail: float = 0.0

    def __post_init__(self):
        if self.total is not None:
            mass = self.window_mass
            if abs(mass - self.total) > 1e-6 * max(1.0, abs(self.total)):
                raise ParameterError(f"window mass {mass:.12g} differs from the declared {self.total:.12g}")
        if self.tail < 0:
            raise ParameterError("tail mass is non-negative")

    @property
    def field(self) -> FieldParams:
        return self.phi_hat.field

    @property
    def level(self) -> int:
        return self.phi_hat.level

    @property
    def window(self) -> int:
        return self.phi_hat.window

    @property
    def density(self) -> np.ndarray:
        """Cell values of ``|phi_hat|^2``."""
        return np.abs(np.asarray(self.phi_hat.values, dtype=complex)) ** 2

    @property
    def window_mass(self) -> float:
        return float(self.density.sum()) / self.field.q**self.level

    @classmethod
    def power(cls, field: FieldParams, alpha: float, k: int) -> PhiSpec:
        """``|phi_hat|^2 = |xi|^alpha`` on D, zero outside, cell-averaged at level k."""
        cells = np.asarray(PowerWeight(field, alpha).cell_averages(k), dtype=float)
        return cls(SampledFunction(field, k, np.sqrt(cells)), alpha=alpha)

    def to_json(self) -> str:
        d = json.loads(self.phi_hat.to_json())
        if self.alpha is not None:
            d["alpha"] = self.alpha
        if self.tail:
            d["tail"] = self.tail
        return json.dumps(d)

    @classmethod
    def from_json(cls, text: str) -> PhiSpec:
        """Either a serialized function (plus optional ``tail``) or a power symbol
        ``{"q":.., "p":.., "char":.., "alpha":.., "level":..}``."""
        d = json.loads(text)
        if "alpha" in d and "values" not in d:
            fld = _field_from_dict(d)
            return cls.power(fld, float(d["alpha"]), int(d["level"]))
        f = SampledFunction.from_json(text)
        return cls(f, alpha=d.get("alpha"), total=d.get("total"), tail=float(d.get("tail", 0.0)))


def _field_from_dict(d: dict) -> FieldParams:
    p, c = int(d["p"]), int(d.get("c", 1))
    if int(d.get("char", p)) == 0:
        return FieldParams.qp(p)
    modulus = tuple(d["modulus"]) if d.get("modulus") else None
    return FieldParams.laurent(p, c, modulus)


@dataclass(frozen=True)
class Periodization:
    weight: Weight          # w_phi on D
    cells: np.ndarray       # its values at the symbol's level
    tail: float             # declared mass outside the window


def periodize(spec: PhiSpec) -> Periodization:
    """``w_phi(xi) = sum_n |phi_hat(xi + u(n))|^2`` truncated to the window."""
    fld = spec.field
    if fld.is_padic:
        raise UnsupportedError("periodization needs the group {u(n)}: positive characteristic only")
    total = spec.window_mass + spec.tail
    if total > 0 and spec.tail > TAIL_LIMIT * total:
        raise WindowError(f"tail mass {spec.tail:.6g} exceeds {TAIL_LIMIT:g} of the total {total:.6g}")
    q, m, k = fld.q, spec.window, spec.level
    cells = spec.density.reshape(q**k, q**m).sum(axis=1)
    if spec.alpha is not None:
        return Periodization(PowerWeight(fld, spec.alpha), cells, spec.tail)
    f = SampledFunction(fld, k, cells)
    w = SampledWeight(f) if np.all(cells > 0) else _ZeroedWeight(f)
    return Periodization(w, cells, spec.tail)


@dataclass(frozen=True)
class _ZeroedWeight(Weight):
    """Nonnegative cell data with zero cells; only reciprocal tests accept it."""

    function: SampledFunction

    @property
    def field(self) -> FieldParams:
        return self.function.field

    def cell_averages(self, k: int, s=1, window: int = 0) -> np.ndarray:
        if window:
            raise ParameterError("sampled weights are stored on D")
        f = self.function
        vals = np.asarray(f.values, dtype=float)
        with np.errstate(divide="ignore"):
            vals = np.where(vals > 0, vals ** float(s), 0.0 if s > 0 else math.inf)
        g = SampledFunction(f.field, f.level, vals)
        return g.refine(k).values if k >= f.level else g.coarsen(k).values


# ---------------------------------------------------------------------------
# duals and biorthogonality

@dataclass(frozen=True)
class DualReport:
    m: np.ndarray           # cell averages of 1 / w_phi at the finest level
    integrals: tuple        # int_D 1/w_phi at each tested level
    levels: tuple
    integrable: bool
    reason: str

    def as_dict(self) -> dict:
        return {
            "levels": list(self.levels),
            "integrals": list(self.integrals),
            "integrable": self.integrable,
            "reason": self.reason,
        }


def _as_weight(w, field: FieldParams | None) -> Weight:
    if isinstance(w, Periodization):
        return w.weight
    if isinstance(w, SampledFunction):
        vals = np.asarray(w.values, dtype=float)
        if np.any(vals < 0):
            raise DomainError("w_phi is nonnegative")
        return SampledWeight(w) if np.all(vals > 0) else _ZeroedWeight(w)
    if isinstance(w, Weight):
        return w
    from .weights import as_weight

    return as_weight(w, field)


def canonical_dual(w_phi, levels=(3, 4, 5), field: FieldParams | None = None) -> DualReport:
    """Cell averages of ``m = 1 / w_phi`` and whether m is integrable.

    Integrability fails on a zero cell, an infinite cell average, or when the
    integral grows by a factor of at least ``q^(1/2)`` per refinement.
    """
    w = _as_weight(w_phi, field)
    q = w.field.q
    levels = tuple(sorted(levels))
    integrals, m = [], None
    for k in levels:
        with np.errstate(divide="ignore"):
            m = np.asarray(w.cell_averages(k, s=-1), dtype=float)
        integrals.append(float(m.sum()) / q**k)
    if not np.all(np.isfinite(m)):
        return DualReport(m, tuple(integrals), levels, False, "1/w_phi is infinite on some cell")
    growth = [b / a for a, b in zip(integrals, integrals[1:])]
    if growth and max(growth) >= math.sqrt(q):
        return DualReport(m, tuple(integrals), levels, False, "int 1/w_phi grows geometrically with the level")
    return DualReport(m, tuple(integrals), levels, True, "finite and stable")


def biorthogonality_check(w_phi, N: int, k: int, field: FieldParams | None = None) -> float:
    """``max_{k,l<N} |<chi_k, chi_l / w_phi>_{L^2(w_phi)} - delta_kl|`` at level k."""
    w = _as_weight(w_phi, field)
    fld = w.field
    q = fld.q
    if N > q**k:
        raise ResolutionError(f"N = {N} characters are not resolved at level {k}")
    dual = canonical_dual(w, (k,))
    if not dual.integrable:
        raise DomainError("canonical dual is not integrable: " + dual.reason)
    wc = np.asarray(w.cell_averages(k), dtype=float)
    mc = 1.0 / wc  # z_l = chi_l / w_phi cellwise
    from .characters import character_table

    ph, n_ord = character_table(fld, k)
    chi = roots_of_unity(n_ord)[ph[:N]]
    G = (chi * wc) @ (chi * mc).conj().T / q**k
    return float(np.max(np.abs(G - np.eye(N))))


# ---------------------------------------------------------------------------
# analysis and synthesis

def synthesis(spec: PhiSpec, coeffs) -> SampledFunction:
    """``(sum_n a_n chi_n) phi_hat`` on the symbol window, the trigonometric
    polynomial extended periodically from D."""
    fld, q, m, k = spec.field, spec.field.q, spec.window, spec.level
    a = np.asarray(coeffs, dtype=complex)
    if a.size > q**k:
        raise ResolutionError(f"{a.size} coefficients are not resolved at level {k}")
    F = np.zeros(q**k, dtype=complex)
    F[: a.size] = a
    from .transform import fast_inverse

    g = fast_inverse(fld, F)
    idx = np.arange(q ** (m + k))
    return SampledFunction(fld, k, g[idx // q**m] * np.asarray(spec.phi_hat.values, dtype=complex), m)


def isometry_residual(spec: PhiSpec, coeffs) -> float:
    """``| ||sum a_n chi_n||_{L^2(D, w_phi)} - ||synthesis||_{L^2(window)} |``."""
    fld, q, k = spec.field, spec.field.q, spec.level
    per = periodize(spec)
    a = np.asarray(coeffs, dtype=complex)
    F = np.zeros(q**k, dtype=complex)
    F[: a.size] = a
    from .transform import fast_inverse

    g = fast_inverse(fld, F)
    lhs = math.sqrt(float(np.sum(np.abs(g) ** 2 * per.cells)) / q**k)
    s = synthesis(spec, a)
    rhs = math.sqrt(float(np.sum(np.abs(np.asarray(s.values)) ** 2)) / q**k)
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# the Schauder verdict

class Verdict(str, Enum):
    SCHAUDER = "schauder_basis"
    NOT_SCHAUDER = "not_schauder"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class SchauderReport:
    w_phi: Weight
    levels: tuple
    a2_values: tuple
    a2_value: float
    dual: DualReport
    traces: dict            # level -> tuple of ||S_n|| for n = 1..min(N, q^level)
    verdict: Verdict
    reasons: tuple = dc_field(default=())

    @property
    def dual_integrable(self) -> bool:
        return self.dual.integrable

    def as_dict(self) -> dict:
        return {
            "levels": list(self.levels),
            "a2_values": list(self.a2_values),
            "a2_value": self.a2_value,
            "dual": self.dual.as_dict(),
            "traces": {str(k): list(v) for k, v in self.traces.items()},
            "verdict": self.verdict.value,
            "reasons": list(self.reasons),
            "thresholds": {
                "a2_stable_rel": STABLE_REL,
                "trace_ratio": TRACE_RATIO,
                "growth_per_level": GROWTH,
                "note": "finite-resolution conventions",
            },
        }


def schauder_verdict(spec: PhiSpec, k_list=(3, 4, 5), N: int = 32) -> SchauderReport:
    per = periodize(spec)
    w = per.weight
    q = spec.field.q
    levels = tuple(sorted(k_list))
    if len(levels) < 2:
        raise ParameterError("need at least two levels")

    a2 = []
    for k in levels:
        try:
            a2.append(float(a2_check(w, k).value))
        except DomainError:
            a2.append(math.inf)
    dual = canonical_dual(w, levels)

    traces = {}
    for k in levels:
        try:
            traces[k] = tuple(
                weighted_opnorm_L2(kernel_operator(spec.field, "S_n", n, k), w) for n in range(1, min(N, q**k) + 1)
            )
        except DomainError:
            traces[k] = (math.inf,)

    reasons = []
    finite = all(math.isfinite(v) for v in a2)
    stable = finite and abs(a2[-1] - a2[-2]) < STABLE_REL * abs(a2[-2])
    last = traces[levels[-1]]
    upper = last[len(last) // 2 :]
    bounded = all(math.isfinite(v) for v in upper) and max(upper) / min(upper) < TRACE_RATIO
    sups = [max(traces[k]) for k in levels]
    growing = all(b >= (1 + GROWTH) * a for a, b in zip(sups, sups[1:]))

    reasons.append(f"a2 {'stable' if stable else 'not stable'} over levels {levels}")
    reasons.append(f"norm trace {'bounded' if bounded else 'not bounded'} (upper-half max/min < {TRACE_RATIO})")
    reasons.append(f"canonical dual {'integrable' if dual.integrable else 'not integrable'}: {dual.reason}")
    if growing:
        reasons.append(f"sup ||S_n|| grows by at least {GROWTH:.0%} per level")

    if stable and bounded and dual.integrable:
        verdict = Verdict.SCHAUDER
    elif not dual.integrable or growing:
        verdict = Verdict.NOT_SCHAUDER
    else:
        verdict = Verdict.INCONCLUSIVE
    return SchauderReport(w, levels, tuple(a2), a2[-1], dual, traces, verdict, tuple(reasons))


# ---------------------------------------------------------------------------
# tiling and spectral checkers

@dataclass(frozen=True)
class TilingSpec:
    field: FieldParams
    omega: tuple            # Balls
    translations: tuple = ()  # LocalElements
    spectrum: tuple = ()      # LocalElements


def omega_cells(spec: TilingSpec, m: int, k: int) -> np.ndarray:
    """Indicator of Omega on the window ``P^-m / P^k``."""
    q = spec.field.q
    mask = np.zeros(q ** (m + k), dtype=np.int64)
    for b in spec.omega:
        if b.level > k:
            raise ResolutionError(f"ball of level {b.level} is not a union of level-{k} cells")
        mask[b.cells(q, m, k)] += 1
    if np.any(mask > 1):
        raise ParameterError("the balls of Omega overlap")
    if not mask.any():
        raise ParameterError("Omega is empty")
    return mask


def coverage(spec: TilingSpec, m: int, k: int) -> np.ndarray:
    """``sum_t 1_Omega(x - t)`` on every cell of the window."""
    L = m + k
    mask = omega_cells(spec, m, k)
    cells = np.nonzero(mask)[0]
    count = np.zeros(mask.size, dtype=np.int64)
    for t in spec.translations:
        ti = t.coset_index(m, k)
        np.add.at(count, cell_add(spec.field, cells, ti, L), 1)
    return count


def coverage_histogram(count: np.ndarray) -> dict:
    vals, freq = np.unique(count, return_counts=True)
    return {int(v): int(f) for v, f in zip(vals, freq)}


def tiling_check(spec: TilingSpec, m: int, k: int) -> bool:
    """Whether the translates of Omega cover every window cell exactly once."""
    return bool(np.all(coverage(spec, m, k) == 1))


def _gram_phases(spec: TilingSpec, m: int, k: int):
    mask = omega_cells(spec, m, k)
    cells = np.nonzero(mask)[0]
    ph, N = pairing_phases(spec.field, m, k)
    rows = [g.coset_index(k, m) for g in spec.spectrum]
    return ph[np.ix_(rows, cells)], N, cells.size


def spectral_gram(spec: TilingSpec, m: int, k: int, exact: bool | None = None):
    """``max |<chi_g, chi_g'>_{L^2(Omega)} / |Omega| - delta|`` over the spectrum.

    Exact (a Fraction, via cyclotomic arithmetic) for p = 2 by default.
    """
    ph, N, count = _gram_phases(spec, m, k)
    G = len(spec.spectrum)
    if exact is None:
        exact = spec.field.p == 2
    if not exact:
        chi = roots_of_unity(N)[ph]
        gram = chi @ chi.conj().T / count
        return float(np.max(np.abs(gram - np.eye(G))))
    diff = (ph[:, None, :] - ph[None, :, :]) % N
    num = np.zeros((G, G, N), dtype=object)
    num[...] = 0
    for j in range(N):
        num[..., j] = (diff == j).sum(axis=-1).astype(object)
    num[np.arange(G), np.arange(G), 0] -= count
    resid = Cyclo(num, count, spec.field.p)
    if np.all(resid.is_zero()):
        return Fraction(0)
    return Fraction(float(np.max(np.abs(resid.to_complex()))))


def parseval_on_omega(spec: TilingSpec, m: int, k: int, bank: int = 8, seed: int = 0) -> float:
    """Largest relative Parseval defect of random functions on Omega against the
    spectrum (zero when the spectrum is an orthonormal basis)."""
    ph, N, count = _gram_phases(spec, m, k)
    chi = roots_of_unity(N)[ph] / math.sqrt(count)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(bank):
        f = rng.standard_normal(count) + 1j * rng.standard_normal(count)
        coeffs = chi.conj() @ f
        worst = max(worst, abs(np.sum(np.abs(coeffs) ** 2) - np.sum(np.abs(f) ** 2)) / np.sum(np.abs(f) ** 2))
    return float(worst)


def orthonormal_basis_check(spec: TilingSpec, m: int, k: int, tol: float = 1e-9) -> bool:
    """Gram identity, enough exponentials, and Parseval on a seeded bank."""
    dim = int(omega_cells(spec, m, k).sum())
    if len(spec.spectrum) < dim:
        return False
    return float(spectral_gram(spec, m, k, exact=False)) <= tol and parseval_on_omega(spec, m, k) <= tol


def standard_tiling(field: FieldParams, k: int, m: int = 0) -> TilingSpec:
    """Omega = D with translations {u(n): n < q^m} and spectrum {u(n): n < q^k}."""
    from .field import u_of

    return TilingSpec(
        field,
        (Ball(0),),
        tuple(u_of(field, n) for n in range(field.q**m)),
        tuple(u_of(field, n) for n in range(field.q**k)),
    )


def tiling_to_json(spec: TilingSpec) -> str:
    """Balls as [level, word, start]; elements as [valuation, digits]."""
    def el(x: LocalElement):
        return [None, []] if x.is_zero else [int(x.valuation), list(x.digits)]

    return json.dumps(
        {
            "omega": [[b.level, list(b.word), b.start] for b in spec.omega],
            "translations": [el(t) for t in spec.translations],
            "spectrum": [el(g) for g in spec.spectrum],
        }
    )


def tiling_from_json(field: FieldParams, text: str) -> TilingSpec:
    d = json.loads(text)

    def el(v):
        if v[0] is None:
            return LocalElement.zero(field)
        return LocalElement.from_digits(field, v[1], v[0])

    return TilingSpec(
        field,
        tuple(Ball(int(b[0]), tuple(b[1]), int(b[2]) if len(b) > 2 else 0) for b in d.get("omega", [])),
        tuple(el(t) for t in d.get("translations", [])),
        tuple(el(g) for g in d.get("spectrum", [])),
    )
