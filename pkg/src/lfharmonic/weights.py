"""Weights on D: power weights in closed form, sampled weights, and the A_p
characteristic with its companions (doubling, reverse Hoelder, A_infinity).

All ball quantities are computed from *cell averages* of w^s at a fixed level
k.  For |x|^a the average over the central cell P^k comes from the closed-form
mass of P^k, so ball averages are exact aggregates of cell averages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, NonIntegrableError, ParameterError
from .field import Ball, FieldParams, cell_valuation, to_base
from .functions import SampledFunction


def _q_pow(q: int, e, exact: bool):
    if exact:
        return Fraction(q) ** int(e)
    return float(q) ** float(e)


def _is_integer(a) -> bool:
    return isinstance(a, (int, Fraction)) and Fraction(a).denominator == 1


def power_mass_ideal(q: int, alpha, j: int):
    """``int_{P^j} |x|^alpha dx = (q-1) q^(alpha - j(alpha+1)) / (q^(alpha+1) - 1)``."""
    if alpha <= -1:
        raise NonIntegrableError(f"|x|^{alpha} is not integrable near 0")
    exact = _is_integer(alpha)
    num = (q - 1) * _q_pow(q, alpha - j * (alpha + 1), exact)
    return num / (_q_pow(q, alpha + 1, exact) - 1)


def power_weight_ball_mass(field: FieldParams, alpha, ball: Ball):
    """``int_B |x|^alpha dx`` in closed form."""
    q = field.q
    if alpha <= -1:
        raise NonIntegrableError(f"|x|^{alpha} is not integrable near 0")
    if not any(ball.word):
        return power_mass_ideal(q, alpha, ball.level)
    # off the origin |x| is constant on the ball
    v = ball.start + next(i for i, d in enumerate(ball.word) if d)
    exact = _is_integer(alpha)
    return _q_pow(q, -v * alpha, exact) * _q_pow(q, -ball.level, exact)


def ap_power_closed_form(q: int, alpha: float, p: float) -> float:
    """``max(1, (q-1)^p (q^(a+1) - 1)^-1 (q^(1 - a/(p-1)) - 1)^(1-p))``; inf outside (-1, p-1)."""
    if not -1 < alpha < p - 1:
        return math.inf
    val = (q - 1) ** p / (q ** (alpha + 1) - 1) * (q ** (1 - alpha / (p - 1)) - 1) ** (1 - p)
    return max(1.0, val)


# ---------------------------------------------------------------------------
# weight representations

class Weight:
    """A positive weight on D (Lambda-periodic), known through cell averages."""

    field: FieldParams
    periodic: bool = True

    def cell_averages(self, k: int, s=1, window: int = 0) -> np.ndarray:
        raise NotImplementedError

    def sampled(self, k: int) -> SampledFunction:
        return SampledFunction(self.field, k, self.cell_averages(k))

    def power(self, s) -> Weight:
        raise NotImplementedError


@dataclass(frozen=True)
class PowerWeight(Weight):
    """``|x|^alpha``."""

    field: FieldParams
    alpha: float

    def __post_init__(self):
        if isinstance(self.alpha, float) and self.alpha.is_integer():
            object.__setattr__(self, "alpha", int(self.alpha))

    @property
    def exact(self) -> bool:
        return _is_integer(self.alpha)

    def cell_averages(self, k: int, s=1, window: int = 0) -> np.ndarray:
        """Average of ``|x|^(alpha s)`` over each cell of ``P^-window / P^k``."""
        a = self.alpha * s
        if isinstance(a, float) and a.is_integer():
            a = int(a)
        q = self.field.q
        val = cell_valuation(q, window, k)
        exact = _is_integer(a)
        if exact:
            out = np.array([Fraction(q) ** (-int(v) * int(a)) for v in val], dtype=object)
        else:
            out = float(q) ** (-val.astype(float) * a)
        if a <= -1:
            out[0] = math.inf
            return out.astype(float) if not exact else out
        out[0] = power_mass_ideal(q, a, k) * (Fraction(q) ** k if exact else float(q) ** k)
        return out

    def ball_mass(self, ball: Ball):
        return power_weight_ball_mass(self.field, self.alpha, ball)

    def power(self, s) -> PowerWeight:
        return PowerWeight(self.field, self.alpha * s)


@dataclass(frozen=True)
class SampledWeight(Weight):
    """Weight given by positive cell values at some level."""

    function: SampledFunction

    def __post_init__(self):
        vals = self.function.values
        if np.iscomplexobj(vals):
            raise DomainError("weights are real valued")
        _check_positive(vals)

    @property
    def field(self) -> FieldParams:
        return self.function.field

    @property
    def exact(self) -> bool:
        return self.function.exact

    @property
    def level(self) -> int:
        return self.function.level

    def cell_averages(self, k: int, s=1, window: int = 0) -> np.ndarray:
        if window:
            raise ParameterError("sampled weights are stored on D")
        vals = self.function.values
        if s != 1:
            if self.exact and _is_integer(s):
                vals = np.array([v ** int(s) for v in vals], dtype=object)
            else:
                vals = np.asarray(vals, dtype=float) ** s
        f = SampledFunction(self.field, self.level, vals)
        if k >= self.level:
            return f.refine(k).values
        return f.coarsen(k).values

    def power(self, s) -> SampledWeight:
        return SampledWeight(SampledFunction(self.field, self.level, self.cell_averages(self.level, s)))


def as_weight(w, field: FieldParams | None = None) -> Weight:
    if isinstance(w, Weight):
        return w
    if isinstance(w, SampledFunction):
        return SampledWeight(w)
    if w is None:
        if field is None:
            raise ParameterError("a field is needed for the unit weight")
        return PowerWeight(field, 0)
    raise ParameterError(f"cannot interpret {w!r} as a weight")


def parse_weight(spec: str, field: FieldParams) -> Weight:
    """``POWER:alpha`` or ``ONE``."""
    kind, _, arg = spec.partition(":")
    kind = kind.upper()
    if kind == "ONE":
        return PowerWeight(field, 0)
    if kind == "POWER":
        a = Fraction(arg)
        return PowerWeight(field, int(a) if a.denominator == 1 else float(a))
    raise ParameterError(f"unknown weight spec {spec!r}")


# ---------------------------------------------------------------------------
# ball aggregation

def ball_averages(cells: np.ndarray, q: int, level: int, j: int) -> np.ndarray:
    """Averages over the cosets of P^j (index = cell index mod q^j)."""
    blocks = cells.reshape(q ** (level - j), q**j)
    if cells.dtype == object:
        return blocks.sum(axis=0) / blocks.shape[0]
    return blocks.mean(axis=0)


def _ball(q: int, j: int, index: int) -> Ball:
    return Ball(j, tuple(to_base(index, q, j)))


@dataclass(frozen=True)
class ApReport:
    p: float
    value: object
    witness: Ball
    level: int

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "value": self.value,
            "witness": {"level": self.witness.level, "word": list(self.witness.word)},
            "level": self.level,
        }


def ap_characteristic(w, p, k: int, field: FieldParams | None = None) -> ApReport:
    """``sup_B (avg_B w)(avg_B w^(-1/(p-1)))^(p-1)`` over balls B in D of levels 0..k.

    Exact when the cell averages are rational and p = 2.  Ties are resolved in
    favour of the coarsest, then lowest-index ball.
    """
    if p <= 1:
        raise ParameterError("A_p needs p > 1")
    w = as_weight(w, field)
    q = w.field.q
    a = w.cell_averages(k, 1)
    exact = a.dtype == object and p == 2
    b = w.cell_averages(k, -1) if exact else w.cell_averages(k, -1.0 / (p - 1))
    _check_positive(a)
    best, where = None, None
    per_level = []
    for j in range(k + 1):
        A, B = ball_averages(a, q, k, j), ball_averages(b, q, k, j)
        vals = A * B if exact else np.asarray(A, dtype=float) * np.asarray(B, dtype=float) ** (p - 1)
        i = int(np.argmax(vals)) if not exact else max(range(len(vals)), key=lambda t: (vals[t], -t))
        per_level.append((vals[i], j, i))
    top = max(v for v, _, _ in per_level)
    for v, j, i in per_level:
        close = v == top if exact else (v >= top * (1 - 1e-12) or (math.isinf(top) and math.isinf(v)))
        if close:
            best, where = v, (j, i)
            break
    value = best if exact else float(best)
    return ApReport(p, value, _ball(q, *where), k)


def _check_positive(cells: np.ndarray):
    if any(not (v > 0) for v in np.asarray(cells, dtype=float).tolist()):
        raise DomainError("weight must be positive on every cell")


def a2_check(w, k: int, field: FieldParams | None = None) -> ApReport:
    return ap_characteristic(w, 2, k, field)


# ---------------------------------------------------------------------------
# doubling

@dataclass(frozen=True)
class DoublingReport:
    value: object
    ratios: tuple
    level: int


def doubling_ratio(w, k: int, field: FieldParams | None = None) -> DoublingReport:
    """``max w(x + P^(j-1)) / w(x + P^j)`` over cells x and levels 1..k."""
    w = as_weight(w, field)
    q = w.field.q
    a = w.cell_averages(k, 1)
    _check_positive(a)
    ratios = set()
    for j in range(1, k + 1):
        child = ball_averages(a, q, k, j)
        parent = ball_averages(a, q, k, j - 1)
        # masses: avg times measure, the measure ratio is q
        idx = np.arange(q**j)
        r = parent[idx % q ** (j - 1)] * q / child if a.dtype == object else (
            np.asarray(parent, dtype=float)[idx % q ** (j - 1)] * q / np.asarray(child, dtype=float)
        )
        if a.dtype == object:
            ratios.update(r.tolist())
        else:
            ratios.update(float(x) for x in np.unique(np.round(r, 12)))
    ordered = tuple(sorted(ratios, reverse=True))
    return DoublingReport(ordered[0], ordered, k)


# ---------------------------------------------------------------------------
# reverse Hoelder and A_infinity probes

DEFAULT_GRID = tuple(round(0.05 * i, 2) for i in range(1, 21))


@dataclass(frozen=True)
class ProbeReport:
    best: float
    C: float
    level: int
    constant_cap: float
    table: tuple


def reverse_holder_probe(w, k: int, grid=DEFAULT_GRID, cap: float = 4.0, field=None) -> ProbeReport:
    """Largest grid epsilon with ``(avg_B w^(1+e))^(1/(1+e)) <= C avg_B w``, C <= cap,
    over every ball B in D of level <= k."""
    w = as_weight(w, field)
    q = w.field.q
    a = np.asarray(w.cell_averages(k, 1), dtype=float)
    table = []
    for eps in sorted(grid):
        b = np.asarray(w.cell_averages(k, 1 + eps), dtype=float)
        C = 0.0
        for j in range(k + 1):
            A, B = ball_averages(a, q, k, j), ball_averages(b, q, k, j)
            C = max(C, float(np.max(B ** (1 / (1 + eps)) / A)))
        table.append((eps, C))
    ok = [(e, C) for e, C in table if C <= cap]
    best = ok[-1] if ok else (0.0, math.inf)
    return ProbeReport(best[0], best[1], k, cap, tuple(table))


def a_infty_probe(
    w, k: int, samples: int = 16, seed: int = 0, grid=DEFAULT_GRID, cap: float = 4.0, field=None
) -> ProbeReport:
    """Largest grid delta with ``w(E)/w(B) <= C (|E|/|B|)^delta``, C <= cap.

    B runs over every ball in D of level < k; E over every descendant ball of B
    and ``samples`` seeded unions of children of B per ball.
    """
    w = as_weight(w, field)
    q = w.field.q
    a = np.asarray(w.cell_averages(k, 1), dtype=float)
    rng = np.random.default_rng(seed)
    pairs = []  # (w(E)/w(B), |E|/|B|)
    for j in range(k):
        massB = ball_averages(a, q, k, j) * float(q) ** -j
        for i in range(j + 1, k + 1):
            massE = ball_averages(a, q, k, i) * float(q) ** -i
            parent = np.arange(q**i) % q**j
            pairs.append(np.stack([massE / massB[parent], np.full(q**i, float(q) ** (j - i))], axis=1))
        # unions of children of each ball of level j
        child = ball_averages(a, q, k, j + 1) * float(q) ** -(j + 1)
        for _ in range(samples):
            mask = rng.integers(0, 2, size=q)
            if not mask.any():
                continue
            sel = np.flatnonzero(mask)
            # child of ball c with digit d at position j has index c + d q^j
            mE = sum(child[np.arange(q**j) + d * q**j] for d in sel)
            pairs.append(np.stack([mE / massB, np.full(q**j, len(sel) / q)], axis=1))
    P = np.concatenate(pairs)
    table = []
    for delta in sorted(grid):
        table.append((delta, float(np.max(P[:, 0] / P[:, 1] ** delta))))
    ok = [(d, C) for d, C in table if C <= cap]
    best = ok[-1] if ok else (0.0, math.inf)
    return ProbeReport(best[0], best[1], k, cap, tuple(table))
