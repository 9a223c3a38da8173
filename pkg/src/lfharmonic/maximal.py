"""Hardy-Littlewood, sharp and M_s maximal functions by tree aggregation, with
a brute-force ball enumeration oracle and the Buckley sharpness experiment.

Functions live on the window ``P^-m / P^k``; the balls are the cosets of P^j
for ``-m <= j <= k``.  A coset of P^j is identified by the cell index modulo
``q^(j+m)``, so the averages of one level come from a single reshape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError, WindowError
from .field import FieldParams
from .functions import SampledFunction
from .weights import PowerWeight, ap_characteristic, power_mass_ideal


def _level_means(values: np.ndarray, q: int, L: int, r: int) -> np.ndarray:
    """Means over the classes of ``index mod q^r`` (r digits kept)."""
    blocks = values.reshape(q ** (L - r), q**r)
    if values.dtype == object:
        return blocks.sum(axis=0) / blocks.shape[0]
    return blocks.mean(axis=0)


def _on_window(f: SampledFunction, window: int | None) -> SampledFunction:
    if window is None or window == f.window:
        return f
    return f.extend(window)


def maximal(f: SampledFunction, window: int | None = None) -> SampledFunction:
    """``Mf(x) = max over balls B containing x of avg_B |f|``.

    f is zero-extended to ``P^-window`` (default: its own window).
    """
    f = _on_window(f, window)
    q, L = f.q, f.window + f.level
    a = np.abs(f.values)
    idx = np.arange(a.size)
    out = a.copy()
    for r in range(L):
        out = np.maximum(out, _level_means(a, q, L, r)[idx % q**r])
    return f.with_values(out)


def sharp_maximal(f: SampledFunction, window: int | None = None) -> SampledFunction:
    """``f#(x) = max over balls B containing x of avg_B |f - f_B|``."""
    f = _on_window(f, window)
    q, L = f.q, f.window + f.level
    v = f.values
    idx = np.arange(v.size)
    out = np.zeros(v.size, dtype=object) if v.dtype == object else np.zeros(v.size)
    if v.dtype == object:
        out[:] = 0
    for r in range(L):
        cls = idx % q**r
        mean = _level_means(v, q, L, r)[cls]
        osc = _level_means(np.abs(v - mean), q, L, r)[cls]
        out = np.maximum(out, osc)
    return f.with_values(out)


def m_s(f: SampledFunction, s: float, window: int | None = None) -> SampledFunction:
    """``M_s f = (M |f|^s)^(1/s)``."""
    if s <= 1:
        raise ParameterError("M_s needs s > 1")
    g = maximal(f.with_values(np.abs(np.asarray(f.values, dtype=complex)) ** s), window)
    return g.with_values(np.asarray(g.values, dtype=float) ** (1.0 / s))


def maximal_bruteforce(f: SampledFunction, window: int | None = None, sharp: bool = False) -> SampledFunction:
    """Oracle: enumerate every ball and every cell it contains."""
    f = _on_window(f, window)
    q, m, k = f.q, f.window, f.level
    L = m + k
    v = f.values
    n = v.size
    best = [0] * n
    for j in range(-m, k + 1):
        r = j + m
        for centre in range(q**r):
            members = [x for x in range(n) if x % q**r == centre]
            vals = [v[x] for x in members]
            if sharp:
                fb = sum(vals) / len(vals)
                mean = sum(abs(t - fb) for t in vals) / len(vals)
            else:
                mean = sum(abs(t) for t in vals) / len(vals)
            for x in members:
                if mean > best[x]:
                    best[x] = mean
    return f.with_values(np.array(best, dtype=v.dtype if v.dtype == object else float))


# ---------------------------------------------------------------------------
# Buckley sharpness construction

@dataclass(frozen=True)
class BuckleyRecord:
    p: float
    theta: float
    q: int
    k: int
    m: int
    ap: float
    ratio: float
    paper_bound: float
    pointwise_violations: int
    min_pointwise_ratio: float

    @property
    def bound_holds(self) -> bool:
        return self.ratio >= self.paper_bound and self.pointwise_violations == 0


def buckley_bound(q: int, theta: float) -> float:
    """Constant c with Mf >= c f for f = |x|^(theta-1) 1_D."""
    return (1 - 1 / q) / (q**theta - 1)


def buckley_experiment(field: FieldParams, p: float, theta: float, k: int, m: int) -> BuckleyRecord:
    """w = |x|^((p-1)(1-theta)), f = |x|^(theta-1) 1_D cell-averaged on P^-m / P^k.

    The central cell P^k is handled in closed form: there Mf = C |x|^(theta-1)
    with C = (1 - 1/q) q^theta / (q^theta - 1), so its cell average is C times
    that of f, and ``int_{P^k} (Mf)^p w = C^p mass(P^k, theta - 1)``.
    """
    if p <= 1 or not 0 < theta < 1:
        raise ParameterError("need p > 1 and 0 < theta < 1")
    q = field.q
    alpha = (p - 1) * (1 - theta)
    beta = theta - 1
    fw = PowerWeight(field, beta)
    w = PowerWeight(field, alpha)
    L = m + k
    f_cells = np.zeros(q**L)
    f_cells[:: q**m] = fw.cell_averages(k)
    captured = f_cells.sum() / q**k
    total = power_mass_ideal(q, beta, 0)
    if abs(captured - total) > 1e-3 * total:
        raise WindowError(f"window keeps {captured:.6g} of the mass {total:.6g}; try m >= {m + 1}")
    f = SampledFunction(field, k, f_cells, m)
    Mf = maximal(f).values.astype(float)
    C = (1 - 1 / q) * q**theta / (q**theta - 1)
    Mf[0] = C * f_cells[0]

    bound = buckley_bound(q, theta)
    inD = np.arange(q**L) % q**m == 0
    rat = Mf[inD] / f_cells[inD]
    violations = int(np.sum(Mf[inD] < bound * f_cells[inD]))

    w_mass = w.cell_averages(k, window=m) / q**k
    num = float(np.sum(Mf[1:] ** p * w_mass[1:])) + C**p * power_mass_ideal(q, beta, k)
    den = power_mass_ideal(q, beta, 0)  # int_D f^p w = mass(D, theta - 1)
    ratio = (num / den) ** (1 / p)
    ap = ap_characteristic(w, p, k).value
    return BuckleyRecord(p, theta, q, k, m, float(ap), ratio, bound, violations, float(rat.min()))


def buckley_slope(records) -> float:
    """Least-squares slope of log(ratio) against log([w]_Ap) across a sweep."""
    x = np.log([r.ap for r in records])
    y = np.log([r.ratio for r in records])
    return float(np.polyfit(x, y, 1)[0])


# ---------------------------------------------------------------------------
# M to sharp comparison

@dataclass(frozen=True)
class SharpProbe:
    p: float
    level: int
    ratios: tuple
    skipped: tuple

    @property
    def value(self) -> float:
        return max(self.ratios) if self.ratios else math.nan


def m_to_sharp_probe(p: float, w, bank, k: int) -> SharpProbe:
    """``max_f ||Mf||_{L^p(w)} / ||f#||_{L^p(w)}`` over a bank of functions on D.

    Each f is first refined to level k and mean-adjusted; constant members are
    skipped and reported.
    """
    from .weights import as_weight

    w = as_weight(w, bank[0].field if bank else None)
    wc = np.asarray(w.cell_averages(k), dtype=float)
    if np.any(~(wc > 0)):
        raise DomainError("weight must be positive on every cell")
    ratios, skipped = [], []
    for i, f in enumerate(bank):
        g = f.refine(k) if f.level < k else f
        g = g.with_values(np.asarray(g.values, dtype=complex))
        g = g - g.values.mean()
        sh = np.asarray(sharp_maximal(g).values, dtype=float)
        if np.max(sh) <= 1e-14:
            skipped.append(i)
            continue
        M = np.asarray(maximal(g).values, dtype=float)
        ratios.append(float((np.sum(M**p * wc) / np.sum(sh**p * wc)) ** (1 / p)))
    return SharpProbe(p, k, tuple(ratios), tuple(skipped))


# ---------------------------------------------------------------------------
# T_n against M_s

@dataclass(frozen=True)
class TnSharpProbe:
    s: float
    level: int
    ns: tuple
    values: tuple  # max over bank and cells of (T_n f)# / M_s f, one per n

    @property
    def value(self) -> float:
        return max(self.values)

    @property
    def spread(self) -> float:
        """Largest value over the value at the smallest n."""
        return self.values[-1] / self.values[0] if self.values[0] > 0 else math.inf


def tn_sharp_probe(s: float, bank, ns) -> TnSharpProbe:
    """Cellwise ``(T_n f)# / M_s f`` maximized over a bank of functions on D."""
    from .kernels import apply_Tn

    if not bank:
        raise ParameterError("empty bank")
    k = bank[0].level
    values = []
    for n in ns:
        best = 0.0
        for f in bank:
            Ms = np.asarray(m_s(f, s).values, dtype=float)
            if not np.any(Ms > 0):
                continue
            sh = np.asarray(sharp_maximal(apply_Tn(n, f)).values, dtype=float)
            pos = Ms > 1e-14 * Ms.max()
            best = max(best, float(np.max(sh[pos] / Ms[pos])))
        values.append(best)
    return TnSharpProbe(s, k, tuple(ns), tuple(values))
