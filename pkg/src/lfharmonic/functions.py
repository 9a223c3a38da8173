"""Step functions on D (and on bounded windows P^-m) and their transforms.

A ``SampledFunction`` at level k on the window ``P^-m`` stores one value per
cell of ``P^-m / P^k``; cell ``i`` has base-q digits ``d_-m .. d_(k-1)`` with
the lowest position varying fastest.  With ``m = 0`` the cells are the cosets
of P^k in D.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field, replace
from fractions import Fraction

import numpy as np

from . import transform as tr
from .characters import character_phases, roots_of_unity
from .cyclo import Cyclo
from .errors import DomainError, ParameterError, ResolutionError
from .field import (
    CosetIndex,
    FieldParams,
    LocalElement,
    cell_add,
    cell_neg,
    cell_valuation,
    from_base,
)


def _is_exact(values: np.ndarray) -> bool:
    return values.dtype == object


@dataclass(frozen=True, eq=False)
class SampledFunction:
    field: FieldParams
    level: int
    values: np.ndarray = dc_field(repr=False)
    window: int = 0
    periodic: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.dtype != object and not np.iscomplexobj(vals):
            vals = vals.astype(float)
        if vals.shape != (self.field.q ** (self.window + self.level),):
            raise ParameterError(
                f"expected {self.field.q ** (self.window + self.level)} cell values, got {vals.shape}"
            )
        if self.periodic and self.window:
            raise ParameterError("periodic functions are stored by their restriction to D")
        object.__setattr__(self, "values", vals)

    # -- basic data ---------------------------------------------------------
    @property
    def q(self) -> int:
        return self.field.q

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def exact(self) -> bool:
        return _is_exact(self.values)

    def cell_measure(self) -> Fraction:
        return Fraction(1, self.q**self.level) if self.level >= 0 else Fraction(self.q ** (-self.level))

    def integral(self):
        if self.exact:
            return sum(self.values, Fraction(0)) * self.cell_measure()
        return self.values.sum() / self.q**self.level

    def with_values(self, values) -> SampledFunction:
        return replace(self, values=np.asarray(values))

    def as_float(self) -> SampledFunction:
        if not self.exact:
            return self
        vals = np.array([complex(v) for v in self.values])
        if not np.any(vals.imag):
            vals = vals.real
        return self.with_values(vals)

    # -- resolution changes -------------------------------------------------
    def refine(self, level: int) -> SampledFunction:
        if level < self.level:
            raise ParameterError("refine needs a finer level")
        reps = self.q ** (level - self.level)
        return replace(self, level=level, values=np.tile(self.values, reps))

    def coarsen(self, level: int) -> SampledFunction:
        """Cell averages at a coarser level."""
        if level > self.level:
            raise ParameterError("coarsen needs a coarser level")
        blocks = self.values.reshape(self.q ** (self.level - level), -1)
        if self.exact:
            vals = np.array([sum(col, Fraction(0)) / blocks.shape[0] for col in blocks.T], dtype=object)
        else:
            vals = blocks.mean(axis=0)
        return replace(self, level=level, values=vals)

    def is_constant_on(self, level: int, tol: float = 0.0) -> bool:
        blocks = self.values.reshape(self.q ** (self.level - level), -1)
        if self.exact:
            return bool(np.all(blocks == blocks[0]))
        return bool(np.all(np.abs(blocks - blocks[0]) <= tol))

    def extend(self, window: int) -> SampledFunction:
        """Zero extension to the larger window ``P^-window``."""
        if window < self.window:
            raise ParameterError("extend needs a larger window")
        if self.periodic:
            raise ParameterError("periodic functions are not window-extended")
        step = self.q ** (window - self.window)
        out = np.zeros(self.q ** (window + self.level), dtype=self.values.dtype)
        if self.exact:
            out[:] = Fraction(0)
        out[::step] = self.values
        return replace(self, window=window, values=out)

    def restrict_to_D(self) -> SampledFunction:
        return replace(self, window=0, values=self.values[:: self.q**self.window])

    # -- pointwise algebra --------------------------------------------------
    def _other(self, other):
        if isinstance(other, SampledFunction):
            if (other.field, other.level, other.window) != (self.field, self.level, self.window):
                raise ParameterError("functions live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return self.with_values(self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self.with_values(self.values - self._other(other))

    def __mul__(self, other):
        return self.with_values(self.values * self._other(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    def conj(self) -> SampledFunction:
        return self if self.exact else self.with_values(np.conj(self.values))

    def abs(self) -> SampledFunction:
        return self.with_values(np.abs(self.values))

    def power(self, s) -> SampledFunction:
        return self.with_values(np.abs(self.values) ** s)

    # -- group action -------------------------------------------------------
    def translate(self, h) -> SampledFunction:
        """``(tau_h f)(x) = f(x - h)``; h is a cell index of the same window or
        an element resolved by it.  The window is treated as the group P^-m / P^k."""
        L = self.window + self.level
        if isinstance(h, LocalElement):
            h = h.coset_index(self.window, self.level)
        idx = cell_add(self.field, np.arange(self.size), cell_neg(self.field, h, L), L)
        return self.with_values(self.values[idx])

    def evaluate(self, x: LocalElement):
        """Value at ``x``; periodic functions reduce x modulo the translation set."""
        m, k = self.window, self.level
        if self.periodic:
            # removing the digits at negative positions is reduction modulo Lambda
            # in both backends (for Q_p it subtracts the fractional part)
            return self.values[from_base([x.digit(i) for i in range(k)], self.q)]
        if not x.is_zero and x.valuation < -m:
            return 0
        return self.values[x.coset_index(m, k)]

    # -- serialization ------------------------------------------------------
    def to_json(self) -> str:
        vals = self.values if not self.exact else np.array([complex(v) for v in self.values])
        vals = np.asarray(vals, dtype=complex)
        doc = {
            "q": self.q,
            "p": self.field.p,
            "c": self.field.c,
            "char": 0 if self.field.is_padic else self.field.p,
            "level": self.level,
            "values": [[float(v.real), float(v.imag)] for v in vals],
        }
        if self.window:
            doc["window"] = self.window
        if self.periodic:
            doc["periodic"] = True
        if self.field.c > 1:
            doc["modulus"] = list(self.field.modulus)
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> SampledFunction:
        doc = json.loads(text)
        if doc["char"] == 0:
            fp = FieldParams.qp(doc["p"])
        else:
            fp = FieldParams.laurent(doc["p"], doc.get("c", 1), doc.get("modulus"))
        if fp.q != doc["q"]:
            raise ParameterError("q does not match p and c")
        vals = np.array([complex(re, im) for re, im in doc["values"]])
        if not np.any(vals.imag):
            vals = vals.real
        return cls(fp, doc["level"], vals, doc.get("window", 0), doc.get("periodic", False))


@dataclass(frozen=True, eq=False)
class FourierCoeffs:
    """Coefficients at chi_0 .. chi_(q^k - 1); ``exact`` holds the cyclotomic values."""

    field: FieldParams
    level: int
    coeffs: np.ndarray = dc_field(repr=False)
    exact: Cyclo | None = dc_field(default=None, repr=False)

    def coefficient(self, n: int):
        # chi_n with n >= q^k is orthogonal to every level-k function
        if n >= self.coeffs.size:
            return 0.0
        return self.coeffs[n]

    def rational(self) -> np.ndarray:
        if self.exact is None:
            raise ParameterError("no exact coefficients available")
        return self.exact.to_rational()


# ---------------------------------------------------------------------------
# constructors

def zeros(field: FieldParams, k: int, window: int = 0) -> SampledFunction:
    return SampledFunction(field, k, np.zeros(field.q ** (window + k)), window)


def constant(field: FieldParams, k: int, c=1, window: int = 0) -> SampledFunction:
    vals = np.full(field.q ** (window + k), c, dtype=object if isinstance(c, (int, Fraction)) else None)
    if vals.dtype == object:
        vals = np.array([Fraction(c)] * vals.size, dtype=object)
    return SampledFunction(field, k, vals, window)


def indicator(field: FieldParams, j: int, h=None, k: int | None = None, window: int = 0) -> SampledFunction:
    """Exact indicator of the coset ``h + P^j`` at resolution ``k`` (default j).

    ``h`` is a CosetIndex, a window cell index at level j, or None for P^j itself.
    """
    k = j if k is None else k
    if j > k:
        raise ResolutionError(f"P^{j} is not resolved at level {k}")
    if j < -window:
        raise ParameterError(f"P^{j} does not fit in the window P^-{window}")
    q = field.q
    if h is None:
        h = 0
    elif isinstance(h, CosetIndex):
        if h.level != j:
            raise ParameterError("coset level must equal j")
        h = h.index(q) * q**window
    idx = np.arange(q ** (window + k))
    inside = (idx % q ** (window + j)) == h % q ** (window + j)
    vals = np.where(inside, Fraction(1), Fraction(0)).astype(object)
    return SampledFunction(field, k, vals, window)


def character(field: FieldParams, n: int, k: int, window: int = 0) -> SampledFunction:
    ph, N = character_phases(field, [n], window, k)
    return SampledFunction(field, k, roots_of_unity(N)[ph[0]], window)


def from_cells(field: FieldParams, k: int, fn, window: int = 0) -> SampledFunction:
    """Sample ``fn(cell_index)`` on every cell."""
    return SampledFunction(field, k, np.array([fn(i) for i in range(field.q ** (window + k))]), window)


def random_function(field: FieldParams, k: int, rng: np.random.Generator, complex_values=True) -> SampledFunction:
    n = field.q**k
    v = rng.standard_normal(n)
    if complex_values:
        v = v + 1j * rng.standard_normal(n)
    return SampledFunction(field, k, v)


# ---------------------------------------------------------------------------
# transforms and norms

def _check_D(f: SampledFunction):
    if f.window:
        raise ParameterError("use window_transform for functions on a window")


def fourier(f: SampledFunction, method: str = "fast", exact: bool | None = None) -> FourierCoeffs:
    """Fourier coefficients ``f^(u(n)) = int_D f conj(chi_n)`` for n < q^k.

    Rational input is transformed exactly by default.
    """
    _check_D(f)
    exact = f.exact if exact is None else exact
    if exact:
        vals = f.values if f.exact else np.array([Fraction(v) for v in f.values], dtype=object)
        cyc = tr.exact_naive_fourier(f.field, vals) if method == "naive" else tr.exact_fourier(f.field, vals)
        return FourierCoeffs(f.field, f.level, cyc.to_complex(), cyc)
    if method == "naive":
        return FourierCoeffs(f.field, f.level, tr.naive_fourier(f.field, f.values))
    if method != "fast":
        raise ParameterError(f"unknown method {method!r}")
    return FourierCoeffs(f.field, f.level, tr.fast_fourier(f.field, f.values))


def inverse_fourier(F: FourierCoeffs, method: str = "fast") -> SampledFunction:
    if F.exact is not None:
        cyc = tr.exact_inverse(F.field, F.exact)
        if np.all(cyc.is_rational()):
            return SampledFunction(F.field, F.level, cyc.to_rational())
        return SampledFunction(F.field, F.level, cyc.to_complex())
    if method == "naive":
        return SampledFunction(F.field, F.level, tr.naive_inverse(F.field, F.coeffs))
    return SampledFunction(F.field, F.level, tr.fast_inverse(F.field, F.coeffs))


def _weights(f: SampledFunction, w) -> np.ndarray | None:
    if w is None:
        return None
    wv = w.values if isinstance(w, SampledFunction) else np.asarray(w)
    if wv.shape != f.values.shape:
        raise ParameterError("weight and function live on different grids")
    if np.any(np.asarray([x <= 0 for x in wv.tolist()])):
        raise DomainError("weight must be positive on every cell")
    return wv


def lp_integral(f: SampledFunction, p, w=None):
    """``int |f|^p w``; an exact rational when f, w are rational and p is a
    positive integer."""
    wv = _weights(f, w)
    if f.exact and isinstance(p, int) and (wv is None or wv.dtype == object):
        total = Fraction(0)
        for i, v in enumerate(f.values):
            term = abs(Fraction(v)) ** p
            total += term if wv is None else term * wv[i]
        return total * f.cell_measure()
    a = np.abs(np.asarray(f.values, dtype=complex)) ** p
    if wv is not None:
        a = a * np.asarray(wv, dtype=float)
    return float(a.sum() / f.q**f.level)


def lp_norm(f: SampledFunction, p=2, w=None) -> float:
    if p < 1:
        raise ParameterError("L^p norms need p >= 1")
    return float(lp_integral(f, p, w)) ** (1.0 / p)


def inner(f: SampledFunction, g: SampledFunction, w=None):
    """``int f conj(g) w``."""
    wv = _weights(f, w)
    prod = f.values * np.conj(g.values) if not (f.exact and g.exact) else f.values * g.values
    if wv is not None:
        prod = prod * wv
    if prod.dtype == object:
        return sum(prod, Fraction(0)) * f.cell_measure()
    return prod.sum() / f.q**f.level


# ---------------------------------------------------------------------------
# windowed transform and sphere-wise constancy

def window_transform(f: SampledFunction) -> SampledFunction:
    """Transform on the dual window: input on ``P^-m / P^k``, output on ``P^-k / P^m``."""
    vals = tr.window_fourier(f.field, np.asarray(f.values, dtype=complex), f.window, f.level)
    return SampledFunction(f.field, f.window, vals, f.level)


def window_inverse_transform(g: SampledFunction) -> SampledFunction:
    vals = tr.window_inverse(g.field, np.asarray(g.values, dtype=complex), g.level, g.window)
    return SampledFunction(g.field, g.window, vals, g.level)


def sphere_constant(f: SampledFunction, tol: float = 1e-10) -> bool:
    """Whether f is constant on cosets of P^(j+1) inside each sphere |x| = q^-j."""
    q, m, k = f.q, f.window, f.level
    val = cell_valuation(q, m, k)
    idx = np.arange(f.size)
    # representative of the P^(j+1) coset: keep digits at positions < j+1
    rep = idx % q ** np.minimum(val + 1 + m, m + k)
    a = np.asarray(f.values, dtype=complex)
    return bool(np.all(np.abs(a - a[rep]) <= tol))


def constancy_dual_check(f: SampledFunction, tol: float = 1e-10) -> bool:
    """Sphere-wise constancy passes from f to its windowed transform."""
    if not sphere_constant(f, tol):
        return True
    return sphere_constant(window_transform(f), tol)
