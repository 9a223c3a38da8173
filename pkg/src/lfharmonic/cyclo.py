"""Exact arrays of elements of the cyclotomic field Q(zeta_N), N = p^e.

An element is stored as integer coefficients ``a_j`` of ``zeta^j`` (j < N)
over a shared positive denominator.  The representation is redundant; two
elements are equal when their difference reduces to zero modulo the
cyclotomic polynomial, which for N = p^e is ``sum_{i<p} x^(i N/p)``.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


class Cyclo:
    __slots__ = ("num", "den", "p")

    def __init__(self, num: np.ndarray, den: int, p: int):
        self.num = np.asarray(num, dtype=object)
        self.den = int(den)
        self.p = p

    @property
    def order(self) -> int:
        return self.num.shape[-1]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.num.shape[:-1]

    @classmethod
    def from_rationals(cls, values, order: int, p: int) -> Cyclo:
        vals = [Fraction(v) for v in np.ravel(np.asarray(values, dtype=object))]
        den = math.lcm(*(v.denominator for v in vals)) if vals else 1
        shape = np.shape(values)
        num = np.zeros(shape + (order,), dtype=object)
        num[..., 0] = np.array([v.numerator * (den // v.denominator) for v in vals], dtype=object).reshape(shape)
        return cls(num, den, p)

    @classmethod
    def from_phases(cls, phases: np.ndarray, order: int, p: int, weights=None) -> Cyclo:
        """Array of ``weights * zeta^phases`` (unit weights by default)."""
        phases = np.asarray(phases, dtype=np.int64) % order
        num = np.zeros(phases.shape + (order,), dtype=object)
        w = np.ones(phases.shape, dtype=object) if weights is None else np.asarray(weights, dtype=object)
        np.put_along_axis(num, phases[..., None], w[..., None], axis=-1)
        return cls(num, 1, p)

    def _like(self, num, den=None):
        return Cyclo(num, self.den if den is None else den, self.p)

    def _align(self, other: Cyclo):
        if other.order != self.order:
            raise ValueError("cyclotomic orders differ")
        den = math.lcm(self.den, other.den)
        return self.num * (den // self.den), other.num * (den // other.den), den

    def __add__(self, other: Cyclo) -> Cyclo:
        a, b, den = self._align(other)
        return self._like(a + b, den)

    def __sub__(self, other: Cyclo) -> Cyclo:
        a, b, den = self._align(other)
        return self._like(a - b, den)

    def __neg__(self) -> Cyclo:
        return self._like(-self.num)

    def __getitem__(self, key) -> Cyclo:
        return self._like(self.num[key])

    def scale(self, factor) -> Cyclo:
        factor = Fraction(factor)
        return self._like(self.num * factor.numerator, self.den * factor.denominator)

    def scale_by(self, ints) -> Cyclo:
        """Multiply elementwise by integers broadcast over the element shape."""
        return self._like(self.num * np.asarray(ints, dtype=object)[..., None])

    def conj(self) -> Cyclo:
        idx = (-np.arange(self.order)) % self.order
        return self._like(self.num[..., idx])

    def mul_root(self, shifts) -> Cyclo:
        """Multiply elementwise by ``zeta^shifts``."""
        shifts = np.asarray(shifts, dtype=np.int64)
        shape = np.broadcast_shapes(self.shape, shifts.shape)
        num = np.broadcast_to(self.num, shape + (self.order,))
        j = np.arange(self.order)
        idx = (j - np.broadcast_to(shifts, shape)[..., None]) % self.order
        return self._like(np.take_along_axis(num, idx, axis=-1))

    def sum(self, axis) -> Cyclo:
        if axis < 0:
            axis -= 1
        return self._like(self.num.sum(axis=axis))

    def __mul__(self, other: Cyclo) -> Cyclo:
        if other.order != self.order:
            raise ValueError("cyclotomic orders differ")
        N = self.order
        a, b = np.broadcast_arrays(self.num, other.num)
        out = np.zeros(a.shape, dtype=object)
        for s in range(N):
            out[..., s] = (a * np.roll(b[..., ::-1], s + 1, axis=-1)).sum(axis=-1)
        return Cyclo(out, self.den * other.den, self.p)

    def abs2(self) -> Cyclo:
        return self * self.conj()

    def canonical(self) -> tuple[np.ndarray, int]:
        """Coordinates in the basis ``zeta^(iN/p + r)``, ``i < p-1``, reduced by gcd."""
        N, p = self.order, self.p
        if N == 1:
            c = self.num[..., 0]
        else:
            M = N // p
            a = self.num.reshape(self.shape + (p, M))
            c = (a[..., : p - 1, :] - a[..., p - 1 : p, :]).reshape(self.shape + ((p - 1) * M,))
        flat = [int(x) for x in np.ravel(c)]
        g = math.gcd(self.den, *flat) if flat else self.den
        g = g or 1
        return np.asarray(c, dtype=object) // g, self.den // g

    def is_zero(self) -> np.ndarray:
        c, _ = self.canonical()
        c = np.asarray(c, dtype=object)
        if self.order == 1:
            return c == 0
        return ~np.any(c != 0, axis=-1)

    def equals(self, other: Cyclo) -> bool:
        return bool(np.all((self - other).is_zero()))

    def is_rational(self) -> np.ndarray:
        if self.order == 1:
            return np.ones(self.shape, dtype=bool)
        c, _ = self.canonical()
        return ~np.any(c[..., 1:] != 0, axis=-1)

    def to_rational(self) -> np.ndarray:
        if not np.all(self.is_rational()):
            raise ValueError("element is not rational")
        c, den = self.canonical()
        lead = c if self.order == 1 else c[..., 0]
        vals = [Fraction(int(v), den) for v in np.ravel(lead)]
        out = np.empty(len(vals), dtype=object)
        out[:] = vals
        return out.reshape(self.shape)

    def to_complex(self) -> np.ndarray:
        N = self.order
        roots = np.exp(2j * np.pi * np.arange(N) / N)
        return (self.num.astype(float) @ roots) / self.den

    def __repr__(self):
        return f"Cyclo(shape={self.shape}, order={self.order}, den={self.den})"
