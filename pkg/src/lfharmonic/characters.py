"""The additive character and the character system chi_n = chi(u(n) x) on D.

Character values are roots of unity.  Everything here works with integer
*phases* ``s`` modulo an order ``N`` (the value is ``exp(2 pi i s / N)``), which
keeps the tables exact; complex tables are derived from a root lookup.

Q_p:       chi(x) = exp(2 pi i frac(x)), N = p^(digits involved).
F_q((X)):  chi(x) = exp(2 pi i tr(d_-1) / p), N = p.
"""

from __future__ import annotations

import functools
from fractions import Fraction

import numpy as np

from .cyclo import Cyclo
from .errors import ParameterError, PrecisionError, ResolutionError
from .field import FieldParams, LocalElement, cell_digits, to_base, u_of


def roots_of_unity(N: int) -> np.ndarray:
    j = np.arange(N)
    out = np.exp(2j * np.pi * j / N)
    # quarter turns are exact so that p=2 tables stay in {1, i, -1, -i}
    quarter = (4 * j) % N == 0
    out[quarter] = np.array([1, 1j, -1, -1j])[(4 * j[quarter]) // N]
    return out


def digit_reversal(n, q: int, k: int):
    """Reverse the ``k`` base-q digits of ``n`` (scalar or integer array)."""
    n = np.asarray(n, dtype=np.int64)
    out = np.zeros_like(n)
    for _ in range(k):
        out = out * q + n % q
        n = n // q
    return out if out.ndim else int(out)


# ---------------------------------------------------------------------------
# scalar evaluation through the field product

def chi_phase(x: LocalElement) -> tuple[int, int]:
    """Phase and order of chi(x)."""
    f = x.field
    if x.absprec is not None and x.absprec < 0:
        raise PrecisionError("digits at negative positions are not all known")
    if x.is_zero or x.valuation >= 0:
        return 0, 1
    v = int(x.valuation)
    if f.is_padic:
        # frac(x) = sum_{i<0} d_i p^i = A / p^(-v)
        A = sum(x.digit(i) * f.p ** (i - v) for i in range(v, 0))
        return A, f.p ** (-v)
    return int(f.fq.trace_table[x.digit(-1)]), f.p


def chi(x: LocalElement) -> complex:
    s, N = chi_phase(x)
    return complex(roots_of_unity(N)[s])


def chi_n(n: int, x: LocalElement) -> complex:
    """chi_n(x) = chi(u(n) x), evaluated through the actual field product."""
    return chi(u_of(x.field, n) * x)


def chi_n_phase(n: int, x: LocalElement) -> tuple[int, int]:
    return chi_phase(u_of(x.field, n) * x)


# ---------------------------------------------------------------------------
# vectorised tables

def character_phases(field: FieldParams, ns, m: int, k: int) -> tuple[np.ndarray, int]:
    """Phases of chi_n on the cells of the window ``P^-m / P^k``.

    Returns ``(phases, N)`` with ``phases[i, j]`` the phase of ``chi_{ns[i]}`` at
    cell ``j``.  Requires ``n < q^k`` for every n (otherwise chi_n is not
    constant on cells of P^k).
    """
    ns = np.atleast_1d(np.asarray(ns, dtype=np.int64))
    q = field.q
    if ns.size and (ns.min() < 0 or ns.max() >= q**k):
        raise ResolutionError(f"chi_n with n >= q^k = {q**k} is not constant on cells of P^{k}")
    L = m + k
    if field.is_padic:
        # u(n) = R_k(n) / p^k, x = X / p^m  ->  phase R_k(n) X mod p^(k+m)
        N = field.p**L
        R = digit_reversal(ns, q, k)
        X = np.arange(q**L, dtype=np.int64)
        return (R[:, None] * X[None, :]) % N, N
    fq = field.fq
    B = cell_digits(q, k)[ns]  # digits b_i of n
    Y = cell_digits(q, L)[:, m : m + k]  # digits of x at positions 0..k-1
    acc = np.zeros((len(ns), q**L), dtype=np.int64)
    for i in range(k):
        acc = fq.add_table[acc, fq.mul_table[B[:, i][:, None], Y[:, i][None, :]]]
    return fq.trace_table[acc], field.p


@functools.lru_cache(maxsize=32)
def _table(field: FieldParams, k: int):
    ph, N = character_phases(field, np.arange(field.q**k), 0, k)
    ph.setflags(write=False)
    return ph, N


def character_table(field: FieldParams, k: int) -> tuple[np.ndarray, int]:
    """Cached ``(q^k x q^k)`` phase table, rows n, columns cells of D / P^k."""
    return _table(field, k)


def pairing_phases(field: FieldParams, m: int, k: int) -> tuple[np.ndarray, int]:
    """Phases of chi(xi x) for xi in the dual window ``P^-k / P^m`` (rows) and
    x in the window ``P^-m / P^k`` (columns)."""
    L = m + k
    q = field.q
    if field.is_padic:
        N = field.p**L
        X = np.arange(q**L, dtype=np.int64)
        return (X[:, None] * X[None, :]) % N, N
    fq = field.fq
    D = cell_digits(q, L)
    acc = np.zeros((q**L, q**L), dtype=np.int64)
    for s in range(L):
        acc = fq.add_table[acc, fq.mul_table[D[:, s][:, None], D[:, L - 1 - s][None, :]]]
    return fq.trace_table[acc], field.p


def dual_index(field: FieldParams, n: int, k: int) -> int:
    """Index of u(n) as a cell of the dual window ``P^-k / P^0``."""
    return digit_reversal(n, field.q, k)


class CharacterSystem:
    """Character tables of ``field`` materialised at resolution ``k``."""

    def __init__(self, field: FieldParams, k: int):
        if k < 0:
            raise ParameterError("resolution must be non-negative")
        self.field, self.k = field, k

    @property
    def size(self) -> int:
        return self.field.q**self.k

    @property
    def phases(self) -> tuple[np.ndarray, int]:
        return character_table(self.field, self.k)

    def table(self) -> np.ndarray:
        ph, N = self.phases
        return roots_of_unity(N)[ph]

    def exact_table(self) -> Cyclo:
        ph, N = self.phases
        return Cyclo.from_phases(ph, N, self.field.p)

    def row(self, n: int) -> np.ndarray:
        ph, N = character_phases(self.field, [n], 0, self.k)
        return roots_of_unity(N)[ph[0]]

    def value(self, n: int, x: LocalElement) -> complex:
        return chi_n(n, x)

    def gram(self) -> np.ndarray:
        """``q^-k T T^*``; the identity when the system is orthonormal."""
        T = self.table()
        return (T @ T.conj().T) / self.size

    def _gram_counts(self) -> np.ndarray:
        """``counts[a, b, t] = #{x : ph[a, x] - ph[b, x] = t mod N}``."""
        ph, N = self.phases
        # float64 matmuls are exact here: every count is at most q^k < 2^53
        E = [(ph == s).astype(np.float64) for s in range(N)]
        return np.stack(
            [np.rint(sum(E[(s + t) % N] @ E[s].T for s in range(N))).astype(np.int64) for t in range(N)], axis=-1
        )

    def is_orthonormal(self) -> bool:
        """Exact test of ``<chi_a, chi_b> = delta_ab`` in integer arithmetic."""
        _, N = self.phases
        n = self.size
        counts = self._gram_counts()
        counts[np.arange(n), np.arange(n), 0] -= n
        if N == self.field.p:
            return bool(np.all(counts == counts[..., :1]))
        return bool(np.all(Cyclo(counts.astype(object), 1, self.field.p).is_zero()))

    def exact_gram(self) -> np.ndarray:
        """Exact Gram matrix as rationals (raises if an entry is irrational)."""
        ph, N = self.phases
        n = self.size
        # <chi_a, chi_b> = q^-k sum_x zeta^(ph[a,x] - ph[b,x]); count each exponent
        counts = self._gram_counts()
        if N == self.field.p:
            # for a prime order the only relation is 1 + zeta + ... + zeta^(p-1) = 0
            if np.any(counts[..., 1:] != counts[..., 1:2]):
                raise ArithmeticError("Gram entry is not rational")
            diff = (counts[..., 0] - counts[..., 1]).ravel()
            out = np.array([Fraction(int(d), n) for d in diff], dtype=object)
            return out.reshape(n, n)
        return Cyclo(counts.astype(object), n, self.field.p).to_rational()


def frac_part(x: LocalElement) -> Fraction:
    """Fractional part of a Q_p element as a rational in [0, 1)."""
    if not x.field.is_padic:
        raise ParameterError("fractional parts are defined for Q_p")
    s, N = chi_phase(x)
    return Fraction(s, N)


def u_table(field: FieldParams, count: int, k: int) -> list[tuple[int, ...]]:
    """Digit words of u(0..count-1) in the dual window ``P^-k / P^0``."""
    return [tuple(to_base(dual_index(field, n, k), field.q, k)) for n in range(count)]
