"""Fourier transform on D / P^k.

``F[n] = q^-k sum_x f[x] conj(chi_n(x))`` and ``f[x] = sum_n F[n] chi_n(x)``.

Two fast factorizations are used:

* F_q((X)): D / P^k is (F_q)^k and chi_n factors over the digits, so the
  transform is k stages of a q-point matrix ``Psi[b, a] = zeta_p^tr(ba)``.
* Q_p: D / P^k = Z / p^k is cyclic and chi_n(X) = zeta^(R(n) X) with R the
  base-p digit reversal, so the transform is a radix-p DFT read out in
  digit-reversed order.

Each has an exact twin over the cyclotomic integers (see ``cyclo``), and both
are checked against the naive double sum ``naive_fourier``.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .characters import character_table, digit_reversal, pairing_phases, roots_of_unity
from .cyclo import Cyclo
from .errors import ParameterError
from .field import FieldParams


def _level(field: FieldParams, size: int) -> int:
    q, k = field.q, 0
    while q**k < size:
        k += 1
    if q**k != size:
        raise ParameterError(f"length {size} is not a power of q={q}")
    return k


def _psi_phases(field: FieldParams) -> np.ndarray:
    fq = field.fq
    return fq.trace_table[fq.mul_table]


# ---------------------------------------------------------------------------
# naive oracle

def naive_fourier(field: FieldParams, values) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    k = _level(field, values.shape[-1])
    ph, N = character_table(field, k)
    T = roots_of_unity(N)[ph]
    return (values @ T.conj().T) / field.q**k


def naive_inverse(field: FieldParams, coeffs) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=complex)
    k = _level(field, coeffs.shape[-1])
    ph, N = character_table(field, k)
    return coeffs @ roots_of_unity(N)[ph]


# ---------------------------------------------------------------------------
# floating point fast transforms

def _digit_stages(values: np.ndarray, mat: np.ndarray, q: int, k: int) -> np.ndarray:
    lead = values.shape[:-1]
    x = values.reshape(lead + (q,) * k)
    for ax in range(len(lead), len(lead) + k):
        x = np.moveaxis(np.tensordot(x, mat, axes=([ax], [1])), -1, ax)
    return x.reshape(lead + (q**k,))


def radix_dft(values: np.ndarray, p: int, sign: int = -1) -> np.ndarray:
    """Unnormalized DFT ``G[j] = sum_X x[X] exp(sign 2 pi i j X / N)`` along the
    last axis, N a power of p, by recursive radix-p decimation in time."""
    N = values.shape[-1]
    if N == 1:
        return values.astype(complex)
    M = N // p
    sub = np.stack([radix_dft(values[..., a::p], p, sign) for a in range(p)])
    j = np.arange(N)
    tw = np.exp(sign * 2j * np.pi * np.outer(np.arange(p), j) / N)
    tw = tw.reshape((p,) + (1,) * (values.ndim - 1) + (N,))
    return (tw * sub[..., j % M]).sum(axis=0)


def fast_fourier(field: FieldParams, values) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    q = field.q
    k = _level(field, values.shape[-1])
    if field.is_padic:
        G = radix_dft(values, field.p, -1)
        return G[..., digit_reversal(np.arange(q**k), q, k)] / q**k
    psi = roots_of_unity(field.p)[_psi_phases(field)]
    return _digit_stages(values, psi.conj(), q, k) / q**k


def fast_inverse(field: FieldParams, coeffs) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=complex)
    q = field.q
    k = _level(field, coeffs.shape[-1])
    if field.is_padic:
        G = coeffs[..., digit_reversal(np.arange(q**k), q, k)]
        return radix_dft(G, field.p, +1)
    psi = roots_of_unity(field.p)[_psi_phases(field)]
    return _digit_stages(coeffs, psi, q, k)


# ---------------------------------------------------------------------------
# exact transforms over Q(zeta_N)

def exact_order(field: FieldParams, k: int) -> int:
    """Order of the roots of unity appearing in the level-k character table."""
    return field.p**k if field.is_padic else field.p


def as_cyclo(field: FieldParams, values, k: int) -> Cyclo:
    if isinstance(values, Cyclo):
        return values
    return Cyclo.from_rationals(values, exact_order(field, k), field.p)


def _radix_exact(x: Cyclo, p: int, sign: int, order: int) -> Cyclo:
    N = x.num.shape[-2]
    if N == 1:
        return x
    M = N // p
    j = np.arange(N)
    out = None
    for a in range(p):
        sub = _radix_exact(x[..., a::p, :], p, sign, order)
        term = sub[..., j % M, :].mul_root(sign * a * j * (order // N))
        out = term if out is None else out + term
    return out


def _stages_exact(x: Cyclo, shifts: np.ndarray, q: int, k: int) -> Cyclo:
    lead = x.shape[:-1]
    num = x.num.reshape(lead + (q,) * k + (x.order,))
    cur = Cyclo(num, x.den, x.p)
    for ax in range(len(lead), len(lead) + k):
        parts = []
        for b in range(q):
            shape = [1] * (len(lead) + k)
            shape[ax] = q
            term = cur.mul_root(shifts[b].reshape(shape))
            parts.append(term.sum(axis=ax).num)
        cur = Cyclo(np.stack(parts, axis=ax), cur.den, cur.p)
    return Cyclo(cur.num.reshape(lead + (q**k, x.order)), cur.den, cur.p)


def exact_fourier(field: FieldParams, values) -> Cyclo:
    """Exact transform of rational (or cyclotomic) cell values."""
    q = field.q
    k = _level(field, np.shape(values)[-1] if not isinstance(values, Cyclo) else values.shape[-1])
    x = as_cyclo(field, values, k)
    if field.is_padic:
        G = _radix_exact(x, field.p, -1, x.order)
        return G[..., digit_reversal(np.arange(q**k), q, k), :].scale(Fraction(1, q**k))
    return _stages_exact(x, -_psi_phases(field), q, k).scale(Fraction(1, q**k))


def exact_inverse(field: FieldParams, coeffs) -> Cyclo:
    q = field.q
    k = _level(field, np.shape(coeffs)[-1] if not isinstance(coeffs, Cyclo) else coeffs.shape[-1])
    x = as_cyclo(field, coeffs, k)
    if field.is_padic:
        G = x[..., digit_reversal(np.arange(q**k), q, k), :]
        return _radix_exact(G, field.p, +1, x.order)
    return _stages_exact(x, _psi_phases(field), q, k)


def exact_naive_fourier(field: FieldParams, values) -> Cyclo:
    q = field.q
    k = _level(field, np.shape(values)[-1] if not isinstance(values, Cyclo) else values.shape[-1])
    x = as_cyclo(field, values, k)
    ph, N = character_table(field, k)
    # F[n] = q^-k sum_x f[x] zeta^(-ph[n, x])
    terms = x[..., None, :, :].mul_root(-ph)
    return terms.sum(axis=-1).scale(Fraction(1, q**k))


# ---------------------------------------------------------------------------
# windowed transform on P^-m / P^k

def window_fourier(field: FieldParams, values, m: int, k: int) -> np.ndarray:
    """Transform of a function supported on P^-m and constant on cells of P^k.

    The result lives on the dual window ``P^-k / P^m``.
    """
    values = np.asarray(values, dtype=complex)
    ph, N = pairing_phases(field, m, k)
    return (values @ roots_of_unity(N)[ph].conj().T) / field.q**k


def window_inverse(field: FieldParams, values, m: int, k: int) -> np.ndarray:
    """Inverse of ``window_fourier``: from the dual window back to ``P^-m / P^k``."""
    values = np.asarray(values, dtype=complex)
    ph, N = pairing_phases(field, m, k)
    return (values @ roots_of_unity(N)[ph]) / field.q**m
