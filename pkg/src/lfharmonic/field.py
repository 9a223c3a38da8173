"""Finite-precision arithmetic in Q_p and F_q((X)).

Elements are digit expansions in powers of the prime element: ``x = sum d_i p^i``
in Q_p (digits in ``[0, p)``, carries on addition) and ``x = sum d_i X^i`` in
F_q((X)) (digits are elements of F_q, no carries).

F_q is realised as F_p[t]/(m(t)) for an irreducible ``m``; an element is stored
as the integer ``a_0 + a_1 p + ... + a_{c-1} p^{c-1}`` of its coordinates in the
basis ``1, t, ..., t^{c-1}``.

Cells of a window ``P^{-m}/P^k`` are indexed by ``sum_{i=-m}^{k-1} d_i q^(i+m)``,
lowest position fastest.  For ``m = 0`` this is the ordering of ``D/P^k``; in
Q_p the index is the integer ``p^m x mod p^(m+k)``.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field as dc_field
from enum import Enum
from fractions import Fraction

import numpy as np

from .errors import ParameterError, PrecisionError

INF = math.inf

# Conway polynomials, coefficients low degree first.
DEFAULT_MODULI = {
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (3, 2): (2, 2, 1),
    (3, 3): (1, 2, 0, 1),
    (5, 2): (2, 4, 1),
    (7, 2): (3, 6, 1),
}


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


def prime_power(q: int) -> tuple[int, int]:
    """Return ``(p, c)`` with ``q = p**c``; raise if ``q`` is not a prime power."""
    for p in range(2, q + 1):
        if q % p == 0:
            c, r = 0, q
            while r % p == 0:
                r //= p
                c += 1
            if r != 1 or not is_prime(p):
                break
            return p, c
    raise ParameterError(f"{q} is not a prime power")


def to_base(n: int, b: int, width: int | None = None) -> list[int]:
    out = []
    while n:
        n, r = divmod(n, b)
        out.append(r)
    if width is not None:
        if len(out) > width:
            raise ParameterError(f"{n} does not fit in {width} base-{b} digits")
        out += [0] * (width - len(out))
    return out


def from_base(digits, b: int) -> int:
    n = 0
    for d in reversed(list(digits)):
        n = n * b + int(d)
    return n


# ---------------------------------------------------------------------------
# polynomials over F_p (coefficient lists, low degree first)

def _poly_trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a, b, p):
    a = _poly_trim(a)
    b = _poly_trim(b)
    inv = pow(b[-1], -1, p)
    while len(a) >= len(b):
        coef = a[-1] * inv % p
        shift = len(a) - len(b)
        for i, bi in enumerate(b):
            a[shift + i] = (a[shift + i] - coef * bi) % p
        a = _poly_trim(a)
    return a


def is_irreducible(modulus, p: int) -> bool:
    """Exhaustive irreducibility test: no monic factor of degree <= deg/2."""
    m = _poly_trim([c % p for c in modulus])
    deg = len(m) - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for low in itertools.product(range(p), repeat=d):
            if not _poly_mod(m, list(low) + [1], p):
                return False
    return True


def find_irreducible(p: int, c: int) -> tuple[int, ...]:
    """Lexicographically first monic irreducible polynomial of degree ``c``."""
    for low in itertools.product(range(p), repeat=c):
        cand = tuple(reversed(low)) + (1,)
        if is_irreducible(cand, p):
            return cand
    raise ParameterError(f"no irreducible polynomial of degree {c} over F_{p}")


class FiniteField:
    """F_q = F_p[t]/(modulus) with full add/mul/trace lookup tables."""

    def __init__(self, p: int, c: int = 1, modulus=None):
        if not is_prime(p):
            raise ParameterError(f"p={p} is not prime")
        if c < 1:
            raise ParameterError("c must be positive")
        self.p, self.c, self.q = p, c, p**c
        if c == 1:
            modulus = (0, 1)
        elif modulus is None:
            modulus = DEFAULT_MODULI.get((p, c)) or find_irreducible(p, c)
        modulus = tuple(int(a) % p for a in modulus)
        if len(modulus) != c + 1 or modulus[-1] == 0:
            raise ParameterError(f"modulus must have exactly {c + 1} coefficients with nonzero top")
        if modulus[-1] != 1:
            inv = pow(modulus[-1], -1, p)
            modulus = tuple(a * inv % p for a in modulus)
        if c > 1 and not is_irreducible(modulus, p):
            raise ParameterError(f"modulus {modulus} is reducible over F_{p}")
        self.modulus = modulus
        self._build_tables()

    def vec(self, a: int) -> list[int]:
        return to_base(a, self.p, self.c)

    def _mul_slow(self, a: int, b: int) -> int:
        x, y = self.vec(a), self.vec(b)
        prod = [0] * (2 * self.c - 1)
        for i, xi in enumerate(x):
            for j, yj in enumerate(y):
                prod[i + j] = (prod[i + j] + xi * yj) % self.p
        if self.c > 1:
            prod = _poly_mod(prod, self.modulus, self.p)
        return from_base(prod, self.p)

    def _build_tables(self):
        p, q = self.p, self.q
        vecs = np.array([self.vec(a) for a in range(q)], dtype=np.int64)
        weights = p ** np.arange(self.c, dtype=np.int64)
        self.add_table = (((vecs[:, None, :] + vecs[None, :, :]) % p) @ weights).astype(np.int64)
        self.neg_table = ((-vecs % p) @ weights).astype(np.int64)
        self.mul_table = np.array(
            [[self._mul_slow(a, b) for b in range(q)] for a in range(q)], dtype=np.int64
        )
        trace = []
        for a in range(q):
            acc, power = 0, a
            for _ in range(self.c):
                acc = int(self.add_table[acc, power])
                power = self._pow(power, p)
            trace.append(acc)
        self.trace_table = np.array(trace, dtype=np.int64)

    def _pow(self, a: int, e: int) -> int:
        r = 1
        for _ in range(e):
            r = int(self.mul_table[r, a])
        return r

    def add(self, a, b):
        return self.add_table[a, b]

    def mul(self, a, b):
        return self.mul_table[a, b]

    def neg(self, a):
        return self.neg_table[a]

    def trace(self, a):
        return self.trace_table[a]

    def inverse(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse in F_q")
        return int(np.nonzero(self.mul_table[a] == 1)[0][0])


@functools.lru_cache(maxsize=None)
def finite_field(p: int, c: int = 1, modulus=None) -> FiniteField:
    return FiniteField(p, c, modulus)


class Characteristic(str, Enum):
    ZERO = "zero"
    POSITIVE = "positive"


@dataclass(frozen=True)
class FieldParams:
    """Parameters of the local field: Q_p (``characteristic='zero'``) or F_q((X))."""

    p: int
    c: int = 1
    characteristic: Characteristic = Characteristic.POSITIVE
    modulus: tuple[int, ...] | None = None
    precision: int = 24

    def __post_init__(self):
        char = Characteristic(self.characteristic)
        object.__setattr__(self, "characteristic", char)
        if not is_prime(self.p):
            raise ParameterError(f"p={self.p} is not prime")
        if self.c < 1:
            raise ParameterError("c must be a positive integer")
        if char is Characteristic.ZERO and self.c != 1:
            raise ParameterError("the characteristic-zero backend covers Q_p only (c=1)")
        if self.precision < 1:
            raise ParameterError("precision must be positive")
        ff = finite_field(self.p, self.c, None if self.modulus is None else tuple(self.modulus))
        object.__setattr__(self, "modulus", ff.modulus)

    @classmethod
    def qp(cls, p: int, precision: int = 24) -> FieldParams:
        return cls(p, 1, Characteristic.ZERO, precision=precision)

    @classmethod
    def laurent(cls, p: int, c: int = 1, modulus=None, precision: int = 24) -> FieldParams:
        return cls(p, c, Characteristic.POSITIVE, None if modulus is None else tuple(modulus), precision)

    @classmethod
    def from_q(cls, q: int, characteristic="positive", modulus=None) -> FieldParams:
        p, c = prime_power(q)
        return cls(p, c, Characteristic(characteristic), None if modulus is None else tuple(modulus))

    @property
    def q(self) -> int:
        return self.p**self.c

    @property
    def fq(self) -> FiniteField:
        return finite_field(self.p, self.c, self.modulus)

    @property
    def is_padic(self) -> bool:
        return self.characteristic is Characteristic.ZERO

    def __str__(self):
        if self.is_padic:
            return f"Q_{self.p}"
        return f"F_{self.q}((X))"


# ---------------------------------------------------------------------------
# residue field elements

@dataclass(frozen=True)
class FqElem:
    field: FiniteField = dc_field(repr=False)
    value: int

    def __post_init__(self):
        if not 0 <= self.value < self.field.q:
            raise ParameterError(f"{self.value} is not an element of F_{self.field.q}")

    @property
    def digits(self) -> list[int]:
        return self.field.vec(self.value)

    def _check(self, other):
        if not isinstance(other, FqElem):
            return NotImplemented
        if other.field is not self.field:
            raise ParameterError("F_q elements from different fields")
        return other

    def __add__(self, other):
        other = self._check(other)
        return FqElem(self.field, int(self.field.add_table[self.value, other.value]))

    def __mul__(self, other):
        other = self._check(other)
        return FqElem(self.field, int(self.field.mul_table[self.value, other.value]))

    def __neg__(self):
        return FqElem(self.field, int(self.field.neg_table[self.value]))

    def __sub__(self, other):
        return self + (-other)


def fq_add(a: FqElem, b: FqElem) -> FqElem:
    return a + b


def fq_mul(a: FqElem, b: FqElem) -> FqElem:
    return a * b


def trace(a: FqElem) -> int:
    """Field trace F_q -> F_p, as an integer in [0, p)."""
    return int(a.field.trace_table[a.value])


# ---------------------------------------------------------------------------
# field elements

@dataclass(frozen=True)
class LocalElement:
    """``sum_i digits[i] * prime**(valuation + i)``, known modulo ``P^absprec``.

    ``absprec=None`` marks an exact element (finite expansion, all further digits
    zero).  The zero element has ``valuation=INF``.
    """

    field: FieldParams
    valuation: float
    digits: tuple[int, ...]
    absprec: int | None = None

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, field: FieldParams) -> LocalElement:
        return cls(field, INF, ())

    @classmethod
    def from_digits(cls, field: FieldParams, digits, start: int = 0, absprec: int | None = None):
        q = field.q
        digits = [int(d) for d in digits]
        if any(not 0 <= d < q for d in digits):
            raise ParameterError(f"digits must lie in [0, {q})")
        if absprec is not None:
            digits = digits[: max(0, absprec - start)]
        while digits and digits[0] == 0:
            digits.pop(0)
            start += 1
        if not digits:
            return cls(field, INF, (), absprec)
        if absprec is None:
            while digits[-1] == 0:
                digits.pop()
        else:
            digits += [0] * (absprec - start - len(digits))
        return cls(field, start, tuple(digits), absprec)

    @classmethod
    def from_int(cls, field: FieldParams, n: int) -> LocalElement:
        if field.is_padic:
            return cls._from_scaled(field, n, 0, None if n >= 0 else field.precision)
        # the prime subfield F_p sits inside F_q as the constant digits
        d = n % field.p
        return cls.from_digits(field, [d])

    @classmethod
    def from_fraction(cls, field: FieldParams, x) -> LocalElement:
        """Q_p element from a rational; exact when ``x >= 0`` has a p-power denominator."""
        if not field.is_padic:
            raise ParameterError("rationals embed only in Q_p")
        x = Fraction(x)
        if x == 0:
            return cls.zero(field)
        p = field.p
        num, den = x.numerator, x.denominator
        v = 0
        while num % p == 0:
            num //= p
            v += 1
        while den % p == 0:
            den //= p
            v -= 1
        if den == 1 and num > 0:
            return cls._from_scaled(field, num, v, None)
        absprec = v + field.precision
        m = num * pow(den, -1, p**field.precision) % p**field.precision
        return cls._from_scaled(field, m, v, absprec)

    @classmethod
    def _from_scaled(cls, field: FieldParams, m: int, v: int, absprec: int | None):
        p = field.p
        if absprec is not None:
            m %= p ** max(0, absprec - v)
        return cls.from_digits(field, to_base(m, p) if m else [], v, absprec)

    @classmethod
    def prime(cls, field: FieldParams, k: int = 1) -> LocalElement:
        """The prime element raised to ``k`` (p in Q_p, X in F_q((X)))."""
        return cls(field, k, (1,))

    @classmethod
    def from_cell(cls, field: FieldParams, index: int, m: int, k: int) -> LocalElement:
        """Canonical representative of cell ``index`` of the window ``P^-m / P^k``."""
        return cls.from_digits(field, to_base(index, field.q, m + k), -m)

    # -- accessors ----------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return self.valuation == INF

    @property
    def exact(self) -> bool:
        return self.absprec is None

    @property
    def precision(self) -> float:
        """Relative precision (number of known digits from the leading one)."""
        if self.absprec is None:
            return INF
        return self.absprec - self.valuation

    def digit(self, i: int) -> int:
        if self.absprec is not None and i >= self.absprec:
            raise PrecisionError(f"digit at position {i} is beyond precision {self.absprec}")
        if self.is_zero or i < self.valuation:
            return 0
        j = i - int(self.valuation)
        return self.digits[j] if j < len(self.digits) else 0

    def abs(self) -> Fraction:
        if self.is_zero:
            if self.absprec is not None:
                raise PrecisionError("leading digit of an inexact zero is indeterminate")
            return Fraction(0)
        return Fraction(self.field.q) ** (-int(self.valuation))

    def coset_index(self, m: int, k: int) -> int:
        """Index of the cell of ``P^-m / P^k`` containing this element."""
        if not self.is_zero and self.valuation < -m:
            raise ParameterError(f"|x| = {self.abs()} exceeds the window P^-{m}")
        return from_base([self.digit(i) for i in range(-m, k)], self.field.q)

    def _scaled(self) -> tuple[int, int]:
        return from_base(self.digits, self.field.p), int(self.valuation)

    def _check(self, other) -> LocalElement:
        if not isinstance(other, LocalElement):
            return NotImplemented
        if other.field != self.field:
            raise ParameterError("elements of different fields")
        return other

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        N = _min_prec(self.absprec, other.absprec)
        if self.is_zero and other.is_zero:
            return LocalElement(self.field, INF, (), N)
        terms = [t for t in (self, other) if not t.is_zero]
        vmin = min(int(t.valuation) for t in terms)
        if self.field.is_padic:
            total = 0
            for t in terms:
                m, v = t._scaled()
                total += m * self.field.p ** (v - vmin)
            res = LocalElement._from_scaled(self.field, total, vmin, N)
        else:
            top = N if N is not None else max(int(t.valuation) + len(t.digits) for t in terms)
            fq = self.field.fq
            acc = np.zeros(max(0, top - vmin), dtype=np.int64)
            for t in terms:
                v = int(t.valuation)
                seg = np.array(t.digits[: max(0, top - v)], dtype=np.int64)
                acc[v - vmin : v - vmin + len(seg)] = fq.add_table[acc[v - vmin : v - vmin + len(seg)], seg]
            res = LocalElement.from_digits(self.field, acc.tolist(), vmin, N)
        if res.is_zero and N is not None:
            raise PrecisionError("sum cancels within the precision window; leading digit indeterminate")
        return res

    def __neg__(self):
        if self.is_zero:
            return self
        if self.field.is_padic:
            m, v = self._scaled()
            N = self.absprec if self.absprec is not None else v + self.field.precision
            return LocalElement._from_scaled(self.field, -m, v, N)
        neg = self.field.fq.neg_table[list(self.digits)].tolist()
        return LocalElement(self.field, self.valuation, tuple(neg), self.absprec)

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        for a, b in ((self, other), (other, self)):
            if a.is_zero and a.exact:
                return LocalElement.zero(self.field)
        if self.is_zero or other.is_zero:
            z, o = (self, other) if self.is_zero else (other, self)
            vo = 0 if o.is_zero else int(o.valuation)
            return LocalElement(self.field, INF, (), z.absprec + vo)
        rel = min(self.precision, other.precision)
        v = int(self.valuation) + int(other.valuation)
        if rel <= 0:
            raise PrecisionError("product has no known digits")
        absprec = None if rel == INF else v + int(rel)
        if self.field.is_padic:
            (m1, _), (m2, _) = self._scaled(), other._scaled()
            return LocalElement._from_scaled(self.field, m1 * m2, v, absprec)
        fq = self.field.fq
        a = np.array(self.digits, dtype=np.int64)
        b = np.array(other.digits, dtype=np.int64)
        n = len(a) + len(b) - 1 if absprec is None else int(rel)
        acc = np.zeros(n, dtype=np.int64)
        for i, ai in enumerate(a[:n]):
            seg = b[: n - i]
            acc[i : i + len(seg)] = fq.add_table[acc[i : i + len(seg)], fq.mul_table[ai, seg]]
        return LocalElement.from_digits(self.field, acc.tolist(), v, absprec)

    def __repr__(self):
        if self.is_zero:
            return f"LocalElement(0, {self.field}, absprec={self.absprec})"
        return f"LocalElement({self.field}, v={self.valuation}, digits={self.digits}, absprec={self.absprec})"


def _min_prec(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def elem_add(x: LocalElement, y: LocalElement) -> LocalElement:
    return x + y


def elem_mul(x: LocalElement, y: LocalElement) -> LocalElement:
    return x * y


def u_of(field: FieldParams, n: int) -> LocalElement:
    """Coset representative u(n): base-q digit b_i of n sits at position -(i+1)."""
    if n < 0:
        raise ParameterError("u(n) is defined for n >= 0")
    if n == 0:
        return LocalElement.zero(field)
    b = to_base(n, field.q)
    return LocalElement.from_digits(field, list(reversed(b)), -len(b))


# ---------------------------------------------------------------------------
# cosets and balls

@dataclass(frozen=True)
class CosetIndex:
    """Coset ``sum word[i] p^i + P^level`` of ``D / P^level``."""

    level: int
    word: tuple[int, ...]

    def __post_init__(self):
        if len(self.word) != self.level:
            raise ParameterError("word length must equal the level")

    def index(self, q: int) -> int:
        return from_base(self.word, q)

    @classmethod
    def from_index(cls, q: int, level: int, index: int) -> CosetIndex:
        if not 0 <= index < q**level:
            raise ParameterError(f"index {index} out of range for level {level}")
        return cls(level, tuple(to_base(index, q, level)))


class BallRelation(str, Enum):
    DISJOINT = "disjoint"
    A_CONTAINS_B = "a_contains_b"
    B_CONTAINS_A = "b_contains_a"
    EQUAL = "equal"


@dataclass(frozen=True)
class Ball:
    """``h + P^level`` with ``h = sum word[i] p^(start+i)`` inside the window ``P^start``."""

    level: int
    word: tuple[int, ...] = ()
    start: int = 0

    def __post_init__(self):
        if len(self.word) != self.level - self.start:
            raise ParameterError("ball word must have length level - start")

    def measure(self, q: int) -> Fraction:
        return haar_measure(self, q)

    def contains_cell(self, q: int, index: int, m: int, k: int) -> bool:
        """Whether cell ``index`` of the window ``P^-m/P^k`` lies in the ball."""
        if self.start < -m or self.level > k:
            raise ParameterError("ball is not resolved by the window")
        digits = to_base(index, q, m + k)
        # positions below the ball's window start must vanish
        if any(digits[: self.start + m]):
            return False
        return tuple(digits[self.start + m : self.level + m]) == self.word

    def cells(self, q: int, m: int, k: int) -> np.ndarray:
        """Indices of the window cells covered by the ball."""
        if self.start < -m or self.level > k:
            raise ParameterError("ball is not resolved by the window")
        base = from_base([0] * (self.start + m) + list(self.word), q)
        step = q ** (self.level + m)
        return base + step * np.arange(q ** (k - self.level))


def haar_measure(b: Ball, q: int) -> Fraction:
    return Fraction(q) ** (-b.level)


def ball_relation(a: Ball, b: Ball) -> BallRelation:
    if a.start != b.start:
        raise ParameterError("balls must share an ambient window")
    n = min(len(a.word), len(b.word))
    if a.word[:n] != b.word[:n]:
        return BallRelation.DISJOINT
    if a.level == b.level:
        return BallRelation.EQUAL
    return BallRelation.A_CONTAINS_B if a.level < b.level else BallRelation.B_CONTAINS_A


# ---------------------------------------------------------------------------
# vectorised cell arithmetic on window indices

@functools.lru_cache(maxsize=64)
def cell_digits(q: int, L: int) -> np.ndarray:
    """``(q^L, L)`` array of base-q digits, lowest position first."""
    idx = np.arange(q**L, dtype=np.int64)
    out = np.empty((q**L, L), dtype=np.int64)
    for i in range(L):
        out[:, i] = idx % q
        idx //= q
    out.setflags(write=False)
    return out


def digits_to_index(digits: np.ndarray, q: int) -> np.ndarray:
    weights = q ** np.arange(digits.shape[-1], dtype=np.int64)
    return digits @ weights


def cell_add(field: FieldParams, a, b, L: int):
    """Sum of cells ``a`` and ``b`` (index arrays) of a window with ``L`` digits."""
    a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
    if field.is_padic:
        return (a + b) % field.p**L
    D = cell_digits(field.q, L)
    return digits_to_index(field.fq.add_table[D[a], D[b]], field.q)


def cell_neg(field: FieldParams, a, L: int):
    a = np.asarray(a, dtype=np.int64)
    if field.is_padic:
        return (-a) % field.p**L
    D = cell_digits(field.q, L)
    return digits_to_index(field.fq.neg_table[D[a]], field.q)


def cell_valuation(q: int, m: int, k: int) -> np.ndarray:
    """Valuation of each window cell; the zero cell gets ``k`` (it is ``P^k``)."""
    D = cell_digits(q, m + k)
    nz = D != 0
    first = np.where(nz.any(axis=1), nz.argmax(axis=1), m + k)
    return first - m
