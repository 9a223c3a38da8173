"""Dirichlet kernels D_n, modified kernels K_n, the partial-sum operator S_n and
the convolution operator T_n, with executable checks of their identities.

Resolution rules at level k (cells of D / P^k):
  D_n, S_n          need n <= q^k (they only involve chi_0 .. chi_(n-1))
  chi_n, K_n, T_n   need n <  q^k (chi_{q^k} is not constant on cells of P^k)
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from . import transform as tr
from .characters import character_phases, digit_reversal, roots_of_unity
from .cyclo import Cyclo
from .errors import DomainError, ParameterError, ResolutionError
from .field import FieldParams, cell_add, cell_neg, cell_valuation
from .functions import SampledFunction, window_transform


def _need_dirichlet(field: FieldParams, n: int, k: int):
    if n < 0:
        raise ParameterError("index must be non-negative")
    if n > field.q**k:
        raise ResolutionError(f"D_{n} is not constant on cells of P^{k} (needs n <= {field.q**k})")


def _need_modified(field: FieldParams, n: int, k: int):
    if n < 0:
        raise ParameterError("index must be non-negative")
    if n >= field.q**k:
        raise ResolutionError(f"chi_{n} is not constant on cells of P^{k} (needs n < {field.q**k})")


# ---------------------------------------------------------------------------
# kernels

def dirichlet(field: FieldParams, n: int, k: int) -> SampledFunction:
    """``D_n = sum_{m<n} chi_m`` on D / P^k."""
    _need_dirichlet(field, n, k)
    return SampledFunction(field, k, _dirichlet_cells(field, n, 0, k))


def dirichlet_exact(field: FieldParams, n: int, k: int) -> Cyclo:
    """D_n on D / P^k over Q(zeta)."""
    _need_dirichlet(field, n, k)
    return _dirichlet_cells_exact(field, n, 0, k)


def _dirichlet_cells(field: FieldParams, n: int, m: int, k: int) -> np.ndarray:
    """D_n on the window ``P^-m / P^k`` as a complex vector."""
    if n == 0:
        return np.zeros(field.q ** (m + k), dtype=complex)
    ph, N = character_phases(field, np.arange(n), m, k)
    return roots_of_unity(N)[ph].sum(axis=0)


def _dirichlet_cells_exact(field: FieldParams, n: int, m: int, k: int) -> Cyclo:
    q = field.q
    order = field.p ** (m + k) if field.is_padic else field.p
    if n == 0:
        return Cyclo(np.zeros((q ** (m + k), order), dtype=object), 1, field.p)
    ph, N = character_phases(field, np.arange(n), m, k)
    return Cyclo.from_phases(ph, N, field.p).sum(axis=0)


def dirichlet_recursion_check(field: FieldParams, n: int, l: int, k: int, exact: bool | None = None) -> bool:
    """Check ``D_n(x) = D_r(p^-l x) D_{q^l}(x) + chi_r(p^-l x) D_t(x)`` with
    ``n = r q^l + t``, ``0 <= t < q^l``, at every cell of D / P^k.

    Both sides are direct character sums.  ``p^-l x`` for x in D / P^k is the
    cell with the same index in the window ``P^-l / P^(k-l)``.
    """
    q = field.q
    if not 1 <= l <= k:
        raise ParameterError("the split needs 1 <= l <= k")
    if not 0 <= n <= q**k:
        raise ParameterError(f"need 0 <= n <= q^k = {q**k}")
    r, t = divmod(n, q**l)
    exact = field.p == 2 if exact is None else exact
    if exact:
        lhs = _dirichlet_cells_exact(field, n, 0, k)
        rhs = _dirichlet_cells_exact(field, r, l, k - l) * _dirichlet_cells_exact(field, q**l, 0, k)
        if t:
            ph, N = character_phases(field, [r], l, k - l)
            Dt = _dirichlet_cells_exact(field, t, 0, k)
            rhs = rhs + Dt.mul_root(ph[0] * (Dt.order // N))
        return lhs.equals(rhs)
    lhs = _dirichlet_cells(field, n, 0, k)
    rhs = _dirichlet_cells(field, r, l, k - l) * _dirichlet_cells(field, q**l, 0, k)
    if t:
        ph, N = character_phases(field, [r], l, k - l)
        rhs = rhs + roots_of_unity(N)[ph[0]] * _dirichlet_cells(field, t, 0, k)
    return bool(np.max(np.abs(lhs - rhs)) <= 1e-10)


def modified_kernel(field: FieldParams, n: int, k: int) -> SampledFunction:
    """``K_n = Phi_0 conj(chi_n) D_n`` on D / P^k."""
    _need_modified(field, n, k)
    ph, N = character_phases(field, np.arange(n + 1), 0, k)
    rows = roots_of_unity(N)[ph]
    return SampledFunction(field, k, rows[:n].sum(axis=0) * rows[n].conj())


def kernel_bound_violations(field: FieldParams, n: int, k: int, tol: float = 1e-9) -> tuple[int, float]:
    """Cells with ``|K_n(x)| |x| > q``; also returns ``max |K_n(x)| |x|`` over x != 0."""
    K = np.abs(modified_kernel(field, n, k).values)
    val = cell_valuation(field.q, 0, k)
    norm = float(field.q) ** (-val.astype(float))
    prod = K[1:] * norm[1:]
    worst = float(prod.max()) if prod.size else 0.0
    return int(np.sum(prod > field.q + tol)), worst


def kernel_hat(field: FieldParams, n: int, k: int) -> SampledFunction:
    """Transform of K_n on the dual window ``P^-k / D`` (cells have unit measure)."""
    K = modified_kernel(field, n, k)
    return window_transform(K)


def kernel_hat_support(field: FieldParams, n: int, k: int) -> np.ndarray:
    """Dual-window cells of ``D + u(m) - u(n)``, m < n."""
    q = field.q
    un = digit_reversal(n, q, k)
    um = digit_reversal(np.arange(n), q, k)
    return np.sort(cell_add(field, um, cell_neg(field, un, k), k))


def kernel_hat_check(field: FieldParams, n: int, k: int, tol: float = 1e-9) -> bool:
    """K^_n is the indicator of n disjoint unit cosets ``D + u(m) - u(n)``."""
    H = np.asarray(kernel_hat(field, n, k).values)
    ones = np.flatnonzero(np.abs(H - 1) <= tol)
    zeros = np.abs(H) <= tol
    if not np.all(zeros | (np.abs(H - 1) <= tol)):
        return False
    if abs(H.sum() - n) > tol * max(1, n):
        return False
    return np.array_equal(ones, kernel_hat_support(field, n, k))


def kernel_constancy_check(field: FieldParams, n: int, k: int, kernel=None, tol: float = 1e-10) -> bool:
    """``K(x + y) = K(x)`` for every pair of cells with ``|y| < |x|``."""
    K = modified_kernel(field, n, k).values if kernel is None else np.asarray(kernel)
    q = field.q
    size = q**k
    val = cell_valuation(q, 0, k)
    xs = np.arange(size)
    for x in xs[1:]:
        ys = xs[val > val[x]]
        moved = cell_add(field, np.full(ys.size, x), ys, k)
        if np.any(np.abs(K[moved] - K[x]) > tol):
            return False
    return True


# ---------------------------------------------------------------------------
# operators

def apply_Sn(n: int, f: SampledFunction, method: str = "fast") -> SampledFunction:
    """``S_n f = sum_{m<n} f^(u(m)) chi_m``."""
    _need_dirichlet(f.field, n, f.level)
    if f.window:
        raise ParameterError("partial sums act on functions on D")
    vals = np.asarray(f.values, dtype=complex)
    if method == "naive":
        F = tr.naive_fourier(f.field, vals)
        F[n:] = 0
        return f.with_values(tr.naive_inverse(f.field, F))
    F = tr.fast_fourier(f.field, vals)
    F[..., n:] = 0
    return f.with_values(tr.fast_inverse(f.field, F))


def convolve(field: FieldParams, kernel: np.ndarray, f: np.ndarray, k: int) -> np.ndarray:
    """``(K * f)(x) = int_D K(x - y) f(y) dy`` by transform-multiply-inverse."""
    K = tr.fast_fourier(field, kernel)
    F = tr.fast_fourier(field, f)
    return tr.fast_inverse(field, K * F)


def convolve_direct(field: FieldParams, kernel: np.ndarray, f: np.ndarray, k: int) -> np.ndarray:
    q = field.q
    x = np.arange(q**k)
    diff = cell_add(field, x[:, None], cell_neg(field, x, k)[None, :], k)
    return (np.asarray(kernel)[diff] @ np.asarray(f, dtype=complex)) / q**k


def apply_Tn(n: int, f: SampledFunction, direct: bool = False) -> SampledFunction:
    """``T_n f = K_n * f``."""
    K = modified_kernel(f.field, n, f.level).values
    op = convolve_direct if direct else convolve
    return f.with_values(op(f.field, K, np.asarray(f.values, dtype=complex), f.level))


def bridge_residual(n: int, f: SampledFunction) -> float:
    """``max |S_n f - chi_n T_n(conj(chi_n) f)|``."""
    _need_modified(f.field, n, f.level)
    ph, N = character_phases(f.field, [n], 0, f.level)
    chi = roots_of_unity(N)[ph[0]]
    lhs = apply_Sn(n, f).values
    rhs = chi * apply_Tn(n, f.with_values(np.asarray(f.values, dtype=complex) * chi.conj())).values
    return float(np.max(np.abs(lhs - rhs)))


class OperatorKind(str, Enum):
    S = "S_n"
    T = "T_n"


DENSE_LIMIT = 1024


@dataclass(frozen=True, eq=False)
class KernelOperator:
    field: FieldParams
    kind: OperatorKind
    n: int
    level: int
    matrix: np.ndarray | None

    @property
    def size(self) -> int:
        return self.field.q**self.level

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Action on cell vectors (columns of a 2-D array are separate inputs)."""
        values = np.asarray(values, dtype=complex)
        if self.matrix is not None:
            return self.matrix @ values
        f = SampledFunction(self.field, self.level, np.zeros(self.size))
        cols = values.T if values.ndim == 2 else values[None]
        out = []
        for c in cols:
            g = f.with_values(c)
            out.append((apply_Sn(self.n, g) if self.kind is OperatorKind.S else apply_Tn(self.n, g)).values)
        out = np.array(out)
        return out.T if values.ndim == 2 else out[0]

    def adjoint_apply(self, values: np.ndarray) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix.conj().T @ values
        if self.kind is OperatorKind.S:
            return self.apply(values)
        # T_n^* is convolution with K_n(-x)^*
        K = modified_kernel(self.field, self.n, self.level).values
        Kstar = np.conj(K[cell_neg(self.field, np.arange(self.size), self.level)])
        vals = np.asarray(values, dtype=complex)
        cols = vals.T if vals.ndim == 2 else vals[None]
        out = np.array([convolve(self.field, Kstar, c, self.level) for c in cols])
        return out.T if vals.ndim == 2 else out[0]


def operator_matrix(field: FieldParams, kind, n: int, k: int) -> np.ndarray:
    kind = OperatorKind(kind)
    q = field.q
    if kind is OperatorKind.S:
        _need_dirichlet(field, n, k)
        if n == 0:
            return np.zeros((q**k, q**k), dtype=complex)
        ph, N = character_phases(field, np.arange(n), 0, k)
        T = roots_of_unity(N)[ph]
        # S_n[x, y] = q^-k sum_{m<n} chi_m(x) conj(chi_m(y))
        return (T.T @ T.conj()) / q**k
    _need_modified(field, n, k)
    K = modified_kernel(field, n, k).values
    x = np.arange(q**k)
    diff = cell_add(field, x[:, None], cell_neg(field, x, k)[None, :], k)
    return K[diff] / q**k


def kernel_operator(field: FieldParams, kind, n: int, k: int, dense: bool | None = None) -> KernelOperator:
    kind = OperatorKind(kind)
    dense = field.q**k <= DENSE_LIMIT if dense is None else dense
    if kind is OperatorKind.S:
        _need_dirichlet(field, n, k)
    else:
        _need_modified(field, n, k)
    M = operator_matrix(field, kind, n, k) if dense else None
    return KernelOperator(field, kind, n, k, M)


# ---------------------------------------------------------------------------
# weighted norms

def _weight_cells(w, field: FieldParams, k: int) -> np.ndarray:
    from .weights import as_weight

    if w is None:
        return np.ones(field.q**k)
    cells = np.asarray(as_weight(w, field).cell_averages(k), dtype=float)
    if np.any(~(cells > 0)) or not np.all(np.isfinite(cells)):
        raise DomainError("weight must be positive and finite on every cell")
    return cells


@dataclass(frozen=True)
class NormResult:
    value: float
    residual: float
    vector: np.ndarray


def weighted_opnorm_L2_full(op: KernelOperator, w=None) -> NormResult:
    """Largest singular value of ``W^(1/2) M W^(-1/2)`` with its singular pair residual."""
    wc = _weight_cells(w, op.field, op.level)
    s = np.sqrt(wc)
    if op.matrix is not None:
        B = (s[:, None] * op.matrix) / s[None, :]
        U, S, Vh = scipy.linalg.svd(B)
        v, u, sigma = Vh[0].conj(), U[:, 0], S[0]
        res = float(np.linalg.norm(B @ v - sigma * u))
        return NormResult(float(sigma), res, v / s)
    n = op.size
    lin = scipy.sparse.linalg.LinearOperator(
        (n, n),
        matvec=lambda v: s * op.apply(np.ravel(v) / s),
        rmatvec=lambda v: op.adjoint_apply(np.ravel(v) * s) / s,
        dtype=complex,
    )
    u, S, vh = scipy.sparse.linalg.svds(lin, k=1, random_state=0)
    v = vh[0].conj()
    res = float(np.linalg.norm(lin.matvec(v) - S[0] * u[:, 0]))
    return NormResult(float(S[0]), res, v / s)


def weighted_opnorm_L2(op: KernelOperator, w=None) -> float:
    return weighted_opnorm_L2_full(op, w).value


def sn_norms(field: FieldParams, w, k: int, nmax: int) -> list[NormResult]:
    """``||S_n||`` on ``L^2(D, w)`` for n = 1..nmax at level k."""
    if nmax > field.q**k:
        raise ResolutionError(f"S_n with n > q^k = {field.q**k} is not resolved at level {k}")
    return [weighted_opnorm_L2_full(kernel_operator(field, "S_n", n, k), w) for n in range(1, nmax + 1)]


def sup_sn_norm(field: FieldParams, w, k: int, nmax: int | None = None) -> float:
    nmax = field.q**k if nmax is None else nmax
    return max(r.value for r in sn_norms(field, w, k, nmax))


# ---------------------------------------------------------------------------
# L^p lower bounds

def _bank_vector(field: FieldParams, k: int, i: int, seed: int) -> tuple[np.ndarray, bool]:
    """The i-th test vector of the deterministic bank and whether to refine it.

    Order: chi_0, indicators of every ball (coarse first), characters, power
    functions, then seeded random starts (refined by the power method).
    """
    q = field.q
    size = q**k
    if i == 0:
        return np.ones(size, dtype=complex), False
    i -= 1
    x = np.arange(size)
    for j in range(k + 1):
        if i < q**j:
            return (x % q**j == i).astype(complex), False
        i -= q**j
    if i < size - 1:
        ph, N = character_phases(field, [i + 1], 0, k)
        return roots_of_unity(N)[ph[0]], False
    i -= size - 1
    betas = (-0.9, -0.75, -0.5, -0.25, 0.25, 0.5, 1.0, 2.0)
    if i < len(betas):
        from .weights import PowerWeight

        return np.asarray(PowerWeight(field, betas[i]).cell_averages(k), dtype=complex), False
    i -= len(betas)
    rng = np.random.default_rng([seed, i])
    return rng.standard_normal(size) + 1j * rng.standard_normal(size), True


def function_bank(field: FieldParams, k: int, count: int = 100, seed: int = 0) -> list[SampledFunction]:
    """The first ``count`` members of the deterministic test bank at level k."""
    return [SampledFunction(field, k, _bank_vector(field, k, i, seed)[0]) for i in range(count)]


def averaging_errors(f: SampledFunction, w=None) -> list[float]:
    """``||S_{q^r} f - f||_{L^2(D, w)}`` for r = 0..k."""
    wc = _weight_cells(w, f.field, f.level)
    vals = np.asarray(f.values, dtype=complex)
    out = []
    for r in range(f.level + 1):
        d = apply_Sn(f.q**r, f).values - vals
        out.append(float(np.sqrt(np.sum(np.abs(d) ** 2 * wc) / f.size)))
    return out


def _lp(v: np.ndarray, p: float) -> float:
    return float(np.sum(np.abs(v) ** p) ** (1 / p))


def _dual_map(v: np.ndarray, p: float) -> np.ndarray:
    a = np.abs(v)
    out = np.zeros_like(v)
    nz = a > 0
    out[nz] = v[nz] * a[nz] ** (p - 2)
    return out


def opnorm_lower_bound_Lp(op: KernelOperator, w, p: float, budget: int, seed: int = 0, iters: int = 25) -> float:
    """Lower bound for ``||op||`` on ``L^p(D, w)``: the best ratio ``||op f|| / ||f||``
    over the first ``budget`` members of a fixed test bank.

    Random members are improved by the nonlinear power method for the l^p norm
    of ``B = W^(1/p) M W^(-1/p)``; every candidate is a genuine vector, so the
    value is a certified lower bound and is monotone in ``budget``.
    """
    if p <= 1:
        raise ParameterError("need p > 1")
    if budget < 1:
        raise ParameterError("budget must be at least 1")
    wc = _weight_cells(w, op.field, op.level)
    s = wc ** (1 / p)
    pp = p / (p - 1)

    def ratio(g):
        denom = _lp(g, p)
        return _lp(s * op.apply(g / s), p) / denom if denom > 0 else 0.0

    best = 0.0
    for i in range(budget):
        f, refine = _bank_vector(op.field, op.level, i, seed)
        g = f * s  # coordinates in which the weighted norm is plain l^p
        best = max(best, ratio(g))
        if refine:
            for _ in range(iters):
                y = s * op.apply(g / s)
                if not np.any(y):
                    break
                z = op.adjoint_apply(_dual_map(y, p) * s) / s
                g = _dual_map(z, pp)
                nrm = _lp(g, p)
                if nrm == 0:
                    break
                g = g / nrm
                best = max(best, ratio(g))
    return best
