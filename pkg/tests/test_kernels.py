from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lfharmonic.characters import CharacterSystem
from lfharmonic.errors import DomainError, ParameterError, ResolutionError
from lfharmonic.field import FieldParams
from lfharmonic.functions import SampledFunction, character, indicator, random_function
from lfharmonic.kernels import (
    apply_Sn,
    apply_Tn,
    averaging_errors,
    bridge_residual,
    convolve,
    convolve_direct,
    dirichlet,
    dirichlet_exact,
    dirichlet_recursion_check,
    function_bank,
    kernel_bound_violations,
    kernel_constancy_check,
    kernel_hat,
    kernel_hat_check,
    kernel_operator,
    modified_kernel,
    operator_matrix,
    opnorm_lower_bound_Lp,
    sn_norms,
    sup_sn_norm,
    weighted_opnorm_L2,
    weighted_opnorm_L2_full,
)
from lfharmonic.weights import PowerWeight


def _naive_dirichlet(fld, n, k):
    tab = CharacterSystem(fld, k).table()
    return tab[:n].sum(axis=0)


def test_dirichlet_examples(fld):
    k = 3 if fld.q <= 3 else 2
    assert np.all(dirichlet(fld, 0, k).values == 0)
    assert np.allclose(dirichlet(fld, 1, k).values, 1)
    for r in range(k + 1):
        expect = fld.q**r * np.asarray(indicator(fld, r, k=k).values, dtype=float)
        assert np.allclose(dirichlet(fld, fld.q**r, k).values, expect, atol=1e-12)
    for n in range(fld.q**k + 1):
        assert np.allclose(dirichlet(fld, n, k).values, _naive_dirichlet(fld, n, k), atol=1e-12)


def test_dirichlet_q2_k2_direct():
    # D_3 = chi_0 + chi_1 + chi_2 summed by hand from the table
    for fld in (FieldParams.laurent(2), FieldParams.qp(2)):
        tab = CharacterSystem(fld, 2).table()
        assert np.allclose(dirichlet(fld, 3, 2).values, tab[0] + tab[1] + tab[2], atol=1e-15)
    # over F_2((X)) every character is +-1, so D_3 is an integer vector
    tab = CharacterSystem(FieldParams.laurent(2), 2).table().real
    exact = dirichlet_exact(FieldParams.laurent(2), 3, 2).to_rational()
    assert exact.tolist() == (tab[0] + tab[1] + tab[2]).tolist()


def test_dirichlet_resolution_guard():
    with pytest.raises(ResolutionError):
        dirichlet(FieldParams.qp(2), 9, 3)
    with pytest.raises(ParameterError):
        dirichlet(FieldParams.qp(2), -1, 3)


@pytest.mark.parametrize("q,nmax", [(2, 16), (3, 27)])
def test_dirichlet_recursion(q, nmax):
    k = 4 if q == 2 else 3
    for char in ("zero", "positive"):
        fld = FieldParams.from_q(q, char)
        for n in range(nmax + 1):
            for l in range(1, k + 1):
                assert dirichlet_recursion_check(fld, n, l, k), (fld, n, l)


def test_dirichlet_recursion_exact_p2():
    fld = FieldParams.qp(2)
    assert all(dirichlet_recursion_check(fld, n, l, 4, exact=True) for n in range(17) for l in (1, 2, 3))


def test_dirichlet_recursion_guard():
    with pytest.raises(ParameterError):
        dirichlet_recursion_check(FieldParams.qp(2), 3, 0, 3)


def test_modified_kernel_examples(fld):
    k = 3 if fld.q <= 3 else 2
    assert np.all(modified_kernel(fld, 0, k).values == 0)
    chi1 = character(fld, 1, k).values
    assert np.allclose(modified_kernel(fld, 1, k).values, np.conj(chi1))


@pytest.mark.parametrize("q", [2, 3])
def test_kernel_bound_exact_constant(q):
    k = 5 if q == 2 else 4
    for char in ("zero", "positive"):
        fld = FieldParams.from_q(q, char)
        for n in range(min(q**4 + 1, q**k)):
            bad, worst = kernel_bound_violations(fld, n, k)
            assert bad == 0 and worst <= q + 1e-9


def test_kernel_hat_indicator(fld):
    k = 3 if fld.q <= 3 else 2
    for n in range(1, fld.q**k):
        assert kernel_hat_check(fld, n, k)
        H = np.asarray(kernel_hat(fld, n, k).values)
        assert abs(H.sum() - n) < 1e-9  # unit cells on the dual window


def test_kernel_constancy(fld):
    k = 3 if fld.q <= 3 else 2
    for n in range(1, fld.q**k):
        assert kernel_constancy_check(fld, n, k)


def test_kernel_constancy_mutant():
    fld = FieldParams.qp(2)
    K = modified_kernel(fld, 5, 4).values.copy()
    K[3] += 0.5
    assert not kernel_constancy_check(fld, 5, 4, kernel=K)


def test_sn_on_characters(fld):
    k = 2
    for n in range(fld.q**k + 1):
        for m in range(fld.q**k):
            chi = character(fld, m, k)
            out = apply_Sn(n, chi).values
            assert np.allclose(out, chi.values if m < n else 0, atol=1e-12)


def test_sn_is_ball_average(fld):
    k = 3 if fld.q <= 3 else 2
    rng = np.random.default_rng(4)
    for _ in range(5):
        f = random_function(fld, k, rng)
        for r in range(k + 1):
            avg = np.tile(f.values.reshape(fld.q ** (k - r), fld.q**r).mean(axis=0), fld.q ** (k - r))
            assert np.allclose(apply_Sn(fld.q**r, f).values, avg, atol=1e-12)


def test_sn_fast_equals_naive(fld):
    f = random_function(fld, 2, np.random.default_rng(8))
    for n in range(fld.q**2 + 1):
        assert np.allclose(apply_Sn(n, f).values, apply_Sn(n, f, "naive").values, atol=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_projection_laws(k):
    for fld in (FieldParams.laurent(2), FieldParams.qp(2)):
        mats = [operator_matrix(fld, "S_n", n, k) for n in range(2**k + 1)]
        for n, A in enumerate(mats):
            assert np.allclose(A, A.conj().T, atol=1e-12)
            for m, B in enumerate(mats):
                assert np.allclose(A @ B, mats[min(n, m)], atol=1e-12)


def test_bridge(fld):
    k = 3 if fld.q <= 3 else 2
    rng = np.random.default_rng(50)
    bank = [random_function(fld, k, rng) for _ in range(50)]
    for n in range(fld.q**k):
        assert max(bridge_residual(n, f) for f in bank) <= 1e-10


def test_convolution_matches_direct(fld):
    f = random_function(fld, 3 if fld.q <= 3 else 2, np.random.default_rng(1))
    K = modified_kernel(fld, 3, f.level).values
    assert np.allclose(convolve(fld, K, f.values, f.level), convolve_direct(fld, K, f.values, f.level), atol=1e-12)
    assert np.allclose(apply_Tn(3, f).values, apply_Tn(3, f, direct=True).values, atol=1e-12)


def test_tn_resolution_guard():
    with pytest.raises(ResolutionError):
        kernel_operator(FieldParams.qp(2), "T_n", 8, 3)
    kernel_operator(FieldParams.qp(2), "S_n", 8, 3)


def test_matrix_free_agrees_with_dense():
    fld = FieldParams.qp(3)
    v = np.random.default_rng(2).standard_normal(27)
    for kind in ("S_n", "T_n"):
        dense = kernel_operator(fld, kind, 7, 3)
        free = kernel_operator(fld, kind, 7, 3, dense=False)
        assert np.allclose(dense.apply(v), free.apply(v), atol=1e-12)
        assert np.allclose(dense.adjoint_apply(v), free.adjoint_apply(v), atol=1e-12)


def test_unweighted_norm_is_one(fld):
    for n in range(1, fld.q**2 + 1):
        assert abs(weighted_opnorm_L2(kernel_operator(fld, "S_n", n, 2)) - 1) < 1e-12


def test_matrix_free_norm():
    fld = FieldParams.laurent(2)
    w = PowerWeight(fld, 0.5)
    dense = weighted_opnorm_L2(kernel_operator(fld, "S_n", 5, 5), w)
    free = weighted_opnorm_L2_full(kernel_operator(fld, "S_n", 5, 5, dense=False), w)
    assert abs(dense - free.value) < 1e-8 and free.residual < 1e-6


def test_weighted_norm_guard():
    fld = FieldParams.qp(2)
    with pytest.raises(DomainError):
        weighted_opnorm_L2(kernel_operator(fld, "S_n", 3, 2), SampledFunction(fld, 2, np.array([1.0, 0.0, 1.0, 1.0])))


def test_a2_weight_norms_stable():
    fld = FieldParams.laurent(2)
    w = PowerWeight(fld, 0.5)
    sups = [sup_sn_norm(fld, w, k) for k in (3, 4, 5)]
    assert all(b / a < 1.05 for a, b in zip(sups, sups[1:]))
    res = sn_norms(fld, w, 5, 32)
    assert len(res) == 32 and all(r.residual < 1e-8 for r in res)


def test_boundary_weight_norms_grow():
    fld = FieldParams.laurent(2)
    w = PowerWeight(fld, 1.0)
    sups = [sup_sn_norm(fld, w, k) for k in (2, 3, 4, 5)]
    assert all(b > a for a, b in zip(sups, sups[1:]))


def test_sn_norms_guard():
    with pytest.raises(ResolutionError):
        sn_norms(FieldParams.qp(2), None, 2, 5)


def test_lp_lower_bound_examples():
    fld = FieldParams.qp(2)
    op = kernel_operator(fld, "S_n", 3, 3)
    for p in (1.5, 2.0, 3.0):
        assert opnorm_lower_bound_Lp(op, None, p, 1) >= 1 - 1e-9  # chi_0 is a fixed point
    w = PowerWeight(fld, 0.5)
    vals = [opnorm_lower_bound_Lp(op, w, 3.0, b) for b in (1, 10, 40, 80)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    with pytest.raises(ParameterError):
        opnorm_lower_bound_Lp(op, w, 1.0, 5)
    with pytest.raises(ParameterError):
        opnorm_lower_bound_Lp(op, w, 2.0, 0)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_lp_lower_bound_against_spectral_oracle(k):
    fld = FieldParams.laurent(2)
    w = PowerWeight(fld, 0.5)
    for n in (1, 3, 2**k - 1):
        op = kernel_operator(fld, "S_n", n, k)
        exact = weighted_opnorm_L2(op, w)
        lb = opnorm_lower_bound_Lp(op, w, 2.0, 400)
        assert lb <= exact * (1 + 1e-9)
        assert lb >= 0.95 * exact


def test_averaging_errors_converge():
    fld = FieldParams.qp(2)
    w = PowerWeight(fld, 0.5)
    for f in function_bank(fld, 5, 30):
        errs = averaging_errors(f, w)
        assert errs[-1] < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 16), st.integers(0, 16), st.integers(0, 2**32 - 1))
def test_projection_property(n, m, seed):
    fld = FieldParams.laurent(2)
    f = random_function(fld, 4, np.random.default_rng(seed))
    lhs = apply_Sn(n, apply_Sn(m, f)).values
    assert np.allclose(lhs, apply_Sn(min(n, m), f).values, atol=1e-12)
