from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lfharmonic.acceptance import mutated_omega
from lfharmonic.errors import DomainError, NonIntegrableError, ParameterError, ResolutionError, UnsupportedError, WindowError
from lfharmonic.field import Ball, FieldParams, LocalElement, cell_add, to_base, u_of
from lfharmonic.functions import SampledFunction
from lfharmonic.kernels import kernel_operator, weighted_opnorm_L2
from lfharmonic.shift_invariant import (
    PhiSpec,
    TilingSpec,
    Verdict,
    a2_check,
    biorthogonality_check,
    canonical_dual,
    coverage,
    coverage_histogram,
    isometry_residual,
    orthonormal_basis_check,
    parseval_on_omega,
    periodize,
    schauder_verdict,
    spectral_gram,
    standard_tiling,
    tiling_check,
    tiling_from_json,
    tiling_to_json,
)
from lfharmonic.weights import PowerWeight, ap_power_closed_form, power_mass_ideal

F2 = FieldParams.laurent(2)
F3 = FieldParams.laurent(3)


def _ones(fld, k, m=0):
    vals = np.zeros(fld.q ** (m + k))
    vals[:: fld.q**m] = 1.0  # 1_D on the window
    return PhiSpec(SampledFunction(fld, k, vals, m))


# -- periodization -----------------------------------------------------------

def test_periodize_indicator():
    for fld in (F2, F3):
        per = periodize(_ones(fld, 3, 1))
        assert np.all(per.cells == 1)


def test_periodize_two_terms():
    for fld in (F2, F3):
        k, m = 3, 1
        vals = np.zeros(fld.q ** (m + k))
        idx = np.arange(vals.size)
        vals[idx % fld.q**m == 0] = 1  # D
        u1 = u_of(fld, 1).coset_index(m, k)
        vals[idx % fld.q**m == u1 % fld.q**m] = 1  # u(1) + D
        per = periodize(PhiSpec(SampledFunction(fld, k, vals, m), total=2.0))
        assert np.all(per.cells == 2)


def test_periodize_power_symbol():
    spec = PhiSpec.power(F2, 0.5, 5)
    per = periodize(spec)
    assert per.weight == PowerWeight(F2, 0.5)
    assert np.allclose(per.cells, PowerWeight(F2, 0.5).cell_averages(5))
    assert spec.window_mass == pytest.approx(power_mass_ideal(2, 0.5, 0))


def test_periodize_guards():
    with pytest.raises(UnsupportedError):
        periodize(_ones(FieldParams.qp(2), 2))
    with pytest.raises(WindowError):
        periodize(PhiSpec(_ones(F2, 2).phi_hat, tail=0.01))
    periodize(PhiSpec(_ones(F2, 2).phi_hat, tail=1e-4))
    with pytest.raises(ParameterError):
        PhiSpec(_ones(F2, 2).phi_hat, total=3.0)


def test_phi_json_roundtrip():
    spec = PhiSpec(_ones(F2, 2, 1).phi_hat, tail=1e-5)
    back = PhiSpec.from_json(spec.to_json())
    assert back.tail == 1e-5 and np.array_equal(back.density, spec.density)
    power = PhiSpec.from_json('{"q": 2, "p": 2, "char": 2, "alpha": 0.5, "level": 4}')
    assert power.alpha == 0.5 and power.level == 4


# -- A_2 and duals -----------------------------------------------------------

def test_a2_examples():
    assert a2_check(PowerWeight(F2, 0), 5).value == 1
    assert a2_check(PowerWeight(F2, 0.5), 10).value == pytest.approx(ap_power_closed_form(2, 0.5, 2), rel=1e-10)
    # alpha = -1 is not a weight: the central cell average is infinite
    assert math.isinf(a2_check(PowerWeight(F2, -1), 5).value)
    with pytest.raises(NonIntegrableError):
        PowerWeight(F2, -1).ball_mass(Ball(0))
    # the witness is D at every level, so the blow-up is in alpha -> -1
    vals = [a2_check(PowerWeight(F2, -1 + eps), 4).value for eps in (1e-1, 1e-3, 1e-6)]
    assert vals[0] < vals[1] < vals[2]


def test_canonical_dual_examples():
    one = canonical_dual(PowerWeight(F2, 0))
    assert one.integrable and np.all(one.m == 1)
    for q in (2, 3):
        half = canonical_dual(PowerWeight(FieldParams.laurent(q), 0.5))
        expect = (q - 1) * q**-0.5 / (q**0.5 - 1)
        assert half.integrable
        assert all(v == pytest.approx(expect, rel=1e-12) for v in half.integrals)
    vals = np.ones(8)
    vals[5] = 0
    zeroed = canonical_dual(SampledFunction(F2, 3, vals))
    assert not zeroed.integrable


def test_canonical_dual_boundary():
    assert not canonical_dual(PowerWeight(F2, 1)).integrable


def test_biorthogonality():
    assert biorthogonality_check(PowerWeight(F2, 0), 8, 3) == 0
    assert biorthogonality_check(PowerWeight(F2, 0.5), 8, 5) <= 1e-10
    with pytest.raises(ResolutionError):
        biorthogonality_check(PowerWeight(F2, 0.5), 9, 3)
    with pytest.raises(DomainError):
        biorthogonality_check(PowerWeight(F2, 1), 4, 3)


def test_isometry():
    rng = np.random.default_rng(6)
    for spec in (_ones(F2, 4, 1), PhiSpec.power(F2, 0.5, 4), PhiSpec.power(F3, -0.5, 3)):
        for N in (1, 4, 8):
            a = rng.standard_normal(N) + 1j * rng.standard_normal(N)
            assert isometry_residual(spec, a) <= 2 * spec.tail + 1e-10


# -- verdicts ----------------------------------------------------------------

def test_verdict_examples():
    assert schauder_verdict(_ones(F2, 5), (3, 4, 5), 32).verdict is Verdict.SCHAUDER
    half = schauder_verdict(PhiSpec.power(F2, 0.5, 5), (3, 4, 5), 32)
    assert half.verdict is Verdict.SCHAUDER and math.isfinite(half.a2_value)
    one = schauder_verdict(PhiSpec.power(F2, 1.0, 5), (3, 4, 5), 32)
    assert one.verdict is not Verdict.SCHAUDER
    assert one.verdict is Verdict.NOT_SCHAUDER and not one.dual_integrable


def test_verdict_consistency():
    for alpha in (-0.5, 0.25, 0.5):
        rep = schauder_verdict(PhiSpec.power(F2, alpha, 5), (3, 4, 5), 16)
        if rep.verdict is Verdict.SCHAUDER:
            assert math.isfinite(rep.a2_value)
            assert all(math.isfinite(max(t)) for t in rep.traces.values())
        d = rep.as_dict()
        assert d["verdict"] == rep.verdict.value and "thresholds" in d


def test_verdict_needs_two_levels():
    with pytest.raises(ParameterError):
        schauder_verdict(PhiSpec.power(F2, 0.5, 4), (4,), 8)


def test_sup_norm_bounded_when_a2_stable():
    w = PowerWeight(F2, 0.5)
    sups = [max(weighted_opnorm_L2(kernel_operator(F2, "S_n", n, k), w) for n in range(1, 2**k + 1)) for k in (3, 4, 5)]
    assert max(sups) ** 2 <= 4 * ap_power_closed_form(2, 0.5, 2)


# -- tiling and spectra ------------------------------------------------------

def test_standard_tiling(fld):
    for m in (0, 1, 2):
        spec = standard_tiling(fld, 2, m)
        assert tiling_check(spec, m, 2)
    spec = standard_tiling(fld, 2, 0)
    if fld.p == 2:
        assert spectral_gram(spec, 0, 2) == Fraction(0)
    else:
        assert spectral_gram(spec, 0, 2) <= 1e-12
    assert orthonormal_basis_check(spec, 0, 2)
    assert parseval_on_omega(spec, 0, 2) <= 1e-9


def test_two_cosets_forming_D():
    for fld in (F2, FieldParams.qp(2)):
        spec = TilingSpec(fld, (Ball(1, (0,)), Ball(1, (1,))), (LocalElement.zero(fld),))
        assert tiling_check(spec, 0, 3)


def test_ideal_tiled_by_two_translates():
    Q2 = FieldParams.qp(2)
    omega = (Ball(1, (0,)),)
    # P^1 + {0, 1} covers D once
    good = TilingSpec(Q2, omega, (LocalElement.zero(Q2), LocalElement.from_int(Q2, 1)))
    assert tiling_check(good, 0, 3)
    # with u(1) = 1/2 the translates leave D: 1/2 + P^1 lies outside D
    bad = TilingSpec(Q2, omega, (LocalElement.zero(Q2), u_of(Q2, 1)))
    assert not tiling_check(bad, 1, 3)
    assert coverage_histogram(coverage(bad, 1, 3)) == {0: 8, 1: 8}


def test_mutated_omega_reports_double_cover():
    for fld in (F2, FieldParams.qp(2)):
        spec = TilingSpec(fld, mutated_omega(fld, 3), standard_tiling(fld, 3, 2).translations)
        assert not tiling_check(spec, 2, 3)
        assert coverage_histogram(coverage(spec, 2, 3)).get(2, 0) >= 1


def test_omega_resolution_guard():
    spec = TilingSpec(F2, (Ball(4, (0, 0, 0, 0)),), (LocalElement.zero(F2),))
    with pytest.raises(ResolutionError):
        tiling_check(spec, 0, 3)


def test_tiling_json_roundtrip():
    spec = standard_tiling(F3, 2, 1)
    back = tiling_from_json(F3, tiling_to_json(spec))
    assert back.omega == spec.omega
    assert back.translations == spec.translations and back.spectrum == spec.spectrum


def _cell_balls(q, cells, m, k):
    return tuple(Ball(k, tuple(to_base(int(c), q, m + k)), -m) for c in cells)


def _cell_elem(fld, c, m, k):
    return LocalElement.from_cell(fld, int(c), m, k)


def _translated(fld, cells, ts, h, m, k):
    L = m + k
    cells2 = cell_add(fld, np.asarray(cells), h, L)
    ts2 = cell_add(fld, np.asarray(ts), h, L)
    return (
        TilingSpec(fld, _cell_balls(fld.q, cells, m, k), tuple(_cell_elem(fld, t, m, k) for t in ts)),
        TilingSpec(fld, _cell_balls(fld.q, cells2, m, k), tuple(_cell_elem(fld, t, m, k) for t in ts2)),
    )


@pytest.mark.parametrize("fld", [F2, FieldParams.qp(2)], ids=str)
def test_tiling_translation_invariance_exhaustive(fld):
    m, k = 0, 2
    n = fld.q ** (m + k)
    for r in range(1, n + 1):
        for cells in itertools.combinations(range(n), r):
            for s in range(1, n // r + 1):
                for ts in itertools.combinations(range(n), s):
                    for h in range(n):
                        a, b = _translated(fld, cells, ts, h, m, k)
                        assert tiling_check(a, m, k) == tiling_check(b, m, k)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([F3, FieldParams.qp(3), FieldParams.laurent(2, 2)]),
       st.sets(st.integers(0, 15), min_size=1, max_size=6),
       st.sets(st.integers(0, 15), min_size=1, max_size=4),
       st.integers(0, 15))
def test_tiling_translation_invariance_property(fld, cells, ts, h):
    m, k = 1, 1
    n = fld.q ** (m + k)
    cells = sorted(c % n for c in cells)
    ts = sorted({t % n for t in ts})
    a, b = _translated(fld, sorted(set(cells)), ts, h % n, m, k)
    assert tiling_check(a, m, k) == tiling_check(b, m, k)
