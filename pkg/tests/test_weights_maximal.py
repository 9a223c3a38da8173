from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lfharmonic.errors import DomainError, NonIntegrableError, ParameterError, WindowError
from lfharmonic.field import Ball, FieldParams, cell_valuation
from lfharmonic.functions import SampledFunction, character, constant, indicator, random_function
from lfharmonic.kernels import function_bank
from lfharmonic.maximal import (
    buckley_bound,
    buckley_experiment,
    buckley_slope,
    m_s,
    m_to_sharp_probe,
    maximal,
    maximal_bruteforce,
    sharp_maximal,
    tn_sharp_probe,
)
from lfharmonic.weights import (
    PowerWeight,
    SampledWeight,
    a_infty_probe,
    ap_characteristic,
    ap_power_closed_form,
    doubling_ratio,
    parse_weight,
    power_mass_ideal,
    power_weight_ball_mass,
    reverse_holder_probe,
)

F2 = FieldParams.laurent(2)
Q2 = FieldParams.qp(2)
Q3 = FieldParams.qp(3)


# -- masses ------------------------------------------------------------------

def test_mass_examples():
    assert power_weight_ball_mass(F2, 1, Ball(0)) == Fraction(2, 3)
    assert power_weight_ball_mass(Q3, 1, Ball(1, (0,))) == Fraction(1, 12)
    for b in (Ball(0), Ball(2, (1, 0)), Ball(3, (0, 0, 1))):
        assert power_weight_ball_mass(Q3, 0, b) == b.measure(3)


def test_mass_riemann_oracle():
    # cell sums of |x| over P^1 in Q_3 at level 8, the central cell bounded by 3^-8
    k = 8
    val = cell_valuation(3, 0, k)
    inP1 = np.arange(3**k) % 3 == 0
    norms = 3.0 ** (-val.astype(float))
    norms[0] = 0
    riemann = norms[inP1].sum() / 3**k
    assert abs(riemann - 1 / 12) < 1e-6


def test_mass_off_origin():
    # the ball 1 + P^2 sits on the unit sphere, 3 + P^3 in Q_2 at |x| = 1
    assert power_weight_ball_mass(Q3, 0.5, Ball(2, (1, 0))) == pytest.approx(1 / 9)
    assert power_weight_ball_mass(Q2, 2, Ball(3, (0, 1, 1))) == Fraction(1, 32)


def test_mass_nonintegrable():
    with pytest.raises(NonIntegrableError):
        power_mass_ideal(2, -1, 0)
    with pytest.raises(NonIntegrableError):
        power_weight_ball_mass(F2, -1.5, Ball(0))


def test_cell_averages_sum_to_mass():
    for alpha in (-0.5, 0.25, 1, 2):
        w = PowerWeight(Q3, alpha)
        for k in (1, 3, 5):
            total = sum(w.cell_averages(k)) / 3**k
            assert float(total) == pytest.approx(float(power_mass_ideal(3, alpha, 0)), rel=1e-12)


# -- A_p ---------------------------------------------------------------------

def test_ap_examples():
    assert ap_characteristic(PowerWeight(F2, 0), 2, 5).value == 1
    for q in (2, 3):
        fld = FieldParams.qp(q)
        for alpha in (-0.5, 0.25, 0.5):
            rep = ap_characteristic(PowerWeight(fld, alpha), 2, 10)
            assert rep.value == pytest.approx(ap_power_closed_form(q, alpha, 2), rel=1e-10)
            assert rep.witness == Ball(0)


def test_ap_closed_form_envelope():
    # [w]_Ap ~ (q^theta - 1)^(1-p) for w = |x|^((p-1)(1-theta))
    for p in (1.5, 2.0, 3.0):
        for theta in (0.5, 0.25, 0.1):
            alpha = (p - 1) * (1 - theta)
            val = ap_power_closed_form(2, alpha, p)
            ref = (2**theta - 1) ** (1 - p)
            assert 2.0**-p * ref <= val * (1 + 1e-12)
            assert val <= ref * (1 + 1e-12)
            assert 2.0**-p <= 1 / (2 ** (alpha + 1) - 1) <= 1


def test_ap_outside_range_infinite():
    assert ap_power_closed_form(2, 1.0, 2) == math.inf
    assert math.isinf(ap_characteristic(PowerWeight(F2, -1), 2, 4).value)


def test_ap_monotone_in_p():
    for w in (PowerWeight(Q2, 0.5), PowerWeight(Q3, -0.5), SampledWeight(random_function(Q2, 4, np.random.default_rng(1), False).abs())):
        vals = [float(ap_characteristic(w, p, 5).value) for p in (1.5, 2, 3, 4)]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(vals, vals[1:]))


def test_ap_refinement_monotone_and_stable():
    for alpha in (-0.5, 0.5):
        w = PowerWeight(Q2, alpha)
        vals = [ap_characteristic(w, 2, k).value for k in range(1, 17)]
        assert all(b >= a * (1 - 1e-12) for a, b in zip(vals, vals[1:]))
        kstab = math.ceil(8 / (alpha + 1))
        assert abs(vals[-1] - vals[kstab - 1]) <= 1e-6 * vals[-1]


def test_ap_duality_power():
    for p in (1.5, 2.0, 3.0):
        pp = p / (p - 1)
        for alpha in (-0.5, 0.25):
            w = PowerWeight(Q3, alpha)
            lhs = ap_characteristic(w.power(1 - pp), pp, 10).value
            rhs = ap_characteristic(w, p, 10).value ** (pp - 1)
            assert lhs == pytest.approx(rhs, rel=1e-10)


def test_ap_duality_exact_rational():
    vals = np.array([Fraction(v) for v in (1, 2, 3, Fraction(1, 2), 5, 1, 4, Fraction(2, 3))], dtype=object)
    w = SampledWeight(SampledFunction(F2, 3, vals))
    a = ap_characteristic(w, 2, 3).value
    b = ap_characteristic(w.power(-1), 2, 3).value
    assert isinstance(a, Fraction) and a == b


def test_ap_guards():
    with pytest.raises(DomainError):
        SampledWeight(SampledFunction(F2, 2, np.array([1.0, 0.0, 1.0, 1.0])))
    with pytest.raises(ParameterError):
        ap_characteristic(PowerWeight(F2, 0.5), 1, 3)


def test_parse_weight():
    assert parse_weight("POWER:1/2", F2) == PowerWeight(F2, 0.5)
    assert parse_weight("one", F2) == PowerWeight(F2, 0)
    with pytest.raises(ParameterError):
        parse_weight("GAUSS:1", F2)


# -- doubling ----------------------------------------------------------------

def test_doubling_examples():
    assert doubling_ratio(PowerWeight(F2, 0), 5).value == 2
    rep = doubling_ratio(PowerWeight(F2, 1), 6)
    # q^(a+1), (q-1) q^(a+1) / (q^(a+1) - 1), q  at q = 2, a = 1
    assert set(rep.ratios) == {Fraction(4), Fraction(4, 3), Fraction(2)}
    assert rep.value == 4


def test_doubling_formula_general():
    for q in (2, 3):
        for alpha in (0.5, 2):
            rep = doubling_ratio(PowerWeight(FieldParams.qp(q), alpha), 5)
            A = q ** (alpha + 1)
            expect = {A, (q - 1) * A / (A - 1), q}
            assert {round(float(r), 9) for r in rep.ratios} == {round(float(e), 9) for e in expect}


def test_doubling_sampled_stable():
    vals = 1 + np.random.default_rng(3).random(2**4)
    w = SampledWeight(SampledFunction(F2, 4, vals))
    assert math.isfinite(doubling_ratio(w, 4).value)
    assert doubling_ratio(w, 6).value == pytest.approx(doubling_ratio(w, 4).value)


# -- probes ------------------------------------------------------------------

def test_reverse_holder_probe():
    one = reverse_holder_probe(PowerWeight(F2, 0), 4)
    assert one.best == 1.0 and one.C == pytest.approx(1.0)
    half = reverse_holder_probe(PowerWeight(F2, 0.5), 5)
    assert half.best > 0 and half.C <= 4
    reverse_holder_probe(PowerWeight(F2, 1.5), 4)  # outside A_2: runs, no contract


def test_a_infty_probe():
    one = a_infty_probe(PowerWeight(F2, 0), 4)
    assert one.best == 1.0 and one.C == pytest.approx(1.0)
    half = a_infty_probe(PowerWeight(F2, 0.5), 4)
    assert half.best > 0 and half.C <= 4


# -- maximal functions -------------------------------------------------------

def test_maximal_indicator_examples():
    for fld in (F2, Q3):
        f = indicator(fld, 0, k=2)
        Mf = maximal(f, 3)
        val = cell_valuation(fld.q, 3, 2)
        expect = [Fraction(1) if v >= 0 else Fraction(fld.q) ** int(v) for v in val]
        assert list(Mf.values) == expect  # 1 on D, 1/|x| outside


def test_maximal_dominates_f():
    for f in function_bank(Q2, 4, 40):
        assert np.all(np.asarray(maximal(f).values, dtype=float) >= np.abs(f.values) - 1e-12)


@pytest.mark.parametrize("q,k,m", [(2, 3, 0), (2, 4, 2), (2, 5, 3), (3, 3, 1), (3, 2, 3)])
def test_tree_equals_bruteforce_exact(q, k, m):
    rng = np.random.default_rng(q * 100 + k * 10 + m)
    fld = FieldParams.qp(q)
    vals = np.array([Fraction(int(v), 5) for v in rng.integers(-9, 10, q ** (k + m))], dtype=object)
    f = SampledFunction(fld, k, vals, m)
    assert list(maximal(f).values) == list(maximal_bruteforce(f).values)
    assert list(sharp_maximal(f).values) == list(maximal_bruteforce(f, sharp=True).values)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(1, 3), st.integers(0, 2), st.integers(0, 2**32 - 1))
def test_tree_equals_bruteforce_property(q, k, m, seed):
    fld = FieldParams.laurent(q)
    f = SampledFunction(fld, k, np.random.default_rng(seed).standard_normal(q ** (k + m)), m)
    assert np.allclose(maximal(f).values, maximal_bruteforce(f).values, atol=1e-12)
    assert np.allclose(sharp_maximal(f).values, maximal_bruteforce(f, sharp=True).values, atol=1e-12)


def test_sharp_and_ms_inequalities():
    for f in function_bank(F2, 4, 60):
        M = np.asarray(maximal(f).values, dtype=float)
        sh = np.asarray(sharp_maximal(f).values, dtype=float)
        assert np.all(sh <= 2 * M + 1e-12)
        for s in (1.5, 2.0):
            assert np.all(np.asarray(m_s(f, s).values) >= M - 1e-12)
    assert all(v == 0 for v in sharp_maximal(constant(F2, 3, 5)).values)
    with pytest.raises(ParameterError):
        m_s(constant(F2, 3), 1.0)


def test_window_extension_cannot_change_max():
    # balls beyond the window only average a D-supported f over more measure
    for f in function_bank(Q3, 3, 20):
        small = np.asarray(maximal(f, 3).values, dtype=float)
        wide = np.asarray(maximal(f, 5).values, dtype=float)
        assert np.allclose(wide[:: 3**2], small, atol=1e-14)


# -- Buckley -----------------------------------------------------------------

def test_buckley_example():
    rec = buckley_experiment(F2, 2.0, 0.5, 8, 4)
    assert rec.paper_bound == pytest.approx(0.5 / (math.sqrt(2) - 1))
    assert rec.ratio >= rec.paper_bound and rec.pointwise_violations == 0
    assert rec.min_pointwise_ratio >= buckley_bound(2, 0.5) * (1 - 1e-12)


def test_buckley_theta_to_one_bounded():
    rec = buckley_experiment(F2, 2.0, 0.95, 8, 4)
    assert rec.ap < 1.5 and rec.ratio < 10


def test_buckley_window_guard(monkeypatch):
    # cell averages come from closed forms, so a D-supported f is always fully
    # captured; the guard is exercised by inflating the reference mass
    import importlib

    mx = importlib.import_module("lfharmonic.maximal")
    real = mx.power_mass_ideal
    monkeypatch.setattr(mx, "power_mass_ideal", lambda q, a, j: 2 * real(q, a, j))
    with pytest.raises(WindowError, match="m >= 2"):
        buckley_experiment(F2, 2.0, 0.5, 4, 1)


def test_buckley_slope_regression():
    for p in (1.5, 2.0, 3.0):
        recs = [buckley_experiment(F2, p, th, 8, 4) for th in (0.5, 0.25, 0.1)]
        assert buckley_slope(recs) == pytest.approx(1 / (p - 1), rel=0.15)


def test_buckley_guards():
    with pytest.raises(ParameterError):
        buckley_experiment(F2, 1.0, 0.5, 4, 2)
    with pytest.raises(ParameterError):
        buckley_experiment(F2, 2.0, 1.0, 4, 2)


# -- M to sharp and T_n probes -----------------------------------------------

def test_m_sharp_probe():
    fld = F2
    r = m_to_sharp_probe(2.0, None, [character(fld, 1, 3)], 3)
    assert math.isfinite(r.value)
    bank = function_bank(fld, 3, 30)
    w = PowerWeight(fld, 0.5)
    r3 = m_to_sharp_probe(2.0, w, bank, 3)
    r5 = m_to_sharp_probe(2.0, w, bank, 5)
    assert 0 in r3.skipped  # chi_0 is constant
    assert all(b <= 1.5 * a for a, b in zip(r3.ratios, r5.ratios))
    vals = np.asarray(w.cell_averages(3), dtype=float).copy()
    vals[2] = 0
    with pytest.raises(DomainError):
        m_to_sharp_probe(2.0, SampledFunction(fld, 3, vals), bank, 3)


def test_tn_sharp_probe():
    bank = function_bank(F2, 4, 100)
    for s in (1.5, 2.0):
        r = tn_sharp_probe(s, bank, (2, 4, 8))
        assert math.isfinite(r.value)
        assert r.values[-1] <= 1.2 * r.values[1]
    with pytest.raises(ParameterError):
        tn_sharp_probe(2.0, [], (2,))
