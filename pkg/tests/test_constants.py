import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from lrdtrend.constants import (EstimatorPlan, LrdBasisConstants, Regime, TrendSmoothness, basis_constants, c_star,
                                c_star_components, delta_n, j_guard, level_argument, optimal_J, optimal_q,
                                plan_estimator, rate_exponent, regime, resolution_cap, singular_product_integral,
                                theoretical_mise, thresholds)
from lrdtrend.exceptions import ConfigurationError, DomainError, RegimeTieError
from lrdtrend.noise import NoiseModel
from lrdtrend.trends import closed_form_sine_integral, get_trend
from lrdtrend.wavelets import get_spec, get_table
from oracles import c_star_mp, haar_singular_mother, singular_integral_fourier

SINE_R2 = TrendSmoothness(2, closed_form_sine_integral(2))
CASE_I = LrdBasisConstants(0.6, 2.0, 0.5, 0.2, 2, 3, "synthetic-i")
CASE_II = LrdBasisConstants(0.6, 0.5, 0.5, 0.2, 2, 3, "synthetic-ii")


@pytest.mark.parametrize("alpha", [0.2, 0.6, 0.9])
def test_haar_father_singular_integral(alpha):
    val = singular_product_integral(get_table("haar"), "father", alpha)
    assert val == pytest.approx(2 / ((1 - alpha) * (2 - alpha)), rel=1e-12)


@pytest.mark.parametrize("alpha", [0.2, 0.6, 0.9])
def test_haar_mother_singular_integral(alpha):
    val = singular_product_integral(get_table("haar"), "mother", alpha)
    assert val == pytest.approx(haar_singular_mother(alpha), rel=1e-12)


def test_haar_mother_frozen():
    # [DERIVED] four-block closed form at alpha = 0.6
    assert singular_product_integral(get_table("haar"), "mother", 0.6) == pytest.approx(1.8418, abs=5e-5)


@pytest.mark.parametrize("name", ["s4", "s6", "s8", "s10"])
@pytest.mark.parametrize("kind", ["father", "mother"])
def test_singular_integral_against_fourier(name, kind):
    ref = singular_integral_fourier(get_spec(name), kind, 0.6)
    assert singular_product_integral(get_table(name), kind, 0.6) == pytest.approx(ref, rel=1e-5)


def test_basis_constants_frozen():
    # [DERIVED] checked against the Fourier oracle above; frozen for regression
    expected = {"haar": (0.995088, 0.513183, -0.25), "s4": (1.034739, 0.533632, 0.216506),
                "s6": (1.043471, 0.538135, -0.296464), "s8": (1.046946, 0.539927, 0.554632),
                "s10": (1.048741, 0.540853, -1.315426)}
    for name, (cphi, cpsi, nu) in expected.items():
        c = basis_constants(name, 0.2)
        assert (c.C_phi_sq, c.C_psi_sq, c.nu_r) == pytest.approx((cphi, cpsi, nu), abs=2e-6)
        assert c.alpha == pytest.approx(0.6)


@pytest.mark.parametrize("name", ["s4", "s6", "s8"])
def test_regime_tie_is_structural(name):
    # the tie holds for the exact integrals, not only for the tabulated ones
    a = 0.6
    phi = singular_integral_fourier(get_spec(name), "father", a)
    psi = singular_integral_fourier(get_spec(name), "mother", a)
    assert (2**a - 1) * phi == pytest.approx(psi, rel=1e-6)


@pytest.mark.parametrize("name", ["haar", "s4", "s10"])
def test_registered_bases_tie(name):
    c = basis_constants(name, 0.2)
    with pytest.raises(RegimeTieError):
        regime(c)
    assert c.to_dict()["regime"] == "tie"
    sm = get_trend("sine").smoothness(c.r)
    plan = plan_estimator(1024, c, sm)
    assert plan.tie and plan.regime is Regime.CASE_II and plan.q_star == -1


def test_regime_strict_cases():
    assert regime(CASE_I) is Regime.CASE_I
    assert regime(CASE_II) is Regime.CASE_II
    assert CASE_I.to_dict()["regime"] == "case_i"


def test_constants_validation():
    with pytest.raises(DomainError):
        LrdBasisConstants(0.6, -1.0, 0.5, 0.2, 2, 3)
    with pytest.raises(DomainError):
        LrdBasisConstants(0.6, 1.0, 0.5, 0.0, 2, 3)
    with pytest.raises(DomainError):
        LrdBasisConstants(1.2, 1.0, 0.5, 0.1, 2, 3)


def test_smoothness_validation():
    with pytest.raises(DomainError):
        TrendSmoothness(2, 0.0)
    with pytest.raises(DomainError):
        TrendSmoothness(2, 1.0, bounds=(0.5, 0.2))
    assert SINE_R2.scaled(2).integral_gr_sq == pytest.approx(2 * SINE_R2.integral_gr_sq)


def test_mismatched_r_rejected():
    with pytest.raises(ConfigurationError):
        c_star("psi", basis_constants("haar", 0.2), SINE_R2)


@pytest.mark.parametrize("name", ["haar", "s4", "s8"])
def test_c_star_against_mpmath(name):
    c = basis_constants(name, 0.2)
    sm = get_trend("sine").smoothness(c.r)
    ref = c_star_mp(c.alpha, c.r, c.N, c.C_psi_sq, c.nu_r, sm.integral_gr_sq)
    assert c_star("psi", c, sm) == pytest.approx(float(ref), abs=1e-12)
    ref_phi = c_star_mp(c.alpha, c.r, c.N, c.phi_side, c.nu_r, sm.integral_gr_sq)
    assert c_star("phi", c, sm) == pytest.approx(float(ref_phi), abs=1e-12)


def test_c_star_components_sum():
    c = basis_constants("s4", 0.2)
    c1, c2, c3, c4 = c_star_components("psi", c, SINE_R2)
    assert (c1 + c2 + c3) / (4 + c.alpha) + c4 == pytest.approx(c_star("psi", c, SINE_R2))
    with pytest.raises(ValueError):
        c_star_components("tau", c, SINE_R2)


@settings(max_examples=60, deadline=None)
@given(log2n=st.floats(4.0, 20.0), which=st.sampled_from(["psi", "phi"]))
def test_delta_is_periodic(log2n, which):
    c = basis_constants("s4", 0.2)
    n = 2.0**log2n
    period = 2.0 ** ((2 * c.r + c.alpha) / c.alpha)
    a, b = delta_n(which, n, c, SINE_R2), delta_n(which, n * period, c, SINE_R2)
    gap = abs(a - b)
    assert min(gap, 1 - gap) < 1e-9


@settings(max_examples=60, deadline=None)
@given(log2n=st.floats(6.0, 18.0))
def test_theoretical_mise_scales_over_one_period(log2n):
    c = basis_constants("s4", 0.2)
    n = 2.0**log2n
    period = 2.0 ** ((2 * c.r + c.alpha) / c.alpha)
    ratio = theoretical_mise(n * period, "case_ii", c, SINE_R2) / theoretical_mise(n, "case_ii", c, SINE_R2)
    assert ratio == pytest.approx(period ** -rate_exponent(c.r, c.alpha), rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(log2n=st.floats(6.0, 18.0), eps=st.floats(1e-7, 1e-3))
def test_theoretical_mise_continuous_across_level_switch(log2n, eps):
    # the level factor is continuous where the optimal level jumps
    c = basis_constants("s4", 0.2)
    a = c.alpha / (2 * c.r + c.alpha)
    x = level_argument("phi", 2.0**log2n, c, SINE_R2)
    n_switch = 2.0 ** ((math.ceil(x) - c_star("phi", c, SINE_R2)) / a)
    lo = theoretical_mise(n_switch * (1 - eps), "case_ii", c, SINE_R2)
    hi = theoretical_mise(n_switch * (1 + eps), "case_ii", c, SINE_R2)
    assert hi == pytest.approx(lo, rel=10 * eps)


def test_s4_theoretical_mise_regression():
    # [DERIVED] frozen output of the closed-form chain for sine, s4, d = 0.2
    c = basis_constants("s4", 0.2)
    sm = get_trend("sine").smoothness(2)
    expected = [0.425969, 0.297018, 0.211942, 0.155813, 0.111773, 0.074742, 0.050310, 0.034191]
    got = [theoretical_mise(2**k, "case_ii", c, sm) for k in range(7, 15)]
    np.testing.assert_allclose(got, expected, rtol=2e-5)
    plans = [(p.J, p.q) for p in (plan_estimator(2**k, c, sm) for k in range(7, 14))]
    assert plans == [(3, 1), (3, 2), (3, 3), (3, 4), (4, 4), (4, 5), (4, 6)]


def test_case_i_plan():
    n = 4096
    plan = plan_estimator(n, CASE_I, SINE_R2)
    q_opt = optimal_q(n, 0, CASE_I, SINE_R2)
    assert plan.regime is Regime.CASE_I and plan.J == 0
    assert plan.q == resolution_cap(n, 3)
    assert plan.q_star == min(q_opt, plan.q)
    assert np.all(plan.thresholds[: plan.q_star + 1] == 0)
    assert np.all(plan.thresholds[plan.q_star + 1:] > 0)
    assert plan.to_dict()["regime"] == "case_i"


def test_case_i_rules_reject_bad_inputs():
    with pytest.raises(ConfigurationError):
        optimal_q(4096, 0, CASE_II, SINE_R2)
    with pytest.raises(ConfigurationError):
        optimal_q(4096, int(j_guard(4096, CASE_I)) + 1, CASE_I, SINE_R2)
    with pytest.raises(ConfigurationError):
        optimal_J(4096, CASE_I, SINE_R2)
    with pytest.raises(ConfigurationError):
        theoretical_mise(4096, "case_ii", CASE_I, SINE_R2)


def test_case_ii_plan():
    n = 2048
    plan = plan_estimator(n, CASE_II, SINE_R2)
    assert plan.J == optimal_J(n, CASE_II, SINE_R2)
    assert plan.q_star == -1 and not plan.tie
    assert plan.finest_level == resolution_cap(n, 3)
    full = plan_estimator(n, CASE_II, SINE_R2, cap="full")
    assert full.finest_level == 11
    with pytest.raises(ConfigurationError):
        plan_estimator(n, CASE_II, SINE_R2, cap="nope")


def test_thresholds_formula():
    c = CASE_I
    n, J, q = 1024, 1, 4
    th = thresholds(n, J, q, 1, c)
    for j in range(q + 1):
        var = c.C_psi_sq * c.N ** (c.alpha - 1) * n ** -c.alpha * 2.0 ** (-(J + j) * (1 - c.alpha))
        want = 0.0 if j <= 1 else math.sqrt(4 * math.e * var) * math.log(n)
        assert th[j] == pytest.approx(want, rel=1e-13)


def test_plan_validation():
    with pytest.raises(ConfigurationError):
        EstimatorPlan("case_i", 0, 2, 0, [0.0, 1.0], 64)
    with pytest.raises(ConfigurationError):
        EstimatorPlan("case_i", -1, 0, 0, [0.0], 64)
    with pytest.raises(ConfigurationError):
        EstimatorPlan("case_i", 0, 0, 0, [-1.0], 64)


@settings(max_examples=40, deadline=None)
@given(log2n=st.integers(5, 16), name=st.sampled_from(["haar", "s4", "s6"]))
def test_plan_respects_cap(log2n, name):
    c = basis_constants(name, 0.2)
    sm = get_trend("sine").smoothness(c.r)
    plan = plan_estimator(2**log2n, c, sm)
    assume(plan.q >= 0)
    assert c.N * 2 ** plan.finest_level <= 2**log2n / 2
    assert plan.thresholds.size == plan.q + 1


def test_constants_accept_noise_model():
    a = basis_constants("s4", NoiseModel(0.2))
    b = basis_constants("s4", 0.2)
    assert a == b
    scaled = basis_constants("s4", NoiseModel(0.2, 4.0))
    assert scaled.C_psi_sq == pytest.approx(4 * a.C_psi_sq)
