import math

import numpy as np
import pytest

from casimir_graphene import (
    CONSTANTS,
    DomainError,
    EvaluationMethod,
    GrapheneParams,
    matsubara_frequency,
    phi,
    pol_tensor,
    pol_zero_temperature,
    small_parameter,
    thermal_correction,
    thermal_correction_asymptotic,
    y_l,
)
from casimir_graphene.core import UnsupportedConfigurationError
from casimir_graphene.poltensor import pol_tensor_multi, thermal_correction_arrays
from oracles import phi_mpmath, thermal_correction_bruteforce, thermal_correction_mpmath, y_l_mpmath

T = 300.0
XI1 = matsubara_frequency(1, T)


# -- Phi and the zero-temperature tensor ---------------------------------------


def test_phi_gapless_is_pi_q():
    assert phi(2.5e6, 0.0) == math.pi * 2.5e6


@pytest.mark.parametrize("ratio", [1e-6, 1e-4, 1e-3, 0.0499, 0.0501, 0.1, 0.5, 1.0, 3.0, 100.0])
def test_phi_against_mpmath(ratio):
    p = GrapheneParams(delta=0.1)
    m = p.gap_wavenumber
    q = 2 * m * ratio
    assert phi(q, p.delta_joule) == pytest.approx(phi_mpmath(q, m), rel=1e-13)


def test_phi_small_argument_limit():
    p = GrapheneParams(delta=0.2)
    m = p.gap_wavenumber
    q = 1e-6 * m
    # 4 hbar q^2 / (3 c Delta) in wave-number form
    assert phi(q, p.delta_joule) == pytest.approx(4 * q * q / (3 * m), rel=1e-10)


def test_phi_threshold_value():
    p = GrapheneParams(delta=0.1)
    m = p.gap_wavenumber
    assert phi(2 * m, p.delta_joule) == pytest.approx(4 * m, rel=1e-15)


def test_phi_domain():
    with pytest.raises(DomainError):
        phi(0.0, 0.0)
    with pytest.raises(DomainError):
        phi(-1.0, 0.0)


def test_zero_temperature_static_gapless(gapless):
    K = 3e7
    pt = pol_zero_temperature(0.0, K, gapless)
    assert pt.pi00_over_hbar == pytest.approx(gapless.alpha * math.pi / gapless.vf_ratio * K, rel=1e-14)
    assert pt.pi_over_hbar == pytest.approx(gapless.alpha * K * K * math.pi * gapless.vf_ratio * K, rel=1e-14)


def test_zero_temperature_structure():
    p = GrapheneParams(delta=0.05)
    xi, k = 2e14, 1e7
    pt = pol_zero_temperature(xi, k, p)
    qt2 = (p.vf_ratio * k) ** 2 + (xi / CONSTANTS.c) ** 2
    assert pt.pi_over_hbar / pt.pi00_over_hbar == pytest.approx(qt2, rel=1e-14)
    with pytest.raises(DomainError):
        pol_zero_temperature(-1.0, k, p)


# -- thermal correction ----------------------------------------------------------


GRID_L = [0, 1, 2, 5, 10]
GRID_K = [1e6, 3e6, 1e7, 1e8, 1e9]


@pytest.mark.slow
@pytest.mark.parametrize("delta", [0.0, 0.1])
def test_thermal_correction_matches_bruteforce_grid(delta):
    p = GrapheneParams(delta=delta)
    worst = 0.0
    for l in GRID_L:
        for k in GRID_K:
            ref = thermal_correction_bruteforce(l, k, T, p)
            got = thermal_correction(matsubara_frequency(l, T), k, T, p, l=l)
            worst = max(worst, abs(got.pi00_over_hbar / ref[0] - 1), abs(got.pi_over_hbar / ref[1] - 1))
    assert worst < 1e-8


@pytest.mark.parametrize(
    "l,k,delta", [(0, 1e6, 0.0), (1, 1e5, 0.0), (20, 1e5, 0.0), (3, 5e7, 0.1), (0, 1e6, 0.1), (1, 1e9, 0.0)]
)
def test_thermal_correction_matches_mpmath(l, k, delta):
    p = GrapheneParams(delta=delta)
    ref = thermal_correction_mpmath(l, k, T, p)
    got = thermal_correction(matsubara_frequency(l, T), k, T, p)
    assert got.pi00_over_hbar == pytest.approx(ref[0], rel=1e-11)
    assert got.pi_over_hbar == pytest.approx(ref[1], rel=1e-11)


def test_vectorized_and_scalar_routes_agree():
    p = GrapheneParams(delta=0.1)
    ls = np.array([0, 0, 1, 3, 7])
    ks = np.array([1e5, 1e6, 2e6, 4e7, 3e8])
    xi = matsubara_frequency(ls, T)
    a00, api = thermal_correction_arrays(xi, ks, T, p)
    for i in range(len(ls)):
        s = thermal_correction(xi[i], ks[i], T, p)
        assert a00[i] == pytest.approx(s.pi00_over_hbar, rel=1e-9)
        assert api[i] == pytest.approx(s.pi_over_hbar, rel=1e-9)


def test_vectorized_results_independent_of_batch(gapless):
    ks = np.geomspace(1e5, 1e9, 9)
    xi = np.full_like(ks, XI1)
    full = thermal_correction_arrays(xi, ks, T, gapless)
    for i in (0, 4, 8):
        single = thermal_correction_arrays(xi[i : i + 1], ks[i : i + 1], T, gapless)
        assert single[0][0] == full[0][i] and single[1][0] == full[1][i]


def test_thermal_correction_vanishes_at_low_temperature(gapless):
    k = 1e8
    xi = 1e15
    hot = thermal_correction(xi, k, 300.0, gapless).pi00_over_hbar
    cold = thermal_correction(xi, k, 3.0, gapless).pi00_over_hbar
    assert abs(cold) < 1e-3 * abs(hot)


def test_thermal_correction_domain(gapless):
    with pytest.raises(DomainError):
        thermal_correction(XI1, 1e6, 0.0, gapless)
    with pytest.raises(DomainError):
        thermal_correction(-1.0, 1e6, T, gapless)


def test_fig1_point_close_to_asymptotic(gapless):
    k = 10 * XI1 / CONSTANTS.c
    exact = thermal_correction(XI1, k, T, gapless).pi00_over_hbar
    asym = thermal_correction_asymptotic(1, k, T, gapless).pi00_over_hbar
    assert abs(exact / asym - 1) < small_parameter(1, k, T, gapless)


# -- asymptotic form ---------------------------------------------------------------


def test_y_l_values():
    assert y_l(1) == pytest.approx(0.128676854, abs=1e-9)
    assert y_l(2) == pytest.approx(0.023096918, abs=1e-9)


@pytest.mark.parametrize("l", [1, 2, 3, 7, 20, 100])
def test_y_l_against_mpmath(l):
    assert y_l(l) == pytest.approx(y_l_mpmath(l), rel=1e-10)


def test_y_l_decreasing_and_domain():
    ys = [y_l(l) for l in range(1, 30)]
    assert all(a > b > 0 for a, b in zip(ys, ys[1:]))
    for bad in (0, -1, 1.5):
        with pytest.raises(DomainError):
            y_l(bad)


def test_asymptotic_structure(gapless):
    k = 4e6
    pt = thermal_correction_asymptotic(3, k, T, gapless)
    qt2 = (gapless.vf_ratio * k) ** 2 + (3 * XI1 / CONSTANTS.c) ** 2
    assert pt.pi_over_hbar / pt.pi00_over_hbar == pytest.approx(qt2, rel=1e-14)
    with pytest.raises(DomainError):
        thermal_correction_asymptotic(0, k, T, gapless)
    with pytest.raises(UnsupportedConfigurationError):
        thermal_correction_asymptotic(1, k, T, GrapheneParams(delta=0.1))


def test_exact_vs_asymptotic_at_50nm(gapless):
    k = 1 / (2 * 50e-9)
    exact = thermal_correction(XI1, k, T, gapless)
    asym = thermal_correction_asymptotic(1, k, T, gapless)
    full_e = pol_tensor(1, k, T, gapless, "exact")
    full_a = pol_tensor(1, k, T, gapless, "asymptotic")
    assert abs(full_a.pi00_over_hbar / full_e.pi00_over_hbar - 1) < 0.01
    assert abs(asym.pi00_over_hbar / exact.pi00_over_hbar - 1) < 5 * small_parameter(1, k, T, gapless)


def test_small_parameter(gapless):
    ks = np.geomspace(1e5, 1e10, 20)
    vals = small_parameter(1, ks, T, gapless)
    assert np.all(np.diff(vals) > 0)
    assert np.all(vals < 4.0)
    with pytest.raises(DomainError):
        small_parameter(0, 1e6, T, gapless)


# -- dispatch ----------------------------------------------------------------------


def test_pol_tensor_methods(gapless):
    k = 2e7
    zero = pol_zero_temperature(XI1, k, gapless)
    dt = thermal_correction(XI1, k, T, gapless)
    exact = pol_tensor(1, k, T, gapless, EvaluationMethod.EXACT)
    assert exact.pi00_over_hbar == pytest.approx(zero.pi00_over_hbar + dt.pi00_over_hbar, rel=1e-12)
    zt = pol_tensor(1, k, T, gapless, "zero_t_tensor")
    assert zt.pi00_over_hbar == zero.pi00_over_hbar
    # every thermal method keeps the exact correction at l = 0
    e0 = pol_tensor(0, k, T, gapless, "exact")
    for m in ("asymptotic", "zero_t_tensor"):
        assert pol_tensor(0, k, T, gapless, m).pi00_over_hbar == pytest.approx(e0.pi00_over_hbar, rel=1e-12)
    assert pol_tensor(0, k, T, gapless, "zero_temperature").pi00_over_hbar == pytest.approx(
        pol_zero_temperature(0.0, k, gapless).pi00_over_hbar
    )


def test_pol_tensor_asymptotic_needs_gapless():
    with pytest.raises(UnsupportedConfigurationError):
        pol_tensor(1, 1e7, T, GrapheneParams(delta=0.1), "asymptotic")


def test_multi_matches_single(gapless):
    ls = np.array([0, 1, 2, 5])
    ks = np.array([1e6, 1e7, 1e7, 1e8])
    xi = matsubara_frequency(ls, T)
    methods = list(EvaluationMethod)
    multi = pol_tensor_multi(xi, ks, T, gapless, methods, ls)
    for m in methods:
        single = pol_tensor_multi(xi, ks, T, gapless, [m], ls)[m]
        np.testing.assert_array_equal(multi[m][0], single[0])
        np.testing.assert_array_equal(multi[m][1], single[1])


def test_method_parse():
    assert EvaluationMethod.parse("EXACT") is EvaluationMethod.EXACT
    assert EvaluationMethod.parse("asymptotic_l_ge_1") is EvaluationMethod.ASYMPTOTIC_L_GE_1
    with pytest.raises(ValueError):
        EvaluationMethod.parse("magic")
