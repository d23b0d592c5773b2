import math

import pytest
from scipy.special import zeta

from casimir_graphene import (
    CONSTANTS,
    IDEAL_METAL,
    DomainError,
    EvaluationMethod,
    GrapheneParams,
    LayerStack,
    force_gradient_sphere_plate,
    free_energy,
    pressure,
    pressure_relative_difference,
    thermal_decomposition,
)
from casimir_graphene.lifshitz import (
    classical_limit_pressure,
    compute,
    decomposition_from,
    relative_differences,
)
from casimir_graphene.materials import load_materials
from oracles import zero_t_gapless_pressure

E = EvaluationMethod
T = 300.0
METAL = LayerStack(substrate=IDEAL_METAL)
MATS = load_materials()


def casimir_ideal(a):
    return -math.pi**2 * CONSTANTS.hbar * CONSTANTS.c / (240 * a**4)


def test_ideal_metals_zero_temperature():
    for a in (50e-9, 1e-6):
        p = compute(a, T, METAL, METAL, [E.ZERO_TEMPERATURE])[E.ZERO_TEMPERATURE]
        assert p.pressure == pytest.approx(casimir_ideal(a), rel=1e-9)
        assert p.free_energy_per_area == pytest.approx(casimir_ideal(a) * a / 3, rel=1e-9)


def test_ideal_metals_low_temperature_approach_zero_temperature():
    res = pressure(200e-9, 30.0, METAL, METAL)
    assert res.pressure == pytest.approx(casimir_ideal(200e-9), rel=1e-6)


def test_ideal_metals_classical_limit():
    # both polarizations reflect fully at l = 0: |P|/B = 2 zeta(3)
    a, hot = 5e-6, 3000.0
    res = pressure(a, hot, METAL, METAL)
    assert res.pressure == pytest.approx(classical_limit_pressure(a, hot, ideal_metals=True), rel=1e-10)
    b = CONSTANTS.k_B * hot / (8 * math.pi * a**3)
    assert abs(res.pressure) / b == pytest.approx(2 * zeta(3), rel=1e-10)
    # at room temperature the l >= 1 terms still add about 2 %
    res = pressure(a, T, METAL, METAL)
    ratio = abs(res.pressure) / (CONSTANTS.k_B * T / (8 * math.pi * a**3))
    assert 2 * zeta(3) < ratio < 1.03 * 2 * zeta(3)


@pytest.mark.parametrize("a", [30e-9, 100e-9, 1e-6])
def test_graphene_zero_temperature_against_polylog(gapless, sheet, a):
    got = compute(a, T, sheet, sheet, [E.ZERO_TEMPERATURE])[E.ZERO_TEMPERATURE].pressure
    assert got == pytest.approx(zero_t_gapless_pressure(a, gapless.vf_ratio, gapless.alpha), rel=1e-8)


@pytest.mark.slow
@pytest.mark.parametrize(
    "a,bodies",
    [
        (50e-9, "sheets"),
        (200e-9, "sheets"),
        (300e-9, "experiment"),
        (1e-6, "metal_plate"),
    ],
)
def test_pressure_is_minus_free_energy_derivative(sheet, a, bodies):
    gapped = GrapheneParams(delta=0.1)
    plate = LayerStack(graphene=gapped, films=((MATS["SiO2"], 300e-9),), substrate=MATS["Si_B_doped"])
    b1, b2 = {
        "sheets": (sheet, sheet),
        "experiment": (LayerStack(substrate=MATS["Au"]), plate),
        "metal_plate": (LayerStack(substrate=MATS["Au"]), LayerStack(graphene=gapped, substrate=MATS["Si"])),
    }[bodies]
    h = 1e-3 * a
    fp = free_energy(a + h, T, b1, b2).free_energy_per_area
    fm = free_energy(a - h, T, b1, b2).free_energy_per_area
    p = pressure(a, T, b1, b2).pressure
    assert -(fp - fm) / (2 * h) == pytest.approx(p, rel=1e-4)


def test_vacuum_body_gives_zero(sheet):
    res = pressure(100e-9, T, sheet, LayerStack())
    assert res.pressure == 0.0 and res.free_energy_per_area == 0.0
    res = compute(100e-9, T, LayerStack(), sheet, [E.ZERO_TEMPERATURE])[E.ZERO_TEMPERATURE]
    assert res.pressure == 0.0


def test_result_diagnostics(sheet):
    res = pressure(200e-9, T, sheet, sheet)
    assert res.pressure < 0 and res.free_energy_per_area < 0
    assert res.l_max_used >= 10 and res.separation == 200e-9 and res.temperature == T
    ls = [t[0] for t in res.per_l_terms]
    assert ls == list(range(len(ls)))
    assert math.fsum(t[1] for t in res.per_l_terms) == pytest.approx(res.pressure, rel=1e-12)
    assert res.quadrature_diagnostics["evaluations"] > 0
    # the tail stops once a block adds less than 1e-10 of the running sum
    assert abs(res.per_l_terms[-1][2]) < 1e-10


def test_threads_are_bitwise_deterministic(sheet):
    ms = [E.EXACT, E.ASYMPTOTIC_L_GE_1, E.ZERO_T_TENSOR_AT_MATSUBARA]
    one = compute(150e-9, T, sheet, sheet, ms, threads=1)
    four = compute(150e-9, T, sheet, sheet, ms, threads=4)
    for m in ms:
        assert one[m].pressure == four[m].pressure
        assert one[m].free_energy_per_area == four[m].free_energy_per_area


def test_shared_methods_match_single_runs(sheet):
    ms = [E.EXACT, E.ASYMPTOTIC_L_GE_1]
    both = compute(120e-9, T, sheet, sheet, ms)
    for m in ms:
        assert both[m].pressure == pytest.approx(pressure(120e-9, T, sheet, sheet, m).pressure, rel=1e-7)


def test_relative_differences(sheet):
    d1, d2 = relative_differences(100e-9, T)
    assert d1 == pytest.approx(pressure_relative_difference(100e-9, T, "asymptotic"), rel=1e-6)
    assert d1 < 0 < d2
    with pytest.raises(DomainError):
        pressure_relative_difference(100e-9, T, E.EXACT)


def test_thermal_decomposition(sheet):
    d = thermal_decomposition(300e-9, T, sheet, sheet)
    assert d.total_effect == pytest.approx(d.explicit_effect + d.implicit_effect, rel=1e-12)
    assert abs(d.pressure_T0) <= abs(d.pressure_implicit_only) <= abs(d.total_pressure)
    e = thermal_decomposition(300e-9, T, sheet, sheet, static_term="exact")
    assert e.total_pressure == pytest.approx(d.total_pressure, rel=1e-9)
    assert abs(e.pressure_implicit_only) > abs(d.pressure_implicit_only)
    with pytest.raises(DomainError):
        thermal_decomposition(300e-9, T, sheet, sheet, static_term="both")
    x = decomposition_from(-3.0, -2.0, -1.5)
    assert (x.explicit_effect, x.implicit_effect, x.total_effect) == (-1.0, -0.5, -1.5)


def test_sphere_plate_gradient(sheet):
    au = LayerStack(substrate=MATS["Au"])
    g = force_gradient_sphere_plate(300e-9, T, 50e-6, au, sheet)
    p = pressure(300e-9, T, au, sheet).pressure
    assert g == pytest.approx(-2 * math.pi * 50e-6 * p, rel=1e-14) and g > 0
    with pytest.warns(UserWarning, match="proximity"):
        force_gradient_sphere_plate(300e-9, T, 10e-6, au, sheet)
    with pytest.raises(DomainError):
        force_gradient_sphere_plate(300e-9, T, 0.0, au, sheet)


@pytest.mark.parametrize("a,temp", [(0.0, T), (-1e-9, T), (1e-7, 0.0)])
def test_domain(sheet, a, temp):
    with pytest.raises(DomainError):
        pressure(a, temp, sheet, sheet)


def test_gapped_sheets_attract_less(sheet):
    gapped = LayerStack(graphene=GrapheneParams(delta=0.1))
    assert abs(pressure(100e-9, T, gapped, gapped).pressure) < abs(pressure(100e-9, T, sheet, sheet).pressure)


def test_asymptotic_rejects_gap():
    from casimir_graphene.core import UnsupportedConfigurationError

    gapped = LayerStack(graphene=GrapheneParams(delta=0.1))
    with pytest.raises(UnsupportedConfigurationError):
        pressure(100e-9, T, gapped, gapped, E.ASYMPTOTIC_L_GE_1)
