import math

import pytest

from . import lorentz
from .core import LayerParams, LorentzParams, MediumConfig, Polarization, WaveCoordinates, restore_value
from .dispersion import (
    admissibility,
    babich_limit,
    boundary_ratio,
    homogeneous_dispersion,
    homogeneous_factor,
    homogeneous_k_hat,
    homogeneous_loss,
    homogeneous_phase_velocity_squared,
    homogeneous_required_permittivity,
    impedance_residual,
    multiplier,
    residual,
)
from .errors import DegenerateDenominator, ModeMisuse, PoleEncountered
from .transfer import monodromy_closed_form, monodromy_closed_form_scaled
from .validation import (
    check_babich_order,
    check_eigen_consistency,
    check_homogeneous_roots,
    check_residual_symmetries,
    fixture_root,
    homogeneous_fixture,
    perturbed_fixture,
)

LAYER = LayerParams(eps_rel=5.0)


def test_te_closed_form_reduces_to_inverse_sum():
    cfg = homogeneous_fixture()
    eps_l = lorentz.permittivity(cfg.lorentz, 1.1).value
    assert homogeneous_dispersion(cfg, 1.1) == pytest.approx(1 / 5.0 + 1 / eps_l)


def test_closed_form_needs_a_negative_enough_permittivity():
    assert homogeneous_phase_velocity_squared(LAYER, -2.0, 1.0).real < 0.0
    assert homogeneous_phase_velocity_squared(LAYER, -20.0, 1.0).real == pytest.approx(0.15)


def test_tm_closed_form_without_magnetic_contrast():
    assert homogeneous_phase_velocity_squared(LAYER, -20.0, 1.0, Polarization.TM) == 0.0


def test_closed_form_degenerate_denominator():
    with pytest.raises(DegenerateDenominator):
        homogeneous_phase_velocity_squared(LAYER, 5.0, 1.0)


def test_homogeneous_relations_need_equal_layers():
    with pytest.raises(ModeMisuse):
        homogeneous_dispersion(MediumConfig(), 1.1)
    with pytest.raises(ModeMisuse):
        homogeneous_factor(MediumConfig(), WaveCoordinates(3.0, 1.1))


def test_homogeneous_k_hat_below_resonance_is_none():
    # -5 < eps_L < 0 gives a negative v_hat^2
    assert homogeneous_k_hat(homogeneous_fixture(), 1.4) is None


def test_required_permittivity_roots():
    roots = homogeneous_required_permittivity(LAYER, 1.0, math.sqrt(0.15))
    assert roots == pytest.approx((-20.0, 5.0))


def test_homogeneous_loss_recovers_gamma():
    lp = LorentzParams(loss_ratio=0.3)
    eps_l = lorentz.permittivity(lp, 1.1).value
    assert homogeneous_loss(lp, 1.1, eps_l) == pytest.approx(0.3)
    assert homogeneous_loss(lp, 1.1, complex(eps_l.real + 1.0, eps_l.imag)) is None
    assert homogeneous_loss(LorentzParams(plasma_ratio=0.0), 1.1, -3.0) is None


def test_babich_limit_approaches_closed_form():
    exact = math.sqrt(homogeneous_phase_velocity_squared(LAYER, -1e4, 1.0).real)
    assert babich_limit(LAYER, -1e4, 1.0) == pytest.approx(exact, rel=1e-6)
    assert check_babich_order().passed


def test_residual_is_minus_homogeneous_factor():
    cfg = homogeneous_fixture()
    for w in (WaveCoordinates(3.0, 1.1), WaveCoordinates(1.5, 1.2), WaveCoordinates(4.0, 0.6)):
        value = residual(cfg, w)
        assert value.value == pytest.approx(-homogeneous_factor(cfg, w), rel=1e-12)


def test_homogeneous_roots_match_closed_form():
    assert check_homogeneous_roots(points=10).passed
    cfg = homogeneous_fixture()
    root = fixture_root(cfg, 1.1)
    assert root.k_hat == pytest.approx(homogeneous_k_hat(cfg, 1.1), abs=1e-8)


def test_residual_pole_at_chi_a():
    # eps_A = 4, k = 2, Omega = 1 puts chi_A exactly on zero
    cfg = MediumConfig(layer_a=LayerParams(eps_rel=4.0), lorentz=LorentzParams(loss_ratio=0.1))
    with pytest.raises(PoleEncountered) as excinfo:
        residual(cfg, WaveCoordinates(2.0, 1.0))
    assert excinfo.value.denominator == "chi_A"


def test_residual_pole_at_chi_l():
    cfg = MediumConfig(lorentz=LorentzParams(plasma_ratio=0.0))
    with pytest.raises(PoleEncountered) as excinfo:
        residual(cfg, WaveCoordinates(1.0, 1.0))
    assert excinfo.value.denominator == "chi_L"


def test_impedance_form_is_regular_where_residual_has_poles():
    cfg = MediumConfig(layer_a=LayerParams(eps_rel=4.0), lorentz=LorentzParams(loss_ratio=0.1))
    w = WaveCoordinates(2.0, 1.0)
    value = impedance_residual(cfg, w, boundary_ratio(cfg, w))
    assert math.isfinite(abs(value.value))
    wall = impedance_residual(cfg, w, 0j)
    assert math.isfinite(abs(wall.value))


def test_impedance_form_equals_scaled_residual():
    for polarization in (Polarization.TE, Polarization.TM):
        cfg = MediumConfig(polarization=polarization, lorentz=LorentzParams(loss_ratio=0.05))
        w = WaveCoordinates(3.2, 1.15)
        zeta = boundary_ratio(cfg, w)
        direct = residual(cfg, w)
        via_impedance = impedance_residual(cfg, w, zeta)
        assert via_impedance.value == pytest.approx(-zeta * direct.value, rel=1e-11)


def test_residual_symmetries():
    assert check_residual_symmetries(samples=100).passed


def test_residual_is_even_in_layer_factors():
    cfg = perturbed_fixture().with_loss(0.02)
    w = WaveCoordinates(2.9, 1.1)
    base = residual(cfg, w)
    flipped_a = residual(cfg, w, chi_a=-base.chi_a)
    assert flipped_a.value == pytest.approx(base.value, rel=1e-13, abs=1e-13 * base.scale)


def test_scaled_residual_survives_large_arguments():
    cfg = MediumConfig()
    value = residual(cfg, WaveCoordinates(2000.0, 0.1))
    assert math.isfinite(abs(value.scaled))
    assert abs(value.scaled) <= 6.0
    assert math.isinf(value.scale)


def test_admissibility_far_below_the_light_line_does_not_overflow():
    cfg = MediumConfig()
    adm = admissibility(cfg, WaveCoordinates(2000.0, 0.1))
    assert adm.decay_lorentz
    assert not adm.decay_stratified
    assert math.isinf(abs(adm.multiplier))


def test_multiplier_with_large_phases_matches_scaled_monodromy():
    cfg = MediumConfig()
    w = WaveCoordinates(650.0, 0.5)
    matrix, shift = monodromy_closed_form_scaled(cfg, w)
    v = (-1j * boundary_ratio(cfg, w), 1.0 + 0j)
    expected = restore_value(matrix.apply(v)[1], shift)
    assert math.isfinite(abs(expected))
    assert multiplier(cfg, w) == pytest.approx(expected, rel=1e-12)


def test_homogeneous_factor_with_large_phases_is_finite():
    cfg = homogeneous_fixture()
    w = WaveCoordinates(500.0, 1.1)
    factor = homogeneous_factor(cfg, w)
    assert math.isfinite(abs(factor))
    assert residual(cfg, w).value == pytest.approx(-factor, rel=1e-10)


def test_inadmissible_root_on_the_lorentz_light_line():
    layer = LayerParams(eps_rel=4.0)
    cfg = MediumConfig(layer_a=layer, layer_b=layer, lorentz=LorentzParams(plasma_ratio=0.0))
    w = WaveCoordinates(1.0, math.sqrt(1.25))
    assert abs(residual(cfg, w).scaled) < 1e-12
    adm = admissibility(cfg, w)
    assert not adm.decay_lorentz
    assert not adm.admissible


def test_fixture_roots_are_admissible():
    for cfg in (homogeneous_fixture(), perturbed_fixture()):
        w = fixture_root(cfg, 1.1)
        adm = admissibility(cfg, w)
        assert adm.admissible
        assert abs(adm.multiplier) < 1.0
        assert adm.alpha_l.real > 0.0


def test_multiplier_is_the_decaying_eigenvalue():
    assert check_eigen_consistency(points=4).passed


def test_multiplier_is_second_component_of_transported_boundary_vector():
    cfg = perturbed_fixture().with_loss(0.05)
    w = WaveCoordinates(2.7, 1.12)
    v = (-1j * boundary_ratio(cfg, w), 1.0 + 0j)
    transported = monodromy_closed_form(cfg, w).apply(v)
    assert multiplier(cfg, w) == pytest.approx(transported[1], rel=1e-12)
