"""
Tests for the lossless scan, branch linking, lossy Newton solve, continuation and rho calibration
"""

import logging
import math

import pytest
from pydantic import ValidationError

from .core import MediumConfig, WaveCoordinates, WavePoint
from .dispersion import admissibility, homogeneous_k_hat, impedance_residual, residual
from .errors import CurveTerminated, ModeMisuse, SurfaceWaveError
from .solver import (
    ROOT_TOL,
    LossyCurvePoint,
    ScanGrid,
    _predict,
    branch_points,
    calibrate_rho,
    continue_in_gamma,
    link_branches,
    refine_in_omega,
    refine_root,
    scan_lossless,
    solve_lossy_point,
)
from .validation import fixture_root, homogeneous_fixture

# the closed-form branch spans the whole frequency range
HOMOGENEOUS_GRID = ScanGrid(k_hat_range=(2.0, 6.0, 60), omega_hat_range=(1.02, 1.25, 100))

# lossless-branch point used to start the lossy solves
LOSSLESS_SEED = WaveCoordinates(2.7528, 1.0437)


def _point(k_hat: float, omega_hat: float) -> WavePoint:
    return WavePoint(
        k_hat=k_hat,
        omega_hat=omega_hat,
        residual=0j,
        scaled_residual=0.0,
        decay_lorentz=True,
        decay_stratified=True,
        multiplier=0.5,
    )


def _assert_root(cfg: MediumConfig, point: LossyCurvePoint) -> None:
    lossy = cfg.with_loss(point.loss_ratio)
    assert abs(residual(lossy, point.wave).scaled.real) < ROOT_TOL
    assert point.newton_residual < 2 * ROOT_TOL
    assert admissibility(lossy, point.wave).admissible


def test_grid_validation():
    with pytest.raises(ValidationError):
        ScanGrid(k_hat_range=(0.1, 1.0, 1))
    with pytest.raises(ValidationError):
        ScanGrid(omega_hat_range=(0.0, 1.0, 10))
    with pytest.raises(ValidationError):
        ScanGrid(omega_hat_range=(2.0, 1.0, 10))
    grid = ScanGrid(k_hat_range=(1.0, 2.0, 11))
    assert grid.k_step == pytest.approx(0.1)
    assert len(grid.k_values()) == 11


def test_lossless_scan_refuses_loss():
    with pytest.raises(ModeMisuse):
        scan_lossless(MediumConfig().with_loss(0.1), HOMOGENEOUS_GRID)


def test_homogeneous_scan_finds_the_closed_form_branch():
    cfg = homogeneous_fixture()
    branches = scan_lossless(cfg, HOMOGENEOUS_GRID, workers=1)
    assert len(branches) == 1
    branch = branches[0]
    assert len(branch.points) >= 100
    for point in branch.points:
        assert point.admissible
        assert point.scaled_residual < 1e-9
        assert point.k_hat == pytest.approx(homogeneous_k_hat(cfg, point.omega_hat), abs=1e-8)
    omegas = [p.omega_hat for p in branch.points]
    assert omegas == sorted(omegas)
    assert branch.cuton[1] == pytest.approx(1.02)


def test_scan_is_reproducible_with_workers():
    cfg = homogeneous_fixture()
    grid = ScanGrid(k_hat_range=(2.0, 6.0, 40), omega_hat_range=(1.05, 1.15, 6))
    serial = branch_points(scan_lossless(cfg, grid, workers=1))
    parallel = branch_points(scan_lossless(cfg, grid, workers=2))
    assert [(b, p.k_hat, p.omega_hat) for b, p in serial] == [(b, p.k_hat, p.omega_hat) for b, p in parallel]


def test_refine_root_without_sign_change():
    cfg = homogeneous_fixture()
    k_closed = homogeneous_k_hat(cfg, 1.1)
    assert refine_root(cfg, 1.1, k_closed + 0.5, k_closed + 0.6) is None
    point = refine_root(cfg, 1.1, k_closed - 0.05, k_closed + 0.05)
    assert point is not None
    assert point.k_hat == pytest.approx(k_closed, abs=1e-10)


def test_flat_branch_stays_in_one_piece():
    # the branch crosses about a dozen k_hat cells per frequency column
    cfg = homogeneous_fixture()
    grid = ScanGrid(k_hat_range=(2.0, 6.0, 200), omega_hat_range=(1.02, 1.25, 12))
    branches = scan_lossless(cfg, grid, workers=1)
    assert len(branches) == 1
    points = branches[0].points
    assert len(points) > 100
    for point in points:
        assert point.k_hat == pytest.approx(homogeneous_k_hat(cfg, point.omega_hat), abs=1e-8)


def test_scan_roots_do_not_depend_on_the_grid():
    cfg = homogeneous_fixture()
    coarse = ScanGrid(k_hat_range=(2.0, 6.0, 30), omega_hat_range=(1.02, 1.25, 20))
    fine = ScanGrid(k_hat_range=(2.0, 6.0, 59), omega_hat_range=(1.02, 1.25, 39))
    coarse_branches = scan_lossless(cfg, coarse, workers=1)
    fine_branches = scan_lossless(cfg, fine, workers=1)
    assert len(coarse_branches) == len(fine_branches) == 1

    fine_points = fine_branches[0].points
    for p in coarse_branches[0].points:
        # every coarse grid line is also a fine grid line
        shared = [
            q
            for q in fine_points
            if abs(q.k_hat - p.k_hat) < 1e-12 * p.k_hat or abs(q.omega_hat - p.omega_hat) < 1e-12 * p.omega_hat
        ]
        assert shared
        assert min(max(abs(q.k_hat - p.k_hat), abs(q.omega_hat - p.omega_hat)) for q in shared) < 1e-8


def test_row_refinement_solves_in_omega():
    cfg = homogeneous_fixture()
    k_closed = homogeneous_k_hat(cfg, 1.1)
    point = refine_in_omega(cfg, k_closed, 1.05, 1.15)
    assert point is not None
    assert point.omega_hat == pytest.approx(1.1, abs=1e-10)
    assert refine_in_omega(cfg, k_closed, 1.15, 1.2) is None


def test_link_branches_joins_neighbouring_cells_only():
    points = [
        _point(1.0, 1.0),
        _point(1.1, 1.05),
        _point(1.15, 1.1),
        _point(3.0, 1.0),
        _point(3.0, 1.5),
    ]
    branches = link_branches(points, k_step=0.1, omega_step=0.1)
    assert [len(b.points) for b in branches] == [3, 1, 1]
    first = branches[0]
    assert [p.k_hat for p in first.points] == [1.0, 1.1, 1.15]
    assert first.cuton == (1.0, 1.0)
    assert [b.cuton for b in branches[1:]] == [(3.0, 1.0), (3.0, 1.5)]
    assert [b.branch_id for b in branches] == [0, 1, 2]


def test_link_branches_gate_is_one_cell():
    assert len(link_branches([_point(1.0, 1.0), _point(1.1, 1.1)], 0.1, 0.1)) == 1
    assert len(link_branches([_point(1.0, 1.0), _point(1.25, 1.05)], 0.1, 0.1)) == 2
    assert link_branches([], 0.1, 0.1) == []


def test_lossy_solve_converges_from_a_lossless_seed():
    cfg = MediumConfig()
    point = solve_lossy_point(cfg, 0.1, LOSSLESS_SEED)
    assert point.k_hat == pytest.approx(2.3722678, abs=1e-5)
    assert point.omega_hat == pytest.approx(0.9743126, abs=1e-5)
    _assert_root(cfg, point)


def test_lossy_solve_falls_back_to_hybr(caplog):
    cfg = MediumConfig()
    reference = solve_lossy_point(cfg, 0.1, LOSSLESS_SEED)
    with caplog.at_level(logging.DEBUG, logger="surface_waves.solver"):
        point = solve_lossy_point(cfg, 0.1, WaveCoordinates(2.38, 0.975), max_iter=1)
    assert "retrying with hybr" in caplog.text
    assert point.k_hat == pytest.approx(reference.k_hat, abs=1e-8)
    assert point.omega_hat == pytest.approx(reference.omega_hat, abs=1e-8)
    _assert_root(cfg, point)


def test_lossless_solve_keeps_a_root_seed():
    cfg = homogeneous_fixture()
    seed = fixture_root(cfg, 1.1)
    point = solve_lossy_point(cfg, 0.0, seed)
    assert point.iterations == 0
    assert point.wave == seed


def test_homogeneous_layers_have_no_lossy_root():
    # Im of the bracket cannot vanish at real phase velocity once Gamma > 0
    cfg = homogeneous_fixture()
    seed = fixture_root(cfg, 1.1)
    for loss in (1e-12, 1e-3):
        with pytest.raises(SurfaceWaveError):
            solve_lossy_point(cfg, loss, seed)


def test_short_continuation_moves_and_stays_on_roots():
    cfg = MediumConfig()
    points = continue_in_gamma(cfg, (-1.0, -2.0, 5), LOSSLESS_SEED)
    assert [p.log10_gamma for p in points] == pytest.approx([-1.0, -1.25, -1.5, -1.75, -2.0])
    for p in points:
        _assert_root(cfg, p)
    assert abs(points[-1].k_hat - points[0].k_hat) > 1e-3


@pytest.mark.slow
def test_continuation_to_vanishing_loss_lands_on_the_lossless_branch():
    cfg = MediumConfig()
    down = continue_in_gamma(cfg, (-1.0, -15.0, 57), LOSSLESS_SEED)
    assert down[-1].log10_gamma == pytest.approx(-15.0)
    for p in down:
        _assert_root(cfg, p)

    end = down[-1]
    lossless = refine_root(cfg, end.omega_hat, end.k_hat - 0.01, end.k_hat + 0.01)
    assert lossless is not None
    assert end.k_hat == pytest.approx(lossless.k_hat, abs=1e-6)

    # the same curve walked back up returns to the starting root
    up = continue_in_gamma(cfg, (-15.0, -1.0, 57), end.wave)
    assert up[-1].k_hat == pytest.approx(down[0].k_hat, abs=1e-6)
    assert up[-1].omega_hat == pytest.approx(down[0].omega_hat, abs=1e-6)


@pytest.mark.slow
def test_continuation_toward_large_loss_emits_only_roots():
    cfg = MediumConfig()
    try:
        points = continue_in_gamma(cfg, (-1.0, 15.0, 65), LOSSLESS_SEED)
    except CurveTerminated as e:
        points = e.points
    assert points
    for p in points:
        _assert_root(cfg, p)


def test_continuation_stops_on_a_bad_seed():
    cfg = MediumConfig(lorentz={"plasma_ratio": 0.0})
    with pytest.raises(CurveTerminated) as excinfo:
        continue_in_gamma(cfg, (-3.0, -1.0, 3), WaveCoordinates(1.0, 1.0))
    assert excinfo.value.points == []
    assert excinfo.value.last_log_gamma is None


def test_predictor_extrapolates_linearly():
    points = [
        LossyCurvePoint(loss_ratio=1e-3, omega_hat=1.0, k_hat=2.0, newton_residual=0.0),
        LossyCurvePoint(loss_ratio=1e-2, omega_hat=1.1, k_hat=2.5, newton_residual=0.0),
    ]
    guess = _predict(points, -1.0)
    assert guess.k_hat == pytest.approx(3.0)
    assert guess.omega_hat == pytest.approx(1.2)
    assert _predict(points[:1], -1.0) == points[0].wave


def test_calibrated_rho_solves_the_wall_problem():
    cfg = MediumConfig()
    target = 0.526
    for rho in calibrate_rho(cfg, target, samples=120):
        scaled = cfg.model_copy(update={"rho": rho})
        value = impedance_residual(scaled, WaveCoordinates(target, 1.0), 0j)
        assert abs(value.scaled) < 1e-9
        assert rho > 0.0


def test_branch_points_flatten_in_order():
    columns = [[_point(1.0, 1.0), _point(3.0, 1.0)], [_point(1.05, 1.1), _point(3.05, 1.1)]]
    rows = branch_points(link_branches(columns, 0.1, 0.1))
    assert [branch_id for branch_id, _ in rows] == [0, 0, 1, 1]
    assert math.isclose(rows[-1][1].k_hat, 3.05)
