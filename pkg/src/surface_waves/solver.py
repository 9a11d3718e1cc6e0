"""
Root finding on the dispersion residual.

- scan_lossless: sign changes of the real scaled residual along both grid
  directions, refined by bisection and grouped into connected branches
- solve_lossy_point: damped Newton (hybr fallback) on Re and loss-weighted Im
  of the scaled residual in (k_hat, Omega)
- continue_in_gamma: predictor-corrector continuation on a log10(Gamma) grid
- calibrate_rho: rho values placing the Omega -> 1+ cut-on at a given k_hat
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator
from scipy import optimize
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from . import lorentz, settings
from .core import MediumConfig, WaveCoordinates, WavePoint
from .dispersion import admissibility, impedance_residual, residual
from .errors import (
    CurveTerminated,
    InadmissibleRoot,
    ModeMisuse,
    NoConvergence,
    PoleEncountered,
    SurfaceWaveError,
)
from .transfer import monodromy_matrix

logger = logging.getLogger(__name__)

# Root acceptance and iteration controls
ROOT_TOL = 1e-9
BISECT_XTOL = 1e-12
NEWTON_STEP_TOL = 1e-10
NEWTON_MAX_ITER = 50
HYBRID_TOL = 1e-13
MAX_HALVINGS = 8
# roots where one curve crosses neighbouring grid lines share a cell
LINK_GATE = 1.0 + 1e-9  # grid steps


class ScanGrid(BaseModel):
    """Uniform (k_hat, Omega) grid; each range is (min, max, n)"""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    k_hat_range: Tuple[float, float, int] = (0.05, 10.0, 200)
    omega_hat_range: Tuple[float, float, int] = (0.05, 5.0, 200)

    @field_validator("k_hat_range", "omega_hat_range")
    @classmethod
    def validate_range(cls, value: Tuple[float, float, int]) -> Tuple[float, float, int]:
        low, high, n = value
        if n < 2:
            raise ValueError("a range needs at least 2 points")
        if not 0.0 < low < high:
            raise ValueError(f"range must be positive and increasing, got ({low}, {high})")
        return value

    def k_values(self) -> np.ndarray:
        return np.linspace(*self.k_hat_range)

    def omega_values(self) -> np.ndarray:
        return np.linspace(*self.omega_hat_range)

    @property
    def k_step(self) -> float:
        low, high, n = self.k_hat_range
        return (high - low) / (n - 1)

    @property
    def omega_step(self) -> float:
        low, high, n = self.omega_hat_range
        return (high - low) / (n - 1)


@dataclass(frozen=True)
class DispersionBranch:
    """Connected admissible roots, ordered by (Omega, k_hat)"""

    points: List[WavePoint]
    branch_id: int
    cuton: Optional[Tuple[float, float]] = None


@dataclass(frozen=True)
class LossyCurvePoint:
    loss_ratio: float
    omega_hat: float
    k_hat: float
    newton_residual: float
    iterations: int = 0

    @property
    def log10_gamma(self) -> float:
        return math.log10(self.loss_ratio) if self.loss_ratio > 0 else -math.inf

    @property
    def wave(self) -> WaveCoordinates:
        return WaveCoordinates(self.k_hat, self.omega_hat)


# -------------------------------------------------------------------
# Lossless scan
# -------------------------------------------------------------------
def _scaled_real(cfg: MediumConfig, k_hat: float, omega_hat: float) -> float:
    try:
        return residual(cfg, WaveCoordinates(k_hat, omega_hat)).scaled.real
    except SurfaceWaveError:
        return math.nan


def wave_point(cfg: MediumConfig, w: WaveCoordinates) -> WavePoint:
    """Residual and decay flags at one point"""
    value = residual(cfg, w)
    adm = admissibility(cfg, w)
    return WavePoint(
        k_hat=w.k_hat,
        omega_hat=w.omega_hat,
        residual=value.value,
        scaled_residual=abs(value.scaled),
        decay_lorentz=adm.decay_lorentz,
        decay_stratified=adm.decay_stratified,
        multiplier=adm.multiplier,
        loss_ratio=cfg.lorentz.loss_ratio,
    )


def _bisect_point(
    cfg: MediumConfig,
    wave: Callable[[float], WaveCoordinates],
    low: float,
    high: float,
) -> Optional[WavePoint]:
    def objective(t: float) -> float:
        w = wave(t)
        value = _scaled_real(cfg, w.k_hat, w.omega_hat)
        if math.isnan(value):
            raise PoleEncountered(f"residual at {w}")
        return value

    try:
        root = optimize.bisect(objective, low, high, xtol=BISECT_XTOL)
        point = wave_point(cfg, wave(root))
    except (SurfaceWaveError, ValueError) as e:
        logger.debug(f"Bracket [{low}, {high}] skipped: {e}")
        return None
    if point.scaled_residual >= ROOT_TOL:
        # sign change through a pole of the residual
        return None
    return point


def refine_root(cfg: MediumConfig, omega_hat: float, k_low: float, k_high: float) -> Optional[WavePoint]:
    """Bisect a sign change of the real scaled residual in k_hat; None when the bracket holds no accepted root"""
    return _bisect_point(cfg, lambda k: WaveCoordinates(k, omega_hat), k_low, k_high)


def refine_in_omega(cfg: MediumConfig, k_hat: float, omega_low: float, omega_high: float) -> Optional[WavePoint]:
    """Same as refine_root with k_hat fixed and the bracket in Omega"""
    return _bisect_point(cfg, lambda omega: WaveCoordinates(k_hat, omega), omega_low, omega_high)


def _sign_changes(
    cfg: MediumConfig,
    values: Sequence[float],
    nodes: Sequence[float],
    wave: Callable[[float], WaveCoordinates],
) -> List[WavePoint]:
    roots = []
    for i in range(len(nodes) - 1):
        left, right = values[i], values[i + 1]
        # NaN cells (poles) never bracket
        if math.isnan(left) or math.isnan(right):
            continue
        if left == 0.0:
            candidate = wave_point(cfg, wave(nodes[i]))
        elif left * right < 0.0:
            candidate = _bisect_point(cfg, wave, nodes[i], nodes[i + 1])
        else:
            continue
        if candidate is not None and candidate.admissible:
            roots.append(candidate)
    return roots


def _scan_column(args: Tuple[MediumConfig, float, Sequence[float]]) -> List[WavePoint]:
    cfg, omega_hat, k_values = args
    values = [_scaled_real(cfg, k, omega_hat) for k in k_values]
    return _sign_changes(cfg, values, k_values, lambda k: WaveCoordinates(k, omega_hat))


def _scan_row(args: Tuple[MediumConfig, float, Sequence[float]]) -> List[WavePoint]:
    cfg, k_hat, omega_values = args
    values = [_scaled_real(cfg, k_hat, omega) for omega in omega_values]
    return _sign_changes(cfg, values, omega_values, lambda omega: WaveCoordinates(k_hat, omega))


def link_branches(points: Sequence[WavePoint], k_step: float, omega_step: float) -> List[DispersionBranch]:
    """
    Group roots into branches: two roots are connected when they lie within
    one grid step of each other in both k_hat and Omega.
    """
    unique = list({(p.k_hat, p.omega_hat): p for p in points}.values())
    if not unique:
        return []
    coords = np.array([[p.k_hat / k_step, p.omega_hat / omega_step] for p in unique])
    pairs = cKDTree(coords).query_pairs(LINK_GATE, p=np.inf, output_type="ndarray")
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(len(unique), len(unique)))
    _, labels = connected_components(graph, directed=False)

    groups = {}
    for label, point in zip(labels, unique):
        groups.setdefault(label, []).append(point)
    ordered = sorted(
        (sorted(group, key=lambda p: (p.omega_hat, p.k_hat)) for group in groups.values()),
        key=lambda group: (group[0].omega_hat, group[0].k_hat),
    )
    return [
        DispersionBranch(points=group, branch_id=branch_id, cuton=(group[0].k_hat, group[0].omega_hat))
        for branch_id, group in enumerate(ordered)
    ]


def scan_lossless(cfg: MediumConfig, grid: ScanGrid, workers: Optional[int] = None) -> List[DispersionBranch]:
    """Admissible lossless dispersion branches from sign changes along both grid directions"""
    if cfg.lorentz.loss_ratio != 0.0:
        raise ModeMisuse(f"lossless scan needs Gamma = 0, got {cfg.lorentz.loss_ratio!r}")
    workers = settings.WORKERS if workers is None else workers
    k_values = [float(k) for k in grid.k_values()]
    omega_values = [float(omega) for omega in grid.omega_values()]
    columns = [(cfg, omega, k_values) for omega in omega_values]
    rows = [(cfg, k, omega_values) for k in k_values]

    logger.info(f"Scanning {len(columns)} columns x {len(rows)} rows ({cfg.polarization.value}, workers={workers})")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            found = list(pool.map(_scan_column, columns)) + list(pool.map(_scan_row, rows))
    else:
        found = [_scan_column(job) for job in columns] + [_scan_row(job) for job in rows]

    roots = [point for batch in found for point in batch]
    branches = link_branches(roots, grid.k_step, grid.omega_step)
    logger.info(f"Found {len(roots)} roots in {len(branches)} branches")
    return branches


# -------------------------------------------------------------------
# Lossy points
# -------------------------------------------------------------------
def _loss_weight(lossy: MediumConfig, omega_hat: float) -> float:
    """
    Weight of the Im row. Im R is proportional to Im eps_L, which vanishes both
    as Gamma -> 0 and as Gamma -> infinity; dividing it out keeps that row
    from passing the tolerance anywhere on the lossless curve.
    """
    im = abs(lorentz.permittivity(lossy.lorentz, omega_hat).value.imag)
    if lossy.lorentz.loss_ratio == 0.0 or im == 0.0:
        return 1.0
    return 1.0 / min(1.0, im)


def _jacobian(evaluate: Callable[[np.ndarray], np.ndarray], x: np.ndarray) -> np.ndarray:
    jacobian = np.empty((2, 2))
    for j in range(2):
        h = 1e-6 * max(1.0, abs(x[j]))
        shift = np.zeros(2)
        shift[j] = h
        try:
            jacobian[:, j] = (evaluate(x + shift) - evaluate(x - shift)) / (2.0 * h)
        except SurfaceWaveError as e:
            raise NoConvergence(f"Jacobian undefined at {x}: {e}") from e
    return jacobian


def _damped_newton(
    evaluate: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    tol: float,
    step_tol: float,
    max_iter: int,
) -> Tuple[np.ndarray, int]:
    f = evaluate(x)
    for iterations in range(max_iter + 1):
        step = np.linalg.lstsq(_jacobian(evaluate, x), -f, rcond=None)[0]
        if np.max(np.abs(f)) < tol and np.linalg.norm(step) < step_tol:
            return x, iterations
        if iterations == max_iter:
            break

        # backtrack until the residual drops (or is already within tol) with both coordinates positive
        norm = np.linalg.norm(f)
        t = 1.0
        for _ in range(30):
            trial = x + t * step
            if np.all(trial > 0.0):
                try:
                    f_trial = evaluate(trial)
                except SurfaceWaveError:
                    f_trial = None
                if f_trial is not None and (np.linalg.norm(f_trial) < norm or np.max(np.abs(f_trial)) < tol):
                    break
            t *= 0.5
        else:
            raise NoConvergence(f"line search stalled at {x} after {iterations + 1} iterations")

        x, f = trial, f_trial
        logger.debug(f"Newton {iterations + 1}: x={x}, |f|={np.linalg.norm(f):.3e}, step={t:.3g}")
    raise NoConvergence(f"Newton did not converge in {max_iter} iterations")


def _hybrid_root(evaluate: Callable[[np.ndarray], np.ndarray], x: np.ndarray) -> Tuple[np.ndarray, int]:
    try:
        sol = optimize.root(evaluate, x, method="hybr", tol=HYBRID_TOL)
    except (SurfaceWaveError, ValueError, ArithmeticError) as e:
        raise NoConvergence(f"hybr stopped on an undefined residual: {e}") from e
    if not sol.success:
        raise NoConvergence(f"hybr failed: {sol.message}")
    return sol.x, int(sol.nfev)


def solve_lossy_point(
    cfg: MediumConfig,
    loss_ratio: float,
    seed: WaveCoordinates,
    *,
    tol: float = ROOT_TOL,
    step_tol: float = NEWTON_STEP_TOL,
    max_iter: int = NEWTON_MAX_ITER,
) -> LossyCurvePoint:
    """
    Root of the scaled residual in (k_hat, Omega) at fixed Gamma.

    Damped Newton first, scipy's hybr from the same seed when Newton fails.
    Either way the result must bring Re and the loss-weighted Im of the scaled
    residual below tol.
    """
    lossy = cfg.with_loss(loss_ratio)
    try:
        weight = _loss_weight(lossy, seed.omega_hat)
    except SurfaceWaveError as e:
        raise NoConvergence(f"residual undefined at seed {seed}: {e}") from e

    def evaluate(x: np.ndarray) -> np.ndarray:
        value = residual(lossy, WaveCoordinates(float(x[0]), float(x[1]))).scaled
        return np.array([value.real, weight * value.imag])

    x0 = np.array([seed.k_hat, seed.omega_hat], dtype=float)
    try:
        evaluate(x0)
    except SurfaceWaveError as e:
        raise NoConvergence(f"residual undefined at seed {seed}: {e}") from e

    try:
        x, iterations = _damped_newton(evaluate, x0, tol, step_tol, max_iter)
    except NoConvergence as e:
        logger.debug(f"Damped Newton failed from {seed} ({e}), retrying with hybr")
        x, iterations = _hybrid_root(evaluate, x0)

    w = WaveCoordinates(float(x[0]), float(x[1]))
    if w.k_hat <= 0.0 or w.omega_hat <= 0.0:
        raise NoConvergence(f"root left the positive quadrant at {w}")
    check = residual(lossy, w)
    if max(abs(check.scaled.real), weight * abs(check.scaled.imag)) >= tol:
        raise NoConvergence(f"point {w} misses the residual tolerance (|R|/scale={abs(check.scaled):.3e})")
    adm = admissibility(lossy, w)
    if not adm.admissible:
        raise InadmissibleRoot(
            f"root {w} fails decay (Re alpha_L={adm.alpha_l.real:.3g}, |lambda|={abs(adm.multiplier):.6g})"
        )
    return LossyCurvePoint(
        loss_ratio=loss_ratio,
        omega_hat=w.omega_hat,
        k_hat=w.k_hat,
        newton_residual=abs(check.scaled),
        iterations=iterations,
    )


def _predict(points: List[LossyCurvePoint], log_gamma: float) -> WaveCoordinates:
    last = points[-1]
    if len(points) < 2:
        return last.wave
    prev = points[-2]
    span = last.log10_gamma - prev.log10_gamma
    if span == 0.0:
        return last.wave
    t = (log_gamma - last.log10_gamma) / span
    k_hat = last.k_hat + t * (last.k_hat - prev.k_hat)
    omega_hat = last.omega_hat + t * (last.omega_hat - prev.omega_hat)
    if k_hat <= 0.0 or omega_hat <= 0.0:
        return last.wave
    return WaveCoordinates(k_hat, omega_hat)


def continue_in_gamma(
    cfg: MediumConfig,
    log_gamma_range: Tuple[float, float, int],
    seed: WaveCoordinates,
    *,
    max_halvings: int = MAX_HALVINGS,
) -> List[LossyCurvePoint]:
    """
    Follow a lossy root along log10(Gamma) from start to end of the range
    (either direction). Each grid interval may be split by step halving; the
    intermediate points are emitted too.
    """
    start, end, n = log_gamma_range
    if n < 1:
        raise ValueError("continuation needs at least one grid point")
    grid = [start] if n == 1 else [float(g) for g in np.linspace(start, end, n)]

    try:
        points = [solve_lossy_point(cfg, 10.0**start, seed)]
    except SurfaceWaveError as e:
        logger.warning(f"Continuation could not start at log10(gamma)={start}: {e}")
        raise CurveTerminated([], None, start) from e

    current = start
    for target in grid[1:]:
        step = target - current
        halvings = 0
        while current != target:
            attempt = target if abs(target - current) <= abs(step) else current + step
            try:
                point = solve_lossy_point(cfg, 10.0**attempt, _predict(points, attempt))
            except SurfaceWaveError as e:
                halvings += 1
                if halvings > max_halvings:
                    logger.warning(f"Continuation terminated at log10(gamma)={attempt:.6g}: {e}")
                    raise CurveTerminated(points, current, attempt) from e
                step /= 2.0
                logger.debug(f"Halving continuation step to {step:.3g} at log10(gamma)={current:.6g}")
                continue
            points.append(point)
            current = attempt
    return points


# -------------------------------------------------------------------
# rho calibration
# -------------------------------------------------------------------
def _metallic_residual(cfg: MediumConfig, rho: float, k_hat: float) -> float:
    scaled = cfg.model_copy(update={"rho": rho})
    return impedance_residual(scaled, WaveCoordinates(k_hat, 1.0), 0j).scaled.real


def calibrate_rho(
    cfg: MediumConfig,
    target_k_hat: float,
    rho_range: Tuple[float, float] = (0.1, 10.0),
    samples: int = 400,
) -> List[float]:
    """
    rho values for which the stratified half-space under a perfectly
    conducting boundary carries a decaying wave at (target_k_hat, Omega = 1),
    the limit of the lowest branch as Omega -> 1+ (eps_L -> -infinity).
    """
    rhos = np.geomspace(rho_range[0], rho_range[1], samples)
    values = [_metallic_residual(cfg, float(r), target_k_hat) for r in rhos]

    found = []
    for low, high, f_low, f_high in zip(rhos, rhos[1:], values, values[1:]):
        if f_low * f_high >= 0.0:
            continue
        rho = optimize.brentq(lambda r: _metallic_residual(cfg, r, target_k_hat), low, high, xtol=1e-14)
        matrix = monodromy_matrix(cfg.model_copy(update={"rho": rho}), WaveCoordinates(target_k_hat, 1.0))
        # boundary vector (0, 1) with eigenvalue T22
        if abs(matrix.m22) < 1.0:
            found.append(float(rho))
    logger.info(f"rho candidates for cut-on k_hat={target_k_hat}: {found}")
    return found


def branch_points(branches: Iterable[DispersionBranch]) -> List[Tuple[int, WavePoint]]:
    """Flatten branches to (branch_id, point) rows in branch order"""
    return [(branch.branch_id, point) for branch in branches for point in branch.points]
