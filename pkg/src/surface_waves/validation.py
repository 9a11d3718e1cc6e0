"""
Self-checks behind `surface-waves validate`.

Invariant checks are exact identities or asymptotic orders the solver must
satisfy for any input; they decide the exit status. Reproduction checks
compare against reference values of the lossless spectrum and are reported
only, except the cut-on frequency, which gates like an invariant.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy import optimize

from . import lorentz
from .core import (
    LayerParams,
    LorentzParams,
    MediumConfig,
    Polarization,
    WaveCoordinates,
    eigen_decompose,
    nondim_chi,
)
from .dispersion import (
    admissibility,
    babich_limit,
    boundary_ratio,
    homogeneous_k_hat,
    homogeneous_phase_velocity_squared,
    residual,
)
from .errors import SurfaceWaveError
from .solver import ScanGrid, calibrate_rho, scan_lossless
from .transfer import (
    Regime,
    field_at,
    floquet_factorize,
    generator_at,
    interface_profile,
    monodromy_closed_form,
    monodromy_product,
    propagate,
)

logger = logging.getLogger(__name__)

INVARIANT = "invariant"
REPRODUCTION = "reproduction"

REFERENCE_CUTON = (0.526, 1.0)  # (k_hat, Omega)


@dataclass
class CheckResult:
    name: str
    kind: str
    passed: bool
    detail: str = ""
    values: Dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> Dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "passed": self.passed,
            "detail": self.detail,
            "values": self.values,
        }


# -------------------------------------------------------------------
# Fixtures
# -------------------------------------------------------------------
def homogeneous_fixture(polarization: Polarization = Polarization.TE) -> MediumConfig:
    """eps_A = eps_B = 5 against the P = 2.13 Lorentz medium"""
    layer = LayerParams(eps_rel=5.0)
    return MediumConfig(layer_a=layer, layer_b=layer, polarization=polarization)


def perturbed_fixture() -> MediumConfig:
    """Slightly unequal layers, so the bracket terms all contribute"""
    return MediumConfig(layer_a=LayerParams(eps_rel=5.0), layer_b=LayerParams(eps_rel=5.2))


def light_line_k(cfg: MediumConfig, omega_hat: float) -> float:
    """Largest layer light line k_hat = Omega rho sqrt(eps mu)"""
    index = max(
        math.sqrt(cfg.layer_a.eps_rel * cfg.layer_a.mu_rel),
        math.sqrt(cfg.layer_b.eps_rel * cfg.layer_b.mu_rel),
    )
    return omega_hat * cfg.rho * index


def bracketed_root(cfg: MediumConfig, omega_hat: float, k_low: float, k_high: float) -> WaveCoordinates:
    """Root of the real scaled residual inside a known sign-change bracket"""
    k_hat = optimize.brentq(
        lambda k: residual(cfg, WaveCoordinates(k, omega_hat)).scaled.real,
        k_low,
        k_high,
        xtol=1e-14,
    )
    return WaveCoordinates(k_hat, omega_hat)


def fixture_root(cfg: MediumConfig, omega_hat: float) -> WaveCoordinates:
    """
    Surface wave of a near-homogeneous fixture at Omega in (1, 1.3): the root
    lies between the layer light line and twice the homogeneous estimate.
    """
    estimate_cfg = cfg.model_copy(update={"layer_b": cfg.layer_a})
    estimate = homogeneous_k_hat(estimate_cfg, omega_hat)
    low = light_line_k(cfg, omega_hat) * (1.0 + 1e-6)
    return bracketed_root(cfg, omega_hat, low, 2.0 * estimate)


def random_config(rng: np.random.Generator) -> MediumConfig:
    polarization = Polarization.TM if rng.random() < 0.5 else Polarization.TE
    return MediumConfig(
        layer_a=LayerParams(eps_rel=rng.uniform(1.0, 12.0), mu_rel=rng.uniform(0.5, 2.0)),
        layer_b=LayerParams(eps_rel=rng.uniform(1.0, 12.0), mu_rel=rng.uniform(0.5, 2.0)),
        h=rng.uniform(0.05, 0.95),
        rho=rng.uniform(0.2, 2.0),
        lorentz=LorentzParams(plasma_ratio=rng.uniform(0.0, 5.0), loss_ratio=rng.uniform(0.0, 1.0)),
        polarization=polarization,
    )


def random_point(rng: np.random.Generator):
    """Config and (k_hat, Omega) with phase velocity v_hat <= 8"""
    cfg = random_config(rng)
    return cfg, WaveCoordinates(rng.uniform(0.5, 10.0), rng.uniform(0.05, 2.0))


def random_gap_point(rng: np.random.Generator):
    """Config and point with both layer chi real, hence |trace| > 2"""
    cfg = random_config(rng).model_copy(update={"polarization": Polarization.TE})
    k_hat = rng.uniform(0.3, 4.0)
    limit = k_hat / (cfg.rho * math.sqrt(max(
        cfg.layer_a.eps_rel * cfg.layer_a.mu_rel, cfg.layer_b.eps_rel * cfg.layer_b.mu_rel
    )))
    omega_hat = rng.uniform(0.05, 0.9) * limit
    return cfg, WaveCoordinates(k_hat, omega_hat)


def _loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    return float(np.polyfit(np.log10(np.asarray(x)), np.log10(np.asarray(y)), 1)[0])


def _relative_matrix_error(a, b) -> float:
    return (a - b).frobenius() / max(b.frobenius(), 1e-300)


# -------------------------------------------------------------------
# Invariant checks
# -------------------------------------------------------------------
def check_permittivity_paths(samples: int = 10000, seed: int = 7) -> CheckResult:
    """Component form and compact form of eps_L agree"""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        lp = LorentzParams(plasma_ratio=rng.uniform(0.0, 30.0), loss_ratio=rng.uniform(1e-6, 5.0))
        omega = rng.uniform(0.0, 50.0)
        component = lorentz.permittivity(lp, omega).value
        compact = lorentz.permittivity_compact(lp, omega)
        # relative to the oscillator term, which carries all the rounding
        size = max(1.0, abs(compact - 1.0))
        worst = max(worst, abs(component - compact) / size)
    return CheckResult("permittivity two-path", INVARIANT, worst < 1e-13, f"max rel diff {worst:.2e}", {"max": worst})


def check_monodromy_oracle(samples: int = 10000, seed: int = 11) -> CheckResult:
    """Closed-form monodromy equals the product of layer exponentials"""
    rng = np.random.default_rng(seed)
    worst, drawn = 0.0, 0
    while drawn < samples:
        cfg, w = random_point(rng)
        if min(abs(nondim_chi(cfg.layer_a, w, cfg.rho)), abs(nondim_chi(cfg.layer_b, w, cfg.rho))) < 1e-3:
            continue
        drawn += 1
        product = propagate(cfg, w, 1.0)
        worst = max(worst, _relative_matrix_error(monodromy_closed_form(cfg, w), product))
    return CheckResult("monodromy closed form vs product", INVARIANT, worst < 1e-11, f"max rel diff {worst:.2e}", {"max": worst})


def check_unimodular(samples: int = 2000, seed: int = 13) -> CheckResult:
    """det T = 1 and lambda_1 lambda_2 = 1"""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        cfg, w = random_point(rng)
        try:
            mono = monodromy_product(cfg, w)
        except SurfaceWaveError:
            continue
        m = mono.matrix
        size = abs(m.m11 * m.m22) + abs(m.m12 * m.m21)
        worst = max(
            worst,
            abs(m.det() - 1.0) / size,
            abs(mono.eigenvalues[0] * mono.eigenvalues[1] - 1.0) / size,
        )
    return CheckResult("det T = lambda1 lambda2 = 1", INVARIANT, worst < 1e-12, f"max scaled dev {worst:.2e}", {"max": worst})


def check_floquet(samples: int = 100, seed: int = 17) -> CheckResult:
    """Psi periodic and Phi rebuilt from the factorization on [0, 3]"""
    rng = np.random.default_rng(seed)
    grid = [float(x) for x in np.linspace(0.0, 3.0, 31)]
    worst_period, worst_rebuild = 0.0, 0.0
    for _ in range(samples):
        cfg, w = random_gap_point(rng)
        factor = floquet_factorize(cfg, w, grid)
        if factor.monodromy.regime is not Regime.GAP:
            continue
        for i, x in enumerate(grid):
            direct = propagate(cfg, w, x)
            worst_rebuild = max(worst_rebuild, _relative_matrix_error(factor.fundamental(i), direct))
            if x + 1.0 <= grid[-1] + 1e-12:
                j = grid.index(min(grid, key=lambda g: abs(g - (x + 1.0))))
                worst_period = max(worst_period, _relative_matrix_error(factor.psi[j], factor.psi[i]))
    passed = worst_period < 1e-10 and worst_rebuild < 1e-10
    return CheckResult(
        "Floquet periodicity and reconstruction",
        INVARIANT,
        passed,
        f"periodicity {worst_period:.2e}, reconstruction {worst_rebuild:.2e}",
        {"periodicity": worst_period, "reconstruction": worst_rebuild},
    )


def check_homogeneous_roots(points: int = 50) -> CheckResult:
    """Residual roots of a homogeneous stack match the closed form"""
    cfg = homogeneous_fixture()
    worst = 0.0
    for omega in np.linspace(1.02, 1.25, points):
        closed = homogeneous_k_hat(cfg, float(omega))
        low = light_line_k(cfg, float(omega)) * (1.0 + 1e-6)
        root = bracketed_root(cfg, float(omega), low, 2.0 * closed)
        worst = max(worst, abs(root.k_hat - closed))
    return CheckResult("homogeneous closed form", INVARIANT, worst < 1e-8, f"max |dk| {worst:.2e}", {"max": worst})


def check_babich_order() -> CheckResult:
    """Large-|eps_L| limit: closed form vs limit formula (order 2) and vs layer light line (order 1)"""
    layer = LayerParams(eps_rel=5.0)
    eps_values = -np.logspace(2.0, 4.0, 9)
    to_limit, to_light_line = [], []
    light = 1.0 / math.sqrt(layer.eps_rel * layer.mu_rel)
    for eps_l in eps_values:
        exact = math.sqrt(homogeneous_phase_velocity_squared(layer, float(eps_l), 1.0).real)
        to_limit.append(abs(exact - babich_limit(layer, float(eps_l), 1.0)) / exact)
        to_light_line.append(abs(exact - light) / exact)
    slope_limit = _loglog_slope(np.abs(eps_values), to_limit)
    slope_light = _loglog_slope(np.abs(eps_values), to_light_line)
    passed = abs(slope_limit + 2.0) < 0.1 and abs(slope_light + 1.0) < 0.1
    return CheckResult(
        "large |eps_L| limit order",
        INVARIANT,
        passed,
        f"slope vs limit formula {slope_limit:.3f}, vs light line {slope_light:.3f}",
        {"slope_limit": slope_limit, "slope_light_line": slope_light},
    )


def check_leontovich_order(polarization: Polarization = Polarization.TE) -> CheckResult:
    """Generalized vs classical impedance error is first order in k^2/(w^2 eps_L)"""
    lp = LorentzParams()
    omega, rho = 1.5, 1.0
    eps_l = lorentz.permittivity(lp, omega).value
    small = np.logspace(-6.0, -3.0, 10)
    errors = []
    for x in small:
        k_hat = math.sqrt(x * abs((omega * rho) ** 2 * eps_l * lp.mu_rel))
        _, _, rel = lorentz.classical_limit_error(lp, WaveCoordinates(k_hat, omega), rho, polarization)
        errors.append(rel)
    slope = _loglog_slope(small, errors)
    return CheckResult(
        f"classical impedance order ({polarization.value})",
        INVARIANT,
        abs(slope - 1.0) < 0.1,
        f"slope {slope:.3f}",
        {"slope": slope},
    )


def check_residual_symmetries(samples: int = 500, seed: int = 19) -> CheckResult:
    """Evenness in chi_A, chi_B and the exact layer-exchange identity"""
    rng = np.random.default_rng(seed)
    worst_even, worst_swap, worst_trace = 0.0, 0.0, 0.0
    for _ in range(samples):
        cfg, w = random_point(rng)
        try:
            base = residual(cfg, w)
            flipped = residual(cfg, w, chi_a=-base.chi_a, chi_b=-base.chi_b)
            swapped = residual(cfg.swapped(), w)
        except SurfaceWaveError:
            continue
        worst_even = max(worst_even, abs(flipped.value - base.value) / base.scale)

        ea, eb = cfg.layer_eps_hat(cfg.layer_a), cfg.layer_eps_hat(cfg.layer_b)
        ca, cb = base.chi_a, base.chi_b
        cross = (ca * eb) / (cb * ea) - (cb * ea) / (ca * eb)
        s_a = np.sinh(ca * w.k_hat * cfg.h)
        s_b = np.sinh(cb * w.k_hat * (1.0 - cfg.h))
        expected = base.value - 2.0 * cross * s_a * s_b
        worst_swap = max(worst_swap, abs(swapped.value - expected) / max(base.scale, swapped.scale))

        t = propagate(cfg, w, 1.0)
        t_swapped = propagate(cfg.swapped(), w, 1.0)
        worst_trace = max(worst_trace, abs(t.trace() - t_swapped.trace()) / t.frobenius())
    passed = worst_even < 1e-12 and worst_swap < 1e-11 and worst_trace < 1e-11
    return CheckResult(
        "residual symmetries",
        INVARIANT,
        passed,
        f"evenness {worst_even:.2e}, exchange identity {worst_swap:.2e}, trace {worst_trace:.2e}",
        {"evenness": worst_even, "exchange": worst_swap, "trace": worst_trace},
    )


def check_eigen_consistency(points: int = 10) -> CheckResult:
    """At residual roots (-i zeta, 1) is the decaying eigenvector with eigenvalue = multiplier"""
    cfg = perturbed_fixture()
    worst_vector, worst_value = 0.0, 0.0
    admissible = True
    for omega in np.linspace(1.05, 1.2, points):
        w = fixture_root(cfg, float(omega))
        adm = admissibility(cfg, w)
        admissible = admissible and adm.admissible
        t = propagate(cfg, w, 1.0)
        v = (-1j * boundary_ratio(cfg, w), 1.0 + 0j)
        tv = t.apply(v)
        size = t.frobenius() * math.hypot(abs(v[0]), abs(v[1]))
        worst_vector = max(worst_vector, max(abs(tv[0] - adm.multiplier * v[0]), abs(tv[1] - adm.multiplier * v[1])) / size)
        smallest = eigen_decompose(t).values[0]
        worst_value = max(worst_value, abs(adm.multiplier - smallest))
    passed = admissible and worst_vector < 1e-8 and worst_value < 1e-9
    return CheckResult(
        "eigenvector consistency at roots",
        INVARIANT,
        passed,
        f"admissible={admissible}, |Tv - lambda v| {worst_vector:.2e}, |lambda - lambda_1| {worst_value:.2e}",
        {"vector": worst_vector, "value": worst_value},
    )


def ode_residual(cfg: MediumConfig, w: WaveCoordinates, x: float, step: float) -> float:
    """Relative centred-difference residual of U' = A(x) U"""
    plus = field_at(cfg, w, x + step)
    minus = field_at(cfg, w, x - step)
    u = field_at(cfg, w, x)
    au = generator_at(cfg, w, x).apply(u)
    derivative = ((plus[0] - minus[0]) / (2 * step), (plus[1] - minus[1]) / (2 * step))
    size = max(abs(au[0]), abs(au[1]), 1e-300)
    return max(abs(derivative[0] - au[0]), abs(derivative[1] - au[1])) / size


def check_profiles(points: int = 20) -> CheckResult:
    """Two-sided profiles: continuity, envelopes and the ODE they sample"""
    cfg = perturbed_fixture()
    worst_jump, worst_envelope, worst_ode, worst_ratio = 0.0, 0.0, 0.0, math.inf
    for omega in np.linspace(1.02, 1.25, points):
        w = fixture_root(cfg, float(omega))
        profile = interface_profile(cfg, w, depth=2.0, lorentz_samples=41, n_periods=3, samples_per_layer=20)
        worst_jump = max(worst_jump, profile.interface_jump())

        lam = abs(profile.multiplier)
        alpha = profile.alpha_l.real
        by_x = {}
        for sample in profile.samples:
            by_x.setdefault(sample.x3_over_d, sample)
        origin = by_x[0.0]
        for n in (1, 2, 3):
            sample = by_x[float(n)]
            ratio = abs(sample.h2) / abs(origin.h2)
            worst_envelope = max(worst_envelope, abs(ratio - lam**n) / lam**n)
        deep = profile.samples[0]
        expected = math.exp(alpha * deep.x3_over_d)
        worst_envelope = max(worst_envelope, abs(abs(deep.h2) - expected) / expected)

        for x in (-0.5, 0.2, 0.8, 1.3):
            coarse = ode_residual(cfg, w, x, 1e-4)
            fine = ode_residual(cfg, w, x, 5e-5)
            worst_ode = max(worst_ode, coarse)
            worst_ratio = min(worst_ratio, coarse / max(fine, 1e-300))
    passed = worst_jump < 1e-9 and worst_envelope < 1e-9 and worst_ode < 1e-6 and worst_ratio > 3.0
    return CheckResult(
        "field profile physics",
        INVARIANT,
        passed,
        f"jump {worst_jump:.2e}, envelope {worst_envelope:.2e}, ODE {worst_ode:.2e}, order ratio {worst_ratio:.2f}",
        {"jump": worst_jump, "envelope": worst_envelope, "ode": worst_ode, "ratio": worst_ratio},
    )


def check_config_roundtrip(cfg: MediumConfig) -> CheckResult:
    reloaded = MediumConfig.model_validate_json(cfg.model_dump_json())
    return CheckResult("config round trip", INVARIANT, reloaded == cfg)


INVARIANT_CHECKS: List[Callable[[], CheckResult]] = [
    check_permittivity_paths,
    check_monodromy_oracle,
    check_unimodular,
    check_floquet,
    check_homogeneous_roots,
    check_babich_order,
    check_leontovich_order,
    lambda: check_leontovich_order(Polarization.TM),
    check_residual_symmetries,
    check_eigen_consistency,
    check_profiles,
]


# -------------------------------------------------------------------
# Reproduction checks
# -------------------------------------------------------------------
def lowest_branch(cfg: MediumConfig, grid: ScanGrid):
    branches = scan_lossless(cfg, grid)
    return branches[0] if branches else None


def check_cuton(cfg: MediumConfig, grid: ScanGrid) -> CheckResult:
    """Lowest branch cut-on frequency near Omega = 1; gates the exit status"""
    branch = lowest_branch(cfg, grid)
    if branch is None:
        return CheckResult("cut-on frequency", INVARIANT, False, "no branch found")
    k_hat, omega = branch.cuton
    return CheckResult(
        "cut-on frequency",
        INVARIANT,
        abs(omega - REFERENCE_CUTON[1]) <= 0.02,
        f"cut-on at (k_hat, Omega) = ({k_hat:.4f}, {omega:.4f})",
        {"k_hat": k_hat, "omega_hat": omega},
    )


def check_cuton_wavenumber(cfg: MediumConfig, columns: int = 60) -> CheckResult:
    """Cut-on wavenumber 0.526 under a calibrated rho, for mu_L = 1 and mu_L = 0"""
    target = REFERENCE_CUTON[0]
    candidates = calibrate_rho(cfg, target)
    matches = []
    for rho in candidates:
        for mu_l in (1.0, 0.0):
            lp = cfg.lorentz.model_copy(update={"mu_rel": mu_l})
            calibrated = cfg.model_copy(update={"rho": rho, "lorentz": lp})
            grid = ScanGrid(k_hat_range=(0.02, 2.0, 200), omega_hat_range=(1.0005, 1.06, columns))
            branch = lowest_branch(calibrated, grid)
            if branch is not None and abs(branch.cuton[0] - target) <= 0.01:
                matches.append((rho, mu_l, branch.cuton[0]))
    detail = f"rho candidates {[round(r, 6) for r in candidates]}; matches (rho, mu_L, k_hat) {matches}"
    return CheckResult("cut-on wavenumber", REPRODUCTION, bool(matches), detail)


def long_wave_count(cfg: MediumConfig, grid: ScanGrid) -> int:
    """Branches reaching the smallest wavenumbers of the grid at finite frequency"""
    edge = grid.k_hat_range[0] + 2.0 * grid.k_step
    return sum(1 for b in scan_lossless(cfg, grid) if min(p.k_hat for p in b.points) <= edge)


def check_long_wave_monotone(cfg: MediumConfig, grid: ScanGrid, plasma: Sequence[float] = (2.13, 5.0, 10.0, 25.0)) -> CheckResult:
    counts = []
    for p in plasma:
        lp = cfg.lorentz.model_copy(update={"plasma_ratio": p})
        counts.append(long_wave_count(cfg.model_copy(update={"lorentz": lp}), grid))
    monotone = all(a <= b for a, b in zip(counts, counts[1:]))
    return CheckResult("long-wave branches grow with P", REPRODUCTION, monotone, f"P={list(plasma)} counts={counts}")


def _branch_by_column(cfg: MediumConfig, grid: ScanGrid) -> Dict[float, float]:
    branch = lowest_branch(cfg, grid)
    if branch is None:
        return {}
    column = {}
    for p in branch.points:
        column.setdefault(p.omega_hat, p.k_hat)
    return column


def check_small_plasma_convergence(cfg: MediumConfig, grid: ScanGrid, plasma: Sequence[float] = (1.0, 0.1, 0.01)) -> CheckResult:
    """Lowest branch approaches the non-dispersive eps_L = mu_L = 1 branch as P -> 0"""
    vacuum = cfg.model_copy(update={"lorentz": LorentzParams(plasma_ratio=0.0, mu_rel=1.0)})
    reference = _branch_by_column(vacuum, grid)
    distances: List[float] = []
    for p in plasma:
        lp = LorentzParams(plasma_ratio=p, mu_rel=1.0)
        column = _branch_by_column(cfg.model_copy(update={"lorentz": lp}), grid)
        shared = set(column) & set(reference)
        distances.append(max((abs(column[o] - reference[o]) for o in shared), default=math.inf))
    decreasing = all(math.isfinite(d) for d in distances) and all(a > b for a, b in zip(distances, distances[1:]))
    return CheckResult("P -> 0 convergence", REPRODUCTION, decreasing, f"P={list(plasma)} sup distances={distances}")


def run_invariant_suite(checks: Optional[Sequence[Callable[[], CheckResult]]] = None) -> List[CheckResult]:
    results = []
    for check in checks or INVARIANT_CHECKS:
        try:
            result = check()
        except SurfaceWaveError as e:
            name = getattr(check, "__name__", "check")
            result = CheckResult(name, INVARIANT, False, f"raised {type(e).__name__}: {e}")
        logger.info(f"{result.name}: {'pass' if result.passed else 'FAIL'} ({result.detail})")
        results.append(result)
    return results


def run_reproduction_suite(cfg: MediumConfig, grid: ScanGrid) -> List[CheckResult]:
    checks = [
        lambda: check_cuton(cfg, grid),
        lambda: check_cuton_wavenumber(cfg),
        lambda: check_long_wave_monotone(cfg, grid),
        lambda: check_small_plasma_convergence(cfg, grid),
    ]
    results = []
    for check in checks:
        try:
            result = check()
        except SurfaceWaveError as e:
            result = CheckResult("reproduction", REPRODUCTION, False, f"raised {type(e).__name__}: {e}")
        logger.info(f"{result.name}: {'match' if result.passed else 'differs'} ({result.detail})")
        results.append(result)
    return results
