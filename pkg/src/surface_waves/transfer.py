"""
Stratified half-space: layer propagators, the period monodromy matrix, Floquet
factorization and decaying field profiles on both sides of the interface.

Field units: the state vector is U = (v_hat*E1/Z0, H2) for TE and the same form
for TM after the substitution eps -> -mu with U = (H1, E2). In these units a
layer of relative permittivity factor eps_hat has the generator

    dU/d(x3/d) = k_hat * [[0, -i chi^2/eps_hat], [i eps_hat, 0]] U,

whose exponential over a thickness t (in units of d) is

    [[cosh(z), -i (chi/eps_hat) sinh(z)], [i (eps_hat/chi) sinh(z), cosh(z)]],  z = chi k_hat t.
"""

import cmath
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import lorentz
from .core import (
    POLE_TOL,
    TAU_EIG,
    ComplexMat2,
    EigenPairs,
    LayerParams,
    MediumConfig,
    Polarization,
    WaveCoordinates,
    cosh_sinh_scaled,
    eigen_decompose,
    nondim_chi,
    restore_matrix,
    restore_value,
    sinhc,
)
from .errors import ChiZero, NotDecaying, PoleEncountered, ZeroPermittivity

logger = logging.getLogger(__name__)

PROFILE_COLUMNS = {
    Polarization.TE: ("x3_over_d", "Re_E1", "Im_E1", "Re_H2", "Im_H2"),
    Polarization.TM: ("x3_over_d", "Re_H1", "Im_H1", "Re_E2", "Im_E2"),
}


class Regime(str, Enum):
    GAP = "gap"
    BAND = "band"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class LayerPropagator:
    """exp(A t) for one homogeneous layer, stored as scaled * e^log_scale; det(matrix) = 1"""

    scaled: ComplexMat2
    chi: complex
    thickness_hat: float
    log_scale: float = 0.0

    @property
    def matrix(self) -> ComplexMat2:
        return restore_matrix(self.scaled, self.log_scale)


@dataclass(frozen=True)
class Monodromy:
    """
    One-period propagator with its Floquet multipliers (decaying one first).

    The matrix is held as scaled * e^log_scale; log_growth is the logarithm of
    the growing multiplier, finite even when that multiplier is not.
    """

    scaled: ComplexMat2
    eigenvalues: Tuple[complex, complex]
    eigenvectors: Tuple[Tuple[complex, complex], Tuple[complex, complex]]
    regime: Regime
    log_scale: float = 0.0
    log_growth: complex = 0j

    @property
    def matrix(self) -> ComplexMat2:
        return restore_matrix(self.scaled, self.log_scale)

    @property
    def eigenvector_matrix(self) -> ComplexMat2:
        return ComplexMat2.from_columns(self.eigenvectors[0], self.eigenvectors[1])


@dataclass(frozen=True)
class FloquetFactorization:
    """Phi(x) = Psi(x) diag(exp(x ln lambda_j)) T^-1 with Psi 1-periodic in x3/d"""

    grid: Tuple[float, ...]
    psi: Tuple[ComplexMat2, ...]
    exponents: Tuple[complex, complex]
    monodromy: Monodromy

    def fundamental(self, index: int) -> ComplexMat2:
        """Canonical fundamental matrix rebuilt from the factorization at grid[index]"""
        x = self.grid[index]
        growth = ComplexMat2.diag(cmath.exp(x * self.exponents[0]), cmath.exp(x * self.exponents[1]))
        return self.psi[index] @ growth @ self.monodromy.eigenvector_matrix.inverse()


@dataclass(frozen=True)
class FieldSample:
    """Amplitudes at x3/d; for TM e1 holds H1 and h2 holds E2"""

    x3_over_d: float
    e1: complex
    h2: complex


@dataclass(frozen=True)
class FieldProfile:
    """Sampled field, normalized to H2(0) = 1; interfaces appear twice (one sample per side)"""

    samples: List[FieldSample]
    wave: WaveCoordinates
    polarization: Polarization = Polarization.TE
    multiplier: Optional[complex] = None
    alpha_l: Optional[complex] = None

    def interface_jump(self) -> float:
        """Largest relative mismatch between samples sharing an abscissa"""
        worst = 0.0
        for before, after in zip(self.samples, self.samples[1:]):
            if before.x3_over_d != after.x3_over_d:
                continue
            size = max(abs(before.e1), abs(before.h2), abs(after.e1), abs(after.h2), 1e-300)
            jump = max(abs(before.e1 - after.e1), abs(before.h2 - after.h2)) / size
            worst = max(worst, jump)
        return worst

    def columns(self) -> Tuple[str, ...]:
        return PROFILE_COLUMNS[self.polarization]

    def rows(self) -> List[Tuple[float, float, float, float, float]]:
        return [(s.x3_over_d, s.e1.real, s.e1.imag, s.h2.real, s.h2.imag) for s in self.samples]


# -------------------------------------------------------------------
# Layer propagators
# -------------------------------------------------------------------
def layer_generator(
    layer: LayerParams,
    w: WaveCoordinates,
    rho: float,
    polarization: Polarization = Polarization.TE,
) -> ComplexMat2:
    """Generator of dU/d(x3/d) inside a layer"""
    eps = -layer.mu_rel if polarization is Polarization.TM else layer.eps_rel
    x = nondim_chi(layer, w, rho)
    return ComplexMat2(0j, -1j * w.k_hat * x * x / eps, 1j * w.k_hat * eps, 0j)


def lorentz_generator(cfg: MediumConfig, w: WaveCoordinates) -> ComplexMat2:
    """Generator of dU/d(x3/d) in the Lorentz half-space"""
    eps = lorentz.eps_hat(cfg.lorentz, w.omega_hat, cfg.polarization)
    x = lorentz.chi_l(cfg.lorentz, w, cfg.rho)
    return ComplexMat2(0j, -1j * w.k_hat * x * x / eps, 1j * w.k_hat * eps, 0j)


def layer_propagator(
    layer: LayerParams,
    w: WaveCoordinates,
    rho: float,
    thickness_hat: float,
    polarization: Polarization = Polarization.TE,
) -> LayerPropagator:
    """exp(A t) through a layer of thickness t = thickness_hat (units of d)"""
    if thickness_hat < 0:
        raise ValueError(f"negative layer thickness {thickness_hat!r}")
    eps = -layer.mu_rel if polarization is Polarization.TM else layer.eps_rel
    x = nondim_chi(layer, w, rho)
    kt = w.k_hat * thickness_hat
    z = x * kt
    c, s, shift = cosh_sinh_scaled(z)
    if shift > 0.0:
        # |z| is large here, so chi is far from zero
        scaled = ComplexMat2(c, -1j * x * s / eps, 1j * eps * s / x, c)
        return LayerPropagator(scaled=scaled, chi=x, thickness_hat=thickness_hat, log_scale=shift)
    # off-diagonal entries written through sinh(z)/z, regular at chi = 0
    shape = sinhc(z)
    scaled = ComplexMat2(c, -1j * x * x * kt * shape / eps, 1j * eps * kt * shape, c)
    return LayerPropagator(scaled=scaled, chi=x, thickness_hat=thickness_hat)


def period_propagator_scaled(cfg: MediumConfig, w: WaveCoordinates, r: float) -> Tuple[ComplexMat2, float]:
    """Phi(r) as (matrix, shift) with Phi(r) = matrix * e^shift"""
    pol = cfg.polarization
    if r <= cfg.h:
        only = layer_propagator(cfg.layer_a, w, cfg.rho, r, pol)
        return only.scaled, only.log_scale
    first = layer_propagator(cfg.layer_a, w, cfg.rho, cfg.h, pol)
    second = layer_propagator(cfg.layer_b, w, cfg.rho, r - cfg.h, pol)
    return second.scaled @ first.scaled, first.log_scale + second.log_scale


def period_propagator(cfg: MediumConfig, w: WaveCoordinates, r: float) -> ComplexMat2:
    """Phi(r) for 0 <= r <= 1, starting at the interface x3 = 0"""
    return restore_matrix(*period_propagator_scaled(cfg, w, r))


def propagate(cfg: MediumConfig, w: WaveCoordinates, x: float) -> ComplexMat2:
    """Canonical fundamental matrix Phi(x), x = x3/d >= 0, by direct piecewise propagation"""
    periods = int(math.floor(x))
    step = period_propagator(cfg, w, 1.0)
    return period_propagator(cfg, w, x - periods) @ step.power(periods)


# -------------------------------------------------------------------
# Monodromy
# -------------------------------------------------------------------
def classify(matrix: ComplexMat2, pairs: EigenPairs) -> Regime:
    trace = matrix.trace()
    real_trace = abs(trace.imag) <= TAU_EIG * max(1.0, abs(trace))
    if real_trace and abs(trace.real) < 2.0 - TAU_EIG:
        return Regime.BAND
    if abs(pairs.values[0]) < 1.0 - TAU_EIG:
        return Regime.GAP
    return Regime.DEGENERATE


def monodromy_product(cfg: MediumConfig, w: WaveCoordinates) -> Monodromy:
    """Phi(d) as the product of the two layer exponentials, eigen-decomposed"""
    scaled, shift = period_propagator_scaled(cfg, w, 1.0)
    pairs = eigen_decompose(scaled)
    if shift == 0.0:
        return Monodromy(
            scaled=scaled,
            eigenvalues=pairs.values,
            eigenvectors=pairs.vectors,
            regime=classify(scaled, pairs),
            log_growth=cmath.log(pairs.values[1]),
        )

    # the multipliers are e^-shift/big and big*e^shift; the trace is far beyond the band
    big = pairs.values[1]
    decaying = math.exp(-shift) / big
    regime = Regime.GAP if abs(decaying) < 1.0 - TAU_EIG else Regime.DEGENERATE
    return Monodromy(
        scaled=scaled,
        eigenvalues=(decaying, restore_value(big, shift)),
        eigenvectors=pairs.vectors,
        regime=regime,
        log_scale=shift,
        log_growth=shift + cmath.log(big),
    )


def monodromy_closed_form_scaled(
    cfg: MediumConfig,
    w: WaveCoordinates,
    *,
    chi_a: Optional[complex] = None,
    chi_b: Optional[complex] = None,
) -> Tuple[ComplexMat2, float]:
    """Closed-form monodromy as (matrix, shift) with the true matrix = matrix * e^shift"""
    ca_ = nondim_chi(cfg.layer_a, w, cfg.rho) if chi_a is None else chi_a
    cb_ = nondim_chi(cfg.layer_b, w, cfg.rho) if chi_b is None else chi_b
    if abs(ca_) < POLE_TOL or abs(cb_) < POLE_TOL:
        raise ChiZero("closed-form monodromy needs chi_A, chi_B != 0")
    ea = cfg.layer_eps_hat(cfg.layer_a)
    eb = cfg.layer_eps_hat(cfg.layer_b)
    # phases associated as in layer_propagator
    c_a, s_a, shift_a = cosh_sinh_scaled(ca_ * (w.k_hat * cfg.h))
    c_b, s_b, shift_b = cosh_sinh_scaled(cb_ * (w.k_hat * (1.0 - cfg.h)))

    matrix = ComplexMat2(
        c_b * c_a + (cb_ * ea) / (ca_ * eb) * s_b * s_a,
        -1j * ca_ / ea * c_b * s_a - 1j * cb_ / eb * s_b * c_a,
        1j * ea / ca_ * c_b * s_a + 1j * eb / cb_ * s_b * c_a,
        c_b * c_a + (ca_ * eb) / (cb_ * ea) * s_b * s_a,
    )
    return matrix, shift_a + shift_b


def monodromy_closed_form(
    cfg: MediumConfig,
    w: WaveCoordinates,
    *,
    chi_a: Optional[complex] = None,
    chi_b: Optional[complex] = None,
) -> ComplexMat2:
    """
    Entry-by-entry closed form of the monodromy matrix.

    chi_a / chi_b override the principal layer factors (either sign gives the
    same matrix). Raises MagnitudeOverflow where the entries exceed the float range.
    """
    return restore_matrix(*monodromy_closed_form_scaled(cfg, w, chi_a=chi_a, chi_b=chi_b))


def monodromy_matrix(cfg: MediumConfig, w: WaveCoordinates) -> ComplexMat2:
    """Closed form where defined, product form across chi = 0"""
    try:
        return monodromy_closed_form(cfg, w)
    except ChiZero:
        return period_propagator(cfg, w, 1.0)


# -------------------------------------------------------------------
# Floquet factorization
# -------------------------------------------------------------------
def floquet_factorize(cfg: MediumConfig, w: WaveCoordinates, grid: Sequence[float]) -> FloquetFactorization:
    """
    Sample the periodic factor Psi(x) = Phi(x) T diag(exp(-x ln lambda_j)) on a
    grid of x = x3/d >= 0, using principal logarithms.
    """
    mono = monodromy_product(cfg, w)
    if mono.regime is Regime.DEGENERATE:
        logger.warning(f"Floquet factorization at {w} close to a band edge")
    if mono.log_scale > 0.0:
        exponents = (-mono.log_growth, mono.log_growth)
    else:
        exponents = (cmath.log(mono.eigenvalues[0]), cmath.log(mono.eigenvalues[1]))
    vectors = mono.eigenvector_matrix

    psi = []
    for x in grid:
        # Psi is 1-periodic, so only the fractional part is propagated
        r = x - math.floor(x)
        decay = ComplexMat2.diag(cmath.exp(-r * exponents[0]), cmath.exp(-r * exponents[1]))
        psi.append(period_propagator(cfg, w, r) @ vectors @ decay)
    return FloquetFactorization(grid=tuple(grid), psi=tuple(psi), exponents=exponents, monodromy=mono)


# -------------------------------------------------------------------
# Field profiles
# -------------------------------------------------------------------
def decaying_mode(cfg: MediumConfig, w: WaveCoordinates) -> Tuple[Monodromy, Tuple[complex, complex]]:
    """Monodromy and its decaying eigenvector scaled to H2(0) = 1"""
    mono = monodromy_product(cfg, w)
    if mono.regime is not Regime.GAP:
        raise NotDecaying("stratified", f"regime={mono.regime.value}, |lambda|={abs(mono.eigenvalues[0]):.6g}")
    e1, h2 = mono.eigenvectors[0]
    if abs(h2) < POLE_TOL:
        raise PoleEncountered("H2(0)")
    return mono, (e1 / h2, 1.0 + 0j)


def stratified_profile(
    cfg: MediumConfig,
    w: WaveCoordinates,
    n_periods: int,
    samples_per_layer: int,
) -> FieldProfile:
    """Decaying Floquet mode on x3/d in [0, n_periods]"""
    mono, u0 = decaying_mode(cfg, w)
    lam = mono.eigenvalues[0]
    pol = cfg.polarization
    h = cfg.h
    steps_a = np.linspace(0.0, h, samples_per_layer + 1)
    steps_b = np.linspace(0.0, 1.0 - h, samples_per_layer + 1)

    samples: List[FieldSample] = []
    for n in range(n_periods):
        # each period starts from U(n) = lambda^n U(0)
        start = (u0[0] * lam**n, u0[1] * lam**n)
        for t in steps_a:
            u = layer_propagator(cfg.layer_a, w, cfg.rho, float(t), pol).matrix.apply(start)
            samples.append(FieldSample(n + float(t), u[0], u[1]))
        middle = layer_propagator(cfg.layer_a, w, cfg.rho, h, pol).matrix.apply(start)
        for j, t in enumerate(steps_b):
            u = layer_propagator(cfg.layer_b, w, cfg.rho, float(t), pol).matrix.apply(middle)
            x = n + 1.0 if j == samples_per_layer else n + h + float(t)
            samples.append(FieldSample(x, u[0], u[1]))
    end = (u0[0] * lam**n_periods, u0[1] * lam**n_periods)
    samples.append(FieldSample(float(n_periods), end[0], end[1]))
    return FieldProfile(samples=samples, wave=w, polarization=pol, multiplier=lam)


def _lorentz_boundary_ratio(cfg: MediumConfig, w: WaveCoordinates) -> complex:
    eps = lorentz.eps_hat(cfg.lorentz, w.omega_hat, cfg.polarization)
    if abs(eps) < POLE_TOL:
        raise ZeroPermittivity(f"Lorentz factor vanishes at Omega={w.omega_hat!r}")
    return lorentz.chi_l(cfg.lorentz, w, cfg.rho) / eps


def lorentz_profile(cfg: MediumConfig, w: WaveCoordinates, depth: float, samples: int) -> FieldProfile:
    """Decaying exponential on x3/d in [-depth, 0], H2(0) = 1"""
    alpha = lorentz.alpha_l(cfg.lorentz, w, cfg.rho)
    if alpha.real <= 0:
        raise NotDecaying("lorentz", f"Re(d*alpha_L)={alpha.real:.6g}")
    first = -1j * _lorentz_boundary_ratio(cfg, w)
    points = []
    for j in range(samples):
        x = -depth + depth * j / (samples - 1) if samples > 1 else 0.0
        h2 = cmath.exp(alpha * x)
        points.append(FieldSample(x, first * h2, h2))
    return FieldProfile(samples=points, wave=w, polarization=cfg.polarization, alpha_l=alpha)


def interface_profile(
    cfg: MediumConfig,
    w: WaveCoordinates,
    depth: float,
    lorentz_samples: int,
    n_periods: int,
    samples_per_layer: int,
) -> FieldProfile:
    """Two-sided profile, Lorentz side first; x3 = 0 is sampled from both sides"""
    lower = lorentz_profile(cfg, w, depth, lorentz_samples)
    upper = stratified_profile(cfg, w, n_periods, samples_per_layer)
    return FieldProfile(
        samples=lower.samples + upper.samples,
        wave=w,
        polarization=cfg.polarization,
        multiplier=upper.multiplier,
        alpha_l=lower.alpha_l,
    )


def field_at(cfg: MediumConfig, w: WaveCoordinates, x: float) -> Tuple[complex, complex]:
    """Two-sided decaying field at a single abscissa x = x3/d"""
    if x < 0:
        alpha = lorentz.alpha_l(cfg.lorentz, w, cfg.rho)
        h2 = cmath.exp(alpha * x)
        return (-1j * _lorentz_boundary_ratio(cfg, w) * h2, h2)
    mono, u0 = decaying_mode(cfg, w)
    periods = int(math.floor(x))
    scale = mono.eigenvalues[0] ** periods
    u = period_propagator(cfg, w, x - periods).apply(u0)
    return (u[0] * scale, u[1] * scale)


def generator_at(cfg: MediumConfig, w: WaveCoordinates, x: float) -> ComplexMat2:
    """Piecewise-constant generator A(x) of the two-sided system"""
    if x < 0:
        return lorentz_generator(cfg, w)
    r = x - math.floor(x)
    layer = cfg.layer_a if r < cfg.h else cfg.layer_b
    return layer_generator(layer, w, cfg.rho, cfg.polarization)
