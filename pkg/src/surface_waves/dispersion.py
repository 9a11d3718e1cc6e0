"""
Dispersion residual of the interfacial wave, its decay conditions and the
closed-form relations of the homogeneous-layer limit.

With S_A = sinh(chi_A k_hat h), C_A = cosh(chi_A k_hat h), S_B, C_B likewise over
the thickness 1 - h, and zeta = chi_L / eps_L, the residual is

    [chi_A eps_B/(chi_B eps_A) - chi_B eps_A/(chi_A eps_B)] S_A S_B
  + [zeta eps_A/chi_A - chi_A/(zeta eps_A)] S_A C_B
  + [zeta eps_B/chi_B - chi_B/(zeta eps_B)] S_B C_A

It vanishes exactly when (-i zeta, 1) is an eigenvector of the monodromy
matrix; the matching eigenvalue is the multiplier

    C_B C_A + chi_A eps_B/(chi_B eps_A) S_B S_A + zeta (eps_A/chi_A C_B S_A + eps_B/chi_B S_B C_A).

TM substitutes eps -> -mu everywhere, the Lorentz factor included.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import lorentz
from .core import (
    POLE_TOL,
    LayerParams,
    LorentzParams,
    MediumConfig,
    Polarization,
    WaveCoordinates,
    cosh_sinh_scaled,
    nondim_chi,
    restore_value,
    sinhc,
)
from .errors import DegenerateDenominator, ModeMisuse, PoleEncountered

logger = logging.getLogger(__name__)

CANCELLATION = 1e-8  # relative size below which a scaled multiplier is treated as cancelled


@dataclass(frozen=True)
class ResidualValue:
    """Residual with its magnitude scale; scaled = value / scale is what root tests use"""

    value: complex
    scale: float
    scaled: complex
    chi_a: complex
    chi_b: complex
    chi_l: Optional[complex] = None

    @property
    def re(self) -> float:
        return self.value.real

    @property
    def im(self) -> float:
        return self.value.imag


@dataclass(frozen=True)
class Admissibility:
    decay_lorentz: bool
    decay_stratified: bool
    multiplier: complex
    alpha_l: complex

    @property
    def admissible(self) -> bool:
        return self.decay_lorentz and self.decay_stratified


def _require(value: complex, name: str) -> complex:
    if abs(value) < POLE_TOL:
        raise PoleEncountered(name)
    return value


def _layer_factors(cfg: MediumConfig, w: WaveCoordinates, chi_a: Optional[complex], chi_b: Optional[complex]):
    ca = nondim_chi(cfg.layer_a, w, cfg.rho) if chi_a is None else chi_a
    cb = nondim_chi(cfg.layer_b, w, cfg.rho) if chi_b is None else chi_b
    return ca, cb, cfg.layer_eps_hat(cfg.layer_a), cfg.layer_eps_hat(cfg.layer_b)


def boundary_ratio(cfg: MediumConfig, w: WaveCoordinates) -> complex:
    """zeta = chi_L / eps_hat_L; the boundary vector is (-i zeta, 1)"""
    eps_l = _require(lorentz.eps_hat(cfg.lorentz, w.omega_hat, cfg.polarization), "eps_L")
    return lorentz.chi_l(cfg.lorentz, w, cfg.rho) / eps_l


def residual(
    cfg: MediumConfig,
    w: WaveCoordinates,
    *,
    chi_a: Optional[complex] = None,
    chi_b: Optional[complex] = None,
) -> ResidualValue:
    """
    Evaluate the three-bracket dispersion residual at (k_hat, Omega).

    chi_a / chi_b override the principal layer factors; the residual is even in
    each of them. Raises PoleEncountered naming the vanishing denominator.
    """
    ca, cb, ea, eb = _layer_factors(cfg, w, chi_a, chi_b)
    _require(ca, "chi_A")
    _require(cb, "chi_B")
    cl = lorentz.chi_l(cfg.lorentz, w, cfg.rho)
    zeta = _require(boundary_ratio(cfg, w), "chi_L")

    c_a, s_a, shift_a = cosh_sinh_scaled(ca * w.k_hat * cfg.h)
    c_b, s_b, shift_b = cosh_sinh_scaled(cb * w.k_hat * (1.0 - cfg.h))

    terms = (
        (ca * eb) / (cb * ea) * s_a * s_b,
        -(cb * ea) / (ca * eb) * s_a * s_b,
        zeta * ea / ca * s_a * c_b,
        -ca / (zeta * ea) * s_a * c_b,
        zeta * eb / cb * s_b * c_a,
        -cb / (zeta * eb) * s_b * c_a,
    )
    total = sum(terms)
    scale = max(abs(t) for t in terms)
    scaled = total / scale if scale > 0.0 else 0j
    shift = shift_a + shift_b
    return ResidualValue(
        value=restore_value(total, shift),
        scale=restore_value(complex(scale), shift).real,
        scaled=scaled,
        chi_a=ca,
        chi_b=cb,
        chi_l=cl,
    )


def impedance_residual(cfg: MediumConfig, w: WaveCoordinates, boundary: complex) -> ResidualValue:
    """
    Dispersion condition of the stratified half-space under an impedance
    boundary U(0) ~ (-i boundary, 1).

    Written through sinh(z)/z, so it stays regular at chi_A = 0, chi_B = 0 and
    at boundary = 0 (perfectly conducting wall). For boundary = chi_L/eps_hat_L
    it equals -boundary times residual().
    """
    ca, cb, ea, eb = _layer_factors(cfg, w, None, None)
    ta = w.k_hat * cfg.h
    tb = w.k_hat * (1.0 - cfg.h)
    za, zb = ca * ta, cb * tb
    c_a, s_a, shift_a = cosh_sinh_scaled(za)
    c_b, s_b, shift_b = cosh_sinh_scaled(zb)
    # sinh(z)/chi = t*sinhc(z), rescaled by the same exponent as s
    q_a = ta * sinhc(za) if shift_a == 0.0 else s_a / ca
    q_b = tb * sinhc(zb) if shift_b == 0.0 else s_b / cb
    p_a = ca * s_a
    p_b = cb * s_b

    # zeta (T11 - T22) + i T12 + i zeta^2 T21
    terms = (
        boundary * (ea / eb) * q_a * p_b,
        -boundary * (eb / ea) * p_a * q_b,
        (ca * ca / ea) * q_a * c_b,
        (cb * cb / eb) * q_b * c_a,
        -boundary * boundary * ea * q_a * c_b,
        -boundary * boundary * eb * q_b * c_a,
    )
    total = sum(terms)
    scale = max(abs(t) for t in terms)
    scaled = total / scale if scale > 0.0 else 0j
    shift = shift_a + shift_b
    return ResidualValue(
        value=restore_value(total, shift),
        scale=restore_value(complex(scale), shift).real,
        scaled=scaled,
        chi_a=ca,
        chi_b=cb,
    )


def multiplier(cfg: MediumConfig, w: WaveCoordinates) -> complex:
    """
    Candidate Floquet multiplier of the boundary vector (-i zeta, 1).

    With large layer phases the direct value cancels to rounding; on a root the
    two multipliers have product 1, so the decaying one is taken as the
    reciprocal of trace minus the growing one.
    """
    ca, cb, ea, eb = _layer_factors(cfg, w, None, None)
    _require(ca, "chi_A")
    _require(cb, "chi_B")
    zeta = boundary_ratio(cfg, w)
    c_a, s_a, shift_a = cosh_sinh_scaled(ca * w.k_hat * cfg.h)
    c_b, s_b, shift_b = cosh_sinh_scaled(cb * w.k_hat * (1.0 - cfg.h))
    value = (
        c_b * c_a
        + (ca * eb) / (cb * ea) * s_b * s_a
        + zeta * (ea / ca * c_b * s_a + eb / cb * s_b * c_a)
    )
    shift = shift_a + shift_b
    if shift == 0.0:
        return value
    trace = 2.0 * c_b * c_a + ((ca * eb) / (cb * ea) + (cb * ea) / (ca * eb)) * s_b * s_a
    if abs(value) <= CANCELLATION * abs(trace):
        return math.exp(-shift) / (trace - value)
    return restore_value(value, shift)


def admissibility(cfg: MediumConfig, w: WaveCoordinates) -> Admissibility:
    """Decay into the Lorentz side (Re alpha_L > 0) and into the layers (|multiplier| < 1)"""
    alpha = lorentz.alpha_l(cfg.lorentz, w, cfg.rho)
    lam = multiplier(cfg, w)
    return Admissibility(
        decay_lorentz=alpha.real > 0.0,
        decay_stratified=abs(lam) < 1.0,
        multiplier=lam,
        alpha_l=alpha,
    )


# -------------------------------------------------------------------
# Homogeneous layers
# -------------------------------------------------------------------
def _homogeneous_layer(cfg: MediumConfig) -> LayerParams:
    if not cfg.is_homogeneous:
        raise ModeMisuse("homogeneous relation needs layer_a == layer_b")
    return cfg.layer_a


def homogeneous_phase_velocity_squared(
    layer: LayerParams,
    eps_l: complex,
    mu_l: float,
    polarization: Polarization = Polarization.TE,
) -> complex:
    """
    v_hat^2 of the wave along a homogeneous layer material bounded by (eps_L, mu_L):

        v_hat^2 = (e_L^2 - e_A^2) / (e_L^2 mu_A eps_A - e_A^2 mu_L eps_L)

    with e = eps for TE and e = -mu for TM.
    """
    if polarization is Polarization.TM:
        ea, el = -layer.mu_rel, complex(-mu_l)
    else:
        ea, el = layer.eps_rel, complex(eps_l)
    numerator = el * el - ea * ea
    left = el * el * layer.mu_rel * layer.eps_rel
    right = ea * ea * mu_l * eps_l
    denominator = left - right
    if abs(denominator) <= POLE_TOL * max(1.0, abs(left), abs(right)):
        raise DegenerateDenominator(f"homogeneous relation undefined for eps_L={eps_l!r}, mu_L={mu_l!r}")
    return numerator / denominator


def homogeneous_dispersion(cfg: MediumConfig, omega_hat: float) -> complex:
    """Closed-form (Omega rho / k_hat)^2 of a homogeneous-layer config; complex when lossy"""
    layer = _homogeneous_layer(cfg)
    eps_l = lorentz.permittivity(cfg.lorentz, omega_hat).value
    return homogeneous_phase_velocity_squared(layer, eps_l, cfg.lorentz.mu_rel, cfg.polarization)


def homogeneous_k_hat(cfg: MediumConfig, omega_hat: float) -> Optional[float]:
    """Real wavenumber from the closed form, None when v_hat^2 is not positive real"""
    v2 = homogeneous_dispersion(cfg, omega_hat)
    if abs(v2.imag) > 1e-12 * abs(v2) or v2.real <= 0.0:
        return None
    return omega_hat * cfg.rho / math.sqrt(v2.real)


def homogeneous_factor(cfg: MediumConfig, w: WaveCoordinates) -> complex:
    """Single-factor form sinh(chi k_hat) [eps_L chi_A/(eps_A chi_L) - eps_A chi_L/(eps_L chi_A)]"""
    layer = _homogeneous_layer(cfg)
    ca = _require(nondim_chi(layer, w, cfg.rho), "chi_A")
    ea = cfg.layer_eps_hat(layer)
    el = _require(lorentz.eps_hat(cfg.lorentz, w.omega_hat, cfg.polarization), "eps_L")
    cl = _require(lorentz.chi_l(cfg.lorentz, w, cfg.rho), "chi_L")
    _, s, shift = cosh_sinh_scaled(ca * w.k_hat)
    return restore_value(s * (el * ca / (ea * cl) - ea * cl / (el * ca)), shift)


def babich_limit(layer: LayerParams, eps_l: float, mu_l: float) -> float:
    """Phase velocity over c for |eps_L| large, keeping the first correction in mu_L/eps_L"""
    inner = layer.eps_rel * layer.mu_rel * (1.0 - mu_l * layer.eps_rel / (eps_l * layer.mu_rel))
    return 1.0 / math.sqrt(inner)


def homogeneous_required_permittivity(layer: LayerParams, mu_l: float, v_hat: float) -> Tuple[float, ...]:
    """
    Real eps_L values for which a homogeneous layer supports a TE interfacial
    wave of phase velocity v_hat (roots of the closed form solved for eps_L).
    """
    ea, ma = layer.eps_rel, layer.mu_rel
    v2 = v_hat * v_hat
    coefficients = [1.0 - v2 * ea * ma, v2 * ea * ea * mu_l, -ea * ea]
    roots = np.roots(coefficients)
    real = [float(r.real) for r in roots if abs(r.imag) <= 1e-12 * max(1.0, abs(r))]
    return tuple(sorted(real))


def homogeneous_loss(lp: LorentzParams, omega_hat: float, eps_l: complex) -> Optional[float]:
    """
    Loss ratio Gamma that makes the Lorentz model produce eps_l at Omega, or
    None when no Gamma >= 0 does.
    """
    if lp.plasma_ratio == 0.0 or omega_hat <= 0.0:
        return None
    offset = complex(eps_l) - 1.0
    if abs(offset) < POLE_TOL:
        return None
    pole = lp.plasma_ratio**2 / offset
    tolerance = 1e-9 * max(1.0, abs(pole))
    if abs(pole.real - (1.0 - omega_hat * omega_hat)) > tolerance or pole.imag < -tolerance:
        return None
    return max(pole.imag, 0.0) / omega_hat
