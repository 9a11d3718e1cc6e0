"""
Lorentz half-space: oscillator permittivity, the decay exponent alpha_L and the
generalized (frequency-dependent) impedances.

Sign convention. Fields vary as exp(i(k x1 - w t)) and the loss term is kept
exactly as the oscillator model writes it, sigma(w) = -(wp w)^2 gamma / D, so a
lossy medium has Im eps_L < 0. Nothing downstream depends on the sign of Im eps_L.

Boundary relation. Substituting H2 = C exp(alpha_L x3), x3 < 0, into the TE
system E1' = -i alpha^2/(w eps) H2, H2' = i w eps E1 gives

    E1(x3) = -i alpha_L / (w eps_L eps0) * H2(x3),

so the decaying solution carries the same minus sign as the impedance condition
E1(0) = -i alpha_L/(w eps_L eps0) H2(0). The TM system, with (H1, E2) and
eps -> -mu, gives E2 = -i w mu0 mu_L / alpha_L * H1.

Units. Internally E1 is replaced by v_hat*E1/Z0 (Z0 = sqrt(mu0/eps0), v_hat the
phase velocity over c). In those units the TE boundary vector is
(-i chi_L/eps_L, 1) with chi_L = d*alpha_L/k_hat, and

    impedance_te  = chi_L / eps_L          (dimensional:  -i alpha_L/(w eps_L eps0) = Z0 * (-i/v_hat) * impedance_te)
    impedance_tm  = mu_L / chi_L           (dimensional:  -i w mu0 mu_L/alpha_L  = Z0 * (-i v_hat) * impedance_tm)

The classical Leontovich impedance Z = sqrt(mu_L/eps_L), in units of Z0, is the
limit of the TE coefficient for |k^2/(w^2 eps_L)| -> 0; the TM coefficient tends
to -Z (E_t = Z n x H_t with n = -e3 gives E1 = Z H2 and E2 = -Z H1).
"""

import logging
from dataclasses import dataclass
from typing import Tuple

from .core import (
    POLE_TOL,
    LorentzParams,
    Polarization,
    WaveCoordinates,
    principal_sqrt,
)
from .errors import BranchPoint, ResonancePole, ZeroPermittivity

logger = logging.getLogger(__name__)

RESONANCE_TOL = 1e-14


@dataclass(frozen=True)
class Permittivity:
    """eps_L = real_part + i * loss_over_omega"""

    value: complex
    real_part: float
    loss_over_omega: float


def permittivity(lp: LorentzParams, omega_hat: float) -> Permittivity:
    """Lorentz permittivity from its real part and conductivity term"""
    p2 = lp.plasma_ratio * lp.plasma_ratio
    if lp.loss_ratio == 0.0 and abs(omega_hat - 1.0) < RESONANCE_TOL and p2 != 0.0:
        raise ResonancePole(f"lossless Lorentz resonance at Omega={omega_hat!r}")

    detuning = 1.0 - omega_hat * omega_hat
    damping = omega_hat * lp.loss_ratio
    denominator = detuning * detuning + damping * damping
    if p2 == 0.0:
        return Permittivity(value=1.0 + 0j, real_part=1.0, loss_over_omega=0.0)

    real_part = 1.0 + p2 * detuning / denominator
    loss_over_omega = -p2 * damping / denominator if lp.loss_ratio != 0.0 else 0.0
    return Permittivity(
        value=complex(real_part, loss_over_omega),
        real_part=real_part,
        loss_over_omega=loss_over_omega,
    )


def permittivity_compact(lp: LorentzParams, omega_hat: float) -> complex:
    """Same permittivity as 1 + P^2 / ((1 - Omega^2) + i Omega Gamma)"""
    p2 = lp.plasma_ratio * lp.plasma_ratio
    if p2 == 0.0:
        return 1.0 + 0j
    pole = complex(1.0 - omega_hat * omega_hat, omega_hat * lp.loss_ratio)
    if pole == 0:
        raise ResonancePole(f"lossless Lorentz resonance at Omega={omega_hat!r}")
    return 1.0 + p2 / pole


def eps_hat(lp: LorentzParams, omega_hat: float, polarization: Polarization) -> complex:
    """Lorentz factor playing the role of eps in the polarization's system"""
    if polarization is Polarization.TM:
        return complex(-lp.mu_rel)
    return permittivity(lp, omega_hat).value


def alpha_l(lp: LorentzParams, w: WaveCoordinates, rho: float) -> complex:
    """d*alpha_L = sqrt(k_hat^2 - (Omega rho)^2 eps_L mu_L), arg in (-pi/2, pi/2]"""
    eps_l = permittivity(lp, w.omega_hat).value
    wave = w.omega_hat * rho
    return principal_sqrt(w.k_hat * w.k_hat - wave * wave * eps_l * lp.mu_rel)


def chi_l(lp: LorentzParams, w: WaveCoordinates, rho: float) -> complex:
    """chi_L slaved to the alpha_L branch: d*alpha_L / k_hat"""
    return alpha_l(lp, w, rho) / w.k_hat


def impedance_te(lp: LorentzParams, w: WaveCoordinates, rho: float) -> complex:
    """Nondimensional generalized TE impedance chi_L / eps_L"""
    eps_l = permittivity(lp, w.omega_hat).value
    if abs(eps_l) < POLE_TOL:
        raise ZeroPermittivity(f"eps_L vanishes at Omega={w.omega_hat!r}")
    return chi_l(lp, w, rho) / eps_l


def impedance_tm(lp: LorentzParams, w: WaveCoordinates, rho: float) -> complex:
    """Nondimensional generalized TM impedance mu_L / chi_L"""
    value = chi_l(lp, w, rho)
    if abs(value) < POLE_TOL:
        raise BranchPoint(f"chi_L vanishes at k_hat={w.k_hat!r}, Omega={w.omega_hat!r}")
    return lp.mu_rel / value


def classical_impedance(lp: LorentzParams, omega_hat: float) -> complex:
    """Classical Leontovich impedance sqrt(mu_L/eps_L) in units of Z0"""
    eps_l = permittivity(lp, omega_hat).value
    if abs(eps_l) < POLE_TOL:
        raise ZeroPermittivity(f"eps_L vanishes at Omega={omega_hat!r}")
    return principal_sqrt(lp.mu_rel / eps_l)


def classical_limit_error(
    lp: LorentzParams,
    w: WaveCoordinates,
    rho: float,
    polarization: Polarization = Polarization.TE,
) -> Tuple[complex, complex, float]:
    """
    Compare the generalized impedance coefficient (units of Z0) with its
    classical Leontovich counterpart.

    Returns (generalized, classical, relative_error); the error is of order
    |k_hat^2 / ((Omega rho)^2 eps_L mu_L)|.
    """
    wave = w.omega_hat * rho
    if polarization is Polarization.TM:
        alpha = alpha_l(lp, w, rho)
        if abs(alpha) < POLE_TOL:
            raise BranchPoint(f"alpha_L vanishes at k_hat={w.k_hat!r}, Omega={w.omega_hat!r}")
        generalized = -1j * wave * lp.mu_rel / alpha
        classical = -classical_impedance(lp, w.omega_hat)
    else:
        generalized = -1j * impedance_te(lp, w, rho) * w.k_hat / wave
        classical = classical_impedance(lp, w.omega_hat)
    relative_error = abs(generalized - classical) / abs(classical)
    logger.debug(f"Leontovich comparison at {w}: generalized={generalized}, classical={classical}")
    return generalized, classical, relative_error
