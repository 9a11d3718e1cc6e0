"""
Core domain types, nondimensionalization and exact 2x2 complex linear algebra.

Nondimensional conventions used throughout the package:

- lengths are measured in units of the period d, so x3/d is the layer coordinate
  and k_hat = d*k is the dimensionless wavenumber;
- frequencies are measured in units of the Lorentz resonance w0, Omega = w/w0;
- rho = w0*d/c couples the two scales, so the phase velocity over c is
  v_hat = Omega*rho/k_hat;
- material constants are relative (eps/eps0, mu/mu0).
"""

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .errors import DegenerateSpectrum, MagnitudeOverflow

# Numerical tolerances
TAU_EIG = 1e-10  # relative eigenvalue separation below which the spectrum is degenerate
POLE_TOL = 1e-14  # modulus below which a ratio denominator counts as zero
SERIES_SWITCH = 1e-6  # |z| below which sinh(z)/z uses its Taylor series
LOG_MAGNITUDE_SWITCH = 300.0  # |Re z| above which cosh/sinh carry an explicit exponent
EXP_LIMIT = 700.0  # largest explicit exponent folded back into a plain float


class Polarization(str, Enum):
    """Field configuration: TE carries (E1, H2), TM carries (H1, E2)"""

    TE = "TE"
    TM = "TM"


# -------------------------------------------------------------------
# Configuration models
# -------------------------------------------------------------------
class LorentzParams(BaseModel):
    """Lorentz half-space: plasma and loss ratios to w0, constant permeability"""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    plasma_ratio: float = Field(default=2.13, ge=0.0)
    loss_ratio: float = Field(default=0.0, ge=0.0)
    mu_rel: float = 1.0


class LayerParams(BaseModel):
    """Lossless dielectric layer of the stratified half-space"""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    eps_rel: float = Field(gt=0.0)
    mu_rel: float = Field(default=1.0, gt=0.0)


class MediumConfig(BaseModel):
    """Both half-spaces in nondimensional form"""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    layer_a: LayerParams = Field(default_factory=lambda: LayerParams(eps_rel=5.0))
    layer_b: LayerParams = Field(default_factory=lambda: LayerParams(eps_rel=10.0))
    h: float = Field(default=0.5, gt=0.0, lt=1.0)
    rho: float = Field(default=1.0, gt=0.0)
    lorentz: LorentzParams = Field(default_factory=LorentzParams)
    polarization: Polarization = Polarization.TE
    description: Optional[str] = None

    @property
    def is_homogeneous(self) -> bool:
        return self.layer_a == self.layer_b

    def layer_eps_hat(self, layer: LayerParams) -> float:
        """Permittivity factor entering the TE system; TM substitutes eps -> -mu"""
        if self.polarization is Polarization.TM:
            return -layer.mu_rel
        return layer.eps_rel

    def with_loss(self, loss_ratio: float) -> "MediumConfig":
        lorentz = self.lorentz.model_copy(update={"loss_ratio": loss_ratio})
        return self.model_copy(update={"lorentz": lorentz})

    def with_polarization(self, polarization: Polarization) -> "MediumConfig":
        return self.model_copy(update={"polarization": Polarization(polarization)})

    def swapped(self) -> "MediumConfig":
        """Stack with layer B touching the interface"""
        return self.model_copy(
            update={"layer_a": self.layer_b, "layer_b": self.layer_a, "h": 1.0 - self.h}
        )


# -------------------------------------------------------------------
# Value types
# -------------------------------------------------------------------
@dataclass(frozen=True)
class WaveCoordinates:
    """Dimensionless wavenumber k_hat = d*k and frequency Omega = w/w0"""

    k_hat: float
    omega_hat: float

    def v_hat(self, rho: float) -> float:
        """Phase velocity over c"""
        return self.omega_hat * rho / self.k_hat


@dataclass(frozen=True)
class WavePoint:
    """Candidate (k_hat, Omega) with its residual and decay flags"""

    k_hat: float
    omega_hat: float
    residual: complex
    scaled_residual: float
    decay_lorentz: bool
    decay_stratified: bool
    multiplier: complex
    loss_ratio: float = 0.0

    @property
    def admissible(self) -> bool:
        return self.decay_lorentz and self.decay_stratified

    @property
    def wave(self) -> WaveCoordinates:
        return WaveCoordinates(self.k_hat, self.omega_hat)


@dataclass(frozen=True)
class ComplexMat2:
    """2x2 complex matrix [[m11, m12], [m21, m22]]"""

    m11: complex
    m12: complex
    m21: complex
    m22: complex

    @classmethod
    def identity(cls) -> "ComplexMat2":
        return cls(1.0 + 0j, 0j, 0j, 1.0 + 0j)

    @classmethod
    def diag(cls, a: complex, b: complex) -> "ComplexMat2":
        return cls(complex(a), 0j, 0j, complex(b))

    @classmethod
    def from_columns(cls, c1: Tuple[complex, complex], c2: Tuple[complex, complex]) -> "ComplexMat2":
        return cls(complex(c1[0]), complex(c2[0]), complex(c1[1]), complex(c2[1]))

    @classmethod
    def from_array(cls, a) -> "ComplexMat2":
        return cls(complex(a[0][0]), complex(a[0][1]), complex(a[1][0]), complex(a[1][1]))

    def __matmul__(self, other: "ComplexMat2") -> "ComplexMat2":
        return ComplexMat2(
            self.m11 * other.m11 + self.m12 * other.m21,
            self.m11 * other.m12 + self.m12 * other.m22,
            self.m21 * other.m11 + self.m22 * other.m21,
            self.m21 * other.m12 + self.m22 * other.m22,
        )

    def __sub__(self, other: "ComplexMat2") -> "ComplexMat2":
        return ComplexMat2(
            self.m11 - other.m11, self.m12 - other.m12, self.m21 - other.m21, self.m22 - other.m22
        )

    def scale(self, factor: complex) -> "ComplexMat2":
        return ComplexMat2(self.m11 * factor, self.m12 * factor, self.m21 * factor, self.m22 * factor)

    def apply(self, v: Tuple[complex, complex]) -> Tuple[complex, complex]:
        return (self.m11 * v[0] + self.m12 * v[1], self.m21 * v[0] + self.m22 * v[1])

    def column(self, j: int) -> Tuple[complex, complex]:
        return (self.m11, self.m21) if j == 0 else (self.m12, self.m22)

    def det(self) -> complex:
        return self.m11 * self.m22 - self.m12 * self.m21

    def trace(self) -> complex:
        return self.m11 + self.m22

    def inverse(self) -> "ComplexMat2":
        d = self.det()
        return ComplexMat2(self.m22 / d, -self.m12 / d, -self.m21 / d, self.m11 / d)

    def power(self, n: int) -> "ComplexMat2":
        result = ComplexMat2.identity()
        for _ in range(n):
            result = self @ result
        return result

    def frobenius(self) -> float:
        return math.sqrt(abs(self.m11) ** 2 + abs(self.m12) ** 2 + abs(self.m21) ** 2 + abs(self.m22) ** 2)

    def as_array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]], dtype=complex)


@dataclass(frozen=True)
class EigenPairs:
    """Eigenvalues by ascending modulus (ties by ascending argument), unit eigenvectors"""

    values: Tuple[complex, complex]
    vectors: Tuple[Tuple[complex, complex], Tuple[complex, complex]]

    def vector_matrix(self) -> ComplexMat2:
        return ComplexMat2.from_columns(self.vectors[0], self.vectors[1])


# -------------------------------------------------------------------
# Scalar helpers
# -------------------------------------------------------------------
def principal_sqrt(z: complex) -> complex:
    """Square root with argument in (-pi/2, pi/2]; a signed zero imaginary part never flips the branch"""
    z = complex(z)
    if z.imag == 0.0:
        z = complex(z.real, 0.0)
    return cmath.sqrt(z)


def sinhc(z: complex) -> complex:
    """sinh(z)/z with the removable singularity at z = 0"""
    if abs(z) < SERIES_SWITCH:
        z2 = z * z
        return 1.0 + z2 / 6.0 + z2 * z2 / 120.0 + z2 * z2 * z2 / 5040.0
    return cmath.sinh(z) / z


def cosh_sinh_scaled(z: complex) -> Tuple[complex, complex, float]:
    """
    Return (c, s, shift) with cosh z = c*e^shift and sinh z = s*e^shift.

    shift is zero unless |Re z| exceeds LOG_MAGNITUDE_SWITCH, so c and s stay
    finite for arguments where cosh itself would overflow.
    """
    z = complex(z)
    if abs(z.real) <= LOG_MAGNITUDE_SWITCH:
        return cmath.cosh(z), cmath.sinh(z), 0.0
    shift = abs(z.real)
    up = cmath.exp(z - shift)
    down = cmath.exp(-z - shift)
    return (up + down) / 2.0, (up - down) / 2.0, shift


def restore_value(value: complex, shift: float) -> complex:
    """value * e^shift, saturating to infinity instead of raising"""
    if shift == 0.0:
        return value
    if shift > EXP_LIMIT:
        return complex(math.copysign(math.inf, value.real), math.copysign(math.inf, value.imag))
    return value * math.exp(shift)


def restore_matrix(m: ComplexMat2, shift: float) -> ComplexMat2:
    """m * e^shift; raises MagnitudeOverflow when the entries leave the float range"""
    if shift == 0.0:
        return m
    if shift > EXP_LIMIT:
        raise MagnitudeOverflow(f"matrix carries e^{shift:.6g}")
    return m.scale(math.exp(shift))


# -------------------------------------------------------------------
# Operations
# -------------------------------------------------------------------
def _eigenvector(m: ComplexMat2, lam: complex) -> Tuple[complex, complex]:
    first = (m.m12, lam - m.m11)
    second = (lam - m.m22, m.m21)
    norm1 = math.hypot(abs(first[0]), abs(first[1]))
    norm2 = math.hypot(abs(second[0]), abs(second[1]))
    v, norm = (first, norm1) if norm1 >= norm2 else (second, norm2)
    if norm == 0.0:
        # m = lam*I would have been rejected as degenerate
        raise DegenerateSpectrum("eigenvector undefined")
    # largest component real and positive
    pivot = v[0] if abs(v[0]) >= abs(v[1]) else v[1]
    phase = pivot / abs(pivot)
    return (v[0] / (norm * phase), v[1] / (norm * phase))


def _argument(lam: complex) -> float:
    """Argument in [-pi, pi), so -1 sorts before 1"""
    angle = cmath.phase(lam)
    return -math.pi if angle == math.pi else angle


def _ordered(a: complex, b: complex) -> Tuple[complex, complex]:
    """Ascending modulus; moduli equal to 1e-12 relative count as a tie, broken by argument"""
    ra, rb = abs(a), abs(b)
    if abs(ra - rb) <= 1e-12 * max(ra, rb):
        return (a, b) if _argument(a) <= _argument(b) else (b, a)
    return (a, b) if ra < rb else (b, a)


def eigen_decompose(m: ComplexMat2) -> EigenPairs:
    """Closed-form eigenpairs of a 2x2 matrix with two distinct eigenvalues"""
    half_trace = m.trace() / 2.0
    disc = cmath.sqrt(half_trace * half_trace - m.det())
    big = half_trace + disc if abs(half_trace + disc) >= abs(half_trace - disc) else half_trace - disc
    small = m.det() / big if big != 0 else half_trace - disc
    if abs(big - small) <= TAU_EIG * (abs(big) + abs(small)):
        raise DegenerateSpectrum(f"repeated eigenvalue {big:.6g}")

    values = _ordered(small, big)
    vectors = tuple(_eigenvector(m, lam) for lam in values)
    return EigenPairs(values=(values[0], values[1]), vectors=vectors)


def chi(v_hat: float, eps: complex, mu: complex) -> complex:
    """sqrt(1 - v_hat^2 * mu * eps) on the principal branch"""
    return principal_sqrt(1.0 - v_hat * v_hat * mu * eps)


def nondim_chi(layer: LayerParams, w: WaveCoordinates, rho: float) -> complex:
    """Layer decay factor chi = sqrt(1 - (Omega*rho/k_hat)^2 * mu * eps)"""
    return chi(w.v_hat(rho), layer.eps_rel, layer.mu_rel)
