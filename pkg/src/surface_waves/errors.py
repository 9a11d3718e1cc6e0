"""
Exception hierarchy for the surface wave solver.

Library code raises these; the CLI maps them to exit codes.
"""

from typing import Any, List, Optional


class SurfaceWaveError(Exception):
    """Base class for every solver failure"""


class ConfigError(SurfaceWaveError):
    """Config file unreadable or invalid"""


class ModeMisuse(SurfaceWaveError):
    """Command or operation used with an incompatible configuration"""


class DegenerateSpectrum(SurfaceWaveError):
    """Repeated eigenvalue; Floquet factorization is unavailable (band edge)"""


class MagnitudeOverflow(SurfaceWaveError):
    """Propagator entries beyond the float range; only their log-magnitude form exists"""


class ResonancePole(SurfaceWaveError):
    """Lossless Lorentz permittivity evaluated at the resonant frequency"""


class ZeroPermittivity(SurfaceWaveError):
    """Lorentz permittivity vanishes, the TE impedance has a pole"""


class BranchPoint(SurfaceWaveError):
    """chi_L vanishes, the TM impedance has a pole"""


class ChiZero(SurfaceWaveError):
    """Closed-form monodromy requested at chi_A = 0 or chi_B = 0"""


class PoleEncountered(SurfaceWaveError):
    """A ratio denominator in the dispersion residual vanished"""

    def __init__(self, denominator: str):
        super().__init__(f"vanishing denominator: {denominator}")
        self.denominator = denominator


class DegenerateDenominator(SurfaceWaveError):
    """Homogeneous closed-form dispersion relation is undefined"""


class NotDecaying(SurfaceWaveError):
    """Field profile requested at a point that does not decay on one side"""

    def __init__(self, side: str, detail: str = ""):
        message = f"solution does not decay into the {side} half-space"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)
        self.side = side


class NoConvergence(SurfaceWaveError):
    """Newton iteration did not converge"""


class InadmissibleRoot(SurfaceWaveError):
    """Converged root violates a decay condition"""


class CurveTerminated(SurfaceWaveError):
    """Continuation ran out of step halvings"""

    def __init__(self, points: List[Any], last_log_gamma: Optional[float], attempted: float):
        last = "none" if last_log_gamma is None else f"{last_log_gamma:.6g}"
        super().__init__(f"continuation terminated at log10(gamma)={attempted:.6g}, last good {last}")
        self.points = points
        self.last_log_gamma = last_log_gamma
        self.attempted = attempted
