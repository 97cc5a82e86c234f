"""Smearing coefficients of the short-scale expansion for one detector shape.

Five of the six coefficients have closed forms for ellipsoidal Gaussians,
expressed here through Carlson symmetric integrals (the numerically stable
equivalents of the incomplete-F/E forms; they remain well behaved at equal
axis parameters, so degenerate shapes need no special casing):

    L_0     = lam^2 abc R_F(a^2, b^2, c^2) / (16 pi^2)
    L^{kk}  = lam^2 abc R_D(., ., a_k^2) / (24 pi^2)   (principal frame)
    E^{kk}  = 1 / a_k^2                                 (Gaussian moment ratio)
    Q^ij    = L^ij / 4 + L_0 E^ij / 2
    L_omega = lam^2 / (8 pi^2)                          (shape independent)
    D^i     = 0                                         (parity)

The log-kernel coefficient L_R has no closed form and is evaluated by the
same semi-analytic reduction the quadrature oracle uses.  Every closed form
above is gated against the oracle in the validation suite; mismatches of the
published display constants are recorded in the validation report and the
oracle-consistent values here are what the rest of the pipeline consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .oracle import KernelKind, OracleConfig, b_functional
from .shapes import DetectorShape
from .special_functions import carlson_rd, carlson_rf, digamma

__all__ = [
    "DetectorShape",
    "CoefficientSet",
    "coeff_l0",
    "coeff_lomega",
    "coeff_d",
    "coeff_lij",
    "coeff_qij",
    "coeff_lr",
    "full_set",
]

_LR_CFG = OracleConfig(angular_tolerance=1e-11)


@dataclass(frozen=True)
class CoefficientSet:
    """The six smearing coefficients of one shape, in lab-frame components.

    provenance records, per entry, whether the value came from an
    oracle-validated closed form or the semi-analytic reduction.
    """

    l0: float
    q: np.ndarray
    d: np.ndarray
    lij: np.ndarray
    lr: float
    lomega: float
    provenance: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("q", "d", "lij"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.l0 <= 0:
            raise DomainError(f"l0 must be positive for a valid shape, got {self.l0}")

    def as_dict(self) -> dict:
        return {
            "l0": self.l0,
            "q": self.q.tolist(),
            "d": self.d.tolist(),
            "lij": self.lij.tolist(),
            "lr": self.lr,
            "lomega": self.lomega,
            "provenance": dict(self.provenance),
        }


def _rotate_rank2(shape: DetectorShape, principal_diag: np.ndarray) -> np.ndarray:
    rot = shape.rotation
    return rot @ np.diag(principal_diag) @ rot.T


def coeff_l0(shape: DetectorShape) -> float:
    """Flat-space coefficient L_0 (dimensionless, rotation invariant)."""
    ev = shape.eigenvalues
    return (
        shape.coupling ** 2
        * shape.sqrt_det
        * carlson_rf(ev[0], ev[1], ev[2])
        / (16.0 * math.pi ** 2)
    )


def coeff_lomega(shape: DetectorShape) -> float:
    """Trace coefficient L_omega = lam^2 / (8 pi^2), independent of shape."""
    return shape.coupling ** 2 / (8.0 * math.pi ** 2)


def coeff_d(shape: DetectorShape) -> np.ndarray:
    """Linear coefficient D^i; exactly zero by parity for any ellipsoidal Gaussian."""
    return np.zeros(3)


def _lij_principal(shape: DetectorShape) -> np.ndarray:
    ev = shape.eigenvalues
    pre = shape.coupling ** 2 * shape.sqrt_det / (24.0 * math.pi ** 2)
    return pre * np.array(
        [
            carlson_rd(ev[1], ev[2], ev[0]),
            carlson_rd(ev[0], ev[2], ev[1]),
            carlson_rd(ev[0], ev[1], ev[2]),
        ]
    )


def coeff_lij(shape: DetectorShape) -> np.ndarray:
    """Relative-coordinate tensor L^ij, rotated to the lab frame.

    Diagonal in the principal frame; its trace reproduces L_omega exactly
    through the Carlson identity R_D(y,z,x) + R_D(z,x,y) + R_D(x,y,z)
    = 3/sqrt(xyz).
    """
    return _rotate_rank2(shape, _lij_principal(shape))


def coeff_qij(shape: DetectorShape) -> np.ndarray:
    """Center-of-mass tensor Q^ij = L^ij/4 + L_0 E^ij / 2 in the lab frame.

    E^ij is the ratio of Gaussian second to zeroth moments, i.e. the inverse
    of the bilinear map: 1/a_k^2 per principal axis.
    """
    e_principal = 1.0 / shape.eigenvalues
    diag = 0.25 * _lij_principal(shape) + 0.5 * coeff_l0(shape) * e_principal
    return _rotate_rank2(shape, diag)


def coeff_lr(shape: DetectorShape, cfg: OracleConfig = _LR_CFG) -> float:
    """Log-kernel coefficient L_R by the semi-analytic reduction.

    No closed form exists; the reduction leaves one smooth angular integral,
    evaluated adaptively.  Rotation invariant since the kernel depends only
    on |x - x'|.
    """
    return b_functional(shape, KernelKind.diff_squared_log(), cfg=cfg)


def lr_sphere(sigma: float = 1.0, coupling: float = 1.0) -> float:
    """Exact L_R for a spherical shape: lam^2 (psi(3/2) + ln 2) / (8 pi^2) + L_omega ln(sigma^2) factor."""
    lam2 = coupling ** 2
    return lam2 * (digamma(1.5) + math.log(2.0) + math.log(sigma ** 2)) / (8.0 * math.pi ** 2)


def full_set(shape: DetectorShape, cfg: OracleConfig = _LR_CFG) -> CoefficientSet:
    """All six coefficients with provenance tags."""
    closed = "closed_form"
    return CoefficientSet(
        l0=coeff_l0(shape),
        q=coeff_qij(shape),
        d=coeff_d(shape),
        lij=coeff_lij(shape),
        lr=coeff_lr(shape, cfg),
        lomega=coeff_lomega(shape),
        provenance={
            "l0": closed,
            "q": closed,
            "d": closed,
            "lij": closed,
            "lr": "semi_analytic",
            "lomega": closed,
        },
    )
