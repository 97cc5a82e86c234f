"""Ellipsoidal-Gaussian detector shapes.

A shape is the normalized smearing profile

    f(x) = sqrt(det a) / (2 pi)^{3/2} * exp(-a_ij x^i x^j / 2),

parametrized by the principal inverse lengths (a, b, c) whose squares are
the eigenvalues of a_ij, a proper rotation taking the principal frame to
the lab frame, and the coupling strength (units of length).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = ["DetectorShape", "rotation_about", "random_shape", "random_rotation"]

_ORTHO_TOL = 1e-12


def rotation_about(axis, angle: float) -> np.ndarray:
    """Rotation matrix for a right-handed rotation by `angle` about `axis`."""
    axis = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(axis)
    if norm == 0:
        raise DomainError("rotation axis must be nonzero")
    n = axis / norm
    k = np.array([[0, -n[2], n[1]], [n[2], 0, -n[0]], [-n[1], n[0], 0]])
    return np.eye(3) + np.sin(angle) * k + (1 - np.cos(angle)) * (k @ k)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random proper rotation via QR of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


@dataclass(frozen=True)
class DetectorShape:
    """Rotated ellipsoidal-Gaussian smearing profile.

    axes: principal inverse lengths (a, b, c), canonicalized to a <= b <= c.
    rotation: proper orthogonal matrix mapping principal to lab coordinates;
        any permutation needed by the axis sort is absorbed into it.
    coupling: effective coupling constant lambda (units of length).
    """

    axes: tuple[float, float, float]
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    coupling: float = 1.0

    def __post_init__(self):
        axes = tuple(float(a) for a in self.axes)
        if len(axes) != 3 or any(not a > 0 or not np.isfinite(a) for a in axes):
            raise DomainError(f"axes must be three positive finite reals, got {self.axes}")
        if not (self.coupling > 0 and np.isfinite(self.coupling)):
            raise DomainError(f"coupling must be positive, got {self.coupling}")
        rot = np.array(self.rotation, dtype=float)
        if rot.shape != (3, 3):
            raise DomainError("rotation must be a 3x3 matrix")
        if np.max(np.abs(rot.T @ rot - np.eye(3))) > 1e-10:
            raise DomainError("rotation is not orthogonal")
        if np.linalg.det(rot) < 0:
            raise DomainError("rotation must be proper (det = +1)")

        # Canonicalize: sort axes ascending, absorb the permutation into the
        # rotation (sign-fixed to keep det = +1).
        order = np.argsort(axes, kind="stable")
        if not np.array_equal(order, [0, 1, 2]):
            perm = np.zeros((3, 3))
            perm[order, np.arange(3)] = 1.0
            if np.linalg.det(perm) < 0:
                perm[:, 0] = -perm[:, 0]
            rot = rot @ perm
            axes = tuple(axes[k] for k in order)
        rot.flags.writeable = False
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "coupling", float(self.coupling))

    # -- constructors ------------------------------------------------------

    @classmethod
    def sphere(cls, sigma: float = 1.0, coupling: float = 1.0) -> "DetectorShape":
        """Spherical detector of characteristic size sigma (a=b=c=1/sigma)."""
        return cls((1.0 / sigma,) * 3, np.eye(3), coupling)

    # -- derived quantities -------------------------------------------------

    @property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues (a^2, b^2, c^2) of the bilinear map a_ij."""
        return np.asarray(self.axes, dtype=float) ** 2

    @property
    def lab_matrix(self) -> np.ndarray:
        """The bilinear map a_ij in lab coordinates."""
        return self.rotation @ np.diag(self.eigenvalues) @ self.rotation.T

    @property
    def sqrt_det(self) -> float:
        """sqrt(det a_ij) = a*b*c."""
        a, b, c = self.axes
        return a * b * c

    # -- transforms ----------------------------------------------------------

    def rotated(self, rot: np.ndarray) -> "DetectorShape":
        """Shape rotated by an additional lab-frame rotation."""
        return DetectorShape(self.axes, np.asarray(rot, float) @ self.rotation, self.coupling)

    def dilated(self, s: float) -> "DetectorShape":
        """Uniform dilation: all lengths scaled by s (inverse lengths by 1/s)."""
        if not s > 0:
            raise DomainError(f"dilation factor must be positive, got {s}")
        return DetectorShape(tuple(a / s for a in self.axes), self.rotation, self.coupling)

    def key_bytes(self) -> bytes:
        """Stable digest of the shape, for keying deterministic RNG streams."""
        h = hashlib.blake2b(digest_size=16)
        h.update(np.asarray(self.axes, dtype=np.float64).tobytes())
        h.update(np.asarray(self.rotation, dtype=np.float64).tobytes())
        h.update(np.float64(self.coupling).tobytes())
        return h.digest()


def random_shape(
    rng: np.random.Generator,
    axis_range: tuple[float, float] = (0.5, 2.5),
    coupling: float = 1.0,
) -> DetectorShape:
    """Random triaxial shape with a Haar-random orientation."""
    lo, hi = axis_range
    axes = tuple(sorted(rng.uniform(lo, hi, size=3)))
    return DetectorShape(axes, random_rotation(rng), coupling)
