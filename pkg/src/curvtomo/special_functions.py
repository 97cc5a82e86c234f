"""Incomplete elliptic integrals and auxiliary special functions.

The incomplete integrals F and E are evaluated through the Carlson symmetric
forms R_F and R_D, computed with the standard duplication algorithm
(Carlson, "Numerical computation of real or complex elliptic integrals",
1994).  Duplication converges for the full argument range needed here and
has no removable singularities at equal arguments, which matters for the
degenerate-axis detector shapes downstream.

Convention: the second slot of F and E is the *parameter* m = k^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import scipy.special

from .errors import DomainError, PoleError

__all__ = [
    "EllipticArgs",
    "carlson_rf",
    "carlson_rd",
    "ellip_f",
    "ellip_e",
    "digamma",
]

# Duplication steps shrink the argument spread by 4x per iteration; 100 steps
# is far beyond anything reachable from finite double inputs.
_MAX_ITER = 100
_RELERR = 2.5e-16


@dataclass(frozen=True)
class EllipticArgs:
    """Amplitude/parameter pair for the incomplete integrals.

    phi is the amplitude in radians, m the parameter (square of the
    modulus k).  This artifact only ever needs 0 <= phi <= pi/2 and
    0 <= m <= 1.
    """

    phi: float
    m: float

    def __post_init__(self):
        if not (0.0 <= self.phi <= math.pi / 2 + 1e-15):
            raise DomainError(f"amplitude phi={self.phi} outside [0, pi/2]")
        if not (0.0 <= self.m <= 1.0):
            raise DomainError(f"parameter m={self.m} outside [0, 1]")


def carlson_rf(x: float, y: float, z: float) -> float:
    """Carlson symmetric integral R_F(x, y, z).

    R_F(x,y,z) = (1/2) int_0^inf dt / sqrt((t+x)(t+y)(t+z)).

    Arguments must be nonnegative and at most one may be zero.  Relative
    accuracy is ~1e-15.
    """
    args = (x, y, z)
    if any(a < 0 or not math.isfinite(a) for a in args):
        raise DomainError(f"carlson_rf requires nonnegative finite args, got {args}")
    if sum(1 for a in args if a == 0.0) > 1:
        raise DomainError(f"carlson_rf: at most one argument may be zero, got {args}")

    a_mean = (x + y + z) / 3.0
    q = (3.0 * _RELERR) ** (-1.0 / 8.0) * max(
        abs(a_mean - x), abs(a_mean - y), abs(a_mean - z)
    )
    for _ in range(_MAX_ITER):
        if q <= abs(a_mean):
            break
        sx, sy, sz = math.sqrt(x), math.sqrt(y), math.sqrt(z)
        lam = sx * sy + sx * sz + sy * sz
        x = (x + lam) / 4.0
        y = (y + lam) / 4.0
        z = (z + lam) / 4.0
        a_mean = (a_mean + lam) / 4.0
        q /= 4.0

    dx = 1.0 - x / a_mean
    dy = 1.0 - y / a_mean
    dz = -(dx + dy)
    e2 = dx * dy - dz * dz
    e3 = dx * dy * dz
    series = (
        1.0
        - e2 / 10.0
        + e3 / 14.0
        + e2 * e2 / 24.0
        - 3.0 * e2 * e3 / 44.0
        - 5.0 * e2 ** 3 / 208.0
        + 3.0 * e3 * e3 / 104.0
        + e2 * e2 * e3 / 16.0
    )
    return series / math.sqrt(a_mean)


def carlson_rd(x: float, y: float, z: float) -> float:
    """Carlson symmetric integral R_D(x, y, z).

    R_D(x,y,z) = (3/2) int_0^inf dt / ((t+z) sqrt((t+x)(t+y)(t+z))).

    Requires x, y >= 0 with at most one of them zero, and z > 0.
    """
    if x < 0 or y < 0 or not all(math.isfinite(a) for a in (x, y, z)):
        raise DomainError(f"carlson_rd requires nonnegative finite args, got {(x, y, z)}")
    if z <= 0:
        raise DomainError(f"carlson_rd requires z > 0, got z={z}")
    if x == 0.0 and y == 0.0:
        raise DomainError("carlson_rd: at most one of x, y may be zero")

    a_mean = (x + y + 3.0 * z) / 5.0
    q = (_RELERR / 4.0) ** (-1.0 / 8.0) * max(
        abs(a_mean - x), abs(a_mean - y), abs(a_mean - z)
    )
    acc = 0.0
    fac = 1.0
    for _ in range(_MAX_ITER):
        if q <= abs(a_mean):
            break
        sx, sy, sz = math.sqrt(x), math.sqrt(y), math.sqrt(z)
        lam = sx * sy + sx * sz + sy * sz
        acc += fac / (sz * (z + lam))
        fac /= 4.0
        x = (x + lam) / 4.0
        y = (y + lam) / 4.0
        z = (z + lam) / 4.0
        a_mean = (a_mean + lam) / 4.0
        q /= 4.0

    dx = fac * (1.0 - x / a_mean)
    dy = fac * (1.0 - y / a_mean)
    dz = -(dx + dy) / 3.0
    e2 = dx * dy - 6.0 * dz * dz
    e3 = (3.0 * dx * dy - 8.0 * dz * dz) * dz
    e4 = 3.0 * (dx * dy - dz * dz) * dz * dz
    e5 = dx * dy * dz ** 3
    series = (
        1.0
        - 3.0 * e2 / 14.0
        + e3 / 6.0
        + 9.0 * e2 * e2 / 88.0
        - 3.0 * e4 / 22.0
        - 9.0 * e2 * e3 / 52.0
        + 3.0 * e5 / 26.0
        - e2 ** 3 / 16.0
        + 3.0 * e3 * e3 / 40.0
        + 3.0 * e2 * e4 / 20.0
        + 45.0 * e2 * e2 * e3 / 272.0
        - 9.0 * (e3 * e4 + e2 * e5) / 68.0
    )
    return 3.0 * acc + fac * series / (a_mean * math.sqrt(a_mean))


def ellip_f(args: EllipticArgs) -> float:
    """Incomplete elliptic integral of the first kind, F(phi; m).

    F(phi; m) = int_0^phi dtheta / sqrt(1 - m sin^2 theta), with m = k^2.
    Diverges at (phi, m) = (pi/2, 1), which is rejected.
    """
    s = math.sin(args.phi)
    c2 = math.cos(args.phi) ** 2
    delta = 1.0 - args.m * s * s
    if delta <= 0.0 and c2 < 1e-30:
        raise PoleError("F(pi/2; m=1) is logarithmically divergent")
    if s == 0.0:
        return 0.0
    return s * carlson_rf(c2, delta, 1.0)


def ellip_e(args: EllipticArgs) -> float:
    """Incomplete elliptic integral of the second kind, E(phi; m).

    E(phi; m) = int_0^phi dtheta sqrt(1 - m sin^2 theta), with m = k^2.
    Finite everywhere on the valid domain; E(phi; 1) = sin(phi).
    """
    s = math.sin(args.phi)
    if s == 0.0:
        return 0.0
    if args.m == 1.0:
        return s
    c2 = math.cos(args.phi) ** 2
    delta = 1.0 - args.m * s * s
    return s * carlson_rf(c2, delta, 1.0) - (args.m / 3.0) * s ** 3 * carlson_rd(
        c2, delta, 1.0
    )


def digamma(x: float) -> float:
    """Digamma function psi(x) for x > 0.

    Appears in the closed-form radial integrals with a log kernel; delegated
    to scipy's implementation, which is accurate to full double precision.
    """
    if not (x > 0):
        raise DomainError(f"digamma requires x > 0, got {x}")
    return float(scipy.special.digamma(x))
