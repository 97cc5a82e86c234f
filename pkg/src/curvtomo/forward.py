"""Excitation probability of a shaped detector at a curvature point.

The response is the flat-space click probability plus curvature corrections,
each a contraction of a curvature quantity with one smearing coefficient:

    P = P0 + e^{-2 L0} ( M_ij Q^ij + 2 a_i D^i + (1/12) R_ij L^ij
                         + (2 pi^2 / 3) R L_R + 4 pi^2 omega0 L_omega )

with P0 = (1 - e^{-2 L0})/2.  This is the truncated short-scale expansion;
when the corrections stop being small relative to P0 the breakdown is
flagged rather than rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coefficients import CoefficientSet
from .errors import DomainError, SingularityError
from .geometry import CurvaturePoint, m_tensor, ricci_from_riemann

__all__ = [
    "ProbabilityBreakdown",
    "p0_of",
    "excitation_probability",
    "wightman_short_distance",
    "quasifree_series_check",
]

# Corrections larger than this fraction of P0 put the expansion outside its
# validity window; reported, not enforced.
VALIDITY_FRACTION = 0.1


@dataclass(frozen=True)
class ProbabilityBreakdown:
    """Excitation probability with its curvature corrections itemized.

    The correction fields are the bare contractions (before the common
    e^{-2 L0} factor).  ``p`` is the assembled probability, kept unclamped;
    ``correction_large`` and ``out_of_range`` flag expansion-validity
    problems.
    """

    p0: float
    correction_volume: float
    correction_accel: float
    correction_vanvleck: float
    correction_scalar: float
    correction_state: float
    p: float
    correction_large: bool = False
    out_of_range: bool = False

    @property
    def corrections_total(self) -> float:
        return (
            self.correction_volume
            + self.correction_accel
            + self.correction_vanvleck
            + self.correction_scalar
            + self.correction_state
        )

    def as_dict(self) -> dict:
        return {
            "p0": self.p0,
            "correction_volume": self.correction_volume,
            "correction_accel": self.correction_accel,
            "correction_vanvleck": self.correction_vanvleck,
            "correction_scalar": self.correction_scalar,
            "correction_state": self.correction_state,
            "p": self.p,
            "correction_large": self.correction_large,
            "out_of_range": self.out_of_range,
        }


def p0_of(l0: float) -> float:
    """Flat-space excitation probability (1 - e^{-2 l0})/2.

    Strictly increasing in l0, with range [0, 1/2): the pointlike limit
    l0 -> infinity drives the detector to the maximally mixed state.
    """
    if l0 < 0 or not math.isfinite(l0):
        raise DomainError(f"l0 must be nonnegative, got {l0}")
    return -0.5 * math.expm1(-2.0 * l0)


def excitation_probability(coeffs: CoefficientSet, point: CurvaturePoint) -> ProbabilityBreakdown:
    """Assemble the short-scale expansion of the excitation probability."""
    m = m_tensor(point.riemann)
    ricci, scalar = ricci_from_riemann(point.riemann)

    volume = float(np.tensordot(m, coeffs.q))
    accel = 2.0 * float(point.accel @ coeffs.d)
    vanvleck = float(np.tensordot(ricci[1:, 1:], coeffs.lij)) / 12.0
    scalar_term = (2.0 * math.pi ** 2 / 3.0) * scalar * coeffs.lr
    state = 4.0 * math.pi ** 2 * point.omega0 * coeffs.lomega

    p0 = p0_of(coeffs.l0)
    damping = math.exp(-2.0 * coeffs.l0)
    total = volume + accel + vanvleck + scalar_term + state
    p = p0 + damping * total
    return ProbabilityBreakdown(
        p0=p0,
        correction_volume=volume,
        correction_accel=accel,
        correction_vanvleck=vanvleck,
        correction_scalar=scalar_term,
        correction_state=state,
        p=p,
        correction_large=abs(damping * total) > VALIDITY_FRACTION * p0,
        out_of_range=not (0.0 <= p <= 1.0),
    )


def wightman_short_distance(x, xp, point: CurvaturePoint) -> float:
    """Short-distance equal-time correlator at separation x - x'.

    W(x,x') = W0 [ 1 + (1/12) R_ij d^i d^j
                     + (2 pi^2/3) R d^2 ln|d^2/2| + 4 pi^2 omega0 d^2 ],

    with d = x - x' and W0 = 1/(8 pi^2 sigma), sigma = d^2/2.  Curvature
    tensors are evaluated at the expansion center.
    """
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    d = x - xp
    d2 = float(d @ d)
    if d2 == 0.0:
        raise SingularityError("Wightman function diverges at coincidence x = x'")
    ricci, scalar = ricci_from_riemann(point.riemann)
    w0 = 1.0 / (8.0 * math.pi ** 2 * (0.5 * d2))
    bracket = (
        1.0
        + float(d @ ricci[1:, 1:] @ d) / 12.0
        + (2.0 * math.pi ** 2 / 3.0) * scalar * d2 * math.log(abs(0.5 * d2))
        + 4.0 * math.pi ** 2 * point.omega0 * d2
    )
    return w0 * bracket


def quasifree_series_check(l: float, n_terms: int) -> float:
    """Partial sum of the Wick-counting series for the even moments.

    Sums (-1)^n 2^{2n} (2n-1)!! / (2n)! l^n with the double factorial and
    factorial taken literally (exact integer arithmetic per coefficient), so
    convergence to e^{-2l} exercises the counting identity
    (2n-1)!! = 2^{1-n} (2n-1)! / (n-1)! rather than a pre-simplified form.
    """
    if l < 0:
        raise DomainError(f"l must be nonnegative, got {l}")
    if n_terms < 1:
        raise DomainError("n_terms must be at least 1")
    total = 0.0
    l_pow = 1.0
    for n in range(n_terms):
        if n == 0:
            coeff = 1.0
        else:
            double_fact = math.prod(range(2 * n - 1, 0, -2))
            coeff = 2 ** (2 * n) * double_fact / math.factorial(2 * n)
        term = (-1.0) ** n * coeff * l_pow
        total += term
        # Term ratio is -2l/(n+1); stop growing l_pow once terms underflow.
        if abs(term) < 1e-300 and n > 2 * l:
            break
        l_pow *= l
    return total
