"""Ground-truth evaluation of the six smearing coefficients by quadrature.

Every coefficient is a double Gaussian-weighted integral of the flat-space
equal-time correlator against a polynomial (or log) kernel.  Two independent
routes are provided:

* ``b_functional`` -- semi-analytic reduction: relative/center-of-mass change
  of variables, exact Gaussian moments in the center-of-mass variable, exact
  Gamma/digamma radial integrals in the relative variable, and adaptive
  angular quadrature over the unit sphere for what remains.
* ``b_functional_mc`` -- importance-sampled Monte Carlo over the full
  6-dimensional integral with the product Gaussian as sampling density,
  antithetically paired so parity-odd kernels cancel exactly.

The equal-time correlator normalization is W0 = 1/(8 pi^2 (x-x')^2); this is
the convention under which the trace coefficient equals lambda^2/(8 pi^2)
exactly, which the rest of the pipeline treats as normative.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.special

from .errors import ConvergenceError, DomainError
from .shapes import DetectorShape

__all__ = [
    "KernelKind",
    "OracleConfig",
    "W0_PREFACTOR",
    "b_functional",
    "b_functional_mc",
    "radial_moment",
    "sphere_quadrature",
]

# W0(x, x') = W0_PREFACTOR / (x - x')^2
W0_PREFACTOR = 1.0 / (8.0 * math.pi ** 2)

_TAGS = ("one", "linear", "quadratic", "diff_quadratic", "diff_squared_log", "diff_squared")


@dataclass(frozen=True)
class KernelKind:
    """Kernel selecting one coefficient of the short-scale expansion.

    tag / kernel factor / coefficient:
      one              1                          L_0
      linear           x^i                        D^i
      quadratic        x^i x^j                    Q^ij
      diff_quadratic   (x-x')^i (x-x')^j          L^ij
      diff_squared_log (x-x')^2 ln|(x-x')^2 / 2|  L_R
      diff_squared     (x-x')^2                   L_omega

    Indices are 1-based (1, 2, 3), matching the spatial frame labels.
    """

    tag: str
    i: int | None = None
    j: int | None = None

    def __post_init__(self):
        if self.tag not in _TAGS:
            raise DomainError(f"unknown kernel tag {self.tag!r}")
        need = {"linear": 1, "quadratic": 2, "diff_quadratic": 2}.get(self.tag, 0)
        idx = [k for k in (self.i, self.j) if k is not None]
        if len(idx) != need:
            raise DomainError(f"kernel {self.tag!r} takes {need} indices, got {idx}")
        if any(k not in (1, 2, 3) for k in idx):
            raise DomainError(f"kernel indices must be in {{1,2,3}}, got {idx}")

    @classmethod
    def one(cls):
        return cls("one")

    @classmethod
    def linear(cls, i):
        return cls("linear", i)

    @classmethod
    def quadratic(cls, i, j):
        return cls("quadratic", i, j)

    @classmethod
    def diff_quadratic(cls, i, j):
        return cls("diff_quadratic", i, j)

    @classmethod
    def diff_squared_log(cls):
        return cls("diff_squared_log")

    @classmethod
    def diff_squared(cls):
        return cls("diff_squared")

    def label(self) -> str:
        idx = "".join(str(k) for k in (self.i, self.j) if k is not None)
        return self.tag + (f"_{idx}" if idx else "")


@dataclass(frozen=True)
class OracleConfig:
    """Tolerances and the RNG seed for the two oracle routes."""

    angular_tolerance: float = 1e-9
    mc_samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if not self.angular_tolerance > 0:
            raise DomainError("angular_tolerance must be positive")
        if self.mc_samples < 10_000:
            raise DomainError("mc_samples must be at least 10^4")


def radial_moment(q: float, power: int, with_log: bool = False):
    """Closed form of int_0^inf r^power exp(-q r^2 / 2) dr.

    With ``with_log`` an extra ln(r^2) factor is included; the result then
    picks up a digamma term:

        (1/2) Gamma(s) (q/2)^{-s} [psi(s) - ln(q/2)],   s = (power+1)/2.

    Vectorized over q.
    """
    q = np.asarray(q, dtype=float)
    if np.any(q <= 0):
        raise DomainError("radial_moment requires q > 0")
    if power < 0 or power != int(power):
        raise DomainError(f"power must be a nonnegative integer, got {power}")
    s = (power + 1) / 2.0
    base = 0.5 * scipy.special.gamma(s) * (q / 2.0) ** (-s)
    if with_log:
        return base * (scipy.special.digamma(s) - np.log(q / 2.0))
    if base.ndim == 0:
        return float(base)
    return base


def sphere_quadrature(
    integrand: Callable[[np.ndarray], np.ndarray],
    rtol: float = 1e-9,
    start_order: int = 8,
    max_order: int = 1024,
) -> tuple[float, float]:
    """Integral of a smooth function over the unit sphere (measure dOmega).

    ``integrand`` receives an (m, 3) array of unit vectors and returns m
    values.  The rule is a Gauss-Legendre x trapezoid product, with the order
    doubled until two consecutive levels agree to ``rtol``.  Returns
    (value, error_estimate); raises ConvergenceError if the budget is
    exhausted.
    """
    prev = None
    order = start_order
    while order <= max_order:
        ct, w = np.polynomial.legendre.leggauss(order)
        phi = np.linspace(0.0, 2.0 * np.pi, 2 * order, endpoint=False)
        st = np.sqrt(1.0 - ct ** 2)
        nx = np.outer(st, np.cos(phi))
        ny = np.outer(st, np.sin(phi))
        nz = np.outer(ct, np.ones_like(phi))
        pts = np.stack([nx.ravel(), ny.ravel(), nz.ravel()], axis=1)
        vals = np.asarray(integrand(pts), dtype=float).reshape(order, 2 * order)
        est = float((w @ vals).sum() * (np.pi / order))
        if prev is not None:
            err = abs(est - prev)
            if err <= rtol * max(abs(est), 1e-300) + 1e-300:
                return est, err
        prev = est
        order *= 2
    raise ConvergenceError(
        f"sphere quadrature did not reach rtol={rtol} by order {max_order}",
        estimate=prev,
        error_bound=abs(est - prev),
    )


def _check_shape(shape: DetectorShape, coupling) -> float:
    lam = shape.coupling if coupling is None else float(coupling)
    if not lam > 0:
        raise DomainError(f"coupling must be positive, got {lam}")
    if min(shape.axes) <= 0:
        raise DomainError("degenerate shape: all axis parameters must be positive")
    return lam


def b_functional(
    shape: DetectorShape,
    kernel: KernelKind,
    coupling: float | None = None,
    cfg: OracleConfig = OracleConfig(),
) -> float:
    """Semi-analytic value of the coefficient selected by ``kernel``.

    Reduction: with u = (x-x')/sqrt(2), v = (x+x')/sqrt(2) the Gaussians
    factor; the v-integral is an exact Gaussian moment, the radial part of
    the u-integral is an exact Gamma/digamma moment, and only a smooth
    angular integral over the direction of u remains.  Parity-odd kernels
    vanish identically at this stage.
    """
    lam = _check_shape(shape, coupling)
    a_mat = shape.lab_matrix
    pre = lam ** 2 * W0_PREFACTOR * shape.sqrt_det / (2.0 * np.pi) ** 1.5
    rtol = cfg.angular_tolerance

    def qform(pts):
        return np.einsum("mi,ij,mj->m", pts, a_mat, pts)

    if kernel.tag == "one":
        val, _ = sphere_quadrature(lambda p: 0.5 * radial_moment(qform(p), 0), rtol)
        return pre * val
    if kernel.tag == "linear":
        # Both u- and v-integrals are parity-odd Gaussian moments.
        return 0.0
    if kernel.tag == "diff_quadratic":
        i0, j0 = kernel.i - 1, kernel.j - 1
        val, _ = sphere_quadrature(
            lambda p: p[:, i0] * p[:, j0] * radial_moment(qform(p), 2), rtol
        )
        return pre * val
    if kernel.tag == "quadratic":
        # x^i x^j = (u^i u^j + v^i v^j)/2 + mixed odd terms; the v moment is
        # the exact Gaussian covariance (a^-1)_ij.
        i0, j0 = kernel.i - 1, kernel.j - 1
        diff = b_functional(shape, KernelKind.diff_quadratic(kernel.i, kernel.j), coupling, cfg)
        one = b_functional(shape, KernelKind.one(), coupling, cfg)
        a_inv = np.linalg.inv(a_mat)
        return 0.25 * diff + 0.5 * a_inv[i0, j0] * one
    if kernel.tag == "diff_squared":
        val, _ = sphere_quadrature(lambda p: radial_moment(qform(p), 2), rtol)
        return pre * val
    if kernel.tag == "diff_squared_log":
        # (x-x')^2 ln|(x-x')^2/2| = 2u^2 ln(u^2)
        val, _ = sphere_quadrature(lambda p: radial_moment(qform(p), 2, with_log=True), rtol)
        return pre * val
    raise DomainError(f"unhandled kernel {kernel}")  # pragma: no cover


def _mc_generator(seed: int, kernel: KernelKind, shape: DetectorShape) -> np.random.Generator:
    """Counter-based generator keyed by (seed, kernel, shape digest)."""
    h = hashlib.blake2b(digest_size=16)
    h.update(np.uint64(seed).tobytes())
    h.update(kernel.label().encode())
    h.update(shape.key_bytes())
    key = np.frombuffer(h.digest(), dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _kernel_values(kernel: KernelKind, x: np.ndarray, xp: np.ndarray) -> np.ndarray:
    """W0 * kernel factor, evaluated per sample pair."""
    d = x - xp
    d2 = np.einsum("mi,mi->m", d, d)
    w0 = W0_PREFACTOR / d2
    if kernel.tag == "one":
        return w0
    if kernel.tag == "linear":
        return x[:, kernel.i - 1] * w0
    if kernel.tag == "quadratic":
        return x[:, kernel.i - 1] * x[:, kernel.j - 1] * w0
    if kernel.tag == "diff_quadratic":
        return d[:, kernel.i - 1] * d[:, kernel.j - 1] * w0
    if kernel.tag == "diff_squared":
        return d2 * w0
    if kernel.tag == "diff_squared_log":
        return d2 * np.log(0.5 * d2) * w0
    raise DomainError(f"unhandled kernel {kernel}")  # pragma: no cover


def b_functional_mc(
    shape: DetectorShape,
    kernel: KernelKind,
    coupling: float | None = None,
    cfg: OracleConfig = OracleConfig(),
) -> tuple[float, float]:
    """Monte Carlo estimate (value, standard error) of the same coefficient.

    Samples (x, x') from the product Gaussian f(x) f(x') and averages
    lambda^2 W0 k(x, x'); each draw is paired with its antipode
    (-x, -x'), which is an exact cancellation for parity-odd kernels and
    costs nothing for even ones.  ``cfg.mc_samples`` counts antithetic
    pairs.  Deterministic for a given (seed, kernel, shape).
    """
    lam = _check_shape(shape, coupling)
    rng = _mc_generator(cfg.seed, kernel, shape)
    inv_axes = 1.0 / np.asarray(shape.axes)
    rot_t = shape.rotation.T

    n = int(cfg.mc_samples)
    chunks = []
    batch = 1 << 17
    left = n
    while left > 0:
        m = min(batch, left)
        z = rng.normal(size=(m, 3)) * inv_axes
        zp = rng.normal(size=(m, 3)) * inv_axes
        x = z @ rot_t
        xp = zp @ rot_t
        g_pos = _kernel_values(kernel, x, xp)
        g_neg = _kernel_values(kernel, -x, -xp)
        chunks.append(0.5 * (g_pos + g_neg))
        left -= m
    t = lam ** 2 * np.concatenate(chunks)
    estimate = float(np.mean(t))
    std_error = float(np.std(t, ddof=1) / math.sqrt(n))
    return estimate, std_error
