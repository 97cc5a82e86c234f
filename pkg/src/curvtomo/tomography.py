"""Experiment design and linear recovery of curvature from probabilities.

The single-frame system has 13 unknowns stacked as

    theta = (M11, M22, M33, M12, M13, M23,
             N11, N22, N33, N12, N13, N23, R)

with off-diagonal columns carrying a factor 2 so that symmetric-tensor
contractions are exact.  Each probe contributes one row and the weighted
least-squares solution feeds the trace-identity recovery algebra.  Full
Riemann recovery stacks the per-frame results of boosted probes into a
20-unknown system over a symmetry-complete basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coefficients import CoefficientSet, full_set
from .errors import DesignError, DomainError, FrameSetError, SolveError
from .geometry import (
    PAIRS,
    BoostSpec,
    CurvaturePoint,
    RiemannTensor,
    boost_riemann,
    m_tensor,
    n_tensor,
    ricci_from_riemann,
)
from .shapes import DetectorShape, rotation_about

__all__ = [
    "ExperimentDesign",
    "RecoveryResult",
    "assemble_row",
    "design_experiment",
    "solve",
    "multi_frame_recovery",
    "canonical_pool",
    "truth_vector",
    "pack_sym",
    "unpack_sym",
]

_OFFDIAG = ((0, 1), (0, 2), (1, 2))


def pack_sym(t: np.ndarray) -> np.ndarray:
    """Symmetric 3x3 -> (t11, t22, t33, t12, t13, t23)."""
    t = np.asarray(t, dtype=float)
    return np.array([t[0, 0], t[1, 1], t[2, 2], t[0, 1], t[0, 2], t[1, 2]])


def unpack_sym(v: np.ndarray) -> np.ndarray:
    t = np.zeros((3, 3))
    t[0, 0], t[1, 1], t[2, 2] = v[0], v[1], v[2]
    for val, (i, j) in zip(v[3:], _OFFDIAG):
        t[i, j] = t[j, i] = val
    return t


def truth_vector(point: CurvaturePoint) -> np.ndarray:
    """Stacked (M, N, R) unknowns for a known curvature point."""
    ricci, scalar = ricci_from_riemann(point.riemann)
    m = m_tensor(point.riemann)
    n = n_tensor(ricci[1:, 1:], point.omega0)
    return np.concatenate([pack_sym(m), pack_sym(n), [scalar]])


def assemble_row(coeffs: CoefficientSet) -> np.ndarray:
    """Design-matrix row of one probe: e^{-2 L0} (Q | L | (2 pi^2/3) L_R)."""
    damping = math.exp(-2.0 * coeffs.l0)
    q = pack_sym(coeffs.q)
    lij = pack_sym(coeffs.lij)
    doubling = np.array([1.0, 1.0, 1.0, 2.0, 2.0, 2.0])
    return damping * np.concatenate(
        [q * doubling, lij * doubling, [(2.0 * math.pi ** 2 / 3.0) * coeffs.lr]]
    )


@dataclass(frozen=True)
class ExperimentDesign:
    """An ordered probe list with its assembled design matrix."""

    probes: tuple[tuple[DetectorShape, BoostSpec], ...]
    design_matrix: np.ndarray
    condition_number: float
    coefficient_sets: tuple[CoefficientSet, ...] = field(default=(), repr=False)

    def __post_init__(self):
        mat = np.array(self.design_matrix, dtype=float)
        if mat.shape != (len(self.probes), 13):
            raise DomainError("design matrix must be (probes x 13)")
        mat.flags.writeable = False
        object.__setattr__(self, "design_matrix", mat)

    def with_boost(self, boost: BoostSpec) -> "ExperimentDesign":
        """Same probe shapes, all carried by an observer with this boost."""
        return ExperimentDesign(
            tuple((s, boost) for s, _ in self.probes),
            self.design_matrix,
            self.condition_number,
            self.coefficient_sets,
        )


def design_experiment(pool: list[DetectorShape], count: int = 13) -> ExperimentDesign:
    """Greedy condition-number design over a shape pool.

    Probes are added one at a time, each minimizing the condition number of
    the stacked matrix (ratio of largest to smallest nonzero singular value
    while the system is still wide); ties break to the lowest pool index, so
    the selection is deterministic in pool order.  Raises DesignError when
    the final matrix has rank below 13.
    """
    if count < 13:
        raise DesignError(f"single-frame recovery needs at least 13 probes, got count={count}")
    if len(pool) < count:
        raise DesignError(f"pool has {len(pool)} shapes, need at least {count}")

    coeffs = [full_set(s) for s in pool]
    rows = np.array([assemble_row(c) for c in coeffs])

    selected: list[int] = []
    remaining = list(range(len(pool)))
    for _ in range(count):
        best_idx, best_cond = None, None
        for cand in remaining:
            trial = rows[selected + [cand]]
            s = np.linalg.svd(trial, compute_uv=False)
            smin = s[min(len(trial), 13) - 1]
            cond = np.inf if smin == 0 else s[0] / smin
            if best_cond is None or cond < best_cond:
                best_idx, best_cond = cand, cond
        selected.append(best_idx)
        remaining.remove(best_idx)

    matrix = rows[selected]
    s = np.linalg.svd(matrix, compute_uv=False)
    rank = int(np.sum(s > s[0] * max(matrix.shape) * np.finfo(float).eps))
    if rank < 13:
        _, _, vt = np.linalg.svd(matrix)
        raise DesignError(
            f"design matrix rank {rank} < 13; pool does not span the unknowns",
            rank=rank,
            null_directions=vt[rank:].tolist(),
        )
    rest = BoostSpec.rest()
    return ExperimentDesign(
        probes=tuple((pool[i], rest) for i in selected),
        design_matrix=matrix,
        condition_number=float(s[0] / s[-1]),
        coefficient_sets=tuple(coeffs[i] for i in selected),
    )


@dataclass(frozen=True)
class RecoveryResult:
    """Recovered curvature unknowns with covariance and diagnostics.

    The trace chain R_i^i = 2 R + 3 M_i^i holds by construction; omega0,
    the spatial Ricci block, and the tau-i-tau-j Riemann block follow from
    the recovery algebra.
    """

    m: np.ndarray
    n: np.ndarray
    r_scalar: float
    ricci_spatial: np.ndarray
    riemann_tautau_block: np.ndarray
    omega0: float
    r_tautau: float
    covariance: np.ndarray
    residual_norm: float
    condition_number: float

    def theta(self) -> np.ndarray:
        return np.concatenate([pack_sym(self.m), pack_sym(self.n), [self.r_scalar]])

    def as_dict(self) -> dict:
        return {
            "m": self.m.tolist(),
            "n": self.n.tolist(),
            "r_scalar": self.r_scalar,
            "ricci_spatial": self.ricci_spatial.tolist(),
            "riemann_tautau_block": self.riemann_tautau_block.tolist(),
            "omega0": self.omega0,
            "r_tautau": self.r_tautau,
            "covariance": self.covariance.tolist(),
            "residual_norm": self.residual_norm,
            "condition_number": self.condition_number,
        }


def recovery_algebra(theta: np.ndarray) -> RecoveryResult | dict:
    """Apply the trace-identity chain to a solved 13-vector (internal)."""
    m = unpack_sym(theta[0:6])
    n = unpack_sym(theta[6:12])
    r_scalar = float(theta[12])
    r_spatial_trace = 2.0 * r_scalar + 3.0 * float(np.trace(m))
    omega0 = (float(np.trace(n)) - r_spatial_trace / 12.0) / (12.0 * math.pi ** 2)
    ricci_spatial = 12.0 * (n - 4.0 * math.pi ** 2 * omega0 * np.eye(3))
    # Inversion consistent with the metric-determinant definition of M:
    # R_{tau i tau j} = (3/2) M_ij + (1/2) R_ij.
    tautau_block = 1.5 * m + 0.5 * ricci_spatial
    r_tautau = r_spatial_trace - r_scalar
    return m, n, r_scalar, ricci_spatial, tautau_block, omega0, r_tautau


def solve(design: ExperimentDesign, probabilities, p0s) -> RecoveryResult:
    """Weighted least squares on (p_hat - p0) followed by the recovery algebra.

    ``probabilities`` is a sequence of (p_hat, sigma) pairs; pass sigma = 1
    for noiseless data.  The covariance of the 13 stacked unknowns is
    propagated from the per-probe sigmas.
    """
    n_probes = len(design.probes)
    probabilities = list(probabilities)
    p0s = np.asarray(list(p0s), dtype=float)
    if len(probabilities) != n_probes or len(p0s) != n_probes:
        raise DomainError("probabilities/p0s length must match the probe count")
    boosts = {(*p[1].direction, p[1].speed) for p in design.probes}
    if len(boosts) > 1:
        raise DomainError("solve() requires all probes in a single frame")

    p_hat = np.array([p for p, _ in probabilities], dtype=float)
    sigma = np.array([s for _, s in probabilities], dtype=float)
    if np.any(sigma <= 0):
        raise DomainError("all probability sigmas must be positive")

    w = 1.0 / sigma
    aw = design.design_matrix * w[:, None]
    bw = (p_hat - p0s) * w
    u, s, vt = np.linalg.svd(aw, full_matrices=False)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else np.inf
    if s[-1] <= s[0] * 1e-13:
        raise SolveError(
            f"normal system is singular (condition number {cond:.3e})",
            condition_number=cond,
        )
    theta = vt.T @ ((u.T @ bw) / s)
    covariance = (vt.T / s ** 2) @ vt
    residual = float(np.linalg.norm(aw @ theta - bw))

    m, n, r_scalar, ricci_spatial, tautau, omega0, r_tautau = recovery_algebra(theta)
    return RecoveryResult(
        m=m,
        n=n,
        r_scalar=r_scalar,
        ricci_spatial=ricci_spatial,
        riemann_tautau_block=tautau,
        omega0=omega0,
        r_tautau=r_tautau,
        covariance=covariance,
        residual_norm=residual,
        condition_number=cond,
    )


def _riemann_basis() -> list[tuple[str, np.ndarray]]:
    """Basis of the 20-dim space of symmetry-valid Riemann tensors (pair form).

    All elementary symmetric 6x6 pair matrices except the three
    dual-diagonal ones, plus two traceless combinations of those three
    (the first Bianchi identity kills their common trace).
    """
    labels = []
    mats = []
    special = {(0, 3), (1, 4), (2, 5)}
    for a in range(6):
        for b in range(a, 6):
            if (a, b) in special:
                continue
            e = np.zeros((6, 6))
            e[a, b] = e[b, a] = 1.0
            labels.append(f"S{a}{b}")
            mats.append(e)
    for (a1, b1), (a2, b2), name in (
        ((0, 3), (1, 4), "S03-S14"),
        ((1, 4), (2, 5), "S14-S25"),
    ):
        e = np.zeros((6, 6))
        e[a1, b1] = e[b1, a1] = 1.0
        e[a2, b2] = e[b2, a2] = -1.0
        labels.append(name)
        mats.append(e)
    return list(zip(labels, mats))


def _frame_data_vector(result: RecoveryResult) -> np.ndarray:
    return np.concatenate(
        [pack_sym(result.riemann_tautau_block), pack_sym(result.ricci_spatial)]
    )


def _frame_prediction(riemann: RiemannTensor, boost: BoostSpec) -> np.ndarray:
    boosted = boost_riemann(riemann, boost)
    ricci, _ = ricci_from_riemann(boosted)
    return np.concatenate([pack_sym(boosted.tautau_block()), pack_sym(ricci[1:, 1:])])


def multi_frame_recovery(frames) -> RiemannTensor:
    """Assemble per-frame recoveries into the full rest-frame Riemann tensor.

    ``frames`` is a sequence of (BoostSpec, RecoveryResult); each frame's
    measured blocks are linear in the 20 unknown rest-frame components, so
    stacking them gives an (over)determined least-squares system.  Raises
    FrameSetError naming the unresolved directions when the frame set has
    rank below 20.
    """
    frames = list(frames)
    basis = _riemann_basis()
    basis_tensors = [RiemannTensor.from_pair_matrix(m) for _, m in basis]

    rows = []
    data = []
    for boost, result in frames:
        cols = [_frame_prediction(t, boost) for t in basis_tensors]
        rows.append(np.stack(cols, axis=1))
        data.append(_frame_data_vector(result))
    g = np.vstack(rows)
    y = np.concatenate(data)

    u, s, vt = np.linalg.svd(g, full_matrices=False)
    rank = int(np.sum(s > s[0] * max(g.shape) * np.finfo(float).eps))
    if rank < 20:
        unresolved = []
        for vec in vt[rank:]:
            weights = sorted(
                zip([lbl for lbl, _ in basis], np.abs(vec)), key=lambda t: -t[1]
            )
            unresolved.append([lbl for lbl, w in weights if w > 0.2])
        raise FrameSetError(
            f"frame set resolves only {rank}/20 Riemann components",
            rank=rank,
            unresolved=unresolved,
        )
    theta = vt.T @ ((u.T @ y) / s)
    pair = sum(t * m for t, (_, m) in zip(theta, basis))
    return RiemannTensor.from_pair_matrix(pair)


def canonical_pool(coupling: float = 1.0) -> list[DetectorShape]:
    """Deterministic probe pool spanning orientations, aspect ratios, sizes.

    Prolate probes along the coordinate axes and the six in-plane diagonals,
    spheres of two sizes, and two strongly triaxial probes; enough variety
    for a full-rank, well-conditioned 13-probe design.
    """
    prolate_axes = (0.7, 1.4, 1.4)
    ex, ey, ez = np.eye(3)
    pool = [
        DetectorShape(prolate_axes, np.eye(3), coupling),
        DetectorShape(prolate_axes, rotation_about(ez, np.pi / 2), coupling),
        DetectorShape(prolate_axes, rotation_about(ey, -np.pi / 2), coupling),
    ]
    for axis, sign in ((ez, 1), (ez, -1), (ey, 1), (ey, -1), (ex, 1), (ex, -1)):
        base = pool[0] if axis is not ex else pool[1]
        pool.append(base.rotated(rotation_about(axis, sign * np.pi / 4)))
    pool.append(DetectorShape.sphere(1.0, coupling))
    pool.append(DetectorShape.sphere(2.0, coupling))
    pool.append(DetectorShape((0.6, 1.1, 2.0), np.eye(3), coupling))
    pool.append(
        DetectorShape(
            (0.6, 1.1, 2.0),
            rotation_about(np.array([1.0, 1.0, 1.0]), 2.0 * np.pi / 5.0),
            coupling,
        )
    )
    return pool
