"""Curvature data in orthonormal Fermi frames.

Frame index 0 is the timelike direction (written tau elsewhere), 1..3 are the
spatial directions; the frame metric is diag(-1, 1, 1, 1).  Riemann tensors
are stored as dense (4,4,4,4) arrays behind a validating constructor so that
index arithmetic in boosts and contractions stays transparent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "ETA",
    "PAIRS",
    "RiemannTensor",
    "CurvaturePoint",
    "BoostSpec",
    "ricci_from_riemann",
    "m_tensor",
    "n_tensor",
    "metric_fermi_expansion",
    "catalog",
    "boost_matrix",
    "boost_riemann",
    "boost_rank2",
]

ETA = np.diag([-1.0, 1.0, 1.0, 1.0])

# Antisymmetric index pairs ordering the 6-dim "bivector" basis; the last
# three are the duals of the spatial directions.
PAIRS = ((0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2))


def _symmetry_defects(r: np.ndarray) -> dict[str, float]:
    return {
        "antisym_first": float(np.max(np.abs(r + r.transpose(1, 0, 2, 3)))),
        "antisym_second": float(np.max(np.abs(r + r.transpose(0, 1, 3, 2)))),
        "pair_exchange": float(np.max(np.abs(r - r.transpose(2, 3, 0, 1)))),
        "first_bianchi": float(
            np.max(np.abs(r + r.transpose(0, 2, 3, 1) + r.transpose(0, 3, 1, 2)))
        ),
    }


@dataclass(frozen=True)
class RiemannTensor:
    """Riemann tensor components R_{mu nu alpha beta} in an orthonormal frame.

    The constructor enforces antisymmetry in each index pair, symmetry under
    pair exchange, and the first Bianchi identity, to 1e-12 (absolute, scaled
    by the largest component when that exceeds one).
    """

    components: np.ndarray

    def __post_init__(self):
        r = np.array(self.components, dtype=float)
        if r.shape != (4, 4, 4, 4):
            raise DomainError(f"Riemann components must have shape (4,4,4,4), got {r.shape}")
        tol = 1e-12 * max(1.0, float(np.max(np.abs(r))))
        defects = _symmetry_defects(r)
        bad = {k: v for k, v in defects.items() if v > tol}
        if bad:
            raise DomainError(f"Riemann symmetry violations beyond {tol:.3e}: {bad}")
        r.flags.writeable = False
        object.__setattr__(self, "components", r)

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls) -> "RiemannTensor":
        return cls(np.zeros((4, 4, 4, 4)))

    @classmethod
    def from_pair_matrix(cls, s: np.ndarray, project_bianchi: bool = False) -> "RiemannTensor":
        """Build from a symmetric 6x6 matrix over the PAIRS basis.

        With ``project_bianchi`` the single first-Bianchi constraint in 3+1
        dimensions (vanishing cyclic sum over the dual-diagonal entries) is
        enforced by projection instead of rejected.
        """
        s = np.array(s, dtype=float)
        if s.shape != (6, 6) or np.max(np.abs(s - s.T)) > 1e-12 * max(1.0, np.max(np.abs(s))):
            raise DomainError("pair matrix must be symmetric 6x6")
        if project_bianchi:
            mean = (s[0, 3] + s[1, 4] + s[2, 5]) / 3.0
            for a, b in ((0, 3), (1, 4), (2, 5)):
                s[a, b] -= mean
                s[b, a] -= mean
        r = np.zeros((4, 4, 4, 4))
        for ia, (m, n) in enumerate(PAIRS):
            for ib, (a, b) in enumerate(PAIRS):
                v = s[ia, ib]
                r[m, n, a, b] = v
                r[n, m, a, b] = -v
                r[m, n, b, a] = -v
                r[n, m, b, a] = v
        return cls(r)

    @classmethod
    def random(cls, rng: np.random.Generator, scale: float = 1.0) -> "RiemannTensor":
        """Random tensor satisfying all algebraic Riemann symmetries."""
        s = rng.normal(scale=scale, size=(6, 6))
        return cls.from_pair_matrix((s + s.T) / 2.0, project_bianchi=True)

    # -- views ----------------------------------------------------------------

    def pair_matrix(self) -> np.ndarray:
        s = np.empty((6, 6))
        for ia, (m, n) in enumerate(PAIRS):
            for ib, (a, b) in enumerate(PAIRS):
                s[ia, ib] = self.components[m, n, a, b]
        return s

    def tautau_block(self) -> np.ndarray:
        """The electric block R_{tau i tau j} as a symmetric 3x3 matrix."""
        return np.array(self.components[0, 1:, 0, 1:])

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.components)))


@dataclass(frozen=True)
class CurvaturePoint:
    """Curvature, acceleration, and leading field-state scalar at one event."""

    riemann: RiemannTensor
    accel: np.ndarray = field(default_factory=lambda: np.zeros(3))
    omega0: float = 0.0

    def __post_init__(self):
        a = np.array(self.accel, dtype=float)
        if a.shape != (3,):
            raise DomainError("accel must be a 3-vector")
        a.flags.writeable = False
        object.__setattr__(self, "accel", a)
        object.__setattr__(self, "omega0", float(self.omega0))

    def with_omega0(self, omega0: float) -> "CurvaturePoint":
        return CurvaturePoint(self.riemann, self.accel, omega0)


@dataclass(frozen=True)
class BoostSpec:
    """A pure boost: unit direction and speed v in (-1, 1) (units of c)."""

    direction: np.ndarray
    speed: float

    def __post_init__(self):
        d = np.array(self.direction, dtype=float)
        if d.shape != (3,):
            raise DomainError("boost direction must be a 3-vector")
        norm = np.linalg.norm(d)
        if abs(norm - 1.0) > 1e-9:
            if norm == 0:
                raise DomainError("boost direction must be nonzero")
            d = d / norm
        if not abs(self.speed) < 1.0:
            raise DomainError(f"boost speed must satisfy |v| < 1, got {self.speed}")
        d.flags.writeable = False
        object.__setattr__(self, "direction", d)
        object.__setattr__(self, "speed", float(self.speed))

    @classmethod
    def rest(cls) -> "BoostSpec":
        return cls(np.array([1.0, 0.0, 0.0]), 0.0)

    @property
    def gamma(self) -> float:
        return 1.0 / np.sqrt(1.0 - self.speed ** 2)


def ricci_from_riemann(r: RiemannTensor) -> tuple[np.ndarray, float]:
    """Ricci tensor R_{mu nu} = eta^{ab} R_{a mu b nu} and scalar R."""
    ricci = np.einsum("ab,ambn->mn", ETA, r.components)
    scalar = float(np.einsum("mn,mn->", ETA, ricci))
    return ricci, scalar


def m_tensor(r: RiemannTensor) -> np.ndarray:
    """Volume-element tensor M_ij = (2/3) R_{tau i tau j} - (1/3) R_ij."""
    ricci, _ = ricci_from_riemann(r)
    return (2.0 / 3.0) * r.tautau_block() - (1.0 / 3.0) * ricci[1:, 1:]


def n_tensor(ricci_spatial: np.ndarray, omega0: float) -> np.ndarray:
    """State-mixing tensor N_ij = (1/12) R_ij + 4 pi^2 omega0 delta_ij."""
    ricci_spatial = np.asarray(ricci_spatial, dtype=float)
    if ricci_spatial.shape != (3, 3):
        raise DomainError("ricci_spatial must be 3x3")
    return ricci_spatial / 12.0 + 4.0 * np.pi ** 2 * omega0 * np.eye(3)


def metric_fermi_expansion(point: CurvaturePoint, x) -> tuple[float, np.ndarray, np.ndarray, float]:
    """Metric blocks and sqrt(-g) to quadratic order in Fermi normal coordinates.

    Returns (g_tautau, g_taui, g_ij, sqrt_minus_g) at spatial offset x from
    the expansion center.  Validity for |x| small against the curvature
    radius is the caller's responsibility.
    """
    x = np.asarray(x, dtype=float)
    r = point.riemann.components
    ax = float(point.accel @ x)
    e_block = np.einsum("ij,i,j->", r[0, 1:, 0, 1:], x, x)
    g_tautau = -(1.0 + 2.0 * ax + ax ** 2 + e_block)
    g_taui = -(2.0 / 3.0) * np.einsum("kij,k,j->i", r[0, 1:, 1:, 1:], x, x)
    g_ij = np.eye(3) - np.einsum("ikjl,k,l->ij", r[1:, 1:, 1:, 1:], x, x) / 3.0
    m = m_tensor(point.riemann)
    sqrt_minus_g = 1.0 + ax + 0.5 * float(x @ m @ x)
    return float(g_tautau), g_taui, g_ij, sqrt_minus_g


def catalog(name: str, omega0: float = 0.0, **params) -> CurvaturePoint:
    """Exact curvature points for standard spacetimes.

    Names and parameters:
      "minkowski"
      "de_sitter"                   H     (Hubble rate; comoving observer)
      "constant_spatial_curvature"  K     (curvature of the flat-time slices)
      "schwarzschild_static_frame"  M, r  (static observer at areal radius r,
                                           radial direction along axis 1)
    """
    r = np.zeros((4, 4, 4, 4))
    accel = np.zeros(3)
    if name == "minkowski":
        if params:
            raise DomainError(f"minkowski takes no parameters, got {params}")
    elif name == "de_sitter":
        h = float(params.pop("H"))
        if params:
            raise DomainError(f"unexpected de_sitter parameters {params}")
        r = h ** 2 * (
            np.einsum("ac,bd->abcd", ETA, ETA) - np.einsum("ad,bc->abcd", ETA, ETA)
        )
    elif name == "constant_spatial_curvature":
        k = float(params.pop("K"))
        if params:
            raise DomainError(f"unexpected parameters {params}")
        delta = np.eye(3)
        r[1:, 1:, 1:, 1:] = k * (
            np.einsum("ik,jl->ijkl", delta, delta) - np.einsum("il,jk->ijkl", delta, delta)
        )
    elif name == "schwarzschild_static_frame":
        mass = float(params.pop("M"))
        radius = float(params.pop("r"))
        if params:
            raise DomainError(f"unexpected parameters {params}")
        if radius <= 2.0 * mass:
            raise DomainError(f"static frame requires r > 2M, got r={radius}, M={mass}")
        t = mass / radius ** 3
        # Static orthonormal frame, radial direction along axis 1.
        for a, b, v in (
            (0, 1, -2.0 * t),  # R_{tau r tau r}
            (0, 2, t),         # R_{tau th tau th}
            (0, 3, t),
        ):
            _set_plane(r, a, b, v)
        for a, b, v in ((1, 2, -t), (1, 3, -t), (2, 3, 2.0 * t)):
            _set_plane(r, a, b, v)
        accel = np.array([mass / (radius ** 2 * np.sqrt(1.0 - 2.0 * mass / radius)), 0.0, 0.0])
    else:
        raise DomainError(f"unknown catalog spacetime {name!r}")
    return CurvaturePoint(RiemannTensor(r), accel, omega0)


def _set_plane(r: np.ndarray, a: int, b: int, v: float):
    """Set the sectional component R_{abab} = v with all index symmetries."""
    r[a, b, a, b] = v
    r[b, a, b, a] = v
    r[a, b, b, a] = -v
    r[b, a, a, b] = -v


def boost_matrix(b: BoostSpec) -> np.ndarray:
    """Matrix whose columns are the boosted frame vectors in the old frame."""
    n = b.direction
    g = b.gamma
    mat = np.empty((4, 4))
    mat[0, 0] = g
    mat[0, 1:] = g * b.speed * n
    mat[1:, 0] = g * b.speed * n
    mat[1:, 1:] = np.eye(3) + (g - 1.0) * np.outer(n, n)
    return mat


def boost_riemann(r: RiemannTensor, b: BoostSpec) -> RiemannTensor:
    """Riemann components in the frame moving with velocity b relative to r's frame."""
    lam = boost_matrix(b)
    comps = np.einsum("am,bn,co,dp,abcd->mnop", lam, lam, lam, lam, r.components, optimize=True)
    return RiemannTensor(comps)


def boost_rank2(t: np.ndarray, b: BoostSpec) -> np.ndarray:
    """Congruence transform of a symmetric rank-2 tensor under the boost."""
    t = np.asarray(t, dtype=float)
    if t.shape != (4, 4):
        raise DomainError("boost_rank2 expects a 4x4 tensor")
    lam = boost_matrix(b)
    return lam.T @ t @ lam
