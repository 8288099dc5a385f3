"""Lift a point cloud into R^h, h = C(m, 2), and build a norm whose distances
between per-pair substitute points are proportional to chosen targets.

Each unordered pair {i, j} gets its own pair of fresh neighbors z_{i,j} near
y_i and z_{j,i} near y_j. Their differences are almost surely linearly
independent, so the interpolating quadratic form applies to them directly.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CapacityError,
    DimensionError,
    DuplicatePointsError,
    EpsilonTooLargeError,
    IncompleteSpecError,
    RankDeficiencyError,
)
from .linalg import RANK_RTOL, numerical_rank, symmetric_eigenvalues
from .quadform import DEFAULT_SPREAD_THRESHOLD, IndependentSystem, QuadraticNorm, interpolating_form

DEFAULT_EPS_FRACTION = 0.45
MAX_RESAMPLES = 8


def pair_order(m: int) -> list[tuple[int, int]]:
    """Lexicographic enumeration of unordered pairs (i < j), 0-based."""
    return list(itertools.combinations(range(m), 2))


def _pairwise_euclidean(points):
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        pts = np.atleast_2d(np.array(self.points, dtype=float))
        if pts.shape[0] < 2 or pts.shape[1] < 1:
            raise DimensionError(f"need at least 2 points in R^l, l >= 1 (got shape {pts.shape})")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            labels = np.array(self.labels, dtype=int).ravel()
            if labels.shape[0] != pts.shape[0]:
                raise DimensionError(f"{pts.shape[0]} points but {labels.shape[0]} labels")
            labels.flags.writeable = False
            object.__setattr__(self, "labels", labels)
        d = _pairwise_euclidean(pts)
        iu = np.triu_indices(pts.shape[0], 1)
        if np.min(d[iu]) <= 0.0:
            k = int(np.argmin(d[iu]))
            i, j = iu[0][k], iu[1][k]
            raise DuplicatePointsError(
                f"points {i + 1} and {j + 1} coincide (minimum pairwise distance is 0)"
            )

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def ell(self) -> int:
        return self.points.shape[1]

    @property
    def h(self) -> int:
        return self.m * (self.m - 1) // 2

    def distances(self) -> np.ndarray:
        return _pairwise_euclidean(self.points)

    def min_distance(self) -> float:
        d = self.distances()
        return float(np.min(d[np.triu_indices(self.m, 1)]))

    def max_distance(self) -> float:
        return float(np.max(self.distances()))


@dataclass(frozen=True)
class DistanceSpec:
    """Targets delta_ij keyed by 0-based unordered pairs (i < j)."""

    m: int
    delta: dict

    def __post_init__(self):
        clean = {}
        for (i, j), value in self.delta.items():
            i, j = int(i), int(j)
            if i == j or not (0 <= i < self.m and 0 <= j < self.m):
                raise ValueError(f"invalid pair ({i + 1},{j + 1}) for {self.m} points")
            key = (min(i, j), max(i, j))
            if key in clean:
                raise ValueError(f"pair ({key[0] + 1},{key[1] + 1}) given twice")
            value = float(value)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"distance for ({key[0] + 1},{key[1] + 1}) must be positive, got {value}")
            clean[key] = value
        missing = [p for p in pair_order(self.m) if p not in clean]
        if missing:
            raise IncompleteSpecError(missing)
        object.__setattr__(self, "delta", clean)

    def __getitem__(self, pair) -> float:
        i, j = pair
        return self.delta[(min(i, j), max(i, j))]

    def vector(self) -> np.ndarray:
        """Targets in pair_order."""
        return np.array([self.delta[p] for p in pair_order(self.m)])

    @classmethod
    def from_function(cls, m, fn):
        return cls(m, {(i, j): fn(i, j) for i, j in pair_order(m)})

    @classmethod
    def uniform(cls, m, rng, low=1.0, high=3.0):
        values = rng.uniform(low, high, size=m * (m - 1) // 2)
        return cls(m, dict(zip(pair_order(m), values)))


@dataclass(frozen=True)
class NeighborAssignment:
    h: int
    eps: float
    neighbors: dict
    diff_matrix: np.ndarray
    pair_order: list
    cloud: PointCloud
    padding_only: bool = False
    attempts: int = 1

    def difference(self, i, j) -> np.ndarray:
        """x_k = z_{i,j} - z_{j,i} for the pair k ~ {i, j} (i < j)."""
        return self.neighbors[(i, j)] - self.neighbors[(j, i)]


@dataclass(frozen=True)
class ScaledNorm:
    base: QuadraticNorm
    alpha: float
    unscaled: QuadraticNorm
    lambda_max: float = field(default=0.0)


def lift(point, h: int) -> np.ndarray:
    """Canonic embedding of R^l into R^h (zero padding)."""
    point = np.asarray(point, dtype=float).ravel()
    if point.shape[0] > h:
        raise DimensionError(f"cannot lift a point of R^{point.shape[0]} into R^{h}")
    out = np.zeros(h)
    out[: point.shape[0]] = point
    return out


def default_eps(cloud: PointCloud) -> float:
    return DEFAULT_EPS_FRACTION * cloud.min_distance()


def sample_ball(rng, center, radius, size=None):
    """Uniform draw(s) from the open Euclidean ball (Gaussian direction, radius * u^(1/dim))."""
    center = np.asarray(center, dtype=float)
    dim = center.shape[0]
    shape = (dim,) if size is None else (size, dim)
    direction = rng.standard_normal(shape)
    direction /= np.linalg.norm(direction, axis=-1, keepdims=True)
    u = rng.uniform(0.0, 1.0, size=None if size is None else (size, 1))
    return center + radius * u ** (1.0 / dim) * direction


def rank_check(matrix, tol=RANK_RTOL) -> bool:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionError(f"rank_check needs a square matrix, got {matrix.shape}")
    return numerical_rank(matrix, tol) == matrix.shape[0]


def sample_neighbors(cloud: PointCloud, eps=None, rng=None, *, padding_only=False,
                     max_resamples=MAX_RESAMPLES) -> NeighborAssignment:
    """Draw two fresh neighbors per unordered pair and assemble the difference matrix.

    With ``padding_only`` the perturbation lives in the h - l padding
    coordinates (uniform on that subspace's eps-ball) and the data
    coordinates stay exact, which is what a noise table needs.
    """
    if rng is None:
        rng = np.random.default_rng()
    h = cloud.h
    if h < cloud.ell or (padding_only and h <= cloud.ell):
        raise CapacityError(
            f"C({cloud.m},2) = {h} is too small to lift points of R^{cloud.ell}"
        )
    if eps is None:
        eps = default_eps(cloud)
    # padding-only offsets never move data coordinates, so distinct points keep
    # distinct neighbors for any radius; the disjoint-ball bound is for full balls
    limit = math.inf if padding_only else 0.5 * cloud.min_distance()
    if not 0 < eps < limit:
        raise EpsilonTooLargeError(
            f"eps = {eps:.6g} must lie in (0, {limit:.6g}) so the eps-balls stay disjoint"
        )
    pairs = pair_order(cloud.m)
    lifted = [lift(p, h) for p in cloud.points]
    pad = h - cloud.ell
    for attempt in range(1, max_resamples + 2):
        neighbors = {}
        for i, j in pairs:
            for a, b in ((i, j), (j, i)):
                if padding_only:
                    z = lifted[a].copy()
                    z[cloud.ell:] = sample_ball(rng, np.zeros(pad), eps)
                else:
                    z = sample_ball(rng, lifted[a], eps)
                neighbors[(a, b)] = z
        diff = np.column_stack([neighbors[(i, j)] - neighbors[(j, i)] for i, j in pairs])
        if rank_check(diff):
            diff.flags.writeable = False
            return NeighborAssignment(h, eps, neighbors, diff, pairs, cloud, padding_only, attempt)
    hint = ""
    if padding_only and numerical_rank(cloud.points - cloud.points[0]) < cloud.ell:
        hint = " (the data points do not affinely span R^l, so padding-only noise cannot reach full rank)"
    raise RankDeficiencyError(
        f"difference matrix stayed rank deficient after {max_resamples} resamples{hint}"
    )


def scaled_form(assignment: NeighborAssignment, spec: DistanceSpec, *,
                spread_threshold=DEFAULT_SPREAD_THRESHOLD) -> ScaledNorm:
    """Interpolating form on the h difference vectors, scaled so lambda_max = 1."""
    if spec.m != assignment.cloud.m:
        raise DimensionError(f"spec covers {spec.m} points, cloud has {assignment.cloud.m}")
    system = IndependentSystem(assignment.diff_matrix.T, spec.vector())
    unscaled = interpolating_form(system, spread_threshold=spread_threshold)
    lam = float(symmetric_eigenvalues(unscaled.matrix)[-1])
    alpha = 1.0 / lam
    return ScaledNorm(unscaled.scaled(alpha), alpha, unscaled, lam)


def _sign(a, b, rtol):
    if abs(a - b) <= rtol * max(abs(a), abs(b)):
        return 0
    return 1 if a > b else -1


@dataclass
class RelationReport:
    triples_checked: int = 0
    sign_violations: list = field(default_factory=list)
    probes: int = 0
    domination_violations: int = 0
    max_norm_ratio: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.sign_violations and self.domination_violations == 0


def verify_relations(norm: ScaledNorm, assignment: NeighborAssignment, spec: DistanceSpec, *,
                     probes=1000, rng=None, rtol=1e-8) -> RelationReport:
    """Compare every proximity relation delta_ij vs delta_ik with the realized Q-distances,
    and check |x|_Q <= |x|_2 on random probes."""
    if rng is None:
        rng = np.random.default_rng(0)
    m = spec.m
    realized = {}
    for i, j in assignment.pair_order:
        realized[(i, j)] = realized[(j, i)] = norm.base.norm(assignment.difference(i, j))
    report = RelationReport()
    for i in range(m):
        others = [t for t in range(m) if t != i]
        for j, k in itertools.combinations(others, 2):
            report.triples_checked += 1
            want = _sign(spec[i, j], spec[i, k], rtol)
            got = _sign(realized[(i, j)], realized[(i, k)], rtol)
            if want != got:
                report.sign_violations.append((i, j, k, want, got))
    if probes:
        xs = rng.standard_normal((probes, assignment.h))
        xs *= rng.uniform(0.0, 10.0, size=(probes, 1))
        q = norm.base.norms(xs)
        e = np.linalg.norm(xs, axis=1)
        ratio = q / np.where(e > 0, e, 1.0)
        report.probes = probes
        report.max_norm_ratio = float(np.max(ratio))
        report.domination_violations = int(np.sum(q > (1 + 1e-10) * e))
    return report
