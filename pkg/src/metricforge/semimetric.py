"""Deterministic epsilon-semimetrics on the original space R^l.

``d(x, y) = |(x, f(x, y)) - (y, f(y, x))|_Q`` where f pads each argument
into R^h with a small, order-dependent offset. On the designated point pairs
the padded differences are exactly the vectors the form was interpolated on,
so d reproduces the chosen distances there; everywhere else d stays within
eps/3 of the plain Q-distance of the zero-padded points (when |.|_Q <= |.|_2).
"""

import math
from dataclasses import dataclass

import numpy as np

from .embedding import (
    DistanceSpec,
    NeighborAssignment,
    PointCloud,
    lift,
    pair_order,
    rank_check,
    sample_neighbors,
)
from .errors import CapacityError, NoiseMagnitudeError, NumericalFailure, RankDeficiencyError
from .linalg import largest_eigenvalue, numerical_rank
from .quadform import DEFAULT_SPREAD_THRESHOLD, IndependentSystem, QuadraticNorm, interpolating_form
from .rng import float_seed, hashed_seed, uniform_stream

NOISE_VARIANTS = ("hashed", "paper", "fixed")


def _key(x) -> bytes:
    return np.ascontiguousarray(x, dtype="<f8").tobytes()


@dataclass(frozen=True)
class FixedTableNoise:
    """Stored padding offsets for the designated pairs, zero elsewhere.

    Points are matched by exact coordinate bits.
    """

    eps: float
    h: int
    ell: int
    table: dict
    mode: str = "fixed-table"

    def __call__(self, x, y) -> np.ndarray:
        offset = self.table.get((_key(x), _key(y)))
        if offset is None:
            return np.zeros(self.h - self.ell)
        return offset


@dataclass(frozen=True)
class SeededNoise:
    """``f(x, y) = scale * u`` with u drawn from a splitmix stream seeded by (x, y)."""

    eps: float
    h: int
    ell: int
    variant: str = "hashed"
    mode: str = "seeded"

    @property
    def scale(self) -> float:
        return 0.9 * self.eps / (6.0 * math.sqrt(self.h))

    def seed(self, x, y) -> int:
        if self.variant == "paper":
            return float_seed(seed_value(x, y, self.eps, self.h))
        return hashed_seed(x, y)

    def __call__(self, x, y) -> np.ndarray:
        return self.scale * uniform_stream(self.seed(x, y), self.h - self.ell)


def seed_value(x, y, eps: float, h: int) -> float:
    """The ad-hoc seed 0.9 * (eps / sqrt(h)) * prod(x) * sum(y).

    Collides (returns 0) whenever x has a zero coordinate.
    """
    p = math.prod(float(v) for v in np.ravel(x))
    s = sum(float(v) for v in np.ravel(y))
    return 0.9 * (eps / math.sqrt(h)) * p * s


def make_noise_fixed(assignment: NeighborAssignment, eps=None) -> FixedTableNoise:
    if not assignment.padding_only:
        raise ValueError("fixed-table noise needs neighbors that only perturb padding coordinates")
    if eps is None:
        eps = 6.0 * assignment.eps
    cloud = assignment.cloud
    ell = cloud.ell
    table = {}
    for (a, b), z in assignment.neighbors.items():
        offset = np.array(z[ell:], dtype=float)
        norm = float(np.linalg.norm(offset))
        if norm > eps / 6.0:
            raise NoiseMagnitudeError(
                f"offset for ({a + 1},{b + 1}) has norm {norm:.3e} > eps/6 = {eps / 6.0:.3e}"
            )
        offset.flags.writeable = False
        table[(_key(cloud.points[a]), _key(cloud.points[b]))] = offset
    return FixedTableNoise(eps, assignment.h, ell, table)


def make_noise_seeded(eps: float, h: int, ell: int, variant: str = "hashed") -> SeededNoise:
    if variant not in ("hashed", "paper"):
        raise ValueError(f"unknown seeded noise variant {variant!r}")
    if h <= ell:
        raise CapacityError(f"need h > l for padding noise (h={h}, l={ell})")
    return SeededNoise(eps, h, ell, variant)


@dataclass(frozen=True)
class EpsilonSemimetric:
    form: QuadraticNorm
    noise: object
    eps: float
    spec: DistanceSpec
    cloud: PointCloud
    alpha: float = 1.0
    lambda_max: float | None = None

    @property
    def h(self) -> int:
        return self.form.dim

    @property
    def ell(self) -> int:
        return self.cloud.ell

    @property
    def scaled(self) -> bool:
        return self.alpha != 1.0

    def lifted_difference(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float).ravel()
        y = np.asarray(y, dtype=float).ravel()
        zx = np.concatenate([x, self.noise(x, y)])
        zy = np.concatenate([y, self.noise(y, x)])
        return zx - zy

    def __call__(self, x, y) -> float:
        return self.form.norm(self.lifted_difference(x, y))

    def canonical(self, x, y) -> float:
        """Q-distance of the zero-padded points (no noise)."""
        diff = np.asarray(x, dtype=float).ravel() - np.asarray(y, dtype=float).ravel()
        return self.form.norm(lift(diff, self.h))

    def verification_table(self) -> list[dict]:
        """Desired vs realized distance for every designated pair (1-based indices)."""
        rows = []
        factor = math.sqrt(self.alpha)
        for i, j in pair_order(self.cloud.m):
            desired = self.spec[i, j]
            expected = factor * desired
            realized = self(self.cloud.points[i], self.cloud.points[j])
            rows.append({
                "i": i + 1,
                "j": j + 1,
                "desired": desired,
                "expected": expected,
                "realized": realized,
                "rel_error": abs(realized - expected) / expected,
            })
        return rows


def seeded_assignment(cloud: PointCloud, noise) -> NeighborAssignment:
    """Neighbors z_{i,j} = (y_i, f(y_i, y_j)) induced by a noise function."""
    h = cloud.h
    pairs = pair_order(cloud.m)
    neighbors = {}
    for i, j in pairs:
        for a, b in ((i, j), (j, i)):
            ya, yb = cloud.points[a], cloud.points[b]
            neighbors[(a, b)] = np.concatenate([ya, noise(ya, yb)])
    diff = np.column_stack([neighbors[(i, j)] - neighbors[(j, i)] for i, j in pairs])
    if not rank_check(diff):
        hint = ""
        if numerical_rank(cloud.points - cloud.points[0]) < cloud.ell:
            hint = "; the data points do not affinely span R^l"
        raise RankDeficiencyError(f"noise-induced difference matrix is rank deficient{hint}")
    diff.flags.writeable = False
    return NeighborAssignment(h, noise.eps / 6.0, neighbors, diff, pairs, cloud, True)


def build_semimetric(cloud: PointCloud, spec: DistanceSpec, eps: float = 0.1, *, noise="hashed",
                     scaled=False, rng=None, spread_threshold=DEFAULT_SPREAD_THRESHOLD):
    """Forge an epsilon-semimetric realizing ``spec`` on the cloud.

    Unscaled forms give ``d(y_i, y_j) = delta_ij``; scaled forms give
    ``sqrt(alpha) * delta_ij`` with ``|.|_Q <= |.|_2``, which is what the
    eps/3 approximation (and hence the eps-triangle bound) relies on.
    """
    if noise not in NOISE_VARIANTS:
        raise ValueError(f"noise must be one of {NOISE_VARIANTS}, got {noise!r}")
    if eps <= 0:
        raise ValueError("eps must be positive")
    h = cloud.h
    if h <= cloud.ell:
        raise CapacityError(
            f"C({cloud.m},2) = {h} leaves no padding coordinates above R^{cloud.ell}"
        )
    if noise == "fixed":
        if rng is None:
            rng = np.random.default_rng()
        assignment = sample_neighbors(cloud, eps / 6.0, rng, padding_only=True)
        noise_fn = make_noise_fixed(assignment, eps)
    else:
        noise_fn = make_noise_seeded(eps, h, cloud.ell, noise)
        assignment = seeded_assignment(cloud, noise_fn)
    system = IndependentSystem(assignment.diff_matrix.T, spec.vector())
    form = interpolating_form(system, spread_threshold=spread_threshold)
    alpha, lam = 1.0, None
    if scaled:
        lam = largest_eigenvalue(form.matrix)
        if not (math.isfinite(lam) and lam > 0):
            raise NumericalFailure("scaling", f"largest eigenvalue is {lam}")
        alpha = 1.0 / lam
        form = form.scaled(alpha)
    return EpsilonSemimetric(form, noise_fn, eps, spec, cloud, alpha, lam)
