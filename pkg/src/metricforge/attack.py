"""End-to-end clustering manipulation with a forged epsilon-semimetric.

Same-class pairs get a tiny target distance (closest Euclidean pair / 200),
cross-class pairs a huge one (200 x the widest Euclidean pair). k-Means is
started from the class means, which are themselves part of the forged
cloud, so every assignment distance is a designed one. DBSCAN runs with the
radius halfway between the two realized distances and minPts = 2.
"""

import math
import warnings
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field

import numpy as np

from .clustering import DEFAULT_ITERATIONS, NOISE, centroid, dbscan, kmeans
from .embedding import DistanceSpec, PointCloud, default_eps, sample_ball
from .errors import ConditioningWarning, NumericalFailure, RankDeficiencyError
from .semimetric import EpsilonSemimetric, build_semimetric

SMALL_DIVISOR = 200.0
LARGE_FACTOR = 200.0
DBSCAN_MIN_PTS = 2
CENTER_FIXPOINT_ROUNDS = 100


@dataclass(frozen=True)
class AttackPlan:
    cloud: PointCloud
    delta0: float
    delta1: float
    delta_small: float
    delta_large: float
    spec: DistanceSpec
    eps: float | None = None
    noise_variant: str = "hashed"
    scaled: bool = False

    @property
    def effective_eps(self) -> float:
        return self.eps if self.eps is not None else default_eps(self.cloud)

    def summary(self) -> dict:
        return {
            "m": self.cloud.m,
            "h": self.cloud.h,
            "delta0": self.delta0,
            "delta1": self.delta1,
            "delta_small": self.delta_small,
            "delta_large": self.delta_large,
            "eps": self.effective_eps,
            "noise": self.noise_variant,
            "scaled": self.scaled,
        }


@dataclass
class SeparationReport:
    within: dict
    between: dict
    ratio: float | None

    def to_dict(self) -> dict:
        return {
            "within": {str(k): v for k, v in self.within.items()},
            "between": {f"{a}-{b}": v for (a, b), v in self.between.items()},
            "ratio": self.ratio,
        }


@dataclass
class AttackReport:
    algorithm: str
    success: bool
    desired: list
    recovered: list
    points: list
    bijection: dict | None = None
    separation: SeparationReport | None = None
    warnings: list = field(default_factory=list)
    failure: dict | None = None
    plan: dict | None = None
    centers: list | None = None
    dbscan_eps: float | None = None
    noise_points: list = field(default_factory=list)
    max_rel_error: float | None = None
    seed: int | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["separation"] = self.separation.to_dict() if self.separation else None
        if self.bijection is not None:
            d["bijection"] = {str(k): v for k, v in self.bijection.items()}
        return d


def assign_target_distances(cloud: PointCloud, eps=None, noise_variant="hashed", scaled=False) -> AttackPlan:
    if cloud.labels is None:
        raise ValueError("the attack needs desired class labels on the cloud")
    delta0 = cloud.min_distance()
    delta1 = cloud.max_distance()
    small = delta0 / SMALL_DIVISOR
    large = LARGE_FACTOR * delta1
    labels = cloud.labels
    spec = DistanceSpec.from_function(cloud.m, lambda i, j: small if labels[i] == labels[j] else large)
    return AttackPlan(cloud, delta0, delta1, small, large, spec, eps, noise_variant, scaled)


@contextmanager
def _stage(name):
    """Turn floating-point traps inside a pipeline step into a NumericalFailure naming it."""
    try:
        with np.errstate(over="raise", invalid="raise", divide="raise"):
            yield
    except FloatingPointError as exc:
        raise NumericalFailure(name, str(exc)) from exc
    except RankDeficiencyError as exc:
        raise NumericalFailure(name, str(exc)) from exc


def _require_finite(stage, values, what):
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise NumericalFailure(stage, f"non-finite {what}")


def forge_semimetric(plan: AttackPlan, rng=None) -> EpsilonSemimetric:
    """Build the semimetric for ``plan`` and check every number it produced is finite."""
    with _stage("forge"):
        sm = build_semimetric(plan.cloud, plan.spec, plan.effective_eps, noise=plan.noise_variant,
                              scaled=plan.scaled, rng=rng)
    _require_finite("forge", sm.form.matrix, "form matrix entries")
    if sm.form.factor is not None:
        _require_finite("forge", sm.form.factor, "form factor entries")
    if sm.lambda_max is not None:
        _require_finite("scaling", [sm.lambda_max, sm.alpha], "eigenvalue/scale")
    with _stage("verification"):
        table = sm.verification_table()
    _require_finite("verification", [r["realized"] for r in table], "realized distances")
    return sm


def label_isomorphism(a, b) -> dict | None:
    """Bijection mapping labels of ``a`` onto labels of ``b`` inducing the same partition."""
    if len(a) != len(b):
        raise ValueError("label lists differ in length")
    forward, backward = {}, {}
    for x, y in zip(a, b):
        if (x == NOISE) != (y == NOISE):
            return None
        if forward.setdefault(x, y) != y or backward.setdefault(y, x) != x:
            return None
    return forward


def separation_report(metric, points, labels) -> SeparationReport:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    labels = list(labels)
    classes = sorted(set(labels))
    within = {c: None for c in classes}
    between = {}
    m = len(labels)
    for i in range(m):
        for j in range(i + 1, m):
            d = float(metric(pts[i], pts[j]))
            a, b = labels[i], labels[j]
            if a == b:
                within[a] = d if within[a] is None else max(within[a], d)
            else:
                key = (min(a, b), max(a, b))
                between[key] = d if key not in between else min(between[key], d)
    ratio = None
    known = [v for v in within.values() if v is not None]
    if known and between:
        ratio = min(between.values()) / max(known)
    return SeparationReport(within, between, ratio)


def class_centers(points, labels, classes):
    """Class means that reproduce themselves under the k-Means update.

    With the center prepended to its class, the update averages the center
    together with the members. Iterating that average to a bitwise fixed
    point keeps the center on the forged cloud across iterations.
    """
    pts = np.asarray(points, dtype=float)
    labels = np.asarray(labels)
    centers = []
    for c in classes:
        members = pts[labels == c]
        center = centroid(members)
        for _ in range(CENTER_FIXPOINT_ROUNDS):
            nxt = centroid(np.vstack([center, members]))
            if np.array_equal(nxt, center):
                break
            center = nxt
        else:
            raise NumericalFailure("centers", f"class {c} mean has no floating-point fixed point")
        centers.append(center)
    return np.array(centers)


def _unique_rows(points, labels):
    seen = {}
    for p, lab in zip(points, labels):
        seen.setdefault(p.tobytes(), (p, lab))
    rows = list(seen.values())
    return np.array([r[0] for r in rows]), [r[1] for r in rows]


def _collect(caught, report):
    for w in caught:
        if issubclass(w.category, ConditioningWarning):
            report.warnings.append(f"conditioning: {w.message}")
        else:
            report.warnings.append(str(w.message))


def attack_kmeans(plan: AttackPlan, iterations=DEFAULT_ITERATIONS, *, centers="mean", rng=None) -> AttackReport:
    """Run k-Means under the forged semimetric; success means the exact desired labels.

    ``centers="z-neighbor"`` is the negative control: start from a perturbed
    class member instead of the class mean, forging over the data alone.
    """
    data = plan.cloud
    desired = [int(v) for v in data.labels]
    classes = sorted(set(desired))
    report = AttackReport("kmeans", False, desired, [], data.points.tolist())
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            if centers == "mean":
                with _stage("centers"):
                    init = class_centers(data.points, desired, classes)
                run_points = np.vstack([init, data.points])
                run_desired = classes + desired
                forged_pts, forged_labels = _unique_rows(run_points, run_desired)
                forged = assign_target_distances(PointCloud(forged_pts, forged_labels), plan.eps,
                                                 plan.noise_variant, plan.scaled)
            elif centers == "z-neighbor":
                if rng is None:
                    rng = np.random.default_rng(0)
                eps = plan.effective_eps
                init = np.array([
                    sample_ball(rng, data.points[desired.index(c)], eps) for c in classes
                ])
                run_points, run_desired = data.points, desired
                forged = plan
            else:
                raise ValueError(f"unknown center mode {centers!r}")
            report.plan = forged.summary()
            report.centers = init.tolist()
            sm = forge_semimetric(forged, rng)
            report.max_rel_error = max(r["rel_error"] for r in sm.verification_table())
            with _stage("clustering"):
                result = kmeans(run_points, len(classes), init, sm, iterations)
            recovered = [classes[i] for i in result.labels]
            offset = len(run_desired) - len(desired)
            report.recovered = recovered[offset:]
            report.success = recovered == run_desired
            if report.success:
                report.bijection = {c: c for c in classes}
            for it, c in result.empty_cluster_events:
                report.warnings.append(f"empty cluster {classes[c]} at iteration {it}; center kept")
            with _stage("separation"):
                report.separation = separation_report(sm, forged.cloud.points, forged.cloud.labels)
        except NumericalFailure as exc:
            report.failure = {"stage": exc.stage, "message": str(exc)}
    _collect(caught, report)
    return report


def attack_dbscan(plan: AttackPlan, *, rng=None) -> AttackReport:
    """Run DBSCAN (minPts = 2) under the forged semimetric.

    A desired class with a single member cannot contain a core point, so
    DBSCAN reports it as noise; such points are compared as singleton
    clusters and listed in ``noise_points``.
    """
    data = plan.cloud
    desired = [int(v) for v in data.labels]
    report = AttackReport("dbscan", False, desired, [], data.points.tolist(), plan=plan.summary())
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            sm = forge_semimetric(plan, rng)
            report.max_rel_error = max(r["rel_error"] for r in sm.verification_table())
            scale = math.sqrt(sm.alpha)
            radius = (scale * plan.delta_small + scale * plan.delta_large) / 2.0
            report.dbscan_eps = radius
            with _stage("clustering"):
                result = dbscan(data.points, radius, DBSCAN_MIN_PTS, sm)
            recovered = list(result.labels)
            report.noise_points = [i + 1 for i, v in enumerate(recovered) if v == NOISE]
            next_label = max(recovered, default=-1) + 1
            for i, v in enumerate(recovered):
                if v == NOISE:
                    recovered[i] = next_label
                    next_label += 1
            report.recovered = [v + 1 for v in recovered]
            report.bijection = label_isomorphism(desired, report.recovered)
            report.success = report.bijection is not None
            with _stage("separation"):
                report.separation = separation_report(sm, data.points, desired)
        except NumericalFailure as exc:
            report.failure = {"stage": exc.stage, "message": str(exc)}
    _collect(caught, report)
    return report


def random_cloud(m, ell, n_classes, rng) -> PointCloud:
    """Standard-normal points with desired classes drawn uniformly from 1..n_classes."""
    points = rng.standard_normal((m, ell))
    labels = rng.integers(1, n_classes + 1, size=m)
    return PointCloud(points, labels)


def run_attack(algorithm, cloud=None, *, seed=0, random_shape=(10, 2, 3), eps=None, noise="hashed",
               scaled=False, iterations=DEFAULT_ITERATIONS, centers="mean") -> AttackReport:
    """One seeded attack run; all randomness derives from ``seed``."""
    rng = np.random.default_rng(seed)
    if cloud is None:
        cloud = random_cloud(*random_shape, rng)
    plan = assign_target_distances(cloud, eps, noise, scaled)
    if algorithm == "kmeans":
        report = attack_kmeans(plan, iterations, centers=centers, rng=rng)
    elif algorithm == "dbscan":
        report = attack_dbscan(plan, rng=rng)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    report.seed = seed
    return report
