"""k-Means and DBSCAN over an arbitrary black-box distance.

Both algorithms only ever call the supplied ``distance(x, y)``; nothing
falls back to Euclidean geometry. Centroid updates are coordinate means,
independent of the distance.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError

NOISE = -1
DEFAULT_ITERATIONS = 20


@dataclass
class ClusterAssignment:
    labels: list
    centers: list | None = None
    iterations_run: int = 0
    empty_cluster_events: list = field(default_factory=list)


def euclidean(x, y) -> float:
    return float(np.linalg.norm(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)))


def centroid(points) -> np.ndarray:
    """Coordinate mean with correctly rounded sums (order independent)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[0]
    return np.array([math.fsum(pts[:, c]) / n for c in range(pts.shape[1])])


def _as_points(points):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.ndim != 2:
        raise DimensionError("points must form an (m, l) array")
    return pts


def kmeans(points, k, init_centers, distance=euclidean, iterations=DEFAULT_ITERATIONS) -> ClusterAssignment:
    """Lloyd iterations from given centers, always running all ``iterations`` rounds.

    Ties go to the lowest center index. A center that loses all its points
    keeps its previous position; each such event is recorded as
    ``(iteration, center_index)``.
    """
    pts = _as_points(points)
    centers = _as_points(init_centers).copy()
    if k < 1 or centers.shape[0] != k:
        raise ValueError(f"need exactly k = {k} >= 1 initial centers, got {centers.shape[0]}")
    if centers.shape[1] != pts.shape[1]:
        raise DimensionError(f"centers live in R^{centers.shape[1]}, points in R^{pts.shape[1]}")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    result = ClusterAssignment(labels=[])
    labels = np.zeros(pts.shape[0], dtype=int)
    for it in range(iterations):
        for i, p in enumerate(pts):
            dists = [distance(p, c) for c in centers]
            labels[i] = int(np.argmin(dists))  # argmin returns the first minimum
        for c in range(k):
            members = pts[labels == c]
            if members.shape[0] == 0:
                result.empty_cluster_events.append((it, c))
                continue
            centers[c] = centroid(members)
    result.labels = labels.tolist()
    result.centers = [c.copy() for c in centers]
    result.iterations_run = iterations
    return result


def dbscan(points, eps, min_pts, distance=euclidean) -> ClusterAssignment:
    """Density-based clustering; the neighbor count includes the point itself.

    Seeds are visited in index order, border points join the first cluster
    that reaches them, unreachable points get ``NOISE``. Cluster labels are
    0, 1, ... in discovery order.
    """
    pts = _as_points(points)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if min_pts < 1:
        raise ValueError("min_pts must be >= 1")
    m = pts.shape[0]
    neighborhoods = []
    for i in range(m):
        neighborhoods.append([j for j in range(m) if j == i or distance(pts[i], pts[j]) <= eps])
    core = [len(nb) >= min_pts for nb in neighborhoods]
    labels = [None] * m
    cluster = 0
    for i in range(m):
        if labels[i] is not None:
            continue
        if not core[i]:
            labels[i] = NOISE
            continue
        labels[i] = cluster
        frontier = [q for q in neighborhoods[i] if q != i]
        while frontier:
            j = frontier.pop(0)
            if labels[j] == NOISE:
                labels[j] = cluster  # border point, never expanded
                continue
            if labels[j] is not None:
                continue
            labels[j] = cluster
            if core[j]:
                frontier.extend(q for q in neighborhoods[j] if labels[q] is None or labels[q] == NOISE)
        cluster += 1
    return ClusterAssignment(labels=[int(v) for v in labels], iterations_run=1)
