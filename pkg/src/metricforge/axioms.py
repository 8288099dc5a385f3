"""Empirical audit of the metric axioms on a finite sample.

The classification follows the usual ladder: identity and positivity are
required throughout; symmetry separates semimetric/metric from
premetric/quasimetric; the triangle inequality (exact, or up to an additive
eps) decides the rest.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

EXHAUSTIVE_LIMIT = 200


@dataclass
class AxiomReport:
    n_points: int
    n_triples: int
    identity_defect: float
    positivity_violations: list = field(default_factory=list)
    symmetry_defect: float = 0.0
    asymmetry_witnesses: list = field(default_factory=list)
    triangle_defect: float = 0.0
    worst_triple: tuple | None = None
    eps: float | None = None
    classification: str = "none"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["worst_triple"] = list(self.worst_triple) if self.worst_triple else None
        return d


def classify(identity_ok, positivity_ok, symmetric, triangle_exact, triangle_within_eps) -> str:
    if not (identity_ok and positivity_ok):
        return "none"
    if symmetric:
        if triangle_exact:
            return "metric"
        if triangle_within_eps:
            return "ε-semimetric"
        return "semimetric"
    return "quasimetric" if triangle_exact else "premetric"


def distance_matrix(distance, points) -> np.ndarray:
    n = len(points)
    d = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            d[i, j] = float(distance(points[i], points[j]))
    return d


def _triangle_exhaustive(d):
    """max over distinct (x, y, z) of d(x,y) - d(x,z) - d(z,y), with its argmax."""
    n = d.shape[0]
    best, where = -np.inf, None
    for x in range(n):
        # t[y, z] = d[x, y] - d[x, z] - d[z, y]
        t = d[x][:, None] - d[x][None, :] - d.T
        t[x, :] = -np.inf
        t[:, x] = -np.inf
        np.fill_diagonal(t, -np.inf)
        k = int(np.argmax(t))
        if t.flat[k] > best:
            best, where = float(t.flat[k]), (x, k // n, k % n)
    return best, where, n * (n - 1) * (n - 2)


def _triangle_sampled(d, n_triples, rng):
    n = d.shape[0]
    trip = np.empty((0, 3), dtype=int)
    while trip.shape[0] < n_triples:
        cand = rng.integers(0, n, size=(2 * n_triples, 3))
        distinct = (cand[:, 0] != cand[:, 1]) & (cand[:, 0] != cand[:, 2]) & (cand[:, 1] != cand[:, 2])
        trip = np.vstack([trip, cand[distinct]])
    trip = trip[:n_triples]
    x, y, z = trip.T
    t = d[x, y] - d[x, z] - d[z, y]
    k = int(np.argmax(t))
    return float(t[k]), tuple(int(v) for v in trip[k]), n_triples


def check_axioms(distance, sample, eps=None, *, tol=1e-12, sym_rtol=1e-15,
                 n_triples=10_000, rng=None, max_witnesses=10) -> AxiomReport:
    """Evaluate ``distance`` on every ordered pair of ``sample`` and audit the axioms.

    Triples are exhaustive for samples up to EXHAUSTIVE_LIMIT points, else
    ``n_triples`` uniformly random ordered triples. Defects at or below
    ``tol * max distance`` count as zero (rounding noise).
    """
    points = [np.asarray(p, dtype=float).ravel() for p in sample]
    n = len(points)
    if n < 3:
        raise ValueError("axiom check needs at least 3 sample points")
    d = distance_matrix(distance, points)
    scale = float(np.max(np.abs(d[np.isfinite(d)]))) if np.any(np.isfinite(d)) else 0.0
    zero = tol * max(scale, 1e-300)

    identity = float(np.max(np.abs(np.diag(d))))
    positivity = []
    asym, sym_defect = [], 0.0
    for i in range(n):
        for j in range(n):
            if i == j or np.array_equal(points[i], points[j]):
                continue
            if not d[i, j] > 0:
                positivity.append((i, j, float(d[i, j])))
            if j > i:
                gap = abs(d[i, j] - d[j, i])
                sym_defect = max(sym_defect, gap)
                if gap > sym_rtol * max(abs(d[i, j]), abs(d[j, i])):
                    asym.append((i, j, float(d[i, j]), float(d[j, i])))

    if n <= EXHAUSTIVE_LIMIT:
        raw, worst, count = _triangle_exhaustive(d)
    else:
        raw, worst, count = _triangle_sampled(d, n_triples, rng or np.random.default_rng(0))
    defect = max(raw, 0.0)

    report = AxiomReport(
        n_points=n,
        n_triples=count,
        identity_defect=identity,
        positivity_violations=positivity[:max_witnesses],
        symmetry_defect=sym_defect,
        asymmetry_witnesses=asym[:max_witnesses],
        triangle_defect=defect,
        worst_triple=worst,
        eps=eps,
    )
    report.classification = classify(
        identity <= zero,
        not positivity,
        not asym,
        defect <= zero,
        eps is not None and defect <= eps,
    )
    return report
