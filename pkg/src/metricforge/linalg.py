"""Small dense linear-algebra helpers: numerical rank, complement bases, Jacobi eigenvalues."""

import numpy as np

from .errors import DimensionError, SymmetryError

# singular values below max(shape) * sigma_max * RANK_RTOL count as zero
RANK_RTOL = 1e-12


def _as_rows(vectors, dim=None):
    """Stack a list of vectors into an (n, d) float array; n may be 0."""
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        rows = np.asarray(vectors, dtype=float)
    else:
        vectors = [np.asarray(v, dtype=float).ravel() for v in vectors]
        lengths = {v.shape[0] for v in vectors}
        if len(lengths) > 1:
            raise DimensionError(f"vectors have inconsistent lengths {sorted(lengths)}")
        if not vectors:
            if dim is None:
                raise DimensionError("dimension required when no vectors are given")
            return np.zeros((0, dim))
        rows = np.vstack(vectors)
    if dim is not None and rows.shape[1] != dim:
        raise DimensionError(f"expected vectors in R^{dim}, got R^{rows.shape[1]}")
    return rows


def rank_cutoff(singular_values, shape, rtol=RANK_RTOL):
    if len(singular_values) == 0:
        return 0.0
    return max(shape) * float(np.max(singular_values)) * rtol


def numerical_rank(matrix, rtol=RANK_RTOL) -> int:
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    if matrix.size == 0:
        return 0
    sv = np.linalg.svd(matrix, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.sum(sv > rank_cutoff(sv, matrix.shape, rtol)))


def complement_basis(span_vectors, dim=None, rtol=RANK_RTOL):
    """Orthonormal basis (as columns) of the orthogonal complement of span(span_vectors)."""
    rows = _as_rows(span_vectors, dim)
    d = rows.shape[1]
    if rows.shape[0] == 0:
        return np.eye(d)
    _, sv, vt = np.linalg.svd(rows, full_matrices=True)
    rank = 0 if sv[0] == 0.0 else int(np.sum(sv > rank_cutoff(sv, rows.shape, rtol)))
    return vt[rank:].T.copy()


def null_space_matrix(span_vectors, dim=None, tol=RANK_RTOL):
    """Orthogonal projector whose null space is exactly span(span_vectors)."""
    basis = complement_basis(span_vectors, dim, tol)
    return basis @ basis.T


def _round_robin(n):
    """Disjoint (p, q) index sets covering every pair once per sweep."""
    players = list(range(n)) + ([-1] if n % 2 else [])
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        pairs = [(players[i], players[size - 1 - i]) for i in range(size // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a >= 0 and b >= 0]
        p = np.array([a for a, _ in pairs], dtype=int)
        q = np.array([b for _, b in pairs], dtype=int)
        rounds.append((p, q))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def check_symmetric(matrix, atol=None):
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    if atol is None:
        atol = 1e-10 * scale
    asym = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    if asym > atol:
        raise SymmetryError(f"matrix is not symmetric (max |A - A^T| = {asym:.3e})")
    return a


def symmetric_eigenvalues(matrix, *, tol=1e-15, max_sweeps=60):
    """Eigenvalues (ascending) of a symmetric matrix by cyclic Jacobi rotations.

    Rotations are scheduled in round-robin order so each round annihilates
    n/2 disjoint off-diagonal entries at once. Only elementwise numpy
    arithmetic is used, so results are bit-stable for a given input.
    """
    a = check_symmetric(matrix)
    a = 0.5 * (a + a.T)
    n = a.shape[0]
    if n <= 1:
        return np.diag(a).copy()
    rounds = _round_robin(n)
    total = np.linalg.norm(a)
    if total == 0.0:
        return np.zeros(n)
    prev_off = np.inf
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0))
        if off <= tol * total or off >= prev_off:
            break
        prev_off = off
        for p, q in rounds:
            apq = a[p, q]
            active = apq != 0.0
            if not np.any(active):
                continue
            p, q, apq = p[active], q[active], apq[active]
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            rp, rq = a[p, :].copy(), a[q, :].copy()
            a[p, :] = c[:, None] * rp - s[:, None] * rq
            a[q, :] = s[:, None] * rp + c[:, None] * rq
            cp, cq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = cp * c - cq * s
            a[:, q] = cp * s + cq * c
            a[p, q] = 0.0
            a[q, p] = 0.0
    return np.sort(np.diag(a))


def largest_eigenvalue(matrix) -> float:
    return float(symmetric_eigenvalues(matrix)[-1])
