"""Quadratic forms that take prescribed values on linearly independent vectors.

Given independent x_1..x_n in R^d and targets delta_k > 0, the form
``q(x) = x^T A x`` built here satisfies ``sqrt(q(x_k)) = delta_k``. Each
summand A_k is a scaled orthogonal projector that annihilates every x_j with
j != k, so the pieces interpolate like Lagrange basis polynomials.

Forms carry an optional factor L with ``A = L^T L``. Evaluating ``|L x|``
instead of ``x^T A x`` avoids the cancellation that destroys small target
values when the targets span many orders of magnitude.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConditioningWarning, DimensionError, NumericalFailure, RankDeficiencyError
from .linalg import RANK_RTOL, check_symmetric, complement_basis, largest_eigenvalue, numerical_rank  # noqa: F401

DEFAULT_SPREAD_THRESHOLD = 1e12


def check_capacity(dim: int) -> int:
    """Largest m with C(m, 2) <= dim."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    m = (1 + math.isqrt(8 * dim + 1)) // 2
    # isqrt keeps this exact where float sqrt could round across an integer
    while m * (m - 1) // 2 > dim:
        m -= 1
    return m


@dataclass(frozen=True)
class IndependentSystem:
    vectors: np.ndarray
    targets: np.ndarray
    rtol: float = RANK_RTOL

    def __post_init__(self):
        vectors = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        targets = np.asarray(self.targets, dtype=float).ravel()
        n, d = vectors.shape
        if n < 1:
            raise DimensionError("system needs at least one vector")
        if targets.shape[0] != n:
            raise DimensionError(f"{n} vectors but {targets.shape[0]} targets")
        if np.any(~np.isfinite(targets)) or np.any(targets <= 0):
            raise ValueError("all targets must be finite and positive")
        if n > d:
            raise RankDeficiencyError(f"{n} vectors in R^{d} cannot be linearly independent")
        rank = numerical_rank(vectors, self.rtol)
        if rank < n:
            raise RankDeficiencyError(f"vectors have numerical rank {rank} < {n}")
        vectors.flags.writeable = False
        targets.flags.writeable = False
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "targets", targets)

    @property
    def n(self):
        return self.vectors.shape[0]

    @property
    def dim(self):
        return self.vectors.shape[1]


@dataclass(frozen=True)
class QuadraticNorm:
    """Symmetric PSD matrix A with ``|x| = sqrt(x^T A x)``."""

    matrix: np.ndarray
    factor: np.ndarray | None = None
    spread: float | None = field(default=None, compare=False)

    def __post_init__(self):
        a = check_symmetric(self.matrix)
        a = 0.5 * (a + a.T)
        if not np.all(np.isfinite(a)):
            raise NumericalFailure("quadratic_form", "form matrix has non-finite entries")
        a.flags.writeable = False
        object.__setattr__(self, "matrix", a)
        if self.factor is not None:
            f = np.array(self.factor, dtype=float)
            if f.ndim != 2 or f.shape[1] != a.shape[0]:
                raise DimensionError(f"factor shape {f.shape} does not match matrix {a.shape}")
            f.flags.writeable = False
            object.__setattr__(self, "factor", f)
        else:
            lam = np.linalg.eigvalsh(a) if a.size else np.zeros(0)
            if lam.size and lam[0] < -1e-10 * max(abs(lam[-1]), 1.0):
                raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {lam[0]:.3e})")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if self.factor is not None:
            y = self.factor @ x
            return float(y @ y)
        return float(x @ self.matrix @ x)

    def norm(self, x) -> float:
        return math.sqrt(max(self.value(x), 0.0))

    def norms(self, xs) -> np.ndarray:
        """Row-wise norms of a batch."""
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        if self.factor is not None:
            y = xs @ self.factor.T
            return np.sqrt(np.einsum("ij,ij->i", y, y))
        return np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", xs, self.matrix, xs), 0.0))

    def scaled(self, alpha: float) -> "QuadraticNorm":
        factor = None if self.factor is None else math.sqrt(alpha) * self.factor
        spread = self.spread
        return QuadraticNorm(alpha * self.matrix, factor, spread)


def _component(system: IndependentSystem, k: int, span_complement=None):
    """Scale c_k and orthonormal basis U_k with A_k = c_k U_k U_k^T."""
    if not 0 <= k < system.n:
        raise IndexError(f"component index {k} out of range for {system.n} vectors")
    x_k = system.vectors[k]
    others = np.delete(system.vectors, k, axis=0)
    if span_complement is None:
        span_complement = complement_basis(system.vectors, rtol=system.rtol)
    # annihilate the other vectors and everything off the system's span
    blockers = np.vstack([others, span_complement.T]) if span_complement.size else others
    basis = complement_basis(blockers, dim=system.dim, rtol=system.rtol)
    proj = basis.T @ x_k
    weight = float(proj @ proj)
    if basis.shape[1] == 0 or math.sqrt(weight) <= system.rtol * system.dim * np.linalg.norm(x_k):
        raise RankDeficiencyError(
            f"vector {k} lies in the span of the others (x^T B x = {weight:.3e})"
        )
    return system.targets[k] ** 2 / weight, basis


def component_form(system: IndependentSystem, k: int) -> np.ndarray:
    """Matrix A_k (0-based k): value delta_k^2 at x_k, zero at every other x_j."""
    scale, basis = _component(system, k)
    return scale * (basis @ basis.T)


def interpolating_form(system: IndependentSystem, *, spread_threshold=DEFAULT_SPREAD_THRESHOLD):
    """Sum of all component forms; a seminorm when n < d (see complete_to_definite)."""
    comp = complement_basis(system.vectors, rtol=system.rtol)
    d = system.dim
    matrix = np.zeros((d, d))
    rows = []
    for k in range(system.n):
        scale, basis = _component(system, k, comp)
        matrix += scale * (basis @ basis.T)
        rows.append(math.sqrt(scale) * basis.T)
    factor = np.vstack(rows)
    if not (np.all(np.isfinite(factor)) and np.all(np.isfinite(matrix))):
        raise NumericalFailure("interpolating_form", "non-finite entries in the constructed form")
    spread = eigen_spread(factor, system.n)
    if spread > spread_threshold:
        warnings.warn(ConditioningWarning(spread, spread_threshold), stacklevel=2)
    return QuadraticNorm(matrix, factor, spread)


def eigen_spread(factor, rank=None) -> float:
    """lambda_max / smallest nonzero lambda of L^T L, from the singular values of L.

    With ``rank`` given, the smallest of the top ``rank`` singular values is
    used even when it falls below the numerical-rank cutoff; that is exactly
    the ill-conditioned case this number exists to flag.
    """
    sv = np.linalg.svd(factor, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 1.0
    if rank is None:
        nonzero = sv[sv > max(factor.shape) * sv[0] * RANK_RTOL]
    else:
        nonzero = sv[:rank]
    if nonzero[-1] == 0.0:
        return math.inf
    return float((nonzero[0] / nonzero[-1]) ** 2)


def complete_to_definite(form: QuadraticNorm, system: IndependentSystem, c: float = 1.0):
    """Add c times the projector onto span(system)^perp; values on the system are unchanged."""
    if c <= 0:
        raise ValueError("c must be positive")
    comp = complement_basis(system.vectors, rtol=system.rtol)
    if comp.shape[1] == 0:
        return form
    matrix = form.matrix + c * (comp @ comp.T)
    factor = None
    if form.factor is not None:
        factor = np.vstack([form.factor, math.sqrt(c) * comp.T])
    return QuadraticNorm(matrix, factor)
