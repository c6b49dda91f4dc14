"""Gram determinants, metric volumes, and wedge minors."""

from dataclasses import dataclass

import numpy as np

from .errors import BadIndices, DimensionMismatch, NegativeGram, NotPositiveDefinite
from .lagrangian import HomogenizedLagrangian, grad_xi


@dataclass(frozen=True)
class MetricTensor:
    """Symmetric bilinear form g_ij on R^dim."""

    dim: int
    components: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.components, dtype=float)
        if g.shape != (self.dim, self.dim):
            raise DimensionMismatch(
                f"metric components must be {self.dim}x{self.dim}, got {g.shape}"
            )
        scale = max(float(np.max(np.abs(g))), 1e-300)
        if float(np.max(np.abs(g - g.T))) > 1e-12 * scale:
            raise NotPositiveDefinite("metric components are not symmetric")
        object.__setattr__(self, "components", g)

    @classmethod
    def euclidean(cls, dim: int) -> "MetricTensor":
        return cls(dim=dim, components=np.eye(dim))

    def inner(self, u, v) -> float:
        return float(np.asarray(u) @ self.components @ np.asarray(v))


def gram_det(vectors, metric: MetricTensor | None = None) -> float:
    """Determinant of the k x k matrix of pairwise metric inner products."""
    v = _as_vectors(vectors)
    k, n = v.shape
    metric = metric or MetricTensor.euclidean(n)
    if metric.dim != n:
        raise DimensionMismatch(f"metric is {metric.dim}-dimensional, vectors in R^{n}")
    gram = v @ metric.components @ v.T
    return float(np.linalg.det(gram))


def volume(vectors, metric: MetricTensor | None = None) -> float:
    """Parallelepiped volume sqrt(Gram determinant).

    Raises :class:`NegativeGram` when the determinant is negative beyond
    roundoff, which signals a non-positive-definite metric.
    """
    v = _as_vectors(vectors)
    d = gram_det(v, metric)
    scale = max(float(np.max(np.abs(v))), 1.0) ** (2 * v.shape[0])
    if d < -1e-12 * scale:
        raise NegativeGram(f"Gram determinant {d:.3e} is negative")
    return float(np.sqrt(max(d, 0.0)))


def wedge_minor(indices, vectors) -> float:
    """Determinant of the selected components (1-based indices).

    Entry (a, b) of the minor is component ``indices[a]`` of vector b,
    so swapping two vectors flips the sign.
    """
    v = _as_vectors(vectors, allow_square=True)
    k, n = v.shape
    idx = [int(i) for i in indices]
    if len(idx) != k:
        raise BadIndices(f"need exactly {k} indices for {k} vectors, got {len(idx)}")
    if any(i < 1 or i > n for i in idx) or any(a >= b for a, b in zip(idx, idx[1:])):
        raise BadIndices(f"indices must be strictly increasing within 1..{n}: {idx}")
    rows = np.array([[v[b, i - 1] for b in range(k)] for i in idx])
    return float(np.linalg.det(rows))


def surface_element(F: HomogenizedLagrangian, x, frame, xi) -> float:
    """Alternating minor sum giving the area element on a hyperplane.

    Evaluates sum_i (-1)^(i-1) dF/dxi_i times the minor of the n-1 frame
    vectors with component i deleted.  Equal to the determinant of the
    matrix whose first row is the xi-gradient of F and whose remaining
    rows are the frame vectors.
    """
    v = _as_vectors(frame)
    k, n = v.shape
    if n != F.n or k != n - 1:
        raise DimensionMismatch(
            f"need n-1={F.n - 1} frame vectors in R^{F.n}, got {k} in R^{n}"
        )
    g = grad_xi(F, x, xi)
    total = 0.0
    for i in range(n):
        idx = [j + 1 for j in range(n) if j != i]
        total += (-1.0) ** i * g[i] * wedge_minor(idx, v)
    return float(total)


def _as_vectors(vectors, allow_square=False) -> np.ndarray:
    v = np.asarray(vectors, dtype=float)
    if v.ndim == 1:
        v = v.reshape(1, -1)
    if v.ndim != 2:
        raise DimensionMismatch("expected a sequence of equal-length vectors")
    k, n = v.shape
    if k > n or (k == 0):
        raise DimensionMismatch(f"need 1 <= k <= n vectors, got {k} in R^{n}")
    return v
