"""Variationally orthogonal frames for an area-type Lagrangian.

For a p-plane in slope coordinates q the frame consists of the n-p
vectors whose first p entries are the momenta dL/dq^k_j, whose (p+k)-th
entry is the energy-like diagonal -L + sum_j q^k_j dL/dq^k_j, and whose
remaining fiber entries are zero.  For p = n-1 the single vector is the
slope-gradient of the homogenized integrand up to scale.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFrameWarning, DomainError, NotPositiveDefinite
from .grassmann import GrassmannElement
from .lagrangian import HomogenizedLagrangian, LagrangianField, grad_q, grad_xi


@dataclass(frozen=True)
class NormalFrame:
    """The n-p frame vectors evaluated at one Grassmann element.

    ``vectors`` has one row per frame vector.  ``degenerate`` lists the
    indices whose diagonal entry vanished; those rows may fail to be
    linearly independent from the rest.
    """

    vectors: np.ndarray
    at: GrassmannElement
    lagrangian_name: str
    degenerate: tuple = ()

    def __iter__(self):
        return iter(self.vectors)


def cartan_frame(L: LagrangianField, elem: GrassmannElement, normalize: bool = False) -> NormalFrame:
    """Assemble the frame at ``elem``; vectors are returned unnormalized.

    With ``normalize=True`` each vector is scaled to Euclidean unit
    length instead (the span is unchanged).  A vanishing diagonal entry
    is flagged and warned about, not raised: the caller decides whether
    the degenerate direction is still usable.
    """
    _check_dims(L, elem)
    x, z = _split_base(elem)
    q = elem.slopes
    m, p, n = L.codim, L.p, L.n
    momenta = grad_q(L, x, z, q)
    value = L(x, z, q)
    vectors = np.zeros((m, n))
    degenerate = []
    for k in range(m):
        diag = -value + float(q[k] @ momenta[k])
        vectors[k, :p] = momenta[k]
        vectors[k, p + k] = diag
        if abs(diag) < 1e-12 * abs(value):
            degenerate.append(k)
    if degenerate:
        warnings.warn(
            f"frame diagonal vanished at rows {tuple(degenerate)} (L={value:.3e})",
            DegenerateFrameWarning,
            stacklevel=2,
        )
    if normalize:
        norms = np.linalg.norm(vectors, axis=1)
        safe = np.where(norms > 0.0, norms, 1.0)
        vectors = vectors / safe[:, None]
    return NormalFrame(
        vectors=vectors,
        at=elem,
        lagrangian_name=L.name,
        degenerate=tuple(degenerate),
    )


def boundary_residual_of_field(L: LagrangianField, elem: GrassmannElement, X) -> np.ndarray:
    """First-variation boundary integrand coefficients for a vector X.

    Reconstructs the vertical velocity df^i/dt = X^{p+i} - sum_j q^i_j X^j
    and returns the p residuals sum_i (dL/dq^i_j) df^i/dt + L X^j.  A
    deformation direction X kills the boundary term of the first
    variation, for every intensity and every boundary normal, exactly
    when this vector vanishes.
    """
    _check_dims(L, elem)
    X = np.asarray(X, dtype=float)
    if X.shape != (L.n,):
        raise ValueError(f"X must be a vector of length {L.n}, got {X.shape}")
    x, z = _split_base(elem)
    q = elem.slopes
    momenta = grad_q(L, x, z, q)
    value = L(x, z, q)
    df_dt = X[L.p :] - q @ X[: L.p]
    return momenta.T @ df_dt + value * X[: L.p]


def boundary_identity_residual(L: LagrangianField, elem: GrassmannElement, lam) -> np.ndarray:
    """Residual of the frame combination X = sum_k lam_k v^k."""
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (L.codim,):
        raise ValueError(f"lam must have length {L.codim}, got {lam.shape}")
    frame = cartan_frame(L, elem)
    X = lam @ frame.vectors
    return boundary_residual_of_field(L, elem, X)


def normal_from_homogenized(F: HomogenizedLagrangian, x, xi) -> np.ndarray:
    """Normal vector to the hyperplane coded by xi: the xi-gradient of F."""
    xi = np.asarray(xi, dtype=float)
    if not np.any(xi):
        raise DomainError("xi must be nonzero")
    if xi[-1] == 0.0:
        raise DomainError("normal undefined at xi_n = 0 (chart boundary)")
    return grad_xi(F, x, xi)


def unit_normal_dual(F: HomogenizedLagrangian, x, xi, metric_det: float) -> np.ndarray:
    """Dual-basis components sqrt(g) * xi / F of the unit normal."""
    if metric_det <= 0.0:
        raise NotPositiveDefinite(f"metric determinant {metric_det} must be positive")
    xi = np.asarray(xi, dtype=float)
    value = F(x, xi)
    if value <= 0.0:
        raise DomainError(f"F = {value} must be positive for a unit normal")
    return np.sqrt(metric_det) * xi / value


def normal_length(F: HomogenizedLagrangian, x, xi, metric) -> float:
    """Length of the (unnormalized) hypersurface normal: sqrt(det g).

    The arguments F, x, xi identify the hypersurface element being
    measured; the length depends only on the metric determinant, which
    is the content of the statement.  Raises
    :class:`NotPositiveDefinite` for a non-SPD metric.
    """
    g = np.asarray(getattr(metric, "components", metric), dtype=float)
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("metric is not positive definite") from exc
    return float(np.sqrt(np.linalg.det(g)))


def _check_dims(L: LagrangianField, elem: GrassmannElement):
    if (L.n, L.p) != (elem.n, elem.p):
        raise ValueError(
            f"Lagrangian is for (n={L.n}, p={L.p}) but element has "
            f"(n={elem.n}, p={elem.p})"
        )


def _split_base(elem: GrassmannElement):
    return elem.base_point[: elem.p], elem.base_point[elem.p :]
