"""Graph-chart coordinates for oriented p-planes in R^n.

A plane transverse to the leading coordinate block is the span of the
columns of ``[I_p; Q]``: the j-th basis vector has a 1 in slot j and the
slope column ``Q[:, j]`` in the remaining n-p slots.  All operations work
in this single chart, where the restriction of the reference p-form
(the determinant of the first p coordinates) is positive.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import SingularChart

_SINGULAR_FACTOR = 1e-12


@dataclass(frozen=True)
class GrassmannElement:
    """An oriented p-plane through ``base_point`` in slope coordinates.

    ``slopes`` has one row per fiber direction (n-p rows) and one column
    per base direction (p columns).
    """

    n: int
    p: int
    slopes: np.ndarray
    base_point: np.ndarray | None = None

    def __post_init__(self):
        if not 1 <= self.p <= self.n - 1:
            raise ValueError(f"need 1 <= p <= n-1, got p={self.p}, n={self.n}")
        slopes = np.asarray(self.slopes, dtype=float)
        if slopes.shape != (self.n - self.p, self.p):
            raise ValueError(
                f"slopes must be ({self.n - self.p}, {self.p}), got {slopes.shape}"
            )
        if not np.all(np.isfinite(slopes)):
            raise ValueError("slopes must be finite")
        base = self.base_point
        base = np.zeros(self.n) if base is None else np.asarray(base, dtype=float)
        if base.shape != (self.n,) or not np.all(np.isfinite(base)):
            raise ValueError(f"base_point must be a finite vector of length {self.n}")
        object.__setattr__(self, "slopes", slopes)
        object.__setattr__(self, "base_point", base)

    @property
    def codim(self):
        return self.n - self.p


@dataclass(frozen=True)
class ChartProjection:
    """Result of projecting a basis into the graph chart."""

    slopes: np.ndarray
    orientation_reversed: bool


def graph_tangent_basis(elem: GrassmannElement) -> np.ndarray:
    """Return the p chart basis vectors as rows of a (p, n) array."""
    basis = np.zeros((elem.p, elem.n))
    basis[:, : elem.p] = np.eye(elem.p)
    basis[:, elem.p :] = elem.slopes.T
    return basis


def beta_restriction(vectors) -> float:
    """Determinant of the leading p x p coordinate block.

    Positive exactly when the oriented span of the rows lies in the
    chart; zero when the plane projects degenerately onto the base.
    """
    v = _as_basis(vectors)
    return float(np.linalg.det(v[:, : v.shape[0]]))


def slopes_from_basis(vectors) -> ChartProjection:
    """Invert the chart: recover slopes from p spanning vectors.

    Raises :class:`SingularChart` when the leading minor is singular.
    A negative leading minor is reported as an orientation reversal; the
    slopes still describe the unoriented plane.
    """
    v = _as_basis(vectors)
    p = v.shape[0]
    lead = v[:, :p]
    d = np.linalg.det(lead)
    row_scale = max(float(np.max(np.linalg.norm(lead, axis=1))), 0.0)
    if abs(d) < _SINGULAR_FACTOR * row_scale**p or row_scale == 0.0:
        raise SingularChart(
            f"leading {p}x{p} minor is singular (det={d:.3e}); "
            "plane not representable in this chart"
        )
    slopes = np.linalg.solve(lead, v[:, p:]).T
    return ChartProjection(slopes=slopes, orientation_reversed=bool(d < 0))


def element_to_record(elem: GrassmannElement) -> dict:
    """Plain-data record {n, p, base_point, slopes} with row-major slopes."""
    return {
        "n": elem.n,
        "p": elem.p,
        "base_point": [float(c) for c in elem.base_point],
        "slopes": [[float(c) for c in row] for row in elem.slopes],
    }


def element_from_record(record) -> GrassmannElement:
    if isinstance(record, str):
        record = json.loads(record)
    return GrassmannElement(
        n=int(record["n"]),
        p=int(record["p"]),
        slopes=np.asarray(record["slopes"], dtype=float),
        base_point=np.asarray(record.get("base_point", np.zeros(int(record["n"])))),
    )


def _as_basis(vectors) -> np.ndarray:
    v = np.asarray(vectors, dtype=float)
    if v.ndim != 2:
        raise ValueError("expected a sequence of equal-length vectors")
    p, n = v.shape
    if not 1 <= p <= n - 1:
        raise ValueError(f"need 1 <= p <= n-1 vectors, got {p} vectors in R^{n}")
    return v
