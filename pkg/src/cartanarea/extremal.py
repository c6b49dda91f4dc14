"""Discretized action, Euler-Lagrange residuals, and a Dirichlet solver.

Discretization: node-centered values on a tensor grid over an
axis-aligned box (base dimension 1 or 2), cell-centered gradients, and
the midpoint rule per cell.  The discrete Euler-Lagrange residual is the
exact gradient of this discrete action with respect to the interior
node values, so the solver, the action, and the first-variation oracle
all share one functional.  Jacobians come from nested dual numbers;
there are no hand-coded second derivatives.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import lagrangian as _lag
from .dual import Dual, value as _value
from .errors import NoConvergence, NonFinite, SingularJacobian

_LINESEARCH_DECREASE = 1e-4


@dataclass
class GridGraph:
    """A discretized graph over a box, with Dirichlet ring data.

    ``values`` has shape ``(*resolution, n-p)``; ``boundary_data`` is the
    same shape and must agree with ``values`` exactly on the boundary
    ring.  ``info`` carries solver metadata when produced by
    :func:`solve_dirichlet`.
    """

    p: int
    codim: int
    domain: tuple
    resolution: tuple
    values: np.ndarray
    boundary_data: np.ndarray
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.domain = tuple((float(lo), float(hi)) for lo, hi in self.domain)
        self.resolution = tuple(int(r) for r in self.resolution)
        if self.p not in (1, 2):
            raise ValueError(f"base dimension p must be 1 or 2, got {self.p}")
        if len(self.domain) != self.p or len(self.resolution) != self.p:
            raise ValueError("domain and resolution must have one entry per base axis")
        if any(r < 5 for r in self.resolution):
            raise ValueError(f"need at least 5 nodes per axis, got {self.resolution}")
        if any(hi <= lo for lo, hi in self.domain):
            raise ValueError(f"degenerate domain {self.domain}")
        shape = (*self.resolution, self.codim)
        self.values = np.asarray(self.values, dtype=float)
        self.boundary_data = np.asarray(self.boundary_data, dtype=float)
        if self.values.shape != shape or self.boundary_data.shape != shape:
            raise ValueError(f"values must have shape {shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("graph values must be finite")
        mask = boundary_mask(self.resolution)
        if not np.array_equal(self.values[mask], self.boundary_data[mask]):
            raise ValueError("boundary nodes must equal boundary_data exactly")

    @property
    def n(self):
        return self.p + self.codim

    @property
    def axes(self):
        return grid_axes(self.domain, self.resolution)

    @property
    def steps(self):
        return tuple(
            (hi - lo) / (r - 1) for (lo, hi), r in zip(self.domain, self.resolution)
        )


@dataclass(frozen=True)
class ActionValue:
    value: float
    quadrature_order: int


def grid_axes(domain, resolution):
    return [np.linspace(lo, hi, r) for (lo, hi), r in zip(domain, resolution)]


def boundary_mask(resolution):
    mask = np.zeros(resolution, dtype=bool)
    for axis in range(len(resolution)):
        idx = [slice(None)] * len(resolution)
        idx[axis] = 0
        mask[tuple(idx)] = True
        idx[axis] = -1
        mask[tuple(idx)] = True
    return mask


def make_graph(L, domain, resolution, values, info=None) -> GridGraph:
    """Wrap a full value array as a GridGraph for the Lagrangian's dims."""
    values = np.asarray(values, dtype=float)
    resolution = tuple(int(r) for r in resolution)
    if values.shape == resolution:
        values = values[..., None]
    return GridGraph(
        p=L.p,
        codim=L.codim,
        domain=tuple(domain),
        resolution=resolution,
        values=values,
        boundary_data=values.copy(),
        info=info or {},
    )


def action(L, graph: GridGraph, scheme: str = "midpoint") -> ActionValue:
    """Composite quadrature of L(x, f, grad f) over the box.

    ``midpoint`` evaluates per cell with cell-centered gradients (the
    solver's functional); ``trapezoid`` evaluates per node with
    node-centered differences.
    """
    _check_graph_dims(L, graph)
    if scheme == "midpoint":
        cells = _CellScheme(L, graph.domain, graph.resolution)
        val = cells.action(graph.values)
        order = 1
    elif scheme == "trapezoid":
        val = _trapezoid_action(L, graph)
        order = 2
    else:
        raise ValueError(f"unknown quadrature scheme {scheme!r}")
    if not np.isfinite(val):
        raise NonFinite("action evaluated non-finite")
    return ActionValue(value=float(val), quadrature_order=order)


def el_residual(L, graph: GridGraph) -> np.ndarray:
    """Discrete Euler-Lagrange residual field at interior nodes.

    Returns dL/dz - div(momenta) in divergence form, i.e. the gradient
    of the midpoint action scaled back to a pointwise density; shape is
    ``(*interior resolution, n-p)``.
    """
    _check_graph_dims(L, graph)
    if any(r < 3 for r in graph.resolution):
        raise ValueError("need at least one interior node per axis")
    cells = _CellScheme(L, graph.domain, graph.resolution)
    grad, _ = cells.gradient(graph.values)
    interior = tuple(slice(1, -1) for _ in range(graph.p))
    return grad[interior] / cells.cell_volume


def solve_dirichlet(
    L,
    boundary_data,
    domain,
    resolution,
    init=None,
    max_iterations: int = 200,
    tolerance_factor: float = 1e-10,
) -> GridGraph:
    """Damped Newton solve of the discrete Euler-Lagrange system.

    ``boundary_data`` is a callable x -> f (evaluated on boundary nodes)
    or a full-shape array whose ring is used.  Converged when the
    residual max-norm drops below ``tolerance_factor * (1 + |action|)``.
    Falls back to gradient descent when the Newton system is singular or
    stalls, then retries Newton; raises :class:`NoConvergence` after
    ``max_iterations`` total iterations.
    """
    if not L.supports_dual:
        raise ValueError(
            "solve_dirichlet needs a dual-differentiable Lagrangian "
            "(expression-built or built-in)"
        )
    domain = tuple((float(lo), float(hi)) for lo, hi in domain)
    resolution = _normalize_resolution(resolution, L.p)
    bvals = _boundary_array(L, boundary_data, domain, resolution)
    if init is None:
        values = _default_init(L, bvals, domain, resolution)
    else:
        values = np.array(init, dtype=float)
        mask = boundary_mask(resolution)
        values[mask] = bvals[mask]
    values, info = _newton(L, values, domain, resolution, max_iterations, tolerance_factor)
    return GridGraph(
        p=L.p,
        codim=L.codim,
        domain=domain,
        resolution=resolution,
        values=values,
        boundary_data=bvals,
        info=info,
    )


def deriv4(vals, h, axis=0):
    """Fourth-order derivative of a uniformly sampled array along an axis.

    Five-point central stencils inside, one-sided at the ends; needs at
    least 5 samples along the axis.
    """
    f = np.moveaxis(np.asarray(vals, dtype=float), axis, 0)
    if f.shape[0] < 5:
        raise ValueError("fourth-order stencils need at least 5 samples")
    out = np.empty_like(f)
    out[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    out[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h)
    out[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    out[-2] = -(-3 * f[-1] - 10 * f[-2] + 18 * f[-3] - 6 * f[-4] + f[-5]) / (12 * h)
    out[-1] = -(-25 * f[-1] + 48 * f[-2] - 36 * f[-3] + 16 * f[-4] - 3 * f[-5]) / (12 * h)
    return np.moveaxis(out, 0, axis)


def node_slopes(graph: GridGraph) -> np.ndarray:
    """Node-centered gradient field, shape ``(*resolution, n-p, p)``.

    Fourth-order stencils (one-sided at the boundary), so trapezoid
    quadrature of the slopes keeps a clean second-order expansion.
    """
    out = np.empty((*graph.resolution, graph.codim, graph.p))
    for i in range(graph.codim):
        for j in range(graph.p):
            out[..., i, j] = deriv4(graph.values[..., i], graph.steps[j], axis=j)
    return out


def observed_orders(errors):
    """log2 ratios of successive errors under mesh halving."""
    e = [float(v) for v in errors]
    return [np.log2(a / b) for a, b in zip(e, e[1:])]


# ---------------------------------------------------------------------------
# Midpoint-cell machinery


class _CellScheme:
    """Vectorised evaluation of the midpoint action and its derivatives."""

    def __init__(self, L, domain, resolution):
        self.L = L
        self.p = L.p
        self.m = L.codim
        self.resolution = tuple(resolution)
        axes = grid_axes(domain, resolution)
        self.steps = [(hi - lo) / (r - 1) for (lo, hi), r in zip(domain, resolution)]
        self.cell_volume = float(np.prod(self.steps))
        centers = [0.5 * (ax[:-1] + ax[1:]) for ax in axes]
        if self.p == 1:
            self.x_cells = [centers[0]]
            self.corners = [(0,), (1,)]
            h = self.steps[0]
            # rows: role 0 = value average, role j = slope in axis j
            self.coeffs = np.array([[0.5, 0.5], [-1.0 / h, 1.0 / h]])
            self.cell_shape = (resolution[0] - 1,)
        else:
            xc, yc = np.meshgrid(centers[0], centers[1], indexing="ij")
            self.x_cells = [xc, yc]
            self.corners = [(0, 0), (1, 0), (0, 1), (1, 1)]
            hx, hy = self.steps
            self.coeffs = np.array(
                [
                    [0.25, 0.25, 0.25, 0.25],
                    [-0.5 / hx, 0.5 / hx, -0.5 / hx, 0.5 / hx],
                    [-0.5 / hy, -0.5 / hy, 0.5 / hy, 0.5 / hy],
                ]
            )
            self.cell_shape = (resolution[0] - 1, resolution[1] - 1)
        self.n_vars = self.m * (self.p + 1)

    def _corner_values(self, values):
        out = []
        for c in self.corners:
            if self.p == 1:
                (dx,) = c
                out.append(values[dx : dx + self.cell_shape[0], :])
            else:
                dx, dy = c
                out.append(
                    values[dx : dx + self.cell_shape[0], dy : dy + self.cell_shape[1], :]
                )
        return out

    def _cell_vars(self, values):
        """Linear map from corner values to (value, slopes) per component."""
        corners = self._corner_values(values)
        u = []
        for i in range(self.m):
            for role in range(self.p + 1):
                acc = 0.0
                for a, cv in enumerate(corners):
                    acc = acc + self.coeffs[role, a] * cv[..., i]
                u.append(acc)
        return u

    def _evaluate(self, u, seed=None, seed2=None):
        """Evaluate L over all cells with optional dual seedings.

        Floating-point faults are silenced here; callers translate any
        non-finite results into NonFinite.
        """
        entries = []
        for v, arr in enumerate(u):
            if seed2 is not None:
                inner = Dual(arr, 1.0 if v == seed2 else 0.0)
                entries.append(Dual(inner, 1.0 if v == seed else 0.0))
            elif seed is not None:
                entries.append(Dual(arr, 1.0) if v == seed else arr)
            else:
                entries.append(arr)
        z = [entries[i * (self.p + 1)] for i in range(self.m)]
        q = [
            [entries[i * (self.p + 1) + 1 + j] for j in range(self.p)]
            for i in range(self.m)
        ]
        x = [np.asarray(c) for c in self.x_cells]
        with np.errstate(all="ignore"):
            return self.L.func(x, z, q)

    def action(self, values) -> float:
        vals = _value(self._evaluate(self._cell_vars(values)))
        return float(self.cell_volume * np.sum(vals))

    def gradient(self, values):
        """Exact gradient of the discrete action w.r.t. node values.

        Returns ``(grad, action_value)`` with grad shaped like values.
        """
        u = self._cell_vars(values)
        base = self._evaluate(u)
        A = float(self.cell_volume * np.sum(_value(base)))
        derivs = []
        for v in range(self.n_vars):
            r = self._evaluate(u, seed=v)
            d = r.du if isinstance(r, Dual) else 0.0
            derivs.append(np.broadcast_to(np.asarray(_value(d), dtype=float), self.cell_shape))
        grad = np.zeros((*self.resolution, self.m))
        for i in range(self.m):
            for a, c in enumerate(self.corners):
                contrib = 0.0
                for role in range(self.p + 1):
                    contrib = contrib + self.coeffs[role, a] * derivs[i * (self.p + 1) + role]
                contrib = self.cell_volume * contrib
                if self.p == 1:
                    (dx,) = c
                    grad[dx : dx + self.cell_shape[0], i] += contrib
                else:
                    dx, dy = c
                    grad[
                        dx : dx + self.cell_shape[0], dy : dy + self.cell_shape[1], i
                    ] += contrib
        if not np.all(np.isfinite(grad)):
            raise NonFinite("discrete Euler-Lagrange gradient evaluated non-finite")
        return grad, A

    def hessian(self, values) -> sp.csr_matrix:
        """Sparse Hessian of the discrete action (all nodes)."""
        u = self._cell_vars(values)
        s = self.n_vars
        ncells = int(np.prod(self.cell_shape))
        H = np.zeros((s, s, ncells))
        for k in range(s):
            for l in range(k, s):
                r = self._evaluate(u, seed=k, seed2=l)
                d = 0.0
                if isinstance(r, Dual) and isinstance(r.du, Dual):
                    d = _value(r.du.du)
                arr = np.broadcast_to(np.asarray(d, dtype=float), self.cell_shape)
                H[k, l] = H[l, k] = arr.reshape(-1)
        pp1 = self.p + 1
        T = self.coeffs.T  # (ncorners, roles)
        nodes_flat = np.arange(int(np.prod(self.resolution))).reshape(self.resolution)
        corner_nodes = []
        for c in self.corners:
            if self.p == 1:
                (dx,) = c
                sl = nodes_flat[dx : dx + self.cell_shape[0]]
            else:
                dx, dy = c
                sl = nodes_flat[dx : dx + self.cell_shape[0], dy : dy + self.cell_shape[1]]
            corner_nodes.append(sl.reshape(-1))
        rows, cols, vals = [], [], []
        for i in range(self.m):
            for i2 in range(self.m):
                block = H[i * pp1 : (i + 1) * pp1, i2 * pp1 : (i2 + 1) * pp1]
                local = np.einsum("ar,rsc,bs->abc", T, block, T)
                for a in range(len(self.corners)):
                    for b in range(len(self.corners)):
                        rows.append(corner_nodes[a] * self.m + i)
                        cols.append(corner_nodes[b] * self.m + i2)
                        vals.append(self.cell_volume * local[a, b])
        ndof = int(np.prod(self.resolution)) * self.m
        K = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(ndof, ndof),
        )
        return K.tocsr()


def _trapezoid_action(L, graph: GridGraph) -> float:
    axes = graph.axes
    slopes = node_slopes(graph)
    meshes = np.meshgrid(*axes, indexing="ij") if graph.p == 2 else [axes[0]]
    z = [graph.values[..., i] for i in range(graph.codim)]
    q = [[slopes[..., i, j] for j in range(graph.p)] for i in range(graph.codim)]
    vals = _value(L.func([np.asarray(c) for c in meshes], z, q))
    vals = np.broadcast_to(np.asarray(vals, dtype=float), graph.resolution)
    w = 1.0
    for h, r in zip(graph.steps, graph.resolution):
        wk = np.full(r, h)
        wk[0] = wk[-1] = 0.5 * h
        w = np.multiply.outer(w, wk) if np.ndim(w) else wk
    return float(np.sum(w * vals))


# ---------------------------------------------------------------------------
# Newton solver


def _newton(L, values, domain, resolution, max_iterations, tolerance_factor):
    cells = _CellScheme(L, domain, resolution)
    mask = boundary_mask(resolution)
    interior = np.repeat(~mask.reshape(-1), L.codim)
    values = values.copy()
    history = []
    descent_rounds = 0
    it = 0
    while it < max_iterations:
        it += 1
        grad, A = cells.gradient(values)
        g = grad.reshape(-1)[interior]
        res = float(np.max(np.abs(g))) / cells.cell_volume if g.size else 0.0
        history.append(A)
        if res < tolerance_factor * (1.0 + abs(A)):
            return values, {
                "converged": True,
                "iterations": it,
                "residual": res,
                "action": A,
                "action_history": history,
                "descent_rounds": descent_rounds,
            }
        K = cells.hessian(values)
        K_int = K[interior][:, interior]
        step = None
        try:
            with np.errstate(all="ignore"):
                delta = spla.spsolve(K_int.tocsc(), -g)
            if np.all(np.isfinite(delta)):
                step = delta
        except RuntimeError:
            step = None
        accepted = False
        if step is not None:
            gnorm = float(np.max(np.abs(g)))
            alpha = 1.0
            for _ in range(30):
                trial = values.copy()
                flat = trial.reshape(-1)
                flat[interior] += alpha * step
                try:
                    tg, _ = cells.gradient(trial)
                except NonFinite:
                    alpha *= 0.5
                    continue
                tnorm = float(np.max(np.abs(tg.reshape(-1)[interior])))
                if tnorm <= (1.0 - _LINESEARCH_DECREASE * alpha) * gnorm:
                    values = trial
                    accepted = True
                    break
                alpha *= 0.5
        if not accepted:
            # Singular or stalled Newton system: descend on the action.
            descent_rounds += 1
            if descent_rounds > 5:
                raise SingularJacobian(
                    "Newton system unusable and gradient descent made no progress"
                )
            values, made_progress = _descent(cells, values, interior, steps=50)
            if not made_progress:
                raise SingularJacobian(
                    "gradient-descent fallback could not reduce the action"
                )
    grad, A = cells.gradient(values)
    res = float(np.max(np.abs(grad.reshape(-1)[interior]))) / cells.cell_volume
    raise NoConvergence(
        f"no convergence after {max_iterations} iterations "
        f"(residual {res:.3e}, tolerance {tolerance_factor * (1 + abs(A)):.3e})"
    )


def _descent(cells, values, interior, steps):
    made_progress = False
    for _ in range(steps):
        grad, A = cells.gradient(values)
        g = grad.reshape(-1)[interior]
        gnorm = float(np.max(np.abs(g)))
        if gnorm == 0.0:
            break
        beta = 1.0 / max(1.0, gnorm)
        ok = False
        for _ in range(40):
            trial = values.copy()
            flat = trial.reshape(-1)
            flat[interior] -= beta * g
            try:
                tA = cells.action(trial)
            except (NonFinite, FloatingPointError):
                beta *= 0.5
                continue
            if tA < A - _LINESEARCH_DECREASE * beta * float(g @ g):
                values = trial
                ok = made_progress = True
                break
            beta *= 0.5
        if not ok:
            break
    return values, made_progress


# ---------------------------------------------------------------------------
# Initialization and input handling


def _normalize_resolution(resolution, p):
    if np.isscalar(resolution):
        return (int(resolution),) * p
    resolution = tuple(int(r) for r in resolution)
    if len(resolution) != p:
        raise ValueError(f"resolution must have {p} entries, got {resolution}")
    return resolution


def _boundary_array(L, boundary_data, domain, resolution):
    shape = (*resolution, L.codim)
    if callable(boundary_data):
        axes = grid_axes(domain, resolution)
        bvals = np.zeros(shape)
        mask = boundary_mask(resolution)
        for idx in np.argwhere(mask):
            x = np.array([axes[k][idx[k]] for k in range(L.p)])
            bvals[tuple(idx)] = np.broadcast_to(
                np.asarray(boundary_data(x), dtype=float), (L.codim,)
            )
        return bvals
    bvals = np.asarray(boundary_data, dtype=float)
    if bvals.shape == tuple(resolution):
        bvals = bvals[..., None]
    if bvals.shape != shape:
        raise ValueError(f"boundary data must have shape {shape}, got {bvals.shape}")
    if not np.all(np.isfinite(bvals)):
        raise ValueError("boundary data must be finite")
    return bvals.copy()


def _transfinite(bvals, domain, resolution):
    if len(resolution) == 1:
        r = resolution[0]
        t = np.linspace(0.0, 1.0, r)[:, None]
        return (1.0 - t) * bvals[0] + t * bvals[-1]
    (a1, b1), (a2, b2) = domain
    r1, r2 = resolution
    u = np.linspace(0.0, 1.0, r1)[:, None, None]
    v = np.linspace(0.0, 1.0, r2)[None, :, None]
    out = (
        (1.0 - u) * bvals[0:1, :, :]
        + u * bvals[-1:, :, :]
        + (1.0 - v) * bvals[:, 0:1, :]
        + v * bvals[:, -1:, :]
        - (
            (1.0 - u) * (1.0 - v) * bvals[0, 0]
            + u * (1.0 - v) * bvals[-1, 0]
            + (1.0 - u) * v * bvals[0, -1]
            + u * v * bvals[-1, -1]
        )
    )
    return out


def _default_init(L, bvals, domain, resolution):
    """Harmonic (p=2) or affine (p=1) interpolation of the ring data."""
    init = _transfinite(bvals, domain, resolution)
    mask = boundary_mask(resolution)
    init[mask] = bvals[mask]
    if L.name.startswith("dirichlet"):
        return init
    smoother = _lag.dirichlet(L.n, L.p)
    try:
        init, _ = _newton(smoother, init, domain, resolution, 50, 1e-8)
    except (NoConvergence, SingularJacobian):
        pass
    init[mask] = bvals[mask]
    return init


def _check_graph_dims(L, graph: GridGraph):
    if (L.p, L.codim) != (graph.p, graph.codim):
        raise ValueError(
            f"Lagrangian dims (p={L.p}, n-p={L.codim}) do not match graph "
            f"(p={graph.p}, n-p={graph.codim})"
        )
