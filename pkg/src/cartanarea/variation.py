"""Brute-force first variation of the action under boundary deformations.

The oracle realizes the defining test for normality: displace each
boundary point of a critical graph along a vector field (one Euler step
m + t*psi(m)*N(m)), re-fit the base domain, re-solve the extremal
problem, and difference the actions in t.  A deformation field is
normal exactly when dA/dt at t = 0 vanishes for every intensity psi.

Two re-fit strategies cover the deformed base domain.  When every edge
is displaced rigidly in its normal direction (up to roundoff) the
domain stays a box and the re-solve is exact.  Otherwise the deformed
region bounded by the displaced edge curves is mapped back to the
original box by a transfinite (Coons) patch and the integrand is pulled
back through that map, so the re-solve runs on the exact deformed
domain with no boundary re-projection error.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ChartExit, NoConvergence, NonFinite, NotCritical, SingularJacobian
from .extremal import (
    GridGraph,
    action,
    deriv4,
    el_residual,
    grid_axes,
    node_slopes,
    solve_dirichlet,
)
from .frames import cartan_frame
from .grassmann import GrassmannElement
from .lagrangian import LagrangianField, grad_q

TOL_ABS = 1e-8
TOL_REL = 1e-6
# Balances the central-stencil truncation (~coef * step^2) against the
# solver-noise amplification (~1e-13 / step); 1e-3 left a visible bias.
DEFAULT_STEP_FACTOR = 2.5e-4
MAX_HALVINGS = 4


@dataclass
class DeformationSpec:
    """A boundary deformation: direction field, intensity, and t-step.

    ``direction`` maps a boundary point of the graph (a vector in R^n)
    to a vector in R^n; ``intensity`` is a scalar function of the same
    point (or a constant).  ``step`` is the finite-difference stencil
    half-width in t; None picks DEFAULT_STEP_FACTOR times the domain
    diameter.
    """

    direction: Callable
    intensity: Callable | float = 1.0
    step: float | None = None
    name: str = ""

    def psi(self, point) -> float:
        if callable(self.intensity):
            return float(self.intensity(point))
        return float(self.intensity)

    def displacement(self, point) -> np.ndarray:
        return self.psi(point) * np.asarray(self.direction(point), dtype=float)


@dataclass
class VariationReport:
    """dA/dt estimates at t = 0 with convergence diagnostics."""

    A0: float
    dA_dt: float
    dA_dt_order4: float
    boundary_formula_value: float
    classification: str
    diagnostics: dict = field(default_factory=dict)


def first_variation_fd(L, boundary_data, domain, resolution, spec: DeformationSpec) -> VariationReport:
    """Finite-difference dA/dt at t=0 by re-solving at t in {+-h, +-2h}.

    Classification: ``normal`` when both stencils see |dA/dt| below
    tol_abs + tol_rel*|A0|; ``non-normal`` when the value is resolved
    (stencils agree) and above tolerance; ``inconclusive`` otherwise,
    including re-solve failures and chart exits after 4 step halvings.
    The re-solves at the four stencil offsets are independent of each
    other; they run sequentially so the report is deterministic.
    """
    base = solve_dirichlet(L, boundary_data, domain, resolution)
    return _variation_from_base(L, base, boundary_data, spec)


def first_variation_boundary(L, graph: GridGraph, spec: DeformationSpec) -> float:
    """The boundary line integral giving dA/dt on a critical graph.

    At each boundary node, with X = psi*N and the vertical velocity
    df/dt reconstructed from X and the boundary slopes, the integrand is
    the momentum flux sum_i (dL/dq^i_j) df^i/dt + L X^j paired with the
    outward base normal.  Fourth-order slope stencils and Simpson
    integration keep the formula's bias below the re-solve oracle's.
    Raises :class:`NotCritical` off shell, where the formula is invalid.
    """
    A = action(L, graph).value
    res = float(np.max(np.abs(el_residual(L, graph))))
    if res > 1e-10 * (1.0 + abs(A)):
        raise NotCritical(
            f"graph residual {res:.3e} exceeds 1e-10*(1+|A|); formula is off-shell"
        )
    axes = graph.axes
    if graph.p == 1:
        slopes = _boundary_slopes4(graph)
        total = 0.0
        for side, nu in ((0, -1.0), (1, 1.0)):
            idx = 0 if side == 0 else -1
            x = np.array([axes[0][idx]])
            fval = graph.values[idx]
            point = np.concatenate([x, fval])
            G = _flux_vector(L, x, fval, slopes[side], spec.displacement(point))
            total += nu * G[0]
        return float(total)
    total = 0.0
    for edge in _edges(graph.resolution):
        nu_sign = -1.0 if edge.side == 0 else 1.0
        run_axis = edge.run_axis
        r_ticks = axes[run_axis]
        h = graph.steps[run_axis]
        vals = graph.values[edge.ring_indexer(graph.resolution)]
        qvals = _edge_slopes4(graph, edge)
        integrand = np.empty(len(r_ticks))
        for k, r in enumerate(r_ticks):
            x = np.empty(2)
            x[edge.normal_axis] = axes[edge.normal_axis][0 if edge.side == 0 else -1]
            x[run_axis] = r
            point = np.concatenate([x, vals[k]])
            G = _flux_vector(L, x, vals[k], qvals[k], spec.displacement(point))
            integrand[k] = nu_sign * G[edge.normal_axis]
        total += _simpson(integrand, h)
    return total


@dataclass
class ScanRow:
    name: str
    report: VariationReport | None
    note: str = ""


def normality_scan(L, graph: GridGraph, candidate_fields, boundary_data=None) -> list:
    """Run both estimators for each named candidate field.

    ``candidate_fields`` is a sequence of (name, DeformationSpec).  Rows
    whose re-solves fail are classified inconclusive with the error
    noted.  ``boundary_data`` may supply the graph's Dirichlet data as a
    callable for off-node accuracy; the ring values are used otherwise.
    """
    rows = []
    for name, spec in candidate_fields:
        try:
            report = _variation_from_base(L, graph, boundary_data, spec)
            rows.append(ScanRow(name=name, report=report))
        except (NoConvergence, ChartExit, NonFinite, SingularJacobian) as exc:
            rows.append(
                ScanRow(
                    name=name,
                    report=None,
                    note=f"inconclusive: {type(exc).__name__}: {exc}",
                )
            )
    return rows


# ---------------------------------------------------------------------------
# Deformation fields and intensities


def graph_slopes_fn(graph: GridGraph) -> Callable:
    """Boundary slope lookup from a solved graph (one-sided stencils)."""
    interp = _BoundarySlopes(graph)
    return interp


def frame_field(L, slopes_fn: Callable, weights=None) -> Callable:
    """Deformation field valued in the variational frame at each point.

    ``weights`` mixes the n-p frame vectors (default: the first one).
    """
    m = L.codim
    w = np.zeros(m)
    w[0] = 1.0
    if weights is not None:
        w = np.asarray(weights, dtype=float)

    def field_fn(point):
        point = np.asarray(point, dtype=float)
        q = np.asarray(slopes_fn(point), dtype=float)
        elem = GrassmannElement(n=L.n, p=L.p, slopes=q, base_point=point)
        fr = cartan_frame(L, elem)
        return w @ fr.vectors

    return field_fn


def tangent_field(n, p, slopes_fn: Callable, j: int = 0) -> Callable:
    """The j-th graph tangent direction e_j + sum_i q^i_j e_{p+i}."""

    def field_fn(point):
        q = np.asarray(slopes_fn(np.asarray(point, dtype=float)), dtype=float)
        v = np.zeros(n)
        v[j] = 1.0
        v[p:] = q[:, j]
        return v

    return field_fn


def euclidean_normal_field(n, p, slopes_fn: Callable, k: int = 0) -> Callable:
    """The k-th Euclidean complement direction (q^k_1..q^k_p, ..., -1, ..)."""

    def field_fn(point):
        q = np.asarray(slopes_fn(np.asarray(point, dtype=float)), dtype=float)
        v = np.zeros(n)
        v[:p] = q[k]
        v[p + k] = -1.0
        return v / np.linalg.norm(v)

    return field_fn


def random_intensity(rng, n: int, terms: int = 3) -> Callable:
    """A smooth random trigonometric intensity on R^n."""
    amps = rng.uniform(0.3, 1.0, terms)
    waves = rng.uniform(-2.0, 2.0, (terms, n))
    phases = rng.uniform(0.0, 2.0 * math.pi, terms)
    offset = rng.uniform(-0.5, 0.5)

    def psi(point):
        point = np.asarray(point, dtype=float)
        return float(offset + np.sum(amps * np.cos(waves @ point + phases)))

    return psi


def edge_indicator(domain, side: str, rel_tol: float = 1e-9) -> Callable:
    """Intensity 1 on one box edge, 0 elsewhere.

    ``side`` is one of xmin, xmax, ymin, ymax (ymin/ymax need p=2).
    """
    axis = {"x": 0, "y": 1}[side[0]]
    which = side[1:]
    lo, hi = domain[axis]
    level = lo if which == "min" else hi
    tol = rel_tol * max(1.0, abs(hi - lo))

    def psi(point):
        return 1.0 if abs(float(point[axis]) - level) <= tol else 0.0

    return psi


# ---------------------------------------------------------------------------
# Internals


def _variation_from_base(L, base: GridGraph, boundary_data, spec: DeformationSpec) -> VariationReport:
    """Difference deformed actions in t, with two-grid error control.

    The O(h^2) bias of the discrete minima does not cancel in the
    t-differences, so every deformed action is also computed on a
    mesh-doubled (coarser) grid and Richardson-extrapolated before
    differencing; the diagnostics keep both levels.
    """
    A0 = action(L, base).value
    domain, resolution = base.domain, base.resolution
    g0 = _BoundaryValues(base, boundary_data)
    slopes = _BoundarySlopes(base)
    coarse_res = tuple((r + 1) // 2 for r in resolution)
    use_pair = all(r >= 5 and (rf - 1) == 2 * (r - 1) for r, rf in zip(coarse_res, resolution))
    diam = math.sqrt(sum((hi - lo) ** 2 for lo, hi in domain))
    h = spec.step if spec.step is not None else DEFAULT_STEP_FACTOR * diam
    halvings = 0
    actions = None
    solves = 0
    while actions is None:
        try:
            actions = {}
            for t in (-2.0 * h, -h, h, 2.0 * h):
                fine = _deformed_action(L, g0, slopes, domain, resolution, spec, t)
                solves += 1
                if use_pair:
                    coarse = _deformed_action(L, g0, slopes, domain, coarse_res, spec, t)
                    solves += 1
                    actions[t] = ((4.0 * fine - coarse) / 3.0, fine, coarse)
                else:
                    actions[t] = (fine, fine, float("nan"))
        except ChartExit:
            actions = None
            halvings += 1
            if halvings > MAX_HALVINGS:
                return VariationReport(
                    A0=A0,
                    dA_dt=float("nan"),
                    dA_dt_order4=float("nan"),
                    boundary_formula_value=first_variation_boundary(L, base, spec),
                    classification="inconclusive",
                    diagnostics={"step": h, "halvings": halvings, "reason": "chart-exit"},
                )
            h *= 0.5
    ext = {t: a[0] for t, a in actions.items()}
    central = (ext[h] - ext[-h]) / (2.0 * h)
    order4 = (ext[-2.0 * h] - 8.0 * ext[-h] + 8.0 * ext[h] - ext[2.0 * h]) / (12.0 * h)
    bval = first_variation_boundary(L, base, spec)
    if use_pair:
        # The formula's bias (one-sided slopes of the discrete solve, with
        # corner pollution) needs two extrapolation levels to come out
        # below the oracle's noise.
        coarse_base = solve_dirichlet(L, g0, domain, coarse_res)
        b_coarse = first_variation_boundary(L, coarse_base, spec)
        level1 = (4.0 * bval - b_coarse) / 3.0
        solves += 1
        coarse2 = tuple((r + 1) // 2 for r in coarse_res)
        if all(r >= 5 and (rf - 1) == 2 * (r - 1) for r, rf in zip(coarse2, coarse_res)):
            base2 = solve_dirichlet(L, g0, domain, coarse2)
            b2 = first_variation_boundary(L, base2, spec)
            level1_coarse = (4.0 * b_coarse - b2) / 3.0
            bval = (8.0 * level1 - level1_coarse) / 7.0
            solves += 1
        else:
            bval = level1
    tol = TOL_ABS + TOL_REL * abs(A0)
    noise = abs(central - order4)
    if abs(central) <= tol and abs(order4) <= 10.0 * tol:
        classification = "normal"
    elif abs(central) > tol and noise <= max(0.3 * abs(central), tol):
        classification = "non-normal"
    else:
        classification = "inconclusive"
    return VariationReport(
        A0=A0,
        dA_dt=float(central),
        dA_dt_order4=float(order4),
        boundary_formula_value=float(bval),
        classification=classification,
        diagnostics={
            "step": h,
            "halvings": halvings,
            "grid_pair": (resolution, coarse_res if use_pair else None),
            "actions": {float(t): tuple(map(float, a)) for t, a in sorted(actions.items())},
            "solves": solves,
        },
    )


def _flux_vector(L, x, z, q, X):
    """Momentum flux G_j = sum_i (dL/dq^i_j) df^i/dt + L X^j at one point."""
    momenta = grad_q(L, x, z, q)
    value = L(x, z, q)
    df_dt = X[L.p :] - np.asarray(q) @ X[: L.p]
    return momenta.T @ df_dt + value * X[: L.p]


def _boundary_slopes4(graph: GridGraph):
    """(p=1) endpoint slopes by one-sided fourth-order stencils."""
    d = deriv4(graph.values, graph.steps[0])
    return (d[0][:, None], d[-1][:, None])


def _edge_slopes4(graph: GridGraph, edge) -> np.ndarray:
    """Fourth-order slope field along one edge, shape (n_run, m, p)."""
    ring_idx = edge.ring_indexer(graph.resolution)
    out = np.empty((graph.resolution[edge.run_axis], graph.codim, graph.p))
    ring = graph.values[ring_idx]
    out[:, :, edge.run_axis] = deriv4(ring, graph.steps[edge.run_axis])
    idx = 0 if edge.side == 0 else graph.resolution[edge.normal_axis] - 1
    transverse = deriv4(graph.values, graph.steps[edge.normal_axis], axis=edge.normal_axis)
    out[:, :, edge.normal_axis] = np.take(transverse, idx, axis=edge.normal_axis)
    return out


def _simpson(vals, h):
    """Composite Simpson rule; falls back to trapezoid on odd intervals."""
    n = len(vals) - 1
    if n % 2 == 0:
        w = np.ones(n + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return float(h / 3.0 * (w @ vals))
    w = np.full(n + 1, h)
    w[0] = w[-1] = 0.5 * h
    return float(w @ vals)


@dataclass(frozen=True)
class _Edge:
    name: str
    normal_axis: int
    side: int
    run_axis: int

    def ring_indexer(self, resolution):
        idx = [slice(None), slice(None)]
        idx[self.normal_axis] = 0 if self.side == 0 else resolution[self.normal_axis] - 1
        return tuple(idx)


def _edges(resolution):
    return (
        _Edge("xmin", 0, 0, 1),
        _Edge("xmax", 0, 1, 1),
        _Edge("ymin", 1, 0, 0),
        _Edge("ymax", 1, 1, 0),
    )


class _BoundaryValues:
    """Continuous Dirichlet data on the original box boundary.

    Prefers the user's callable; falls back to linear interpolation of
    the graph's ring values.
    """

    def __init__(self, graph: GridGraph, boundary_data=None):
        self.graph = graph
        self.callable = boundary_data if callable(boundary_data) else None
        self.axes = graph.axes

    def __call__(self, x) -> np.ndarray:
        g = self.graph
        if self.callable is not None:
            return np.broadcast_to(
                np.asarray(self.callable(np.asarray(x, dtype=float)), dtype=float),
                (g.codim,),
            ).copy()
        if g.p == 1:
            lo, hi = g.domain[0]
            side = 0 if abs(x[0] - lo) <= abs(x[0] - hi) else -1
            return g.values[side].copy()
        edge = _nearest_edge(g, x)
        ring = g.values[edge.ring_indexer(g.resolution)]
        r = float(x[edge.run_axis])
        ticks = self.axes[edge.run_axis]
        return np.array(
            [np.interp(r, ticks, ring[:, i]) for i in range(g.codim)]
        )


class _BoundarySlopes:
    """Boundary slope field of a graph, linearly interpolated per edge."""

    def __init__(self, graph: GridGraph):
        self.graph = graph
        self.slopes = node_slopes(graph)
        self.axes = graph.axes

    def __call__(self, point) -> np.ndarray:
        g = self.graph
        x = np.asarray(point, dtype=float)[: g.p]
        if g.p == 1:
            lo, hi = g.domain[0]
            side = 0 if abs(x[0] - lo) <= abs(x[0] - hi) else -1
            return self.slopes[side]
        edge = _nearest_edge(g, x)
        ring = self.slopes[edge.ring_indexer(g.resolution)]
        r = float(x[edge.run_axis])
        ticks = self.axes[edge.run_axis]
        out = np.empty((g.codim, g.p))
        for i in range(g.codim):
            for j in range(g.p):
                out[i, j] = np.interp(r, ticks, ring[:, i, j])
        return out


def _nearest_edge(graph: GridGraph, x):
    best, best_d = None, np.inf
    for edge in _edges(graph.resolution):
        lo, hi = graph.domain[edge.normal_axis]
        level = lo if edge.side == 0 else hi
        d = abs(float(x[edge.normal_axis]) - level)
        if d < best_d:
            best, best_d = edge, d
    return best


def _deformed_action(L, g0: _BoundaryValues, slopes: _BoundarySlopes, domain, resolution, spec, t) -> float:
    if L.p == 1:
        (lo, hi) = domain[0]
        ends = []
        for xval in (lo, hi):
            x = np.array([xval])
            z = g0(x)
            point = np.concatenate([x, z])
            disp = spec.displacement(point)
            ends.append((xval + t * disp[0], z + t * disp[1:]))
        (b_lo, z_lo), (b_hi, z_hi) = ends
        if not b_lo < b_hi:
            raise ChartExit(f"deformed interval degenerate: [{b_lo}, {b_hi}]")
        bvals = np.zeros((resolution[0], L.codim))
        bvals[0], bvals[-1] = z_lo, z_hi
        sol = solve_dirichlet(L, bvals, ((b_lo, b_hi),), resolution)
        return action(L, sol).value

    # Displace each edge at its node parameters.
    axes = grid_axes(domain, resolution)
    edges = _edges(resolution)
    displaced = {}
    boxlike = True
    scale = max(abs(hi - lo) for lo, hi in domain)
    for edge in edges:
        ticks = axes[edge.run_axis]
        level0 = domain[edge.normal_axis][edge.side]
        pts = np.empty((len(ticks), 2))
        pts[:, edge.run_axis] = ticks
        pts[:, edge.normal_axis] = level0
        zs = np.array([g0(pt) for pt in pts])
        disp = np.array(
            [spec.displacement(np.concatenate([pt, z])) for pt, z in zip(pts, zs)]
        )
        base_new = pts + t * disp[:, :2]
        z_new = zs + t * disp[:, 2:]
        if np.any(np.diff(base_new[:, edge.run_axis]) <= 0.0):
            raise ChartExit(f"deformed {edge.name} edge is not a graph over its axis")
        transverse = base_new[:, edge.normal_axis]
        if np.max(np.abs(transverse - transverse.mean())) > 1e-11 * scale:
            boxlike = False
        displaced[edge.name] = (base_new, z_new, float(transverse.mean()))
    if boxlike:
        return _box_action(L, g0, slopes, domain, resolution, spec, t, displaced)
    return _pullback_action(L, g0, domain, resolution, spec, t, displaced)


def _box_action(L, g0, slopes, domain, resolution, spec, t, displaced):
    """Re-solve on a translated/stretched box (edges moved rigidly).

    The displaced data is carried to the new edge nodes by inverting the
    along-edge motion and transporting across the (at most O(t^2)) base
    gap with the t=0 slopes.
    """
    levels = {name: lvl for name, (_, _, lvl) in displaced.items()}
    new_domain = (
        (levels["xmin"], levels["xmax"]),
        (levels["ymin"], levels["ymax"]),
    )
    if not (new_domain[0][0] < new_domain[0][1] and new_domain[1][0] < new_domain[1][1]):
        raise ChartExit(f"deformed box degenerate: {new_domain}")
    new_axes = grid_axes(new_domain, resolution)
    bvals = np.zeros((*resolution, L.codim))
    counts = np.zeros(resolution)
    for edge in _edges(resolution):
        lo0, hi0 = domain[edge.run_axis]
        level0 = domain[edge.normal_axis][edge.side]
        new_level = levels[edge.name]
        targets = new_axes[edge.run_axis]

        def run_displacement(rv):
            x = np.empty(2)
            x[edge.run_axis] = rv
            x[edge.normal_axis] = level0
            z = g0(x)
            return spec.displacement(np.concatenate([x, z]))

        # Invert r + t*D_run(r) = target by clamped fixed-point iteration.
        r = np.clip(targets, lo0, hi0)
        for _ in range(4):
            d_run = np.array([run_displacement(rv)[edge.run_axis] for rv in r])
            r = np.clip(targets - t * d_run, lo0, hi0)
        ring = np.empty((len(targets), L.codim))
        for k, rv in enumerate(r):
            x = np.empty(2)
            x[edge.run_axis] = rv
            x[edge.normal_axis] = level0
            z = g0(x)
            point = np.concatenate([x, z])
            d = spec.displacement(point)
            b_fin = x + t * d[:2]
            z_fin = z + t * d[2:]
            x_hat = np.empty(2)
            x_hat[edge.run_axis] = targets[k]
            x_hat[edge.normal_axis] = new_level
            q0 = slopes(point)
            ring[k] = z_fin + q0 @ (x_hat - b_fin)
        idx = edge.ring_indexer(resolution)
        bvals[idx] += ring
        counts[idx] += 1.0
    mask = counts > 0
    bvals[mask] /= counts[mask][:, None]
    sol = solve_dirichlet(L, bvals, new_domain, resolution)
    return action(L, sol).value


def _pullback_action(L, g0, domain, resolution, spec, t, displaced):
    """Re-solve on the exact deformed region via a transfinite patch.

    The displaced edge curves bound the deformed base region; a Coons
    patch maps the original box onto it and the integrand is pulled back
    through the map, so the unknowns live on the original grid while the
    functional is the true deformed-domain action.
    """
    (a1, b1), (a2, b2) = domain
    len1, len2 = b1 - a1, b2 - a2

    def edge_point(name, rvals):
        edge = next(e for e in _edges(resolution) if e.name == name)
        level0 = domain[edge.normal_axis][edge.side]
        out = np.empty((len(rvals), 2))
        for k, rv in enumerate(rvals):
            x = np.empty(2)
            x[edge.run_axis] = rv
            x[edge.normal_axis] = level0
            z = g0(x)
            d = spec.displacement(np.concatenate([x, z]))
            out[k] = x + t * d[:2]
        return out

    def edge_deriv(name, rvals, span):
        h = 1e-6 * span
        return (edge_point(name, rvals + h) - edge_point(name, rvals - h)) / (2.0 * h)

    centers1 = 0.5 * (np.linspace(a1, b1, resolution[0])[:-1] + np.linspace(a1, b1, resolution[0])[1:])
    centers2 = 0.5 * (np.linspace(a2, b2, resolution[1])[:-1] + np.linspace(a2, b2, resolution[1])[1:])
    eb, et = edge_point("ymin", centers1), edge_point("ymax", centers1)
    el, er = edge_point("xmin", centers2), edge_point("xmax", centers2)
    dbu, dtu = edge_deriv("ymin", centers1, len1), edge_deriv("ymax", centers1, len1)
    dlv, drv = edge_deriv("xmin", centers2, len2), edge_deriv("xmax", centers2, len2)
    corners = {}
    for cx, cy, key in ((a1, a2, "00"), (b1, a2, "10"), (a1, b2, "01"), (b1, b2, "11")):
        x = np.array([cx, cy])
        z = g0(x)
        d = spec.displacement(np.concatenate([x, z]))
        corners[key] = x + t * d[:2]
    u = ((centers1 - a1) / len1)[:, None]
    v = ((centers2 - a2) / len2)[None, :]
    phi = np.empty((2, len(centers1), len(centers2)))
    dphi_d1 = np.empty_like(phi)
    dphi_d2 = np.empty_like(phi)
    for c in range(2):
        blend = (
            (1 - u) * (1 - v) * corners["00"][c]
            + u * (1 - v) * corners["10"][c]
            + (1 - u) * v * corners["01"][c]
            + u * v * corners["11"][c]
        )
        phi[c] = (
            (1 - v) * eb[:, c][:, None]
            + v * et[:, c][:, None]
            + (1 - u) * el[:, c][None, :]
            + u * er[:, c][None, :]
            - blend
        )
        dblend_d1 = (
            (-(1 - v) * corners["00"][c] + (1 - v) * corners["10"][c] - v * corners["01"][c] + v * corners["11"][c])
            / len1
        )
        dphi_d1[c] = (
            (1 - v) * dbu[:, c][:, None]
            + v * dtu[:, c][:, None]
            + (-el[:, c][None, :] + er[:, c][None, :]) / len1
            - dblend_d1
        )
        dblend_d2 = (
            (-(1 - u) * corners["00"][c] - u * corners["10"][c] + (1 - u) * corners["01"][c] + u * corners["11"][c])
            / len2
        )
        dphi_d2[c] = (
            (-eb[:, c][:, None] + et[:, c][:, None]) / len2
            + (1 - u) * dlv[:, c][None, :]
            + u * drv[:, c][None, :]
            - dblend_d2
        )
    jac_det = dphi_d1[0] * dphi_d2[1] - dphi_d1[1] * dphi_d2[0]
    if np.any(jac_det <= 0.0):
        raise ChartExit("deformed region folds over the base chart")
    # Inverse transpose columns give physical slopes from reference ones.
    inv = np.empty((2, 2, *jac_det.shape))
    inv[0, 0] = dphi_d2[1] / jac_det
    inv[0, 1] = -dphi_d2[0] / jac_det
    inv[1, 0] = -dphi_d1[1] / jac_det
    inv[1, 1] = dphi_d1[0] / jac_det
    cell_shape = jac_det.shape
    xphys = [phi[0], phi[1]]

    def wrapped(x, z, q):
        if np.shape(x[0]) != cell_shape:
            raise ValueError("pullback Lagrangian is defined on midpoint cells only")
        qphys = [
            [q[i][0] * inv[0, j] + q[i][1] * inv[1, j] for j in range(2)]
            for i in range(L.codim)
        ]
        return L.func(xphys, z, qphys) * jac_det

    pulled = LagrangianField(
        n=L.n, p=2, func=wrapped, name=f"pullback({L.name})", supports_dual=L.supports_dual
    )
    bvals = np.zeros((*resolution, L.codim))
    for edge in _edges(resolution):
        _, z_new, _ = displaced[edge.name]
        bvals[edge.ring_indexer(resolution)] = z_new
    sol = solve_dirichlet(pulled, bvals, domain, resolution)
    return action(pulled, sol).value
