import numpy as np
import pytest

from cartanarea import lagrangian as lag
from cartanarea import variation as va
from cartanarea.errors import NotCritical
from cartanarea.extremal import make_graph, solve_dirichlet

DOM = ((0.0, 1.0), (0.0, 1.0))
L3 = lag.area_hypersurface(3)


def flat(x):
    return 0.0


@pytest.fixture(scope="module")
def flat_base():
    return solve_dirichlet(L3, flat, DOM, 33)


def test_zero_intensity_is_exactly_stationary(flat_base):
    field = va.frame_field(L3, va.graph_slopes_fn(flat_base))
    rep = va.first_variation_fd(L3, flat, DOM, 33, va.DeformationSpec(direction=field, intensity=0.0))
    assert rep.dA_dt == 0.0
    assert rep.classification == "normal"


def test_flat_frame_deformation_normal(flat_base):
    field = va.frame_field(L3, va.graph_slopes_fn(flat_base))
    psi = va.random_intensity(np.random.default_rng(4), 3)
    rep = va.first_variation_fd(L3, flat, DOM, 33, va.DeformationSpec(direction=field, intensity=psi))
    assert rep.classification == "normal"
    assert abs(rep.dA_dt) <= 1e-6 * rep.A0
    assert abs(rep.boundary_formula_value) <= 1e-10


def test_flat_edge_slide_grows_area():
    spec = va.DeformationSpec(
        direction=lambda m: np.array([1.0, 0.0, 0.0]),
        intensity=va.edge_indicator(DOM, "xmax"),
    )
    rep = va.first_variation_fd(L3, flat, DOM, 33, spec)
    assert rep.dA_dt == pytest.approx(1.0, abs=1e-3)
    assert rep.boundary_formula_value == pytest.approx(1.0, abs=1e-10)
    assert rep.classification == "non-normal"


def test_linearity_in_intensity():
    direction = lambda m: np.array([1.0, 0.0, 0.0])
    p1 = va.random_intensity(np.random.default_rng(5), 3)
    p2 = va.random_intensity(np.random.default_rng(6), 3)
    reps = [
        va.first_variation_fd(L3, flat, DOM, 17, va.DeformationSpec(direction=direction, intensity=p))
        for p in (p1, p2, lambda m: p1(m) + p2(m))
    ]
    assert reps[2].dA_dt == pytest.approx(reps[0].dA_dt + reps[1].dA_dt, abs=1e-7)


def test_boundary_formula_requires_critical_graph():
    vals = np.full((9, 9), 0.3)
    vals[4, 4] = 1.0  # interior spike: plainly off-shell
    bad = make_graph(L3, DOM, (9, 9), vals)
    spec = va.DeformationSpec(direction=lambda m: np.array([0.0, 0.0, 1.0]))
    with pytest.raises(NotCritical):
        va.first_variation_boundary(L3, bad, spec)


def test_normality_scan_classifications(flat_base):
    slopes_fn = va.graph_slopes_fn(flat_base)
    psi = va.random_intensity(np.random.default_rng(7), 3)
    candidates = [
        ("frame", va.DeformationSpec(direction=va.frame_field(L3, slopes_fn), intensity=psi)),
        ("tangent:1", va.DeformationSpec(direction=va.tangent_field(3, 2, slopes_fn, 0), intensity=psi)),
    ]
    rows = va.normality_scan(L3, flat_base, candidates, boundary_data=flat)
    assert [r.name for r in rows] == ["frame", "tangent:1"]
    assert rows[0].report.classification == "normal"
    assert rows[1].report.classification == "non-normal"


def test_normality_scan_empty():
    base = solve_dirichlet(L3, flat, DOM, 9)
    assert va.normality_scan(L3, base, []) == []


def test_chart_exit_reports_inconclusive(flat_base):
    # squeezes the domain shut at any step size: every halving fails
    spec = va.DeformationSpec(
        direction=lambda m: np.array([1e7 * (0.5 - m[0]), 0.0, 0.0]),
    )
    rows = va.normality_scan(L3, flat_base, [("squeeze", spec)], boundary_data=flat)
    row = rows[0]
    if row.report is None:
        assert "ChartExit" in row.note
    else:
        assert row.report.classification == "inconclusive"
        assert row.report.diagnostics["halvings"] >= 4


def test_frame_nullity_rate():
    # randomized extremal patches + intensities: fields valued in the
    # frame span must classify normal in >= 95% of trials and never
    # non-normal
    rng = np.random.default_rng(20)
    outcomes = []
    for k in range(12):
        a, b, c = rng.uniform(-0.8, 0.8, 3)
        bc = lambda x, a=a, b=b, c=c: a + b * x[0] + c * x[1]  # tilted planes are minimal
        base = solve_dirichlet(L3, bc, DOM, 33)
        field = va.frame_field(L3, va.graph_slopes_fn(base))
        psi = va.random_intensity(rng, 3)
        rep = va.first_variation_fd(L3, bc, DOM, 33, va.DeformationSpec(direction=field, intensity=psi))
        outcomes.append(rep.classification)
    sdom = ((-0.5, 0.5), (-0.5, 0.5))
    scherk = lambda x: np.log(np.cos(x[0]) / np.cos(x[1]))
    sfield = va.frame_field(L3, lambda pt: np.array([[-np.tan(pt[0]), np.tan(pt[1])]]))
    for k in range(3):
        psi = va.random_intensity(rng, 3)
        rep = va.first_variation_fd(L3, scherk, sdom, 33, va.DeformationSpec(direction=sfield, intensity=psi))
        outcomes.append(rep.classification)
    assert "non-normal" not in outcomes
    assert outcomes.count("normal") / len(outcomes) >= 0.95


def test_p1_frame_deformation_normal():
    # quadratic-cost line: moving an endpoint along the frame direction
    # leaves the extremal cost stationary
    L = lag.dirichlet(2, 1)
    bc = lambda x: np.array([2.0 * x[0]])
    base = solve_dirichlet(L, bc, ((0.0, 1.0),), 9)
    field = va.frame_field(L, va.graph_slopes_fn(base))
    rep = va.first_variation_fd(L, bc, ((0.0, 1.0),), 9, va.DeformationSpec(direction=field, intensity=1.0))
    assert rep.classification == "normal"
    assert abs(rep.dA_dt) < 1e-9


def test_p1_stretch_changes_action():
    L = lag.dirichlet(2, 1)
    bc = lambda x: np.array([2.0 * x[0]])
    base = solve_dirichlet(L, bc, ((0.0, 1.0),), 9)
    # slide the right endpoint outward along the base axis, carrying its
    # data along the line: A(t) = 2(1+t) exactly, dA/dt = 2... only when
    # the data is transported; pinning the endpoint value gives
    # A(t) = (1/2) * 4 / (1+t), dA/dt = -2.
    spec = va.DeformationSpec(
        direction=lambda m: np.array([1.0, 0.0]),
        intensity=va.edge_indicator(((0.0, 1.0),), "xmax"),
    )
    rep = va.first_variation_fd(L, bc, ((0.0, 1.0),), 9, spec)
    assert rep.dA_dt == pytest.approx(-2.0, rel=1e-6)
    assert rep.boundary_formula_value == pytest.approx(-2.0, rel=1e-6)
    assert rep.classification == "non-normal"
