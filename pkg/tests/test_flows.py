import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elab.fields import Domain, Grid, closure_field, identity_field, linear_field
from elab.flows import (
    CharacteristicTangency,
    DegenerateFlowWarning,
    DegenerateLabelField,
    FlowError,
    InitialLine,
    SymmetryViolated,
    SystemResidualTooLarge,
    family1,
    family2,
    family3,
    gerstner,
    gerstner_pressure,
    kirchhoff,
    static_flow,
    transport_residual,
    transport_solve,
    write_trajectories,
)
from elab.sl2 import AnalyticPath, GeodesicState, integrate_geodesic
from elab.symflow import derive_rotation_system, jet_values
from elab.verify import n12_numeric

D = Domain(-1, 1, -1, 1)
U = Domain(0.0, 1.0, 0.0, 1.0)


def _u3():
    return closure_field(lambda a, b: np.array([a + 0.3 * np.sin(np.pi * a) * b]), 1, U,
                         lambda a, b: np.array([[1 + 0.3 * np.pi * np.cos(np.pi * a) * b,
                                                 0.3 * np.sin(np.pi * a)]]))


def test_family1_needs_symmetric_path():
    bad = AnalyticPath(lambda t: 0 * t, lambda t: t**2, lambda t: 0 * t, t0=0, t1=1)
    with pytest.raises(SymmetryViolated):
        family1(bad, identity_field(D))


def test_family1_rejects_degenerate_v():
    with pytest.raises(DegenerateLabelField):
        kirchhoff(0.5, 1.0, linear_field([[1, 1], [1, 1]], [0, 0], D))


def test_kirchhoff_is_an_ellipse_rotating():
    K = kirchhoff(0.5, 1.0, identity_field(D), t1=2 * np.pi)
    a1, a2 = np.array([0.3]), np.array([-0.4])
    x0 = K.phi(0.0, a1, a2)
    xT = K.phi(2 * np.pi, a1, a2)
    np.testing.assert_allclose(x0, xT, atol=1e-12)
    # area preserving at every time
    for t in (0.0, 1.0, 2.5):
        np.testing.assert_allclose(K.det_dphi(t, a1, a2), 1.0, atol=1e-12)


def test_static_flow_has_zero_pressure_gradient():
    F = static_flow(linear_field([[2, 0], [0, 0.5]], [0, 0], D))
    a = np.linspace(-0.5, 0.5, 5)
    np.testing.assert_allclose(F.pressure.grad(0.3, a, a), 0, atol=1e-15)


def test_family2_rejects_equal_rates_and_non_solutions():
    v = identity_field(D)
    with pytest.raises(FlowError):
        family2(1.0, 1.0, v, v)
    w = linear_field([[1, 2], [0.5, 1]], [0, 0], D)
    with pytest.raises(SystemResidualTooLarge):
        family2(0.0, 1.0, v, w)


def _linear_solution(reflect, rng):
    """Random constant Jacobians (dv, dw) with q1 = q2 = 0 for the given variant."""
    S = derive_rotation_system(*reflect)
    while True:
        dv = rng.normal(size=(2, 2))
        w_free = rng.normal(size=2)
        # q is linear in the remaining two w-jets (u4_10, u4_01) given the rest
        def q(w4):
            dw = np.array([w_free, w4])
            vals = jet_values(np.concatenate([dv, dw]))
            return np.array([S.q1.evaluate(vals), S.q2.evaluate(vals)], dtype=float)

        q0 = q(np.zeros(2))
        M = np.column_stack([q(np.eye(2)[0]) - q0, q(np.eye(2)[1]) - q0])
        if abs(np.linalg.det(M)) < 1e-3:
            continue
        w4 = np.linalg.solve(M, -q0)
        dw = np.array([w_free, w4])
        static = S.evaluate_static(dv, dw)
        if abs(static) > 1e-2:
            return dv, dw


@settings(max_examples=8, deadline=None)
@given(st.sampled_from(list(itertools.product((False, True), repeat=2))), st.integers(0, 10_000))
def test_all_reflection_variants_give_euler_flows(reflect, seed):
    rng = np.random.default_rng(seed)
    dv, dw = _linear_solution(reflect, rng)
    v = linear_field(dv, [0, 0], D)
    w = linear_field(dw, [0, 0], D)
    F = family2(0.7, -1.3, v, w, *reflect)
    g = Grid(D, 9, 9)
    for t in (0.0, 1.1):
        assert n12_numeric(F, g, t) < 1e-9 * (1 + np.abs(dv).max() * np.abs(dw).max())


def test_gerstner_particles_move_on_circles():
    k = 1.0
    G = gerstner(k)
    a1, a2 = np.array([0.5, 2.0]), np.array([-0.5, -2.0])
    xs = np.array([G.phi(t, a1, a2) for t in np.linspace(0, 2 * np.pi, 50, endpoint=False)])
    center = xs.mean(axis=0)
    r = np.hypot(*(xs - center).transpose(1, 0, 2))
    np.testing.assert_allclose(r, np.exp(k * a2) / k * np.ones_like(r), rtol=1e-12)


@pytest.mark.parametrize("k", [1.0, -2.0, 0.5])
def test_gerstner_closed_form_pressure(k):
    G = gerstner(k)
    P = gerstner_pressure(k)
    A1, A2 = Grid(G.domain, 15, 15).mesh()
    for t in (0.0, 0.7, 3.0):
        r = G.y(t, A1, A2) + P.grad(t, A1, A2)
        assert np.abs(r).max() < 1e-12
    # gradient of the value matches the stated gradient
    h = 1e-5
    g1 = (P.value(0.4, A1 + h, A2) - P.value(0.4, A1 - h, A2)) / (2 * h)
    assert np.abs(g1 - P.grad(0.4, A1, A2)[0]).max() < 1e-8


def test_transport_sign_for_flat_u3():
    # u3 = alpha2: level lines are horizontal and u2_10 = -u1_10
    u1 = closure_field(lambda a, b: np.array([a * a + b]), 1, U,
                       lambda a, b: np.array([[2 * a, 1 + 0 * a]]))
    u3 = closure_field(lambda a, b: np.array([b + 0 * a]), 1, U,
                       lambda a, b: np.array([[0 * a, 1 + 0 * a]]))
    g = Grid(U, 17, 17)
    u2, u4 = transport_solve(u1, u3, InitialLine(axis="alpha1"), g)
    A1, A2 = g.mesh()
    np.testing.assert_allclose(u2.values[0], -A1**2, atol=1e-12)
    np.testing.assert_allclose(u4.values[0], A1**2, atol=1e-12)
    with pytest.raises(CharacteristicTangency):
        transport_solve(u1, u3, InitialLine(axis="alpha2"), g)


def test_transport_residual_is_second_order():
    u1 = closure_field(lambda a, b: np.array([np.sin(a) + 0.3 * b * b]), 1, U,
                       lambda a, b: np.array([[np.cos(a), 0.6 * b]]))
    u3 = _u3()
    res = []
    for n in (17, 33, 65):
        u2, u4 = transport_solve(u1, u3, None, Grid(U, n, n))
        assert u2.valid.all()
        res.append(max(transport_residual(u1, u3, u2, u4)))
    assert 3 <= res[0] / res[1] <= 5 and 3 <= res[1] / res[2] <= 5


@pytest.fixture(scope="module")
def f3():
    u1 = closure_field(lambda a, b: np.array([b + 0.2 * np.sin(a)]), 1, U,
                       lambda a, b: np.array([[0.2 * np.cos(a), 1 + 0 * a]]))
    Ah = integrate_geodesic(GeodesicState(0.2, 0.0, 0.0, 0.1, 0.1, -0.2), 2.0, 1e-3)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        F = family3(Ah, u1, _u3())
    return F, caught


def test_family3_is_degenerate(f3):
    """The transport pair forces phi to factor through u3, so det(dphi) = 0."""
    F, caught = f3
    assert any(issubclass(w.category, DegenerateFlowWarning) for w in caught)
    assert F.meta["degenerate"] and F.meta["min_abs_det0"] < 1e-8
    A1, A2 = Grid(U, 9, 9).mesh()
    for t in (0.0, 1.0, 2.0):
        assert np.abs(F.det_dphi(t, A1, A2)).max() < 1e-7
    # u1 + u2 and u4 - u1 are functions of u3: their gradients are parallel to grad u3
    J = F.space.jacobian(A1, A2)
    s = J[0] + J[1]
    d = J[3] - J[0]
    assert np.abs(s[0] * J[2, 1] - s[1] * J[2, 0]).max() < 1e-7
    assert np.abs(d[0] * J[2, 1] - d[1] * J[2, 0]).max() < 1e-7


def test_trajectories_csv(tmp_path):
    G = gerstner(1.0).with_pressure(gerstner_pressure(1.0))
    out = tmp_path / "traj.csv"
    write_trajectories(G, out, [0.5, 1.0], [-0.5, -1.0], [0.0, 0.5])
    lines = out.read_text().splitlines()
    assert lines[0] == "t,alpha1,alpha2,x1,x2,p"
    assert len(lines) == 5
