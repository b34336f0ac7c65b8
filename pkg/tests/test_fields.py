import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elab.fields import (
    Domain,
    Grid,
    GridField,
    OutOfDomain,
    closure_field,
    constant_field,
    cr_pair_from_polynomial,
    gerstner_domain,
    gerstner_w,
    identity_field,
    jacobian,
    linear_field,
    stack,
)

D = Domain(0.2, 1.2, 0.1, 1.1)
coef = st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False)


def test_domain_and_grid_basics():
    g = Grid(D, 11, 21)
    assert g.shape == (11, 21)
    assert g.h1 == pytest.approx(0.1) and g.h2 == pytest.approx(0.05)
    A1, A2 = g.mesh()
    assert A1[3, 0] == pytest.approx(0.5) and A2[0, 4] == pytest.approx(0.3)
    assert Grid.parse("64x32", D).shape == (64, 32)
    assert g.refined().shape == (21, 41)
    with pytest.raises(ValueError):
        Grid.parse("64by64", D)
    with pytest.raises(ValueError):
        Domain(1, 0, 0, 1)


def test_out_of_domain():
    f = identity_field(D)
    with pytest.raises(OutOfDomain):
        f(2.0, 0.5)
    # stencils may poke just outside
    f(1.2 + f.h_fd, 0.5)


@settings(max_examples=30, deadline=None)
@given(st.lists(coef, min_size=1, max_size=5))
def test_cr_pair_jacobians(coeffs):
    v, w = cr_pair_from_polynomial(coeffs, D)
    rng = np.random.default_rng(0)
    a1, a2 = rng.uniform(0.2, 1.2, 20), rng.uniform(0.1, 1.1, 20)
    dv = v.jacobian(a1, a2)
    dw = w.jacobian(a1, a2)
    scale = 1 + np.abs(dv).max()
    # v: symmetric and trace-free; w: Cauchy-Riemann
    assert np.abs(dv[0, 1] - dv[1, 0]).max() <= 1e-12 * scale
    assert np.abs(dv[0, 0] + dv[1, 1]).max() <= 1e-12 * scale
    assert np.abs(dw[0, 0] - dw[1, 1]).max() <= 1e-12 * scale
    assert np.abs(dw[0, 1] + dw[1, 0]).max() <= 1e-12 * scale


@settings(max_examples=20, deadline=None)
@given(st.lists(coef, min_size=2, max_size=5))
def test_analytic_jacobian_matches_differences(coeffs):
    v, _ = cr_pair_from_polynomial(coeffs, D)
    a1, a2 = np.linspace(0.3, 1.1, 7), np.linspace(0.2, 1.0, 7)
    an = jacobian(v, a1, a2, mode="analytic")
    fd = jacobian(v, a1, a2, mode="fd")
    assert np.abs(an - fd).max() <= 1e-7 * (1 + np.abs(an).max())


def test_gerstner_w():
    k = 1.0
    w = gerstner_w(k)
    dw = w.raw_jacobian(np.array(0.0), np.array(0.0))
    np.testing.assert_allclose(dw, [[1, 0], [0, -1]], atol=1e-15)
    d = gerstner_domain(k)
    assert d.a1 == 0 and d.b1 == pytest.approx(2 * np.pi) and d.b2 < 0
    d = gerstner_domain(-2.0)
    assert d.a2 > 0  # k alpha2 < 0 for negative k too
    with pytest.raises(ValueError):
        gerstner_w(0.0)


def test_linear_constant_and_stack():
    f = linear_field([[1, 2], [3, 4]], [1, -1], D)
    np.testing.assert_allclose(f(0.5, 0.5), [2.5, 2.5])
    np.testing.assert_allclose(f.jacobian(0.5, 0.5), [[1, 2], [3, 4]])
    c = constant_field([1.0, 2.0], D)
    np.testing.assert_allclose(c.jacobian(0.5, 0.5), 0)
    s = stack(f, c)
    assert s.m == 4
    np.testing.assert_allclose(s(0.5, 0.5), [2.5, 2.5, 1, 2])


def test_fd_jacobian_without_closed_form():
    f = closure_field(lambda a, b: np.array([np.sin(a) * b, a * a]), 2, D)
    a1, a2 = np.array([0.5, 0.9]), np.array([0.4, 0.8])
    exact = np.array([[np.cos(a1) * a2, np.sin(a1)], [2 * a1, 0 * a1]])
    np.testing.assert_allclose(f.jacobian(a1, a2), exact, atol=1e-9)
    with pytest.raises(ValueError):
        f.raw_jacobian(a1, a2, mode="analytic")


def test_grid_field_csv_round_trip(tmp_path):
    g = Grid(D, 5, 4)
    A1, A2 = g.mesh()
    F = GridField(g, np.stack([A1 * A2, A1 - A2]), "demo")
    F.to_csv(tmp_path / "f.csv")
    header = (tmp_path / "f.csv").read_text().splitlines()[0]
    assert header == "alpha1,alpha2,f1,f2"
    back = GridField.from_csv(tmp_path / "f.csv")
    np.testing.assert_array_equal(back.values, F.values)
    assert back.grid.shape == g.shape


def test_grid_field_differences_and_spline():
    g = Grid(D, 33, 33)
    A1, A2 = g.mesh()
    F = GridField(g, np.stack([A1**2 * A2, np.sin(A1) + A2**3]))
    J = F.fd_jacobian()
    assert np.abs(J[0, 0] - 2 * A1 * A2).max() < 1e-12
    assert np.abs(J[1, 1] - 3 * A2**2).max() < 1e-2
    L = F.as_label_field()
    np.testing.assert_allclose(L(A1, A2), F.values, atol=1e-13)
    # cubic data is reproduced exactly, including just outside the grid
    a, b = np.array([0.2 - 1e-4, 0.77]), np.array([1.1 + 1e-4, 0.33])
    np.testing.assert_allclose(L.raw(a, b)[0], a**2 * b, atol=1e-12)
    np.testing.assert_allclose(L.raw_jacobian(a, b)[0], [2 * a * b, a**2], atol=1e-11)
