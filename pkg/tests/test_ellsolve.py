import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elab.ellsolve import (
    DegenerateW,
    grid_residual,
    solve_for_v,
    symbol_det,
    symbol_factors,
    symbol_matrix,
)
from elab.fields import (
    Domain,
    Grid,
    constant_field,
    cr_pair_from_polynomial,
    gerstner_domain,
    gerstner_w,
    identity_field,
)

D = Domain(0.2, 1.2, 0.1, 1.1)
entry = st.floats(-2, 2, allow_nan=False)


@settings(max_examples=50, deadline=None)
@given(st.lists(entry, min_size=4, max_size=4), entry, entry)
def test_symbol_determinant_and_factors(ws, x1, x2):
    dw = np.array(ws).reshape(2, 2)
    xi = (x1, x2)
    M = symbol_matrix(dw, xi)
    s = symbol_det(dw, xi)
    assert np.linalg.det(M) == pytest.approx(-s, abs=1e-10)
    if dw[:, 0] @ dw[:, 0] > 1e-3:
        p, m = symbol_factors(dw, xi)
        assert p * m == pytest.approx(s, abs=1e-9 * (1 + s))
        assert p == pytest.approx(np.conj(m))


def test_symbol_is_elliptic_when_dw_is_invertible():
    dw = np.array([[1.0, 0.3], [-0.2, 0.8]])
    th = np.linspace(0, 2 * np.pi, 64)
    vals = np.array([symbol_det(dw, (np.cos(a), np.sin(a))) for a in th])
    assert vals.min() > 0
    with pytest.raises(DegenerateW):
        symbol_factors(np.array([[0.0, 1.0], [0.0, 1.0]]), (1, 0))


def test_degenerate_w_and_small_grids():
    with pytest.raises(DegenerateW):
        solve_for_v(constant_field([1.0, 2.0], D), Grid(D, 20, 20))
    _, w = cr_pair_from_polynomial([0, 1], D)
    with pytest.raises(ValueError):
        solve_for_v(w, Grid(D, 12, 12))


def _solve(coeffs, n):
    v, w = cr_pair_from_polynomial(coeffs, D)
    g = Grid(D, n, n)
    A1, A2 = g.mesh()
    exact = v(A1, A2)
    sol = solve_for_v(w, g, bc=lambda a, b: v(a, b)[0], anchor_value=exact[1][0, 0])
    return sol, exact, w


def test_quadratic_pair_is_recovered_exactly():
    sol, exact, w = _solve([0.3, 1, 0.5 + 0.25j], 24)
    assert np.abs(sol.values - exact).max() < 1e-10
    assert sol.residual < 1e-10
    assert grid_residual(w, sol) == pytest.approx(sol.residual, abs=1e-12)


def test_quartic_pair_converges_at_second_order():
    errs = [np.abs(s.values - e).max() for s, e, _ in
            (_solve([0, 1, 0.3j, 0.2, 0.1 - 0.1j], n) for n in (17, 33, 65))]
    r = [errs[0] / errs[1], errs[1] / errs[2]]
    assert all(3 <= x <= 5 for x in r), r


def test_gerstner_label_is_recovered():
    d = gerstner_domain(1.0)
    g = Grid(d, 24, 24)
    A1, A2 = g.mesh()
    sol = solve_for_v(gerstner_w(1.0), g, bc=lambda a, b: a, anchor_value=A2[0, 0])
    np.testing.assert_allclose(sol.values, identity_field(d)(A1, A2), atol=1e-9)
