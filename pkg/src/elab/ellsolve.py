"""The first-order system for ``v`` once ``w`` is fixed.

With ``w`` frozen, ``q1 = q2 = 0`` is linear in the jets of ``v``.  Its
principal symbol has determinant ``-(P^2 + Q^2)`` where
``P = w2_01 xi1 - w2_10 xi2`` and ``Q = w1_01 xi1 - w1_10 xi2``, so the
system is elliptic wherever ``det(dw) != 0``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .fields import Grid, GridField, LabelField
from .symflow import U_JETS, derive_rotation_system, jet_values

__all__ = [
    "DegenerateW",
    "SolverDidNotConverge",
    "symbol_matrix",
    "symbol_det",
    "symbol_factors",
    "solve_for_v",
    "grid_residual",
]


class DegenerateW(ValueError):
    pass


class SolverDidNotConverge(RuntimeError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


@lru_cache(maxsize=None)
def _coefficients(reflect1=False, reflect2=False):
    """``C[e][j]``: coefficient (a polynomial in w-jets) of v-jet ``j`` in ``q_e``."""
    return derive_rotation_system(reflect1, reflect2).linear_in_v()


def _eval_coeffs(dw, reflect=(False, False)):
    dw = np.asarray(dw, dtype=float)
    du = np.concatenate([np.zeros((2,) + dw.shape[1:]), dw], axis=0)
    vals = jet_values(du)
    out = []
    for row in _coefficients(*reflect):
        out.append([np.broadcast_to(np.asarray(c.evaluate(vals), dtype=float), dw.shape[2:])
                    for c in row])
    return out  # out[e][j], j over v1_10, v1_01, v2_10, v2_01


def symbol_matrix(dw, xi, reflect=(False, False)) -> np.ndarray:
    """2x2 principal symbol: rows are ``q1, q2``, columns ``v1, v2``."""
    xi = np.asarray(xi, dtype=float)
    C = _eval_coeffs(np.asarray(dw, dtype=float), reflect)
    names = U_JETS[:4]
    assert names == ("u1_10", "u1_01", "u2_10", "u2_01")
    return np.array([[C[e][2 * c] * xi[0] + C[e][2 * c + 1] * xi[1] for c in range(2)]
                     for e in range(2)])


def symbol_det(dw, xi) -> float:
    """``(w1_01 xi1 - w1_10 xi2)^2 + (w2_01 xi1 - w2_10 xi2)^2``.

    This is minus the determinant of :func:`symbol_matrix`.
    """
    dw = np.asarray(dw, dtype=float)
    x1, x2 = xi
    return (dw[0, 1] * x1 - dw[0, 0] * x2) ** 2 + (dw[1, 1] * x1 - dw[1, 0] * x2) ** 2


def symbol_factors(dw, xi):
    """The two complex-conjugate linear factors whose product is ``symbol_det``.

    With ``a = (w1_10, w2_10)`` and ``b = (w1_01, w2_01)``:
    ``(|a|^2 xi2 - (<a, b> +- i det dw) xi1) / |a|``.
    """
    dw = np.asarray(dw, dtype=float)
    a = dw[:, 0]
    b = dw[:, 1]
    na2 = float(a @ a)
    if na2 == 0.0:
        raise DegenerateW("w_10 vanishes; factor along the other axis")
    det = float(dw[0, 0] * dw[1, 1] - dw[0, 1] * dw[1, 0])
    x1, x2 = xi
    r = np.sqrt(na2)
    plus = (na2 * x2 - (a @ b + 1j * det) * x1) / r
    minus = (na2 * x2 - (a @ b - 1j * det) * x1) / r
    return plus, minus


def _diff_matrix(n, h):
    """Second-order first-derivative matrix: central inside, one-sided at the ends."""
    D = sp.lil_matrix((n, n))
    for i in range(1, n - 1):
        D[i, i - 1] = -1 / (2 * h)
        D[i, i + 1] = 1 / (2 * h)
    D[0, 0:3] = np.array([-3, 4, -1]) / (2 * h)
    D[n - 1, n - 3:n] = np.array([1, -4, 3]) / (2 * h)
    return D.tocsr()


def _operators(grid: Grid):
    D1 = sp.kron(_diff_matrix(grid.n1, grid.h1), sp.eye(grid.n2), format="csr")
    D2 = sp.kron(sp.eye(grid.n1), _diff_matrix(grid.n2, grid.h2), format="csr")
    return D1, D2


def _system(w: LabelField, grid: Grid, reflect):
    A1, A2 = grid.mesh()
    dw = w.jacobian(A1, A2)
    det = dw[0, 0] * dw[1, 1] - dw[0, 1] * dw[1, 0]
    scale = max(1.0, float(np.abs(dw).max()) ** 2)
    if np.min(np.abs(det)) <= 1e-10 * scale:
        i = np.unravel_index(np.argmin(np.abs(det)), det.shape)
        raise DegenerateW(f"det(dw) ~ 0 at alpha = ({A1[i]:.6g}, {A2[i]:.6g})")
    C = _eval_coeffs(dw, reflect)
    D1, D2 = _operators(grid)
    rows = []
    for e in range(2):
        diag = [sp.diags(np.asarray(C[e][j]).ravel()) for j in range(4)]
        rows.append([diag[0] @ D1 + diag[1] @ D2, diag[2] @ D1 + diag[3] @ D2])
    return sp.bmat(rows, format="csr")


def grid_residual(w: LabelField, v: GridField, reflect=(False, False)) -> float:
    """``max |(q1, q2)|`` with v-jets from the same differences the solver uses."""
    L = _system(w, v.grid, reflect)
    r = L @ np.concatenate([v.values[0].ravel(), v.values[1].ravel()])
    return float(np.abs(r).max())


def solve_for_v(w: LabelField, grid: Grid, bc=None, anchor_value: float = 0.0,
                reflect=(False, False)) -> GridField:
    """Least-squares solution of ``q1 = q2 = 0`` for ``v`` on ``grid``.

    ``v1`` is prescribed on the boundary by ``bc(alpha1, alpha2)`` (default 0).
    Constant ``v2`` lies in the kernel, so ``v2`` is pinned to
    ``anchor_value`` at the lower-left node.  The normal equations are
    solved by a sparse direct factorization.
    """
    if grid.n1 < 16 or grid.n2 < 16:
        raise ValueError("solve_for_v needs at least a 16x16 grid")
    L = _system(w, grid, reflect)
    A1, A2 = grid.mesh()
    N = grid.n1 * grid.n2
    boundary = np.zeros(grid.shape, bool)
    boundary[0, :] = boundary[-1, :] = boundary[:, 0] = boundary[:, -1] = True
    known = np.zeros(2 * N, bool)
    known[:N] = boundary.ravel()
    known[N] = True  # v2 at the lower-left node
    x_known = np.zeros(2 * N)
    if bc is not None:
        x_known[:N][boundary.ravel()] = np.asarray(bc(A1[boundary], A2[boundary]), dtype=float)
    x_known[N] = anchor_value
    free = ~known
    Lf = L[:, free]
    rhs = -(L[:, known] @ x_known[known])
    M = (Lf.T @ Lf).tocsc()
    x = x_known.copy()
    x[free] = spsolve(M, Lf.T @ rhs)
    if not np.all(np.isfinite(x)):
        raise SolverDidNotConverge("sparse solve produced non-finite values", float("inf"))
    normal_res = float(np.abs(M @ x[free] - Lf.T @ rhs).max())
    ref = float(np.abs(Lf.T @ rhs).max()) or 1.0
    if normal_res > 1e-6 * ref:
        raise SolverDidNotConverge("normal equations not satisfied", normal_res)
    v = GridField(grid, np.stack([x[:N].reshape(grid.shape), x[N:].reshape(grid.shape)]), "v")
    v.residual = float(np.abs(L @ x).max())
    return v
