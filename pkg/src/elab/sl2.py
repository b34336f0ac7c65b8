"""SL(2) curves in the ``psi(s, mu, theta)`` chart and their geodesics.

``psi(s, mu, theta) = cosh(s) R1(mu) + sinh(s) R2(theta)`` where ``R1`` is the
rotation by ``mu`` and ``R2`` the reflection matrix
``[[cos theta, sin theta], [sin theta, -cos theta]]``.  In this chart the
metric induced from R^4 is diagonal::

    |A'|^2 = 2 (cosh(2s) s'^2 + cosh(s)^2 mu'^2 + sinh(s)^2 theta'^2)

and ``A^T A''`` is symmetric exactly when
``cosh(s)^2 mu' - sinh(s)^2 theta'`` is constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicHermiteSpline

__all__ = [
    "SingularChart",
    "NotSL2",
    "GeodesicState",
    "SL2Path",
    "AnalyticPath",
    "SampledPath",
    "psi",
    "psi_derivatives",
    "as_sl2",
    "geodesic_rhs",
    "integrate_geodesic",
    "complete_curve",
    "conserved_quantity",
    "symmetry_residual",
    "geodesic_residual",
    "speed",
    "constant_path",
    "kirchhoff_path",
    "fd_derivative",
]


class SingularChart(ArithmeticError):
    """``theta`` is undefined at ``s = 0`` while ``theta'`` is nonzero."""


class NotSL2(ValueError):
    pass


def psi(s, mu, theta):
    """``psi(s, mu, theta)`` as an array of shape ``(2, 2, ...)``."""
    s, mu, theta = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (s, mu, theta)))
    ch, sh = np.cosh(s), np.sinh(s)
    cm, sm = np.cos(mu), np.sin(mu)
    ct, st = np.cos(theta), np.sin(theta)
    return np.array([[ch * cm + sh * ct, -ch * sm + sh * st],
                     [ch * sm + sh * st, ch * cm - sh * ct]])


def _R1(mu):
    c, s = np.cos(mu), np.sin(mu)
    return np.array([[c, -s], [s, c]])


def _R2(th):
    c, s = np.cos(th), np.sin(th)
    return np.array([[c, s], [s, -c]])


def psi_derivatives(q, dq, d2q):
    """``(A, A', A'')`` from chart values and their first two time derivatives.

    ``q``, ``dq``, ``d2q`` are sequences ``(s, mu, theta)`` of arrays.
    """
    s, mu, th = (np.asarray(x, dtype=float) for x in q)
    ds, dmu, dth = (np.asarray(x, dtype=float) for x in dq)
    d2s, d2mu, d2th = (np.asarray(x, dtype=float) for x in d2q)
    ch, sh = np.cosh(s), np.sinh(s)
    R1, R2 = _R1(mu), _R2(th)
    P1, P2 = _R1(mu + np.pi / 2), _R2(th + np.pi / 2)  # d/dmu R1, d/dtheta R2
    A = ch * R1 + sh * R2
    dA = sh * ds * R1 + ch * dmu * P1 + ch * ds * R2 + sh * dth * P2
    d2A = ((ch * ds**2 + sh * d2s - ch * dmu**2) * R1
           + (2 * sh * ds * dmu + ch * d2mu) * P1
           + (sh * ds**2 + ch * d2s - sh * dth**2) * R2
           + (2 * ch * ds * dth + sh * d2th) * P2)
    return A, dA, d2A


def as_sl2(M, tol: float = 1e-12) -> np.ndarray:
    """Return ``M`` as a float 2x2 array, checking ``|det M - 1| <= tol``."""
    M = np.asarray(M, dtype=float)
    if M.shape != (2, 2):
        raise NotSL2(f"expected a 2x2 matrix, got shape {M.shape}")
    d = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    if abs(d - 1.0) > tol:
        raise NotSL2(f"det = {d!r}")
    return M


@dataclass(frozen=True)
class GeodesicState:
    s: float
    mu: float
    theta: float
    ds: float
    dmu: float
    dtheta: float

    def __post_init__(self):
        if not all(math.isfinite(x) for x in self.as_array()):
            raise ValueError("geodesic state must be finite")

    def as_array(self):
        return np.array([self.s, self.mu, self.theta, self.ds, self.dmu, self.dtheta], dtype=float)


def conserved_quantity(s, dmu, dtheta):
    return np.cosh(s) ** 2 * dmu - np.sinh(s) ** 2 * dtheta


def geodesic_rhs(y):
    """Second derivatives ``(s'', mu'', theta'')`` of the geodesic flow."""
    s, _, _, ds, dmu, dth = y
    ch, sh = math.cosh(s), math.sinh(s)
    d2s = -math.sinh(2 * s) * (2 * ds * ds - dth * dth - dmu * dmu) / (2 * math.cosh(2 * s))
    d2mu = -2 * (sh / ch) * ds * dmu
    if dth == 0.0:
        d2th = 0.0
    elif abs(sh) < 1e-12:
        raise SingularChart(
            f"s = {s:.3e} with theta' = {dth:.3e}; restart with theta' folded into mu'"
        )
    else:
        d2th = -2 * (ch / sh) * ds * dth
    return d2s, d2mu, d2th


# -----------------------------------------------------------------------------
# paths


class SL2Path:
    """A curve ``t -> psi(s(t), mu(t), theta(t))`` on ``[t0, t1]``."""

    t0: float
    t1: float

    def chart(self, t):
        """``(q, dq, d2q)`` with each a 3-tuple of arrays shaped like ``t``."""
        raise NotImplementedError

    def A(self, t):
        q, dq, d2q = self.chart(t)
        return psi(*q)

    def derivatives(self, t):
        return psi_derivatives(*self.chart(t))

    def dA(self, t):
        return self.derivatives(t)[1]

    def d2A(self, t):
        return self.derivatives(t)[2]

    def B(self, t):
        """``A^T A''`` with shape ``(2, 2, ...)``."""
        A, _, d2A = self.derivatives(t)
        return np.einsum("il...,ik...->lk...", A, d2A)

    def conserved(self, t):
        q, dq, _ = self.chart(t)
        return conserved_quantity(q[0], dq[1], dq[2])

    def fd_step(self) -> float:
        return 1e-3

    def to_csv(self, path, times=None):
        """Write ``t,s,mu,theta,a11,a12,a21,a22``."""
        if times is None:
            times = self.default_times()
        times = np.asarray(times, dtype=float)
        q, _, _ = self.chart(times)
        A = psi(*q)
        data = np.column_stack([times, q[0], q[1], q[2], A[0, 0], A[0, 1], A[1, 0], A[1, 1]])
        np.savetxt(path, data, delimiter=",", header="t,s,mu,theta,a11,a12,a21,a22",
                   comments="", fmt="%.17g")

    def default_times(self):
        return np.linspace(self.t0, self.t1, 201)

    def _check_t(self, t):
        t = np.asarray(t, dtype=float)
        span = self.t1 - self.t0
        if np.any(t < self.t0 - 1e-12 * max(1, span)) or np.any(t > self.t1 + 1e-12 * max(1, span)):
            raise ValueError(f"time outside [{self.t0}, {self.t1}]")
        return t


def fd_derivative(f: Callable, t, delta: float, order: int = 1):
    """Fourth-order central difference of a scalar callable."""
    t = np.asarray(t, dtype=float)
    fm2, fm1, fp1, fp2 = (f(t + k * delta) for k in (-2, -1, 1, 2))
    if order == 1:
        return (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * delta)
    if order == 2:
        return (-fm2 + 16 * fm1 - 30 * f(t) + 16 * fp1 - fp2) / (12 * delta * delta)
    raise ValueError("order must be 1 or 2")


def _const(value):
    return lambda t: np.full(np.shape(t), float(value))


class AnalyticPath(SL2Path):
    """Path given by closures for ``s, mu, theta`` and their derivatives.

    Missing derivative closures are replaced by fourth-order central
    differences with step ``delta``.
    """

    def __init__(self, s, mu, theta, ds=None, dmu=None, dtheta=None,
                 d2s=None, d2mu=None, d2theta=None, t0=0.0, t1=1.0, delta=1e-3):
        if not t1 > t0:
            raise ValueError("need t1 > t0")
        self.t0, self.t1, self.delta = float(t0), float(t1), float(delta)
        self.q = (s, mu, theta)
        fd1 = lambda f: (lambda t: fd_derivative(f, t, self.delta, 1))  # noqa: E731
        fd2 = lambda f: (lambda t: fd_derivative(f, t, self.delta, 2))  # noqa: E731
        self.dq = tuple(d if d is not None else fd1(f) for f, d in zip(self.q, (ds, dmu, dtheta)))
        self.d2q = tuple(d if d is not None else fd2(f)
                         for f, d in zip(self.q, (d2s, d2mu, d2theta)))

    def chart(self, t):
        t = self._check_t(t)
        ev = lambda fs: tuple(np.broadcast_to(np.asarray(f(t), dtype=float), t.shape)  # noqa: E731
                              for f in fs)
        return ev(self.q), ev(self.dq), ev(self.d2q)

    def fd_step(self):
        return self.delta


def constant_path(M=None, t0=0.0, t1=1.0) -> AnalyticPath:
    """``A(t) = psi(s, mu, theta)`` frozen; default the identity."""
    s, mu, th = (0.0, 0.0, 0.0) if M is None else M
    z = _const(0.0)
    return AnalyticPath(_const(s), _const(mu), _const(th), z, z, z, z, z, z, t0=t0, t1=t1)


def kirchhoff_path(s0: float, mu0: float, t0=0.0, t1=2 * np.pi) -> AnalyticPath:
    """``psi(s0, mu0 t, 0)``."""
    if mu0 == 0:
        raise ValueError("mu0 must be nonzero")
    z = _const(0.0)
    return AnalyticPath(_const(s0), lambda t: mu0 * np.asarray(t, dtype=float), z,
                        z, _const(mu0), z, z, z, z, t0=t0, t1=t1)


class SampledPath(SL2Path):
    """Chart samples on a uniform time grid, Hermite-interpolated in between.

    If ``rhs`` is given (geodesics), second derivatives off the grid come
    from the ODE right-hand side, so the symmetry of ``A^T A''`` is exact
    at every evaluated time.
    """

    def __init__(self, t, q, dq, d2q, rhs=None):
        self.t = np.asarray(t, dtype=float)
        if self.t.ndim != 1 or len(self.t) < 5:
            raise ValueError("need at least 5 time samples")
        self.h = float(self.t[1] - self.t[0])
        self.t0, self.t1 = float(self.t[0]), float(self.t[-1])
        self.qs = np.asarray(q, dtype=float)
        self.dqs = np.asarray(dq, dtype=float)
        self.d2qs = np.asarray(d2q, dtype=float)
        self.rhs = rhs
        self._q = CubicHermiteSpline(self.t, self.qs, self.dqs, axis=1)
        self._dq = CubicHermiteSpline(self.t, self.dqs, self.d2qs, axis=1)

    def fd_step(self):
        return self.h

    def default_times(self):
        return self.t

    def chart(self, t):
        t = self._check_t(t)
        q, dq = self._q(t), self._dq(t)
        if self.rhs is None:
            d2q = self._dq.derivative()(t)
        else:
            flat = np.concatenate([q.reshape(3, -1), dq.reshape(3, -1)])
            d2q = np.array([self.rhs(y) for y in flat.T]).T.reshape(q.shape)
        return tuple(q), tuple(dq), tuple(d2q)

    def node_index(self, t) -> int:
        i = int(round((float(t) - self.t0) / self.h))
        if i < 0 or i >= len(self.t) or abs(self.t[i] - t) > 1e-9 * max(1.0, abs(self.h)):
            raise ValueError(f"t = {t} is not a grid node")
        return i

    def node_chart(self, i):
        return self.qs[:, i], self.dqs[:, i], self.d2qs[:, i]


# -----------------------------------------------------------------------------
# geodesics


def _rk4_step(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _flow(y):
    return np.array([y[3], y[4], y[5], *geodesic_rhs(y)])


def integrate_geodesic(x0: GeodesicState, t1: float, h: float, t0: float = 0.0) -> SampledPath:
    """Classical RK4 for the geodesic equations with fixed step ``~h``.

    The step is adjusted so that an integer number of steps covers
    ``[t0, t1]``.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    if not t1 > t0:
        raise ValueError("need t1 > t0")
    n = max(4, int(math.ceil((t1 - t0) / h - 1e-9)))
    step = (t1 - t0) / n
    ys = np.empty((n + 1, 6))
    ys[0] = x0.as_array()
    for i in range(n):
        ys[i + 1] = _rk4_step(_flow, ys[i], step)
    d2 = np.array([geodesic_rhs(y) for y in ys])
    t = t0 + step * np.arange(n + 1)
    return SampledPath(t, ys[:, :3].T, ys[:, 3:].T, d2.T, rhs=geodesic_rhs)


def complete_curve(s, theta, c: float, t0: float = 0.0, t1: float = 1.0, n: int = 1000,
                   ds=None, d2s=None, dtheta=None, d2theta=None, delta=1e-3) -> AnalyticPath:
    """Choose ``mu`` so that ``cosh(s)^2 mu' - sinh(s)^2 theta' = c``.

    ``mu(t0) = 0``.  ``mu'`` and ``mu''`` are closed-form in ``s``, ``theta``
    and their derivatives; ``mu`` is accumulated with four-point
    Gauss-Legendre quadrature on each of the ``n`` grid cells.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    fd1 = lambda f: (lambda t: fd_derivative(f, t, delta, 1))  # noqa: E731
    fd2 = lambda f: (lambda t: fd_derivative(f, t, delta, 2))  # noqa: E731
    ds = ds or fd1(s)
    d2s = d2s or fd2(s)
    dtheta = dtheta or fd1(theta)
    d2theta = d2theta or fd2(theta)

    def dmu(t):
        sv = s(t)
        return (c + np.sinh(sv) ** 2 * dtheta(t)) / np.cosh(sv) ** 2

    def d2mu(t):
        sv, sp = s(t), ds(t)
        sh, ch = np.sinh(sv), np.cosh(sv)
        N = c + sh**2 * dtheta(t)
        Np = 2 * sh * ch * sp * dtheta(t) + sh**2 * d2theta(t)
        D = ch**2
        Dp = 2 * ch * sh * sp
        return (Np * D - N * Dp) / D**2

    grid = np.linspace(t0, t1, n + 1)
    x, w = np.polynomial.legendre.leggauss(4)

    def cell_integral(a, b):
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        mid, half = (a + b) / 2, (b - a) / 2
        vals = dmu(mid[..., None] + half[..., None] * x)
        return half * (vals @ w)

    nodes = np.concatenate([[0.0], np.cumsum(cell_integral(grid[:-1], grid[1:]))])
    hcell = (t1 - t0) / n

    def mu(t):
        t = np.asarray(t, dtype=float)
        i = np.clip(np.floor((t - t0) / hcell).astype(int), 0, n - 1)
        return nodes[i] + cell_integral(grid[i], t)

    path = AnalyticPath(s, mu, theta, ds, dmu, dtheta, d2s, d2mu, d2theta,
                        t0=t0, t1=t1, delta=delta)
    path.constant = c
    path.grid = grid
    return path


# -----------------------------------------------------------------------------
# residuals


FD_MIN_STEP = 5e-3


def _stride(path: SampledPath, stride):
    # rounding noise in the samples is amplified by 1/step^2, so the stencil
    # spans several grid cells when the grid is fine
    if stride is None:
        stride = max(1, int(math.ceil(FD_MIN_STEP / path.h - 1e-9)))
    return int(stride)


def _fd_A(path: SL2Path, t, fd: bool, stride=None):
    """``(A, A'')`` at ``t``, analytic or by fourth-order differences."""
    if not fd:
        A, _, d2A = path.derivatives(t)
        return A, d2A
    t = float(t)
    if isinstance(path, SampledPath):
        i = path.node_index(t)
        k = _stride(path, stride)
        if i < 2 * k or i > len(path.t) - 1 - 2 * k:
            raise ValueError("sampled path: no central stencil at a boundary node")
        As = [psi(*path.qs[:, i + j * k]) for j in (-2, -1, 0, 1, 2)]
        h = path.h * k
    else:
        h = path.fd_step()
        if t - 2 * h < path.t0 or t + 2 * h > path.t1:
            raise ValueError("time too close to the boundary for a central stencil")
        As = [path.A(t + k * h) for k in (-2, -1, 0, 1, 2)]
    d2A = (-As[0] + 16 * As[1] - 30 * As[2] + 16 * As[3] - As[4]) / (12 * h * h)
    return As[2], d2A


def symmetry_residual(path: SL2Path, t, fd: bool | None = None, stride=None) -> float:
    """``|(A^T A'')_12 - (A^T A'')_21|`` at a single time ``t``.

    ``fd=None`` means finite differences for sampled paths and the analytic
    rule otherwise.  Sampled paths use a stencil of ``stride`` grid cells
    (default: the fewest cells spanning ``FD_MIN_STEP``).
    """
    if fd is None:
        fd = isinstance(path, SampledPath)
    A, d2A = _fd_A(path, t, fd, stride)
    B = A.T @ d2A
    return float(abs(B[0, 1] - B[1, 0]))


def _chart_fd(path: SampledPath, i, stride=None):
    k = _stride(path, stride)
    if i < 2 * k or i > len(path.t) - 1 - 2 * k:
        raise ValueError("sampled path: no central stencil at a boundary node")
    q = path.qs[:, i - 2 * k:i + 2 * k + 1:k]
    h = path.h * k
    d1 = (q[:, 0] - 8 * q[:, 1] + 8 * q[:, 3] - q[:, 4]) / (12 * h)
    d2 = (-q[:, 0] + 16 * q[:, 1] - 30 * q[:, 2] + 16 * q[:, 3] - q[:, 4]) / (12 * h * h)
    return q[:, 2], d1, d2


def geodesic_residual(path: SL2Path, t, fd: bool | None = None, stride=None) -> float:
    """Largest residual of the three geodesic equations at ``t``.

    The equations are used in the multiplied-out form, free of divisions.
    """
    if fd is None:
        fd = isinstance(path, SampledPath)
    if fd:
        if not isinstance(path, SampledPath):
            raise ValueError("finite-difference geodesic residual needs a sampled path")
        q, dq, d2q = _chart_fd(path, path.node_index(t), stride)
    else:
        q, dq, d2q = (np.array(x, dtype=float) for x in path.chart(np.array([float(t)])))
        q, dq, d2q = q[:, 0], dq[:, 0], d2q[:, 0]
    s, _, _ = q
    ds, dmu, dth = dq
    d2s, d2mu, d2th = d2q
    r1 = 2 * math.cosh(2 * s) * d2s + math.sinh(2 * s) * (2 * ds**2 - dth**2 - dmu**2)
    r2 = math.cosh(s) * d2mu + 2 * math.sinh(s) * ds * dmu
    r3 = math.sinh(s) * d2th + 2 * math.cosh(s) * ds * dth
    return float(max(abs(r1), abs(r2), abs(r3)))


def speed(path: SL2Path, t):
    """Frobenius norm of ``A'``."""
    dA = path.dA(t)
    return np.sqrt(np.sum(dA * dA, axis=(0, 1)))
