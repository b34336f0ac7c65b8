"""Flow maps ``phi(t, alpha) = A(t) u(alpha)`` and their constructors.

``A`` is 2x2 (``u = v``) or 2x4 (``u = (v | w)``).  Everything the
verification needs is expressed through ``A, A', A''`` and ``u, du``:
``dphi = A du``, ``phi'' = A'' u`` and ``y = dphi^T phi''``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .fields import Domain, Grid, GridField, LabelField, fd_jacobian, gerstner_w, identity_field
from .sl2 import (
    AnalyticPath,
    SL2Path,
    fd_derivative,
    geodesic_residual,
    kirchhoff_path,
    symmetry_residual,
)
from .symflow import derive_rotation_system

__all__ = [
    "FlowError",
    "DegenerateFlowWarning",
    "SymmetryViolated",
    "DegenerateLabelField",
    "SystemResidualTooLarge",
    "DegeneratePair",
    "A24Vanishes",
    "CharacteristicTangency",
    "StagnationPoint",
    "GeodesicResidualTooLarge",
    "Pressure",
    "FlowSolution",
    "PathMatrix",
    "RotationPair",
    "Family3Matrix",
    "InitialLine",
    "family1",
    "family2",
    "family3",
    "kirchhoff",
    "gerstner",
    "gerstner_pressure",
    "static_flow",
    "characteristic_field",
    "transport_solve",
    "transport_residual",
    "write_trajectories",
]


class FlowError(ValueError):
    pass


class DegenerateFlowWarning(UserWarning):
    """The constructed flow map has (numerically) vanishing Jacobian determinant."""


class SymmetryViolated(FlowError):
    pass


class DegenerateLabelField(FlowError):
    pass


class SystemResidualTooLarge(FlowError):
    pass


class DegeneratePair(FlowError):
    pass


class A24Vanishes(FlowError):
    pass


class CharacteristicTangency(FlowError):
    pass


class StagnationPoint(FlowError):
    pass


class GeodesicResidualTooLarge(FlowError):
    pass


# -----------------------------------------------------------------------------
# time matrices


class PathMatrix:
    """``A(t)`` from an SL(2) path."""

    def __init__(self, path: SL2Path):
        self.path = path
        self.t0, self.t1 = path.t0, path.t1
        self.m = 2

    def mats(self, t):
        A, dA, d2A = self.path.derivatives(float(t))
        return A, dA, d2A


def _block(angle, reflect):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, s], [s, -c]]) if reflect else np.array([[c, -s], [s, c]])


def _dblock(angle, reflect):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[-s, c], [c, s]]) if reflect else np.array([[-s, -c], [c, -s]])


@dataclass(frozen=True)
class RotationPair:
    """``A(t) = (M1(mu t) | M2(theta t))``; a flag turns a block into a reflection."""

    mu: float
    theta: float
    reflect1: bool = False
    reflect2: bool = False
    t0: float = 0.0
    t1: float = 2 * math.pi
    m: int = 4

    def mats(self, t):
        t = float(t)
        a, b = self.mu * t, self.theta * t
        M1, M2 = _block(a, self.reflect1), _block(b, self.reflect2)
        D1, D2 = self.mu * _dblock(a, self.reflect1), self.theta * _dblock(b, self.reflect2)
        A = np.hstack([M1, M2])
        dA = np.hstack([D1, D2])
        d2A = np.hstack([-self.mu**2 * M1, -self.theta**2 * M2])
        return A, dA, d2A


class Family3Matrix:
    """``A = (A_hat | a13 a14; a23 a24)`` with the linear closure relations.

    ``a14 = a12 - a11``, ``a24 = a22 - a21`` and ``a13 = (1 + a14 a23) / a24``.
    """

    def __init__(self, path: SL2Path, a23: Callable | None = None, da23=None, d2a23=None,
                 delta: float = 1e-3):
        self.path = path
        self.t0, self.t1 = path.t0, path.t1
        self.m = 4
        if a23 is None:
            zero = lambda t: 0.0 * np.asarray(t, dtype=float)  # noqa: E731
            a23, da23, d2a23 = zero, zero, zero
        self.a23 = a23
        self.da23 = da23 or (lambda t: fd_derivative(a23, t, delta, 1))
        self.d2a23 = d2a23 or (lambda t: fd_derivative(a23, t, delta, 2))

    def a24(self, t):
        A = self.path.A(t)
        return A[1, 1] - A[1, 0]

    def mats(self, t):
        t = float(t)
        H, dH, d2H = self.path.derivatives(t)
        a14 = (H[0, 1] - H[0, 0], dH[0, 1] - dH[0, 0], d2H[0, 1] - d2H[0, 0])
        a24 = (H[1, 1] - H[1, 0], dH[1, 1] - dH[1, 0], d2H[1, 1] - d2H[1, 0])
        a23 = (float(self.a23(t)), float(self.da23(t)), float(self.d2a23(t)))
        if abs(a24[0]) < 1e-12:
            raise A24Vanishes(f"a24({t}) = {a24[0]:.3e}")
        N = 1 + a14[0] * a23[0]
        dN = a14[1] * a23[0] + a14[0] * a23[1]
        d2N = a14[2] * a23[0] + 2 * a14[1] * a23[1] + a14[0] * a23[2]
        D, dD, d2D = a24
        a13 = N / D
        da13 = (dN * D - N * dD) / D**2
        d2a13 = (d2N * D - N * d2D) / D**2 - 2 * dD * (dN * D - N * dD) / D**3
        right = lambda k: np.array([[(a13, da13, d2a13)[k], a14[k]], [a23[k], a24[k]]])  # noqa: E731
        return tuple(np.hstack([M, right(k)]) for k, M in enumerate((H, dH, d2H)))


# -----------------------------------------------------------------------------
# flows


@dataclass(frozen=True)
class Pressure:
    value: Callable
    grad: Callable
    kind: str = "analytic"


@dataclass(frozen=True)
class FlowSolution:
    kind: str
    time: object
    space: LabelField
    pressure: Pressure | None = None
    meta: dict = field(default_factory=dict)

    @property
    def domain(self) -> Domain:
        return self.space.domain

    @property
    def t0(self):
        return self.time.t0

    @property
    def t1(self):
        return self.time.t1

    def with_pressure(self, p: Pressure) -> FlowSolution:
        return replace(self, pressure=p)

    def _uj(self, a1, a2, raw=False):
        if raw:
            return self.space.raw(a1, a2), self.space.raw_jacobian(a1, a2)
        return self.space(a1, a2), self.space.jacobian(a1, a2)

    def phi(self, t, a1, a2):
        A, _, _ = self.time.mats(t)
        return np.einsum("im,m...->i...", A, self.space(a1, a2))

    def velocity(self, t, a1, a2):
        _, dA, _ = self.time.mats(t)
        return np.einsum("im,m...->i...", dA, self.space(a1, a2))

    def acceleration(self, t, a1, a2):
        _, _, d2A = self.time.mats(t)
        return np.einsum("im,m...->i...", d2A, self.space(a1, a2))

    def dphi(self, t, a1, a2):
        A, _, _ = self.time.mats(t)
        return np.einsum("im,mj...->ij...", A, self.space.jacobian(a1, a2))

    def det_dphi(self, t, a1, a2):
        J = self.dphi(t, a1, a2)
        return J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]

    def y(self, t, a1, a2, raw=False):
        """``(dphi)^T phi''``, shape ``(2, ...)``."""
        A, _, d2A = self.time.mats(t)
        u, du = self._uj(a1, a2, raw)
        J = np.einsum("im,mj...->ij...", A, du)
        acc = np.einsum("im,m...->i...", d2A, u)
        return np.einsum("ij...,i...->j...", J, acc)

    def B(self, t):
        A, _, d2A = self.time.mats(t)
        return A.T @ d2A

    def eulerian_velocity(self, t, x):
        """``A' A^{-1} x`` (family1 only)."""
        if self.kind != "family1":
            raise FlowError("Eulerian velocity is linear only for family1")
        A, dA, _ = self.time.mats(t)
        return dA @ np.linalg.solve(A, np.asarray(x, dtype=float))


def _check_grid(domain, n=17):
    g = Grid(domain, n, n)
    return g.mesh()


def _family1_pressure(time, v):
    def value(t, a1, a2):
        A, _, d2A = time.mats(t)
        B = A.T @ d2A
        u = v(a1, a2)
        return -0.5 * np.einsum("l...,lk,k...->...", u, B, u)

    def grad(t, a1, a2):
        A, _, d2A = time.mats(t)
        B = A.T @ d2A
        u, du = v(a1, a2), v.jacobian(a1, a2)
        return -0.5 * np.einsum("li...,lk,k...->i...", du, B + B.T, u)

    return Pressure(value, grad, "analytic")


def family1(A: SL2Path, v: LabelField, check_times: int = 21, tol: float = 1e-8) -> FlowSolution:
    """``phi = A(t) v(alpha)`` with ``A^T A''`` symmetric; ``p = -<v, A^T A'' v>/2``."""
    if v.m != 2:
        raise ValueError("family1 needs a planar label field")
    for t in np.linspace(A.t0, A.t1, check_times):
        r = symmetry_residual(A, t, fd=False)
        if r > tol:
            raise SymmetryViolated(f"A^T A'' not symmetric at t = {t:.6g} (residual {r:.3e})")
    a1, a2 = _check_grid(v.domain)
    dv = v.jacobian(a1, a2)
    det = dv[0, 0] * dv[1, 1] - dv[0, 1] * dv[1, 0]
    if np.min(np.abs(det)) <= 1e-12:
        raise DegenerateLabelField("det(dv) vanishes on the check grid")
    time = PathMatrix(A)
    return FlowSolution("family1", time, v, _family1_pressure(time, v), {"path": A})


def kirchhoff(s0: float, mu0: float, v: LabelField, t1: float | None = None) -> FlowSolution:
    """Kirchhoff's elliptical vortex in label form: ``A = psi(s0, mu0 t, 0)``."""
    if mu0 == 0:
        raise ValueError("mu0 must be nonzero")
    t1 = 2 * math.pi / abs(mu0) if t1 is None else t1
    F = family1(kirchhoff_path(s0, mu0, 0.0, t1), v)
    F.meta.update(preset="kirchhoff", s0=s0, mu0=mu0)
    return F


def static_flow(v: LabelField, t1: float = 1.0) -> FlowSolution:
    from .sl2 import constant_path

    return family1(constant_path(t1=t1), v)


def family2(mu: float, theta: float, v: LabelField, w: LabelField, reflect1: bool = False,
            reflect2: bool = False, t0: float = 0.0, t1: float | None = None,
            tol: float | None = None, check_n: int = 17) -> FlowSolution:
    """``phi = M1(t) v + M2(t) w`` with the derived rotation-pair system enforced."""
    if mu == theta:
        raise FlowError("the rotation rates must differ (mu != theta)")
    if v.domain != w.domain:
        raise ValueError("v and w must share a domain")
    system = derive_rotation_system(reflect1, reflect2)
    a1, a2 = _check_grid(v.domain, check_n)
    dv, dw = v.jacobian(a1, a2), w.jacobian(a1, a2)
    q1, q2 = system.evaluate(dv, dw)
    scale = max(1.0, float(np.abs(dv).max() * np.abs(dw).max()))
    tol = 1e-8 * scale if tol is None else tol
    res = np.maximum(np.abs(q1), np.abs(q2))
    if res.max() > tol:
        i = np.unravel_index(np.argmax(res), res.shape)
        raise SystemResidualTooLarge(
            f"|(q1, q2)| = {res.max():.3e} > {tol:.1e} at alpha = ({a1[i]:.6g}, {a2[i]:.6g})")
    static = system.evaluate_static(dv, dw)
    if np.min(np.abs(static)) <= 1e-12:
        raise DegeneratePair("det(dv) + det(dw) vanishes on the check grid")
    if t1 is None:
        rates = [abs(r) for r in (mu, theta) if r != 0]
        t1 = t0 + 2 * math.pi / min(rates)
    time = RotationPair(float(mu), float(theta), reflect1, reflect2, t0, t1)
    from .fields import stack

    return FlowSolution("family2", time, stack(v, w), None,
                        {"mu": mu, "theta": theta, "reflect": (reflect1, reflect2),
                         "system_residual": float(res.max())})


def gerstner_pressure(k: float):
    """Closed-form pressure of the Gerstner preset, up to a constant."""

    def value(t, a1, a2):
        e = np.exp(k * np.asarray(a2))
        return -e * np.cos(k * np.asarray(a1) + k * t) + 0.5 * e * e

    def grad(t, a1, a2):
        e = np.exp(k * np.asarray(a2))
        c = np.cos(k * np.asarray(a1) + k * t)
        s = np.sin(k * np.asarray(a1) + k * t)
        return np.array([k * e * s, -k * e * c + k * e * e])

    return Pressure(value, grad, "analytic")


def gerstner(k: float, domain=None, t1: float | None = None) -> FlowSolution:
    """Gerstner's wave: ``v`` the identity, ``w`` the exponential field, rates ``(0, k)``."""
    w = gerstner_w(k, domain)
    v = identity_field(w.domain)
    t1 = 2 * math.pi / abs(k) if t1 is None else t1
    F = family2(0.0, k, v, w, t1=t1)
    F.meta.update(preset="gerstner", k=k)
    return F


# -----------------------------------------------------------------------------
# transport by characteristics


@dataclass(frozen=True)
class InitialLine:
    """Data for ``u2``, ``u4`` on an axis-parallel line.

    ``axis='alpha2'`` is the line ``alpha2 = value`` (default: the bottom
    edge), ``axis='alpha1'`` the line ``alpha1 = value``.  ``u2`` and ``u4``
    are functions of the coordinate along the line.
    """

    axis: str = "alpha2"
    value: float | None = None
    u2: Callable | None = None
    u4: Callable | None = None

    def resolve(self, domain: Domain) -> InitialLine:
        if self.axis not in ("alpha1", "alpha2"):
            raise ValueError("axis must be 'alpha1' or 'alpha2'")
        value = self.value
        if value is None:
            value = domain.a2 if self.axis == "alpha2" else domain.a1
        zero = lambda s: np.zeros_like(np.asarray(s, dtype=float))  # noqa: E731
        return InitialLine(self.axis, float(value), self.u2 or zero, self.u4 or zero)


def _source(u1, u3, a1, a2):
    j1 = u1.raw_jacobian(a1, a2)
    j3 = u3.raw_jacobian(a1, a2)
    g10, g01 = j3[0, 0], j3[0, 1]
    S = g10 * j1[0, 1] - g01 * j1[0, 0]
    return g10, g01, S


class _Tracer:
    def __init__(self, u1, u3, line: InitialLine, steps=64, tangency=0.05, stagnation=1e-10):
        if u1.m != 1 or u3.m != 1:
            raise ValueError("u1 and u3 must be scalar label fields")
        self.u1, self.u3 = u1, u3
        self.domain = u1.domain
        self.line = line.resolve(self.domain)
        self.steps, self.tangency, self.stagnation = steps, tangency, stagnation

    def _rhs(self, x, sigma):
        """Derivatives along the line-normal coordinate ``sigma``."""
        if self.line.axis == "alpha2":
            a1, a2 = x, sigma
        else:
            a1, a2 = sigma, x
        g10, g01, S = _source(self.u1, self.u3, a1, a2)
        norm = np.hypot(g10, g01)
        if np.any(norm < self.stagnation):
            raise StagnationPoint(f"|grad u3| < {self.stagnation:g}")
        # characteristic direction (g01, -g10); its component normal to the line
        normal = -g10 if self.line.axis == "alpha2" else g01
        along = g01 if self.line.axis == "alpha2" else -g10
        if np.any(np.abs(normal) / norm <= self.tangency):
            raise CharacteristicTangency(
                "level curves of u3 are nearly parallel to the initial line "
                f"(min ratio {np.min(np.abs(normal) / norm):.3g})")
        # d u2 / d sigma = S / normal, d u4 / d sigma = -S / normal
        return along / normal, S / normal

    def trace(self, a1, a2):
        """``(u2, u4, valid)`` at the given points."""
        a1, a2 = np.broadcast_arrays(np.asarray(a1, dtype=float), np.asarray(a2, dtype=float))
        shape = a1.shape
        a1, a2 = a1.ravel(), a2.ravel()
        if self.line.axis == "alpha2":
            x, sigma = a1.copy(), a2.copy()
            lo, hi = self.domain.a1, self.domain.b1
        else:
            x, sigma = a2.copy(), a1.copy()
            lo, hi = self.domain.a2, self.domain.b2
        h = (self.line.value - sigma) / self.steps
        I = np.zeros_like(x)
        # difference stencils start up to 2 h_fd outside D; allow some drift beyond that
        slack = 1e-9 * self.domain.diameter + 8 * self.u1.h_fd
        valid = np.ones_like(x, dtype=bool)
        for _ in range(self.steps):
            k1x, k1i = self._rhs(x, sigma)
            k2x, k2i = self._rhs(x + 0.5 * h * k1x, sigma + 0.5 * h)
            k3x, k3i = self._rhs(x + 0.5 * h * k2x, sigma + 0.5 * h)
            k4x, k4i = self._rhs(x + h * k3x, sigma + h)
            x = x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
            I = I + h / 6 * (k1i + 2 * k2i + 2 * k3i + k4i)
            sigma = sigma + h
            valid &= (x >= lo - slack) & (x <= hi + slack)
        # I = integral from the node to the line; the node value adds -I
        u2 = self.line.u2(x) - I
        u4 = self.line.u4(x) + I
        u2 = np.where(valid, u2, np.nan)
        u4 = np.where(valid, u4, np.nan)
        return u2.reshape(shape), u4.reshape(shape), valid.reshape(shape)


def characteristic_field(u1: LabelField, u3: LabelField, line: InitialLine | None = None,
                         steps: int = 64, tangency: float = 0.05) -> LabelField:
    """``(u2, u4)`` as a label field evaluated by tracing characteristics.

    Points whose characteristic leaves the domain evaluate to NaN.
    """
    tracer = _Tracer(u1, u3, line or InitialLine(), steps, tangency)

    def f(a1, a2):
        u2, u4, _ = tracer.trace(a1, a2)
        return np.array([u2, u4])

    fld = LabelField(f, 2, u1.domain, None, u1.h_fd, name="characteristic")
    fld.tracer = tracer
    return fld


def transport_solve(u1: LabelField, u3: LabelField, initial_data: InitialLine | None, grid: Grid,
                    steps: int = 64, tangency: float = 0.05):
    """Solve the transport pair for ``u2``, ``u4`` on ``grid``.

    Along the level curves of ``u3``, ``u2`` gains and ``u4`` loses the
    source ``u3_10 u1_01 - u3_01 u1_10``.  Returns two grid fields; nodes whose
    characteristic exits the domain are NaN and flagged in ``.valid``.
    """
    tracer = _Tracer(u1, u3, initial_data or InitialLine(), steps, tangency)
    A1, A2 = grid.mesh()
    u2, u4, valid = tracer.trace(A1, A2)
    return GridField(grid, u2, "u2", valid), GridField(grid, u4, "u4", valid)


def transport_residual(u1: LabelField, u3: LabelField, u2: GridField, u4: GridField):
    """Max-abs residual of both transport equations from grid differences."""
    grid = u2.grid
    A1, A2 = grid.mesh()
    j1 = u1.jacobian(A1, A2)[0]
    j3 = u3.jacobian(A1, A2)[0]
    d2 = u2.fd_jacobian()[0]
    d4 = u4.fd_jacobian()[0]
    e1 = -j3[0] * d2[1] + j3[1] * d2[0] - j3[0] * j1[1] + j3[1] * j1[0]
    e2 = -d4[0] * j3[1] + d4[1] * j3[0] - j3[0] * j1[1] + j3[1] * j1[0]
    mask = u2.valid & u4.valid
    return float(np.nanmax(np.abs(e1[mask]))), float(np.nanmax(np.abs(e2[mask])))


def family3(Ahat: SL2Path, u1: LabelField, u3: LabelField, initial_data: InitialLine | None = None,
            a23: Callable | None = None, da23=None, d2a23=None, steps: int = 64,
            tangency: float = 0.05, geodesic_tol: float = 1e-6, check_times: int = 201) -> FlowSolution:
    """Two-block flow driven by a geodesic ``A_hat`` and transported ``u2``, ``u4``."""
    ts = np.linspace(Ahat.t0, Ahat.t1, check_times)
    for t in ts[2:-2]:
        try:
            r = geodesic_residual(Ahat, t)
        except ValueError:
            r = geodesic_residual(Ahat, t, fd=False)
        if r > geodesic_tol:
            raise GeodesicResidualTooLarge(f"geodesic residual {r:.3e} at t = {t:.6g}")
    time = Family3Matrix(Ahat, a23, da23, d2a23)
    a24 = np.array([time.a24(t) for t in ts])
    if np.any(np.sign(a24) != np.sign(a24[0])) or np.min(np.abs(a24)) < 1e-8:
        raise A24Vanishes("a24 = a22 - a21 changes sign or vanishes on the time grid")
    tracer = _Tracer(u1, u3, initial_data or InitialLine(), steps, tangency)

    def f(a1, a2):
        u2, u4, _ = tracer.trace(a1, a2)
        return np.array([u1.raw(a1, a2)[0], u2, u3.raw(a1, a2)[0], u4])

    def jac(a1, a2):
        tr = fd_jacobian(lambda b1, b2: np.array(tracer.trace(b1, b2)[:2]), a1, a2, u1.h_fd)
        return np.concatenate([u1.raw_jacobian(a1, a2), tr[:1], u3.raw_jacobian(a1, a2), tr[1:]])

    space = LabelField(f, 4, u1.domain, jac, u1.h_fd, name="family3-u")
    F = FlowSolution("family3", time, space, None, {"tracer": tracer, "path": Ahat})
    # The transport pair forces u1 + u2 and u4 - u1 to be functions of u3,
    # so det(dphi) vanishes identically unless u3 is constant.  Probe it.
    d = u1.domain
    pad = 0.1
    g1 = np.linspace(d.a1 + pad * (d.b1 - d.a1), d.b1 - pad * (d.b1 - d.a1), 5)
    g2 = np.linspace(d.a2 + pad * (d.b2 - d.a2), d.b2 - pad * (d.b2 - d.a2), 5)
    P1, P2 = np.meshgrid(g1, g2, indexing="ij")
    det0 = F.det_dphi(F.t0, P1, P2)
    min_det = float(np.nanmin(np.abs(det0))) if np.any(np.isfinite(det0)) else float("nan")
    F.meta["min_abs_det0"] = min_det
    scale = float(np.linalg.norm(time.mats(F.t0)[0]) ** 2)
    if not min_det > 1e-6 * scale:
        F.meta["degenerate"] = True
        warnings.warn(f"family3 flow map is degenerate: min |det dphi| = {min_det:.2e}",
                      DegenerateFlowWarning, stacklevel=2)
    return F


# -----------------------------------------------------------------------------
# export


def write_trajectories(flow: FlowSolution, path, alpha1, alpha2, times, pressure: bool = True):
    """CSV with columns ``t,alpha1,alpha2,x1,x2[,p]``."""
    alpha1 = np.asarray(alpha1, dtype=float).ravel()
    alpha2 = np.asarray(alpha2, dtype=float).ravel()
    with_p = pressure and flow.pressure is not None
    rows = []
    for t in np.asarray(times, dtype=float):
        x = flow.phi(t, alpha1, alpha2)
        cols = [np.full_like(alpha1, t), alpha1, alpha2, x[0], x[1]]
        if with_p:
            cols.append(flow.pressure.value(t, alpha1, alpha2))
        rows.append(np.column_stack(cols))
    header = "t,alpha1,alpha2,x1,x2" + (",p" if with_p else "")
    np.savetxt(path, np.vstack(rows), delimiter=",", header=header, comments="", fmt="%.17g")
