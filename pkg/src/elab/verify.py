"""Numerical checks of ``(dphi)^T phi'' + grad p = 0`` and its ingredients."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .fields import Grid, GridField
from .flows import FlowSolution, Pressure

__all__ = [
    "MissingPressure",
    "CurlTooLarge",
    "ResidualReport",
    "euler_residual",
    "det_drift",
    "n12_numeric",
    "n12_report",
    "pressure_recover",
    "recovered_pressure",
    "with_recovered_pressure",
    "eulerian_divergence",
    "run_suite",
]


class MissingPressure(ValueError):
    pass


class CurlTooLarge(ValueError):
    pass


@dataclass
class ResidualReport:
    check: str
    max_abs: float
    t: float | None
    alpha: tuple | None
    tol: float
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.max_abs <= self.tol)

    def to_dict(self):
        at = {"t": self.t, "alpha": list(self.alpha) if self.alpha is not None else None}
        out = {"check": self.check, "max_abs": self.max_abs, "at": at, "tol": self.tol,
               "pass": self.passed}
        if self.meta:
            out["meta"] = self.meta
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def line(self) -> str:
        return (f"{'PASS' if self.passed else 'FAIL'} {self.check}: max {self.max_abs:.3e} "
                f"(tol {self.tol:.1e})")


def _worst(values, t, A1, A2, best=None):
    values = np.asarray(values, dtype=float)
    if np.all(np.isnan(values)):
        return best
    i = np.unravel_index(np.nanargmax(values), values.shape)
    cand = (float(values[i]), float(t), (float(A1[i]), float(A2[i])))
    if best is None or cand[0] > best[0]:
        return cand
    return best


def _report(check, worst, tol, **meta):
    if worst is None:
        return ResidualReport(check, float("nan"), None, None, tol, meta)
    return ResidualReport(check, worst[0], worst[1], worst[2], tol, meta)


def euler_residual(F: FlowSolution, grid: Grid, times, tol: float = 1e-10) -> ResidualReport:
    """Max over samples of ``|(dphi)^T phi'' + grad p|``."""
    if F.pressure is None:
        raise MissingPressure(f"{F.kind} flow carries no pressure; recover it first")
    A1, A2 = grid.mesh()
    worst = None
    for t in np.atleast_1d(times):
        r = F.y(t, A1, A2) + F.pressure.grad(t, A1, A2)
        worst = _worst(np.hypot(r[0], r[1]), t, A1, A2, worst)
    return _report("euler_residual", worst, tol, pressure=F.pressure.kind)


def det_drift(F: FlowSolution, grid: Grid, times, tol: float = 1e-10) -> ResidualReport:
    """``max |det dphi^t - det dphi^{t0}|``; ``min |det dphi^{t0}|`` goes in ``meta``."""
    A1, A2 = grid.mesh()
    d0 = F.det_dphi(F.t0, A1, A2)
    worst = None
    for t in np.atleast_1d(times):
        worst = _worst(np.abs(F.det_dphi(t, A1, A2) - d0), t, A1, A2, worst)
    return _report("det_drift", worst, tol, min_abs_det0=float(np.nanmin(np.abs(d0))))


def _curl(F: FlowSolution, t, A1, A2, h):
    def y1(a, b):
        return F.y(t, a, b, raw=True)[0]

    def y2(a, b):
        return F.y(t, a, b, raw=True)[1]

    d1y2 = (y2(A1 - 2 * h, A2) - 8 * y2(A1 - h, A2) + 8 * y2(A1 + h, A2) - y2(A1 + 2 * h, A2)) / (12 * h)
    d2y1 = (y1(A1, A2 - 2 * h) - 8 * y1(A1, A2 - h) + 8 * y1(A1, A2 + h) - y1(A1, A2 + 2 * h)) / (12 * h)
    return d1y2 - d2y1


def _curl_step(F, h):
    return 10 * F.space.h_fd if h is None else h


def n12_numeric(F: FlowSolution, grid: Grid, t, h: float | None = None) -> float:
    """Max-abs of ``d1 y2 - d2 y1`` by fourth-order differences of ``y``."""
    A1, A2 = grid.mesh()
    return float(np.nanmax(np.abs(_curl(F, t, A1, A2, _curl_step(F, h)))))


def n12_report(F: FlowSolution, grid: Grid, times, tol: float = 1e-8, h=None) -> ResidualReport:
    A1, A2 = grid.mesh()
    worst = None
    for t in np.atleast_1d(times):
        worst = _worst(np.abs(_curl(F, t, A1, A2, _curl_step(F, h))), t, A1, A2, worst)
    return _report("n12_numeric", worst, tol)


def recovered_pressure(F: FlowSolution, panels: int = 8, order: int = 8) -> Pressure:
    """Pressure as ``-int y . dl`` from the lower-left corner of ``D``.

    The path runs along ``alpha1`` first, then along ``alpha2``; each leg
    uses composite Gauss-Legendre quadrature with a fixed number of panels,
    so the result is smooth in ``alpha`` and its gradient can be taken by
    differences.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    # reference nodes on [0, 1]
    edges = np.linspace(0.0, 1.0, panels + 1)
    half = (edges[1:] - edges[:-1]) / 2
    mid = (edges[1:] + edges[:-1]) / 2
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * w).ravel()
    d = F.domain
    o1, o2 = d.a1, d.a2

    def value(t, a1, a2):
        a1, a2 = np.broadcast_arrays(np.asarray(a1, dtype=float), np.asarray(a2, dtype=float))
        L1 = a1 - o1
        L2 = a2 - o2
        s1 = o1 + L1[..., None] * nodes
        y1 = F.y(t, s1, np.full_like(s1, o2), raw=True)[0]
        s2 = o2 + L2[..., None] * nodes
        y2 = F.y(t, np.broadcast_to(a1[..., None], s2.shape), s2, raw=True)[1]
        return -(L1 * (y1 @ weights) + L2 * (y2 @ weights))

    h = F.space.h_fd

    def grad(t, a1, a2):
        a1, a2 = np.broadcast_arrays(np.asarray(a1, dtype=float), np.asarray(a2, dtype=float))
        g = []
        for e1, e2 in ((1, 0), (0, 1)):
            vals = [value(t, a1 + k * h * e1, a2 + k * h * e2) for k in (-2, -1, 1, 2)]
            g.append((vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h))
        return np.array(g)

    return Pressure(value, grad, "recovered")


def pressure_recover(F: FlowSolution, grid: Grid, t, curl_tol: float = 1e-6,
                     panels: int = 8, order: int = 8) -> GridField:
    """Pressure samples on ``grid`` with ``p = 0`` at the lower-left corner.

    Raises :class:`CurlTooLarge` unless ``n12_numeric`` certifies path
    independence to ``curl_tol``; the certificate is kept in ``.curl``.
    """
    curl = n12_numeric(F, grid, t)
    if not curl <= curl_tol:
        raise CurlTooLarge(f"curl of (dphi)^T phi'' is {curl:.3e} > {curl_tol:.1e} at t = {t}")
    P = recovered_pressure(F, panels, order)
    A1, A2 = grid.mesh()
    p = GridField(grid, P.value(t, A1, A2), name="p")
    p.curl = curl
    p.closure = P
    return p


def with_recovered_pressure(F: FlowSolution, panels: int = 8, order: int = 8) -> FlowSolution:
    return F.with_pressure(recovered_pressure(F, panels, order))


def eulerian_divergence(F: FlowSolution, t) -> float:
    """``|trace(A' A^{-1})|`` for a family1 flow."""
    if F.kind != "family1":
        raise ValueError("Eulerian divergence is defined here for family1 only")
    A, dA, _ = F.time.mats(t)
    return float(abs(np.trace(dA @ np.linalg.inv(A))))


def run_suite(F: FlowSolution, grid: Grid, times, tols: dict | None = None) -> list[ResidualReport]:
    """All applicable checks; pressure is recovered when the flow has none."""
    tols = {"euler": 1e-6, "det": 1e-8, "n12": 1e-6, "divergence": 1e-10, **(tols or {})}
    times = np.atleast_1d(np.asarray(times, dtype=float))
    reports = [det_drift(F, grid, times, tols["det"]),
               n12_report(F, grid, times, tols["n12"])]
    if F.pressure is None:
        F = with_recovered_pressure(F)
    reports.append(euler_residual(F, grid, times, tols["euler"]))
    if F.kind == "family1":
        worst = max(eulerian_divergence(F, t) for t in times)
        reports.append(ResidualReport("eulerian_divergence", worst, None, None, tols["divergence"]))
    return reports


def refinement_ratio(coarse: float, fine: float) -> float:
    return coarse / fine if fine > 0 else math.inf
