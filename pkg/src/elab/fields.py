"""Vector fields on a rectangular label domain ``D = [a1, b1] x [a2, b2]``.

A :class:`LabelField` wraps a vectorized closure ``(alpha1, alpha2) -> (m, ...)``
and optionally its Jacobian ``(m, 2, ...)``, where column ``i`` holds the
derivative in ``alpha_i``.  Without an analytic Jacobian, fourth-order
central differences with step ``h_fd`` are used.  A :class:`GridField`
holds node values on a uniform grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import NdBSpline, make_interp_spline

__all__ = [
    "OutOfDomain",
    "Domain",
    "Grid",
    "LabelField",
    "GridField",
    "closure_field",
    "identity_field",
    "linear_field",
    "constant_field",
    "gerstner_w",
    "gerstner_domain",
    "cr_pair_from_polynomial",
    "jacobian",
    "stack",
    "fd_jacobian",
]


class OutOfDomain(ValueError):
    pass


@dataclass(frozen=True)
class Domain:
    a1: float
    b1: float
    a2: float
    b2: float

    def __post_init__(self):
        if not (self.b1 > self.a1 and self.b2 > self.a2):
            raise ValueError(f"empty domain {self}")

    @classmethod
    def of(cls, d) -> Domain:
        if isinstance(d, Domain):
            return d
        (a1, b1), (a2, b2) = d
        return cls(float(a1), float(b1), float(a2), float(b2))

    @property
    def diameter(self) -> float:
        return math.hypot(self.b1 - self.a1, self.b2 - self.a2)

    def contains(self, a1, a2, slack: float = 0.0):
        tol = 1e-12 * self.diameter + slack
        a1, a2 = np.asarray(a1), np.asarray(a2)
        return ((a1 >= self.a1 - tol) & (a1 <= self.b1 + tol)
                & (a2 >= self.a2 - tol) & (a2 <= self.b2 + tol))

    def check(self, a1, a2, slack: float = 0.0):
        inside = self.contains(a1, a2, slack)
        if not np.all(inside):
            bad = np.argwhere(~np.atleast_1d(inside))[0]
            p1 = np.atleast_1d(np.broadcast_to(a1, np.shape(inside)))[tuple(bad)]
            p2 = np.atleast_1d(np.broadcast_to(a2, np.shape(inside)))[tuple(bad)]
            raise OutOfDomain(f"point ({p1:.6g}, {p2:.6g}) outside {self}")


@dataclass(frozen=True)
class Grid:
    """``n1 x n2`` uniform nodes including the boundary, ``indexing='ij'``."""

    domain: Domain
    n1: int
    n2: int

    def __post_init__(self):
        object.__setattr__(self, "domain", Domain.of(self.domain))
        if self.n1 < 3 or self.n2 < 3:
            raise ValueError("grid needs at least 3x3 nodes")

    @property
    def x1(self):
        return np.linspace(self.domain.a1, self.domain.b1, self.n1)

    @property
    def x2(self):
        return np.linspace(self.domain.a2, self.domain.b2, self.n2)

    @property
    def h1(self):
        return (self.domain.b1 - self.domain.a1) / (self.n1 - 1)

    @property
    def h2(self):
        return (self.domain.b2 - self.domain.a2) / (self.n2 - 1)

    @property
    def shape(self):
        return (self.n1, self.n2)

    def mesh(self):
        return np.meshgrid(self.x1, self.x2, indexing="ij")

    def refined(self) -> Grid:
        """Halve the spacing."""
        return Grid(self.domain, 2 * self.n1 - 1, 2 * self.n2 - 1)

    @classmethod
    def parse(cls, text: str, domain) -> Grid:
        """``'64x64'`` style."""
        try:
            n1, n2 = (int(x) for x in text.lower().split("x"))
        except ValueError:
            raise ValueError(f"grid must look like 64x64, got {text!r}") from None
        return cls(Domain.of(domain), n1, n2)


def fd_jacobian(f: Callable, a1, a2, h: float):
    """Fourth-order central-difference Jacobian ``(m, 2, ...)`` of ``f``."""
    a1, a2 = np.broadcast_arrays(np.asarray(a1, dtype=float), np.asarray(a2, dtype=float))
    cols = []
    for d1, d2 in ((1.0, 0.0), (0.0, 1.0)):
        fm2, fm1, fp1, fp2 = (np.asarray(f(a1 + k * h * d1, a2 + k * h * d2)) for k in (-2, -1, 1, 2))
        cols.append((fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h))
    return np.stack(cols, axis=1)


class LabelField:
    """A map ``D -> R^m`` with Jacobian access.

    Points outside ``D`` raise :class:`OutOfDomain`.  Difference stencils are
    allowed to reach ``2 h_fd`` past the boundary, so closures should be
    defined on a slightly larger set.
    """

    def __init__(self, func: Callable, m: int, domain, jac: Callable | None = None,
                 h_fd: float | None = None, name: str = ""):
        self.func = func
        self.m = int(m)
        self.domain = Domain.of(domain)
        self.jac = jac
        self.h_fd = float(h_fd) if h_fd is not None else 1e-4 * self.domain.diameter
        self.name = name

    @property
    def analytic(self) -> bool:
        return self.jac is not None

    def raw(self, a1, a2):
        """Evaluate without the domain check."""
        out = np.asarray(self.func(np.asarray(a1, dtype=float), np.asarray(a2, dtype=float)),
                         dtype=float)
        shape = np.broadcast(np.asarray(a1), np.asarray(a2)).shape
        return np.broadcast_to(out, (self.m,) + shape) if out.shape != (self.m,) + shape else out

    def __call__(self, a1, a2):
        self.domain.check(a1, a2, slack=2 * self.h_fd)
        return self.raw(a1, a2)

    def raw_jacobian(self, a1, a2, mode: str = "auto"):
        if mode not in ("auto", "analytic", "fd"):
            raise ValueError(f"unknown Jacobian mode {mode!r}")
        if mode == "analytic" and self.jac is None:
            raise ValueError(f"field {self.name!r} has no analytic Jacobian")
        if self.jac is not None and mode != "fd":
            out = np.asarray(self.jac(np.asarray(a1, dtype=float), np.asarray(a2, dtype=float)),
                             dtype=float)
            shape = np.broadcast(np.asarray(a1), np.asarray(a2)).shape
            return np.broadcast_to(out, (self.m, 2) + shape)
        return fd_jacobian(self.raw, a1, a2, self.h_fd)

    def jacobian(self, a1, a2, mode: str = "auto"):
        self.domain.check(a1, a2, slack=2 * self.h_fd)
        return self.raw_jacobian(a1, a2, mode)

    def on_grid(self, grid: Grid) -> GridField:
        A1, A2 = grid.mesh()
        return GridField(grid, self(A1, A2), name=self.name)

    def with_domain(self, domain) -> LabelField:
        return LabelField(self.func, self.m, domain, self.jac, None, self.name)

    def __repr__(self):
        return f"LabelField({self.name or 'closure'}, m={self.m}, domain={self.domain})"


def jacobian(f: LabelField, a1, a2, mode: str = "auto"):
    """``m x 2`` Jacobian of ``f`` (vectorized over points)."""
    return f.jacobian(a1, a2, mode)


def closure_field(func, m, domain, jac=None, h_fd=None, name="closure") -> LabelField:
    return LabelField(func, m, domain, jac, h_fd, name)


def identity_field(domain) -> LabelField:
    return linear_field(np.eye(2), (0.0, 0.0), domain, name="identity")


def linear_field(M, b, domain, name="linear") -> LabelField:
    """``alpha -> M alpha + b`` for a 2x2 (or 4x2) matrix ``M``."""
    M = np.asarray(M, dtype=float)
    b = np.asarray(b, dtype=float)
    m = M.shape[0]

    def f(a1, a2):
        return (np.multiply.outer(M[:, 0], a1) + np.multiply.outer(M[:, 1], a2)
                + b.reshape((m,) + (1,) * np.ndim(a1)))

    def j(a1, a2):
        shape = np.broadcast(a1, a2).shape
        return np.broadcast_to(M.reshape((m, 2) + (1,) * len(shape)), (m, 2) + shape).copy()

    return LabelField(f, m, domain, j, name=name)


def constant_field(value, domain) -> LabelField:
    value = np.asarray(value, dtype=float)
    return linear_field(np.zeros((len(value), 2)), value, domain, name="constant")


def gerstner_domain(k: float) -> Domain:
    """One wavelength wide, ``k alpha2`` between ``-3`` and ``-0.1``."""
    if k == 0:
        raise ValueError("k must be nonzero")
    lo, hi = sorted((-3.0 / k, -0.1 / k))
    return Domain(0.0, 2 * math.pi / abs(k), lo, hi)


def gerstner_w(k: float, domain=None) -> LabelField:
    """``w(alpha) = (e^{k alpha2} / k) (sin(k alpha1), -cos(k alpha1))``."""
    if k == 0:
        raise ValueError("k must be nonzero")
    k = float(k)
    domain = gerstner_domain(k) if domain is None else domain

    def f(a1, a2):
        e = np.exp(k * a2) / k
        return np.array([e * np.sin(k * a1), -e * np.cos(k * a1)])

    def j(a1, a2):
        e = np.exp(k * a2)
        c, s = np.cos(k * a1), np.sin(k * a1)
        return np.array([[e * c, e * s], [e * s, -e * c]])

    return LabelField(f, 2, domain, j, name=f"gerstner(k={k:g})")


def _horner(coeffs, z):
    out = np.zeros_like(z)
    for c in reversed(coeffs):
        out = out * z + c
    return out


def _complex_field(coeffs, conj_second: bool, domain, name):
    coeffs = [complex(c) for c in coeffs]
    dcoeffs = [j * c for j, c in enumerate(coeffs)][1:] or [0j]
    sgn = -1.0 if conj_second else 1.0

    def f(a1, a2):
        F = _horner(coeffs, np.asarray(a1) + 1j * np.asarray(a2))
        return np.array([F.real, sgn * F.imag])

    def j(a1, a2):
        D = _horner(dcoeffs, np.asarray(a1) + 1j * np.asarray(a2))
        # d/d alpha1 F = F', d/d alpha2 F = i F'
        return np.array([[D.real, -D.imag], [sgn * D.imag, sgn * D.real]])

    return LabelField(f, 2, domain, j, name=name)


def cr_pair_from_polynomial(coeffs: Sequence, domain, w_coeffs: Sequence | None = None):
    """Label fields ``(v, w)`` built from holomorphic polynomials.

    With ``F = sum c_j z^j`` and ``H = sum d_j z^j`` (``z = alpha1 + i alpha2``),
    ``v = (Re F, -Im F)`` has a symmetric trace-free Jacobian and
    ``w = (Re H, Im H)`` satisfies the Cauchy-Riemann equations.  Such pairs
    annihilate the rotation-pair system identically.  ``H`` defaults to
    ``F / 2``; with ``H = F`` one would get ``det(dv) + det(dw) = 0``.
    """
    coeffs = list(coeffs)
    if not coeffs:
        raise ValueError("need at least one coefficient")
    if w_coeffs is None:
        w_coeffs = [complex(c) / 2 for c in coeffs]
    v = _complex_field(coeffs, True, domain, "cr-v")
    w = _complex_field(list(w_coeffs), False, domain, "cr-w")
    return v, w


def stack(*fields: LabelField) -> LabelField:
    """Concatenate fields on a common domain into one field."""
    if not fields:
        raise ValueError("nothing to stack")
    dom = fields[0].domain
    for f in fields[1:]:
        if f.domain != dom:
            raise ValueError("fields live on different domains")
    m = sum(f.m for f in fields)
    h = min(f.h_fd for f in fields)

    def func(a1, a2):
        return np.concatenate([f.raw(a1, a2) for f in fields], axis=0)

    def jac(a1, a2):
        return np.concatenate([f.raw_jacobian(a1, a2) for f in fields], axis=0)

    return LabelField(func, m, dom, jac, h, name="|".join(f.name for f in fields))


class GridField:
    """Node values ``(m, n1, n2)`` on a :class:`Grid`."""

    def __init__(self, grid: Grid, values, name: str = "", valid=None):
        self.grid = grid
        values = np.asarray(values, dtype=float)
        if values.ndim == 2:
            values = values[None]
        if values.shape[1:] != grid.shape:
            raise ValueError(f"values of shape {values.shape} do not fit grid {grid.shape}")
        self.values = values
        self.name = name
        self.valid = np.ones(grid.shape, bool) if valid is None else np.asarray(valid, bool)

    @property
    def m(self):
        return self.values.shape[0]

    def __getitem__(self, i):
        return self.values[i]

    def fd_jacobian(self):
        """Second-order differences: central inside, one-sided on the edges."""
        g = self.grid
        d1 = np.gradient(self.values, g.h1, axis=1, edge_order=2)
        d2 = np.gradient(self.values, g.h2, axis=2, edge_order=2)
        return np.stack([d1, d2], axis=1)

    def to_csv(self, path):
        """Columns ``alpha1,alpha2,f1,...``; rows in C order over the grid."""
        A1, A2 = self.grid.mesh()
        cols = [A1.ravel(), A2.ravel()] + [v.ravel() for v in self.values]
        header = ",".join(["alpha1", "alpha2"] + [f"f{i + 1}" for i in range(self.m)])
        np.savetxt(path, np.column_stack(cols), delimiter=",", header=header,
                   comments="", fmt="%.17g")

    @classmethod
    def from_csv(cls, path, name: str = "") -> GridField:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        x1 = np.unique(data[:, 0])
        x2 = np.unique(data[:, 1])
        grid = Grid(Domain(float(x1[0]), float(x1[-1]), float(x2[0]), float(x2[-1])), len(x1), len(x2))
        if len(data) != len(x1) * len(x2):
            raise ValueError("CSV rows do not form a full grid")
        order = np.lexsort((data[:, 1], data[:, 0]))
        vals = data[order, 2:].T.reshape((-1,) + grid.shape)
        return cls(grid, vals, name)

    def as_label_field(self, k: int = 3) -> LabelField:
        """Tensor-product interpolating spline with its exact Jacobian.

        The spline extends polynomially past the grid, so difference
        stencils that poke slightly outside ``D`` stay smooth.
        """
        g = self.grid
        splines = []
        for v in self.values:
            s1 = make_interp_spline(g.x1, v, k=k, axis=0)
            s2 = make_interp_spline(g.x2, s1.c.T, k=k)
            splines.append(NdBSpline((s1.t, s2.t), s2.c.T, k, extrapolate=True))

        def ev(a1, a2, nu):
            a1, a2 = np.broadcast_arrays(np.asarray(a1, float), np.asarray(a2, float))
            pts = np.stack([a1.ravel(), a2.ravel()], axis=-1)
            return [s(pts, nu=nu).reshape(a1.shape) for s in splines]

        def f(a1, a2):
            return np.array(ev(a1, a2, (0, 0)))

        def j(a1, a2):
            return np.array([list(p) for p in zip(ev(a1, a2, (1, 0)), ev(a1, a2, (0, 1)))])

        return LabelField(f, self.m, g.domain, j, name=self.name or "grid")
