"""Exact and numerical tools for Lagrangian planar Euler flows with a separated form.

Modules:

* ``ratpoly``: sparse rational polynomials and reduced Groebner bases
* ``jetlab``: jet spaces, total derivatives, prolongation
* ``symflow``: exact determinant and curl identities for block matrices
* ``sl2``: geodesics on SL(2, R) and symmetric paths
* ``fields``: label fields on rectangles and grids
* ``flows``: flow constructors (Gerstner, Kirchhoff, rotation pairs, transport)
* ``ellsolve``: least-squares solver for the linear first-order system in ``v``
* ``verify``: residual checks and pressure recovery
* ``cli``: the ``elab`` command
"""

from .fields import Domain, Grid
from .flows import FlowSolution, family1, family2, family3, gerstner, kirchhoff
from .verify import ResidualReport, run_suite

__version__ = "0.1.0"

__all__ = [
    "Domain",
    "FlowSolution",
    "Grid",
    "ResidualReport",
    "family1",
    "family2",
    "family3",
    "gerstner",
    "kirchhoff",
    "run_suite",
]
