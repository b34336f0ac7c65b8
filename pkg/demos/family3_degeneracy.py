# %% [markdown]
# The transport construction for a general geodesic in SL(2) yields a map
# whose Jacobian determinant vanishes identically. This script shows why.

# %%
import warnings

import numpy as np

from elab.fields import Domain, Grid, closure_field
from elab.flows import DegenerateFlowWarning, family3
from elab.sl2 import GeodesicState, integrate_geodesic

U = Domain(0.0, 1.0, 0.0, 1.0)
u1 = closure_field(lambda a, b: np.array([b + 0.2 * np.sin(a)]), 1, U,
                   lambda a, b: np.array([[0.2 * np.cos(a), 1 + 0 * a]]))
u3 = closure_field(lambda a, b: np.array([a + 0.3 * np.sin(np.pi * a) * b]), 1, U,
                   lambda a, b: np.array([[1 + 0.3 * np.pi * np.cos(np.pi * a) * b,
                                           0.3 * np.sin(np.pi * a)]]))
A = integrate_geodesic(GeodesicState(0.2, 0.0, 0.0, 0.1, 0.1, -0.2), 2.0, 1e-3)

# %%
with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    F = family3(A, u1, u3)
print([str(w.message) for w in caught if issubclass(w.category, DegenerateFlowWarning)])
print("min |det dphi| at t0:", F.meta["min_abs_det0"])

# %% u1 + u2 and u4 - u1 are constant along level sets of u3
A1, A2 = Grid(U, 9, 9).mesh()
J = F.space.jacobian(A1, A2)
for name, g in (("u1 + u2", J[0] + J[1]), ("u4 - u1", J[3] - J[0])):
    cross = g[0] * J[2, 1] - g[1] * J[2, 0]
    print(f"grad({name}) x grad(u3): max {np.abs(cross).max():.2e}")

# %% so the last column of the label Jacobian is a combination of the others
print("max |det dphi| over t:", max(np.abs(F.det_dphi(t, A1, A2)).max() for t in (0, 1, 2)))
