# %% [markdown]
# Gerstner's trochoidal wave: build it, check it, recover its pressure.

# %%
import numpy as np

from elab.fields import Grid
from elab.flows import gerstner, gerstner_pressure
from elab.verify import det_drift, euler_residual, recovered_pressure, with_recovered_pressure

k = 1.0
G = gerstner(k)
grid = Grid(G.domain, 32, 32)
times = np.linspace(0, 2 * np.pi, 9)

# %%
print(det_drift(G, grid, times).line())
print(euler_residual(G.with_pressure(gerstner_pressure(k)), grid, times).line())

# %% the pressure from path integration differs from the closed form by a constant
R = recovered_pressure(G)
A1, A2 = grid.mesh()
gap = R.value(1.0, A1, A2) - gerstner_pressure(k).value(1.0, A1, A2)
print("spread of the difference:", np.ptp(gap))
print(euler_residual(with_recovered_pressure(G), grid, times[:3]).line())

# %% particles run on circles of radius exp(k alpha2) / k
a1, a2 = np.array([1.0]), np.array([-0.5])
xs = np.array([G.phi(t, a1, a2)[:, 0] for t in np.linspace(0, 2 * np.pi, 40, endpoint=False)])
print("radius:", np.hypot(*(xs - xs.mean(axis=0)).T).mean(), "expected", np.exp(k * -0.5) / k)
