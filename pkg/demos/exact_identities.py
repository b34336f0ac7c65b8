# %% [markdown]
# Exact computations: rigidity of area-preserving harmonic maps and the
# rotation-pair system.

# %%
from elab.jetlab import prove_affine_rigidity
from elab.symflow import derive_rotation_system, verify_thm56

rep = prove_affine_rigidity()
print("ideal dimensions:", rep.dimensions)
print("vanishing jets:", rep.vanishing_jets)

# %%
for r1 in (False, True):
    for r2 in (False, True):
        S = derive_rotation_system(r1, r2)
        print(f"reflect=({r1}, {r2})\n  q1 = {S.q1}\n  q2 = {S.q2}")

# %% two generic blocks: one fifth equation survives the reduction
chain = verify_thm56()
print(chain.fifth_equation)
