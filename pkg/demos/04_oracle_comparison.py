# %% [markdown]
# # Truncated matrices as a reference
#
# The first components of the eigenvectors of an `N x N` truncation give
# a discrete measure whose distribution function approaches the true one.
# A right-continuous step is off by up to half an atom; counting each atom
# half at its node removes most of that.

# %%
import numpy as np

from hermite_jost import jost, oracle
from hermite_jost.jacobi import PerturbationSpec, Power, build_operator

op = build_operator(PerturbationSpec(Power(0.1, 0.5), Power(0.2, 1.0)), jost.DEFAULT_HORIZON + 2)
rho = jost.density_function(op, tol=1e-9)
grid = np.linspace(-3, 3, 61)

# %%
for N in (250, 1000, 2000):
    m = oracle.truncated_measure(op, N)
    right = oracle.cdf_compare(m, rho, grid, "right")
    mid = oracle.cdf_compare(m, rho, grid, "midpoint")
    print(f"N={N:5d}  step={right:.2e}  midpoint={mid:.2e}")

# %% [markdown]
# The Cauchy transform of the density recovers the Weyl function.

# %%
lam = 0.5 + 0.5j
print(oracle.herglotz_quadrature(rho, lam, support=(-8, 8), rtol=1e-8), jost.weyl_m_boundary(op, lam))
