# %% [markdown]
# # Jost function and spectral density
#
# For `a_n = sqrt(n) + 0.1 n^-1/2`, `b_n = 0.2/n` the density is
# `exp(-lam^2/2) / (sqrt(2 pi) |F(lam)|^2)`.  The growth of the
# orthonormal polynomials gives a second, independent route.

# %%
import numpy as np

from hermite_jost import jost
from hermite_jost.jacobi import PerturbationSpec, Power, build_operator

spec = PerturbationSpec(Power(0.1, 0.5), Power(0.2, 1.0))
op = build_operator(spec, jost.DEFAULT_HORIZON + 2)
print(op.admissibility)

# %%
for lam in np.linspace(-3, 3, 7):
    s = jost.spectral_sample(op, lam, 1e-10)
    lim = jost.density_via_limit(op, lam)
    print(f"lam={lam:+.1f}  |F|={abs(s.F):.6f}  rho={s.rho:.8f}  limit={lim.value:.8f}  "
          f"identity={s.identity_residual:.1e}  terms={s.series_terms_used}")

# %% [markdown]
# The growth bound behind the Volterra equation, at a complex point.

# %%
d = jost.volterra_nu(op, 1.0 + 0.5j, 2000)
print(f"nu={d.nu:.4f}  bound={d.norm_bound:.4f}  observed={d.observed_sup:.4f}  holds={d.holds}")
