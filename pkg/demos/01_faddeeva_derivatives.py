# %% [markdown]
# # Derivatives of the Faddeeva function
#
# `w_derivative_table` returns `w^(k)(z)` in the scaled form
# `g_k = w^(k)(z) / sqrt(k! 2^k)`, which stays O(1) for orders in the
# thousands.  The recurrence direction depends on where `z` sits.

# %%
import numpy as np

from hermite_jost import special

for z in (0.0, 2.0 + 0.5j, 0.3 - 1.0j, 7.5):
    tab = special.w_derivative_table(z, 2000)
    print(f"z={z!s:>10}  method={tab.method_tag(0):<20} prefix={tab.extended_prefix:>3}  "
          f"max residual={tab.recurrence_residuals().max():.1e}  |g_2000|={abs(tab.scaled[-1]):.3e}")

# %% [markdown]
# The quadrature oracle is slow but shares no code with `faddeeva_w`.

# %%
for z in (0.5 + 0.5j, -3.0 + 0.2j, 2.0 - 1.5j):
    a, b = special.faddeeva_w(z), special.w_contour_oracle(z)
    print(f"w({z}) = {a:.15f}   |diff| = {abs(a - b):.1e}")

# %% [markdown]
# Large-order asymptotics at a scaled argument: the relative error of the
# leading term falls like 1/n.

# %%
for mu in (0.0, 0.1, -0.25):
    errs = []
    for n in (64, 256, 1024):
        tab = special.w_derivative_table(mu * np.sqrt(2 * n), n)
        errs.append(special.plancherel_rotach_w(mu, n).relative_error(tab))
    print(f"mu={mu:+.2f}  errors={['%.2e' % e for e in errs]}")
