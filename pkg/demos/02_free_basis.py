# %% [markdown]
# # Solutions of the free recurrence
#
# `I^+` and `I^-` solve `sqrt(n-1) u_{n-1} + sqrt(n) u_{n+1} = lam u_n`.
# Their Wronskian is constant, and each follows a simple oscillatory law
# for large `n`.

# %%
import numpy as np

from hermite_jost import freeop

lam = 1.0 + 0.3j
ip = freeop.i_pm(lam, 2001, "plus")
im = freeop.i_pm(lam, 2001, "minus")
n = np.arange(1, 2001)
w = freeop.wronskian(ip, im, freeop.free_weights(2001), n)
print("Wronskian spread:", np.ptp(np.abs(w)), " closed form:", freeop.free_wronskian_value(lam))

# %%
for N in (100, 400, 1600):
    r = freeop.i_pm_asymptotic(lam, N, "minus") / im.at(N)
    print(f"n={N:5d}  |asymptotic/exact - 1| = {abs(r - 1):.2e}")

# %% [markdown]
# `I^+` decays in the upper half plane, `I^-` grows.

# %%
print("|I+_2000| =", abs(ip.at(2000)), "  |I-_2000| =", abs(im.at(2000)))
