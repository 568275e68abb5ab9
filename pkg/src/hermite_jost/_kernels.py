"""Compiled inner loops. Sequences indexed by n use position n (slot 0 unused)."""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def scaled_w_forward(g, z, start):
    # sqrt(k+1) g[k+1] + sqrt(2) z g[k] + sqrt(k) g[k-1] = 0, k >= 1
    s2z = math.sqrt(2.0) * z
    for k in range(start, g.shape[0] - 1):
        g[k + 1] = -(s2z * g[k] + math.sqrt(k) * g[k - 1]) / math.sqrt(k + 1.0)


@njit(cache=True)
def scaled_w_backward(g0, z, n_max, n_start):
    # continued-fraction form of Miller's algorithm: ratios r_k = g_k / g_{k-1}
    r = np.empty(n_max + 1, np.complex128)
    s2z = math.sqrt(2.0) * z
    rk = 0j
    for k in range(n_start, 0, -1):
        rk = -math.sqrt(k) / (s2z + math.sqrt(k + 1.0) * rk)
        if k <= n_max:
            r[k] = rk
    g = np.empty(n_max + 1, np.complex128)
    g[0] = g0
    for k in range(1, n_max + 1):
        g[k] = g[k - 1] * r[k]
    return g


@njit(cache=True)
def three_term(lam, a, b, u1, u2, n_max):
    u = np.empty(n_max + 1, np.complex128)
    u[0] = np.nan
    u[1] = u1
    if n_max >= 2:
        u[2] = u2
    for n in range(2, n_max):
        u[n + 1] = ((lam - b[n]) * u[n] - a[n - 1] * u[n - 1]) / a[n]
    return u


@njit(cache=True)
def ql_first_row(d, e, max_sweeps):
    """Implicit QL with shifts on (d, e); returns the stuck index or -1.

    ``d`` (diagonal) and ``e`` (subdiagonal, e[n-1] = 0) are overwritten;
    the returned ``z`` holds the first row of the eigenvector matrix.
    """
    n = d.shape[0]
    z = np.zeros(n)
    z[0] = 1.0
    eps = 2.220446049250313e-16
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_sweeps:
                return z, l
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                f = z[i + 1]
                z[i + 1] = s * z[i] + c * f
                z[i] = c * z[i] - s * f
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return z, -1


@njit(cache=True)
def volterra_rows(lip, lim, ip, im, a, w_abs, im_lam, n_max):
    """Row sums of |V_nk| e^{|Im l|(sqrt k - sqrt n)} (n/k)^{1/4}, n = 2..n_max."""
    rows = np.zeros(n_max + 1)
    for n in range(2, n_max + 1):
        pref = math.sqrt(n - 1.0) / a[n - 1] / w_abs
        sn = math.sqrt(n)
        acc = 0.0
        for k in range(1, n):
            v = abs(lip[k] * im[n] - ip[n] * lim[k]) * pref
            acc += v * math.exp(im_lam * (math.sqrt(k) - sn)) * (n / k) ** 0.25
        rows[n] = acc
    return rows
