"""Independent references: spectral measures of truncated matrices and quadrature.

The ``N x N`` leading block of a Jacobi matrix has simple eigenvalues
``x_k``; the squared first components ``w_k`` of its normalized eigenvectors
form the Gauss quadrature measure, whose distribution function converges to
that of the spectral measure as ``N`` grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import _kernels
from .errors import EigensolverError, QuadratureError
from .jacobi import JacobiOperator

_MAX_SWEEPS = 60


@dataclass(frozen=True)
class DiscreteMeasure:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    def cdf(self, x, convention: str = "right"):
        """Distribution function of the atoms at ``x``.

        ``"right"`` is the right-continuous step ``sum_{x_k <= x} w_k``;
        ``"midpoint"`` interpolates linearly through the values
        ``sum_{j<k} w_j + w_k/2`` attained at the nodes (zero and one beyond
        the extreme nodes), i.e. each atom is counted half at its own node.
        """
        x = np.asarray(x, dtype=float)
        cum = np.cumsum(self.weights)
        if convention == "right":
            idx = np.searchsorted(self.nodes, x, side="right")
            return np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)
        if convention == "midpoint":
            mids = cum - 0.5 * self.weights
            return np.interp(x, self.nodes, mids, left=0.0, right=1.0)
        raise ValueError(f"unknown convention {convention!r}")


def tridiagonal_eigen(diag, offdiag) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and first eigenvector components of a symmetric tridiagonal matrix.

    Implicit QL sweeps with the standard shift taken from the trailing
    ``2 x 2`` block; only the first row of the accumulated rotation is kept,
    so work is ``O(N**2)`` and storage ``O(N)``.

    Raises
    ------
    EigensolverError
        When an eigenvalue fails to deflate within the sweep budget.
    """
    d = np.array(diag, dtype=float)
    n = d.shape[0]
    e = np.zeros(n)
    e[: n - 1] = np.asarray(offdiag, dtype=float)[: n - 1]
    z, stuck = _kernels.ql_first_row(d, e, _MAX_SWEEPS)
    if stuck >= 0:
        raise EigensolverError(stuck, _MAX_SWEEPS)
    order = np.argsort(d, kind="stable")
    return d[order], z[order]


def truncated_measure(op: JacobiOperator, N: int) -> DiscreteMeasure:
    """Spectral measure of the ``N x N`` truncation (``N <= 20000``)."""
    N = int(N)
    if not 1 <= N <= 20000:
        raise ValueError("N must lie in [1, 20000]")
    if N > op.horizon:
        raise ValueError("N exceeds the operator horizon")
    nodes, first = tridiagonal_eigen(op.b[1:N + 1], op.a[1:N])
    w = first ** 2
    nodes.setflags(write=False)
    w.setflags(write=False)
    return DiscreteMeasure(nodes, w)


def _integrate(density, lo, hi, rtol):
    val, err, *rest = integrate.quad(density, lo, hi, epsabs=1e-13, epsrel=rtol,
                                     limit=200, full_output=True)
    if len(rest) > 1 and err > 1e-8:
        raise QuadratureError(f"density integral on [{lo}, {hi}] did not converge: {rest[1]}")
    return val


def cdf_compare(measure: DiscreteMeasure, density, grid, convention: str = "right",
                lower: float = -math.inf, rtol: float = 1e-10) -> float:
    """Max over ``grid`` of ``|measure CDF - integral of density from lower|``.

    Grid points closer than ``1e-9`` to a node are moved ``2e-9`` to the
    right so the step convention is unambiguous.  The density integral is
    accumulated interval by interval with adaptive quadrature.

    Parameters
    ----------
    measure : DiscreteMeasure
    density : callable
        Real-valued density, integrable on ``(lower, max(grid))``.
    grid : sequence of float
        Evaluation points inside ``(nodes[0], nodes[-1])``.
    convention : {"right", "midpoint"}
        See :meth:`DiscreteMeasure.cdf`.

    Raises
    ------
    QuadratureError
    """
    g = np.sort(np.asarray(grid, dtype=float))
    if g.size == 0:
        raise ValueError("grid is empty")
    if g[0] <= measure.nodes[0] or g[-1] >= measure.nodes[-1]:
        raise ValueError("grid must lie strictly inside the node range")
    idx = np.clip(np.searchsorted(measure.nodes, g), 1, measure.size - 1)
    near = np.minimum(np.abs(g - measure.nodes[idx - 1]), np.abs(g - measure.nodes[idx]))
    g = np.where(near < 1e-9, g + 2e-9, g)
    emp = measure.cdf(g, convention)
    total = _integrate(density, lower, g[0], rtol)
    worst = abs(emp[0] - total)
    for i in range(1, g.size):
        total += _integrate(density, g[i - 1], g[i], rtol)
        worst = max(worst, abs(emp[i] - total))
    return float(worst)


def herglotz_quadrature(density, lam, support=(-math.inf, math.inf), rtol: float = 1e-10) -> complex:
    """Cauchy transform ``int density(x) / (x - lam) dx`` for ``Im lam >= 0.05``.

    Raises
    ------
    QuadratureError
    """
    lam = complex(lam)
    if lam.imag < 0.05:
        raise ValueError("Im lambda must be >= 0.05")
    lo, hi = support

    def re_part(x):
        d = x - lam.real
        return density(x) * d / (d * d + lam.imag ** 2)

    def im_part(x):
        d = x - lam.real
        return density(x) * lam.imag / (d * d + lam.imag ** 2)

    out = []
    for f in (re_part, im_part):
        pieces = [(lo, lam.real), (lam.real, hi)]
        acc = 0.0
        for a, b in pieces:
            acc += _integrate(f, a, b, rtol)
        out.append(acc)
    return complex(out[0], out[1])
