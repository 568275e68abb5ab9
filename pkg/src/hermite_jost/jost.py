"""Jost functions, boundary Weyl function and spectral density.

For an admissible perturbation the polynomials of the first kind behave
like ``F(lam) I^-_n + conj(F(lam)) I^+_n`` on the real axis, with

    F(lam) = 1 + i sqrt(2 pi) e^{-lam**2/2} sum_n (Lambda I^+)_n P_n(lam).

The density of the spectral measure is ``exp(-lam**2/2) / (sqrt(2 pi) |F|**2)``
and the Weyl function on the boundary is ``m(lam + i0) = -F_1/F`` where
``F_1 = -i F_crop / a_1`` and ``F_crop`` is the Jost function of the matrix
with its first row and column removed.

The series converges slowly (terms of size ``n**-(1 + p)`` for
``c_n ~ n**-p``) and its partial sums carry an alternating component
``(-1)**n exp(2 i lam sqrt n)``.  Partial sums are therefore smoothed with a
short binomial filter, which cancels the alternating part to high order, and
the smooth remainder is removed by a least-squares fit in the decay
exponents of the perturbation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from . import _kernels
from .errors import (
    AdmissibilityError,
    DegenerateJostError,
    OverflowGuardError,
    TailNotConvergedError,
)
from .freeop import GROWTH_BUDGET, LAMBDA_WINDOW, free_wronskian_value, i_pm
from .jacobi import JacobiOperator, apply_lambda, solve_recurrence

SQRT_2PI = math.sqrt(2.0 * math.pi)
# default horizon for operators built by the convenience helpers
DEFAULT_HORIZON = 2 ** 20
_FIRST_N = 2 ** 14
_SMOOTH_ORDER = 3
_LADDER_POINTS = 24
_LADDER_SPAN = 64
_MAX_EXPONENTS = 6


@dataclass(frozen=True)
class JostValue:
    """A Jost-function value with its truncation diagnostics.

    Attributes
    ----------
    value : complex
    terms_used : int
        Number of series terms summed.
    tail_estimate : float
        Estimated absolute error of ``value``.
    method : str
        ``"free"`` (empty sum), ``"exact"`` (finitely supported
        perturbation) or ``"extrapolated"``.
    """

    value: complex
    terms_used: int
    tail_estimate: float
    method: str

    def __complex__(self):
        return complex(self.value)


def _check_args(op: JacobiOperator, lam, tol: float) -> complex:
    lam = complex(lam)
    if not (math.isfinite(lam.real) and math.isfinite(lam.imag)):
        raise ValueError("lambda must be finite")
    if lam.imag < 0:
        raise ValueError("Im lambda must be >= 0")
    if not (1e-12 <= tol <= 1e-4):
        raise ValueError("tol must lie in [1e-12, 1e-4]")
    if abs(lam) > LAMBDA_WINDOW:
        raise ValueError(f"|lambda| must be <= {LAMBDA_WINDOW}")
    report = op.admissibility
    if not report.passes:
        raise AdmissibilityError(f"operator is not admissible: {report.diagnostic}", report)
    return lam


def series_terms(op: JacobiOperator, lam, N: int) -> np.ndarray:
    """Terms ``(Lambda I^+)_n P_n(lam)`` for ``n = 1..N`` (element ``n-1``)."""
    lam = complex(lam)
    if N + 1 > op.horizon:
        raise ValueError(f"need horizon >= {N + 1}, operator has {op.horizon}")
    ip = i_pm(lam, N + 1, "plus")
    p = solve_recurrence(op, lam, "P", N)
    return apply_lambda(op, ip, N) * p.values


def _ladder_fit(S: np.ndarray, N: int, exps) -> tuple[complex, float]:
    """Extrapolate padded partial sums ``S[n]`` (``n <= N``) to ``n -> inf``."""
    m = 2 * _SMOOTH_ORDER
    wts = comb(m, np.arange(m + 1)) / 2.0 ** m
    top = N - _SMOOTH_ORDER
    ns = np.unique(np.geomspace(top / _LADDER_SPAN, top, _LADDER_POINTS).astype(int))
    vals = sum(wts[j] * S[ns - _SMOOTH_ORDER + j] for j in range(m + 1))
    x = ns / float(top)
    cols = [np.ones(ns.size)] + [x ** (-e) / (1.0 / _LADDER_SPAN) ** (-e) for e in exps]
    A = np.column_stack(cols).astype(complex)
    sol, *_ = np.linalg.lstsq(A, vals, rcond=None)
    return complex(sol[0]), float(np.abs(A @ sol - vals).max())


def _fit_exponents(op: JacobiOperator) -> tuple:
    exps = op.spec.series_exponents()
    if not exps:
        exps = tuple(0.5 * j for j in range(1, 7))
    return exps[:_MAX_EXPONENTS]


def jost_function(op: JacobiOperator, lam, tol: float = 1e-10) -> JostValue:
    """Jost function ``F(lam)`` for ``Im lam >= 0``.

    Parameters
    ----------
    op : JacobiOperator
        Admissible operator; its horizon caps the number of series terms.
    lam : complex
    tol : float
        Target absolute accuracy, in ``[1e-12, 1e-4]``.

    Returns
    -------
    JostValue

    Raises
    ------
    AdmissibilityError
        If ``op`` fails :func:`~hermite_jost.jacobi.check_conditions`.
    TailNotConvergedError
        If the extrapolation error estimate stays above ``tol`` up to the
        operator horizon.

    Notes
    -----
    The tail estimate compares the extrapolated limit obtained from the
    partial sums up to ``N`` with the one obtained from those up to ``N/2``;
    ``N`` is quadrupled until the two agree to ``tol``.
    """
    lam = _check_args(op, lam, tol)
    spec = op.spec
    if spec.is_free:
        return JostValue(1.0 + 0j, 0, 0.0, "free")
    pref = 1j * SQRT_2PI * cmath.exp(-0.5 * lam * lam)

    end = spec.support_end
    if end is not None:
        N = end + 1
        terms = series_terms(op, lam, max(N, 2))[:N]
        return JostValue(1.0 + pref * complex(np.sum(terms)), N, 0.0, "exact")

    cap = op.horizon - 1
    if lam.imag > 0:
        cap = min(cap, int((GROWTH_BUDGET / lam.imag) ** 2))
    exps = _fit_exponents(op)
    N = min(_FIRST_N, cap)
    best = None
    while True:
        terms = series_terms(op, lam, N)
        S = np.concatenate(([0j], np.cumsum(terms)))
        full, resid = _ladder_fit(S, N, exps)
        half, _ = _ladder_fit(S, N // 2, exps)
        est = abs(pref) * (abs(full - half) + resid)
        value = 1.0 + pref * full
        best = JostValue(value, N, est, "extrapolated")
        if est <= tol:
            return best
        if N >= cap:
            raise TailNotConvergedError(
                f"tail estimate {est:.3g} > tol {tol:.3g} with {N} terms at lambda={lam!r}",
                estimate=best, terms=N,
            )
        N = min(4 * N, cap)


def cropped_jost(op: JacobiOperator, lam, tol: float = 1e-10) -> JostValue:
    """Jost function ``F_1`` attached to the second-kind polynomials.

    ``a_1 Q_{n+1}`` are the first-kind polynomials of the cropped matrix, so
    ``F_1 = -i F_crop / a_1`` with ``F_crop`` the Jost function of the crop.
    """
    lam = _check_args(op, lam, tol)
    crop = op.cropped
    fc = jost_function(crop, lam, min(max(tol * op.a[1], 1e-12), 1e-4))
    return JostValue(-1j * fc.value / op.a[1], fc.terms_used, fc.tail_estimate / op.a[1], fc.method)


def weyl_m_boundary(op: JacobiOperator, lam, tol: float = 1e-10) -> complex:
    """Weyl function ``m(lam) = -F_1(lam)/F(lam)`` for ``Im lam >= 0``.

    Raises
    ------
    DegenerateJostError
        If ``|F(lam)| < 1e-12``.
    """
    f = jost_function(op, lam, tol).value
    if abs(f) < 1e-12:
        raise DegenerateJostError(f"|F({lam!r})| = {abs(f):.3g}")
    return -cropped_jost(op, lam, tol).value / f


def spectral_density(op: JacobiOperator, lam: float, tol: float = 1e-10) -> float:
    """Density ``exp(-lam**2/2) / (sqrt(2 pi) |F(lam)|**2)`` at real ``lam``."""
    lam = float(lam)
    f = jost_function(op, lam, tol).value
    if abs(f) < 1e-12:
        raise DegenerateJostError(f"|F({lam!r})| = {abs(f):.3g}")
    return math.exp(-0.5 * lam * lam) / (SQRT_2PI * abs(f) ** 2)


def density_function(op: JacobiOperator, tol: float = 1e-8, cutoff: float = LAMBDA_WINDOW):
    """Callable ``x -> spectral_density(op, x, tol)``, zero for ``|x| > cutoff``.

    Beyond ``|x| = 8`` the density is below ``1e-14`` for admissible
    perturbations of moderate size, so the cut-off only discards mass at
    rounding level.
    """
    def rho(x):
        x = float(x)
        if abs(x) > cutoff:
            return 0.0
        return spectral_density(op, x, tol)
    return rho


@dataclass(frozen=True)
class SpectralSample:
    lam: complex
    F: complex
    F1: complex
    m_boundary: complex
    rho: float
    series_terms_used: int
    tail_estimate: float

    @property
    def identity_residual(self) -> float:
        """Relative residual of ``F1 conj(F) - conj(F1) F = -i sqrt(2 pi) e^{-lam**2/2}``."""
        lam = self.lam.real
        ref = SQRT_2PI * math.exp(-0.5 * lam * lam)
        lhs = self.F1 * self.F.conjugate() - self.F1.conjugate() * self.F
        return abs(lhs + 1j * ref) / ref


def spectral_sample(op: JacobiOperator, lam: float, tol: float = 1e-10) -> SpectralSample:
    """All boundary quantities at a real point."""
    lam = float(lam)
    f = jost_function(op, lam, tol)
    f1 = cropped_jost(op, lam, tol)
    if abs(f.value) < 1e-12:
        raise DegenerateJostError(f"|F({lam!r})| = {abs(f.value):.3g}")
    rho = math.exp(-0.5 * lam * lam) / (SQRT_2PI * abs(f.value) ** 2)
    return SpectralSample(
        lam=complex(lam), F=f.value, F1=f1.value, m_boundary=-f1.value / f.value, rho=rho,
        series_terms_used=max(f.terms_used, f1.terms_used),
        tail_estimate=max(f.tail_estimate, f1.tail_estimate),
    )


@dataclass(frozen=True)
class LimitDensity:
    """Extrapolated limit of ``1 / (pi sqrt(n) (P_n**2 + P_{n+1}**2))``.

    Attributes
    ----------
    value : float
        Fitted constant ``a`` of ``a + b n**-0.5``.
    n : ndarray
        Grid of indices.
    sequence : ndarray
        Sequence values on the grid (averaged over ``n`` and ``n+1``).
    slope : float
        Fitted coefficient ``b``.
    residual : float
        Max absolute fit residual over the fitted half of the grid.
    converged : bool
        False when ``residual > 0.1 * |value|``.
    """

    value: float
    n: np.ndarray
    sequence: np.ndarray
    slope: float
    residual: float
    converged: bool

    def __float__(self):
        return float(self.value)


def default_limit_grid(n_top: int = 4000, count: int = 32) -> list:
    return sorted({int(round(v)) for v in np.geomspace(50, n_top, count)})


def density_via_limit(op: JacobiOperator, lam: float, n_grid=None) -> LimitDensity:
    """Density from the growth of the first-kind polynomials.

    The raw sequence ``q_n = 1 / (pi sqrt(n) (P_n**2 + P_{n+1}**2))``
    oscillates with period two around its limit; the average
    ``(q_n + q_{n+1}) / 2`` removes this, and a fit ``a + b n**-0.5`` over
    the upper half of ``n_grid`` removes the leading drift.
    """
    lam = float(lam)
    n_grid = default_limit_grid() if n_grid is None else sorted(int(n) for n in n_grid)
    if len(n_grid) < 4 or n_grid[0] < 1:
        raise ValueError("n_grid needs at least four positive indices")
    top = n_grid[-1]
    if top + 2 > op.horizon:
        raise ValueError("n_grid exceeds the operator horizon")
    p = solve_recurrence(op, lam, "P", top + 2).values.real
    n = np.asarray(n_grid)
    idx = n - 1  # values[k] holds P_{k+1}
    q0 = 1.0 / (math.pi * np.sqrt(n) * (p[idx] ** 2 + p[idx + 1] ** 2))
    q1 = 1.0 / (math.pi * np.sqrt(n + 1.0) * (p[idx + 1] ** 2 + p[idx + 2] ** 2))
    seq = 0.5 * (q0 + q1)
    half = n.size // 2
    nn, ss = n[half:].astype(float), seq[half:]
    A = np.column_stack([np.ones(nn.size), nn ** -0.5])
    (a, b), *_ = np.linalg.lstsq(A, ss, rcond=None)
    resid = float(np.abs(A @ np.array([a, b]) - ss).max())
    return LimitDensity(float(a), n, seq, float(b), resid, resid <= 0.1 * abs(a))


def _b_weight(lam: complex, n: np.ndarray) -> np.ndarray:
    return n ** 0.25 * np.exp(-abs(lam.imag) * np.sqrt(n))


def variation_of_parameters_check(op: JacobiOperator, lam, n_max: int = 300) -> float:
    """Max relative deviation between both sides of the variation-of-parameters formula.

    Left side ``(a_{n-1}/sqrt(n-1)) P_n``; right side

        P0_n - (I^-_n A_{n-1} - I^+_n B_{n-1}) / W,

    with ``A_m = sum_{k<=m} (Lambda I^+)_k P_k``, ``B_m`` the same with
    ``I^-`` and ``W = W(I^+, I^-)``.  Deviations are measured in the norm
    ``sup_n |u_n| n**(1/4) exp(-|Im lam| sqrt n)`` over ``2 <= n <= n_max``.
    """
    lam = complex(lam)
    n_max = int(n_max)
    if not 3 <= n_max <= 500:
        raise ValueError("n_max must lie in [3, 500]")
    if n_max + 1 > op.horizon:
        raise ValueError("n_max exceeds the operator horizon")
    ip = i_pm(lam, n_max + 1, "plus")
    im = i_pm(lam, n_max + 1, "minus")
    p = solve_recurrence(op, lam, "P", n_max).values
    p0 = (ip.values + im.values)[:n_max]
    lip = apply_lambda(op, ip, n_max)
    lim = apply_lambda(op, im, n_max)
    A = np.cumsum(lip * p)
    B = np.cumsum(lim * p)
    W = free_wronskian_value(lam)
    n = np.arange(2, n_max + 1)
    k = n - 1  # 0-based position of index n
    lhs = op.a[n - 1] / np.sqrt(n - 1.0) * p[k]
    rhs = p0[k] - (im.values[k] * A[k - 1] - ip.values[k] * B[k - 1]) / W
    wgt = _b_weight(lam, n)
    scale = np.max(np.abs(lhs) * wgt)
    return float(np.max(np.abs(lhs - rhs) * wgt) / scale)


@dataclass(frozen=True)
class VolterraDiagnostics:
    """Bound chain ``sup |P_n| w_n <= ||v|| e^nu`` in the weighted sup-norm.

    ``w_n = n**(1/4) exp(-|Im lam| sqrt n)``; ``nu`` is the row-sum norm of
    the Volterra kernel in that norm, ``v`` the free part of the equation.
    """

    nu: float
    norm_bound: float
    observed_sup: float
    v_norm: float
    horizon: int
    saturated: bool

    @property
    def holds(self) -> bool:
        return self.observed_sup <= self.norm_bound * (1 + 1e-6)


def volterra_nu(op: JacobiOperator, lam, horizon: int = 2000) -> VolterraDiagnostics:
    """Estimate the kernel norm ``nu`` and check the growth bound of ``P_n``.

    Kernel: ``V_nk = -(sqrt(n-1)/a_{n-1}) ((Lambda I^+)_k I^-_n - I^+_n (Lambda I^-)_k) / W``
    for ``k < n``; ``nu = sup_n sum_k |V_nk| w_n / w_k``.  ``saturated`` is
    False when the supremum over ``n <= horizon`` exceeds that over
    ``n <= horizon/2`` by more than 1%.
    """
    lam = complex(lam)
    horizon = int(horizon)
    if horizon < 4 or horizon + 1 > op.horizon:
        raise ValueError("horizon must lie in [4, op.horizon - 1]")
    if abs(lam.imag) * math.sqrt(horizon) > GROWTH_BUDGET:
        raise OverflowGuardError("|Im lambda| sqrt(horizon) exceeds 600")
    report = op.admissibility
    if not report.passes:
        raise AdmissibilityError(f"operator is not admissible: {report.diagnostic}", report)
    ip = i_pm(lam, horizon + 1, "plus").padded()
    im = i_pm(lam, horizon + 1, "minus").padded()
    lip = np.concatenate(([np.nan], apply_lambda(op, ip[1:], horizon)))
    lim = np.concatenate(([np.nan], apply_lambda(op, im[1:], horizon)))
    W = free_wronskian_value(lam)
    rows = _kernels.volterra_rows(lip, lim, ip, im, op.a, abs(W), abs(lam.imag), horizon)
    nu = float(rows.max())
    nu_half = float(rows[: horizon // 2 + 1].max())
    n = np.arange(1, horizon + 1)
    wgt = _b_weight(lam, n)
    p0 = (ip[1:] + im[1:])[:horizon]
    v = np.empty(horizon, dtype=complex)
    v[0] = 1.0
    v[1:] = np.sqrt(n[1:] - 1.0) / op.a[n[1:] - 1] * p0[1:]
    v_norm = float(np.max(np.abs(v) * wgt))
    p = solve_recurrence(op, lam, "P", horizon).values
    observed = float(np.max(np.abs(p) * wgt))
    saturated = nu == 0.0 or (nu - nu_half) <= 0.01 * nu
    return VolterraDiagnostics(nu, v_norm * math.exp(nu), observed, v_norm, horizon, saturated)
