"""Complex error function, its derivatives, and large-order asymptotics.

The Faddeeva function ``w(z) = exp(-z**2) erfc(-i z)`` equals the contour
integral ``(1/(pi i)) int exp(-t**2) / (t - z) dt`` taken along a path
passing below the pole.  Its derivatives obey

    w^(k+1)(z) = -2 z w^(k)(z) - 2 k w^(k-1)(z),   k >= 1,

which after the normalization ``g_k = w^(k) / sqrt(k! 2**k)`` becomes the
well-scaled three-term recurrence

    sqrt(k+1) g_{k+1} + sqrt(2) z g_k + sqrt(k) g_{k-1} = 0.

Tables are stored as ``g_k`` together with ``log_norm[k] = log sqrt(k! 2**k)``
so that orders in the thousands never overflow.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import integrate, special as sps

from . import _kernels
from .errors import (
    BranchCutWarning,
    DomainError,
    PrecisionLossError,
    QuadratureError,
)

SQRT_PI = math.sqrt(math.pi)
SQRT2 = math.sqrt(2.0)
_EPS = 2.220446049250313e-16
# error estimate above which a derivative table is rejected
PRECISION_LIMIT = 1e-8
# forward growth factor tolerated before switching to backward recurrence
_FORWARD_GROWTH_LIMIT = 1e4
# validated window for the scaled-argument asymptotic formula
PR_MU_WINDOW = 0.3

FORWARD = "forward-recurrence"
BACKWARD = "backward-recurrence"


def _as_complex(z) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"argument must be finite, got {z!r}")
    return z


def faddeeva_w(z):
    """Faddeeva function ``w(z) = exp(-z**2) erfc(-i z)``.

    Parameters
    ----------
    z : complex or array_like
        Finite argument(s).

    Returns
    -------
    complex or ndarray
        ``w(z)``.  Scalars in, scalar out.
    """
    if np.ndim(z) == 0:
        return complex(sps.wofz(_as_complex(z)))
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise ValueError("arguments must be finite")
    return sps.wofz(z)


def w_contour_oracle(z, rtol: float = 1e-12) -> complex:
    """Evaluate ``w(z)`` by quadrature of its defining Cauchy integral.

    The path is the horizontal line ``Im t = c`` with ``c = 0`` when
    ``|Im z| >= 1`` and ``c = Im z -+ 1`` otherwise (whichever is closer to
    the real axis).  When the line lies above the pole the residue
    ``2 exp(-z**2)`` is added back.  Meant as a slow, independent check.

    Parameters
    ----------
    z : complex
        Argument with ``|z| <= 30``.
    rtol : float
        Relative tolerance requested from the adaptive integrator.

    Raises
    ------
    QuadratureError
        If the integrator reports an error estimate above ``100 * rtol``.
    """
    z = _as_complex(z)
    if abs(z) > 30:
        raise DomainError("contour oracle is limited to |z| <= 30")
    y = z.imag
    if abs(y) >= 1.0:
        c = 0.0
    elif y >= 0.0:
        c = y - 1.0
    else:
        c = y + 1.0

    def f(x):
        t = complex(x, c)
        return cmath.exp(-t * t) / (t - z)

    half = math.sqrt(c * c + 110.0)
    points = [z.real] if -half < z.real < half else None
    val, err, info = integrate.quad(
        f, -half, half, complex_func=True, points=points,
        epsabs=0.0, epsrel=rtol, limit=800, full_output=True,
    )
    scale = abs(val)
    err_total = abs(err[0]) + abs(err[1]) if isinstance(err, tuple) else abs(err)
    if not math.isfinite(scale) or err_total > 100 * rtol * max(scale, 1e-300):
        raise QuadratureError(f"contour quadrature failed at z={z!r}: error {err_total:.3g}")
    w = val / (math.pi * 1j)
    if c > y:
        w += 2.0 * cmath.exp(-z * z)
    return w


@dataclass(frozen=True)
class WDerivativeTable:
    """Derivatives ``w^(k)(z)``, ``k = 0..n_max``, in scaled form.

    Attributes
    ----------
    z : complex
    scaled : ndarray
        ``g_k = w^(k)(z) / sqrt(k! 2**k)``.
    log_norm : ndarray
        ``log sqrt(k! 2**k)``, so ``w^(k) = g_k * exp(log_norm[k])``.
    segments : tuple of (start, stop, tag)
        Index ranges (inclusive start, exclusive stop) and the method used.
    est_rel_error : ndarray
        A-priori relative error estimate per entry.
    extended_prefix : int
        Number of leading entries computed in extended precision.
    """

    z: complex
    scaled: np.ndarray
    log_norm: np.ndarray
    segments: tuple
    est_rel_error: np.ndarray
    extended_prefix: int = 0

    @property
    def n_max(self) -> int:
        return self.scaled.shape[0] - 1

    @property
    def values(self) -> np.ndarray:
        """Unscaled derivatives; overflow to ``inf`` beyond k ~ 150."""
        with np.errstate(over="ignore", invalid="ignore"):
            return self.scaled * np.exp(self.log_norm)

    def method_tag(self, k: int) -> str:
        for lo, hi, tag in self.segments:
            if lo <= k < hi:
                return tag
        raise IndexError(k)

    def recurrence_residuals(self) -> np.ndarray:
        """Relative residuals of the derivative recurrence for ``1 <= k < n_max``.

        In scaled variables the residual reads
        ``|sqrt(k+1) g_{k+1} + sqrt(2) z g_k + sqrt(k) g_{k-1}|`` divided by
        the sum of the moduli of the three terms.
        """
        g = self.scaled
        k = np.arange(1, self.n_max)
        t1 = np.sqrt(k + 1.0) * g[2:]
        t2 = SQRT2 * self.z * g[1:-1]
        t3 = np.sqrt(k) * g[:-2]
        den = np.abs(t1) + np.abs(t2) + np.abs(t3)
        with np.errstate(invalid="ignore", divide="ignore"):
            r = np.abs(t1 + t2 + t3) / den
        return np.where(den > 0, r, 0.0)


def _log_norm(n_max: int) -> np.ndarray:
    k = np.arange(n_max + 1, dtype=float)
    return 0.5 * (sps.gammaln(k + 1.0) + k * math.log(2.0))


def _prefix_gain(z: complex) -> float:
    """Log of the cancellation factor suffered by forward recurrence at small k."""
    re_z2 = (z * z).real
    if re_z2 <= 1.0:
        return 0.0
    return max(re_z2 - math.log(SQRT_PI * abs(z)), 0.0)


def _mp_prefix(z: complex, count: int, log_gain: float) -> np.ndarray:
    """First ``count`` scaled derivatives computed with extra working digits."""
    dps = 20 + int(math.ceil(log_gain / math.log(10.0))) + 10
    with mpmath.workdps(dps):
        zm = mpmath.mpc(z.real, z.imag)
        g = [mpmath.exp(-zm * zm) * mpmath.erfc(-1j * zm)]
        w1 = -2 * zm * g[0] + 2j / mpmath.sqrt(mpmath.pi)
        g.append(w1 / mpmath.sqrt(2))
        s2z = mpmath.sqrt(2) * zm
        for k in range(1, count - 1):
            g.append(-(s2z * g[k] + mpmath.sqrt(k) * g[k - 1]) / mpmath.sqrt(k + 1))
        return np.array([complex(v) for v in g[:count]])


def _scaled_table(z: complex, n_max: int, direction: str):
    """Return ``(g, segments, est, prefix)`` for the scaled derivatives."""
    y = z.imag
    growth = 2.0 * max(y, 0.0) * math.sqrt(2.0 * n_max)
    if direction == "auto":
        direction = "backward" if growth > math.log(_FORWARD_GROWTH_LIMIT) else "forward"
    k = np.arange(n_max + 1, dtype=float)
    w0 = faddeeva_w(z)

    if direction == "backward":
        if y <= 0.0:
            raise PrecisionLossError(
                "backward recurrence requires Im z > 0 (w is not minimal otherwise)",
                index=0, estimate=1.0,
            )
        # start far enough out that the dominant solution's contamination,
        # exp(-2 y (sqrt(2 n_start) - sqrt(2 k))), is below 1e-18 at k = n_max
        n_start = int(math.ceil((math.sqrt(2.0 * n_max) + 20.7 / y) ** 2 / 2.0)) + 10
        n_start = max(n_start, n_max + 30)
        g = _kernels.scaled_w_backward(w0, z, n_max, n_start)
        est = np.exp(-2.0 * y * (math.sqrt(2.0 * n_start) - np.sqrt(2.0 * k)))
        est += 4.0 * _EPS * np.sqrt(k + 1.0)
        return g, ((0, n_max + 1, BACKWARD),), est, 0

    log_gain = _prefix_gain(z)
    g = np.empty(n_max + 1, dtype=np.complex128)
    prefix = 0
    base = 4.0 * _EPS
    if log_gain > math.log(1e3):
        prefix = min(n_max + 1, int(math.ceil(1.5 * (z * z).real)) + 20)
        g[:prefix] = _mp_prefix(z, max(prefix, 2), log_gain)[:prefix]
        g[0] = w0
    else:
        base *= math.exp(log_gain)
        g[0] = w0
        if n_max >= 1:
            g[1] = (-2.0 * z * w0 + 2j / SQRT_PI) / SQRT2
        prefix = 0
    start = max(prefix - 1, 1)
    if n_max >= 2:
        _kernels.scaled_w_forward(g, z, start)
    est = base * np.sqrt(k + 1.0) * np.exp(2.0 * max(y, 0.0) * np.sqrt(2.0 * k))
    if prefix:
        est[:prefix] = 4.0 * _EPS
    return g, ((0, n_max + 1, FORWARD),), est, prefix


def w_derivative_table(z, n_max: int, direction_hint: str = "auto") -> WDerivativeTable:
    """Table of ``w^(k)(z)`` for ``k = 0..n_max``.

    Forward recurrence is used where it is stable (``Im z <= 0`` and the
    neutral strip near the real axis).  Where ``w`` is the minimal solution
    of the recurrence and forward growth would exceed ``1e4``, a
    continued-fraction (Miller) backward sweep normalized by ``w(z)`` is
    used.  Leading entries that forward recurrence would compute with
    heavy cancellation (large ``Re z**2``) are computed in extended
    precision.

    Parameters
    ----------
    z : complex
    n_max : int
        Highest derivative order, ``>= 1``.
    direction_hint : {"auto", "forward", "backward"}

    Raises
    ------
    PrecisionLossError
        If any entry's estimated relative error exceeds ``1e-8``.
    """
    z = _as_complex(z)
    n_max = int(n_max)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if direction_hint not in ("auto", "forward", "backward"):
        raise ValueError(f"unknown direction_hint {direction_hint!r}")
    g, segments, est, prefix = _scaled_table(z, n_max, direction_hint)
    bad = np.flatnonzero(~(est <= PRECISION_LIMIT))
    if bad.size:
        i = int(bad[0])
        raise PrecisionLossError(
            f"estimated relative error {est[i]:.3g} at order {i} exceeds "
            f"{PRECISION_LIMIT:g} (z={z!r}, direction={segments[0][2]})",
            index=i, estimate=float(est[i]),
        )
    return WDerivativeTable(
        z=z, scaled=g, log_norm=_log_norm(n_max), segments=segments,
        est_rel_error=est, extended_prefix=prefix,
    )


def zoukowski_phi(mu) -> complex:
    """Inverse Zoukowski map ``phi(mu) = mu + sqrt(mu**2 - 1)`` with ``phi(0) = i``.

    The branch is ``mu + i sqrt(1 - mu**2)`` with the principal root, which
    is analytic off the rays ``mu in (-inf, -1] U [1, inf)``.  Emits a
    :class:`BranchCutWarning` when ``|mu**2 - 1| < 1e-12``.
    """
    mu = _as_complex(mu)
    if abs(mu * mu - 1.0) < 1e-12:
        warnings.warn(f"mu={mu!r} is at a branch point of phi", BranchCutWarning, stacklevel=2)
    return mu + 1j * cmath.sqrt(1.0 - mu * mu)


@dataclass(frozen=True)
class PlancherelRotachResult:
    """Leading asymptotic term, stored as ``value * exp(log_scale)``."""

    mu: complex
    n: int
    value: complex
    phi_mu: complex
    log_scale: float

    def full(self) -> complex:
        """The unscaled value (may overflow for large ``n``)."""
        return self.value * math.exp(self.log_scale)

    def scaled_to(self, log_norm: float) -> complex:
        """The value divided by ``exp(log_norm)``; compare with ``g_{n-1}``."""
        return self.value * math.exp(self.log_scale - log_norm)

    def relative_error(self, table: WDerivativeTable) -> float:
        """``|approx / exact - 1|`` against entry ``n - 1`` of ``table``."""
        k = self.n - 1
        exact = table.scaled[k]
        return abs(self.scaled_to(table.log_norm[k]) / exact - 1.0)


def plancherel_rotach_w(mu, n: int) -> PlancherelRotachResult:
    """Leading term of ``w^(n-1)(mu sqrt(2n))`` for large ``n``.

    .. math::

        w^{(n-1)}(\\mu\\sqrt{2n}) \\approx \\Big(\\frac{2}{n}\\Big)^{n/2}
        \\frac{(n-1)!\\,(-1)^{n-1}}{\\sqrt{\\pi}\\sqrt{1-\\varphi^2}}
        \\exp\\Big(-\\frac{n}{2}(\\varphi-2\\mu)^2\\Big)\\,\\varphi^{-(n-1)}

    with ``phi = zoukowski_phi(mu)``.  The relative remainder is
    ``O(n**-0.5)`` uniformly for small ``|mu|``.

    Parameters
    ----------
    mu : complex
        Scaled argument, ``|mu| <= 0.3``.
    n : int
        ``n >= 2``.
    """
    mu = _as_complex(mu)
    n = int(n)
    if n < 2:
        raise ValueError("n must be >= 2")
    if abs(mu) > PR_MU_WINDOW:
        raise DomainError(f"|mu| = {abs(mu):.3g} outside the validated window |mu| <= {PR_MU_WINDOW}")
    phi = zoukowski_phi(mu)
    expo = -0.5 * n * (phi - 2.0 * mu) ** 2 - (n - 1) * cmath.log(phi)
    log_scale = 0.5 * n * math.log(2.0 / n) + math.lgamma(n) + expo.real
    sign = -1.0 if (n - 1) % 2 else 1.0
    mant = sign / (SQRT_PI * cmath.sqrt(1.0 - phi * phi)) * cmath.exp(1j * expo.imag)
    return PlancherelRotachResult(mu=mu, n=n, value=mant, phi_mu=phi, log_scale=log_scale)


def w_fixed_z_asymptotic(z, n: int) -> PlancherelRotachResult:
    """Leading term of ``w^(n-1)(z)`` for fixed ``z`` and large ``n``.

    ``(2/n)**(n/2) (n-1)! i**(n-1) exp(n/2 + i z sqrt(2n) - z**2/2) / sqrt(2 pi)``,
    log-scaled.  ``mu`` of the result is ``z / sqrt(2n)``.
    """
    z = _as_complex(z)
    n = int(n)
    if n < 2:
        raise ValueError("n must be >= 2")
    if abs(z) > 5.0:
        raise DomainError("fixed-z asymptotics are validated for |z| <= 5")
    expo = 0.5 * n + 1j * z * math.sqrt(2.0 * n) - 0.5 * z * z
    log_scale = (0.5 * n * math.log(2.0 / n) + math.lgamma(n) + expo.real
                 - 0.5 * math.log(2.0 * math.pi))
    mant = (1j) ** ((n - 1) % 4) * cmath.exp(1j * expo.imag)
    mu = z / math.sqrt(2.0 * n)
    return PlancherelRotachResult(mu=mu, n=n, value=mant, phi_mu=zoukowski_phi(mu),
                                  log_scale=log_scale)
