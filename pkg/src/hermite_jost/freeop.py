"""Solutions of the free Hermite recurrence ``sqrt(n-1) u_{n-1} + sqrt(n) u_{n+1} = lam u_n``.

The basis ``I^+``, ``I^-`` is built from Faddeeva derivatives,

    I^+_n(lam) = (-1)**(n-1) e^{lam**2/2} w^(n-1)(lam/sqrt2) / sqrt((n-1)! 2**(n+1)),
    I^-_n(lam) =             e^{lam**2/2} w^(n-1)(-lam/sqrt2) / sqrt((n-1)! 2**(n+1)),

and the polynomials of the first kind ``P0_n = I^+_n + I^-_n`` are normalized
Hermite polynomials.  Sequences are 1-based: ``values[k]`` holds ``u_{start+k}``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError, OverflowGuardError
from .special import w_derivative_table

KINDS = ("P", "Q", "P0", "Iplus", "Iminus", "general")
# |lam| beyond which the I-basis has not been validated
LAMBDA_WINDOW = 8.0
# keep exp(|Im lam| sqrt(n)) inside the double exponent range
GROWTH_BUDGET = 600.0


@dataclass(frozen=True)
class SolutionSequence:
    """Finite stretch ``u_start, u_{start+1}, ...`` of a recurrence solution."""

    lam: complex
    start_index: int
    values: np.ndarray
    kind: str = "general"

    def __post_init__(self):
        if self.start_index < 1:
            raise ValueError("start_index must be >= 1")
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        self.values.setflags(write=False)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def last_index(self) -> int:
        return self.start_index + len(self) - 1

    def at(self, n):
        """Value(s) at index ``n`` (int or integer array)."""
        k = np.asarray(n) - self.start_index
        if np.any(k < 0) or np.any(k >= len(self)):
            raise IndexError(f"index {n} outside [{self.start_index}, {self.last_index}]")
        return self.values[k]

    def padded(self) -> np.ndarray:
        """Array ``u`` with ``u[n] = u_n``; slots before ``start_index`` are NaN."""
        out = np.full(self.last_index + 1, np.nan, dtype=complex)
        out[self.start_index:] = self.values
        return out


def free_weights(n_max: int) -> np.ndarray:
    """``a[n] = sqrt(n)`` for ``n = 1..n_max`` (slot 0 is NaN)."""
    a = np.sqrt(np.arange(n_max + 1, dtype=float))
    a[0] = np.nan
    return a


def free_residuals(u: SolutionSequence) -> np.ndarray:
    """Relative residuals of the free recurrence at interior indices."""
    x = u.padded()
    n = np.arange(max(u.start_index + 1, 2), u.last_index)
    lhs1 = np.sqrt(n - 1.0) * x[n - 1]
    lhs2 = np.sqrt(n) * x[n + 1]
    rhs = u.lam * x[n]
    den = np.abs(lhs1) + np.abs(lhs2) + np.abs(rhs)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.abs(lhs1 + lhs2 - rhs) / den
    return np.where(den > 0, r, 0.0)


def _check_lambda(lam) -> complex:
    lam = complex(lam)
    if not (math.isfinite(lam.real) and math.isfinite(lam.imag)):
        raise ValueError("lambda must be finite")
    return lam


def i_pm(lam, n_max: int, sign: str) -> SolutionSequence:
    """The solution ``I^+`` (``sign="plus"``) or ``I^-`` for ``n = 1..n_max``.

    Both come from one Faddeeva derivative table at ``+-lam/sqrt2``; the
    recurrence direction (forward or Miller backward) is chosen there.  For
    ``Im lam > 0`` the member ``I^+`` decays like ``exp(-Im lam sqrt n)``
    and is produced by backward recurrence.

    Parameters
    ----------
    lam : complex
        Spectral parameter, ``|lam| <= 8``.
    n_max : int
        Last index, ``>= 2``.
    sign : {"plus", "minus"}

    Raises
    ------
    PrecisionLossError
        Propagated from :func:`~hermite_jost.special.w_derivative_table`.
    """
    lam = _check_lambda(lam)
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    if abs(lam) > LAMBDA_WINDOW:
        raise DomainError(f"|lambda| = {abs(lam):.3g} exceeds the validated window {LAMBDA_WINDOW}")
    if sign not in ("plus", "minus"):
        raise ValueError("sign must be 'plus' or 'minus'")
    z = lam / math.sqrt(2.0) if sign == "plus" else -lam / math.sqrt(2.0)
    table = w_derivative_table(z, n_max - 1)
    # scaled g_k = w^(k)/sqrt(k! 2**k); I_{k+1} = s_k e^{lam^2/2} g_k / 2
    vals = table.scaled * (0.5 * cmath.exp(0.5 * lam * lam))
    if sign == "plus":
        vals[1::2] *= -1.0
    return SolutionSequence(lam, 1, vals, "Iplus" if sign == "plus" else "Iminus")


def i_pm_asymptotic(lam, n: int, sign: str) -> complex:
    """Leading term ``(-+i)**(n-1) exp(lam**2/4 +- i lam sqrt n) / (8 pi n)**(1/4)``."""
    lam = _check_lambda(lam)
    if n < 2:
        raise ValueError("n must be >= 2")
    if sign not in ("plus", "minus"):
        raise ValueError("sign must be 'plus' or 'minus'")
    s = 1 if sign == "plus" else -1
    phase = (-s * 1j) ** ((n - 1) % 4)
    return phase * cmath.exp(0.25 * lam * lam + s * 1j * lam * math.sqrt(n)) / (8.0 * math.pi * n) ** 0.25


def free_polynomials(lam, n_max: int) -> SolutionSequence:
    """Polynomials of the first kind of the free operator, ``n = 1..n_max``.

    Raises
    ------
    OverflowGuardError
        If ``|Im lam| sqrt(n_max) > 600``.
    """
    lam = _check_lambda(lam)
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    if abs(lam.imag) * math.sqrt(n_max) > GROWTH_BUDGET:
        raise OverflowGuardError("|Im lambda| sqrt(n_max) exceeds 600")
    a = free_weights(n_max + 1)
    b = np.zeros(n_max + 2)
    u = _kernels.three_term(lam, a, b, 1.0 + 0j, lam, n_max)
    return SolutionSequence(lam, 1, u[1:].copy(), "P0")


def hermite_poly(n: int, x):
    """Physicists' Hermite polynomial ``H_n(x)`` by forward recurrence.

    ``H_{k+1} = 2 x H_k - 2 k H_{k-1}``, ``H_0 = 1``, ``H_1 = 2x``; limited to
    ``n <= 150``.
    """
    n = int(n)
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > 150:
        raise OverflowGuardError("hermite_poly is limited to n <= 150")
    h0, h1 = 1.0 + 0 * x, 2.0 * x
    if n == 0:
        return h0
    for k in range(1, n):
        h0, h1 = h1, 2.0 * x * h1 - 2.0 * k * h0
    return h1


def wronskian(u: SolutionSequence, v: SolutionSequence, weights, n):
    """Discrete Wronskian ``a_n (u_n v_{n+1} - u_{n+1} v_n)``.

    Parameters
    ----------
    u, v : SolutionSequence
        Sequences at the same spectral parameter covering ``n`` and ``n+1``.
    weights : array_like
        ``weights[n] = a_n`` (slot 0 unused).
    n : int or array of int
    """
    if u.lam != v.lam:
        raise ValueError("sequences belong to different spectral parameters")
    n = np.asarray(n)
    weights = np.asarray(weights)
    if np.any(n < 1) or np.any(n >= weights.shape[0]):
        raise IndexError("weights do not cover the requested index")
    w = weights[n] * (u.at(n) * v.at(n + 1) - u.at(n + 1) * v.at(n))
    return complex(w) if w.ndim == 0 else w


def free_wronskian_value(lam) -> complex:
    """Closed form of ``W(I^+, I^-)``: ``i exp(lam**2/2) / sqrt(2 pi)``."""
    lam = _check_lambda(lam)
    return 1j * cmath.exp(0.5 * lam * lam) / math.sqrt(2.0 * math.pi)
