"""Perturbed Hermite Jacobi matrices ``a_n = sqrt(n) + c_n``, diagonal ``b_n``.

A :class:`PerturbationSpec` pairs two sequence families (for ``c_n`` and
``b_n``).  Families know their values, an upper bound on weighted tail sums,
and the exponents of their power-law decay; the latter drive admissibility
verdicts and the tail extrapolation of the Jost series.

The operator is admissible when

    sum_n  |c_n| / n  +  (|c_{n+1} - c_n| + |b_n|) / sqrt(n)  <  inf

and ``c_n = o(sqrt n)``.  Operator arrays use position ``n`` for index
``n`` (slot 0 holds NaN).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import ConfigError, NonPositiveWeightError, OverflowGuardError
from .freeop import GROWTH_BUDGET, SolutionSequence

INF = math.inf


# ---------------------------------------------------------------- families


class Family:
    """Rule ``n -> f(n)`` for ``n >= 1``."""

    token = "family"
    #: leading decay exponents of |f(n)| (empty when finitely supported)
    exponents: tuple = ()
    #: last nonzero index for finitely supported rules, else None
    support: int | None = None

    def __call__(self, n: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def tail(self, N: int, s: float) -> float | None:
        """Upper bound on ``sum_{n>N} |f(n)| n**-s`` (``inf`` if divergent, None if unknown)."""
        raise NotImplementedError

    def diff_tail(self, N: int, s: float) -> float | None:
        """Upper bound on ``sum_{n>N} |f(n+1) - f(n)| n**-s``."""
        raise NotImplementedError

    @property
    def is_zero(self) -> bool:
        return False

    def __repr__(self) -> str:
        return self.token


class Zero(Family):
    token = "zero"
    support = 0

    def __call__(self, n):
        return np.zeros(np.shape(n))

    def tail(self, N, s):
        return 0.0

    def diff_tail(self, N, s):
        return 0.0

    @property
    def is_zero(self):
        return True


def _power_tail(coef: float, e: float, N: int) -> float:
    """Bound on ``coef * sum_{n>N} n**-e`` by the integral from N."""
    if coef == 0.0:
        return 0.0
    if e <= 1.0:
        return INF
    return coef * N ** (1.0 - e) / (e - 1.0)


class Constant(Family):
    def __init__(self, value: float):
        self.value = float(value)
        self.token = f"const:{self.value!r}"
        self.exponents = (0.0,) if self.value else ()
        self.support = None if self.value else 0

    def __call__(self, n):
        return np.full(np.shape(n), self.value)

    def tail(self, N, s):
        return _power_tail(abs(self.value), s, N)

    def diff_tail(self, N, s):
        return 0.0

    @property
    def is_zero(self):
        return self.value == 0.0


class Power(Family):
    """``alpha * n**-p`` with ``p > 0``."""

    def __init__(self, alpha: float, p: float):
        if not p > 0:
            raise ValueError(f"power exponent must be > 0, got {p!r}")
        self.alpha, self.p = float(alpha), float(p)
        self.token = f"power:{self.alpha!r}:{self.p!r}"
        self.exponents = (self.p,) if self.alpha else ()
        self.support = None if self.alpha else 0

    def __call__(self, n):
        return self.alpha * np.asarray(n, dtype=float) ** (-self.p)

    def tail(self, N, s):
        return _power_tail(abs(self.alpha), self.p + s, N)

    def diff_tail(self, N, s):
        # |f(n+1) - f(n)| <= |alpha| p n**-(p+1)
        return _power_tail(abs(self.alpha) * self.p, self.p + 1.0 + s, N)

    @property
    def is_zero(self):
        return self.alpha == 0.0


class SqrtShift(Family):
    """``sqrt(n + k) - sqrt(n)`` for an integer ``k >= 0``."""

    def __init__(self, k: int):
        k = int(k)
        if k < 0:
            raise ValueError("sqrt-shift offset must be >= 0")
        self.k = k
        self.token = f"sqrt-shift:{k}"
        self.exponents = (0.5,) if k else ()
        self.support = None if k else 0

    def __call__(self, n):
        n = np.asarray(n, dtype=float)
        # k / (sqrt(n+k) + sqrt(n)) avoids cancellation
        return self.k / (np.sqrt(n + self.k) + np.sqrt(n))

    def tail(self, N, s):
        return _power_tail(0.5 * self.k, 0.5 + s, N)

    def diff_tail(self, N, s):
        return _power_tail(0.25 * self.k, 1.5 + s, N)

    @property
    def is_zero(self):
        return self.k == 0


class FiniteSupport(Family):
    """Explicit values ``f(1), ..., f(M)``; zero afterwards."""

    def __init__(self, values):
        self.values = np.asarray(values, dtype=float).copy()
        if self.values.ndim != 1:
            raise ValueError("finite support values must be a flat list")
        nz = np.flatnonzero(self.values)
        self.support = int(nz[-1]) + 1 if nz.size else 0
        self.token = "finite:" + ",".join(repr(float(v)) for v in self.values)

    def __call__(self, n):
        n = np.asarray(n)
        out = np.zeros(n.shape)
        inside = (n >= 1) & (n <= self.values.shape[0])
        out[inside] = self.values[n[inside] - 1]
        return out

    def tail(self, N, s):
        n = np.arange(N + 1, self.support + 1)
        return float(np.sum(np.abs(self(n)) * n ** (-float(s)))) if n.size else 0.0

    def diff_tail(self, N, s):
        n = np.arange(N + 1, self.support + 1)
        if not n.size:
            return 0.0
        return float(np.sum(np.abs(self(n + 1) - self(n)) * n ** (-float(s))))

    @property
    def is_zero(self):
        return self.support == 0


class Tabulated(Family):
    """Values read from a table, continued by an optional analytic tail rule.

    Without a tail rule the family is zero beyond the table and every tail
    bound is unknown (``None``), which makes admissibility inconclusive.
    """

    def __init__(self, values, tail_rule: Family | None = None, source: str = "table"):
        self.values = np.asarray(values, dtype=float).copy()
        self.tail_rule = tail_rule
        self.token = f"table:{source}"
        self.exponents = tail_rule.exponents if tail_rule is not None else ()
        if tail_rule is None or tail_rule.support == 0:
            nz = np.flatnonzero(self.values)
            self.support = int(nz[-1]) + 1 if nz.size else 0
        else:
            self.support = None

    def __call__(self, n):
        n = np.asarray(n)
        out = np.zeros(n.shape)
        m = self.values.shape[0]
        inside = (n >= 1) & (n <= m)
        out[inside] = self.values[n[inside] - 1]
        if self.tail_rule is not None and np.any(n > m):
            out[n > m] = self.tail_rule(n[n > m])
        return out

    def _explicit(self, N, s, diff):
        m = self.values.shape[0]
        n = np.arange(N + 1, m + 1)
        if not n.size:
            return 0.0
        v = np.abs(self(n + 1) - self(n)) if diff else np.abs(self(n))
        return float(np.sum(v * n ** (-float(s))))

    def tail(self, N, s):
        if self.tail_rule is None:
            return None
        m = self.values.shape[0]
        return self._explicit(N, s, False) + self.tail_rule.tail(max(N, m), s)

    def diff_tail(self, N, s):
        if self.tail_rule is None:
            return None
        m = self.values.shape[0]
        return self._explicit(N, s, True) + self.tail_rule.diff_tail(max(N, m), s)


class Sum(Family):
    def __init__(self, *parts: Family):
        self.parts = parts
        self.token = "+".join(p.token for p in parts)
        self.exponents = tuple(sorted({e for p in parts for e in p.exponents}))
        sup = [p.support for p in parts]
        self.support = None if any(s is None for s in sup) else max(sup, default=0)

    def __call__(self, n):
        return sum(p(n) for p in self.parts)

    def _combine(self, vals):
        if any(v is None for v in vals):
            return None
        return float(sum(vals))

    def tail(self, N, s):
        return self._combine([p.tail(N, s) for p in self.parts])

    def diff_tail(self, N, s):
        return self._combine([p.diff_tail(N, s) for p in self.parts])

    @property
    def is_zero(self):
        return all(p.is_zero for p in self.parts)


class Shifted(Family):
    """``n -> f(n + k)``."""

    def __init__(self, base: Family, k: int):
        self.base, self.k = base, int(k)
        self.token = f"shift({base.token},{self.k})"
        self.exponents = base.exponents
        self.support = None if base.support is None else max(base.support - self.k, 0)

    def __call__(self, n):
        return self.base(np.asarray(n) + self.k)

    def _scaled(self, v, N, s):
        if v is None or v == INF:
            return v
        # n**-s <= (1 + k/(N+1))**s (n+k)**-s for n > N
        return v * (1.0 + self.k / (N + 1.0)) ** max(s, 0.0)

    def tail(self, N, s):
        return self._scaled(self.base.tail(N + self.k, s), N, s)

    def diff_tail(self, N, s):
        return self._scaled(self.base.diff_tail(N + self.k, s), N, s)

    @property
    def is_zero(self):
        return self.base.is_zero


def parse_family(token: str, *, table: np.ndarray | None = None, tail: Family | None = None,
                 source: str = "table") -> Family:
    """Build a family from a ``kind[:arg[:arg]]`` token.

    Recognized kinds: ``zero``, ``const:v``, ``power:alpha:p``,
    ``sqrt-shift:k``, ``finite:v1,v2,...`` and ``table`` (values supplied via
    ``table``, optional tail rule via ``tail``).
    """
    parts = token.strip().split(":")
    kind = parts[0].strip().lower()
    args = parts[1:]

    def need(count):
        if len(args) != count:
            raise ValueError(f"'{kind}' takes {count} argument(s), got {len(args)}")

    if kind == "zero":
        need(0)
        return Zero()
    if kind in ("const", "constant"):
        need(1)
        return Constant(float(args[0]))
    if kind == "power":
        need(2)
        return Power(float(args[0]), float(args[1]))
    if kind in ("sqrt-shift", "sqrtshift"):
        need(1)
        return SqrtShift(int(args[0]))
    if kind == "finite":
        need(1)
        return FiniteSupport([float(v) for v in args[0].split(",") if v.strip()])
    if kind in ("table", "file"):
        if table is None:
            raise ValueError("tabulated family needs table values")
        return Tabulated(table, tail, source=source)
    raise ValueError(f"unknown family '{kind}'")


def read_perturbation_file(path) -> tuple[np.ndarray, np.ndarray]:
    """Read ``n c_n b_n`` lines (1-based, contiguous) into arrays ``c``, ``b``.

    Blank lines and lines starting with ``#`` are skipped.

    Raises
    ------
    ConfigError
        With the offending line number.
    """
    c, b = [], []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        fields = s.split()
        if len(fields) != 3:
            raise ConfigError(f"expected 'n c_n b_n', got {len(fields)} field(s)", line=lineno)
        try:
            n = int(fields[0])
            cv, bv = float(fields[1]), float(fields[2])
        except ValueError as exc:
            raise ConfigError(f"cannot parse numbers: {exc}", line=lineno) from None
        if n != len(c) + 1:
            raise ConfigError(f"index {n} out of sequence (expected {len(c) + 1})", line=lineno)
        if not (math.isfinite(cv) and math.isfinite(bv)):
            raise ConfigError("non-finite value", line=lineno)
        c.append(cv)
        b.append(bv)
    if not c:
        raise ConfigError("perturbation file is empty")
    return np.array(c), np.array(b)


# ------------------------------------------------------------ perturbation


@dataclass(frozen=True)
class PerturbationSpec:
    """Perturbation ``c_n = a_n - sqrt(n)`` and diagonal ``b_n``."""

    c: Family = field(default_factory=Zero)
    b: Family = field(default_factory=Zero)
    description: str = ""

    @classmethod
    def free(cls) -> "PerturbationSpec":
        return cls(Zero(), Zero(), "free")

    @property
    def label(self) -> str:
        return self.description or f"c={self.c.token} b={self.b.token}"

    @property
    def is_free(self) -> bool:
        return self.c.is_zero and self.b.is_zero

    @property
    def support_end(self) -> int | None:
        """Last index where ``c_n`` or ``b_n`` is nonzero; None if unbounded."""
        if self.c.support is None or self.b.support is None:
            return None
        return max(self.c.support, self.b.support)

    def cropped(self) -> "PerturbationSpec":
        """Spec of the matrix with its first row and column removed.

        ``a'_n = a_{n+1}`` gives ``c'_n = sqrt(n+1) - sqrt(n) + c_{n+1}``;
        ``b'_n = b_{n+1}``.
        """
        c = Sum(SqrtShift(1), Shifted(self.c, 1)) if not self.c.is_zero else SqrtShift(1)
        b = Shifted(self.b, 1) if not self.b.is_zero else Zero()
        return PerturbationSpec(c, b, f"crop({self.label})")

    def series_exponents(self) -> tuple:
        """Decay exponents of the Jost-series tail, leading ones first.

        A term ``c_k ~ k**-p`` leaves a tail ``~ N**-p`` and ``b_k ~ k**-q``
        a tail ``~ N**-(q - 1/2)``; both come with half-integer corrections
        and second-order cross terms.
        """
        base = [e for e in self.c.exponents] + [e - 0.5 for e in self.b.exponents]
        base = [e for e in base if e > 0]
        if not base:
            return ()
        seeds = set(base) | {x + y for x in base for y in base}
        lo = min(base)
        cand = sorted({round(s + j / 2.0, 12) for s in seeds for j in range(8)
                       if s + j / 2.0 <= lo + 3.0})
        out = []
        for e in cand:
            if not out or e - out[-1] > 0.05:
                out.append(e)
        return tuple(out)


# --------------------------------------------------------- admissibility


@dataclass(frozen=True)
class AdmissibilityReport:
    passes: bool
    partial_sum: float
    tail_bound: float | None
    small_o_check: bool
    saturated: bool
    inconclusive: bool
    horizon: int
    diagnostic: str


def _series_terms(spec: PerturbationSpec, horizon: int) -> np.ndarray:
    n = np.arange(1, horizon + 2)
    c = spec.c(n)
    b = spec.b(n[:-1])
    nn = n[:-1].astype(float)
    return np.abs(c[:-1]) / nn + (np.abs(c[1:] - c[:-1]) + np.abs(b)) / np.sqrt(nn)


def check_conditions(spec: PerturbationSpec, horizon: int = 4096) -> AdmissibilityReport:
    """Admissibility of ``spec`` by analytic tails and numerical saturation.

    Parameters
    ----------
    spec : PerturbationSpec
    horizon : int
        Number of series terms summed explicitly, ``>= 1000``.

    Returns
    -------
    AdmissibilityReport
        ``passes`` requires ``c_n = o(sqrt n)`` together with either a
        finite analytic tail bound or a saturated partial sum (relative
        increment below ``1e-9`` over the last decade of indices).
        ``inconclusive`` marks the case where neither applies.
    """
    horizon = int(horizon)
    if horizon < 1000:
        raise ValueError("horizon must be >= 1000")
    terms = _series_terms(spec, horizon)
    csum = np.cumsum(terms)
    total = float(csum[-1])
    decade = horizon // 10
    increment = total - float(csum[decade - 1])
    saturated = total == 0.0 or increment <= 1e-9 * total

    pieces = {
        "sum |c_n|/n": spec.c.tail(horizon, 1.0),
        "sum |c_{n+1}-c_n|/sqrt(n)": spec.c.diff_tail(horizon, 0.5),
        "sum |b_n|/sqrt(n)": spec.b.tail(horizon, 0.5),
    }
    if any(v == INF for v in pieces.values()):
        tail_bound = INF
    elif any(v is None for v in pieces.values()):
        tail_bound = None
    else:
        tail_bound = float(sum(pieces.values()))

    # c_n / sqrt(n) must keep shrinking: compare the last two decades
    n = np.arange(1, horizon + 1)
    ratio = np.abs(spec.c(n)) / np.sqrt(n)
    late = float(ratio[decade:].max()) if ratio[decade:].size else 0.0
    early = float(ratio[decade // 10:decade].max()) if decade >= 10 else late
    analytic_o = all(e > -0.5 for e in spec.c.exponents) if spec.c.support is None else True
    small_o = late <= 1e-14 or (late <= 0.5 * early and analytic_o)

    if tail_bound == INF:
        div = ", ".join(k for k, v in pieces.items() if v == INF)
        return AdmissibilityReport(False, total, INF, small_o, saturated, False, horizon,
                                   f"divergent series: {div} ({spec.label})")
    if tail_bound is not None:
        passes = small_o
        diag = "analytic tail bound" if passes else "c_n is not o(sqrt n)"
        return AdmissibilityReport(passes, total, tail_bound, small_o, saturated, False,
                                   horizon, diag)
    passes = small_o and saturated
    diag = ("numerical saturation" if passes else
            "no tail rule and partial sums not saturated; verdict inconclusive")
    return AdmissibilityReport(passes, total, None, small_o, saturated, not passes, horizon, diag)


# ---------------------------------------------------------------- operator


class JacobiOperator:
    """Immutable prefix of the Jacobi matrix of a :class:`PerturbationSpec`.

    Attributes
    ----------
    spec : PerturbationSpec
    horizon : int
        Largest index ``n`` for which ``a_n``, ``b_n`` and ``c_n`` are cached.
    a, b, c : ndarray
        ``a[n] = sqrt(n) + c[n]``, ``b[n]`` for ``1 <= n <= horizon``; slot 0 is NaN.
    carleman : bool
        Always True: ``a_n ~ sqrt(n)`` makes ``sum 1/a_n`` diverge.
    """

    def __init__(self, spec: PerturbationSpec, horizon: int):
        self.spec = spec
        self.horizon = int(horizon)
        n = np.arange(1, self.horizon + 1)
        c = np.empty(self.horizon + 1)
        b = np.empty(self.horizon + 1)
        c[0] = b[0] = np.nan
        c[1:] = spec.c(n)
        b[1:] = spec.b(n)
        a = np.empty(self.horizon + 1)
        a[0] = np.nan
        a[1:] = np.sqrt(n) + c[1:]
        bad = np.flatnonzero(~(a[1:] > 0))
        if bad.size:
            i = int(bad[0]) + 1
            raise NonPositiveWeightError(i, float(a[i]))
        for arr in (a, b, c):
            arr.setflags(write=False)
        self.a, self.b, self.c = a, b, c
        self.carleman = True

    def __repr__(self):
        return f"JacobiOperator({self.spec.label}, horizon={self.horizon})"

    @cached_property
    def admissibility(self) -> AdmissibilityReport:
        return check_conditions(self.spec, max(self.horizon, 4096))

    @cached_property
    def cropped(self) -> "JacobiOperator":
        """Operator with the first row and column removed."""
        return JacobiOperator(self.spec.cropped(), self.horizon - 1)

    def matrix(self, N: int) -> np.ndarray:
        """Dense ``N x N`` leading block (for tests and small checks)."""
        N = int(N)
        if N > self.horizon:
            raise IndexError("N exceeds the operator horizon")
        return (np.diag(self.b[1:N + 1]) + np.diag(self.a[1:N], 1) + np.diag(self.a[1:N], -1))


def build_operator(spec: PerturbationSpec, horizon: int) -> JacobiOperator:
    """Cache ``a_n, b_n, c_n`` for ``n <= horizon`` and verify ``a_n > 0``."""
    if horizon < 10:
        raise ValueError("horizon must be >= 10")
    return JacobiOperator(spec, horizon)


def _as_padded(u, n_max: int) -> np.ndarray:
    if isinstance(u, SolutionSequence):
        if u.start_index != 1 or u.last_index < n_max + 1:
            raise IndexError(f"sequence must cover indices 1..{n_max + 1}")
        return u.padded()
    x = np.asarray(u, dtype=complex)
    if x.shape[0] < n_max + 1:
        raise IndexError(f"sequence must cover indices 1..{n_max + 1}")
    return np.concatenate(([np.nan], x))


def apply_lambda(op: JacobiOperator, u, n_max: int) -> np.ndarray:
    """Perturbation term ``(Lambda u)_n`` for ``n = 1..n_max``.

    ``(Lambda u)_1 = b_1 u_1 + c_1 u_2`` and
    ``(Lambda u)_n = c_{n-1} u_{n-1} + b_n u_n + c_n u_{n+1}``, i.e. the
    action of the operator minus that of the free one.

    Parameters
    ----------
    u : SolutionSequence or array_like
        Covers indices ``1..n_max+1`` (arrays are read as ``u_1, u_2, ...``).

    Returns
    -------
    ndarray
        Element ``n-1`` holds ``(Lambda u)_n``.
    """
    if n_max > op.horizon:
        raise IndexError("n_max exceeds the operator horizon")
    x = _as_padded(u, n_max)
    n = np.arange(1, n_max + 1)
    out = op.b[n] * x[n] + op.c[n] * x[n + 1]
    out[1:] += op.c[n[1:] - 1] * x[n[1:] - 1]
    return out


def solve_recurrence(op: JacobiOperator, lam, kind: str, n_max: int) -> SolutionSequence:
    """Polynomials of the first (``kind="P"``) or second (``"Q"``) kind, ``n = 1..n_max``.

    Forward recurrence from ``P_1 = 1, P_2 = (lam - b_1)/a_1`` or
    ``Q_1 = 0, Q_2 = 1/a_1``.

    Raises
    ------
    OverflowGuardError
        If ``|Im lam| sqrt(n_max) > 600``.
    """
    lam = complex(lam)
    if kind not in ("P", "Q"):
        raise ValueError("kind must be 'P' or 'Q'")
    if n_max > op.horizon:
        raise IndexError("n_max exceeds the operator horizon")
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    if abs(lam.imag) * math.sqrt(n_max) > GROWTH_BUDGET:
        raise OverflowGuardError("|Im lambda| sqrt(n_max) exceeds 600")
    a1 = op.a[1]
    if kind == "P":
        u1, u2 = 1.0 + 0j, (lam - op.b[1]) / a1
    else:
        u1, u2 = 0j, 1.0 / a1 + 0j
    u = _kernels.three_term(lam, op.a, op.b, u1, u2, n_max)
    return SolutionSequence(lam, 1, u[1:].copy(), kind)


def jacobi_residuals(op: JacobiOperator, u: SolutionSequence) -> np.ndarray:
    """Relative residuals of ``a_{n-1}u_{n-1} + b_n u_n + a_n u_{n+1} = lam u_n``, n >= 2."""
    x = u.padded()
    n = np.arange(2, u.last_index)
    t1 = op.a[n - 1] * x[n - 1]
    t2 = (op.b[n] - u.lam) * x[n]
    t3 = op.a[n] * x[n + 1]
    den = np.abs(t1) + np.abs(t2) + np.abs(t3)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.abs(t1 + t2 + t3) / den
    return np.where(den > 0, r, 0.0)
