import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import hermite as nph

from hermite_jost import freeop
from hermite_jost.errors import DomainError, OverflowGuardError

lam_strategy = st.builds(complex, st.floats(-5.0, 5.0), st.floats(0.0, 2.0))


def mp_i_pm(lam, n_max, sign, dps=80):
    """``I^+-_n`` from a high-precision forward derivative recurrence."""
    with mpmath.workdps(dps):
        lm = mpmath.mpc(lam.real, lam.imag)
        z = lm / mpmath.sqrt(2) if sign == "plus" else -lm / mpmath.sqrt(2)
        w = [mpmath.exp(-z * z) * mpmath.erfc(-1j * z)]
        w.append(-2 * z * w[0] + 2j / mpmath.sqrt(mpmath.pi))
        for k in range(1, n_max - 1):
            w.append(-2 * z * w[k] - 2 * k * w[k - 1])
        pref = mpmath.exp(lm * lm / 2) / 2
        out = []
        for k in range(n_max):
            s = (-1) ** k if sign == "plus" else 1
            out.append(complex(s * pref * w[k] / mpmath.sqrt(mpmath.factorial(k) * 2 ** k)))
        return np.array(out)


class TestSolutionSequence:
    def test_indexing(self):
        seq = freeop.free_polynomials(0.5, 10)
        assert len(seq) == 10
        assert seq.last_index == 10
        assert seq.at(1) == 1.0
        assert seq.at(2) == 0.5
        pad = seq.padded()
        assert np.isnan(pad[0])
        assert pad[3] == seq.at(3)

    def test_read_only(self):
        seq = freeop.free_polynomials(0.5, 10)
        with pytest.raises(ValueError):
            seq.values[0] = 2.0

    def test_weights(self):
        a = freeop.free_weights(5)
        assert np.isnan(a[0])
        assert np.allclose(a[1:], np.sqrt([1, 2, 3, 4, 5]))


class TestBasis:
    @pytest.mark.parametrize("lam", [0.0, 1.3, -2.7, 1.0 + 0.5j, -0.4 + 2.0j, 6.0])
    @pytest.mark.parametrize("sign", ["plus", "minus"])
    def test_against_high_precision(self, lam, sign):
        n_max = 200
        seq = freeop.i_pm(lam, n_max, sign)
        ref = mp_i_pm(complex(lam), n_max, sign)
        assert np.max(np.abs(seq.values - ref) / np.abs(ref)) < 1e-11

    @settings(max_examples=30, deadline=None)
    @given(lam_strategy, st.sampled_from(["plus", "minus"]))
    def test_solves_free_recurrence(self, lam, sign):
        seq = freeop.i_pm(lam, 400, sign)
        assert np.max(freeop.free_residuals(seq)) < 1e-11

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-4.0, 4.0))
    def test_real_lambda_conjugates(self, lam):
        ip = freeop.i_pm(lam, 100, "plus")
        im = freeop.i_pm(lam, 100, "minus")
        assert np.allclose(ip.values, np.conj(im.values), rtol=1e-12, atol=0)

    @settings(max_examples=30, deadline=None)
    @given(lam_strategy)
    def test_wronskian_constant(self, lam):
        ip = freeop.i_pm(lam, 301, "plus")
        im = freeop.i_pm(lam, 301, "minus")
        n = np.arange(1, 301)
        w = freeop.wronskian(ip, im, freeop.free_weights(301), n)
        ref = freeop.free_wronskian_value(lam)
        assert np.max(np.abs(w - ref)) < 1e-9 * abs(ref)

    def test_decay_in_upper_half_plane(self):
        lam = 1.0 + 1.0j
        ip = freeop.i_pm(lam, 2000, "plus")
        assert abs(ip.at(2000)) < 1e-15 * abs(ip.at(1))

    @pytest.mark.parametrize("lam", [0.7, -1.5 + 0.3j])
    def test_asymptotic_term(self, lam):
        n = 4000
        for sign in ("plus", "minus"):
            seq = freeop.i_pm(lam, n, sign)
            assert abs(freeop.i_pm_asymptotic(lam, n, sign) / seq.at(n) - 1.0) < 0.05

    def test_errors(self):
        with pytest.raises(DomainError):
            freeop.i_pm(9.0, 10, "plus")
        with pytest.raises(ValueError):
            freeop.i_pm(1.0, 10, "up")
        with pytest.raises(ValueError):
            freeop.i_pm(1.0, 1, "plus")
        with pytest.raises(ValueError):
            freeop.i_pm(complex("nan"), 10, "plus")
        with pytest.raises(ValueError):
            freeop.i_pm_asymptotic(1.0, 1, "plus")

    def test_wronskian_mismatched_lambda(self):
        with pytest.raises(ValueError):
            freeop.wronskian(freeop.i_pm(1.0, 5, "plus"), freeop.i_pm(2.0, 5, "minus"),
                             freeop.free_weights(5), 1)

    def test_wronskian_index_guard(self):
        ip, im = freeop.i_pm(1.0, 5, "plus"), freeop.i_pm(1.0, 5, "minus")
        with pytest.raises(IndexError):
            freeop.wronskian(ip, im, freeop.free_weights(5), 5)


class TestPolynomials:
    @pytest.mark.parametrize("lam", [0.0, 0.9, -2.3, 3.7])
    def test_normalized_hermite(self, lam):
        # P_n(lam) = H_{n-1}(lam/sqrt2) / sqrt(2^{n-1} (n-1)!)
        n_max = 60
        p = freeop.free_polynomials(lam, n_max)
        for n in range(1, n_max + 1):
            coef = np.zeros(n)
            coef[-1] = 1.0
            ref = nph.hermval(lam / math.sqrt(2.0), coef) / math.sqrt(2.0 ** (n - 1) * math.factorial(n - 1))
            assert p.at(n) == pytest.approx(ref, rel=1e-10, abs=1e-12)

    def test_hermite_poly_against_numpy(self):
        x = np.linspace(-3, 3, 13)
        for n in (0, 1, 2, 7, 40):
            coef = np.zeros(n + 1)
            coef[-1] = 1.0
            assert np.allclose(freeop.hermite_poly(n, x), nph.hermval(x, coef), rtol=1e-12, atol=0)

    def test_hermite_poly_limits(self):
        with pytest.raises(OverflowGuardError):
            freeop.hermite_poly(151, 0.1)
        with pytest.raises(ValueError):
            freeop.hermite_poly(-1, 0.1)

    def test_overflow_guard(self):
        with pytest.raises(OverflowGuardError):
            freeop.free_polynomials(1.0 + 10.0j, 5000)

    @settings(max_examples=30, deadline=None)
    @given(lam_strategy)
    def test_polynomials_from_basis(self, lam):
        # expand P in the basis I^+, I^- using constant Wronskians
        n_max = 60
        p = freeop.free_polynomials(lam, n_max)
        ip = freeop.i_pm(lam, n_max, "plus")
        im = freeop.i_pm(lam, n_max, "minus")
        a = freeop.free_weights(n_max)
        n = np.arange(1, n_max)
        w_pp = freeop.wronskian(p, ip, a, n)
        w_pm = freeop.wronskian(p, im, a, n)
        w_pm_ref = freeop.free_wronskian_value(lam)
        # P = (W(P, I^-) I^+ - W(P, I^+) I^-) / W(I^+, I^-)
        recon = (w_pm[0] * ip.values - w_pp[0] * im.values) / w_pm_ref
        scale = np.maximum(np.abs(p.values), 1.0)
        assert np.max(np.abs(recon - p.values) / scale) < 1e-9
        assert np.ptp(np.abs(w_pp)) < 1e-9 * max(abs(w_pp[0]), 1.0)
