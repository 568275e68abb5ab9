import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hermite_jost import freeop, jacobi
from hermite_jost.errors import ConfigError, NonPositiveWeightError, OverflowGuardError
from hermite_jost.jacobi import (
    Constant,
    FiniteSupport,
    PerturbationSpec,
    Power,
    Shifted,
    SqrtShift,
    Sum,
    Tabulated,
    Zero,
    build_operator,
    check_conditions,
    parse_family,
)


def power_spec():
    return PerturbationSpec(Power(0.1, 0.5), Power(0.2, 1.0))


class TestFamilies:
    def test_values(self):
        n = np.arange(1, 6)
        assert np.all(Zero()(n) == 0)
        assert np.all(Constant(0.3)(n) == 0.3)
        assert np.allclose(Power(2.0, 0.5)(n), 2.0 / np.sqrt(n))
        assert np.allclose(SqrtShift(2)(n), np.sqrt(n + 2) - np.sqrt(n), rtol=1e-14)
        assert np.allclose(FiniteSupport([1.0, 0.0, -2.0])(n), [1, 0, -2, 0, 0])
        assert np.allclose(Shifted(Power(1.0, 1.0), 1)(n), 1.0 / (n + 1))
        assert np.allclose(Sum(Constant(1.0), Power(1.0, 1.0))(n), 1.0 + 1.0 / n)

    def test_sqrt_shift_no_cancellation(self):
        n = np.array([1e12])
        assert SqrtShift(1)(n)[0] == pytest.approx(0.5e-6, rel=1e-10)

    def test_support(self):
        assert FiniteSupport([1.0, 2.0, 0.0]).support == 2
        assert Power(0.1, 1.0).support is None
        assert Zero().support == 0
        assert Shifted(FiniteSupport([1.0, 2.0, 3.0]), 1).support == 2
        assert Sum(FiniteSupport([1.0]), FiniteSupport([0.0, 1.0])).support == 2

    def test_power_exponent_positive(self):
        with pytest.raises(ValueError):
            Power(1.0, 0.0)
        with pytest.raises(ValueError):
            SqrtShift(-1)

    @pytest.mark.parametrize("fam,s", [(Power(0.3, 0.5), 1.0), (Power(0.2, 1.0), 0.5),
                                       (SqrtShift(1), 1.0), (Shifted(Power(0.1, 0.7), 3), 1.0)])
    def test_tail_bounds_partial_sums(self, fam, s):
        N = 200
        n = np.arange(N + 1, 2_000_001)
        explicit = float(np.sum(np.abs(fam(n)) * n ** -s))
        bound = fam.tail(N, s)
        assert explicit <= bound
        assert bound < 1.5 * explicit + 1e-3

    @pytest.mark.parametrize("fam", [Power(0.3, 0.5), SqrtShift(1), Shifted(Power(0.2, 1.0), 2)])
    def test_diff_tail_bounds(self, fam):
        N = 100
        n = np.arange(N + 1, 1_000_001)
        explicit = float(np.sum(np.abs(fam(n + 1) - fam(n)) * n ** -0.5))
        assert explicit <= fam.diff_tail(N, 0.5)

    def test_divergent_tail(self):
        assert Power(0.1, 0.5).tail(10, 0.5) == math.inf
        assert Constant(1.0).tail(10, 0.5) == math.inf

    def test_tabulated_without_rule(self):
        t = Tabulated([0.1, 0.2])
        assert t.tail(5, 1.0) is None
        assert t.support == 2
        assert np.allclose(t(np.arange(1, 5)), [0.1, 0.2, 0, 0])

    def test_tabulated_with_rule(self):
        t = Tabulated([0.1, 0.2], tail_rule=Power(1.0, 2.0))
        assert t.support is None
        assert np.allclose(t(np.array([3, 4])), [1 / 9, 1 / 16])
        assert t.tail(1, 1.0) >= 0.2 / 2


class TestParsing:
    @pytest.mark.parametrize("token,cls", [("zero", Zero), ("const:0.5", Constant),
                                           ("power:0.1:0.5", Power), ("sqrt-shift:1", SqrtShift),
                                           ("finite:1,2,3", FiniteSupport)])
    def test_tokens(self, token, cls):
        assert isinstance(parse_family(token), cls)

    def test_round_trip(self):
        for fam in (Power(0.1, 0.5), Constant(-0.25), SqrtShift(3), FiniteSupport([0.5, -1.0])):
            again = parse_family(fam.token)
            n = np.arange(1, 20)
            assert np.array_equal(again(n), fam(n))

    @pytest.mark.parametrize("token", ["bogus", "power:1", "const", "table", "sqrt-shift:1:2"])
    def test_bad_tokens(self, token):
        with pytest.raises(ValueError):
            parse_family(token)

    def test_table_token(self):
        fam = parse_family("table", table=np.array([1.0, 2.0]), source="x.txt")
        assert isinstance(fam, Tabulated)
        assert fam.token == "table:x.txt"

    def test_read_file(self, tmp_path):
        p = tmp_path / "pert.txt"
        p.write_text("# n c b\n1 0.1 0.0\n\n2 0.05 -0.1\n3 0.0 0.2\n")
        c, b = jacobi.read_perturbation_file(p)
        assert np.allclose(c, [0.1, 0.05, 0.0])
        assert np.allclose(b, [0.0, -0.1, 0.2])

    @pytest.mark.parametrize("text,line", [("1 0.1 0.0\n3 0.1 0.0\n", 2),
                                           ("1 0.1\n", 1),
                                           ("1 0.1 0.0\n2 x 0.0\n", 2),
                                           ("# c\n1 nan 0.0\n", 2)])
    def test_read_file_errors(self, tmp_path, text, line):
        p = tmp_path / "pert.txt"
        p.write_text(text)
        with pytest.raises(ConfigError) as info:
            jacobi.read_perturbation_file(p)
        assert info.value.line == line
        assert str(info.value).startswith(f"line {line}:")

    def test_read_empty_file(self, tmp_path):
        p = tmp_path / "pert.txt"
        p.write_text("# nothing\n")
        with pytest.raises(ConfigError):
            jacobi.read_perturbation_file(p)


class TestSpec:
    def test_free(self):
        spec = PerturbationSpec.free()
        assert spec.is_free
        assert spec.support_end == 0
        assert spec.series_exponents() == ()

    def test_support_end(self):
        spec = PerturbationSpec(FiniteSupport([0.1, 0.2]), FiniteSupport([0.0, 0.0, 0.5]))
        assert spec.support_end == 3
        assert power_spec().support_end is None

    def test_cropped_coefficients(self):
        spec = power_spec()
        crop = spec.cropped()
        n = np.arange(1, 50)
        a_full = np.sqrt(n + 1) + spec.c(n + 1)
        assert np.allclose(np.sqrt(n) + crop.c(n), a_full, rtol=1e-14)
        assert np.allclose(crop.b(n), spec.b(n + 1))

    def test_series_exponents(self):
        ex = power_spec().series_exponents()
        assert ex[0] == 0.5
        assert all(b > a for a, b in zip(ex, ex[1:]))


class TestAdmissibility:
    def test_power_passes(self):
        rep = check_conditions(power_spec())
        assert rep.passes and not rep.inconclusive
        assert rep.tail_bound is not None and math.isfinite(rep.tail_bound)

    def test_free_passes(self):
        rep = check_conditions(PerturbationSpec.free())
        assert rep.passes
        assert rep.partial_sum == 0.0

    def test_divergent(self):
        rep = check_conditions(PerturbationSpec(Constant(0.1), Zero()))
        assert not rep.passes
        assert rep.diagnostic.startswith("divergent series: sum |c_n|/n")

    def test_constant_b_diverges(self):
        rep = check_conditions(PerturbationSpec(Zero(), Constant(0.5)))
        assert not rep.passes
        assert "sum |b_n|/sqrt(n)" in rep.diagnostic

    def test_tabulated_saturates(self):
        spec = PerturbationSpec(Tabulated([0.1, -0.2, 0.05]), Tabulated([0.3]))
        rep = check_conditions(spec)
        assert rep.passes and rep.saturated and rep.tail_bound is None

    def test_horizon_minimum(self):
        with pytest.raises(ValueError):
            check_conditions(power_spec(), horizon=999)


class TestOperator:
    def test_arrays(self):
        op = build_operator(power_spec(), 100)
        assert np.isnan(op.a[0])
        assert op.a[4] == pytest.approx(2.0 + 0.05)
        assert op.b[2] == pytest.approx(0.1)
        assert op.carleman
        with pytest.raises(ValueError):
            op.a[1] = 0.0

    def test_nonpositive_weight(self):
        with pytest.raises(NonPositiveWeightError) as info:
            build_operator(PerturbationSpec(FiniteSupport([0.0, -2.0]), Zero()), 20)
        assert info.value.index == 2

    def test_horizon_minimum(self):
        with pytest.raises(ValueError):
            build_operator(power_spec(), 5)

    def test_matrix(self):
        op = build_operator(power_spec(), 50)
        m = op.matrix(4)
        assert m.shape == (4, 4)
        assert np.allclose(m, m.T)
        assert m[0, 1] == op.a[1]
        with pytest.raises(IndexError):
            op.matrix(51)

    def test_cropped_operator(self):
        op = build_operator(power_spec(), 100)
        crop = op.cropped
        assert crop.horizon == 99
        assert np.allclose(crop.a[1:], op.a[2:], rtol=1e-14)
        assert np.allclose(crop.b[1:], op.b[2:])

    def test_admissibility_cached(self):
        op = build_operator(power_spec(), 100)
        assert op.admissibility is op.admissibility
        assert op.admissibility.horizon == 4096


class TestRecurrence:
    @settings(max_examples=30, deadline=None)
    @given(st.floats(-4.0, 4.0), st.floats(0.0, 1.0))
    def test_polynomials_are_eigenvector_prefix(self, x, y):
        lam = complex(x, y)
        op = build_operator(power_spec(), 100)
        p = jacobi.solve_recurrence(op, lam, "P", 40)
        m = op.matrix(39)
        lhs = m @ p.values[:39]
        rhs = lam * p.values[:39]
        rhs[-1] -= op.a[39] * p.values[39]
        scale = np.max(np.abs(p.values[:40])) + 1.0
        assert np.max(np.abs(lhs - rhs)) < 1e-10 * scale * (abs(lam) + 10)

    def test_second_kind_initial_values(self):
        op = build_operator(power_spec(), 100)
        q = jacobi.solve_recurrence(op, 0.5, "Q", 10)
        assert q.at(1) == 0
        assert q.at(2) == pytest.approx(1.0 / op.a[1])
        assert np.max(jacobi.jacobi_residuals(op, q)) < 1e-13

    def test_free_reduces_to_hermite(self):
        op = build_operator(PerturbationSpec.free(), 200)
        p = jacobi.solve_recurrence(op, 1.7, "P", 150)
        ref = freeop.free_polynomials(1.7, 150)
        assert np.allclose(p.values, ref.values, rtol=1e-13, atol=0)

    def test_wronskian_of_p_and_q(self):
        # a_n (P_n Q_{n+1} - P_{n+1} Q_n) = 1 for all n
        op = build_operator(power_spec(), 600)
        lam = 0.8 + 0.1j
        p = jacobi.solve_recurrence(op, lam, "P", 500)
        q = jacobi.solve_recurrence(op, lam, "Q", 500)
        w = freeop.wronskian(p, q, op.a, np.arange(1, 500))
        assert np.max(np.abs(w - 1.0)) < 1e-8

    def test_errors(self):
        op = build_operator(power_spec(), 100)
        with pytest.raises(ValueError):
            jacobi.solve_recurrence(op, 0.1, "R", 10)
        with pytest.raises(IndexError):
            jacobi.solve_recurrence(op, 0.1, "P", 101)
        with pytest.raises(ValueError):
            jacobi.solve_recurrence(op, 0.1, "P", 1)
        big = build_operator(power_spec(), 5000)
        with pytest.raises(OverflowGuardError):
            jacobi.solve_recurrence(big, 0.1 + 10j, "P", 5000)


class TestLambda:
    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-1, 1), min_size=31, max_size=31))
    def test_equals_operator_difference(self, vals):
        op = build_operator(power_spec(), 100)
        free = build_operator(PerturbationSpec.free(), 100)
        u = np.array(vals, dtype=complex)
        lhs = jacobi.apply_lambda(op, u, 30)
        rhs = op.matrix(31)[:30] @ u - free.matrix(31)[:30] @ u
        assert np.allclose(lhs, rhs, atol=1e-14)

    def test_accepts_sequence(self):
        op = build_operator(power_spec(), 100)
        seq = freeop.i_pm(1.0, 31, "plus")
        assert np.allclose(jacobi.apply_lambda(op, seq, 30), jacobi.apply_lambda(op, seq.values, 30))

    def test_decay_constant_regression(self):
        # |(Lambda I^+)_n| against (|b_n| + |c_{n+1} - c_n| + |c_n|/sqrt n) n^{-1/4}
        op = build_operator(power_spec(), 4100)
        n_max = 4000
        ip = freeop.i_pm(1.0, n_max + 1, "plus")
        lam_u = np.abs(jacobi.apply_lambda(op, ip, n_max))
        n = np.arange(1, n_max + 1)
        c = op.c[1:n_max + 2]
        env = (np.abs(op.b[n]) + np.abs(c[1:] - c[:-1]) + np.abs(c[:-1]) / np.sqrt(n)) * n ** -0.25
        assert np.max(lam_u / env) == pytest.approx(0.730085433006965, rel=1e-6)

    def test_short_sequence(self):
        op = build_operator(power_spec(), 100)
        with pytest.raises(IndexError):
            jacobi.apply_lambda(op, np.ones(10), 10)
        with pytest.raises(IndexError):
            jacobi.apply_lambda(op, np.ones(200), 150)
