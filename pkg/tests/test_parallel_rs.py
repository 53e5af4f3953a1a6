import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ampsearch.errors import BoundError
from ampsearch.grover import optimal_steps_simple
from ampsearch.parallel_rs import (
    LIMIT_MATRIX,
    PAIRED_PATTERN,
    RSReducedState,
    d_matrix,
    optimal_steps_rs,
    ortho_scaling,
    rs_closed_form_deviation,
    rs_exact_step,
    rs_limit_matrix,
    rs_matrix,
    rs_ode_closed_form,
    rs_paired_matrix,
    rs_trace,
    rs_x_phase,
    rs_y_phase,
    speedup,
    theorem1_check,
)
from ampsearch.statevector import StateVector, rs_step


def expanded_recurrence_matrix(N):
    """Columns of the expanded two-phase recurrences, typed in by hand."""
    p, q = 1 - 2 / N, 1 - 1 / N
    return np.array(
        [
            [p * p, 2 * q * p, 4 * q * q, -2 * p * q],
            [-2 / N * p, p * p, 2 * p * q, 4 / N * q],
            [4 / N**2, -p * 2 / N, p * p, 2 / N * p],
            [-p * 2 / N, -4 / N * q, 2 * q * p, -p * p],
        ]
    )


def leading_order_matrix(N):
    return np.array(
        [[1, 2, 4, -2], [-2 / N, 1, 2, 4 / N], [4 / N**2, -2 / N, 1, 2 / N], [-2 / N, 4 / N, 2, -1]]
    )


def statevector_column(n, col):
    """Apply one brute-force step to a class-constant state with one class set to 1."""
    N = 2**n
    e1, e2 = 1, N - 2
    t = np.zeros((N, N), dtype=complex)
    vals = np.eye(4)[col]
    rest_x = np.arange(N) != e1
    rest_y = np.arange(N) != e2
    t[e1, e2] = vals[0]
    t[e1, rest_y] = vals[1]
    t[np.ix_(rest_x, rest_y)] = vals[2]
    t[rest_x, e2] = vals[3]
    s = StateVector(n, 2, t.ravel())
    rs_step(s, e1, e2)
    out = s.tensor()
    return np.array([out[e1, e2], out[e1, rest_y][0], out[np.ix_(rest_x, rest_y)][0, 0], out[rest_x, e2][0]])


class TestExactStep:
    @pytest.mark.parametrize("n", [2, 3, 5, 7])
    def test_matrix_against_statevector(self, n):
        N = 2**n
        brute = np.column_stack([statevector_column(n, c) for c in range(4)])
        assert np.max(np.abs(rs_matrix(N) - brute)) <= 1e-12

    @pytest.mark.parametrize("n", [2, 6, 10, 20])
    def test_matches_expanded_recurrences(self, n):
        N = 2**n
        assert np.max(np.abs(rs_matrix(N) - expanded_recurrence_matrix(N))) <= 1e-14

    @pytest.mark.parametrize("n", [10, 16, 20])
    def test_leading_order_matrix(self, n):
        N = 2**n
        diff = np.abs(rs_matrix(N) - leading_order_matrix(N))
        assert diff.max() <= 10 / N
        # the leading-order (4, 2) entry is +4/N, the exact one is negative
        assert rs_matrix(N)[3, 1].real == pytest.approx(-4 / N * (1 - 1 / N))

    def test_leading_difference_N20(self):
        N = 2**20
        s = RSReducedState.initial(N)
        b1 = rs_exact_step(s).b
        assert abs((b1 - s.b) - (2 * s.a + 4 * s.alpha - 2 * s.beta)) <= 1e-10

    def test_zero(self):
        z = rs_exact_step(RSReducedState(0, 0, 0, 0, 64))
        np.testing.assert_array_equal(z.as_vector(), 0)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 20), st.lists(st.floats(-1, 1), min_size=8, max_size=8))
    def test_phases_compose_to_matrix(self, n, xs):
        N = 2**n
        v = np.array(xs[:4]) + 1j * np.array(xs[4:])
        s = RSReducedState.from_vector(v, N)
        two_phase = rs_x_phase(rs_y_phase(s)).as_vector()
        assert np.max(np.abs(two_phase - rs_matrix(N) @ v)) <= 1e-12 * max(1, np.abs(v).max()) * 10

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 20), st.lists(st.floats(-1, 1), min_size=8, max_size=8))
    def test_phases_preserve_norm(self, n, xs):
        N = 2**n
        s = RSReducedState.from_vector(np.array(xs[:4]) + 1j * np.array(xs[4:]), N)
        for phase in (rs_y_phase, rs_x_phase):
            assert phase(s).norm() == pytest.approx(s.norm(), rel=1e-9, abs=1e-12)

    def test_raw_entry_N20(self):
        assert abs(rs_matrix(2**20)[1, 0] - (-2 / 2**20)) <= 1e-9

    def test_invalid(self):
        with pytest.raises(ValueError):
            rs_matrix(24)
        with pytest.raises(ValueError):
            rs_matrix(16, "weird")


class TestOrtho:
    @pytest.mark.parametrize("n", [2, 4, 10, 16, 20])
    def test_unitary(self, n):
        u = rs_matrix(2**n, "ortho")
        assert np.max(np.abs(u @ u.conj().T - np.eye(4))) <= 1e-10

    @pytest.mark.parametrize("n", [4, 12])
    def test_change_of_basis(self, n):
        N = 2**n
        s = ortho_scaling(N)
        assert np.max(np.abs(rs_matrix(N, "ortho") - s @ rs_matrix(N) @ np.linalg.inv(s))) <= 1e-12

    @pytest.mark.parametrize("n", [10, 16, 20])
    def test_size_scaling_is_leading_order(self, n):
        # diag(1, sqrt(N), N, sqrt(N)) gives the same matrix up to O(1/N)
        N = 2**n
        s = np.diag([1, math.sqrt(N), N, math.sqrt(N)])
        approx = s @ rs_matrix(N) @ np.linalg.inv(s)
        assert np.max(np.abs(approx - rs_matrix(N, "ortho"))) <= 10 / N

    def test_entry_N20(self):
        N = 2**20
        assert abs(rs_matrix(N, "ortho")[0, 1] - 2 / math.sqrt(N)) <= 10 / N


class TestTrace:
    def test_start(self):
        np.testing.assert_allclose(rs_trace(1024, 0).values[0], [1 / 1024] * 4)

    def test_N1024(self):
        tr = rs_trace(1024, 40)
        assert abs(tr.peak_step() - 35) <= 2
        assert tr.probabilities().max() >= 1 - 10 / 32

    @settings(max_examples=20, deadline=None)
    @given(st.integers(2, 20), st.integers(0, 400))
    def test_norm(self, n, steps):
        N = 2**n
        tr = rs_trace(N, steps)
        m = N - 1
        norms = (np.abs(tr.values) ** 2) @ np.array([1, m, m * m, m])
        assert np.max(np.abs(norms - 1)) <= 1e-9


class TestCounts:
    @pytest.mark.parametrize("N,expected", [(2**10, 35), (2**20, 1137)])
    def test_optimal(self, N, expected):
        assert optimal_steps_rs(N) == expected

    def test_speedup_N20(self):
        assert abs(speedup(2**20) - math.sqrt(2)) <= 0.01

    @pytest.mark.parametrize("n", range(10, 31))
    def test_speedup_range(self, n):
        N = 2**n
        assert abs(2 * optimal_steps_simple(N) / optimal_steps_rs(N) - math.sqrt(2)) <= 0.05


class TestClosedForm:
    def test_start(self):
        N = 1024
        b, a, alpha = rs_ode_closed_form(N, 0)
        assert b == 0
        assert a == pytest.approx(1 / N)
        assert alpha == pytest.approx(1 / N)

    @pytest.mark.parametrize("n", [10, 16, 20])
    def test_reaches_one(self, n):
        N = 2**n
        t1 = math.pi * math.sqrt(N) / (2 * math.sqrt(2))
        assert rs_ode_closed_form(N, t1)[0] == pytest.approx(1, abs=1e-12)

    def test_deviation_N16(self):
        N = 2**16
        assert rs_closed_form_deviation(N) <= 10 / math.sqrt(N)

    def test_outside_range(self):
        with pytest.raises(ValueError):
            rs_ode_closed_form(1024, 100)


class TestPairedAndLimit:
    def test_entries_N20(self):
        N = 2**20
        b = rs_paired_matrix(N)
        assert abs(b[0, 1] - 4 / math.sqrt(N)) <= 100 / N
        assert abs(b[3, 3]) <= 100 / N
        assert np.max(np.abs(b[3, :])) <= 100 / N and np.max(np.abs(b[:, 3])) <= 100 / N

    def test_scaled_convergence(self):
        # sqrt(N) B = 4 K + O(1/sqrt(N)): the gap halves when N grows fourfold
        gaps = [np.max(np.abs(rs_paired_matrix(N) * math.sqrt(N) - 4 * PAIRED_PATTERN)) for N in (2**10, 2**12, 2**14)]
        assert gaps[0] <= 20 / 2**5
        assert gaps[1] / gaps[0] == pytest.approx(0.5, abs=0.05)
        assert gaps[2] / gaps[1] == pytest.approx(0.5, abs=0.05)
        b10 = rs_paired_matrix(2**10) * 2**5
        b12 = rs_paired_matrix(2**12) * 2**6
        assert np.max(np.abs(b10 - b12)) <= 10 / 2**5

    def test_pattern_violation_raises(self):
        with pytest.raises(BoundError):
            rs_paired_matrix(2**10, constant=1e-6)

    @pytest.mark.parametrize("n", [10, 14, 18])
    def test_spectrum_approaches_d(self, n):
        N = 2**n
        b = rs_paired_matrix(N)[:3, :3] / (4 * math.sqrt(2) * 1j / math.sqrt(N))
        ev = np.sort(np.linalg.eigvals(b).real)
        assert np.max(np.abs(ev - [-1, 0, 1])) <= 10 / math.sqrt(N)
        np.testing.assert_allclose(np.sort(np.linalg.eigvals(d_matrix()).real), [-1, 0, 1], atol=1e-14)

    def test_pattern_matches_d(self):
        k = PAIRED_PATTERN[:3, :3]
        assert np.max(np.abs(k / (math.sqrt(2) * 1j) - d_matrix())) <= 1e-15

    def test_d_algebra(self):
        d = d_matrix()
        assert np.max(np.abs(d @ d @ d - d)) <= 1e-12
        assert np.max(np.abs(d - d.conj().T)) == 0

    def test_limit(self):
        out = rs_limit_matrix()
        np.testing.assert_allclose(out @ [0, 0, 1], [1, 0, 0], atol=1e-10)
        assert np.max(np.abs(out @ out - np.eye(3))) <= 1e-10
        assert np.max(np.abs(out - LIMIT_MATRIX)) <= 1e-10
        d = d_matrix()
        assert np.max(np.abs(out - (np.eye(3) - 2 * d @ d))) <= 1e-10


class TestPeakCheck:
    def test_N10(self):
        assert theorem1_check(2**10).error_bound_ok

    def test_N20(self):
        r = theorem1_check(2**20)
        assert r.deficit <= 10 / 1024
        assert abs(r.peak_step - 1137) <= 2

    def test_scaled_deficit(self):
        scaled = [theorem1_check(N).deficit * math.sqrt(N) for N in (2**10, 2**14, 2**18)]
        assert max(scaled) <= 10

    def test_small(self):
        with pytest.raises(ValueError):
            theorem1_check(8)
