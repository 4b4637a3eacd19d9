import numpy as np
import pytest

from autocrat.lp import EQ, GE, LE, LinearProgram, LpStatus, feasible, solve_lp
from autocrat.enforce import _maximin

from oracles import exact_maximin


def simple_lp(c, A, b, senses, bounds=None):
    return LinearProgram(np.array(c, float), np.array(A, float), np.array(b, float), senses, bounds)


class TestSolveLp:
    def test_one_variable_box(self):
        sol = solve_lp(simple_lp([1.0], [[1.0]], [1.0], [LE]))
        assert sol.status == LpStatus.OPTIMAL
        assert sol.x[0] == pytest.approx(1.0, abs=1e-12)

    def test_infeasible(self):
        sol = solve_lp(simple_lp([1.0], [[1.0]], [-1.0], [LE]))
        assert sol.status == LpStatus.INFEASIBLE

    def test_unbounded(self):
        sol = solve_lp(simple_lp([1.0], [[-1.0]], [0.0], [LE]))
        assert sol.status == LpStatus.UNBOUNDED

    def test_equality_and_free_variables(self):
        # maximize x + y with x + y = 2, x - y <= 1, y free
        sol = solve_lp(
            simple_lp(
                [1.0, 1.0],
                [[1.0, 1.0], [1.0, -1.0]],
                [2.0, 1.0],
                [EQ, LE],
                bounds=[(0.0, None), (None, None)],
            )
        )
        assert sol.status == LpStatus.OPTIMAL
        assert sol.objective_value == pytest.approx(2.0, abs=1e-9)

    def test_upper_bounds_and_ge_rows(self):
        # maximize x subject to x >= 1, x <= 3 via bounds
        sol = solve_lp(simple_lp([1.0], [[1.0]], [1.0], [GE], bounds=[(0.0, 3.0)]))
        assert sol.status == LpStatus.OPTIMAL
        assert sol.x[0] == pytest.approx(3.0, abs=1e-12)

    def test_matrix_game_value_against_closed_form(self):
        # value of [[0,2],[3,1]] is (ad-bc)/(a+d-b-c) = 3/2 at row mix (1/2, 1/2)
        value, x = _maximin(np.array([[0.0, 2.0], [3.0, 1.0]]))
        assert value == pytest.approx(1.5, abs=1e-12)
        assert x == pytest.approx([0.5, 0.5], abs=1e-12)
        ev, ex = exact_maximin([[0, 2], [3, 1]])
        assert float(ev) == pytest.approx(value, abs=1e-12)


class TestFeasible:
    def test_box(self):
        assert feasible(simple_lp([0.0], [[1.0]], [1.0], [LE]))

    def test_contradictory(self):
        assert not feasible(simple_lp([0.0], [[1.0]], [1.0], [LE], bounds=[(2.0, None)]))

    def test_sandwich_system_for_example_matrix(self):
        # Does some simplex x give phi^T x >= 0 for phi = [[4,1],[-1,0]]?
        phi = np.array([[4.0, 1.0], [-1.0, 0.0]])
        A = np.vstack([-phi.T, np.ones((1, 2))])
        b = np.array([0.0, 0.0, 1.0])
        assert feasible(simple_lp([0.0, 0.0], A, b, [LE, LE, EQ]))


class TestDeterminism:
    def test_bit_identical_resolve(self):
        rng = np.random.default_rng(7)
        A = rng.uniform(-2, 2, size=(6, 4))
        b = rng.uniform(0.5, 2, size=6)
        c = rng.uniform(-1, 1, size=4)
        lp = simple_lp(c, A, b, [LE] * 6)
        s1, s2 = solve_lp(lp), solve_lp(lp)
        assert s1.objective_value == s2.objective_value
        assert np.array_equal(s1.x, s2.x)

    def test_objective_scaling_keeps_the_vertex(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            A = rng.integers(-3, 4, size=(5, 3)).astype(float)
            b = rng.integers(1, 5, size=5).astype(float)
            c = rng.integers(-3, 4, size=3).astype(float)
            lp1 = simple_lp(c, A, b, [LE] * 5)
            lp2 = simple_lp(3.0 * c, A, b, [LE] * 5)
            s1, s2 = solve_lp(lp1), solve_lp(lp2)
            if s1.status != LpStatus.OPTIMAL:
                assert s1.status == s2.status
                continue
            assert np.array_equal(s1.x, s2.x)


class TestMatrixGameOracleAgreement:
    def test_random_integer_games_up_to_4x4(self):
        rng = np.random.default_rng(2024)
        for _ in range(120):
            m = int(rng.integers(2, 5))
            n = int(rng.integers(2, 5))
            M = rng.integers(-5, 6, size=(m, n)).astype(float)
            lp_value, _ = _maximin(M)
            exact_value, _ = exact_maximin(M.astype(int).tolist())
            assert lp_value == pytest.approx(float(exact_value), abs=1e-8)
