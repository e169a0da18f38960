import numpy as np
import pytest
from scipy import sparse
from scipy.optimize import linprog

from offload_manager.errors import DimensionMismatchError
from offload_manager.lp import REFACTOR_EVERY, LinearProgram, build_rsu_lp, solve_lp

from conftest import make_pool


def test_two_variable_program():
    lp = LinearProgram.from_rows([3.0, 2.0], [([1.0, 1.0], 4.0), ([1.0, 0.0], 2.0)])
    solution = solve_lp(lp)
    assert solution.values == pytest.approx([2.0, 2.0])
    assert solution.objective_value == pytest.approx(10.0)


def test_cross_program_is_fractional():
    lp = LinearProgram.from_rows(
        [6.0, 6.0],
        [([2.0, 1.0], 2.0), ([1.0, 2.0], 2.0), ([1.0, 0.0], 1.0), ([0.0, 1.0], 1.0)],
    )
    solution = solve_lp(lp)
    assert solution.values == pytest.approx([2 / 3, 2 / 3])
    assert solution.objective_value == pytest.approx(8.0)
    assert solution.fractional_indices() == [0, 1]


def test_zero_objective_keeps_origin():
    lp = LinearProgram.from_rows([0.0, 0.0], [([1.0, 1.0], 1.0)])
    solution = solve_lp(lp)
    assert solution.objective_value == 0.0
    assert solution.values.tolist() == [0.0, 0.0]
    assert solution.basis == frozenset({2})


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        LinearProgram(np.ones(2), sparse.csc_matrix(np.ones((1, 3))), np.ones(1))
    with pytest.raises(DimensionMismatchError):
        LinearProgram.from_rows([1.0, 1.0], [([1.0], 1.0)])


def test_basic_solution_properties():
    rng = np.random.default_rng(3)
    for _ in range(30):
        n, m = int(rng.integers(2, 12)), int(rng.integers(1, 6))
        dense = rng.uniform(0, 5, size=(m, n)) * (rng.random((m, n)) < 0.7)
        dense[:, dense.sum(axis=0) == 0] = 1.0
        lp = LinearProgram(rng.uniform(0, 3, n), sparse.csc_matrix(dense), rng.uniform(1, 10, m))
        solution = solve_lp(lp)
        assert solution.positive_count() <= m
        assert np.all(dense @ solution.values <= lp.rhs + 1e-7 * np.maximum(1, lp.rhs))
        assert solution.objective_value == pytest.approx(float(lp.objective @ solution.values), abs=1e-9)


def test_solver_is_deterministic():
    lp = LinearProgram.from_rows([1.0, 1.0, 1.0], [([1.0, 1.0, 1.0], 1.0)])
    first, second = solve_lp(lp), solve_lp(lp)
    assert first.values.tolist() == second.values.tolist()


def test_build_rsu_lp_cross_structure(cross_pool):
    lp = build_rsu_lp(cross_pool, "r1", cross_pool.utilities)
    assert lp.num_variables == 2
    assert lp.num_constraints == 4
    assert lp.constraints.toarray().tolist() == [[2.0, 1.0], [1.0, 2.0], [1.0, 0.0], [0.0, 1.0]]
    assert lp.rhs.tolist() == [2.0, 2.0, 1.0, 1.0]
    assert solve_lp(lp).objective_value == pytest.approx(8.0)


def test_build_rsu_lp_multiple_choice_row():
    pool = make_pool([("t1", "r1", 1, 1, 2.0), ("t1", "r1", 2, 1, 3.0)], {"r1": (4, 4)})
    lp = build_rsu_lp(pool, "r1", pool.utilities)
    assert lp.row_labels == ("rbs", "cus", "task:t1")
    assert lp.constraints.toarray()[2].tolist() == [1.0, 1.0]


def test_build_rsu_lp_skips_non_positive_weights():
    pool = make_pool([("t1", "r1", 1, 1, 2.0), ("t2", "r1", 1, 1, 3.0)], {"r1": (4, 4)})
    lp = build_rsu_lp(pool, "r1", np.array([2.0, -1.0]))
    assert lp.variable_ids == (0,)
    empty = build_rsu_lp(pool, "r1", np.zeros(2))
    assert empty.num_variables == 0
    assert solve_lp(empty).objective_value == 0.0


@pytest.mark.parametrize("capacity, refactored", [((100_000, 100_000), True), ((300, 200), False)])
def test_long_runs_match_highs_after_refactorisation(capacity, refactored):
    rng = np.random.default_rng(21)
    rows = [
        (f"t{i}", "r1", int(rng.integers(1, 8)), int(rng.integers(1, 5)), float(rng.uniform(0.5, 4.0)))
        for i in range(150)
        for _ in range(3)
    ]
    pool = make_pool(rows, {"r1": capacity})
    lp = build_rsu_lp(pool, "r1", pool.utilities)
    solution = solve_lp(lp)
    reference = linprog(
        -lp.objective, A_ub=lp.constraints.toarray(), b_ub=lp.rhs, bounds=(0, None), method="highs"
    )
    assert reference.status == 0
    if refactored:
        assert solution.iterations > REFACTOR_EVERY
    assert solution.objective_value == pytest.approx(-reference.fun, rel=1e-7)
    assert np.all(lp.constraints @ solution.values <= lp.rhs + 1e-7)
