import numpy as np
import pytest

from offload_manager.generator import ProblemFamily
from offload_manager.oracle import OracleBudget, certify_ratio, solve_exact, solve_exact_single_rsu

from conftest import make_pool


def test_exact_conflicting_pair():
    pool = make_pool([("t1", "r1", 1, 1, 10.0), ("t2", "r1", 1, 1, 8.0)], {"r1": (1, 1)})
    result = solve_exact(pool)
    assert result.optimum == 10.0
    assert result.selected == frozenset({0})
    assert result.exact


def test_exact_cross_example(cross_pool):
    assert solve_exact(cross_pool).optimum == 6.0
    assert solve_exact_single_rsu(cross_pool, "r1", cross_pool.utilities).optimum == 6.0


def test_exact_empty_pool():
    result = solve_exact(make_pool([], {"r1": (2, 2)}))
    assert result.optimum == 0.0
    assert result.selected == frozenset()


def test_single_rsu_uses_given_weights():
    pool = make_pool(
        [("t1", "r1", 1, 1, 1.0), ("t1", "r1", 2, 1, 2.0), ("t1", "r1", 2, 2, 3.0)], {"r1": (4, 4)}
    )
    assert solve_exact_single_rsu(pool, "r1", np.array([5.0, 9.0, 7.0])).optimum == 9.0
    one = make_pool([("t1", "r1", 1, 1, 4.0)], {"r1": (1, 1)})
    assert solve_exact_single_rsu(one, "r1", one.utilities).optimum == 4.0


def test_exact_spans_rsus():
    pool = make_pool(
        [("t1", "r1", 1, 1, 5.0), ("t1", "r2", 1, 1, 4.0), ("t2", "r1", 1, 1, 3.0)],
        {"r1": (1, 1), "r2": (1, 1)},
    )
    assert solve_exact(pool).optimum == 7.0


def test_budget_exhaustion_is_reported():
    pool = make_pool([(f"t{k}", "r1", 1, 1, 1.0 + k) for k in range(5)], {"r1": (3, 3)})
    result = solve_exact(pool, budget=OracleBudget(max_nodes=2))
    assert not result.exact


def test_certify_saround_bound():
    report = certify_ratio("saround", trials=500, seed=0)
    assert report.ok, report.violations[:5]
    assert report.min_ratio >= 0.25
    assert report.lp_checked >= 500


def test_certify_floor_rd_bound():
    report = certify_ratio("floor_rd", trials=500, seed=1)
    assert report.ok, report.violations[:5]
    assert report.min_ratio >= 1 / 3


@pytest.mark.parametrize("name", ["greedy", "iterative", "game", "id_assign"])
def test_certify_baselines_only_feasibility(name):
    report = certify_ratio(name, trials=40, seed=2)
    assert report.bound is None
    assert report.ok, report.violations[:5]


def test_certify_zero_trials():
    report = certify_ratio("saround", trials=0)
    assert report.ok
    assert report.ratios_observed == 0
    assert report.min_ratio is None


def test_certify_rejects_large_family():
    with pytest.raises(ValueError):
        certify_ratio("saround", ProblemFamily(tasks=(2, 7)), trials=1)


def test_certify_parallel_matches_sequential():
    sequential = certify_ratio("saround", trials=12, seed=5)
    parallel = certify_ratio("saround", trials=12, seed=5, workers=3)
    assert parallel.to_dict() == sequential.to_dict()
