import pytest

from offload_manager.errors import UnknownRsuError
from offload_manager.instances import enumerate_instances, min_rbs, rbs_for_deadline
from offload_manager.models import ExecutionProfile, LinkState, ProblemInstance, RsuSpec, TaskSpec

from conftest import MU, simple_problem


def test_min_rbs_values(task, rsu, link, profiles):
    assert min_rbs(task, rsu, 1, link, profiles) == 25
    other = TaskSpec("t2", 0.1, 0.07, 0.05, 3.0, 1.0, "det", "v1")
    slow = ExecutionProfile.from_rows([("det", "orin", 1, 0.05)])
    assert min_rbs(other, rsu, 1, link, slow) == 11


def test_min_rbs_without_budget(task, rsu, link):
    exact = ExecutionProfile.from_rows([("det", "orin", 1, 0.05)])
    assert min_rbs(task, rsu, 1, link, exact) is None
    assert rbs_for_deadline(task, 0.02, 0.0) is None


def test_min_rbs_is_ignoring_capacity(task, link, profiles):
    small = RsuSpec("r1", 10, 2, "orin")
    assert min_rbs(task, small, 1, link, profiles) == 25


def test_single_feasible_instance():
    task = TaskSpec("t1", 1.0, 1.0, 1.0, 10.0, 1.0, "s", "v1")
    rsu = RsuSpec("r1", 2, 2, "hw")
    profiles = ExecutionProfile.from_rows([("s", "hw", 1, 0.4)])
    # con una tasa de 1 MB/s por RB: b = 1 tarda 1 s, b = 2 tarda 0.5 s
    problem = ProblemInstance((task,), (rsu,), profiles, {("v1", "r1"): LinkState("v1", "r1", 1.0)})
    pool = enumerate_instances(problem)
    assert [(i.task_id, i.rbs, i.cus) for i in pool] == [("t1", 2, 1)]
    assert pool[0].base_utility == pytest.approx(9.5)


def test_task_without_processing_budget_is_excluded(profiles):
    problem = simple_problem(tasks=2)
    hopeless = TaskSpec("tx", 0.01, 0.1, 0.005, 6.0, 2.0, "det", "vx")
    problem = ProblemInstance(
        (*problem.tasks, hopeless), problem.rsus, problem.profiles,
        {**problem.links, ("vx", "r1"): LinkState("vx", "r1", MU)},
    )
    pool = enumerate_instances(problem)
    assert "tx" not in pool.by_task
    assert set(pool.by_task) == {"t0", "t1"}


def test_instances_respect_definition():
    problem = simple_problem(tasks=3, rsus=(("r1", 40, 4), ("r2", 30, 3)))
    pool = enumerate_instances(problem)
    assert len(pool) > 0
    for inst in pool:
        rsu = problem.rsu(inst.rsu_id)
        assert inst.rbs <= rsu.total_rbs and inst.cus <= rsu.total_cus
        assert inst.base_utility > 0
    assert [i.instance_id for i in pool] == list(range(len(pool)))
    assert sorted(pool, key=lambda i: i.sort_key) == list(pool)


def test_prune_keeps_minimal_cus_per_rbs():
    problem = simple_problem(tasks=1, rsus=(("r1", 40, 4),))
    full = enumerate_instances(problem)
    pruned = enumerate_instances(problem, prune=True)
    assert len(pruned) < len(full)
    by_rbs = {}
    for inst in pruned:
        by_rbs.setdefault(inst.rbs, []).append(inst.cus)
    for rbs, cus in by_rbs.items():
        feasible = [i.cus for i in full if i.rbs == rbs]
        assert cus == [min(feasible)]


def test_pool_indices_and_unknown_rsu(cross_pool):
    assert cross_pool.for_rsu("r1") == (0, 1)
    assert cross_pool.siblings(0) == (0,)
    assert cross_pool.capacity("r1") == (2, 2)
    with pytest.raises(UnknownRsuError):
        cross_pool.for_rsu("r9")


def test_residual_capacity_limits_enumeration():
    problem = simple_problem(tasks=1, rsus=(("r1", 60, 8),))
    limited = ProblemInstance(problem.tasks, problem.rsus, problem.profiles, problem.links, {"r1": (30, 2)})
    pool = enumerate_instances(limited)
    assert max(i.rbs for i in pool) <= 30
    assert max(i.cus for i in pool) <= 2
