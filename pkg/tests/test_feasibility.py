import pytest

from offload_manager.errors import DomainError
from offload_manager.feasibility import deadline_feasible, offload_time, utility, validate
from offload_manager.instances import ServiceInstance
from offload_manager.models import Assignment, LinkState, ProblemInstance, TaskSpec

from conftest import MU


def test_offload_time_values():
    assert offload_time(0.1, 25, MU) == pytest.approx(0.029189, abs=1e-6)
    assert offload_time(0.2, 270, MU) == pytest.approx(0.005405, abs=1e-6)
    assert offload_time(0.37, 1, 0.37) == pytest.approx(1.0)


@pytest.mark.parametrize("args", [(0.1, 0, MU), (0.1, 5, 0.0), (0.0, 5, MU)])
def test_offload_time_rejects_out_of_domain(args):
    with pytest.raises(DomainError):
        offload_time(*args)


def test_deadline_boundary(task, rsu, link, profiles):
    assert deadline_feasible(task, rsu, 25, 1, link, profiles)
    assert not deadline_feasible(task, rsu, 24, 1, link, profiles)


def test_deadline_infeasible_when_processing_exceeds_period(task, rsu, link):
    from offload_manager.models import ExecutionProfile

    slow = ExecutionProfile.from_rows([("det", "orin", 1, 0.06)])
    assert not any(deadline_feasible(task, rsu, b, 1, link, slow) for b in range(1, 271))


def test_deadline_needs_profile_and_access(task, rsu, link, profiles):
    assert not deadline_feasible(task, rsu, 25, 17, link, profiles)
    closed = LinkState("v1", "r1", 0.0, accessible=False)
    assert not deadline_feasible(task, rsu, 25, 1, closed, profiles)


def test_utility_energy_saving(task, rsu, link, profiles):
    assert utility(task, rsu, 25, 1, link, profiles) == pytest.approx(3.63244, rel=1e-5)


def test_utility_zero_cases(task, rsu, link, profiles):
    assert utility(task, rsu, 24, 1, link, profiles) == 0.0
    assert utility(task, rsu, 25, 1, link, profiles, deployed=False) == 0.0


def test_utility_clamps_negative_savings(rsu, link, profiles):
    costly = TaskSpec("t9", 0.05, 0.1, 0.001, 1.0, 50.0, "det", "v1")
    assert utility(costly, rsu, 25, 1, link, profiles) == 0.0


def test_utility_accepts_custom_function(task, rsu, link, profiles):
    assert utility(task, rsu, 25, 1, link, profiles, function=lambda *a: 1.5) == 1.5
    assert utility(task, rsu, 24, 1, link, profiles, function=lambda *a: 1.5) == 0.0


def _instance(task, rsu, link, profiles, extra_tasks=()):
    tasks = (task, *extra_tasks)
    links = {(t.vehicle_id, rsu.id): LinkState(t.vehicle_id, rsu.id, MU) for t in tasks}
    return ProblemInstance(tasks, (rsu,), profiles, links)


def test_validate_feasible_assignment(task, rsu, link, profiles):
    problem = _instance(task, rsu, link, profiles)
    value = utility(task, rsu, 25, 1, link, profiles)
    assignment = Assignment.build([ServiceInstance(0, "t1", "r1", 25, 1, value)], ["r1"])
    assert validate(assignment, problem) == []


def test_validate_multiple_choice(task, rsu, link, profiles):
    problem = _instance(task, rsu, link, profiles)
    value = utility(task, rsu, 25, 1, link, profiles)
    assignment = Assignment.build(
        [ServiceInstance(0, "t1", "r1", 25, 1, value), ServiceInstance(1, "t1", "r1", 26, 1, value)], ["r1"]
    )
    kinds = [v.kind for v in validate(assignment, problem)]
    assert kinds == ["MultipleChoiceViolation"]


def test_validate_rb_capacity(task, rsu, link, profiles):
    other = TaskSpec("t2", 0.05, 0.1, 0.04, 6.0, 2.0, "det", "v2")
    problem = _instance(task, rsu, link, profiles, (other,))
    assignment = Assignment.build(
        [ServiceInstance(0, "t1", "r1", 136, 1, 1.0), ServiceInstance(1, "t2", "r1", 135, 1, 1.0)], ["r1"]
    )
    violations = validate(assignment, problem)
    assert [(v.kind, v.offender) for v in violations] == [("RbCapacityViolation", "r1")]


def test_validate_deadline_and_totals(task, rsu, link, profiles):
    problem = _instance(task, rsu, link, profiles)
    forged = Assignment((ServiceInstance(0, "t1", "r1", 24, 1, 1.0),), {"r1": (24, 1)}, 2.0)
    kinds = {v.kind for v in validate(forged, problem)}
    assert kinds == {"DeadlineViolation", "UtilityMismatch"}
