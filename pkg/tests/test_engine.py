import numpy as np
import pytest

from offload_manager.errors import ConfigError
from offload_manager.results import EVENTS_FILE, ROWS_FILE, SUMMARY_FILE, write_event_log, write_results
from offload_manager.sim.config import Mode
from offload_manager.sim.engine import Simulator, initial_problem, run

from conftest import make_scenario, rsu_entry, scenario_data, task_entry


def _closure_scenario(**sim):
    positions = {f"v{i:02d}": (40.0 * i, 0.0) for i in range(5)}
    positions.update({f"v{i:02d}": (1000.0 - 40.0 * (i - 5), 0.0) for i in range(5, 10)})
    tasks = [task_entry(i, period_s=0.05 if i % 2 else 0.1) for i in range(10)]
    settings = {"duration_s": 60.0, "schedule_interval_s": 10.0, "srs_interval_s": 0.05}
    settings.update(sim)
    return make_scenario(
        scenario_data(
            tasks,
            [rsu_entry("r1", 0.0), rsu_entry("r2", 1000.0)],
            positions,
            channel={"step_probability": 0.0},
            sim=settings,
        )
    )


def test_measured_matches_predicted_on_a_static_channel():
    metrics = run(_closure_scenario()).metrics
    assert len(metrics.rows) == 6
    for row in metrics.rows[1:]:
        assert row.predicted_js > 0
        assert row.measured_js == pytest.approx(row.predicted_js, rel=0.02)
    assert metrics.deadline_misses == 0
    assert metrics.suspensions == 0


def _step_scenario(drop_s, mode):
    data = scenario_data(
        [task_entry(0, period_s=0.05, input_mb=0.1)],
        [rsu_entry("r1", 0.0, rbs=20, cus=1)],
        {"v00": (10.0, 0.0)},
        profiles=[{"service_type": "det", "hardware_class": "orin", "cus": 1, "proc_time_s": 0.005}],
        channel={
            "step_probability": 0.0,
            "script": [
                {"time_s": 0.0, "mcs": 14},
                {"time_s": drop_s, "mcs": 3},
                {"time_s": drop_s + 2.0, "mcs": 14},
            ],
        },
        sim={"duration_s": 60.0, "schedule_interval_s": 10.0, "srs_interval_s": 0.05, "mode": mode},
    )
    return run(make_scenario(data))


@pytest.mark.parametrize("drop_s, mode", [(30.0, "sched_remain"), (35.0, "sched_all"), (35.0, "sched_remain")])
def test_step_degradation_suspends_and_resumes_without_misses(drop_s, mode):
    result = _step_scenario(drop_s, mode)
    summary = result.metrics.summary()
    assert summary["suspensions"] >= 1
    assert summary["resumptions"] >= 1
    assert summary["deadline_misses"] == 0
    kinds = [event["event"] for event in result.events]
    assert kinds.index("suspended") < kinds.index("resumed")


def test_drop_on_a_sched_all_boundary_is_replaced_not_resumed():
    # la reprogramación de t = 30 termina la concesión suspendida
    summary = _step_scenario(30.0, "sched_all").metrics.summary()
    assert summary["suspensions"] >= 1
    assert summary["resumptions"] == 0
    assert summary["deadline_misses"] == 0


def _mode_scenario(channel):
    positions = {f"v{i:02d}": (30.0 * i, 0.0) for i in range(3)}
    positions.update({f"v{i:02d}": (1000.0 - 30.0 * (i - 3), 0.0) for i in range(3, 6)})
    data = scenario_data(
        [task_entry(i) for i in range(6)],
        [rsu_entry("r1", 0.0, rbs=270, cus=16, delay=0.2), rsu_entry("r2", 1000.0, rbs=270, cus=16, delay=0.2)],
        positions,
        channel=channel,
        sim={"duration_s": 30.0, "schedule_interval_s": 10.0, "srs_interval_s": 0.05, "quality": "medium"},
    )
    return make_scenario(data)


def _offload_rate(scenario, mode, seed=0):
    config = scenario.config.model_copy(update={"mode": mode, "rng_seed": seed})
    return run(scenario, config).metrics.offloaded_jobs_per_s


def test_sched_remain_avoids_reinitialisation():
    scenario = _mode_scenario({"step_probability": 0.0})
    remain = _offload_rate(scenario, Mode.SCHED_REMAIN)
    everything = _offload_rate(scenario, Mode.SCHED_ALL)
    assert remain > everything > 0


def test_sched_remain_offloads_more_on_average():
    scenario = _mode_scenario({})
    seeds = range(20)
    remain = np.mean([_offload_rate(scenario, Mode.SCHED_REMAIN, seed) for seed in seeds])
    everything = np.mean([_offload_rate(scenario, Mode.SCHED_ALL, seed) for seed in seeds])
    assert remain >= everything


def test_mk_task_never_offloads_twice_in_a_row_when_processing_fails():
    data = scenario_data(
        [task_entry(0, criticality="mk_constrained", mk_window=[2, 3])],
        [rsu_entry("r1", 0.0)],
        {"v00": (10.0, 0.0)},
        channel={"step_probability": 0.0},
        sim={
            "duration_s": 10.0, "schedule_interval_s": 10.0, "srs_interval_s": 0.05,
            "processing_failure_prob": 1.0, "log_jobs": True,
        },
    )
    result = run(make_scenario(data))
    offloaded = [event["offloaded"] for event in result.events if event["event"] == "job"]
    assert any(offloaded)
    for k in range(len(offloaded) - 2):
        assert sum(offloaded[k:k + 3]) <= 1
    assert result.metrics.failed_offloads == sum(offloaded)


def test_runs_are_reproducible(tmp_path):
    scenario = make_scenario(
        scenario_data(
            [task_entry(i) for i in range(4)],
            [rsu_entry("r1", 0.0)],
            {f"v{i:02d}": (50.0 * i, 0.0) for i in range(4)},
            sim={
                "duration_s": 20.0, "schedule_interval_s": 10.0, "srs_interval_s": 0.05,
                "rng_seed": 11, "log_jobs": True,
            },
        )
    )
    for name in ("a", "b"):
        result = run(scenario)
        write_results(result.metrics, tmp_path / name)
        write_event_log(result.events, tmp_path / name / EVENTS_FILE)
    for filename in (ROWS_FILE, SUMMARY_FILE, EVENTS_FILE):
        assert (tmp_path / "a" / filename).read_bytes() == (tmp_path / "b" / filename).read_bytes()


def test_srs_slower_than_shortest_period_is_rejected():
    scenario = _closure_scenario(srs_interval_s=0.2)
    with pytest.raises(ConfigError):
        Simulator(scenario)


def test_empty_scenario_yields_zero_rows():
    scenario = make_scenario(scenario_data([], [], {}, sim={"duration_s": 20.0, "schedule_interval_s": 10.0}))
    metrics = run(scenario).metrics
    assert len(metrics.rows) == 2
    assert metrics.summary()["offloaded_jobs"] == 0
    assert metrics.measured_js == 0.0


def test_simulator_runs_once():
    simulator = Simulator(_closure_scenario(duration_s=10.0))
    simulator.run()
    with pytest.raises(RuntimeError):
        simulator.run()


def test_initial_problem_sees_all_covered_tasks():
    problem = initial_problem(_closure_scenario())
    assert len(problem.tasks) == 10
    assert ("v00", "r1") in problem.links and ("v00", "r2") not in problem.links
