import json

import pytest

from offload_manager.errors import SchemaError
from offload_manager.models import Assignment
from offload_manager.results import (
    SUMMARY_FILE,
    build_manifest,
    read_assignment,
    read_event_log,
    read_results,
    write_assignment,
    write_event_log,
    write_results,
)
from offload_manager.saround import saround
from offload_manager.instances import enumerate_instances
from offload_manager.sim.config import SimConfig
from offload_manager.sim.metrics import MetricsRecorder

from conftest import simple_problem


@pytest.fixture
def metrics():
    recorder = MetricsRecorder(cycles=2, interval_s=10.0)
    recorder.set_predicted(0.0, 1.0 / 3.0)
    recorder.offloaded(1.0, 0.123456789)
    recorder.local(12.0)
    return recorder.finish(20.0)


def test_results_directory_reads_back(tmp_path, metrics):
    manifest = build_manifest(SimConfig(rng_seed=3), "s.json", "abc")
    write_results(metrics, tmp_path, manifest)
    loaded, loaded_manifest = read_results(tmp_path)
    assert loaded == metrics
    assert loaded_manifest["seed"] == 3
    summary = json.loads((tmp_path / SUMMARY_FILE).read_text(encoding="utf-8"))["summary"]
    assert summary == pytest.approx(metrics.summary())


def test_unknown_results_version(tmp_path, metrics):
    write_results(metrics, tmp_path)
    path = tmp_path / SUMMARY_FILE
    data = json.loads(path.read_text(encoding="utf-8"))
    data["format_version"] = "9.0"
    path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(SchemaError):
        read_results(tmp_path)


def test_manifest_hash_tracks_config():
    first = build_manifest(SimConfig(rng_seed=1))
    assert build_manifest(SimConfig(rng_seed=1))["config_hash"] == first["config_hash"]
    assert build_manifest(SimConfig(rng_seed=2))["config_hash"] != first["config_hash"]
    assert first["config"]["mode"] == "sched_all"


def test_assignment_file(tmp_path):
    problem = simple_problem(tasks=4)
    assignment = saround(enumerate_instances(problem), problem)
    path = write_assignment(assignment, tmp_path / "a" / "assignment.json")
    loaded = read_assignment(path)
    assert isinstance(loaded, Assignment)
    assert loaded.selected == assignment.selected
    assert loaded.total_utility == assignment.total_utility


def test_event_log(tmp_path):
    events = [{"t": 0.0, "event": "grant", "task": "t1"}, {"t": 0.5, "event": "suspended", "task": "t1"}]
    path = write_event_log(events, tmp_path / "events.jsonl")
    assert read_event_log(path) == events
    assert path.read_text(encoding="utf-8").splitlines()[0] == '{"event":"grant","t":0.0,"task":"t1"}'
