import json

import pytest

from offload_manager.feasibility import validate
from offload_manager.main import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, main
from offload_manager.paths import OUTPUT_ENV_VAR, example_scenario_path
from offload_manager.results import EVENTS_FILE, ROWS_FILE, read_assignment
from offload_manager.scenario import load_scenario
from offload_manager.sim import initial_problem

from conftest import rsu_entry, scenario_data, task_entry


@pytest.fixture
def settings_args(tmp_path):
    return ["--settings", str(tmp_path / "no-settings.json")]


@pytest.fixture
def scenario_file(tmp_path):
    data = scenario_data(
        [task_entry(i) for i in range(3)],
        [rsu_entry("r1", 0.0)],
        {f"v{i:02d}": (30.0 * i, 0.0) for i in range(3)},
        sim={"duration_s": 20.0, "schedule_interval_s": 10.0, "srs_interval_s": 0.05},
    )
    path = tmp_path / "small.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def _lines(capsys):
    return capsys.readouterr().out.splitlines()


def test_solve_example_scenario(tmp_path, capsys, settings_args):
    target = tmp_path / "assignment.json"
    assert main(["solve", "--out", str(target), *settings_args]) == EXIT_OK
    lines = _lines(capsys)
    assert lines[0].startswith("# manifest ")
    manifest = json.loads(lines[0][len("# manifest "):])
    assert manifest["seed"] == 7 and manifest["command"] == "solve"
    total = float(lines[-1].split(",")[1])
    assert total > 0

    problem = initial_problem(load_scenario(example_scenario_path()))
    assignment = read_assignment(target)
    assert assignment.total_utility == pytest.approx(total)
    assert validate(assignment, problem) == []


def test_unknown_algorithm_is_a_usage_error(settings_args):
    with pytest.raises(SystemExit) as exit_info:
        main(["solve", "--algorithm", "nope", *settings_args])
    assert exit_info.value.code == EXIT_USAGE


def test_missing_scenario(tmp_path, settings_args):
    assert main(["solve", str(tmp_path / "none.json"), *settings_args]) == EXIT_USAGE


def test_simulate_writes_results(tmp_path, capsys, scenario_file, settings_args):
    out = tmp_path / "res"
    code = main(["simulate", str(scenario_file), "--out", str(out), "--events", "--seed", "3", *settings_args])
    assert code == EXIT_OK
    lines = _lines(capsys)
    assert json.loads(lines[0][len("# manifest "):])["seed"] == 3
    summary = json.loads("\n".join(lines[1:]))
    assert summary["cycles"] == 2
    assert (out / ROWS_FILE).exists()
    assert (out / EVENTS_FILE).read_text(encoding="utf-8").strip()


def test_simulate_rows_format(tmp_path, capsys, scenario_file, settings_args):
    code = main(["simulate", str(scenario_file), "--out", str(tmp_path / "r"), "--format", "rows", *settings_args])
    assert code == EXIT_OK
    lines = _lines(capsys)
    assert lines[1].startswith("cycle,start_s,")
    assert len(lines) == 4


def test_srs_config_error(tmp_path, scenario_file, settings_args):
    data = json.loads(scenario_file.read_text(encoding="utf-8"))
    data["sim"]["srs_interval_s"] = 0.5
    scenario_file.write_text(json.dumps(data), encoding="utf-8")
    assert main(["simulate", str(scenario_file), "--out", str(tmp_path / "r"), *settings_args]) == EXIT_USAGE


def test_bench_single_cell(tmp_path, capsys, scenario_file, settings_args):
    target = tmp_path / "bench.csv"
    code = main(
        [
            "bench", str(scenario_file), "--algorithm", "greedy", "--quality", "medium",
            "--mode", "sched_remain", "--replicates", "1", "--format", "rows",
            "--out", str(target), *settings_args,
        ]
    )
    assert code == EXIT_OK
    rows = target.read_text(encoding="utf-8").splitlines()
    assert rows[0].startswith("algorithm,quality,mode,replicate,seed")
    assert rows[1].startswith("greedy,medium,sched_remain,0,")


def test_bench_unknown_algorithm_list(scenario_file, settings_args):
    assert main(["bench", str(scenario_file), "--algorithms", "saround,nope", *settings_args]) == EXIT_USAGE


def test_certify_without_trials(capsys, settings_args):
    assert main(["certify", "--trials", "0", *settings_args]) == EXIT_OK
    reports = json.loads("\n".join(_lines(capsys)[1:]))
    assert [r["algorithm"] for r in reports] == ["saround", "floor_rd"]


def test_certify_small_run(capsys, settings_args):
    assert main(["certify", "--algorithm", "saround", "--trials", "5", *settings_args]) == EXIT_OK
    report = json.loads("\n".join(_lines(capsys)[1:]))[0]
    assert report["violations"] == []
    assert report["min_ratio"] >= 0.25


@pytest.mark.parametrize("flag", [["--max-tasks", "7"], ["--max-rbs", "1"]])
def test_certify_rejects_family(flag, settings_args):
    assert main(["certify", "--trials", "1", *flag, *settings_args]) == EXIT_USAGE


def test_gen_is_deterministic(tmp_path, settings_args):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for path in paths:
        args = ["gen", "--tasks", "6", "--vehicles", "3", "--rsus", "2", "--duration", "10", "--seed", "4"]
        assert main([*args, "--out", str(path), *settings_args]) == EXIT_OK
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert load_scenario(paths[0]).config.rng_seed == 4


def test_gen_uses_output_env_var(tmp_path, monkeypatch, capsys, settings_args):
    monkeypatch.setenv(OUTPUT_ENV_VAR, str(tmp_path / "env-out"))
    assert main(["gen", "--tasks", "2", "--vehicles", "2", "--rsus", "1", "--seed", "9", *settings_args]) == EXIT_OK
    assert (tmp_path / "env-out" / "scenario-9.json").exists()
    assert _lines(capsys)[-1] == str(tmp_path / "env-out" / "scenario-9.json")


def test_gen_bad_descriptor(tmp_path, settings_args):
    descriptor = tmp_path / "d.json"
    descriptor.write_text(json.dumps({"road_spacing_m": 99999}), encoding="utf-8")
    assert main(["gen", "--descriptor", str(descriptor), "--out", str(tmp_path / "s.json"), *settings_args]) == EXIT_USAGE


def test_exit_codes_are_distinct():
    assert len({EXIT_OK, EXIT_FAILURE, EXIT_USAGE}) == 3
