from offload_manager import paths
from offload_manager.utils import derive_seed, run_label


def test_results_dir_prefers_override_then_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(paths.OUTPUT_ENV_VAR, str(tmp_path / "env"))
    assert paths.results_dir(tmp_path / "explicit") == tmp_path / "explicit"
    assert paths.results_dir() == tmp_path / "env"
    assert (tmp_path / "env").is_dir()


def test_results_dir_falls_back_to_results_folder(monkeypatch, tmp_path):
    monkeypatch.delenv(paths.OUTPUT_ENV_VAR, raising=False)
    monkeypatch.setattr(paths, "RESULTS_DIR", tmp_path / "results")
    assert paths.results_dir() == tmp_path / "results"


def test_example_scenario_is_shipped():
    assert paths.example_scenario_path().is_file()


def test_run_label_keeps_safe_characters():
    assert run_label("example_scenario") == "example_scenario"
    assert run_label("autopista norte/2.v1") == "autopista_norte_2.v1"
    assert run_label("  ") == "escenario"
    assert run_label("..oculto") == "oculto"


def test_derive_seed_is_stable_and_separates_parts():
    assert derive_seed(7, "bench", "high", 0) == derive_seed(7, "bench", "high", 0)
    assert derive_seed(7, "bench", "high", 0) != derive_seed(7, "bench", "high", 1)
    assert derive_seed(7, "bench", "high", 0) != derive_seed(8, "bench", "high", 0)
