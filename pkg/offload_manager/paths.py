"""Dónde lee y escribe offload_manager.

Todo cuelga de la raíz del repositorio (o de la carpeta del ejecutable si se
distribuye congelado): ``logs/`` para el registro, ``config/`` para
``settings.json``, ``results/`` para simulaciones y bancos, y ``resources/``
para el escenario de ejemplo. La salida puede redirigirse con
``OFFLOAD_MANAGER_OUT``.
"""

from __future__ import annotations

import os
import sys
from pathlib import Path
from typing import Iterable


OUTPUT_ENV_VAR = "OFFLOAD_MANAGER_OUT"


def _workspace_root() -> Path:
    if getattr(sys, "frozen", False):
        return Path(sys.executable).resolve().parent
    return Path(__file__).resolve().parent.parent


WORKSPACE_ROOT = _workspace_root()

LOG_DIR = WORKSPACE_ROOT / "logs"
CONFIG_DIR = WORKSPACE_ROOT / "config"
RESULTS_DIR = WORKSPACE_ROOT / "results"
RESOURCES_DIR = WORKSPACE_ROOT / "resources"


def ensure_run_directories(extra: Iterable[Path] | None = None) -> None:
    """Crea ``logs/`` y ``config/`` (y ``extra``) antes de registrar o guardar ajustes."""
    for directory in (LOG_DIR, CONFIG_DIR, *(extra or [])):
        directory.mkdir(parents=True, exist_ok=True)


def log_path(filename: str = "offload_manager.log") -> Path:
    ensure_run_directories()
    return LOG_DIR / filename


def config_path(filename: str) -> Path:
    ensure_run_directories()
    return CONFIG_DIR / filename


def results_dir(override: str | os.PathLike[str] | None = None) -> Path:
    """Directorio de salida: ``override``, después ``OFFLOAD_MANAGER_OUT`` y por último ``results/``.

    El directorio se crea si no existe.
    """
    if override:
        target = Path(override)
    elif os.environ.get(OUTPUT_ENV_VAR):
        target = Path(os.environ[OUTPUT_ENV_VAR])
    else:
        target = RESULTS_DIR
    target.mkdir(parents=True, exist_ok=True)
    return target


def example_scenario_path(filename: str = "example_scenario.json") -> Path:
    return RESOURCES_DIR / filename
