"""Ajustes persistentes de la aplicación en ``config/settings.json``.

Guardan los parámetros de calibración que no forman parte de un escenario:
presets de calidad del canal, presupuesto del oráculo, número de hilos y
directorio de resultados por defecto.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Mapping, Optional

from .oracle import OracleBudget
from .paths import config_path
from .sim.channel import QUALITY_PRESETS, QualityPreset
from .sim.config import Quality


SETTINGS_FILE = "settings.json"


@dataclass(frozen=True)
class Settings:
    presets: Mapping[Quality, QualityPreset] = field(default_factory=lambda: dict(QUALITY_PRESETS))
    oracle_budget: OracleBudget = OracleBudget()
    workers: int = 1
    results_dir: str = ""

    def to_dict(self) -> Dict[str, object]:
        return {
            "presets": {
                quality.value: {"mean_mcs": p.mean_mcs, "step_probability": p.step_probability}
                for quality, p in sorted(self.presets.items(), key=lambda item: item[0].value)
            },
            "oracle_max_nodes": self.oracle_budget.max_nodes,
            "oracle_max_seconds": self.oracle_budget.max_seconds,
            "workers": self.workers,
            "results_dir": self.results_dir,
        }


def _settings_path(path: Optional[Path]) -> Path:
    return Path(path) if path is not None else config_path(SETTINGS_FILE)


def _presets(data: Mapping[str, object]) -> Dict[Quality, QualityPreset]:
    presets = dict(QUALITY_PRESETS)
    for quality in Quality:
        entry = data.get(quality.value)
        if not isinstance(entry, dict):
            continue
        base = presets[quality]
        mean = int(entry.get("mean_mcs", base.mean_mcs))
        step = float(entry.get("step_probability", base.step_probability))
        if 0 <= mean <= 14 and 0 <= step <= 1:
            presets[quality] = QualityPreset(mean, step)
        else:
            logging.warning("Preset de calidad %s fuera de rango; se ignora", quality.value)
    return presets


def load_settings(path: Optional[Path] = None) -> Settings:
    """Carga los ajustes; un fichero ausente o ilegible da los valores por defecto."""
    target = _settings_path(path)
    try:
        data: dict = {}
        if target.exists():
            with target.open("r", encoding="utf-8") as fh:
                data = json.load(fh)

        presets = _presets(data.get("presets", {}) or {})
        max_nodes = int(data.get("oracle_max_nodes", OracleBudget.max_nodes) or OracleBudget.max_nodes)
        max_seconds = float(data.get("oracle_max_seconds", OracleBudget.max_seconds) or OracleBudget.max_seconds)
        workers = max(1, int(data.get("workers", 1) or 1))
        results_dir = str(data.get("results_dir", "") or "")
        return Settings(presets, OracleBudget(max_nodes, max_seconds), workers, results_dir)
    except (OSError, ValueError, TypeError, AttributeError):
        logging.exception("Failed to load settings from %s", target)
        return Settings()


def save_settings(settings: Settings, path: Optional[Path] = None) -> Path:
    target = _settings_path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", encoding="utf-8") as fh:
        json.dump(settings.to_dict(), fh, ensure_ascii=False, indent=2)
    return target
