"""Serialización de resultados: métricas, manifiesto, asignaciones y eventos.

Un directorio de resultados contiene ``rows.csv`` (una fila por ciclo),
``summary.json`` (resumen y manifiesto) y, si se pide, ``events.jsonl``.
Los números se escriben con su representación más corta exacta, de modo
que leer lo escrito devuelve exactamente los mismos valores.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple, Union

import pandas as pd

from . import __version__
from .errors import SchemaError
from .instances import ServiceInstance
from .models import Assignment
from .sim.config import SimConfig
from .sim.metrics import ROW_FIELDS, Metrics, rows_from_dicts
from .utils import canonical_json, config_hash


RESULTS_FORMAT_VERSION = "1.0"
ROWS_FILE = "rows.csv"
SUMMARY_FILE = "summary.json"
EVENTS_FILE = "events.jsonl"

PathLike = Union[str, Path]


def build_manifest(
    config: SimConfig,
    scenario_source: Optional[str] = None,
    scenario_digest: Optional[str] = None,
    command: str = "simulate",
) -> Dict[str, Any]:
    """Datos suficientes para repetir la ejecución: semilla, configuración y escenario."""
    config_data = config.model_dump(mode="json")
    return {
        "command": command,
        "format_version": RESULTS_FORMAT_VERSION,
        "code_version": __version__,
        "seed": config.rng_seed,
        "config_hash": config_hash({"config": config_data, "scenario_digest": scenario_digest}),
        "config": config_data,
        "scenario": scenario_source,
        "scenario_digest": scenario_digest,
    }


def _dump_json(data: Any, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(data, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")


def _check_format(data: Mapping[str, Any], location: str) -> None:
    version = str(data.get("format_version", ""))
    if version.split(".", 1)[0] != RESULTS_FORMAT_VERSION.split(".", 1)[0]:
        raise SchemaError(f"versión de resultados no soportada: {version!r}", location)


def write_results(
    metrics: Metrics,
    path: PathLike,
    manifest: Optional[Mapping[str, Any]] = None,
) -> Path:
    """Escribe ``rows.csv`` y ``summary.json`` en el directorio ``path``."""
    target = Path(path)
    target.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([row.to_dict() for row in metrics.rows], columns=list(ROW_FIELDS))
    frame.to_csv(target / ROWS_FILE, index=False, lineterminator="\n")
    _dump_json(
        {
            "format_version": RESULTS_FORMAT_VERSION,
            "manifest": dict(manifest or {}),
            "summary": metrics.summary(),
        },
        target / SUMMARY_FILE,
    )
    return target


def read_results(path: PathLike) -> Tuple[Metrics, Dict[str, Any]]:
    """Lee un directorio de resultados; devuelve métricas y manifiesto."""
    source = Path(path)
    with open(source / SUMMARY_FILE, encoding="utf-8") as f:
        summary = json.load(f)
    _check_format(summary, str(source / SUMMARY_FILE))
    frame = pd.read_csv(source / ROWS_FILE, float_precision="round_trip")
    metrics = rows_from_dicts(frame.to_dict("records"))
    return metrics, summary.get("manifest", {})


def write_event_log(events: Iterable[Mapping[str, Any]], path: PathLike) -> Path:
    """Un evento por línea, en JSON canónico."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="\n") as f:
        for event in events:
            f.write(canonical_json(event))
            f.write("\n")
    return target


def read_event_log(path: PathLike) -> List[Dict[str, Any]]:
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def write_assignment(
    assignment: Assignment,
    path: PathLike,
    manifest: Optional[Mapping[str, Any]] = None,
) -> Path:
    """Guarda una asignación para revalidarla después contra el escenario."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    _dump_json(
        {
            "format_version": RESULTS_FORMAT_VERSION,
            "manifest": dict(manifest or {}),
            "total_utility": assignment.total_utility,
            "used": {rsu_id: list(usage) for rsu_id, usage in assignment.used.items()},
            "selected": [
                {
                    "instance_id": inst.instance_id,
                    "task_id": inst.task_id,
                    "rsu_id": inst.rsu_id,
                    "rbs": inst.rbs,
                    "cus": inst.cus,
                    "utility": inst.base_utility,
                }
                for inst in assignment.selected
            ],
        },
        target,
    )
    return target


def read_assignment(path: PathLike) -> Assignment:
    """Carga una asignación tal cual fue escrita, sin recalcular totales."""
    source = Path(path)
    with open(source, encoding="utf-8") as f:
        data = json.load(f)
    _check_format(data, str(source))
    selected = tuple(
        ServiceInstance(
            int(item["instance_id"]), item["task_id"], item["rsu_id"],
            int(item["rbs"]), int(item["cus"]), float(item["utility"]),
        )
        for item in data.get("selected", [])
    )
    used = {rsu_id: (int(usage[0]), int(usage[1])) for rsu_id, usage in data.get("used", {}).items()}
    return Assignment(selected, used, float(data.get("total_utility", 0.0)))
