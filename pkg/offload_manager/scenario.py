"""Formato de escenario (JSON versionado) y su carga validada.

Un escenario describe RSUs, tareas, perfiles de ejecución, trazas de
movilidad, parámetros de canal y la configuración de simulación. Cualquier
fallo se notifica con su ubicación: ``ParseError`` para texto mal formado,
``SchemaError`` para incumplimientos del esquema y ``CrossRefError`` para
referencias que no se resuelven.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, FiniteFloat, ValidationError, model_validator

from .errors import CrossRefError, DomainError, ParseError, SchemaError
from .models import Criticality, ExecutionProfile, ProblemInstance, RsuSpec, TaskSpec
from .sim.channel import ChannelParams
from .sim.config import SimConfig
from .traces import TraceSet, read_trace_csv, traces_from_records
from .utils import file_digest


FORMAT_VERSION = "1.0"
SUPPORTED_MAJOR = 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class RsuEntry(_Strict):
    id: str
    total_rbs: int = Field(ge=1)
    total_cus: int = Field(ge=1)
    hardware_class: str
    init_delay_s: float = Field(0.0, ge=0)
    x_m: FiniteFloat = 0.0
    y_m: FiniteFloat = 0.0


class TaskEntry(_Strict):
    id: str
    vehicle_id: str
    period_s: float = Field(gt=0)
    input_mb: float = Field(gt=0)
    local_exec_s: float = Field(gt=0)
    local_power_w: float = Field(ge=0)
    offload_power_w: float = Field(ge=0)
    service_type: str
    criticality: Criticality = Criticality.SAFETY_CRITICAL
    mk_window: Optional[Tuple[int, int]] = None


class ProfileEntry(_Strict):
    service_type: str
    hardware_class: str
    cus: int = Field(ge=1)
    proc_time_s: float = Field(gt=0)


class TraceRow(_Strict):
    time_s: FiniteFloat
    vehicle_id: str
    x_m: FiniteFloat
    y_m: FiniteFloat


class TraceSection(_Strict):
    """Trazas en un CSV aparte (ruta relativa al escenario) o en línea."""

    path: Optional[str] = None
    inline: Optional[List[TraceRow]] = None

    @model_validator(mode="after")
    def _one_source(self) -> "TraceSection":
        if (self.path is None) == (self.inline is None):
            raise ValueError("indique exactamente uno de 'path' o 'inline'")
        return self


class ScenarioDocument(_Strict):
    """Documento de escenario tal y como se guarda en disco."""

    format_version: str
    rsus: List[RsuEntry] = []
    tasks: List[TaskEntry] = []
    profiles: List[ProfileEntry] = []
    traces: TraceSection = TraceSection(inline=[])
    channel: ChannelParams = ChannelParams()
    sim: SimConfig = SimConfig()

    def to_json(self) -> str:
        """Texto canónico: mismo documento, mismos bytes."""
        data = self.model_dump(mode="json", exclude_none=True)
        return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


@dataclass(frozen=True, eq=False)
class Scenario:
    """Escenario validado y listo para simular."""

    tasks: Tuple[TaskSpec, ...]
    rsus: Tuple[RsuSpec, ...]
    profiles: ExecutionProfile
    traces: TraceSet
    channel: ChannelParams
    config: SimConfig
    source: Optional[str] = None
    digest: Optional[str] = None

    @property
    def vehicles(self) -> Tuple[str, ...]:
        return tuple(sorted({task.vehicle_id for task in self.tasks}))

    def template(self) -> ProblemInstance:
        """Instancia del problema sin enlaces, con capacidades nominales."""
        return ProblemInstance(self.tasks, self.rsus, self.profiles)

    def with_config(self, **updates: Any) -> "Scenario":
        data = self.config.model_dump()
        data.update(updates)
        return replace(self, config=SimConfig(**data))


def _format_location(source: str, loc: Tuple[Any, ...]) -> str:
    path = ".".join(str(part) for part in loc)
    return f"{source}#{path}" if path else source


def check_version(version: Any, location: str) -> None:
    if not isinstance(version, str):
        raise SchemaError("falta format_version", location)
    major = version.split(".", 1)[0]
    if not major.isdigit() or int(major) != SUPPORTED_MAJOR:
        raise SchemaError(f"versión de formato no soportada: {version}", location)


def parse_document(data: Any, source: str = "<escenario>") -> ScenarioDocument:
    if not isinstance(data, dict):
        raise SchemaError("el documento debe ser un objeto JSON", source)
    check_version(data.get("format_version"), _format_location(source, ("format_version",)))
    try:
        return ScenarioDocument.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        message = first["msg"]
        if exc.error_count() > 1:
            message = f"{message} (y {exc.error_count() - 1} errores más)"
        raise SchemaError(message, _format_location(source, tuple(first["loc"]))) from exc


def _domain(document: ScenarioDocument, source: str) -> Tuple[Tuple[TaskSpec, ...], Tuple[RsuSpec, ...], ExecutionProfile]:
    rsus: List[RsuSpec] = []
    seen_rsus: set = set()
    for k, entry in enumerate(document.rsus):
        location = _format_location(source, ("rsus", k, "id"))
        if entry.id in seen_rsus:
            raise SchemaError(f"RSU duplicada {entry.id}", location)
        seen_rsus.add(entry.id)
        rsus.append(
            RsuSpec(
                entry.id, entry.total_rbs, entry.total_cus, entry.hardware_class,
                entry.init_delay_s, (entry.x_m, entry.y_m),
            )
        )
    tasks: List[TaskSpec] = []
    seen_tasks: set = set()
    for k, entry in enumerate(document.tasks):
        location = _format_location(source, ("tasks", k))
        if entry.id in seen_tasks:
            raise SchemaError(f"tarea duplicada {entry.id}", location)
        seen_tasks.add(entry.id)
        try:
            tasks.append(
                TaskSpec(
                    entry.id, entry.period_s, entry.input_mb, entry.local_exec_s,
                    entry.local_power_w, entry.offload_power_w, entry.service_type,
                    entry.vehicle_id, entry.criticality, entry.mk_window,
                )
            )
        except DomainError as exc:
            raise SchemaError(str(exc), location) from exc
    keys: Dict[Tuple[str, str, int], int] = {}
    for k, entry in enumerate(document.profiles):
        key = (entry.service_type, entry.hardware_class, entry.cus)
        if key in keys:
            raise SchemaError(f"fila de perfil repetida {key}", _format_location(source, ("profiles", k)))
        keys[key] = k
    try:
        profiles = ExecutionProfile.from_rows(
            (p.service_type, p.hardware_class, p.cus, p.proc_time_s) for p in document.profiles
        )
    except DomainError as exc:
        raise SchemaError(str(exc), _format_location(source, ("profiles",))) from exc
    return tuple(tasks), tuple(rsus), profiles


def _cross_references(
    document: ScenarioDocument,
    tasks: Tuple[TaskSpec, ...],
    profiles: ExecutionProfile,
    traces: TraceSet,
    source: str,
) -> None:
    services = profiles.service_types()
    for k, task in enumerate(tasks):
        if task.service_type not in services:
            raise CrossRefError(
                f"sin perfil para el tipo de servicio {task.service_type!r}",
                _format_location(source, ("tasks", k, "service_type")),
            )
        if task.vehicle_id not in traces:
            raise CrossRefError(
                f"el vehículo {task.vehicle_id!r} no tiene traza",
                _format_location(source, ("tasks", k, "vehicle_id")),
            )
    rsu_ids = {rsu.id for rsu in document.rsus}
    vehicles = {task.vehicle_id for task in tasks}
    for k, entry in enumerate(document.channel.script):
        if entry.rsu_id is not None and entry.rsu_id not in rsu_ids:
            raise CrossRefError(
                f"RSU desconocida {entry.rsu_id!r}", _format_location(source, ("channel", "script", k, "rsu_id"))
            )
        if entry.vehicle_id is not None and entry.vehicle_id not in vehicles:
            raise CrossRefError(
                f"vehículo desconocido {entry.vehicle_id!r}",
                _format_location(source, ("channel", "script", k, "vehicle_id")),
            )


def _effective_config(document: ScenarioDocument, source: str) -> SimConfig:
    quality = document.channel.quality
    if quality is None:
        return document.sim
    if "quality" in document.sim.model_fields_set and document.sim.quality is not quality:
        raise SchemaError(
            "channel.quality y sim.quality no coinciden", _format_location(source, ("channel", "quality"))
        )
    return document.sim.model_copy(update={"quality": quality})


def build_scenario(
    document: ScenarioDocument,
    source: str = "<escenario>",
    base_dir: Optional[Path] = None,
    digest: Optional[str] = None,
) -> Scenario:
    """Convierte un documento validado en un :class:`Scenario`."""
    tasks, rsus, profiles = _domain(document, source)
    if document.traces.path is not None:
        trace_path = Path(document.traces.path)
        if not trace_path.is_absolute() and base_dir is not None:
            trace_path = base_dir / trace_path
        traces = read_trace_csv(trace_path)
    else:
        traces = traces_from_records(
            (row.model_dump() for row in document.traces.inline or []),
            _format_location(source, ("traces", "inline")),
        )
    _cross_references(document, tasks, profiles, traces, source)
    config = _effective_config(document, source)
    return Scenario(tasks, rsus, profiles, traces, document.channel, config, source, digest)


def load_scenario(path: Union[str, Path]) -> Scenario:
    """Lee, valida y resuelve un escenario; errores con ubicación y fatales."""
    path = Path(path)
    source = str(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"no se puede leer el escenario: {exc.strerror or exc}", source) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"JSON inválido: {exc.msg}", f"{source}:{exc.lineno}:{exc.colno}") from exc
    document = parse_document(data, source)
    scenario = build_scenario(document, source, path.parent, file_digest(source))
    logging.info(
        "Escenario %s: %d RSUs, %d tareas, %d vehículos",
        path.name, len(scenario.rsus), len(scenario.tasks), len(scenario.vehicles),
    )
    return scenario


def write_scenario(document: ScenarioDocument, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(document.to_json())
    return path
