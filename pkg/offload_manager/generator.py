"""Generadores sintéticos: problemas aleatorios y escenarios completos.

``random_problem`` produce instantáneas del problema para el arnés de certificación
y los bancos de pruebas. ``gen_scenario`` produce un documento de escenario
completo (RSUs a lo largo de una cuadrícula de calles, trazas, tareas y
perfiles) que es determinista para un descriptor y una semilla.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .models import Criticality, ExecutionProfile, LinkState, ProblemInstance, RsuSpec, TaskSpec
from .scenario import (
    FORMAT_VERSION,
    ProfileEntry,
    RsuEntry,
    ScenarioDocument,
    TaskEntry,
    TraceRow,
    TraceSection,
)
from .sim.channel import ChannelParams
from .sim.config import SimConfig


DEFAULT_PERIODS_S = (0.05, 0.067, 0.1)
IntRange = Tuple[int, int]
FloatRange = Tuple[float, float]


def _check_range(name: str, bounds, minimum: float = 0) -> None:
    low, high = bounds
    if low > high or low < minimum:
        raise ValueError(f"Rango inválido para {name}: {bounds}")


@dataclass(frozen=True)
class ProblemFamily:
    """Familia de instancias aleatorias del problema (rangos cerrados)."""

    tasks: IntRange = (2, 6)
    rsus: IntRange = (1, 3)
    rbs: IntRange = (2, 6)
    cus: IntRange = (2, 4)
    rate_range: FloatRange = (1.0, 6.0)
    access_probability: float = 0.8
    periods_s: Tuple[float, ...] = DEFAULT_PERIODS_S
    input_mb: FloatRange = (0.07, 0.3)
    proc_fraction: FloatRange = (0.1, 0.5)
    prune: bool = False

    def __post_init__(self) -> None:
        for name in ("tasks", "rsus", "rbs", "cus"):
            _check_range(name, getattr(self, name), minimum=1)
        _check_range("rate_range", self.rate_range)
        _check_range("input_mb", self.input_mb)
        _check_range("proc_fraction", self.proc_fraction)
        if self.rate_range[0] <= 0 or self.input_mb[0] <= 0 or self.proc_fraction[1] >= 1:
            raise ValueError("Tasas y datos deben ser positivos y el proceso menor que el periodo")
        if not 0 < self.access_probability <= 1:
            raise ValueError("access_probability debe estar en (0, 1]")
        if not self.periods_s or min(self.periods_s) <= 0:
            raise ValueError("Se necesita al menos un periodo positivo")

    @classmethod
    def certify_default(cls) -> "ProblemFamily":
        """Instancias pequeñas que el oráculo exacto resuelve al momento."""
        return cls()

    @classmethod
    def desk_scale(cls, tasks: int = 20, rsus: int = 3, rbs: int = 40, cus: int = 6) -> "ProblemFamily":
        """Tamaño intermedio para comparar algoritmos entre sí."""
        return cls(
            tasks=(tasks, tasks), rsus=(rsus, rsus), rbs=(rbs, rbs), cus=(cus, cus),
            rate_range=(0.3, 2.0), prune=True,
        )


def _draw(rng: np.random.Generator, bounds: IntRange) -> int:
    return int(rng.integers(bounds[0], bounds[1] + 1))


def random_problem(rng: np.random.Generator, family: ProblemFamily) -> ProblemInstance:
    """Instantánea aleatoria del problema; cada tarea tiene su propio tipo de servicio."""
    n = _draw(rng, family.tasks)
    m = _draw(rng, family.rsus)
    rsus = [RsuSpec(f"r{k}", _draw(rng, family.rbs), _draw(rng, family.cus), "hw") for k in range(m)]
    max_cus = max(rsu.total_cus for rsu in rsus)
    tasks: List[TaskSpec] = []
    rows: List[Tuple[str, str, int, float]] = []
    links: Dict[Tuple[str, str], LinkState] = {}
    for i in range(n):
        period = float(family.periods_s[int(rng.integers(len(family.periods_s)))])
        task = TaskSpec(
            id=f"t{i}",
            period_s=period,
            input_mb=float(rng.uniform(*family.input_mb)),
            local_exec_s=period * float(rng.uniform(0.3, 0.9)),
            local_power_w=float(rng.uniform(2.0, 8.0)),
            offload_power_w=float(rng.uniform(0.5, 2.0)),
            service_type=f"s{i}",
            vehicle_id=f"v{i}",
        )
        tasks.append(task)
        work = period * float(rng.uniform(*family.proc_fraction))
        for cus in range(1, max_cus + 1):
            rows.append((task.service_type, "hw", cus, max(1e-4, round(work / cus, 4))))
        for rsu in rsus:
            if rng.random() < family.access_probability:
                links[(task.vehicle_id, rsu.id)] = LinkState(
                    task.vehicle_id, rsu.id, float(rng.uniform(*family.rate_range))
                )
    return ProblemInstance(tuple(tasks), tuple(rsus), ExecutionProfile.from_rows(rows), links)


class ScenarioDescriptor(BaseModel):
    """Recuentos y rangos de un escenario sintético.

    Los valores por defecto reproducen el montaje de referencia: 15 RSUs con
    270 RBs y 16 CUs, 80 vehículos, periodos de 50, 67 o 100 ms y entradas
    de 0.07 a 0.3 MB.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    tasks: int = Field(80, ge=0)
    vehicles: int = Field(80, ge=1)
    rsus: int = Field(15, ge=1)
    total_rbs: int = Field(270, ge=1)
    total_cus: int = Field(16, ge=1)
    hardware: Dict[str, float] = {"jetson_orin": 1.0, "jetson_xavier": 0.6}
    service_types: int = Field(3, ge=1)
    base_work_range_s: FloatRange = (0.02, 0.08)
    periods_s: Tuple[float, ...] = DEFAULT_PERIODS_S
    input_mb_range: FloatRange = (0.07, 0.3)
    init_delay_range_s: FloatRange = (0.01, 0.05)
    local_exec_fraction: FloatRange = (0.4, 0.9)
    local_power_range_w: FloatRange = (5.0, 10.0)
    offload_power_range_w: FloatRange = (0.5, 1.5)
    mk_fraction: float = Field(0.5, ge=0, le=1)
    mk_window: Tuple[int, int] = (3, 4)
    area_m: float = Field(2000.0, gt=0)
    road_spacing_m: float = Field(500.0, gt=0)
    speed_range_mps: FloatRange = (8.0, 15.0)
    duration_s: float = Field(60.0, gt=0)
    coverage_radius_m: float = Field(500.0, gt=0)
    sim: Dict[str, object] = {}

    @model_validator(mode="after")
    def _ranges(self) -> "ScenarioDescriptor":
        for name in (
            "base_work_range_s", "input_mb_range", "init_delay_range_s", "local_exec_fraction",
            "local_power_range_w", "offload_power_range_w", "speed_range_mps",
        ):
            _check_range(name, getattr(self, name))
        if self.base_work_range_s[0] <= 0 or self.input_mb_range[0] <= 0 or self.speed_range_mps[0] <= 0:
            raise ValueError("trabajo, datos y velocidad deben ser positivos")
        low, high = self.local_exec_fraction
        if not (0 < low and high <= 1):
            raise ValueError("local_exec_fraction debe estar en (0, 1]")
        if not self.periods_s or min(self.periods_s) <= 0:
            raise ValueError("periodos no positivos")
        if not self.hardware or min(self.hardware.values()) <= 0:
            raise ValueError("se necesita al menos una clase de hardware con velocidad positiva")
        if self.road_spacing_m > self.area_m:
            raise ValueError("road_spacing_m no puede superar area_m")
        m, k = self.mk_window
        if not 0 < m <= k:
            raise ValueError(f"ventana (m, k) inválida {self.mk_window}")
        return self


def _road_point(descriptor: ScenarioDescriptor, s: float) -> Tuple[float, float]:
    """Punto a distancia ``s`` a lo largo de las calles concatenadas."""
    lines = int(descriptor.area_m // descriptor.road_spacing_m) + 1
    road = min(int(s // descriptor.area_m), 2 * lines - 1)
    offset = s - road * descriptor.area_m
    if road < lines:
        return offset, road * descriptor.road_spacing_m
    return (road - lines) * descriptor.road_spacing_m, offset


def _vehicle_route(
    descriptor: ScenarioDescriptor, rng: np.random.Generator, vehicle_id: str
) -> List[TraceRow]:
    """Paseo aleatorio entre cruces de la cuadrícula hasta cubrir la duración."""
    nodes = int(descriptor.area_m // descriptor.road_spacing_m)
    spacing = descriptor.road_spacing_m
    i, j = int(rng.integers(nodes + 1)), int(rng.integers(nodes + 1))
    previous: Optional[Tuple[int, int]] = None
    t = 0.0
    rows = [TraceRow(time_s=0.0, vehicle_id=vehicle_id, x_m=i * spacing, y_m=j * spacing)]
    while t < descriptor.duration_s:
        options = [
            (i + di, j + dj)
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1))
            if 0 <= i + di <= nodes and 0 <= j + dj <= nodes
        ]
        forward = [node for node in options if node != previous] or options
        previous = (i, j)
        i, j = forward[int(rng.integers(len(forward)))]
        t = round(t + spacing / float(rng.uniform(*descriptor.speed_range_mps)), 3)
        rows.append(TraceRow(time_s=t, vehicle_id=vehicle_id, x_m=i * spacing, y_m=j * spacing))
    return rows


def gen_scenario(descriptor: ScenarioDescriptor, seed: int) -> ScenarioDocument:
    """Documento de escenario sintético; mismo descriptor y semilla, mismo documento."""
    rng = np.random.default_rng(seed)
    d = descriptor
    hardware = sorted(d.hardware)

    lines = int(d.area_m // d.road_spacing_m) + 1
    road_length = 2 * lines * d.area_m
    rsus = []
    for k in range(d.rsus):
        x, y = _road_point(d, (k + 0.5) * road_length / d.rsus)
        rsus.append(
            RsuEntry(
                id=f"rsu{k:02d}",
                total_rbs=d.total_rbs,
                total_cus=d.total_cus,
                hardware_class=hardware[k % len(hardware)],
                init_delay_s=round(float(rng.uniform(*d.init_delay_range_s)), 3),
                x_m=round(x, 1),
                y_m=round(y, 1),
            )
        )

    services = [f"svc{s}" for s in range(d.service_types)]
    profiles = []
    for service in services:
        base_work = float(rng.uniform(*d.base_work_range_s))
        for hw in hardware:
            for cus in range(1, d.total_cus + 1):
                proc = max(1e-4, round(base_work / (d.hardware[hw] * cus), 4))
                profiles.append(ProfileEntry(service_type=service, hardware_class=hw, cus=cus, proc_time_s=proc))

    tasks = []
    for i in range(d.tasks):
        period = float(d.periods_s[int(rng.integers(len(d.periods_s)))])
        mk = rng.random() < d.mk_fraction
        tasks.append(
            TaskEntry(
                id=f"t{i:03d}",
                vehicle_id=f"v{i % d.vehicles:03d}",
                period_s=period,
                input_mb=round(float(rng.uniform(*d.input_mb_range)), 4),
                local_exec_s=max(1e-4, round(period * float(rng.uniform(*d.local_exec_fraction)), 4)),
                local_power_w=round(float(rng.uniform(*d.local_power_range_w)), 3),
                offload_power_w=round(float(rng.uniform(*d.offload_power_range_w)), 3),
                service_type=services[int(rng.integers(len(services)))],
                criticality=Criticality.MK_CONSTRAINED if mk else Criticality.SAFETY_CRITICAL,
                mk_window=d.mk_window if mk else None,
            )
        )

    trace_rows: List[TraceRow] = []
    for v in range(d.vehicles):
        trace_rows.extend(_vehicle_route(d, rng, f"v{v:03d}"))

    sim = SimConfig(
        **{
            "duration_s": d.duration_s,
            "coverage_radius_m": d.coverage_radius_m,
            "rng_seed": seed,
            **d.sim,
        }
    )
    logging.debug("Escenario sintético: %d RSUs, %d tareas, %d vehículos", d.rsus, d.tasks, d.vehicles)
    return ScenarioDocument(
        format_version=FORMAT_VERSION,
        rsus=rsus,
        tasks=tasks,
        profiles=profiles,
        traces=TraceSection(inline=trace_rows),
        channel=ChannelParams(),
        sim=sim,
    )
