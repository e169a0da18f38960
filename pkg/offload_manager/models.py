"""Tipos de dominio compartidos por los resolutores y el simulador.

Todas las clases son valores inmutables tras su construcción: pueden
compartirse entre hilos sin sincronización. Las unidades van en el nombre
de cada campo (``_s`` segundos, ``_mb`` megabytes, ``_w`` vatios).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Dict, Iterable, Iterator, Mapping, Optional, Tuple

from .errors import DomainError

if TYPE_CHECKING:  # pragma: no cover - solo para anotaciones
    from .instances import ServiceInstance


PEAK_RATE_MB_PER_RB_S = 37.0 / 270.0
"""Tasa máxima por RB: 37 MB/s repartidos entre 270 RBs."""


class Criticality(str, Enum):
    """Política de ejecución de los trabajos de una tarea."""

    SAFETY_CRITICAL = "safety_critical"
    MK_CONSTRAINED = "mk_constrained"


@dataclass(frozen=True)
class TaskSpec:
    """Tarea periódica de un vehículo; el periodo es también su plazo."""

    id: str
    period_s: float
    input_mb: float
    local_exec_s: float
    local_power_w: float
    offload_power_w: float
    service_type: str
    vehicle_id: str
    criticality: Criticality = Criticality.SAFETY_CRITICAL
    mk_window: Optional[Tuple[int, int]] = None

    def __post_init__(self) -> None:
        if not (self.period_s > 0 and self.input_mb > 0 and self.local_exec_s > 0):
            raise DomainError(f"Tarea {self.id}: periodo, datos y tiempo local deben ser positivos")
        if self.local_exec_s > self.period_s:
            raise DomainError(f"Tarea {self.id}: la ejecución local no cabe en el periodo")
        if self.local_power_w < 0 or self.offload_power_w < 0:
            raise DomainError(f"Tarea {self.id}: potencias negativas")
        if self.criticality is Criticality.MK_CONSTRAINED:
            if self.mk_window is None:
                raise DomainError(f"Tarea {self.id}: falta la ventana (m, k)")
            m, k = self.mk_window
            if not 0 < m <= k:
                raise DomainError(f"Tarea {self.id}: ventana (m, k) inválida {self.mk_window}")

    @property
    def local_energy_j(self) -> float:
        """Energía de una ejecución local completa."""
        return self.local_power_w * self.local_exec_s


@dataclass(frozen=True)
class RsuSpec:
    """Unidad de borde con módulo 5G (RBs) y servidor de cómputo (CUs)."""

    id: str
    total_rbs: int
    total_cus: int
    hardware_class: str
    init_delay_s: float = 0.0
    position: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if self.total_rbs < 1 or self.total_cus < 1:
            raise DomainError(f"RSU {self.id}: capacidades deben ser al menos 1")
        if self.init_delay_s < 0:
            raise DomainError(f"RSU {self.id}: retardo de inicialización negativo")


ProfileKey = Tuple[str, str, int]


@dataclass(frozen=True)
class ExecutionProfile:
    """Tabla (tipo de servicio, clase de hardware, CUs) -> tiempo de proceso.

    La tabla puede ser dispersa; una entrada ausente significa que la
    combinación no es viable.
    """

    table: Mapping[ProfileKey, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        table = dict(self.table)
        series: Dict[Tuple[str, str], list] = {}
        for (service, hardware, cus), proc in table.items():
            if cus < 1:
                raise DomainError(f"Perfil {service}/{hardware}: CUs no positivas ({cus})")
            if not proc > 0:
                raise DomainError(f"Perfil {service}/{hardware}/{cus}: tiempo no positivo")
            series.setdefault((service, hardware), []).append((cus, proc))
        for (service, hardware), points in series.items():
            points.sort()
            for (_, slower), (cus, faster) in zip(points, points[1:]):
                if faster > slower:
                    raise DomainError(
                        f"Perfil {service}/{hardware}: el tiempo crece con {cus} CUs"
                    )
        object.__setattr__(self, "table", table)

    @classmethod
    def from_rows(cls, rows: Iterable[Tuple[str, str, int, float]]) -> "ExecutionProfile":
        return cls({(s, h, int(c)): float(p) for s, h, c, p in rows})

    def proc_time(self, service_type: str, hardware_class: str, cus: int) -> Optional[float]:
        return self.table.get((service_type, hardware_class, cus))

    def service_types(self) -> frozenset:
        return frozenset(key[0] for key in self.table)

    def rows(self) -> Iterator[Tuple[str, str, int, float]]:
        for key in sorted(self.table):
            yield (*key, self.table[key])


@dataclass(frozen=True)
class LinkState:
    """Estado del enlace vehículo-RSU durante un ciclo de planificación."""

    vehicle_id: str
    rsu_id: str
    rate_mb_per_rb_s: float
    accessible: bool = True

    def __post_init__(self) -> None:
        if self.accessible and not self.rate_mb_per_rb_s > 0:
            raise DomainError(
                f"Enlace {self.vehicle_id}->{self.rsu_id}: accesible con tasa {self.rate_mb_per_rb_s}"
            )


@dataclass(frozen=True)
class ProblemInstance:
    """Instantánea del problema de asignación para un ciclo de planificación.

    ``residual`` contiene, si procede, las capacidades restantes por RSU
    (modo SchedRemain); si una RSU no aparece se usa su capacidad nominal.
    """

    tasks: Tuple[TaskSpec, ...]
    rsus: Tuple[RsuSpec, ...]
    profiles: ExecutionProfile
    links: Mapping[Tuple[str, str], LinkState] = field(default_factory=dict)
    residual: Mapping[str, Tuple[int, int]] = field(default_factory=dict)
    _tasks_by_id: Dict[str, TaskSpec] = field(init=False, repr=False, compare=False)
    _rsus_by_id: Dict[str, RsuSpec] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "tasks", tuple(self.tasks))
        object.__setattr__(self, "rsus", tuple(self.rsus))
        tasks_by_id = {t.id: t for t in self.tasks}
        rsus_by_id = {r.id: r for r in self.rsus}
        if len(tasks_by_id) != len(self.tasks):
            raise DomainError("Identificadores de tarea duplicados")
        if len(rsus_by_id) != len(self.rsus):
            raise DomainError("Identificadores de RSU duplicados")
        vehicles = {t.vehicle_id for t in self.tasks}
        for (vehicle_id, rsu_id), link in self.links.items():
            if (link.vehicle_id, link.rsu_id) != (vehicle_id, rsu_id):
                raise DomainError(f"Enlace indexado con clave incoherente {(vehicle_id, rsu_id)}")
            if vehicle_id not in vehicles or rsu_id not in rsus_by_id:
                raise DomainError(f"Enlace {vehicle_id}->{rsu_id} referencia entidades inexistentes")
        for rsu_id, (rbs, cus) in self.residual.items():
            rsu = rsus_by_id.get(rsu_id)
            if rsu is None:
                raise DomainError(f"Capacidad residual de RSU inexistente {rsu_id}")
            if not (0 <= rbs <= rsu.total_rbs and 0 <= cus <= rsu.total_cus):
                raise DomainError(f"RSU {rsu_id}: capacidad residual fuera de rango")
        object.__setattr__(self, "links", dict(self.links))
        object.__setattr__(self, "residual", dict(self.residual))
        object.__setattr__(self, "_tasks_by_id", tasks_by_id)
        object.__setattr__(self, "_rsus_by_id", rsus_by_id)

    def task(self, task_id: str) -> TaskSpec:
        return self._tasks_by_id[task_id]

    def rsu(self, rsu_id: str) -> RsuSpec:
        return self._rsus_by_id[rsu_id]

    def has_task(self, task_id: str) -> bool:
        return task_id in self._tasks_by_id

    def has_rsu(self, rsu_id: str) -> bool:
        return rsu_id in self._rsus_by_id

    def link(self, task: TaskSpec, rsu_id: str) -> LinkState:
        """Enlace del vehículo de ``task`` con la RSU; inaccesible si no hay."""
        found = self.links.get((task.vehicle_id, rsu_id))
        if found is None:
            return LinkState(task.vehicle_id, rsu_id, 0.0, accessible=False)
        return found

    def capacity(self, rsu_id: str) -> Tuple[int, int]:
        """(RBs, CUs) disponibles para este ciclo."""
        if rsu_id in self.residual:
            return self.residual[rsu_id]
        rsu = self._rsus_by_id[rsu_id]
        return rsu.total_rbs, rsu.total_cus


@dataclass(frozen=True)
class Assignment:
    """Solución del problema: instancias seleccionadas y uso de recursos por RSU."""

    selected: Tuple["ServiceInstance", ...] = ()
    used: Mapping[str, Tuple[int, int]] = field(default_factory=dict)
    total_utility: float = 0.0

    @classmethod
    def build(
        cls,
        selected: Iterable["ServiceInstance"],
        rsu_ids: Iterable[str] = (),
    ) -> "Assignment":
        """Construye la asignación calculando uso y utilidad a partir de ``selected``."""
        chosen = tuple(sorted(selected, key=lambda inst: (inst.task_id, inst.instance_id)))
        used: Dict[str, Tuple[int, int]] = {rsu_id: (0, 0) for rsu_id in rsu_ids}
        for inst in chosen:
            rbs, cus = used.get(inst.rsu_id, (0, 0))
            used[inst.rsu_id] = (rbs + inst.rbs, cus + inst.cus)
        total = math.fsum(inst.base_utility for inst in chosen)
        return cls(chosen, dict(sorted(used.items())), total)

    def selection(self, task_id: str) -> Optional["ServiceInstance"]:
        for inst in self.selected:
            if inst.task_id == task_id:
                return inst
        return None

    @property
    def instance_ids(self) -> frozenset:
        return frozenset(inst.instance_id for inst in self.selected)

    @property
    def assigned_tasks(self) -> frozenset:
        return frozenset(inst.task_id for inst in self.selected)

    def __len__(self) -> int:
        return len(self.selected)
