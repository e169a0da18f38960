"""Predicados de viabilidad, función de utilidad y validación de asignaciones."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Tuple

from .errors import DomainError
from .models import Assignment, ExecutionProfile, LinkState, ProblemInstance, RsuSpec, TaskSpec


UtilityFunction = Callable[[TaskSpec, RsuSpec, int, int, LinkState, ExecutionProfile], float]
"""Utilidad de una instancia ya viable: (tarea, RSU, RBs, CUs, enlace, perfiles)."""

UTILITY_TOLERANCE = 1e-9


def offload_time(input_mb: float, rbs: int, rate_mb_per_rb_s: float) -> float:
    """Tiempo de subida de un trabajo: ``input_mb / (rbs * rate)``."""
    if rbs < 1:
        raise DomainError(f"Se necesitan al menos 1 RB, recibido {rbs}")
    if not rate_mb_per_rb_s > 0:
        raise DomainError(f"Tasa por RB no positiva: {rate_mb_per_rb_s}")
    if not input_mb > 0:
        raise DomainError(f"Tamaño de entrada no positivo: {input_mb}")
    return input_mb / (rbs * rate_mb_per_rb_s)


def deadline_feasible(
    task: TaskSpec,
    rsu: RsuSpec,
    rbs: int,
    cus: int,
    link: LinkState,
    profiles: ExecutionProfile,
) -> bool:
    """Cierto si subida más procesado caben en el periodo de la tarea."""
    if not link.accessible or rbs < 1 or cus < 1:
        return False
    if rbs > rsu.total_rbs or cus > rsu.total_cus:
        return False
    proc = profiles.proc_time(task.service_type, rsu.hardware_class, cus)
    if proc is None:
        return False
    return offload_time(task.input_mb, rbs, link.rate_mb_per_rb_s) + proc <= task.period_s


def energy_saving(
    task: TaskSpec,
    rsu: RsuSpec,
    rbs: int,
    cus: int,
    link: LinkState,
    profiles: ExecutionProfile,
) -> float:
    """Ahorro energético por segundo de descargar cada trabajo de la tarea."""
    offload_energy = task.offload_power_w * offload_time(task.input_mb, rbs, link.rate_mb_per_rb_s)
    return (task.local_energy_j - offload_energy) / task.period_s


def utility(
    task: TaskSpec,
    rsu: RsuSpec,
    rbs: int,
    cus: int,
    link: LinkState,
    profiles: ExecutionProfile,
    *,
    deployed: bool = True,
    function: UtilityFunction = energy_saving,
) -> float:
    """Utilidad de servir la tarea en la RSU con (rbs, cus); nunca negativa.

    Vale 0 si la tarea no se descarga, si el enlace no es accesible o si no
    se cumple el plazo. En otro caso aplica ``function`` y recorta a 0.
    """
    if not deployed:
        return 0.0
    if not deadline_feasible(task, rsu, rbs, cus, link, profiles):
        return 0.0
    return max(0.0, function(task, rsu, rbs, cus, link, profiles))


@dataclass(frozen=True)
class Violation:
    """Restricción incumplida por una asignación."""

    kind: str
    offender: str
    detail: str = ""

    def __str__(self) -> str:
        text = f"{self.kind}({self.offender})"
        return f"{text}: {self.detail}" if self.detail else text


def check_packing(
    assignment: Assignment,
    capacities: Mapping[str, Tuple[int, int]],
) -> List[Violation]:
    """Comprueba elección única por tarea, capacidades y coherencia de totales."""
    violations: List[Violation] = []
    per_task: Dict[str, int] = {}
    usage: Dict[str, Tuple[int, int]] = {}
    for inst in assignment.selected:
        per_task[inst.task_id] = per_task.get(inst.task_id, 0) + 1
        rbs, cus = usage.get(inst.rsu_id, (0, 0))
        usage[inst.rsu_id] = (rbs + inst.rbs, cus + inst.cus)
    for task_id in sorted(per_task):
        if per_task[task_id] > 1:
            violations.append(Violation("MultipleChoiceViolation", task_id, f"{per_task[task_id]} instancias"))
    for rsu_id in sorted(usage):
        rbs, cus = usage[rsu_id]
        if rsu_id not in capacities:
            violations.append(Violation("UnknownReference", rsu_id, "RSU inexistente"))
            continue
        total_rbs, total_cus = capacities[rsu_id]
        if rbs > total_rbs:
            violations.append(Violation("RbCapacityViolation", rsu_id, f"{rbs} > {total_rbs}"))
        if cus > total_cus:
            violations.append(Violation("CuCapacityViolation", rsu_id, f"{cus} > {total_cus}"))
    for rsu_id in sorted(set(usage) | set(assignment.used)):
        reported = tuple(assignment.used.get(rsu_id, (0, 0)))
        if reported != usage.get(rsu_id, (0, 0)):
            violations.append(Violation("UsageMismatch", rsu_id, f"declarado {reported}"))
    expected = math.fsum(inst.base_utility for inst in assignment.selected)
    if abs(expected - assignment.total_utility) > UTILITY_TOLERANCE * max(1.0, abs(expected)):
        violations.append(
            Violation("UtilityMismatch", "total", f"{assignment.total_utility} != {expected}")
        )
    return violations


def validate(assignment: Assignment, instance: ProblemInstance) -> List[Violation]:
    """Lista de restricciones del problema que incumple ``assignment``; vacía si es viable."""
    violations: List[Violation] = []
    capacities = {rsu.id: instance.capacity(rsu.id) for rsu in instance.rsus}
    violations.extend(check_packing(assignment, capacities))
    for inst in assignment.selected:
        if not instance.has_task(inst.task_id):
            violations.append(Violation("UnknownReference", inst.task_id, "tarea inexistente"))
            continue
        if not instance.has_rsu(inst.rsu_id):
            continue
        task = instance.task(inst.task_id)
        rsu = instance.rsu(inst.rsu_id)
        link = instance.link(task, rsu.id)
        if not link.accessible:
            violations.append(Violation("AccessViolation", inst.task_id, f"RSU {rsu.id} inaccesible"))
            continue
        if not deadline_feasible(task, rsu, inst.rbs, inst.cus, link, instance.profiles):
            violations.append(
                Violation("DeadlineViolation", inst.task_id, f"b={inst.rbs} c={inst.cus} en {rsu.id}")
            )
    return violations
