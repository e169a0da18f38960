"""Enumeración del conjunto de instancias de servicio L y sus particiones."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import UnknownRsuError
from .feasibility import UtilityFunction, energy_saving, utility
from .models import ExecutionProfile, LinkState, ProblemInstance, RsuSpec, TaskSpec


@dataclass(frozen=True)
class ServiceInstance:
    """Candidato ⟨tarea, RSU, RBs, CUs⟩ con su utilidad base."""

    instance_id: int
    task_id: str
    rsu_id: str
    rbs: int
    cus: int
    base_utility: float

    @property
    def sort_key(self) -> Tuple[str, str, int, int]:
        return (self.task_id, self.rsu_id, self.rbs, self.cus)


@dataclass(frozen=True)
class InstancePool:
    """Conjunto de instancias con índices por tarea y por RSU.

    ``capacities`` guarda la capacidad (RBs, CUs) de cada RSU con la que se
    construyó el conjunto, de modo que los algoritmos no necesitan la
    instancia del problema para comprobar el empaquetado.
    """

    instances: Tuple[ServiceInstance, ...] = ()
    capacities: Mapping[str, Tuple[int, int]] = field(default_factory=dict)
    by_task: Mapping[str, Tuple[int, ...]] = field(init=False)
    by_rsu: Mapping[str, Tuple[int, ...]] = field(init=False)

    def __post_init__(self) -> None:
        by_task: Dict[str, List[int]] = {}
        by_rsu: Dict[str, List[int]] = {rsu_id: [] for rsu_id in sorted(self.capacities)}
        for position, inst in enumerate(self.instances):
            if inst.instance_id != position:
                raise ValueError("Los identificadores de instancia deben ser densos y ordenados")
            by_task.setdefault(inst.task_id, []).append(inst.instance_id)
            by_rsu.setdefault(inst.rsu_id, []).append(inst.instance_id)
        object.__setattr__(self, "capacities", dict(self.capacities))
        object.__setattr__(self, "by_task", {k: tuple(v) for k, v in sorted(by_task.items())})
        object.__setattr__(self, "by_rsu", {k: tuple(v) for k, v in sorted(by_rsu.items())})

    @classmethod
    def from_instances(
        cls,
        candidates: Iterable[ServiceInstance],
        capacities: Mapping[str, Tuple[int, int]],
    ) -> "InstancePool":
        """Reasigna identificadores según el orden (tarea, RSU, b, c)."""
        ordered = sorted(candidates, key=lambda inst: inst.sort_key)
        renumbered = tuple(
            ServiceInstance(i, inst.task_id, inst.rsu_id, inst.rbs, inst.cus, inst.base_utility)
            for i, inst in enumerate(ordered)
        )
        return cls(renumbered, capacities)

    def __len__(self) -> int:
        return len(self.instances)

    def __getitem__(self, instance_id: int) -> ServiceInstance:
        return self.instances[instance_id]

    def __iter__(self):
        return iter(self.instances)

    def siblings(self, instance_id: int) -> Tuple[int, ...]:
        """L(ℓ): todas las instancias de la misma tarea, incluida ℓ."""
        return self.by_task[self.instances[instance_id].task_id]

    def for_rsu(self, rsu_id: str) -> Tuple[int, ...]:
        if rsu_id not in self.by_rsu:
            raise UnknownRsuError(rsu_id)
        return self.by_rsu[rsu_id]

    def capacity(self, rsu_id: str) -> Tuple[int, int]:
        if rsu_id not in self.capacities:
            raise UnknownRsuError(rsu_id)
        return self.capacities[rsu_id]

    @property
    def rsu_ids(self) -> Tuple[str, ...]:
        return tuple(sorted(self.capacities))

    @property
    def utilities(self) -> np.ndarray:
        return np.array([inst.base_utility for inst in self.instances], dtype=float)


def _offload_fits(task: TaskSpec, rbs: int, rate: float, proc: float) -> bool:
    return task.input_mb / (rbs * rate) + proc <= task.period_s


def rbs_for_deadline(task: TaskSpec, proc: float, rate: float) -> Optional[int]:
    """Menor número de RBs con el que subida más ``proc`` segundos caben en el periodo."""
    if not rate > 0 or proc >= task.period_s:
        return None
    rbs = max(1, math.ceil(task.input_mb / (rate * (task.period_s - proc))))
    # la forma cerrada puede desviarse un RB por redondeo; se corrige con el predicado exacto
    while rbs > 1 and _offload_fits(task, rbs - 1, rate, proc):
        rbs -= 1
    while not _offload_fits(task, rbs, rate, proc):
        rbs += 1
    return rbs


def min_rbs(
    task: TaskSpec,
    rsu: RsuSpec,
    cus: int,
    link: LinkState,
    profiles: ExecutionProfile,
) -> Optional[int]:
    """Menor número de RBs que cumple el plazo con ``cus`` CUs, sin tope de capacidad."""
    if not link.accessible:
        return None
    proc = profiles.proc_time(task.service_type, rsu.hardware_class, cus)
    if proc is None:
        return None
    return rbs_for_deadline(task, proc, link.rate_mb_per_rb_s)


def _dominated_mask(rbs: np.ndarray, cus: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Marca instancias con otra de b' <= b, c' <= c y u' >= u (alguna estricta)."""
    grid = np.full((int(rbs.max()) + 2, int(cus.max()) + 2), -np.inf)
    grid[rbs + 1, cus + 1] = values
    best = np.maximum.accumulate(np.maximum.accumulate(grid, axis=0), axis=1)
    below = np.maximum(best[rbs, cus + 1], best[rbs + 1, cus])
    return below >= values


def enumerate_instances(
    instance: ProblemInstance,
    prune: bool = False,
    function: UtilityFunction = energy_saving,
) -> InstancePool:
    """Enumera todas las instancias viables con utilidad positiva.

    Con ``prune`` se eliminan las instancias dominadas dentro de cada par
    (tarea, RSU), lo que no altera el óptimo.
    """
    capacities = {rsu.id: instance.capacity(rsu.id) for rsu in instance.rsus}
    candidates: List[ServiceInstance] = []
    for task in sorted(instance.tasks, key=lambda t: t.id):
        for rsu in sorted(instance.rsus, key=lambda r: r.id):
            link = instance.link(task, rsu.id)
            if not link.accessible:
                continue
            pair = _enumerate_pair(task, rsu, link, instance.profiles, capacities[rsu.id], function)
            if prune and len(pair) > 1:
                pair = _prune_pair(pair)
            candidates.extend(pair)
    pool = InstancePool.from_instances(candidates, capacities)
    logging.debug(
        "Enumeradas %d instancias (%d tareas, %d RSUs, prune=%s)",
        len(pool), len(instance.tasks), len(instance.rsus), prune,
    )
    return pool


def _enumerate_pair(
    task: TaskSpec,
    rsu: RsuSpec,
    link: LinkState,
    profiles: ExecutionProfile,
    capacity: Tuple[int, int],
    function: UtilityFunction,
) -> List[ServiceInstance]:
    max_rbs, max_cus = capacity
    found: List[ServiceInstance] = []
    for cus in range(1, max_cus + 1):
        first = min_rbs(task, rsu, cus, link, profiles)
        if first is None:
            continue
        for rbs in range(first, max_rbs + 1):
            value = utility(task, rsu, rbs, cus, link, profiles, function=function)
            if value > 0:
                found.append(ServiceInstance(-1, task.id, rsu.id, rbs, cus, value))
    return found


def _prune_pair(pair: Sequence[ServiceInstance]) -> List[ServiceInstance]:
    rbs = np.array([inst.rbs for inst in pair], dtype=int)
    cus = np.array([inst.cus for inst in pair], dtype=int)
    values = np.array([inst.base_utility for inst in pair], dtype=float)
    dominated = _dominated_mask(rbs, cus, values)
    return [inst for inst, drop in zip(pair, dominated) if not drop]
