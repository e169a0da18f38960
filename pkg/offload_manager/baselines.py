"""Algoritmos de comparación: Greedy, Iterative, Game e IDAssign.

Son reconstrucciones a partir de descripciones breves; los detalles
internos (subresolutores voraces de Iterative, conjunto de desviaciones de
Game y umbral ligero/pesado de IDAssign) son decisiones propias.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import numpy as np

from .instances import InstancePool, ServiceInstance
from .models import Assignment, ProblemInstance


GAIN_TOLERANCE = 1e-12


@dataclass(frozen=True)
class EfficiencyScore:
    """Utilidad dividida por la fracción de RBs por la fracción de CUs que consume."""

    instance_id: int
    value: float


def efficiency_scores(pool: InstancePool) -> List[EfficiencyScore]:
    scores = []
    for inst in pool:
        total_rbs, total_cus = pool.capacity(inst.rsu_id)
        share = (inst.rbs / total_rbs) * (inst.cus / total_cus)
        scores.append(EfficiencyScore(inst.instance_id, inst.base_utility / share))
    return scores


class _Packing:
    """Estado mutable de una asignación parcial: instancia por tarea y residuo por RSU."""

    def __init__(self, pool: InstancePool, chosen: Optional[Mapping[str, int]] = None) -> None:
        self.pool = pool
        self.residual: Dict[str, List[int]] = {
            rsu_id: list(capacity) for rsu_id, capacity in pool.capacities.items()
        }
        self.chosen: Dict[str, int] = {}
        for task_id, inst_id in sorted((chosen or {}).items()):
            if not self.add(inst_id):
                raise ValueError(f"La asignación inicial no cabe: tarea {task_id}")

    def fits(self, inst: ServiceInstance) -> bool:
        rbs, cus = self.residual[inst.rsu_id]
        return inst.rbs <= rbs and inst.cus <= cus

    def add(self, inst_id: int) -> bool:
        inst = self.pool[inst_id]
        if inst.task_id in self.chosen or not self.fits(inst):
            return False
        self.chosen[inst.task_id] = inst_id
        self.residual[inst.rsu_id][0] -= inst.rbs
        self.residual[inst.rsu_id][1] -= inst.cus
        return True

    def remove(self, task_id: str) -> Optional[int]:
        inst_id = self.chosen.pop(task_id, None)
        if inst_id is not None:
            inst = self.pool[inst_id]
            self.residual[inst.rsu_id][0] += inst.rbs
            self.residual[inst.rsu_id][1] += inst.cus
        return inst_id

    def total(self) -> float:
        return sum(self.pool[i].base_utility for i in self.chosen.values())

    def assignment(self) -> Assignment:
        return Assignment.build((self.pool[i] for i in self.chosen.values()), self.pool.rsu_ids)


def _initial_choice(pool: InstancePool, initial: Optional[Assignment]) -> Dict[str, int]:
    if initial is None:
        return {}
    return {inst.task_id: inst.instance_id for inst in initial.selected}


def greedy(pool: InstancePool, instance: Optional[ProblemInstance] = None) -> Assignment:
    """Recorre las instancias por eficiencia no creciente y acepta las que caben."""
    packing = _Packing(pool)
    scores = sorted(efficiency_scores(pool), key=lambda s: (-s.value, s.instance_id))
    for score in scores:
        packing.add(score.instance_id)
    return packing.assignment()


def _footprint(pool: InstancePool, inst: ServiceInstance) -> float:
    total_rbs, total_cus = pool.capacity(inst.rsu_id)
    return inst.rbs / total_rbs + inst.cus / total_cus


def _offloading_step(pool: InstancePool, chosen: Dict[str, int]) -> Dict[str, int]:
    """Reasigna RSUs con (b, c) fijo; las tareas sin asignar usan su menor huella."""
    candidates: Dict[str, List[int]] = {}
    for task_id, members in pool.by_task.items():
        if task_id in chosen:
            ref = pool[chosen[task_id]]
        else:
            ref = min(
                (pool[i] for i in members),
                key=lambda inst: (_footprint(pool, inst), -inst.base_utility, inst.instance_id),
            )
        candidates[task_id] = [
            i for i in members if (pool[i].rbs, pool[i].cus) == (ref.rbs, ref.cus)
        ]
    order = sorted(
        candidates,
        key=lambda t: (-max(pool[i].base_utility for i in candidates[t]), t),
    )
    packing = _Packing(pool)
    for task_id in order:
        for inst_id in sorted(candidates[task_id], key=lambda i: (-pool[i].base_utility, i)):
            if packing.add(inst_id):
                break
    return dict(packing.chosen)


def _allocation_step(pool: InstancePool, chosen: Dict[str, int]) -> Dict[str, int]:
    """Por RSU, parte de la menor huella de cada tarea y mejora por ganancia marginal."""
    result = dict(chosen)
    for rsu_id in pool.rsu_ids:
        tasks = sorted(t for t, i in chosen.items() if pool[i].rsu_id == rsu_id)
        if not tasks:
            continue
        local = {
            t: [i for i in pool.by_task[t] if pool[i].rsu_id == rsu_id] for t in tasks
        }
        floors = {
            t: min(
                local[t],
                key=lambda i: (_footprint(pool, pool[i]), -pool[i].base_utility, i),
            )
            for t in tasks
        }
        rbs_left, cus_left = pool.capacity(rsu_id)
        rbs_left -= sum(pool[i].rbs for i in floors.values())
        cus_left -= sum(pool[i].cus for i in floors.values())
        if rbs_left < 0 or cus_left < 0:
            continue
        current = dict(floors)
        while True:
            best: Optional[Tuple[float, int, str, int]] = None
            for t in tasks:
                now = pool[current[t]]
                for i in local[t]:
                    inst = pool[i]
                    gain = inst.base_utility - now.base_utility
                    extra_rbs = inst.rbs - now.rbs
                    extra_cus = inst.cus - now.cus
                    if gain <= GAIN_TOLERANCE or extra_rbs > rbs_left or extra_cus > cus_left:
                        continue
                    key = (-gain, extra_rbs + extra_cus, t, i)
                    if best is None or key < best:
                        best = key
            if best is None:
                break
            _, _, t, i = best
            rbs_left -= pool[i].rbs - pool[current[t]].rbs
            cus_left -= pool[i].cus - pool[current[t]].cus
            current[t] = i
        before = sum(pool[chosen[t]].base_utility for t in tasks)
        after = sum(pool[current[t]].base_utility for t in tasks)
        if after >= before:
            result.update(current)
    return result


def _utility_of(pool: InstancePool, chosen: Mapping[str, int]) -> float:
    return sum(pool[i].base_utility for i in chosen.values())


def iterative(
    pool: InstancePool,
    instance: Optional[ProblemInstance] = None,
    max_rounds: int = 20,
    initial: Optional[Assignment] = None,
) -> Assignment:
    """Alterna paso de descarga y paso de asignación de recursos."""
    if max_rounds < 1:
        raise ValueError("max_rounds debe ser al menos 1")
    chosen = dict(_Packing(pool, _initial_choice(pool, initial)).chosen)
    for round_index in range(1, max_rounds + 1):
        previous = dict(chosen)
        moved = _offloading_step(pool, chosen)
        if _utility_of(pool, moved) >= _utility_of(pool, chosen):
            chosen = moved
        chosen = _allocation_step(pool, chosen)
        logging.debug("Iterative ronda %d: utilidad %.6f", round_index, _utility_of(pool, chosen))
        if chosen == previous:
            break
    return _Packing(pool, chosen).assignment()


def game(
    pool: InstancePool,
    instance: Optional[ProblemInstance] = None,
    max_iters: Optional[int] = None,
    initial: Optional[Assignment] = None,
) -> Assignment:
    """Dinámica de mejor respuesta secuencial sobre desviaciones unilaterales."""
    if max_iters is None:
        max_iters = 10 * max(1, len(pool.by_task))
    if max_iters < 1:
        raise ValueError("max_iters debe ser al menos 1")
    packing = _Packing(pool, _initial_choice(pool, initial))
    if not len(pool):
        return packing.assignment()

    tasks = list(pool.by_task)
    task_index = {t: k for k, t in enumerate(tasks)}
    rsus = pool.rsu_ids
    rsu_index = {r: k for k, r in enumerate(rsus)}
    inst_task = np.array([task_index[inst.task_id] for inst in pool])
    inst_rsu = np.array([rsu_index[inst.rsu_id] for inst in pool])
    inst_rbs = np.array([inst.rbs for inst in pool])
    inst_cus = np.array([inst.cus for inst in pool])
    inst_util = pool.utilities

    for iteration in range(max_iters):
        res_rbs = np.array([packing.residual[r][0] for r in rsus])
        res_cus = np.array([packing.residual[r][1] for r in rsus])
        cur_util = np.zeros(len(tasks))
        cur_rsu = np.full(len(tasks), -1)
        cur_rbs = np.zeros(len(tasks), dtype=int)
        cur_cus = np.zeros(len(tasks), dtype=int)
        for task_id, inst_id in packing.chosen.items():
            k = task_index[task_id]
            inst = pool[inst_id]
            cur_util[k] = inst.base_utility
            cur_rsu[k] = rsu_index[inst.rsu_id]
            cur_rbs[k] = inst.rbs
            cur_cus[k] = inst.cus
        own = cur_rsu[inst_task] == inst_rsu
        fits = (inst_rbs <= res_rbs[inst_rsu] + own * cur_rbs[inst_task]) & (
            inst_cus <= res_cus[inst_rsu] + own * cur_cus[inst_task]
        )
        gain = np.where(fits, inst_util - cur_util[inst_task], -np.inf)
        best = int(np.argmax(gain))
        if not gain[best] > GAIN_TOLERANCE:
            logging.debug("Game converge tras %d iteraciones", iteration)
            break
        task_id = pool[best].task_id
        packing.remove(task_id)
        packing.add(best)
    return packing.assignment()


def is_heavy(pool: InstancePool, inst: ServiceInstance) -> bool:
    total_rbs, total_cus = pool.capacity(inst.rsu_id)
    return inst.rbs > total_rbs / 2 or inst.cus > total_cus / 2


def id_assign(pool: InstancePool, instance: Optional[ProblemInstance] = None) -> Assignment:
    """Local-ratio sobre las instancias ligeras y después las pesadas en el residuo."""
    packing = _Packing(pool)
    light = [inst.instance_id for inst in pool if not is_heavy(pool, inst)]
    heavy = [inst.instance_id for inst in pool if is_heavy(pool, inst)]

    weights = pool.utilities.copy()
    alive = np.zeros(len(pool), dtype=bool)
    alive[light] = True
    task_of = np.array([inst.task_id for inst in pool], dtype=object)
    rsu_of = np.array([inst.rsu_id for inst in pool], dtype=object)
    share = np.array([_footprint(pool, inst) for inst in pool], dtype=float)
    stack: List[int] = []
    while True:
        live = np.flatnonzero(alive & (weights > GAIN_TOLERANCE))
        if live.size == 0:
            break
        pick = int(live[np.argmax(weights[live])])
        value = weights[pick]
        stack.append(pick)
        same_task = alive & (task_of == task_of[pick])
        same_rsu = alive & (rsu_of == rsu_of[pick]) & ~same_task
        weights[same_task] -= value
        weights[same_rsu] -= value * share[same_rsu]
        alive[pick] = False
        alive &= weights > GAIN_TOLERANCE

    for inst_id in reversed(stack):
        packing.add(inst_id)

    def by_value(ids: Iterable[int]) -> List[int]:
        return sorted(ids, key=lambda i: (-pool[i].base_utility, i))

    for inst_id in by_value(heavy):
        packing.add(inst_id)
    for inst_id in by_value(light):
        packing.add(inst_id)
    return packing.assignment()
