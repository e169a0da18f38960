"""Algoritmo SARound: redondeo por RSU (FloorRd) y descomposición local-ratio.

Las RSUs se recorren en orden fijo. En cada capa se resuelve la relajación
lineal de la RSU con los pesos vigentes, se redondea hacia abajo y se
descompone el vector de pesos; el resto ``w2`` alimenta la capa siguiente.
Al deshacer la pila, una instancia de la capa k se descarta si su tarea ya
tiene instancia seleccionada en capas posteriores.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvariantError
from .feasibility import validate
from .instances import InstancePool
from .lp import BasicSolution, LinearProgram, build_rsu_lp, solve_lp
from .models import Assignment, ProblemInstance


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Vector de pesos w^k indexado por instance_id."""

    values: np.ndarray
    layer: int


@dataclass(frozen=True)
class LayerResult:
    """F^k (seleccionadas en la RSU) y S^k (fusionadas desde esta capa hacia abajo)."""

    rsu_id: str
    selected: FrozenSet[int]
    merged: FrozenSet[int] = frozenset()


@dataclass(frozen=True, eq=False)
class FloorOutcome:
    """Detalle de una llamada a FloorRd, útil para certificar invariantes."""

    selected: FrozenSet[int]
    program: LinearProgram
    solution: BasicSolution
    rounded: FrozenSet[int]
    best_single: Optional[int]


@dataclass(frozen=True, eq=False)
class SaroundTrace:
    weights: Tuple[WeightVector, ...]
    layers: Tuple[LayerResult, ...]
    selected: FrozenSet[int]


def _weight_of(ids, weights: np.ndarray) -> float:
    return math.fsum(float(weights[i]) for i in ids)


def _packs(pool: InstancePool, rsu_id: str, ids) -> bool:
    rbs, cus = pool.capacity(rsu_id)
    tasks = [pool[i].task_id for i in ids]
    return (
        len(tasks) == len(set(tasks))
        and sum(pool[i].rbs for i in ids) <= rbs
        and sum(pool[i].cus for i in ids) <= cus
    )


def floor_rd_detailed(pool: InstancePool, rsu_id: str, weights: np.ndarray) -> FloorOutcome:
    program = build_rsu_lp(pool, rsu_id, weights)
    solution = solve_lp(program)
    snapped = solution.snapped()
    rounded = frozenset(program.variable_ids[j] for j in np.flatnonzero(snapped == 1.0))
    candidates = program.variable_ids
    best_single = min(candidates, key=lambda i: (-weights[i], i)) if candidates else None
    if rounded and not _packs(pool, rsu_id, rounded):
        logging.warning("FloorRd en %s produjo un conjunto no empaquetable; se descarta", rsu_id)
        rounded = frozenset()
    if best_single is None:
        selected: FrozenSet[int] = frozenset()
    elif _weight_of(rounded, weights) < float(weights[best_single]):
        selected = frozenset((best_single,))
    else:
        selected = rounded
    return FloorOutcome(selected, program, solution, rounded, best_single)


def floor_rd(pool: InstancePool, rsu_id: str, weights: np.ndarray) -> FrozenSet[int]:
    """FloorRd: el mejor entre el redondeo hacia abajo del LP y la instancia de mayor peso."""
    return floor_rd_detailed(pool, rsu_id, weights).selected


def decompose(
    weights: np.ndarray,
    pool: InstancePool,
    rsu_id: str,
    selected: FrozenSet[int],
) -> Tuple[np.ndarray, np.ndarray]:
    """Divide ``weights`` en (w1, w2) con w1 + w2 == weights elemento a elemento."""
    w1 = np.zeros_like(weights, dtype=float)
    w2 = np.array(weights, dtype=float, copy=True)
    local = np.array(pool.for_rsu(rsu_id), dtype=int)
    if local.size:
        w1[local] = weights[local]
        w2[local] = 0.0
    for chosen in selected:
        anchor = float(weights[chosen])
        for sibling in pool.siblings(chosen):
            if pool[sibling].rsu_id == rsu_id:
                continue
            w1[sibling] = anchor
            w2[sibling] = weights[sibling] - anchor
    return w1, w2


def saround_trace(
    pool: InstancePool,
    order: Optional[Sequence[str]] = None,
    observer: Optional[Callable[[str, FloorOutcome], None]] = None,
) -> SaroundTrace:
    """Ejecuta SARound guardando pesos y resultados de cada capa.

    ``observer`` recibe el detalle de cada FloorRd (programa y solución).
    """
    rsu_order = list(order) if order is not None else list(pool.rsu_ids)
    weights = pool.utilities
    stack: List[Tuple[str, FrozenSet[int]]] = []
    history: List[WeightVector] = []
    for layer, rsu_id in enumerate(rsu_order, start=1):
        history.append(WeightVector(weights, layer))
        outcome = floor_rd_detailed(pool, rsu_id, weights)
        if observer is not None:
            observer(rsu_id, outcome)
        chosen = outcome.selected
        _, weights = decompose(weights, pool, rsu_id, chosen)
        stack.append((rsu_id, chosen))
        logging.debug("SARound capa %d (%s): %d instancias", layer, rsu_id, len(chosen))

    merged: set = set()
    layers: List[LayerResult] = []
    while stack:
        rsu_id, chosen = stack.pop()
        taken = {pool[i].task_id for i in merged}
        kept = frozenset(i for i in chosen if pool[i].task_id not in taken)
        merged |= kept
        layers.append(LayerResult(rsu_id, chosen, frozenset(merged)))
    layers.reverse()
    return SaroundTrace(tuple(history), tuple(layers), frozenset(merged))


def saround(
    pool: InstancePool,
    instance: Optional[ProblemInstance] = None,
    order: Optional[Sequence[str]] = None,
) -> Assignment:
    """SARound sobre todas las RSUs; la utilidad devuelta usa las utilidades base.

    Con ``instance`` la asignación se valida antes de devolverla y cualquier
    incumplimiento lanza :class:`InvariantError`.
    """
    trace = saround_trace(pool, order)
    assignment = Assignment.build((pool[i] for i in trace.selected), pool.rsu_ids)
    if instance is not None:
        violations = validate(assignment, instance)
        if violations:
            raise InvariantError(
                f"SARound produjo una asignación inviable: {'; '.join(str(v) for v in violations)}"
            )
    return assignment
