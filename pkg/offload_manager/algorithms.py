"""Registro de algoritmos de planificación por nombre."""

from __future__ import annotations

from typing import Callable, Dict, Optional

from .baselines import game, greedy, id_assign, iterative
from .instances import InstancePool
from .models import Assignment, ProblemInstance
from .saround import saround


Algorithm = Callable[[InstancePool, Optional[ProblemInstance]], Assignment]

ALGORITHMS: Dict[str, Algorithm] = {
    "saround": saround,
    "greedy": greedy,
    "iterative": iterative,
    "game": game,
    "id_assign": id_assign,
}
"""Algoritmos que producen una asignación completa del problema."""

CERTIFIABLE = (*ALGORITHMS, "floor_rd")


def get_algorithm(name: str) -> Algorithm:
    try:
        return ALGORITHMS[name]
    except KeyError as exc:
        raise ValueError(f"Algoritmo desconocido: {name!r}") from exc
