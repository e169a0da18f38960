"""Concesiones de servicio por RSU y su máquina de estados.

Una concesión reserva ``granted_rbs`` RBs y ``cus`` CUs de su RSU mientras
no esté terminada. Los RBs adicionales (recarga) por encima de
``scheduled_rbs`` salen del remanente libre de la RSU y se devuelven en
cuanto el canal lo permite.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterator, Optional

from ..models import RsuSpec


class Phase(str, Enum):
    AWAITING_INIT = "awaiting_init"
    ACTIVE = "active"
    SUSPENDED = "suspended"
    TERMINATED = "terminated"


class Transition(str, Enum):
    """Cambio producido al reevaluar una concesión con un μ nuevo."""

    NONE = "none"
    ACTIVATED = "activated"
    RESUMED = "resumed"
    SUSPENDED = "suspended"
    TOPPED_UP = "topped_up"
    RELEASED = "released"


@dataclass
class GrantState:
    task_id: str
    rsu_id: str
    scheduled_rbs: int
    granted_rbs: int
    cus: int
    phase: Phase
    service_ready_at: float
    proc_time_s: float
    predicted_js: float = 0.0

    @property
    def live(self) -> bool:
        return self.phase is not Phase.TERMINATED


class RsuRadio:
    """Contabilidad de RBs y CUs de una RSU y de sus concesiones vivas."""

    def __init__(self, rsu: RsuSpec) -> None:
        self.rsu = rsu
        self.grants: Dict[str, GrantState] = {}
        self._used_rbs = 0
        self._used_cus = 0

    @property
    def used_rbs(self) -> int:
        return self._used_rbs

    @property
    def used_cus(self) -> int:
        return self._used_cus

    @property
    def free_rbs(self) -> int:
        return self.rsu.total_rbs - self._used_rbs

    @property
    def free_cus(self) -> int:
        return self.rsu.total_cus - self._used_cus

    def __iter__(self) -> Iterator[GrantState]:
        for task_id in sorted(self.grants):
            yield self.grants[task_id]

    def can_admit(self, rbs: int, cus: int) -> bool:
        return rbs <= self.free_rbs and cus <= self.free_cus

    def admit(self, grant: GrantState) -> None:
        if grant.task_id in self.grants:
            raise ValueError(f"La tarea {grant.task_id} ya tiene concesión en {self.rsu.id}")
        if not self.can_admit(grant.granted_rbs, grant.cus):
            raise ValueError(
                f"Concesión de {grant.task_id} excede la capacidad libre de {self.rsu.id}"
            )
        self.grants[grant.task_id] = grant
        self._used_rbs += grant.granted_rbs
        self._used_cus += grant.cus

    def terminate(self, task_id: str) -> Optional[GrantState]:
        """Libera todos los recursos de la concesión de ``task_id``."""
        grant = self.grants.pop(task_id, None)
        if grant is None:
            return None
        self._used_rbs -= grant.granted_rbs
        self._used_cus -= grant.cus
        grant.phase = Phase.TERMINATED
        return grant

    def terminate_all(self) -> list:
        return [self.terminate(task_id) for task_id in sorted(self.grants)]

    def _resize(self, grant: GrantState, rbs: int) -> None:
        self._used_rbs += rbs - grant.granted_rbs
        grant.granted_rbs = rbs

    def apply_requirement(self, grant: GrantState, required: Optional[int]) -> Transition:
        """Reevalúa ``grant`` con los RBs que exige el canal actual.

        ``required`` es ``None`` cuando ningún número de RBs cumple el plazo.
        Si los RBs concedidos bastan se devuelve la recarga sobrante (nunca por
        debajo de los planificados); si no, se intenta completar con RBs libres
        y, si no hay, la concesión queda suspendida conservando lo planificado.
        """
        before = grant.phase
        if required is not None and grant.granted_rbs >= required:
            target = max(grant.scheduled_rbs, required)
            released = grant.granted_rbs - target
            if released:
                self._resize(grant, target)
            grant.phase = Phase.ACTIVE
            if before is Phase.SUSPENDED:
                return Transition.RESUMED
            if before is Phase.AWAITING_INIT:
                return Transition.ACTIVATED
            return Transition.RELEASED if released else Transition.NONE

        if required is not None and required - grant.granted_rbs <= self.free_rbs:
            self._resize(grant, required)
            grant.phase = Phase.ACTIVE
            if before is Phase.SUSPENDED:
                return Transition.RESUMED
            if before is Phase.AWAITING_INIT:
                return Transition.ACTIVATED
            return Transition.TOPPED_UP

        if grant.granted_rbs > grant.scheduled_rbs:
            self._resize(grant, grant.scheduled_rbs)
        grant.phase = Phase.SUSPENDED
        if before is Phase.SUSPENDED:
            return Transition.NONE
        logging.debug(
            "Concesión %s en %s suspendida: requiere %s RBs, libres %d",
            grant.task_id, grant.rsu_id, required, self.free_rbs,
        )
        return Transition.SUSPENDED

    def conserves_resources(self) -> bool:
        """Comprueba que la suma de lo concedido cabe en la RSU."""
        rbs = sum(g.granted_rbs for g in self.grants.values())
        cus = sum(g.cus for g in self.grants.values())
        return (
            rbs == self._used_rbs
            and cus == self._used_cus
            and rbs <= self.rsu.total_rbs
            and cus <= self.rsu.total_cus
        )
