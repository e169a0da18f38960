"""Ejecución concurrente de celdas independientes con ``QThreadPool``.

Cada celda (una simulación del banco o una prueba de certificación) es una
ejecución determinista aislada. Los resultados se guardan en la posición de
su celda, de modo que el orden final es el de la matriz y no el de
finalización.
"""

from __future__ import annotations

import logging
from typing import Callable, List, Optional, Sequence, Tuple, TypeVar

from PyQt6.QtCore import QRunnable, QThreadPool


T = TypeVar("T")
Slot = Optional[Tuple[bool, object]]


class CellTask(QRunnable):
    """Ejecuta una celda en un hilo del pool y deja el resultado en su casilla."""

    def __init__(self, index: int, job: Callable[[], object], slots: List[Slot]) -> None:
        super().__init__()
        # el pool no debe destruir la tarea: se consulta tras waitForDone
        self.setAutoDelete(False)
        self.index = index
        self.job = job
        self.slots = slots

    def run(self) -> None:
        try:
            self.slots[self.index] = (True, self.job())
        except Exception as exc:
            logging.exception("Cell %d failed", self.index)
            self.slots[self.index] = (False, exc)


def run_parallel(jobs: Sequence[Callable[[], T]], workers: int) -> List[T]:
    """Ejecuta ``jobs`` con hasta ``workers`` hilos y devuelve sus resultados en orden.

    Si alguna celda falla se relanza la excepción de la primera en el orden
    de la matriz.
    """
    if workers <= 1 or len(jobs) <= 1:
        return [job() for job in jobs]
    pool = QThreadPool()
    pool.setMaxThreadCount(workers)
    slots: List[Slot] = [None] * len(jobs)
    tasks = [CellTask(index, job, slots) for index, job in enumerate(jobs)]
    for task in tasks:
        pool.start(task)
    pool.waitForDone()
    logging.debug("Pool terminado: %d celdas con %d hilos", len(tasks), workers)

    results: List[T] = []
    for index, slot in enumerate(slots):
        if slot is None:
            raise RuntimeError(f"La celda {index} no produjo resultado")
        ok, value = slot
        if not ok:
            raise value  # type: ignore[misc]
        results.append(value)  # type: ignore[arg-type]
    return results
