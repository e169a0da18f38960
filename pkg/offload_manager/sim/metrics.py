"""Métricas por ciclo de planificación y su resumen."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Dict, List, Sequence, Tuple


@dataclass(frozen=True)
class CycleSnapshot:
    """Fila de resultados de un ciclo ``[start_s, start_s + intervalo)``."""

    cycle: int
    start_s: float
    predicted_js: float
    measured_js: float
    offloaded_jobs: int
    offloaded_jobs_per_s: float
    local_jobs: int
    suspensions: int
    resumptions: int
    failed_offloads: int
    deadline_misses: int
    scheduled: int
    runtime_s: float

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


ROW_FIELDS: Tuple[str, ...] = tuple(f.name for f in fields(CycleSnapshot))
MEAN_FIELDS = ("predicted_js", "measured_js", "offloaded_jobs_per_s", "runtime_s")
SUM_FIELDS = (
    "offloaded_jobs",
    "local_jobs",
    "suspensions",
    "resumptions",
    "failed_offloads",
    "deadline_misses",
)


@dataclass(frozen=True)
class Metrics:
    """Resultados de una simulación: filas por ciclo y agregados.

    Las tasas del resumen son medias de las filas; los contadores, sumas.
    """

    rows: Tuple[CycleSnapshot, ...] = ()

    def _mean(self, name: str) -> float:
        if not self.rows:
            return 0.0
        return math.fsum(getattr(row, name) for row in self.rows) / len(self.rows)

    def _sum(self, name: str) -> int:
        return sum(getattr(row, name) for row in self.rows)

    @property
    def predicted_js(self) -> float:
        return self._mean("predicted_js")

    @property
    def measured_js(self) -> float:
        return self._mean("measured_js")

    @property
    def offloaded_jobs_per_s(self) -> float:
        return self._mean("offloaded_jobs_per_s")

    @property
    def local_jobs(self) -> int:
        return self._sum("local_jobs")

    @property
    def suspensions(self) -> int:
        return self._sum("suspensions")

    @property
    def deadline_misses(self) -> int:
        return self._sum("deadline_misses")

    @property
    def failed_offloads(self) -> int:
        return self._sum("failed_offloads")

    def summary(self) -> Dict[str, float]:
        data: Dict[str, float] = {"cycles": len(self.rows)}
        for name in MEAN_FIELDS:
            data[name] = self._mean(name)
        for name in SUM_FIELDS:
            data[name] = self._sum(name)
        return data


class _Cycle:
    __slots__ = (
        "predicted_area", "energy_j", "offloaded", "local", "suspensions",
        "resumptions", "failed", "misses", "scheduled", "runtime_s",
    )

    def __init__(self) -> None:
        self.predicted_area = 0.0
        self.energy_j = 0.0
        self.offloaded = 0
        self.local = 0
        self.suspensions = 0
        self.resumptions = 0
        self.failed = 0
        self.misses = 0
        self.scheduled = 0
        self.runtime_s = 0.0


class MetricsRecorder:
    """Acumula los sucesos de la simulación en el ciclo al que pertenecen."""

    def __init__(self, cycles: int, interval_s: float) -> None:
        self.cycles = cycles
        self.interval_s = interval_s
        self._cycles: List[_Cycle] = [_Cycle() for _ in range(cycles)]
        self._predicted_rate = 0.0
        self._since = 0.0

    def cycle_of(self, time_s: float) -> int:
        index = math.floor(time_s / self.interval_s + 1e-9)
        return min(max(index, 0), self.cycles - 1)

    def _at(self, time_s: float) -> _Cycle:
        return self._cycles[self.cycle_of(time_s)]

    def _integrate(self, until: float) -> None:
        start = self._since
        while start < until and self.cycles:
            index = self.cycle_of(start)
            boundary = min(until, (index + 1) * self.interval_s)
            if index == self.cycles - 1:
                boundary = until
            self._cycles[index].predicted_area += self._predicted_rate * (boundary - start)
            if boundary <= start:
                break
            start = boundary
        self._since = max(self._since, until)

    def set_predicted(self, time_s: float, rate_js: float) -> None:
        """Cambia la utilidad prevista vigente a partir de ``time_s``."""
        self._integrate(time_s)
        self._predicted_rate = rate_js

    def offloaded(self, time_s: float, saving_j: float) -> None:
        cycle = self._at(time_s)
        cycle.offloaded += 1
        cycle.energy_j += saving_j

    def local(self, time_s: float) -> None:
        self._at(time_s).local += 1

    def failed(self, time_s: float) -> None:
        self._at(time_s).failed += 1

    def deadline_miss(self, time_s: float) -> None:
        self._at(time_s).misses += 1

    def suspension(self, time_s: float) -> None:
        self._at(time_s).suspensions += 1

    def resumption(self, time_s: float) -> None:
        self._at(time_s).resumptions += 1

    def scheduled(self, cycle: int, selected: int, runtime_s: float) -> None:
        self._cycles[cycle].scheduled = selected
        self._cycles[cycle].runtime_s = runtime_s

    def finish(self, horizon_s: float) -> Metrics:
        self._integrate(horizon_s)
        interval = self.interval_s
        rows = tuple(
            CycleSnapshot(
                cycle=k,
                start_s=k * interval,
                predicted_js=c.predicted_area / interval,
                measured_js=c.energy_j / interval,
                offloaded_jobs=c.offloaded,
                offloaded_jobs_per_s=c.offloaded / interval,
                local_jobs=c.local,
                suspensions=c.suspensions,
                resumptions=c.resumptions,
                failed_offloads=c.failed,
                deadline_misses=c.misses,
                scheduled=c.scheduled,
                runtime_s=c.runtime_s,
            )
            for k, c in enumerate(self._cycles)
        )
        return Metrics(rows)


def rows_from_dicts(records: Sequence[Dict[str, object]]) -> Metrics:
    """Reconstruye las métricas a partir de filas leídas de disco."""
    integer = {f.name for f in fields(CycleSnapshot) if f.type in ("int", int)}
    rows = []
    for record in records:
        values = {
            name: int(record[name]) if name in integer else float(record[name]) for name in ROW_FIELDS
        }
        rows.append(CycleSnapshot(**values))
    return Metrics(tuple(rows))
