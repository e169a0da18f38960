"""Trazas de movilidad: puntos de paso por vehículo en CSV.

El fichero tiene cabecera obligatoria ``time_s,vehicle_id,x_m,y_m`` y filas
ordenadas por (vehicle_id, time_s). La interpolación la hace el simulador.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

import numpy as np
import pandas as pd

from .errors import ParseError


TRACE_COLUMNS = ("time_s", "vehicle_id", "x_m", "y_m")


@dataclass(frozen=True, eq=False)
class VehicleTrace:
    """Puntos de paso de un vehículo con tiempos estrictamente crecientes."""

    vehicle_id: str
    times: np.ndarray
    xs: np.ndarray
    ys: np.ndarray

    def present(self, time_s: float) -> bool:
        """Un único punto significa vehículo parado desde ese instante."""
        if time_s < self.times[0]:
            return False
        return len(self.times) == 1 or time_s <= self.times[-1]

    def position(self, time_s: float) -> Optional[Tuple[float, float]]:
        if not self.present(time_s):
            return None
        return float(np.interp(time_s, self.times, self.xs)), float(np.interp(time_s, self.times, self.ys))


@dataclass(frozen=True, eq=False)
class TraceSet:
    vehicles: Mapping[str, VehicleTrace] = field(default_factory=dict)

    def __contains__(self, vehicle_id: str) -> bool:
        return vehicle_id in self.vehicles

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self.vehicles))

    def __len__(self) -> int:
        return len(self.vehicles)

    def position(self, vehicle_id: str, time_s: float) -> Optional[Tuple[float, float]]:
        trace = self.vehicles.get(vehicle_id)
        return None if trace is None else trace.position(time_s)

    def records(self) -> Iterator[Dict[str, object]]:
        """Filas en el orden canónico del fichero."""
        for vehicle_id in self:
            trace = self.vehicles[vehicle_id]
            for t, x, y in zip(trace.times, trace.xs, trace.ys):
                yield {"time_s": float(t), "vehicle_id": vehicle_id, "x_m": float(x), "y_m": float(y)}


def _from_frame(frame: pd.DataFrame, location: str, first_row: int) -> TraceSet:
    """Valida orden, monotonía y finitud; ``first_row`` es el número de la primera fila."""
    missing = [c for c in TRACE_COLUMNS if c not in frame.columns]
    if missing:
        raise ParseError(f"faltan columnas {missing}", location)
    extra = [c for c in frame.columns if c not in TRACE_COLUMNS]
    if extra:
        raise ParseError(f"columnas desconocidas {extra}", location)
    if frame.empty:
        return TraceSet({})

    vehicle = frame["vehicle_id"].astype(str)
    numeric = {}
    for column in ("time_s", "x_m", "y_m"):
        values = pd.to_numeric(frame[column], errors="coerce")
        bad = np.flatnonzero(~np.isfinite(values.to_numpy(dtype=float)))
        if bad.size:
            raise ParseError(f"valor no numérico o no finito en {column}", f"{location}:{first_row + int(bad[0])}")
        numeric[column] = values.to_numpy(dtype=float)

    times = numeric["time_s"]
    ids = vehicle.to_list()
    for row in range(1, len(ids)):
        previous, current = (ids[row - 1], times[row - 1]), (ids[row], times[row])
        if current[0] < previous[0] or (current[0] == previous[0] and current[1] < previous[1]):
            raise ParseError("filas no ordenadas por (vehicle_id, time_s)", f"{location}:{first_row + row}")
        if current[0] == previous[0] and current[1] == previous[1]:
            raise ParseError(
                f"tiempo repetido para {current[0]}", f"{location}:{first_row + row}"
            )

    vehicles: Dict[str, VehicleTrace] = {}
    start = 0
    for row in range(1, len(ids) + 1):
        if row == len(ids) or ids[row] != ids[start]:
            span = slice(start, row)
            vehicles[ids[start]] = VehicleTrace(
                ids[start], times[span].copy(), numeric["x_m"][span].copy(), numeric["y_m"][span].copy()
            )
            start = row
    return TraceSet(vehicles)


def read_trace_csv(source: Union[str, Path, io.StringIO]) -> TraceSet:
    """Lee y valida un CSV de trazas; los errores llevan el número de fila."""
    location = str(source) if not isinstance(source, io.StringIO) else "<traza>"
    try:
        frame = pd.read_csv(
            source,
            dtype={"vehicle_id": str},
            float_precision="round_trip",
            keep_default_na=False,
        )
    except FileNotFoundError as exc:
        raise ParseError("fichero de trazas inexistente", location) from exc
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise ParseError(f"CSV ilegible: {exc}", location) from exc
    # la fila 1 es la cabecera
    return _from_frame(frame, location, first_row=2)


def traces_from_records(records: Iterable[Mapping[str, object]], location: str = "traces.inline") -> TraceSet:
    """Construye trazas a partir de filas en memoria (sección ``inline``)."""
    rows: List[Mapping[str, object]] = list(records)
    frame = pd.DataFrame(rows, columns=list(TRACE_COLUMNS)) if rows else pd.DataFrame(columns=list(TRACE_COLUMNS))
    return _from_frame(frame, location, first_row=0)


def write_trace_csv(traces: TraceSet, path: Union[str, Path]) -> None:
    frame = pd.DataFrame(list(traces.records()), columns=list(TRACE_COLUMNS))
    frame.to_csv(path, index=False, lineterminator="\n")
