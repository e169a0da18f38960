"""Posiciones de los vehículos y accesibilidad de los enlaces en un instante."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..models import RsuSpec
from ..traces import TraceSet


Link = Tuple[str, str]


@dataclass(frozen=True)
class MobilitySnapshot:
    """Resultado de un paso de movilidad.

    ``distances`` solo contiene los enlaces accesibles.
    """

    time_s: float
    positions: Mapping[str, Tuple[float, float]] = field(default_factory=dict)
    distances: Mapping[Link, float] = field(default_factory=dict)

    @property
    def accessible(self) -> FrozenSet[Link]:
        return frozenset(self.distances)

    @property
    def covered_vehicles(self) -> FrozenSet[str]:
        return frozenset(v for v, _ in self.distances)

    def in_coverage(self, vehicle_id: str) -> bool:
        return vehicle_id in self.covered_vehicles

    def nearest_rsu(self, vehicle_id: str) -> Optional[str]:
        """RSU accesible más cercana; empate por identificador."""
        options = [(d, rsu_id) for (v, rsu_id), d in self.distances.items() if v == vehicle_id]
        return min(options)[1] if options else None


def mobility_step(
    traces: TraceSet,
    time_s: float,
    rsus: Sequence[RsuSpec],
    coverage_radius_m: float,
) -> MobilitySnapshot:
    """Interpola las trazas en ``time_s`` y marca los enlaces dentro del radio."""
    positions: Dict[str, Tuple[float, float]] = {}
    for vehicle_id in traces:
        position = traces.position(vehicle_id, time_s)
        if position is not None:
            positions[vehicle_id] = position
    if not positions or not rsus:
        return MobilitySnapshot(time_s, positions, {})

    vehicle_ids = list(positions)
    rsu_ids = [rsu.id for rsu in rsus]
    points = np.array([positions[v] for v in vehicle_ids], dtype=float)
    anchors = np.array([rsu.position for rsu in rsus], dtype=float)
    gaps = np.hypot(
        points[:, None, 0] - anchors[None, :, 0],
        points[:, None, 1] - anchors[None, :, 1],
    )
    rows, cols = np.nonzero(gaps <= coverage_radius_m)
    distances = {
        (vehicle_ids[r], rsu_ids[c]): float(gaps[r, c]) for r, c in zip(rows.tolist(), cols.tolist())
    }
    return MobilitySnapshot(time_s, positions, distances)
