"""Modelo de canal: índice MCS por enlace y tasa por RB resultante.

Cada enlace (vehículo, RSU) recorre un paseo aleatorio perezoso sobre el
índice MCS, avanzado en los ticks de SRS. El nivel de calidad fija la media
y la probabilidad de salto; la distancia a la RSU limita el índice máximo.
Entre dos SRS la tasa no cambia.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..models import PEAK_RATE_MB_PER_RB_S
from ..utils import stable_hash
from .config import Quality


MCS_EFFICIENCY = np.array(
    [
        0.1523, 0.2344, 0.3770, 0.6016, 0.8770,
        1.1758, 1.4766, 1.9141, 2.4063, 2.7305,
        3.3223, 3.9023, 4.5234, 5.1152, 5.5547,
    ]
)
"""Eficiencia espectral (bits/s/Hz) de los índices 0..14."""

RATE_FRACTION = MCS_EFFICIENCY / MCS_EFFICIENCY[-1]
"""Fracción de la tasa máxima por RB para cada índice; el 14 vale 1."""

MAX_MCS = len(MCS_EFFICIENCY) - 1
TOWARD_MEAN_PROBABILITY = 0.75


def rate_for_mcs(mcs: int) -> float:
    """Tasa por RB (MB/s) del índice ``mcs``."""
    if not 0 <= mcs <= MAX_MCS:
        raise ValueError(f"Índice MCS fuera de rango: {mcs}")
    return PEAK_RATE_MB_PER_RB_S * float(RATE_FRACTION[mcs])


def distance_cap(distance_m: float, attenuation: float) -> int:
    """Índice máximo alcanzable a ``distance_m`` metros de la RSU."""
    return max(0, min(MAX_MCS, MAX_MCS - int(attenuation * distance_m / 100.0)))


@dataclass(frozen=True)
class QualityPreset:
    mean_mcs: int
    step_probability: float


QUALITY_PRESETS: Mapping[Quality, QualityPreset] = {
    Quality.HIGH: QualityPreset(13, 0.05),
    Quality.MEDIUM: QualityPreset(9, 0.15),
    Quality.LOW: QualityPreset(5, 0.25),
}


class ScriptEntry(BaseModel):
    """Fija el MCS de los enlaces que casan desde ``time_s``; ``mcs`` nulo libera."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    time_s: float = Field(ge=0)
    mcs: Optional[int] = Field(default=None, ge=0, le=MAX_MCS)
    vehicle_id: Optional[str] = None
    rsu_id: Optional[str] = None

    def matches(self, vehicle_id: str, rsu_id: str) -> bool:
        return (self.vehicle_id in (None, vehicle_id)) and (self.rsu_id in (None, rsu_id))


class ChannelParams(BaseModel):
    """Sección ``channel`` de un escenario: calidad, ajustes y guion."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    quality: Optional[Quality] = None
    mean_mcs: Optional[int] = Field(default=None, ge=0, le=MAX_MCS)
    step_probability: Optional[float] = Field(default=None, ge=0, le=1)
    distance_attenuation: float = Field(default=1.0, ge=0)
    script: Tuple[ScriptEntry, ...] = ()

    def preset(
        self,
        quality: Quality,
        presets: Optional[Mapping[Quality, QualityPreset]] = None,
    ) -> QualityPreset:
        """Preset del nivel de calidad con los ajustes del escenario aplicados."""
        base = (presets or QUALITY_PRESETS)[quality]
        return QualityPreset(
            base.mean_mcs if self.mean_mcs is None else self.mean_mcs,
            base.step_probability if self.step_probability is None else self.step_probability,
        )


class _Walk:
    __slots__ = ("rng", "mcs", "tick")

    def __init__(self, rng: np.random.Generator, mcs: int, tick: int) -> None:
        self.rng = rng
        self.mcs = mcs
        self.tick = tick


class ChannelModel:
    """Estado MCS de todos los enlaces de una simulación.

    Cada enlace usa su propio generador, derivado de la semilla y de los
    identificadores, y consume dos uniformes por tick de SRS. El resultado
    solo depende del número de ticks transcurridos, no de cuándo se consulta.
    """

    def __init__(
        self,
        params: ChannelParams,
        quality: Quality,
        seed: int,
        presets: Optional[Mapping[Quality, QualityPreset]] = None,
    ) -> None:
        self.params = params
        self.preset = params.preset(quality, presets)
        self.seed = int(seed)
        self._walks: Dict[Tuple[str, str], _Walk] = {}
        self._script = sorted(params.script, key=lambda entry: entry.time_s)
        logging.debug(
            "Canal %s: media %d, salto %.3f, %d entradas de guion",
            quality.value, self.preset.mean_mcs, self.preset.step_probability, len(self._script),
        )

    def _pin(self, vehicle_id: str, rsu_id: str, time_s: float) -> Optional[int]:
        pinned: Optional[int] = None
        for entry in self._script:
            if entry.time_s > time_s:
                break
            if entry.matches(vehicle_id, rsu_id):
                pinned = entry.mcs
        return pinned

    def _walk(self, vehicle_id: str, rsu_id: str, tick: int, cap: int) -> _Walk:
        key = (vehicle_id, rsu_id)
        walk = self._walks.get(key)
        if walk is None:
            rng = np.random.default_rng([self.seed, stable_hash(vehicle_id), stable_hash(rsu_id)])
            walk = _Walk(rng, min(self.preset.mean_mcs, cap), tick)
            self._walks[key] = walk
        return walk

    def _advance(self, walk: _Walk, tick: int, cap: int) -> None:
        steps = tick - walk.tick
        walk.tick = max(walk.tick, tick)
        mean = self.preset.mean_mcs
        probability = self.preset.step_probability
        if probability <= 0:
            walk.mcs = min(mean, cap)
            return
        mcs = min(walk.mcs, cap)
        if steps > 0:
            draws = walk.rng.random((steps, 2))
            for _, direction in draws[draws[:, 0] < probability]:
                if mcs == mean:
                    up = direction < 0.5
                else:
                    up = (direction < TOWARD_MEAN_PROBABILITY) == (mcs < mean)
                mcs = min(cap, max(0, mcs + (1 if up else -1)))
        walk.mcs = mcs

    def mcs(self, vehicle_id: str, rsu_id: str, tick: int, time_s: float, distance_m: float) -> int:
        """Índice MCS del enlace tras el tick de SRS número ``tick``."""
        cap = distance_cap(distance_m, self.params.distance_attenuation)
        walk = self._walk(vehicle_id, rsu_id, tick, cap)
        self._advance(walk, tick, cap)
        pinned = self._pin(vehicle_id, rsu_id, time_s)
        if pinned is not None:
            walk.mcs = pinned
        return walk.mcs

    def rate(self, vehicle_id: str, rsu_id: str, tick: int, time_s: float, distance_m: float) -> float:
        return rate_for_mcs(self.mcs(vehicle_id, rsu_id, tick, time_s, distance_m))
