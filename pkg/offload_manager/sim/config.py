"""Configuración de una simulación, validada con pydantic."""

from __future__ import annotations

from enum import Enum
import math

from pydantic import BaseModel, ConfigDict, Field, model_validator


class Mode(str, Enum):
    """Modo de planificación de cada ciclo."""

    SCHED_ALL = "sched_all"
    SCHED_REMAIN = "sched_remain"


class Quality(str, Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


class Timing(str, Enum):
    """Cómo se carga la latencia del planificador en el tiempo simulado."""

    FIXED = "fixed"
    MEASURED = "measured"


class RsuOrder(str, Enum):
    ASCENDING = "ascending"
    SHUFFLED = "shuffled"


class SimConfig(BaseModel):
    """Parámetros de ejecución del simulador."""

    model_config = ConfigDict(frozen=True, extra="forbid", use_enum_values=False)

    duration_s: float = Field(60.0, gt=0)
    schedule_interval_s: float = Field(10.0, gt=0)
    srs_interval_s: float = Field(0.01, gt=0)
    mode: Mode = Mode.SCHED_ALL
    quality: Quality = Quality.MEDIUM
    rng_seed: int = Field(0, ge=0)
    algorithm: str = "saround"
    coverage_radius_m: float = Field(400.0, gt=0)
    prune: bool = True
    rsu_order: RsuOrder = RsuOrder.ASCENDING
    timing: Timing = Timing.FIXED
    scheduler_latency_s: float = Field(0.0, ge=0)
    mobility_interval_s: float = Field(1.0, gt=0)
    processing_failure_prob: float = Field(0.0, ge=0, le=1)
    log_jobs: bool = False

    @model_validator(mode="after")
    def _known_algorithm(self) -> "SimConfig":
        from ..algorithms import ALGORITHMS

        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algoritmo desconocido: {self.algorithm}")
        return self

    @property
    def cycles(self) -> int:
        """Número de ciclos completos dentro de la duración."""
        return math.floor(self.duration_s / self.schedule_interval_s + 1e-9)
