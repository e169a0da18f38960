"""Simulación de eventos discretos del control de descarga en línea."""

from .config import Mode, Quality, RsuOrder, SimConfig, Timing
from .engine import SimulationResult, Simulator, initial_problem, run
from .metrics import CycleSnapshot, Metrics

__all__ = [
    "CycleSnapshot",
    "Metrics",
    "Mode",
    "Quality",
    "RsuOrder",
    "SimConfig",
    "SimulationResult",
    "Simulator",
    "Timing",
    "initial_problem",
    "run",
]
