"""Bancos de pruebas: matriz de simulaciones, escalado y comparación de algoritmos.

La matriz recorre algoritmo × calidad × modo × réplica. Cada celda es una
simulación aislada con su propia semilla derivada; la semilla de una celda
depende de la calidad y de la réplica, de modo que todos los algoritmos y
ambos modos se comparan sobre las mismas realizaciones del canal.
"""

from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .algorithms import ALGORITHMS, get_algorithm
from .feasibility import validate
from .generator import ProblemFamily, random_problem
from .instances import enumerate_instances
from .saround import saround
from .scenario import Scenario
from .sim.channel import QualityPreset
from .sim.config import Mode, Quality
from .sim.engine import run as run_simulation
from .utils import derive_seed
from .workers import run_parallel


BENCH_COLUMNS = (
    "algorithm",
    "quality",
    "mode",
    "replicate",
    "seed",
    "predicted_js",
    "measured_js",
    "offloaded_jobs_per_s",
    "runtime_s",
    "suspensions",
    "deadline_misses",
)
GROUP_COLUMNS = ["algorithm", "quality", "mode"]
SCALING_SIZES = (25, 50, 100, 200)


@dataclass(frozen=True)
class BenchCell:
    algorithm: str
    quality: Quality
    mode: Mode
    replicate: int
    seed: int


@dataclass(frozen=True)
class BenchMatrix:
    """Producto cartesiano de la campaña de simulaciones."""

    algorithms: Tuple[str, ...] = tuple(ALGORITHMS)
    qualities: Tuple[Quality, ...] = (Quality.HIGH, Quality.MEDIUM, Quality.LOW)
    modes: Tuple[Mode, ...] = (Mode.SCHED_ALL, Mode.SCHED_REMAIN)
    replicates: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        for name in self.algorithms:
            get_algorithm(name)
        if self.replicates < 0:
            raise ValueError("replicates debe ser >= 0")

    def cells(self) -> List[BenchCell]:
        """Celdas en el orden de la matriz (algoritmo, calidad, modo, réplica)."""
        return [
            BenchCell(algorithm, quality, mode, replicate, derive_seed(self.seed, "bench", quality.value, replicate))
            for algorithm, quality, mode, replicate in itertools.product(
                self.algorithms, self.qualities, self.modes, range(self.replicates)
            )
        ]

    def __len__(self) -> int:
        return len(self.algorithms) * len(self.qualities) * len(self.modes) * self.replicates


def run_cell(
    scenario: Scenario,
    cell: BenchCell,
    presets: Optional[Dict[Quality, QualityPreset]] = None,
) -> Dict[str, object]:
    """Simula una celda y devuelve su fila de la tabla."""
    config = scenario.config.model_copy(
        update={
            "algorithm": cell.algorithm,
            "quality": cell.quality,
            "mode": cell.mode,
            "rng_seed": cell.seed,
        }
    )
    metrics = run_simulation(scenario, config, presets).metrics
    return {
        "algorithm": cell.algorithm,
        "quality": cell.quality.value,
        "mode": cell.mode.value,
        "replicate": cell.replicate,
        "seed": cell.seed,
        "predicted_js": metrics.predicted_js,
        "measured_js": metrics.measured_js,
        "offloaded_jobs_per_s": metrics.offloaded_jobs_per_s,
        "runtime_s": float(np.mean([row.runtime_s for row in metrics.rows])) if metrics.rows else 0.0,
        "suspensions": metrics.suspensions,
        "deadline_misses": metrics.deadline_misses,
    }


def run_bench(
    scenario: Scenario,
    matrix: BenchMatrix,
    workers: int = 1,
    presets: Optional[Dict[Quality, QualityPreset]] = None,
) -> pd.DataFrame:
    """Ejecuta toda la matriz; las filas salen en el orden de la matriz."""
    cells = matrix.cells()
    logging.info("Banco: %d celdas con %d hilos", len(cells), workers)
    jobs: List[Callable[[], Dict[str, object]]] = [
        (lambda c=cell: run_cell(scenario, c, presets)) for cell in cells
    ]
    rows = run_parallel(jobs, workers)
    return pd.DataFrame(rows, columns=list(BENCH_COLUMNS))


def summarize(frame: pd.DataFrame) -> pd.DataFrame:
    """Media de cada métrica por algoritmo, calidad y modo."""
    if frame.empty:
        return frame.drop(columns=["replicate", "seed"], errors="ignore")
    metrics = [c for c in BENCH_COLUMNS if c not in GROUP_COLUMNS and c not in ("replicate", "seed")]
    return frame.groupby(GROUP_COLUMNS, sort=False, as_index=False)[metrics].mean()


def scaling_family(tasks: int, rsus: int = 5, rbs: int = 30, cus: int = 8) -> ProblemFamily:
    return ProblemFamily(
        tasks=(tasks, tasks), rsus=(rsus, rsus), rbs=(rbs, rbs), cus=(cus, cus),
        rate_range=(0.2, 1.5), prune=True,
    )


def scaling_sweep(
    sizes: Sequence[int] = SCALING_SIZES,
    rsus: int = 5,
    rbs: int = 30,
    cus: int = 8,
    seed: int = 0,
    repeats: int = 3,
) -> pd.DataFrame:
    """Tiempo de pared de SARound (enumeración y resolución) frente al número de peticiones.

    Para cada tamaño se conserva el mínimo de ``repeats`` mediciones sobre la
    misma instancia.
    """
    records = []
    for size in sizes:
        rng = np.random.default_rng(derive_seed(seed, "scaling", size))
        problem = random_problem(rng, scaling_family(size, rsus, rbs, cus))
        timings = []
        for _ in range(max(1, repeats)):
            started = time.perf_counter()
            pool = enumerate_instances(problem, prune=True)
            assignment = saround(pool, problem)
            timings.append(time.perf_counter() - started)
        records.append(
            {
                "tasks": size,
                "instances": len(pool),
                "selected": len(assignment),
                "utility": assignment.total_utility,
                "seconds": min(timings),
            }
        )
        logging.info("Escalado N=%d: %d instancias, %.4f s", size, len(pool), min(timings))
    return pd.DataFrame(records, columns=["tasks", "instances", "selected", "utility", "seconds"])


def compare_on_family(
    family: ProblemFamily,
    trials: int,
    seed: int = 0,
    algorithms: Iterable[str] = tuple(ALGORITHMS),
) -> pd.DataFrame:
    """Utilidad prevista de cada algoritmo sobre las mismas instancias aleatorias.

    Devuelve una fila por (prueba, algoritmo) con la utilidad y el número de
    incumplimientos de ``validate``.
    """
    names = list(algorithms)
    solvers = {name: get_algorithm(name) for name in names}
    records = []
    for trial in range(trials):
        trial_seed = derive_seed(seed, "compare", trial)
        problem = random_problem(np.random.default_rng(trial_seed), family)
        pool = enumerate_instances(problem, prune=family.prune)
        for name in names:
            assignment = solvers[name](pool, problem)
            records.append(
                {
                    "trial": trial,
                    "seed": trial_seed,
                    "algorithm": name,
                    "utility": assignment.total_utility,
                    "violations": len(validate(assignment, problem)),
                }
            )
    return pd.DataFrame(records, columns=["trial", "seed", "algorithm", "utility", "violations"])
