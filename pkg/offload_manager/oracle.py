"""Resolutores exactos por ramificación y acotación para instancias pequeñas.

Sirven para certificar empíricamente las cotas de aproximación de SARound
(1/4 sobre el problema completo) y de FloorRd (1/3 por RSU).
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from .feasibility import validate
from .generator import ProblemFamily, random_problem
from .instances import InstancePool, enumerate_instances
from .lp import LinearProgram, solve_lp
from .models import Assignment, ProblemInstance
from .saround import FloorOutcome, floor_rd_detailed, saround_trace
from .utils import derive_seed


LP_BOUND_MAX_VARIABLES = 400
RATIO_TOLERANCE = 1e-9
CERTIFY_CAPS = {"tasks": 6, "rsus": 3, "rbs": 6, "cus": 4}
BOUNDS = {"saround": 0.25, "floor_rd": 1.0 / 3.0}


@dataclass(frozen=True)
class OracleBudget:
    max_nodes: int = 10_000_000
    max_seconds: float = 30.0


@dataclass(frozen=True)
class OracleResult:
    optimum: float
    selected: FrozenSet[int]
    nodes_explored: int
    exact: bool


class _BudgetExhausted(Exception):
    pass


class _Search:
    """Búsqueda en profundidad sobre tareas con cota superior por LP o por suma."""

    def __init__(
        self,
        pool: InstancePool,
        candidates: Sequence[int],
        weights: np.ndarray,
        capacities: Mapping[str, Tuple[int, int]],
        budget: OracleBudget,
    ) -> None:
        self.pool = pool
        self.weights = weights
        self.budget = budget
        self.rsus = sorted(capacities)
        self.rsu_index = {r: k for k, r in enumerate(self.rsus)}
        grouped: Dict[str, List[int]] = {}
        for i in candidates:
            if weights[i] > 0 and pool[i].rsu_id in self.rsu_index:
                grouped.setdefault(pool[i].task_id, []).append(i)
        for members in grouped.values():
            members.sort(key=lambda i: (-weights[i], i))
        self.tasks = sorted(grouped, key=lambda t: (-weights[grouped[t][0]], t))
        self.options = [grouped[t] for t in self.tasks]
        self.residual = [list(capacities[r]) for r in self.rsus]
        self.best_value = 0.0
        self.best_set: Tuple[int, ...] = ()
        self.nodes = 0
        self.started = time.perf_counter()
        self.memo: Dict[Tuple, float] = {}

    def run(self) -> OracleResult:
        exact = True
        try:
            self._visit(0, 0.0, [])
        except _BudgetExhausted:
            exact = False
            logging.warning("Presupuesto del oráculo agotado tras %d nodos", self.nodes)
        return OracleResult(self.best_value, frozenset(self.best_set), self.nodes, exact)

    def _fits(self, inst_id: int) -> bool:
        inst = self.pool[inst_id]
        rbs, cus = self.residual[self.rsu_index[inst.rsu_id]]
        return inst.rbs <= rbs and inst.cus <= cus

    def _quick_bound(self, depth: int) -> float:
        total = 0.0
        for members in self.options[depth:]:
            for i in members:
                if self._fits(i):
                    total += self.weights[i]
                    break
        return total

    def _lp_bound(self, depth: int) -> float:
        key = (depth, tuple(tuple(r) for r in self.residual))
        if key in self.memo:
            return self.memo[key]
        variables = [i for members in self.options[depth:] for i in members if self._fits(i)]
        if len(variables) > LP_BOUND_MAX_VARIABLES:
            return math.inf
        if not variables:
            self.memo[key] = 0.0
            return 0.0
        tasks = sorted({self.pool[i].task_id for i in variables})
        task_row = {t: 2 * len(self.rsus) + k for k, t in enumerate(tasks)}
        rows, cols, data = [], [], []
        for col, i in enumerate(variables):
            inst = self.pool[i]
            k = self.rsu_index[inst.rsu_id]
            rows.extend((2 * k, 2 * k + 1, task_row[inst.task_id]))
            cols.extend((col, col, col))
            data.extend((float(inst.rbs), float(inst.cus), 1.0))
        rhs = [float(v) for pair in self.residual for v in pair] + [1.0] * len(tasks)
        matrix = sparse.csc_matrix((data, (rows, cols)), shape=(len(rhs), len(variables)))
        program = LinearProgram(np.array([self.weights[i] for i in variables]), matrix, np.array(rhs))
        value = solve_lp(program).objective_value
        self.memo[key] = value
        return value

    def _visit(self, depth: int, value: float, chosen: List[int]) -> None:
        self.nodes += 1
        if self.nodes > self.budget.max_nodes:
            raise _BudgetExhausted()
        if self.nodes % 1024 == 0 and time.perf_counter() - self.started > self.budget.max_seconds:
            raise _BudgetExhausted()
        if value > self.best_value + 1e-12:
            self.best_value = value
            self.best_set = tuple(chosen)
        if depth == len(self.tasks):
            return
        if value + self._quick_bound(depth) <= self.best_value + 1e-12:
            return
        if depth + 1 < len(self.tasks) and value + self._lp_bound(depth) <= self.best_value + 1e-9:
            return
        for i in self.options[depth]:
            if not self._fits(i):
                continue
            inst = self.pool[i]
            slot = self.residual[self.rsu_index[inst.rsu_id]]
            slot[0] -= inst.rbs
            slot[1] -= inst.cus
            chosen.append(i)
            self._visit(depth + 1, value + self.weights[i], chosen)
            chosen.pop()
            slot[0] += inst.rbs
            slot[1] += inst.cus
        self._visit(depth + 1, value, chosen)


def solve_exact(
    pool: InstancePool,
    instance: Optional[ProblemInstance] = None,
    budget: Optional[OracleBudget] = None,
) -> OracleResult:
    """Óptimo exacto del programa entero con las utilidades base."""
    search = _Search(pool, range(len(pool)), pool.utilities, pool.capacities, budget or OracleBudget())
    return search.run()


def solve_exact_single_rsu(
    pool: InstancePool,
    rsu_id: str,
    weights: np.ndarray,
    budget: Optional[OracleBudget] = None,
) -> OracleResult:
    """Óptimo exacto del programa entero de una RSU con los pesos dados."""
    members = pool.for_rsu(rsu_id)
    capacities = {rsu_id: pool.capacity(rsu_id)}
    return _Search(pool, members, np.asarray(weights, dtype=float), capacities, budget or OracleBudget()).run()


@dataclass(frozen=True)
class TrialOutcome:
    ratios: Tuple[float, ...] = ()
    violations: Tuple[str, ...] = ()
    lp_checked: int = 0
    inexact: int = 0


@dataclass(frozen=True)
class RatioReport:
    """Resumen de una certificación: razones observadas e incumplimientos."""

    algorithm: str
    trials: int
    bound: Optional[float]
    ratios_observed: int = 0
    min_ratio: Optional[float] = None
    mean_ratio: Optional[float] = None
    lp_checked: int = 0
    inexact: int = 0
    violations: Tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict[str, object]:
        return {
            "algorithm": self.algorithm,
            "trials": self.trials,
            "bound": self.bound,
            "ratios_observed": self.ratios_observed,
            "min_ratio": self.min_ratio,
            "mean_ratio": self.mean_ratio,
            "lp_checked": self.lp_checked,
            "inexact": self.inexact,
            "violations": list(self.violations),
        }


def check_lp_structure(outcome: FloorOutcome, pool: InstancePool) -> List[str]:
    """Comprueba positivos <= N'+2 y a lo sumo 4 fraccionarias en 2 tareas."""
    problems: List[str] = []
    program, solution = outcome.program, outcome.solution
    represented = program.num_constraints - 2
    positives = solution.positive_count()
    if positives > represented + 2:
        problems.append(f"LP con {positives} positivas para {represented} tareas")
    fractional = solution.fractional_indices()
    tasks = {pool[program.variable_ids[j]].task_id for j in fractional}
    if len(fractional) > 4 or len(tasks) > 2:
        problems.append(f"LP con {len(fractional)} fraccionarias en {len(tasks)} tareas")
    return problems


def _ratio(value: float, optimum: float) -> float:
    return 1.0 if optimum <= 0 else value / optimum


def _certify_trial(algorithm: str, family: ProblemFamily, seed: int, budget: OracleBudget) -> TrialOutcome:
    from .algorithms import get_algorithm

    rng = np.random.default_rng(seed)
    problem = random_problem(rng, family)
    pool = enumerate_instances(problem, prune=family.prune)
    bound = BOUNDS.get(algorithm)
    violations: List[str] = []
    ratios: List[float] = []
    lp_checked = 0
    inexact = 0

    def inspect(rsu_id: str, outcome: FloorOutcome) -> None:
        nonlocal lp_checked
        lp_checked += 1
        violations.extend(f"semilla {seed}, {rsu_id}: {p}" for p in check_lp_structure(outcome, pool))

    if algorithm == "floor_rd":
        weights = pool.utilities
        for rsu_id in pool.rsu_ids:
            outcome = floor_rd_detailed(pool, rsu_id, weights)
            inspect(rsu_id, outcome)
            value = math.fsum(weights[i] for i in outcome.selected)
            oracle = solve_exact_single_rsu(pool, rsu_id, weights, budget)
            if outcome.solution.objective_value < oracle.optimum - 1e-7:
                violations.append(f"semilla {seed}, {rsu_id}: LP por debajo del óptimo entero")
            if not oracle.exact:
                inexact += 1
                continue
            ratio = _ratio(value, oracle.optimum)
            ratios.append(ratio)
            if bound is not None and ratio < bound - RATIO_TOLERANCE:
                violations.append(f"semilla {seed}, {rsu_id}: razón {ratio:.6f} < {bound:.6f}")
        return TrialOutcome(tuple(ratios), tuple(violations), lp_checked, inexact)

    if algorithm == "saround":
        trace = saround_trace(pool, observer=inspect)
        assignment = Assignment.build((pool[i] for i in trace.selected), pool.rsu_ids)
    else:
        assignment = get_algorithm(algorithm)(pool, problem)
    violations.extend(f"semilla {seed}: {v}" for v in validate(assignment, problem))
    oracle = solve_exact(pool, problem, budget)
    if not oracle.exact:
        inexact += 1
    else:
        if assignment.total_utility > oracle.optimum + 1e-7:
            violations.append(f"semilla {seed}: utilidad por encima del óptimo")
        ratio = _ratio(assignment.total_utility, oracle.optimum)
        ratios.append(ratio)
        if bound is not None and ratio < bound - RATIO_TOLERANCE:
            violations.append(f"semilla {seed}: razón {ratio:.6f} < {bound:.6f}")
    return TrialOutcome(tuple(ratios), tuple(violations), lp_checked, inexact)


def certify_ratio(
    algorithm: str,
    family: Optional[ProblemFamily] = None,
    trials: int = 500,
    seed: int = 0,
    budget: Optional[OracleBudget] = None,
    workers: int = 1,
) -> RatioReport:
    """Ejecuta ``algorithm`` y el oráculo sobre ``trials`` instancias aleatorias."""
    family = family or ProblemFamily.certify_default()
    for name, cap in CERTIFY_CAPS.items():
        if getattr(family, name)[1] > cap:
            raise ValueError(f"La familia excede el tope {name} <= {cap}")
    budget = budget or OracleBudget()
    jobs: List[Callable[[], TrialOutcome]] = [
        (lambda s=derive_seed(seed, "certify", k): _certify_trial(algorithm, family, s, budget))
        for k in range(trials)
    ]
    if workers > 1 and jobs:
        from .workers import run_parallel

        outcomes = run_parallel(jobs, workers)
    else:
        outcomes = [job() for job in jobs]

    ratios = [r for o in outcomes for r in o.ratios]
    violations = tuple(v for o in outcomes for v in o.violations)
    report = RatioReport(
        algorithm=algorithm,
        trials=trials,
        bound=BOUNDS.get(algorithm),
        ratios_observed=len(ratios),
        min_ratio=min(ratios) if ratios else None,
        mean_ratio=math.fsum(ratios) / len(ratios) if ratios else None,
        lp_checked=sum(o.lp_checked for o in outcomes),
        inexact=sum(o.inexact for o in outcomes),
        violations=violations,
    )
    logging.info(
        "Certificación %s: %d pruebas, razón mínima %s, %d incumplimientos",
        algorithm, trials, report.min_ratio, len(violations),
    )
    return report
