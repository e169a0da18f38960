"""Resolutor simplex que devuelve soluciones básicas óptimas.

Resuelve ``max c·x  s.a.  A x <= b, x >= 0`` con ``b >= 0``; el origen es
siempre factible, así que basta con la fase II partiendo de la base de
holguras. Se usa simplex revisado con la inversa de la base explícita y la
matriz de restricciones dispersa (cada columna del programa de una RSU tiene tres
coeficientes). Las entradas se eligen por mayor coste reducido durante un
número acotado de pivotes y después por la regla de Bland.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from .errors import DimensionMismatchError, LinearProgramError, UnboundedError
from .instances import InstancePool


PIVOT_TOLERANCE = 1e-9
FRACTIONAL_LOW = 1e-7
FRACTIONAL_HIGH = 1.0 - 1e-7
REFACTOR_EVERY = 64


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """Programa lineal de maximización con restricciones ``<=`` y variables >= 0."""

    objective: np.ndarray
    constraints: sparse.csc_matrix
    rhs: np.ndarray
    variable_ids: Tuple[int, ...] = ()
    row_labels: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        objective = np.asarray(self.objective, dtype=float).reshape(-1)
        rhs = np.asarray(self.rhs, dtype=float).reshape(-1)
        matrix = sparse.csc_matrix(self.constraints, dtype=float)
        if matrix.shape == (0, 0) and objective.size:
            matrix = sparse.csc_matrix((rhs.size, objective.size), dtype=float)
        if matrix.shape != (rhs.size, objective.size):
            raise DimensionMismatchError(
                f"Matriz {matrix.shape} incompatible con {rhs.size} filas y {objective.size} variables"
            )
        if np.any(rhs < 0):
            raise DimensionMismatchError("Los lados derechos deben ser no negativos")
        if self.variable_ids and len(self.variable_ids) != objective.size:
            raise DimensionMismatchError("variable_ids no coincide con el número de variables")
        object.__setattr__(self, "objective", objective)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "constraints", matrix)

    @classmethod
    def from_rows(
        cls,
        objective: Sequence[float],
        rows: Sequence[Tuple[Sequence[float], float]],
    ) -> "LinearProgram":
        """Atajo para construir un LP denso a partir de filas ``(coeficientes, rhs)``."""
        n = len(objective)
        for coeffs, _ in rows:
            if len(coeffs) != n:
                raise DimensionMismatchError(f"Fila con {len(coeffs)} coeficientes, se esperaban {n}")
        dense = np.array([list(coeffs) for coeffs, _ in rows], dtype=float).reshape(len(rows), n)
        return cls(np.asarray(objective, dtype=float), sparse.csc_matrix(dense), np.array([r for _, r in rows], dtype=float))

    @property
    def num_variables(self) -> int:
        return int(self.objective.size)

    @property
    def num_constraints(self) -> int:
        return int(self.rhs.size)


@dataclass(frozen=True, eq=False)
class BasicSolution:
    """Solución básica óptima; ``basis`` incluye índices de holgura (n..n+m-1)."""

    values: np.ndarray
    objective_value: float
    basis: FrozenSet[int]
    iterations: int = 0

    def positive_count(self, tolerance: float = FRACTIONAL_LOW) -> int:
        return int(np.count_nonzero(self.values >= tolerance))

    def fractional_indices(self) -> List[int]:
        mask = (self.values >= FRACTIONAL_LOW) & (self.values <= FRACTIONAL_HIGH)
        return [int(i) for i in np.flatnonzero(mask)]

    def snapped(self) -> np.ndarray:
        """Valores con el ruido numérico de los extremos eliminado."""
        values = self.values.copy()
        values[values > FRACTIONAL_HIGH] = 1.0
        values[values < FRACTIONAL_LOW] = 0.0
        return values


def solve_lp(lp: LinearProgram, dantzig_pivots: Optional[int] = None) -> BasicSolution:
    """Devuelve una solución básica óptima de ``lp``; determinista."""
    n, m = lp.num_variables, lp.num_constraints
    if n == 0 or m == 0:
        if n and np.any(lp.objective > PIVOT_TOLERANCE):
            raise UnboundedError("Variables sin restricciones con objetivo positivo")
        return BasicSolution(np.zeros(n), 0.0, frozenset(range(n, n + m)), 0)

    # normalizar filas para que las tolerancias sean relativas a su escala
    row_scale = np.maximum(lp.rhs, abs(lp.constraints).max(axis=1).toarray().reshape(-1))
    row_scale[row_scale == 0] = 1.0
    scaling = sparse.diags(1.0 / row_scale)
    matrix = sparse.csc_matrix(scaling @ lp.constraints)
    matrix_t = sparse.csr_matrix(matrix.T)
    rhs = lp.rhs / row_scale
    cost = lp.objective

    basis = list(range(n, n + m))
    is_basic = np.zeros(n + m, dtype=bool)
    is_basic[n:] = True
    inverse = np.eye(m)
    x_basic = rhs.copy()
    limit = dantzig_pivots if dantzig_pivots is not None else 2 * (n + m)
    max_iterations = 50 * (n + m) + 1000
    iterations = 0

    while True:
        if iterations >= max_iterations:
            raise LinearProgramError(f"El simplex no converge tras {iterations} pivotes")
        basic_cost = np.array([cost[j] if j < n else 0.0 for j in basis])
        duals = basic_cost @ inverse
        reduced = np.concatenate((cost - matrix_t @ duals, -duals))
        reduced[is_basic] = 0.0
        eligible = np.flatnonzero(reduced > PIVOT_TOLERANCE)
        if eligible.size == 0:
            break
        if iterations < limit:
            entering = int(eligible[np.argmax(reduced[eligible])])
        else:
            entering = int(eligible[0])

        if entering < n:
            column = matrix[:, entering].toarray().reshape(-1)
        else:
            column = np.zeros(m)
            column[entering - n] = 1.0
        direction = inverse @ column
        rows = np.flatnonzero(direction > PIVOT_TOLERANCE)
        if rows.size == 0:
            raise UnboundedError(f"Variable {entering} no acotada")
        ratios = x_basic[rows] / direction[rows]
        best = ratios.min()
        tied = rows[ratios <= best + 1e-12]
        leaving = int(min(tied, key=lambda r: basis[r]))

        pivot = direction[leaving]
        theta = x_basic[leaving] / pivot
        x_basic -= theta * direction
        x_basic[leaving] = theta
        inverse[leaving] /= pivot
        others = direction.copy()
        others[leaving] = 0.0
        inverse -= np.outer(others, inverse[leaving])
        is_basic[basis[leaving]] = False
        is_basic[entering] = True
        basis[leaving] = entering
        np.maximum(x_basic, 0.0, out=x_basic)
        iterations += 1

        if iterations % REFACTOR_EVERY == 0:
            inverse, x_basic = _refactor(matrix, basis, n, m, rhs)

    values = np.zeros(n)
    for row, var in enumerate(basis):
        if var < n:
            values[var] = max(0.0, float(x_basic[row]))
    objective_value = float(cost @ values)
    logging.debug("LP %dx%d resuelto en %d pivotes, valor %.6f", m, n, iterations, objective_value)
    return BasicSolution(values, objective_value, frozenset(basis), iterations)


def _refactor(
    matrix: sparse.csc_matrix,
    basis: List[int],
    n: int,
    m: int,
    rhs: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """Recalcula la inversa de la base para acotar el error acumulado."""
    columns = np.zeros((m, m))
    for row, var in enumerate(basis):
        if var < n:
            columns[:, row] = matrix[:, var].toarray().reshape(-1)
        else:
            columns[var - n, row] = 1.0
    inverse = np.linalg.solve(columns, np.eye(m))
    x_basic = np.maximum(np.linalg.solve(columns, rhs), 0.0)
    return inverse, x_basic


def build_rsu_lp(pool: InstancePool, rsu_id: str, weights: np.ndarray) -> LinearProgram:
    """Relajación lineal de la RSU con los pesos dados.

    Solo las instancias de la RSU con peso positivo son variables. Filas: RBs,
    CUs y una fila de elección múltiple por tarea representada.
    """
    members = pool.for_rsu(rsu_id)
    capacity_rbs, capacity_cus = pool.capacity(rsu_id)
    variables = [i for i in members if weights[i] > 0]
    tasks = sorted({pool[i].task_id for i in variables})
    task_row = {task_id: 2 + r for r, task_id in enumerate(tasks)}
    row_idx: List[int] = []
    col_idx: List[int] = []
    data: List[float] = []
    for col, inst_id in enumerate(variables):
        inst = pool[inst_id]
        row_idx.extend((0, 1, task_row[inst.task_id]))
        col_idx.extend((col, col, col))
        data.extend((float(inst.rbs), float(inst.cus), 1.0))
    shape = (2 + len(tasks), len(variables))
    matrix = sparse.csc_matrix((data, (row_idx, col_idx)), shape=shape)
    rhs = np.concatenate(([float(capacity_rbs), float(capacity_cus)], np.ones(len(tasks))))
    objective = np.array([weights[i] for i in variables], dtype=float)
    labels = ("rbs", "cus", *(f"task:{t}" for t in tasks))
    return LinearProgram(objective, matrix, rhs, tuple(variables), labels)
