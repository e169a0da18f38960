"""Fixtures compartidas por las pruebas."""

from __future__ import annotations

import os
import sys
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from offload_manager.instances import InstancePool, ServiceInstance  # noqa: E402
from offload_manager.models import ExecutionProfile, LinkState, ProblemInstance, RsuSpec, TaskSpec  # noqa: E402
from offload_manager.scenario import Scenario, build_scenario, parse_document  # noqa: E402

MU = 0.13704


@pytest.fixture
def task() -> TaskSpec:
    return TaskSpec(
        id="t1",
        period_s=0.05,
        input_mb=0.1,
        local_exec_s=0.04,
        local_power_w=6.0,
        offload_power_w=2.0,
        service_type="det",
        vehicle_id="v1",
    )


@pytest.fixture
def rsu() -> RsuSpec:
    return RsuSpec("r1", 270, 16, "orin")


@pytest.fixture
def profiles() -> ExecutionProfile:
    return ExecutionProfile.from_rows([("det", "orin", c, 0.02) for c in range(1, 17)])


@pytest.fixture
def link() -> LinkState:
    return LinkState("v1", "r1", MU)


def make_pool(
    rows: Iterable[Tuple[str, str, int, int, float]],
    capacities: Mapping[str, Tuple[int, int]],
) -> InstancePool:
    """Conjunto a mano: filas (tarea, RSU, b, c, utilidad)."""
    return InstancePool.from_instances(
        (ServiceInstance(-1, t, r, b, c, u) for t, r, b, c, u in rows), capacities
    )


def ids_of(pool: InstancePool, task_id: str, rsu_id: Optional[str] = None) -> List[int]:
    return [i.instance_id for i in pool if i.task_id == task_id and rsu_id in (None, i.rsu_id)]


@pytest.fixture
def cross_pool() -> InstancePool:
    """Dos tareas que no caben juntas en una RSU con B = C = 2."""
    return make_pool([("t1", "r1", 2, 1, 6.0), ("t2", "r1", 1, 2, 6.0)], {"r1": (2, 2)})


def simple_problem(
    tasks: int = 3,
    rsus: Sequence[Tuple[str, int, int]] = (("r1", 60, 8),),
    rate: float = MU,
) -> ProblemInstance:
    """Problema pequeño con todas las tareas accesibles desde todas las RSUs."""
    specs = [
        TaskSpec(f"t{i}", 0.05, 0.1, 0.04, 6.0, 2.0, "det", f"v{i}") for i in range(tasks)
    ]
    rsu_specs = [RsuSpec(name, rbs, cus, "orin") for name, rbs, cus in rsus]
    links = {
        (t.vehicle_id, r.id): LinkState(t.vehicle_id, r.id, rate) for t in specs for r in rsu_specs
    }
    profiles = ExecutionProfile.from_rows([("det", "orin", c, 0.02 / c) for c in range(1, 9)])
    return ProblemInstance(tuple(specs), tuple(rsu_specs), profiles, links)


def scenario_data(
    tasks: Sequence[dict],
    rsus: Sequence[dict],
    positions: Mapping[str, Tuple[float, float]],
    *,
    profiles: Optional[Sequence[dict]] = None,
    channel: Optional[dict] = None,
    sim: Optional[dict] = None,
) -> dict:
    """Documento de escenario con vehículos parados en ``positions``."""
    return {
        "format_version": "1.0",
        "rsus": list(rsus),
        "tasks": list(tasks),
        "profiles": list(
            profiles
            if profiles is not None
            else [
                {"service_type": "det", "hardware_class": "orin", "cus": c, "proc_time_s": round(0.02 / c, 6)}
                for c in range(1, 9)
            ]
        ),
        "traces": {
            "inline": [
                {"time_s": 0.0, "vehicle_id": v, "x_m": x, "y_m": y} for v, (x, y) in sorted(positions.items())
            ]
        },
        "channel": channel or {},
        "sim": sim or {},
    }


def task_entry(index: int, vehicle: Optional[str] = None, **overrides) -> dict:
    entry = {
        "id": f"t{index:02d}",
        "vehicle_id": vehicle or f"v{index:02d}",
        "period_s": 0.05,
        "input_mb": 0.1,
        "local_exec_s": 0.03,
        "local_power_w": 5.0,
        "offload_power_w": 1.0,
        "service_type": "det",
    }
    entry.update(overrides)
    return entry


def rsu_entry(name: str, x: float, rbs: int = 100, cus: int = 8, delay: float = 0.0) -> dict:
    return {
        "id": name, "total_rbs": rbs, "total_cus": cus, "hardware_class": "orin",
        "init_delay_s": delay, "x_m": x, "y_m": 0.0,
    }


def make_scenario(data: dict, source: str = "<prueba>") -> Scenario:
    return build_scenario(parse_document(data, source), source)
