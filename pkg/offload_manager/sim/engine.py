"""Simulador de eventos discretos del marco de suscripción y descarga.

El bucle es de un solo hilo y procesa una cola ``heapq`` con orden total
(instante, prioridad del tipo de evento, entidad, secuencia). En un mismo
instante primero se mueve a los vehículos, después llega el SRS, luego se
planifica, se emiten concesiones, se activan servicios y por último se
liberan trabajos.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import time
from collections import deque
from dataclasses import dataclass, field
from enum import IntEnum
from typing import TYPE_CHECKING, Any, Deque, Dict, List, Mapping, Optional, Set, Tuple

import numpy as np

from ..algorithms import get_algorithm
from ..errors import ConfigError, InvariantError
from ..feasibility import offload_time, validate
from ..instances import enumerate_instances, rbs_for_deadline
from ..models import Assignment, Criticality, LinkState, ProblemInstance, TaskSpec
from ..saround import saround
from ..utils import derive_seed
from .channel import ChannelModel, QualityPreset
from .config import Mode, Quality, RsuOrder, SimConfig, Timing
from .grants import GrantState, Phase, RsuRadio, Transition
from .metrics import Metrics, MetricsRecorder
from .mobility import MobilitySnapshot, mobility_step

if TYPE_CHECKING:  # pragma: no cover - solo para anotaciones
    from ..scenario import Scenario


DEADLINE_TOLERANCE = 1e-12


class EventKind(IntEnum):
    """Tipos de evento; el valor es la prioridad a igualdad de instante."""

    MOBILITY = 0
    SRS = 1
    SCHEDULE = 2
    GRANTS = 3
    SERVICE_READY = 4
    JOB_RELEASE = 5


@dataclass(order=True, frozen=True)
class Event:
    time_s: float
    kind: EventKind
    entity: str
    seq: int
    payload: Any = field(default=None, compare=False)


@dataclass(frozen=True)
class SimulationResult:
    metrics: Metrics
    events: Tuple[Dict[str, Any], ...] = ()


class Simulator:
    """Estado completo de una simulación; cada instancia se ejecuta una vez."""

    def __init__(
        self,
        scenario: "Scenario",
        config: Optional[SimConfig] = None,
        presets: Optional[Mapping[Quality, QualityPreset]] = None,
    ) -> None:
        self.scenario = scenario
        self.config = config or scenario.config
        self._preflight()
        cfg = self.config
        self.channel = ChannelModel(scenario.channel, cfg.quality, derive_seed(cfg.rng_seed, "channel"), presets)
        self.algorithm = get_algorithm(cfg.algorithm)
        self.tasks: Dict[str, TaskSpec] = {task.id: task for task in scenario.tasks}
        self.rsus = {rsu.id: rsu for rsu in scenario.rsus}
        self.radios: Dict[str, RsuRadio] = {rsu.id: RsuRadio(rsu) for rsu in sorted(scenario.rsus, key=lambda r: r.id)}
        self.horizon_s = cfg.cycles * cfg.schedule_interval_s
        self.recorder = MetricsRecorder(cfg.cycles, cfg.schedule_interval_s)

        self.now = 0.0
        self.srs_tick = 0
        self.snapshot = MobilitySnapshot(0.0)
        self.sounded: Dict[Tuple[str, str], float] = {}
        self.registered: Set[str] = set()
        self.grants: Dict[str, GrantState] = {}
        self.rates: Dict[str, float] = {}
        self.history: Dict[str, Deque[bool]] = {
            task.id: deque(maxlen=task.mk_window[1] - 1)
            for task in scenario.tasks
            if task.criticality is Criticality.MK_CONSTRAINED
        }
        self.failures = np.random.default_rng(derive_seed(cfg.rng_seed, "failures"))
        self.log: List[Dict[str, Any]] = []
        self._queue: List[Event] = []
        self._seq = itertools.count()
        self._ran = False

    def _preflight(self) -> None:
        cfg = self.config
        if self.scenario.tasks:
            shortest = min(task.period_s for task in self.scenario.tasks)
            if cfg.srs_interval_s > shortest:
                raise ConfigError(
                    f"srs_interval_s={cfg.srs_interval_s} supera el periodo mínimo {shortest}"
                )
        for task in self.scenario.tasks:
            if task.vehicle_id not in self.scenario.traces:
                raise ConfigError(f"El vehículo {task.vehicle_id} no tiene traza")
        if cfg.timing is Timing.MEASURED:
            logging.warning("Latencia medida: la simulación no será reproducible bit a bit")

    # -- cola de eventos ----------------------------------------------------

    def _push(self, time_s: float, kind: EventKind, entity: str = "", payload: Any = None) -> None:
        if time_s < self.horizon_s:
            heapq.heappush(self._queue, Event(time_s, kind, entity, next(self._seq), payload))

    def _record(self, event: str, **data: Any) -> None:
        entry = {"t": self.now, "event": event}
        entry.update(data)
        self.log.append(entry)

    # -- planificación ------------------------------------------------------

    def _link_rate(self, vehicle_id: str, rsu_id: str, distance_m: float) -> float:
        return self.channel.rate(vehicle_id, rsu_id, self.srs_tick, self.now, distance_m)

    def build_problem(self, mode: Mode) -> ProblemInstance:
        """Instantánea del problema con las peticiones y enlaces sondeados vigentes."""
        if mode is Mode.SCHED_ALL:
            requests = sorted(self.registered)
            residual: Dict[str, Tuple[int, int]] = {}
        else:
            requests = sorted(t for t in self.registered if t not in self.grants)
            residual = {rsu_id: (radio.free_rbs, radio.free_cus) for rsu_id, radio in self.radios.items()}
        tasks = [self.tasks[t] for t in requests]
        vehicles = {task.vehicle_id for task in tasks}
        links = {}
        for (vehicle_id, rsu_id), distance in sorted(self.sounded.items()):
            if vehicle_id in vehicles:
                rate = self._link_rate(vehicle_id, rsu_id, distance)
                links[(vehicle_id, rsu_id)] = LinkState(vehicle_id, rsu_id, rate)
        return ProblemInstance(tuple(tasks), tuple(self.scenario.rsus), self.scenario.profiles, links, residual)

    def _solve(self, problem: ProblemInstance, cycle: int) -> Assignment:
        pool = enumerate_instances(problem, prune=self.config.prune)
        if self.config.algorithm == "saround" and self.config.rsu_order is RsuOrder.SHUFFLED:
            rng = np.random.default_rng(derive_seed(self.config.rng_seed, "rsu-order", cycle))
            order = [pool.rsu_ids[i] for i in rng.permutation(len(pool.rsu_ids))]
            return saround(pool, problem, order=order)
        return self.algorithm(pool, problem)

    def on_schedule_tick(self, cycle: int) -> None:
        problem = self.build_problem(self.config.mode)
        started = time.perf_counter()
        assignment = self._solve(problem, cycle)
        elapsed = time.perf_counter() - started
        latency = self.config.scheduler_latency_s if self.config.timing is Timing.FIXED else elapsed

        violations = validate(assignment, problem)
        if violations:
            raise InvariantError(
                f"Ciclo {cycle}: asignación inválida de {self.config.algorithm}: "
                + "; ".join(str(v) for v in violations)
            )
        self.recorder.scheduled(cycle, len(assignment), latency)
        self._record(
            "schedule",
            cycle=cycle,
            requests=len(problem.tasks),
            selected=len(assignment),
            utility=assignment.total_utility,
            latency_s=latency,
        )
        logging.info(
            "Ciclo %d (t=%.3f s): %d peticiones, %d asignadas, utilidad %.6f J/s",
            cycle, self.now, len(problem.tasks), len(assignment), assignment.total_utility,
        )
        self._push(self.now + latency, EventKind.GRANTS, f"{cycle:06d}", assignment)
        if cycle + 1 < self.config.cycles:
            self._push((cycle + 1) * self.config.schedule_interval_s, EventKind.SCHEDULE, "", cycle + 1)

    def _terminate(self, task_id: str, reason: str) -> None:
        grant = self.grants.pop(task_id, None)
        if grant is None:
            return
        self.radios[grant.rsu_id].terminate(task_id)
        self.rates.pop(task_id, None)
        self._record("terminate", task=task_id, rsu=grant.rsu_id, reason=reason)

    def _refresh_predicted(self) -> None:
        total = sum(grant.predicted_js for grant in self.grants.values())
        self.recorder.set_predicted(self.now, total)

    def on_grants(self, assignment: Assignment) -> None:
        """Emite las concesiones de RSU de una planificación."""
        if self.config.mode is Mode.SCHED_ALL:
            for task_id in sorted(self.grants):
                self._terminate(task_id, "reschedule")
        for inst in assignment.selected:
            task = self.tasks[inst.task_id]
            radio = self.radios[inst.rsu_id]
            if inst.task_id not in self.registered or inst.task_id in self.grants:
                continue
            if (task.vehicle_id, inst.rsu_id) not in self.sounded:
                self._record("grant_skipped", task=inst.task_id, rsu=inst.rsu_id, reason="link_lost")
                continue
            if not radio.can_admit(inst.rbs, inst.cus):
                logging.warning("Concesión de %s no cabe en %s; queda pendiente", inst.task_id, inst.rsu_id)
                self._record("grant_skipped", task=inst.task_id, rsu=inst.rsu_id, reason="capacity")
                continue
            rsu = self.rsus[inst.rsu_id]
            grant = GrantState(
                task_id=inst.task_id,
                rsu_id=inst.rsu_id,
                scheduled_rbs=inst.rbs,
                granted_rbs=inst.rbs,
                cus=inst.cus,
                phase=Phase.AWAITING_INIT,
                service_ready_at=self.now + rsu.init_delay_s,
                proc_time_s=self.scenario.profiles.proc_time(task.service_type, rsu.hardware_class, inst.cus),
                predicted_js=inst.base_utility,
            )
            radio.admit(grant)
            self.grants[inst.task_id] = grant
            self._record("grant", task=inst.task_id, rsu=inst.rsu_id, rbs=inst.rbs, cus=inst.cus)
            self._push(grant.service_ready_at, EventKind.SERVICE_READY, inst.task_id, grant)
        self._refresh_predicted()
        self._check_resources()

    def _check_resources(self) -> None:
        for rsu_id, radio in self.radios.items():
            if not radio.conserves_resources():
                raise InvariantError(f"t={self.now}: la RSU {rsu_id} excede su capacidad")

    # -- canal y concesiones --------------------------------------------------

    def _evaluate(self, grant: GrantState) -> Transition:
        task = self.tasks[grant.task_id]
        distance = self.sounded.get((task.vehicle_id, grant.rsu_id))
        if distance is None:
            return Transition.NONE
        rate = self._link_rate(task.vehicle_id, grant.rsu_id, distance)
        self.rates[grant.task_id] = rate
        required = rbs_for_deadline(task, grant.proc_time_s, rate)
        transition = self.radios[grant.rsu_id].apply_requirement(grant, required)
        if transition is Transition.SUSPENDED:
            self.recorder.suspension(self.now)
        elif transition is Transition.RESUMED:
            self.recorder.resumption(self.now)
        if transition is not Transition.NONE:
            self._record(
                transition.value, task=grant.task_id, rsu=grant.rsu_id,
                granted_rbs=grant.granted_rbs, required_rbs=required,
            )
        return transition

    def on_service_ready(self, grant: GrantState) -> None:
        if grant.phase is not Phase.AWAITING_INIT or self.grants.get(grant.task_id) is not grant:
            return
        self._evaluate(grant)

    def on_srs(self, tick: int) -> None:
        """Nuevo μ en todos los enlaces; reevalúa las concesiones activas o suspendidas."""
        self.srs_tick = tick
        self.sounded = dict(self.snapshot.distances)
        for radio in self.radios.values():
            for grant in list(radio):
                if grant.phase in (Phase.ACTIVE, Phase.SUSPENDED):
                    self._evaluate(grant)
        self._check_resources()
        self._push((tick + 1) * self.config.srs_interval_s, EventKind.SRS, "", tick + 1)

    # -- movilidad ------------------------------------------------------------

    def on_mobility(self, step: int) -> None:
        self.snapshot = mobility_step(
            self.scenario.traces, self.now, self.scenario.rsus, self.config.coverage_radius_m
        )
        covered = self.snapshot.covered_vehicles
        accessible = self.snapshot.distances
        changed = False
        for task_id in sorted(self.tasks):
            task = self.tasks[task_id]
            inside = task.vehicle_id in covered
            if inside and task_id not in self.registered:
                self.registered.add(task_id)
                self._record("register", task=task_id, rsu=self.snapshot.nearest_rsu(task.vehicle_id))
            elif not inside and task_id in self.registered:
                self.registered.discard(task_id)
                changed |= task_id in self.grants
                self._terminate(task_id, "left_coverage")
                self._record("unregister", task=task_id)
            grant = self.grants.get(task_id)
            if grant is not None and (task.vehicle_id, grant.rsu_id) not in accessible:
                self._terminate(task_id, "link_lost")
                changed = True
        if changed:
            self._refresh_predicted()
        self._push((step + 1) * self.config.mobility_interval_s, EventKind.MOBILITY, "", step + 1)

    # -- trabajos -------------------------------------------------------------

    def _may_offload(self, task: TaskSpec) -> bool:
        grant = self.grants.get(task.id)
        if grant is None or grant.phase is not Phase.ACTIVE:
            return False
        if task.criticality is Criticality.SAFETY_CRITICAL:
            return True
        m, k = task.mk_window
        window = self.history[task.id]
        # los trabajos anteriores al inicio cuentan como cumplidos
        met = sum(window) + (k - 1 - len(window))
        return met >= m

    def on_job_release(self, task_id: str, index: int) -> None:
        task = self.tasks[task_id]
        self._push((index + 1) * task.period_s, EventKind.JOB_RELEASE, task_id, index + 1)
        if task_id not in self.registered:
            return
        met = True
        offloaded = False
        if self._may_offload(task):
            grant = self.grants[task_id]
            rate = self.rates[task_id]
            upload = offload_time(task.input_mb, grant.granted_rbs, rate)
            offloaded = True
            if upload + grant.proc_time_s > task.period_s + DEADLINE_TOLERANCE:
                self.recorder.deadline_miss(self.now)
                logging.error("Trabajo %s#%d descargado fuera de plazo", task_id, index)
                met = False
            elif self.config.processing_failure_prob and self.failures.random() < self.config.processing_failure_prob:
                self.recorder.failed(self.now)
                # la copia local de una tarea crítica cubre el fallo
                met = task.criticality is Criticality.SAFETY_CRITICAL
            else:
                saving = task.local_energy_j - task.offload_power_w * upload
                self.recorder.offloaded(self.now, saving)
        if not offloaded or task.criticality is Criticality.SAFETY_CRITICAL:
            self.recorder.local(self.now)
        if task_id in self.history:
            self.history[task_id].append(met)
        if self.config.log_jobs:
            self._record("job", task=task_id, index=index, offloaded=offloaded, met=met)

    # -- bucle ----------------------------------------------------------------

    def prime(self) -> None:
        """Aplica movilidad y SRS de t = 0 sin planificar ni encolar eventos."""
        self.now = 0.0
        self.snapshot = mobility_step(
            self.scenario.traces, 0.0, self.scenario.rsus, self.config.coverage_radius_m
        )
        self.sounded = dict(self.snapshot.distances)
        self.registered = {t for t, task in self.tasks.items() if task.vehicle_id in self.snapshot.covered_vehicles}

    def run(self) -> SimulationResult:
        if self._ran:
            raise RuntimeError("Un Simulator solo puede ejecutarse una vez")
        self._ran = True
        cfg = self.config
        logging.info(
            "Simulación: %d tareas, %d RSUs, %d ciclos, modo %s, calidad %s, algoritmo %s",
            len(self.tasks), len(self.radios), cfg.cycles, cfg.mode.value, cfg.quality.value, cfg.algorithm,
        )
        if cfg.cycles:
            self._push(0.0, EventKind.MOBILITY, "", 0)
            self._push(0.0, EventKind.SRS, "", 0)
            self._push(0.0, EventKind.SCHEDULE, "", 0)
            for task_id in sorted(self.tasks):
                self._push(0.0, EventKind.JOB_RELEASE, task_id, 0)

        handlers = {
            EventKind.MOBILITY: self.on_mobility,
            EventKind.SRS: self.on_srs,
            EventKind.SCHEDULE: self.on_schedule_tick,
            EventKind.GRANTS: self.on_grants,
            EventKind.SERVICE_READY: self.on_service_ready,
        }
        processed = 0
        while self._queue:
            event = heapq.heappop(self._queue)
            self.now = event.time_s
            if event.kind is EventKind.JOB_RELEASE:
                self.on_job_release(event.entity, event.payload)
            else:
                handlers[event.kind](event.payload)
            processed += 1
        self.now = self.horizon_s
        metrics = self.recorder.finish(self.horizon_s)
        logging.info(
            "Simulación terminada: %d eventos, prevista %.6f J/s, medida %.6f J/s, %d suspensiones",
            processed, metrics.predicted_js, metrics.measured_js, metrics.suspensions,
        )
        return SimulationResult(metrics, tuple(self.log))


def run(
    scenario: "Scenario",
    config: Optional[SimConfig] = None,
    presets: Optional[Mapping[Quality, QualityPreset]] = None,
) -> SimulationResult:
    """Ejecuta una simulación completa del escenario."""
    return Simulator(scenario, config, presets).run()


def initial_problem(
    scenario: "Scenario",
    config: Optional[SimConfig] = None,
    presets: Optional[Mapping[Quality, QualityPreset]] = None,
) -> ProblemInstance:
    """Instantánea del problema en t = 0 con todas las peticiones y capacidades nominales."""
    simulator = Simulator(scenario, config, presets)
    simulator.prime()
    return simulator.build_problem(Mode.SCHED_ALL)
