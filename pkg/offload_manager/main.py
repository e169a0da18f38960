"""Punto de entrada de línea de órdenes de offload_manager.

Prepara el logging (fichero ``logs/offload_manager.log`` y consola de
errores), captura excepciones no controladas y despacha las subórdenes
``solve``, ``simulate``, ``bench``, ``certify`` y ``gen``. Cada orden imprime
primero su manifiesto (semilla y hash de configuración) y después los
resultados.

Códigos de salida: 0 éxito, 1 fallo de invariante o de validación, 2 error de
uso o de configuración.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

from pydantic import ValidationError

from offload_manager import __version__
from offload_manager.algorithms import ALGORITHMS, CERTIFIABLE
from offload_manager.errors import ConfigError, InvariantError, ScenarioError
from offload_manager.paths import ensure_run_directories, example_scenario_path, log_path, results_dir
from offload_manager.settings import Settings, load_settings
from offload_manager.utils import config_hash, run_label

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class UsageError(Exception):
    """Combinación de argumentos no válida detectada tras el análisis."""


def _setup_logging(level: str = "INFO") -> None:
    """Configura el logging para ``logs/offload_manager.log`` y la salida de errores.

    La consola usa ``stderr`` para que ``stdout`` solo lleve el manifiesto y
    los resultados. Se instala un ``sys.excepthook`` que registra cualquier
    excepción no manejada.
    """

    ensure_run_directories()
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s [%(levelname)s] %(message)s",
        handlers=[
            logging.FileHandler(log_path(), encoding="utf-8"),
            logging.StreamHandler(sys.stderr),
        ],
        force=True,
    )

    def handle_exception(exc_type, exc_value, exc_traceback) -> None:
        if issubclass(exc_type, KeyboardInterrupt):
            # Permitir que el usuario interrumpa la ejecución sin stacktrace
            sys.__excepthook__(exc_type, exc_value, exc_traceback)
            return
        logging.exception(
            "Unhandled exception",
            exc_info=(exc_type, exc_value, exc_traceback),
        )

    sys.excepthook = handle_exception


# -- salida ------------------------------------------------------------------


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _print_manifest(manifest: Mapping[str, Any]) -> None:
    _emit("# manifest " + json.dumps(manifest, sort_keys=True, ensure_ascii=False))


def _plain_manifest(command: str, seed: int, config: Mapping[str, Any]) -> Dict[str, Any]:
    """Manifiesto de órdenes que no parten de un escenario (certify, gen)."""
    from offload_manager.results import RESULTS_FORMAT_VERSION

    return {
        "command": command,
        "format_version": RESULTS_FORMAT_VERSION,
        "code_version": __version__,
        "seed": seed,
        "config_hash": config_hash(dict(config)),
        "config": dict(config),
    }


def _split(value: Optional[str]) -> List[str]:
    return [item.strip() for item in (value or "").split(",") if item.strip()]


# -- escenario y configuración -----------------------------------------------


def _scenario_path(args: argparse.Namespace) -> Path:
    return Path(args.scenario) if args.scenario else example_scenario_path()


def _load(args: argparse.Namespace):
    """Carga el escenario y aplica las opciones globales a su configuración."""
    from offload_manager.scenario import load_scenario

    scenario = load_scenario(_scenario_path(args))
    updates: Dict[str, Any] = {}
    if args.seed is not None:
        updates["rng_seed"] = args.seed
    if getattr(args, "algorithm", None):
        updates["algorithm"] = args.algorithm
    if args.mode:
        updates["mode"] = args.mode
    if args.quality:
        updates["quality"] = args.quality
    if getattr(args, "duration", None) is not None:
        updates["duration_s"] = args.duration
    if getattr(args, "events", False):
        updates["log_jobs"] = True
    return scenario.with_config(**updates) if updates else scenario


def _output_dir(args: argparse.Namespace, settings: Settings, name: str) -> Path:
    if args.out:
        return Path(args.out)
    return results_dir(settings.results_dir or None) / name


# -- órdenes -----------------------------------------------------------------


def cmd_solve(args: argparse.Namespace, settings: Settings) -> int:
    """Resuelve la instantánea inicial del escenario y valida la asignación."""
    from offload_manager.feasibility import validate
    from offload_manager.instances import enumerate_instances
    from offload_manager.results import build_manifest, write_assignment
    from offload_manager.sim import initial_problem

    scenario = _load(args)
    config = scenario.config
    manifest = build_manifest(config, scenario.source, scenario.digest, "solve")
    _print_manifest(manifest)

    problem = initial_problem(scenario, config, settings.presets)
    pool = enumerate_instances(problem, prune=config.prune)
    assignment = ALGORITHMS[config.algorithm](pool, problem)

    _emit("task,rsu,rbs,cus,utility")
    for inst in assignment.selected:
        _emit(f"{inst.task_id},{inst.rsu_id},{inst.rbs},{inst.cus},{inst.base_utility!r}")
    _emit("rsu,used_rbs,used_cus,total_rbs,total_cus")
    for rsu in sorted(scenario.rsus, key=lambda r: r.id):
        rbs, cus = assignment.used.get(rsu.id, (0, 0))
        _emit(f"{rsu.id},{rbs},{cus},{rsu.total_rbs},{rsu.total_cus}")
    _emit(f"total_utility,{assignment.total_utility!r}")

    if args.out:
        write_assignment(assignment, args.out, manifest)
        logging.info("Asignación guardada en %s", args.out)

    violations = validate(assignment, problem)
    if violations:
        for violation in violations:
            _emit(f"violation,{violation}")
        logging.error("La asignación de %s no es factible: %d incumplimientos", config.algorithm, len(violations))
        return EXIT_FAILURE
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace, settings: Settings) -> int:
    from offload_manager.results import build_manifest, write_event_log, write_results
    from offload_manager.sim import run

    scenario = _load(args)
    manifest = build_manifest(scenario.config, scenario.source, scenario.digest, "simulate")
    _print_manifest(manifest)

    result = run(scenario, scenario.config, settings.presets)
    stem = run_label(Path(scenario.source or "scenario").stem)
    target = write_results(result.metrics, _output_dir(args, settings, f"{stem}-{manifest['config_hash']}"), manifest)
    if args.events:
        write_event_log(result.events, target / "events.jsonl")
    logging.info("Resultados escritos en %s", target)

    if args.format == "rows":
        _emit(",".join(result.metrics.rows[0].to_dict()) if result.metrics.rows else "")
        for row in result.metrics.rows:
            _emit(",".join(repr(v) if isinstance(v, float) else str(v) for v in row.to_dict().values()))
    else:
        _emit(json.dumps(result.metrics.summary(), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_bench(args: argparse.Namespace, settings: Settings) -> int:
    from offload_manager.bench import BenchMatrix, run_bench, scaling_sweep, summarize
    from offload_manager.results import build_manifest
    from offload_manager.sim.config import Mode, Quality

    workers = args.workers or settings.workers
    if args.scaling:
        sizes = [int(s) for s in _split(args.sizes)] or [25, 50, 100, 200]
        seed = args.seed or 0
        _print_manifest(_plain_manifest("bench-scaling", seed, {"sizes": sizes, "repeats": args.replicates}))
        frame = scaling_sweep(sizes, seed=seed, repeats=max(1, args.replicates))
    else:
        scenario = _load(args)
        algorithms = [args.algorithm] if args.algorithm else _split(args.algorithms) or list(ALGORITHMS)
        unknown = [name for name in algorithms if name not in ALGORITHMS]
        if unknown:
            raise UsageError(f"algoritmos desconocidos: {', '.join(unknown)}")
        qualities = [Quality(args.quality)] if args.quality else [Quality.HIGH, Quality.MEDIUM, Quality.LOW]
        modes = [Mode(args.mode)] if args.mode else [Mode.SCHED_ALL, Mode.SCHED_REMAIN]
        matrix = BenchMatrix(tuple(algorithms), tuple(qualities), tuple(modes), args.replicates, scenario.config.rng_seed)
        manifest = build_manifest(scenario.config, scenario.source, scenario.digest, "bench")
        manifest["matrix"] = {
            "algorithms": list(matrix.algorithms),
            "qualities": [q.value for q in matrix.qualities],
            "modes": [m.value for m in matrix.modes],
            "replicates": matrix.replicates,
        }
        _print_manifest(manifest)
        frame = run_bench(scenario, matrix, workers, settings.presets)
        if args.format == "summary":
            frame = summarize(frame)

    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(args.out, index=False, lineterminator="\n")
    _emit(frame.to_csv(index=False, lineterminator="\n"))
    return EXIT_OK


def cmd_certify(args: argparse.Namespace, settings: Settings) -> int:
    from offload_manager.generator import ProblemFamily
    from offload_manager.oracle import certify_ratio

    algorithms = [args.algorithm] if args.algorithm else _split(args.algorithms) or ["saround", "floor_rd"]
    unknown = [name for name in algorithms if name not in CERTIFIABLE]
    if unknown:
        raise UsageError(f"algoritmos no certificables: {', '.join(unknown)}")
    try:
        family = ProblemFamily(
            tasks=(2, args.max_tasks), rsus=(1, args.max_rsus), rbs=(2, args.max_rbs), cus=(2, args.max_cus),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    seed = args.seed or 0
    _print_manifest(
        _plain_manifest(
            "certify",
            seed,
            {
                "algorithms": algorithms,
                "trials": args.trials,
                "caps": {"tasks": args.max_tasks, "rsus": args.max_rsus, "rbs": args.max_rbs, "cus": args.max_cus},
            },
        )
    )
    try:
        reports = [
            certify_ratio(name, family, args.trials, seed, settings.oracle_budget, args.workers or settings.workers)
            for name in algorithms
        ]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(json.dumps([report.to_dict() for report in reports], indent=2, ensure_ascii=False))
    failed = [report.algorithm for report in reports if not report.ok]
    if failed:
        logging.error("Cotas incumplidas: %s", ", ".join(failed))
        return EXIT_FAILURE
    return EXIT_OK


def cmd_gen(args: argparse.Namespace, settings: Settings) -> int:
    from offload_manager.generator import ScenarioDescriptor, gen_scenario
    from offload_manager.scenario import write_scenario

    data: Dict[str, Any] = {}
    if args.descriptor:
        try:
            data = json.loads(Path(args.descriptor).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"descriptor ilegible {args.descriptor}: {exc}") from exc
    for name in ("tasks", "vehicles", "rsus"):
        value = getattr(args, name)
        if value is not None:
            data[name] = value
    if args.duration is not None:
        data["duration_s"] = args.duration
    descriptor = ScenarioDescriptor(**data)
    seed = args.seed or 0
    _print_manifest(_plain_manifest("gen", seed, descriptor.model_dump(mode="json")))
    document = gen_scenario(descriptor, seed)
    target = Path(args.out) if args.out else results_dir(settings.results_dir or None) / f"scenario-{seed}.json"
    write_scenario(document, target)
    _emit(str(target))
    return EXIT_OK


# -- análisis de argumentos ---------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="semilla maestra")
    common.add_argument("--out", default=None, help="fichero o directorio de salida")
    common.add_argument("--mode", choices=["sched_all", "sched_remain"], default=None)
    common.add_argument("--quality", choices=["high", "medium", "low"], default=None)
    common.add_argument("--format", choices=["rows", "summary"], default="summary")
    common.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    common.add_argument("--settings", default=None, help="fichero de ajustes alternativo")

    parser = argparse.ArgumentParser(prog="offload_manager", description="Planificador de descarga vehicular")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", parents=[common], help="resuelve la instantánea inicial")
    solve.add_argument("scenario", nargs="?")
    solve.add_argument("--algorithm", choices=list(ALGORITHMS), default=None)
    solve.set_defaults(handler=cmd_solve)

    simulate = sub.add_parser("simulate", parents=[common], help="ejecuta una simulación")
    simulate.add_argument("scenario", nargs="?")
    simulate.add_argument("--algorithm", choices=list(ALGORITHMS), default=None)
    simulate.add_argument("--duration", type=float, default=None)
    simulate.add_argument("--events", action="store_true", help="escribe events.jsonl")
    simulate.set_defaults(handler=cmd_simulate)

    bench = sub.add_parser("bench", parents=[common], help="matriz de simulaciones o barrido de escalado")
    bench.add_argument("scenario", nargs="?")
    bench.add_argument("--algorithm", choices=list(ALGORITHMS), default=None)
    bench.add_argument("--algorithms", default=None, help="lista separada por comas")
    bench.add_argument("--replicates", type=int, default=3)
    bench.add_argument("--workers", type=int, default=None)
    bench.add_argument("--scaling", action="store_true", help="barrido de tiempo de SARound")
    bench.add_argument("--sizes", default=None, help="tamaños del barrido, separados por comas")
    bench.set_defaults(handler=cmd_bench)

    certify = sub.add_parser("certify", parents=[common], help="certifica razones de aproximación")
    certify.add_argument("--algorithm", choices=list(CERTIFIABLE), default=None)
    certify.add_argument("--algorithms", default=None, help="lista separada por comas")
    certify.add_argument("--trials", type=int, default=500)
    certify.add_argument("--max-tasks", type=int, default=6)
    certify.add_argument("--max-rsus", type=int, default=3)
    certify.add_argument("--max-rbs", type=int, default=6)
    certify.add_argument("--max-cus", type=int, default=4)
    certify.add_argument("--workers", type=int, default=None)
    certify.set_defaults(handler=cmd_certify)

    gen = sub.add_parser("gen", parents=[common], help="genera un escenario sintético")
    gen.add_argument("--descriptor", default=None, help="JSON con campos de ScenarioDescriptor")
    gen.add_argument("--tasks", type=int, default=None)
    gen.add_argument("--vehicles", type=int, default=None)
    gen.add_argument("--rsus", type=int, default=None)
    gen.add_argument("--duration", type=float, default=None)
    gen.set_defaults(handler=cmd_gen)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.log_level)
    settings = load_settings(Path(args.settings) if args.settings else None)
    try:
        return args.handler(args, settings)
    except UsageError as exc:
        logging.error("%s", exc)
        return EXIT_USAGE
    except (ScenarioError, ConfigError, ValidationError) as exc:
        logging.error("Configuración inválida: %s", exc)
        return EXIT_USAGE
    except InvariantError:
        logging.exception("Invariante roto")
        return EXIT_FAILURE
    except Exception:
        logging.exception("Unhandled exception")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
