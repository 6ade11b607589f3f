"""End-to-end driver: partition, schedule, transpile, assemble, then simulate and report."""

from __future__ import annotations

import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .assembler import (AssemblyError, DistributedLayout, MetricsReport, SimulationResult,
                        assemble, compute_metrics)
from .backends import BackendRegistry, CapacityError, ConfigError, load_registry
from .bench import BENCHMARK_SUITE, STANDARD_BACKENDS, BenchmarkSpec, SuiteEntry
from .circuit import Circuit, CircuitError
from .partition import (PartitionError, PartitionPlan, build_groups, format_qubit_range,
                        load_partition, lower_to_remote)
from .qasm import ParseError, emit_qasm, parse_qasm
from .scheduler import Mode, build_schedule
from .serialize import emit_layout, emit_report, emit_report_json
from .sim import TooLargeError, default_qubit_cap, ideal_distribution, output_clbits, run_shots
from .transpiler import CompiledSubcircuit, compile_all

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_COMPILE, EXIT_SIM_REFUSED = 0, 2, 3, 4
NOT_SIMULATED = "not simulated (exceeds qubit cap)"


class StageError(RuntimeError):
    """A failure inside one pipeline stage; ``exit_code`` follows the CLI contract."""

    def __init__(self, stage: str, cause: BaseException, exit_code: int):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = exit_code


_CONFIG_ERRORS = (ConfigError, PartitionError, ParseError, FileNotFoundError, ValueError)


@contextmanager
def stage(name: str) -> Iterator[None]:
    try:
        yield
    except StageError:
        raise
    except (CapacityError, AssemblyError, CircuitError) as e:
        raise StageError(name, e, EXIT_COMPILE) from e
    except _CONFIG_ERRORS as e:
        raise StageError(name, e, EXIT_CONFIG) from e
    except TooLargeError as e:
        raise StageError(name, e, EXIT_SIM_REFUSED) from e
    except Exception as e:  # noqa: BLE001 - anything else is a compiler bug, still attributed
        raise StageError(name, e, EXIT_COMPILE) from e


@dataclass
class RunConfig:
    circuit_file: str | None = None
    bench: str | None = None
    circuit: Circuit | None = None
    partition_file: str | None = None
    plan: PartitionPlan | None = None
    backends_file: str | None = None
    registry: BackendRegistry | None = None
    mode: str = Mode.EXPANDED.value
    shots: int = 100_000
    seed: int = 1234
    qubit_cap: int | None = None
    optimize: bool = True
    simulate: bool = True
    require_simulation: bool = False
    out_dir: str | None = None
    name: str | None = None

    def validate(self) -> None:
        sources = [s for s in (self.circuit_file, self.bench, self.circuit) if s is not None]
        if len(sources) != 1:
            raise ConfigError("exactly one circuit source (file, benchmark or circuit) is required")
        if (self.partition_file is None) == (self.plan is None):
            raise ConfigError("exactly one of partition file or plan is required")
        if self.shots < 1:
            raise ConfigError("shots must be positive", "shots")
        Mode(self.mode)


@dataclass
class Compilation:
    circuit: Circuit
    plan: PartitionPlan
    lowered: Circuit
    remotes: list
    schedule: object
    compiled: list[CompiledSubcircuit]
    layout: DistributedLayout


@dataclass
class PipelineResult:
    compilation: Compilation
    report: MetricsReport
    files: dict[str, str] = field(default_factory=dict)

    @property
    def layout(self) -> DistributedLayout:
        return self.compilation.layout


def compile_circuit(circuit: Circuit, plan: PartitionPlan, registry: BackendRegistry | None = None,
                    mode: Mode | str = Mode.EXPANDED, optimize: bool = True) -> Compilation:
    """Stages 1-4 with no simulation; errors carry the failing stage."""
    registry = registry if registry is not None else BackendRegistry()
    with stage("partition"):
        lowered, remotes = lower_to_remote(circuit, plan)
        groups = build_groups(lowered, plan)
    with stage("schedule"):
        for g in range(len(plan.groups)):
            registry[plan.backend_of(g)]
        sched = build_schedule(groups, remotes, plan, registry, mode)
    with stage("transpile"):
        specs = [registry[s.backend] for s in sched.subcircuits]
        compiled = compile_all(sched.subcircuits, specs, mode, optimize)
    with stage("assemble"):
        layout = assemble(sched, compiled, output_clbits(circuit))
    return Compilation(circuit, plan, lowered, remotes, sched, compiled, layout)


def simulate(comp: Compilation, shots: int, seed: int,
             qubit_cap: int | None = None) -> SimulationResult:
    """Monolithic ideal vs. layout samples over the original output clbits."""
    cap = default_qubit_cap() if qubit_cap is None else qubit_cap
    key = comp.layout.output_clbits
    ideal = ideal_distribution(comp.circuit, key, qubit_cap=cap)
    sampled = run_shots(comp.layout.global_circuit, shots, seed, key, qubit_cap=cap)
    return SimulationResult(ideal, sampled, shots, seed)


def _load_circuit(cfg: RunConfig) -> tuple[Circuit, str]:
    if cfg.circuit is not None:
        return cfg.circuit, cfg.name or "circuit"
    if cfg.bench is not None:
        spec = BenchmarkSpec.parse(cfg.bench)
        return spec.build(), cfg.name or spec.label
    path = Path(cfg.circuit_file)
    return parse_qasm(path.read_text()), cfg.name or path.stem


def run_pipeline(cfg: RunConfig) -> PipelineResult:
    with stage("config"):
        cfg.validate()
        circuit, name = _load_circuit(cfg)
        plan = cfg.plan if cfg.plan is not None else load_partition(cfg.partition_file)
        registry = cfg.registry if cfg.registry is not None else load_registry(cfg.backends_file)
    comp = compile_circuit(circuit, plan, registry, cfg.mode, cfg.optimize)

    sim = None
    status = "not run"
    if cfg.simulate:
        try:
            with stage("simulate"):
                sim = simulate(comp, cfg.shots, cfg.seed, cfg.qubit_cap)
        except StageError as e:
            if e.exit_code != EXIT_SIM_REFUSED or cfg.require_simulation:
                raise
            log.info("%s: %s", name, e)
            status = NOT_SIMULATED
    report = compute_metrics(comp.layout, comp.compiled, sim)
    if sim is None:
        report.simulation = status
    report.name = name
    report.partition = [format_qubit_range(g) for g in plan.groups]

    result = PipelineResult(comp, report)
    if cfg.out_dir is not None:
        with stage("output"):
            result.files = write_outputs(result, Path(cfg.out_dir))
    return result


def write_outputs(result: PipelineResult, out: Path) -> dict[str, str]:
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "layout.json": emit_layout(result.layout, result.report),
        "layout.qasm": emit_qasm(result.layout.global_circuit),
        "report.json": emit_report_json([result.report]),
        "report.txt": emit_report([result.report]),
    }
    for fname, text in files.items():
        (out / fname).write_text(text)
    return {k: str(out / k) for k in files}


def suite_config(entry: SuiteEntry, **kw) -> RunConfig:
    plan = PartitionPlan.from_ranges(entry.partitions, entry.assignment, STANDARD_BACKENDS)
    return RunConfig(bench=entry.bench, plan=plan, name=entry.name, **kw)


def run_suite(entries=BENCHMARK_SUITE, **kw) -> list[PipelineResult]:
    return [run_pipeline(suite_config(e, **kw)) for e in entries]
