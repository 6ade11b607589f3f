"""Distributed quantum circuit layout compiler.

A monolithic circuit plus a qubit partition is split across QPUs; every
cross-partition CNOT becomes a TeleGate over a fresh EPR pair.
"""

from .assembler import DistributedLayout, MetricsReport, assemble, compute_metrics, expand_telegate
from .backends import BUILTIN_BACKENDS, BackendRegistry, BackendSpec, ConfigError, load_registry
from .bench import BenchmarkSpec, gen_bitcode, gen_ghz, gen_qaoa, gen_tfim
from .circuit import Circuit, GateKind, Instruction, depth, gate_count
from .partition import PartitionPlan, lower_to_remote
from .pipeline import RunConfig, StageError, compile_circuit, run_pipeline
from .qasm import ParseError, emit_qasm, parse_qasm
from .scheduler import Mode
from .serialize import emit_layout, emit_report
from .sim import hellinger_fidelity, ideal_distribution, run_shots

__all__ = [
    "BUILTIN_BACKENDS", "BackendRegistry", "BackendSpec", "BenchmarkSpec", "Circuit",
    "ConfigError", "DistributedLayout", "GateKind", "Instruction", "MetricsReport", "Mode",
    "ParseError", "PartitionPlan", "RunConfig", "StageError", "assemble", "compile_circuit",
    "compute_metrics", "depth", "emit_layout", "emit_qasm", "emit_report", "expand_telegate",
    "gate_count", "gen_bitcode", "gen_ghz", "gen_qaoa", "gen_tfim", "hellinger_fidelity",
    "ideal_distribution", "load_registry", "lower_to_remote", "parse_qasm", "run_pipeline",
    "run_shots",
]
__version__ = "0.1.0"
