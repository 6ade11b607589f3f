"""Command-line entry point (``dqclayout``)."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from .assembler import MetricsReport
from .bench import BENCHMARK_SUITE
from .pipeline import EXIT_CONFIG, RunConfig, StageError, run_pipeline, suite_config, write_outputs
from .scheduler import Mode
from .serialize import emit_report, emit_report_json
from .sim import QUBIT_CAP_ENV


def _fail(e: StageError) -> None:
    click.echo(f"error: {e}", err=True)
    sys.exit(e.exit_code)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def main(verbose: bool) -> None:
    """Compile a monolithic circuit into a distributed layout across QPUs."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


_mode = click.option("--mode", type=click.Choice([m.value for m in Mode]),
                     default=Mode.EXPANDED.value, show_default=True,
                     help="strict: comm qubits must fit on the device; expanded: virtual comm qubits.")
_shots = click.option("--shots", type=click.IntRange(min=1), default=100_000, show_default=True)
_seed = click.option("--seed", type=int, default=1234, show_default=True)
_cap = click.option("--qubit-cap", type=click.IntRange(min=1), default=None, envvar=QUBIT_CAP_ENV,
                    help=f"Largest circuit to simulate (default 24, or ${QUBIT_CAP_ENV}).")


@main.command()
@click.option("--circuit", "circuit_file", type=click.Path(dir_okay=False), help="OpenQASM 2 file.")
@click.option("--bench", help="Benchmark, e.g. ghz:6 or qaoa:4:gamma=0.3.")
@click.option("--partition", "partition_file", required=True, type=click.Path(dir_okay=False))
@click.option("--backends", "backends_file", type=click.Path(dir_okay=False), default=None,
              help="Extra backend definitions (YAML/JSON); built-in fakes are always available.")
@_mode
@_shots
@_seed
@_cap
@click.option("--no-optimize", is_flag=True, help="Skip single-qubit gate merging.")
@click.option("--no-sim", is_flag=True, help="Compile and report metrics only.")
@click.option("--require-sim", is_flag=True, help="Exit 4 instead of skipping an oversized simulation.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
def compile(circuit_file, bench, partition_file, backends_file, mode, shots, seed, qubit_cap,
            no_optimize, no_sim, require_sim, out_dir):
    """Compile one circuit and print its metrics row."""
    cfg = RunConfig(circuit_file=circuit_file, bench=bench, partition_file=partition_file,
                    backends_file=backends_file, mode=mode, shots=shots, seed=seed,
                    qubit_cap=qubit_cap, optimize=not no_optimize, simulate=not no_sim,
                    require_simulation=require_sim, out_dir=out_dir)
    try:
        result = run_pipeline(cfg)
    except StageError as e:
        _fail(e)
    click.echo(emit_report([result.report]), nl=False)
    if result.report.distribution:
        click.echo(json.dumps(result.report.distribution, indent=2))
    for path in result.files.values():
        click.echo(f"wrote {path}")


@main.command()
@click.option("--in", "inputs", multiple=True, required=True, type=click.Path(exists=True),
              help="Output directory of a compile run, or a report.json file. Repeatable.")
@click.option("--json", "as_json", is_flag=True, help="Emit structured JSON instead of a table.")
def report(inputs, as_json):
    """Merge the reports of earlier runs into one table."""
    reports = []
    for item in inputs:
        path = Path(item)
        if path.is_dir():
            path = path / "report.json"
        try:
            data = json.loads(path.read_text())
            rows = data if isinstance(data, list) else [data]
            reports.extend(MetricsReport.from_dict(r) for r in rows)
        except (OSError, ValueError, TypeError) as e:
            click.echo(f"error: cannot read report {path}: {e}", err=True)
            sys.exit(EXIT_CONFIG)
    click.echo(emit_report_json(reports) if as_json else emit_report(reports), nl=False)


@main.command()
@_mode
@_shots
@_seed
@_cap
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
def suite(mode, shots, seed, qubit_cap, out_dir):
    """Run the twelve standard benchmark configurations."""
    reports = []
    for i, entry in enumerate(BENCHMARK_SUITE):
        cfg = suite_config(entry, mode=mode, shots=shots, seed=seed, qubit_cap=qubit_cap)
        try:
            result = run_pipeline(cfg)
        except StageError as e:
            _fail(e)
        if out_dir is not None:
            write_outputs(result, Path(out_dir) / f"{i:02d}-{entry.name.lower()}")
        reports.append(result.report)
    click.echo(emit_report(reports), nl=False)
    if out_dir is not None:
        (Path(out_dir) / "report.json").write_text(emit_report_json(reports))


if __name__ == "__main__":
    main()
