"""Layout document and benchmark report writers."""

from __future__ import annotations

import json
from typing import Sequence

from .assembler import DistributedLayout, MetricsReport

LAYOUT_FORMAT = "dqclayout/1"


def layout_document(layout: DistributedLayout, metrics: MetricsReport | None = None) -> dict:
    qpus = []
    for name, backend in layout.qpus:
        owned = [(g, o) for g, o in enumerate(layout.ownership) if o.qpu == name]
        qpus.append({
            "name": name,
            "backend": backend,
            "data_qubits": [{"global_index": o.logical, "physical_index": o.physical}
                            for _, o in owned if o.role == "data"],
            "comm_qubits": [{"physical_index": o.physical, "epr_event_id": o.epr_event}
                            for _, o in owned if o.role == "comm"],
        })
    instructions = []
    for ins, tag in zip(layout.global_circuit.instructions, layout.tags):
        owners = [layout.ownership[q] for q in ins.qubits]
        names = sorted({o.qpu for o in owners})
        rec = {
            "op": ins.name,
            "qpu": names[0] if len(names) == 1 else [o.qpu for o in owners],
            "qubits": [o.physical for o in owners],
            "global_qubits": list(ins.qubits),
            "clbits": list(ins.clbits),
            "tag": tag,
        }
        if ins.angle is not None:
            rec["angle"] = ins.angle
        if ins.condition is not None:
            rec["condition"] = {"clbit": ins.condition[0], "value": ins.condition[1]}
        instructions.append(rec)
    doc = {
        "format": LAYOUT_FORMAT,
        "mode": layout.mode,
        "num_qubits": layout.global_circuit.num_qubits,
        "num_clbits": layout.global_circuit.num_clbits,
        "output_clbits": list(layout.output_clbits),
        "qpus": qpus,
        "epr_events": [
            {"id": e.id, "remote_gate": e.remote_id, "ordinal": e.ordinal,
             "qpu_a": e.qpu_a, "comm_a": e.comm_a, "qpu_b": e.qpu_b, "comm_b": e.comm_b,
             "message_bits": list(layout.message_bits[e.remote_id])}
            for e in layout.epr_events
        ],
        "instructions": instructions,
        "metrics": metrics.to_dict() if metrics is not None else None,
    }
    return doc


def emit_layout(layout: DistributedLayout, metrics: MetricsReport | None = None) -> str:
    """Deterministic JSON text of the layout document."""
    return json.dumps(layout_document(layout, metrics), indent=2) + "\n"


_COLUMNS = [
    ("Benchmark", 10), ("P0", 6), ("P1", 6), ("P2", 6), ("A0", 3), ("A1", 3), ("A2", 3),
    ("#QData", 6), ("#QComm", 6), ("#QTotal", 7), ("DMin", 5), ("DMax", 5), ("DAvg", 7),
    ("Layout", 6), ("Gates", 6), ("State", 12), ("IProb", 9), ("EProb", 9), ("ErrRate", 9),
]


def _fmt(v, digits=6) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        if v != 0 and abs(v) < 1e-3:
            return f"{v:.1e}"
        return f"{v:.{digits}g}"
    return str(v)


def report_row(r: MetricsReport) -> list[str]:
    parts = list(r.partition) + ["-"] * (3 - len(r.partition))
    assign = list(r.assignment) + ["-"] * (3 - len(r.assignment))
    return [
        r.name or "-", *parts[:3], *assign[:3],
        str(r.n_data), str(r.n_comm), str(r.n_total),
        str(r.subcirc_depth_min), str(r.subcirc_depth_max), _fmt(float(r.subcirc_depth_avg), 4),
        str(r.layout_depth), str(r.gate_count),
        f"|{r.top_state}>" if r.top_state is not None else "-",
        _fmt(r.ideal_prob), _fmt(r.sampled_prob), _fmt(r.error_rate, 3),
    ]


def emit_report(reports: Sequence[MetricsReport]) -> str:
    """Fixed-width table, one row per report, header always present."""
    rows = [[name for name, _ in _COLUMNS]] + [report_row(r) for r in reports]
    widths = [max(w, *(len(row[i]) for row in rows)) for i, (_, w) in enumerate(_COLUMNS)]
    lines = [" ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip() for row in rows]
    return "\n".join(lines) + "\n"


def emit_report_json(reports: Sequence[MetricsReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2) + "\n"


def write_distribution(d: dict[str, float]) -> str:
    return json.dumps(d, indent=2) + "\n"
