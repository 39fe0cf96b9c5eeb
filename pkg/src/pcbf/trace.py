"""Time-indexed simulation traces: CSV persistence and violation reporting.

Rows are recorded at the sampling instants, before the step's input acts.
Float cells are serialized with `repr`, which round-trips exactly, so a trace
written twice from the same run is byte-identical and a parsed trace carries
the original numerics.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import List

# A barrier component below -VIOLATION_TOL flags a violation.
VIOLATION_TOL = 1e-9


@dataclass
class SimTrace:
    columns: List[str]
    rows: List[list]

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(
                    f"row has {len(row)} cells but the trace has {len(self.columns)} columns"
                )

    def __len__(self) -> int:
        return len(self.rows)

    def append(self, row: list) -> None:
        if len(row) != len(self.columns):
            raise ValueError(
                f"row has {len(row)} cells but the trace has {len(self.columns)} columns"
            )
        self.rows.append(list(row))

    def column(self, name: str) -> list:
        try:
            idx = self.columns.index(name)
        except ValueError:
            raise KeyError(f"no column named {name!r}") from None
        return [row[idx] for row in self.rows]

    def violation_columns(self) -> List[str]:
        return [c for c in self.columns if c.startswith("viol")]


def violation_flags(h_values) -> List[int]:
    """0/1 flags, one per barrier component."""
    return [1 if float(v) < -VIOLATION_TOL else 0 for v in h_values]


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_trace(trace: SimTrace, path) -> None:
    """Write the trace as CSV; bit-stable for identical traces."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(trace.columns)
        for row in trace.rows:
            writer.writerow([_format_cell(v) for v in row])


def read_trace(path) -> SimTrace:
    """Parse a trace CSV back into typed cells (exact float round-trip)."""
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        rows = []
        for raw in reader:
            row = []
            for name, cell in zip(header, raw):
                if name == "step" or name.startswith("viol"):
                    row.append(int(cell))
                elif name.startswith("status"):
                    row.append(cell)
                else:
                    row.append(float(cell))
            rows.append(row)
    return SimTrace(header, rows)


@dataclass(frozen=True)
class ConstraintViolations:
    """Violation statistics for one barrier component."""

    name: str
    count: int
    first_step: int  # -1 when the component never trips
    max_depth: float


@dataclass(frozen=True)
class ViolationReport:
    constraints: tuple

    @property
    def total(self) -> int:
        return sum(c.count for c in self.constraints)

    @property
    def any(self) -> bool:
        return self.total > 0

    def summary_lines(self) -> List[str]:
        lines = [f"total violations: {self.total}"]
        for c in self.constraints:
            if c.count:
                lines.append(
                    f"  {c.name}: count={c.count} first_step={c.first_step} "
                    f"max_depth={c.max_depth:.6g}"
                )
            else:
                lines.append(f"  {c.name}: count=0")
        return lines


def report_violations(trace: SimTrace) -> ViolationReport:
    """Per-constraint counts, first violating step, and maximum depth.

    Counts come from the recorded flags alone; the depth of a flagged step is
    read off the matching barrier column (viol columns map to h columns by
    name, e.g. viol2 -> h2).
    """
    steps = trace.column("step") if "step" in trace.columns else list(range(len(trace)))
    summaries = []
    for name in trace.violation_columns():
        flags = trace.column(name)
        h_name = name.replace("viol", "h", 1)
        h_vals = trace.column(h_name) if h_name in trace.columns else None
        count = 0
        first = -1
        depth = 0.0
        for i, flag in enumerate(flags):
            if not flag:
                continue
            count += 1
            if first < 0:
                first = int(steps[i])
            if h_vals is not None:
                depth = max(depth, -float(h_vals[i]))
        summaries.append(ConstraintViolations(name, count, first, depth))
    return ViolationReport(tuple(summaries))
