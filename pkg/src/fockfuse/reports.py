"""Experiment reports: deterministic tables and machine-readable output.

Reports embed the exact parameters and the library version so a run can be
reproduced from its own output.  JSON output carries 12 significant digits
with sorted keys; human tables use 6.  Measured reference constants from
the demonstration experiment are included for comparison only and are never
used as pass/fail oracles.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import __version__
from .distinguishability import ProbabilityMatrix


@dataclass(frozen=True)
class ReferenceConstants:
    """Documented experimental reference values (comparison only)."""

    measured_mean_fidelity: float = 0.750
    measured_mean_fidelity_err: float = 0.013
    measured_similarity: float = 0.940
    measured_similarity_err: float = 0.009
    fitted_indistinguishability: float = 0.77
    hom_visibility_same_pair: float = 0.94
    hom_visibility_cross_pair: float = 0.75


REFERENCE = ReferenceConstants()


def _round12(value):
    if isinstance(value, float):
        return float(f"{value:.12g}")
    if isinstance(value, complex):
        return {"re": _round12(value.real), "im": _round12(value.imag)}
    if isinstance(value, dict):
        return {k: _round12(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round12(v) for v in value]
    if isinstance(value, ProbabilityMatrix):
        return _round12(value.to_json_obj())
    return value


def _fmt6(value) -> str:
    if isinstance(value, complex):
        sign = "+" if value.imag >= 0 else "-"
        return f"{value.real:.6f}{sign}{abs(value.imag):.6f}j"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


@dataclass
class ExperimentReport:
    name: str
    parameters: dict
    tables: dict = field(default_factory=dict)
    references: dict = field(default_factory=dict)
    notes: tuple = ()

    def to_json(self) -> str:
        payload = {
            "name": self.name,
            "version": __version__,
            "parameters": _round12(self.parameters),
            "tables": _round12(self.tables),
            "references": _round12(self.references),
            "notes": list(self.notes),
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def to_text(self) -> str:
        lines = [f"# {self.name} (fockfuse {__version__})"]
        if self.parameters:
            params = " ".join(f"{k}={_fmt6(v)}" for k, v in self.parameters.items())
            lines.append(f"parameters: {params}")
        for title, table in self.tables.items():
            lines.append("")
            lines.append(f"== {title} ==")
            lines.extend(_render_table(table))
        if self.references:
            lines.append("")
            lines.append("== reference constants (documentation only) ==")
            for k, v in self.references.items():
                lines.append(f"  {k} = {_fmt6(v)}")
        for note in self.notes:
            lines.append("")
            lines.append(f"note: {note}")
        return "\n".join(lines) + "\n"


def _render_table(table) -> list[str]:
    if isinstance(table, ProbabilityMatrix):
        width = max(len(lbl) for lbl in table.row_labels + table.col_labels) + 2
        head = " " * width + "".join(f"{lbl:>{width}}" for lbl in table.col_labels)
        lines = [head]
        for lbl, row in zip(table.row_labels, table.entries):
            lines.append(f"{lbl:>{width}}" + "".join(f"{x:>{width}.6f}" for x in row))
        return lines
    if isinstance(table, dict):
        return [f"  {k} = {_fmt6(v)}" for k, v in table.items()]
    if isinstance(table, (list, tuple)):
        out = []
        for row in table:
            if isinstance(row, dict):
                out.append("  " + " ".join(f"{k}={_fmt6(v)}" for k, v in row.items()))
            elif isinstance(row, (list, tuple)):
                out.append("  " + " ".join(_fmt6(v) for v in row))
            else:
                out.append(f"  {_fmt6(row)}")
        return out
    return [f"  {_fmt6(table)}"]
