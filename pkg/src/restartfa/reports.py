"""Report rows for machine-times-word evaluations and CSV/JSON export."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .closure import overall_decision
from .engine import EngineCaps, round_table
from .machine import MachineSpec, tape_word

ROW_FIELDS = (
    "machine", "word", "p_acc", "p_rej", "p_reset_total",
    "P_acc", "P_rej", "expected_steps", "lemma4_bound", "verdict",
)


@dataclass
class ReportRow:
    machine: str
    word: str
    p_acc: float
    p_rej: float
    p_reset_total: float
    P_acc: float
    P_rej: float
    expected_steps: float
    lemma4_bound: float
    verdict: str

    def values(self):
        return tuple(getattr(self, f) for f in ROW_FIELDS)


def evaluate_words(
    spec: MachineSpec,
    words,
    machine_id: str,
    membership=None,
    eps: float | None = None,
    caps: EngineCaps = EngineCaps(),
) -> list[ReportRow]:
    """First-round and overall quantities per word, sorted by (machine, word).

    When a membership oracle and an error bound are supplied, the verdict
    column carries the per-word error-bound check.
    """
    rows = []
    for w in sorted(set(words), key=lambda s: (len(s), s)):
        word = tape_word(w, spec.alphabet)
        table = round_table(spec, word, caps)
        first = table[spec.initial]
        report = overall_decision(table, spec.initial)
        verdict = ""
        if membership is not None and eps is not None:
            member = bool(membership(w))
            num, den = (report.P_rej, report.P_acc) if member else (report.P_acc, report.P_rej)
            if den == 0.0 and num == 0.0:
                verdict = "degenerate"
            else:
                ratio = math.inf if den == 0.0 else num / den
                verdict = "pass" if ratio <= eps / (1 - eps) + 1e-12 else "fail"
        rows.append(ReportRow(
            machine=machine_id,
            word=w,
            p_acc=first.p_acc,
            p_rej=first.p_rej,
            p_reset_total=first.p_reset_total,
            P_acc=report.P_acc,
            P_rej=report.P_rej,
            expected_steps=report.expected_total_steps,
            lemma4_bound=report.lemma4_bound,
            verdict=verdict,
        ))
    rows.sort(key=lambda r: (r.machine, len(r.word), r.word))
    return rows


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    return str(value)


def export_report(rows, fmt: str = "csv") -> str:
    """Render rows as CSV (header + fixed column order) or a JSON array.

    Floats are written with 17 significant digits; non-finite values become
    "inf"/"nan" strings in CSV and null in JSON.
    """
    if fmt == "csv":
        lines = [",".join(ROW_FIELDS)]
        for row in rows:
            lines.append(",".join(_fmt(v) for v in row.values()))
        return "\n".join(lines) + "\n"
    if fmt == "json":
        objs = []
        for row in rows:
            parts = []
            for name, value in zip(ROW_FIELDS, row.values()):
                if isinstance(value, float) and not math.isfinite(value):
                    rendered = "null"
                elif isinstance(value, float):
                    rendered = format(value, ".17g")
                else:
                    rendered = f'"{value}"'
                parts.append(f'"{name}": {rendered}')
            objs.append("{" + ", ".join(parts) + "}")
        return "[\n " + ",\n ".join(objs) + "\n]\n" if objs else "[]\n"
    raise ValueError(f"unknown report format {fmt!r}")
