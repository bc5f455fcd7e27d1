"""Histories, labels, verdict reports, witnesses, and the labeler contract.

Trace files are UTF-8 JSONL: one step object per line with fields ``t``
(integer), ``input`` (string, optional; empty means no new input),
``output`` (string), ``labels`` (array of strings, optional), plus an
optional leading metadata line ``{"meta": {...}}``.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Protocol, runtime_checkable

from .ltl import Formula, TruthAssignment, Verdict, parse, render


class TraceError(ValueError):
    """Malformed trace file or inconsistent step sequence."""


class LabelingError(RuntimeError):
    """A labeler failed or emitted a proposition outside its vocabulary."""

    def __init__(self, message: str, t: int):
        super().__init__(f"step {t}: {message}")
        self.t = t


@dataclass(frozen=True)
class StepRecord:
    """One input/output pair at step ``t``; empty input means none was given."""

    t: int
    input: str
    output: str
    labels: TruthAssignment | None = None


@dataclass(frozen=True)
class Trace:
    steps: tuple[StepRecord, ...]
    metadata: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for i, step in enumerate(self.steps):
            if step.t != i + 1:
                raise TraceError(
                    f"step indices must be contiguous from 1; found t={step.t} at position {i + 1}"
                )

    def __len__(self) -> int:
        return len(self.steps)


@runtime_checkable
class LabelingFunction(Protocol):
    """Maps the history up to and including the current step to the set of
    propositions that hold there.  Must be deterministic for identical
    histories and emit only propositions from ``vocabulary``."""

    vocabulary: frozenset[str]

    def __call__(self, steps: Sequence[StepRecord]) -> TruthAssignment: ...


@dataclass(frozen=True)
class WitnessEntry:
    """One residual-changing step: what was seen and what remains required."""

    t: int
    input: str
    output: str
    labels: TruthAssignment
    residual: Formula


@dataclass(frozen=True)
class WitnessEpisode:
    """The recorded steps that led to one terminal verdict."""

    verdict: Verdict
    entries: tuple[WitnessEntry, ...]


@dataclass(frozen=True)
class VerdictReport:
    constraint_id: str
    verdicts: tuple[Verdict, ...]
    violations: int
    satisfactions: int
    witnesses: tuple[WitnessEpisode, ...] = ()


def step_to_dict(step: StepRecord) -> dict:
    out: dict = {"t": step.t, "input": step.input, "output": step.output}
    if step.labels is not None:
        out["labels"] = sorted(step.labels)
    return out


def step_from_dict(obj: dict, line_no: int) -> StepRecord:
    if not isinstance(obj, dict):
        raise TraceError(f"line {line_no}: step must be a JSON object")
    if "t" not in obj or not isinstance(obj["t"], int):
        raise TraceError(f"line {line_no}: missing or non-integer 't'")
    if "output" not in obj or not isinstance(obj["output"], str):
        raise TraceError(f"line {line_no}: missing or non-string 'output'")
    labels = obj.get("labels")
    if labels is not None:
        if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
            raise TraceError(f"line {line_no}: 'labels' must be an array of strings")
        labels = frozenset(labels)
    return StepRecord(
        t=obj["t"],
        input=obj.get("input", "") or "",
        output=obj["output"],
        labels=labels,
    )


def load_trace(path: str | Path) -> Trace:
    """Load a JSONL trace, validating step-index contiguity."""
    path = Path(path)
    steps: list[StepRecord] = []
    metadata: dict = {}
    with path.open(encoding="utf-8") as fh:
        lines = [line for line in fh]
    content_lines = [(i + 1, line) for i, line in enumerate(lines) if line.strip()]
    if not content_lines:
        raise TraceError(f"{path}: empty trace file")
    start = 0
    first_no, first_line = content_lines[0]
    try:
        first_obj = json.loads(first_line)
    except json.JSONDecodeError as err:
        raise TraceError(f"line {first_no}: malformed JSON: {err.msg}") from err
    if isinstance(first_obj, dict) and "meta" in first_obj and "t" not in first_obj:
        metadata = first_obj["meta"]
        start = 1
    expected_t = 1
    for line_no, line in content_lines[start:]:
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as err:
            raise TraceError(f"line {line_no}: malformed JSON: {err.msg}") from err
        step = step_from_dict(obj, line_no)
        if step.t != expected_t:
            raise TraceError(f"non-contiguous step index at line {line_no}")
        steps.append(step)
        expected_t += 1
    if not steps:
        raise TraceError(f"{path}: trace has no steps")
    return Trace(tuple(steps), metadata)


def save_trace(trace: Trace, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        if trace.metadata:
            fh.write(json.dumps({"meta": dict(trace.metadata)}, ensure_ascii=False) + "\n")
        for step in trace.steps:
            fh.write(json.dumps(step_to_dict(step), ensure_ascii=False) + "\n")


def apply_labeler(trace: Trace, labeler: LabelingFunction, overwrite: bool = False) -> Trace:
    """Return a copy of ``trace`` with labels populated at every step.

    Existing labels are preserved unless ``overwrite`` is set; the labeler
    always sees the history with its own (not the embedded) labels.
    """
    new_steps: list[StepRecord] = []
    for step in trace.steps:
        if step.labels is not None and not overwrite:
            new_steps.append(step)
            continue
        history = new_steps + [replace(step, labels=None)]
        try:
            labels = labeler(history)
        except Exception as err:
            raise LabelingError(f"labeler failed: {err}", step.t) from err
        extra = labels - labeler.vocabulary
        if extra:
            raise LabelingError(
                f"undeclared proposition(s): {', '.join(sorted(extra))}", step.t
            )
        new_steps.append(replace(step, labels=labels))
    return Trace(tuple(new_steps), trace.metadata)


def witness_entry_to_dict(entry: WitnessEntry) -> dict:
    return {
        "t": entry.t,
        "input": entry.input,
        "output": entry.output,
        "labels": sorted(entry.labels),
        "residual": render(entry.residual, "ascii"),
    }


def report_to_dict(report: VerdictReport) -> dict:
    return {
        "constraint_id": report.constraint_id,
        "verdicts": [v.value for v in report.verdicts],
        "violations": report.violations,
        "satisfactions": report.satisfactions,
        "witnesses": [
            {
                "verdict": ep.verdict.value,
                "entries": [witness_entry_to_dict(e) for e in ep.entries],
            }
            for ep in report.witnesses
        ],
    }


def report_from_dict(obj: Mapping) -> VerdictReport:
    witnesses = []
    for ep in obj.get("witnesses", ()):
        entries = tuple(
            WitnessEntry(
                t=e["t"],
                input=e.get("input", ""),
                output=e.get("output", ""),
                labels=frozenset(e.get("labels", ())),
                residual=parse(e["residual"]),
            )
            for e in ep.get("entries", ())
        )
        witnesses.append(WitnessEpisode(Verdict(ep["verdict"]), entries))
    return VerdictReport(
        constraint_id=obj["constraint_id"],
        verdicts=tuple(Verdict(v) for v in obj["verdicts"]),
        violations=obj["violations"],
        satisfactions=obj["satisfactions"],
        witnesses=tuple(witnesses),
    )


def save_reports(reports: Iterable[VerdictReport], path: str | Path, extra: Mapping | None = None) -> None:
    """Write reports as a single JSON document."""
    doc: dict = {"reports": [report_to_dict(r) for r in reports]}
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


def load_reports(path: str | Path) -> list[VerdictReport]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return [report_from_dict(obj) for obj in doc["reports"]]
