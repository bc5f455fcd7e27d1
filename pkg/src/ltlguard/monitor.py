"""Incremental constraint monitoring over labeled traces.

Each constraint is progressed independently, one step per labeled
input/output pair.  In plain mode a terminal verdict absorbs: the
residual is pinned at ``true``/``false`` and every later step repeats
the verdict.  In reset mode the residual returns to the original
objective after each terminal verdict so further episodes can be
counted; the closed witness is archived before it is cleared.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, replace

from .ltl import Formula, TruthAssignment, Verdict, progress, props_of, simplify, verdict_of
from .trace import (
    StepRecord,
    Trace,
    TraceError,
    VerdictReport,
    WitnessEntry,
    WitnessEpisode,
)


class CrossCheckError(AssertionError):
    """Incremental monitoring disagreed with from-scratch prefix replay."""


class ProgressionCache:
    """Memo for simplify-after-progress steps.

    Progression only reads the labels that occur in the formula, so steps
    are keyed by (residual, labels restricted to its propositions); on
    long traces most steps repeat a key.  Results that equal the input
    formula are canonicalized to the same object, keeping lookups O(1).
    """

    __slots__ = ("_steps", "_props")

    def __init__(self):
        self._steps: dict[tuple[Formula, frozenset[str]], Formula] = {}
        self._props: dict[Formula, frozenset[str]] = {}

    def progress_simplify(self, phi: Formula, labels: TruthAssignment) -> Formula:
        props = self._props.get(phi)
        if props is None:
            props = props_of(phi)
            self._props[phi] = props
        key = (phi, labels & props)
        result = self._steps.get(key)
        if result is None:
            result = simplify(progress(phi, labels))
            if result == phi:
                result = phi
            self._steps[key] = result
        return result


@dataclass(frozen=True)
class MonitorState:
    """Progression state of one constraint within one monitored session."""

    constraint_id: str
    objective: Formula  # held in simplified form; reset target
    residual: Formula
    reset_mode: bool = False
    witness: tuple[WitnessEntry, ...] = ()
    episodes: tuple[WitnessEpisode, ...] = ()
    violations: int = 0
    satisfactions: int = 0
    last_verdict: Verdict = Verdict.INCONCLUSIVE


def new_state(constraint_id: str, objective: Formula, reset_mode: bool = False) -> MonitorState:
    simplified = simplify(objective)
    return MonitorState(
        constraint_id=constraint_id,
        objective=simplified,
        residual=simplified,
        reset_mode=reset_mode,
    )


def step(
    state: MonitorState,
    labels: TruthAssignment,
    record: StepRecord,
    cache: ProgressionCache | None = None,
) -> tuple[MonitorState, Verdict]:
    """Progress one step; returns the successor state and its verdict."""
    if cache is not None:
        residual = cache.progress_simplify(state.residual, labels)
    else:
        residual = simplify(progress(state.residual, labels))
    changed = residual != state.residual
    witness = state.witness
    if changed:
        witness = witness + (
            WitnessEntry(record.t, record.input, record.output, labels, residual),
        )
    verdict = verdict_of(residual)
    if not verdict.is_terminal():
        return (
            replace(state, residual=residual, witness=witness, last_verdict=verdict),
            verdict,
        )
    episodes = state.episodes
    if changed:
        episodes = episodes + (WitnessEpisode(verdict, witness),)
    violations = state.violations + (verdict is Verdict.VIOLATED)
    satisfactions = state.satisfactions + (verdict is Verdict.SATISFIED)
    if state.reset_mode:
        return (
            replace(
                state,
                residual=state.objective,
                witness=(),
                episodes=episodes,
                violations=violations,
                satisfactions=satisfactions,
                last_verdict=verdict,
            ),
            verdict,
        )
    return (
        replace(
            state,
            residual=residual,
            witness=witness,
            episodes=episodes,
            violations=violations,
            satisfactions=satisfactions,
            last_verdict=verdict,
        ),
        verdict,
    )


def _require_labels(trace: Trace) -> None:
    if not trace.steps:
        raise TraceError("cannot monitor an empty trace")
    for record in trace.steps:
        if record.labels is None:
            raise TraceError(f"missing labels at step {record.t}")


def run_monitor(
    trace: Trace, constraints: Mapping[str, Formula], mode: str = "plain"
) -> list[VerdictReport]:
    """Monitor every constraint independently over a fully labeled trace."""
    if mode not in ("plain", "reset"):
        raise ValueError(f"unknown mode {mode!r}")
    _require_labels(trace)
    cache = ProgressionCache()
    reports = []
    for cid in sorted(constraints):
        state = new_state(cid, constraints[cid], reset_mode=(mode == "reset"))
        verdicts = []
        for record in trace.steps:
            state, verdict = step(state, record.labels, record, cache)
            verdicts.append(verdict)
        reports.append(
            VerdictReport(
                constraint_id=cid,
                verdicts=tuple(verdicts),
                violations=state.violations,
                satisfactions=state.satisfactions,
                witnesses=state.episodes,
            )
        )
    return reports


def audit_log(
    trace: Trace,
    constraints: Mapping[str, Formula],
    mode: str = "plain",
    cross_check: bool = False,
) -> list[VerdictReport]:
    """Audit a recorded trace; identical output to ``run_monitor``.

    With ``cross_check`` every prefix is additionally recomputed from
    scratch and the final verdict compared against the incremental one.
    """
    reports = run_monitor(trace, constraints, mode)
    if cross_check:
        for j in range(1, len(trace.steps) + 1):
            prefix = Trace(trace.steps[:j], trace.metadata)
            fresh = run_monitor(prefix, constraints, mode)
            for incremental, recomputed in zip(reports, fresh):
                if incremental.verdicts[j - 1] is not recomputed.verdicts[-1]:
                    raise CrossCheckError(
                        f"constraint {incremental.constraint_id}: prefix of length {j} "
                        f"recomputed as {recomputed.verdicts[-1].value}, incremental "
                        f"said {incremental.verdicts[j - 1].value}"
                    )
    return reports


@dataclass(frozen=True)
class F1Stats:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class F1Result:
    per_constraint: Mapping[str, F1Stats]
    pooled: F1Stats


def _events(report: VerdictReport) -> set[tuple[int, str, Verdict]]:
    return {
        (t + 1, report.constraint_id, v)
        for t, v in enumerate(report.verdicts)
        if v.is_terminal()
    }


def _stats(predicted: set, truth: set) -> F1Stats:
    tp = len(predicted & truth)
    fp = len(predicted - truth)
    fn = len(truth - predicted)
    if tp + fp + fn == 0:
        return F1Stats(0, 0, 0, 1.0, 1.0, 1.0)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return F1Stats(tp, fp, fn, precision, recall, f1)


def score_f1(
    predicted: Sequence[VerdictReport], truth: Sequence[VerdictReport]
) -> F1Result:
    """Precision/recall/F1 of detected terminal events against ground truth.

    An event is (step, constraint, terminal verdict kind); a true positive
    requires all three to match.
    """
    pred_by_id = {r.constraint_id: r for r in predicted}
    truth_by_id = {r.constraint_id: r for r in truth}
    if set(pred_by_id) != set(truth_by_id):
        raise ValueError("mismatched constraint ids between predicted and truth reports")
    per_constraint: dict[str, F1Stats] = {}
    pooled_pred: set = set()
    pooled_truth: set = set()
    for cid in sorted(pred_by_id):
        p_report, t_report = pred_by_id[cid], truth_by_id[cid]
        if len(p_report.verdicts) != len(t_report.verdicts):
            raise ValueError(f"constraint {cid}: mismatched verdict sequence lengths")
        p_events, t_events = _events(p_report), _events(t_report)
        per_constraint[cid] = _stats(p_events, t_events)
        pooled_pred |= p_events
        pooled_truth |= t_events
    return F1Result(per_constraint, _stats(pooled_pred, pooled_truth))
