"""Sampling-based prediction of near-future verdict patterns.

The estimator draws independent continuations of the session from the
model, labels them, progresses copies of the monitor state along each,
and reports the fraction whose verdict sequence (current verdict first)
matches a monitoring pattern.  Sampled steps never touch the live state
or history.
"""

from __future__ import annotations

from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, replace

from .ltl import Verdict
from .models import BlackBoxModel, SampleParams, derive_seed, steps_to_history
from .monitor import MonitorState, ProgressionCache, step
from .trace import LabelingFunction, StepRecord


@dataclass(frozen=True)
class MonitoringPattern:
    """Named predicate over finite verdict sequences."""

    name: str
    matches: Callable[[Sequence[Verdict]], bool]


CONTAINS_VIOLATED = MonitoringPattern(
    "contains_violated", lambda seq: Verdict.VIOLATED in seq
)
CONTAINS_SATISFIED = MonitoringPattern(
    "contains_satisfied", lambda seq: Verdict.SATISFIED in seq
)
ENDS_VIOLATED = MonitoringPattern(
    "ends_violated", lambda seq: bool(seq) and seq[-1] is Verdict.VIOLATED
)

_REGISTRY: dict[str, MonitoringPattern] = {}


def register_pattern(pattern: MonitoringPattern) -> MonitoringPattern:
    _REGISTRY[pattern.name] = pattern
    return pattern


def get_pattern(name: str) -> MonitoringPattern:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(
            f"unknown monitoring pattern {name!r}; known: {sorted(_REGISTRY)}"
        ) from None


for _p in (CONTAINS_VIOLATED, CONTAINS_SATISFIED, ENDS_VIOLATED):
    register_pattern(_p)


@dataclass(frozen=True)
class RiskEstimate:
    constraint_id: str
    probability: float
    samples: int
    horizon: int
    verdict_sequences: tuple[tuple[Verdict, ...], ...]


def estimate_risks(
    states: Mapping[str, MonitorState],
    model: BlackBoxModel,
    labeler: LabelingFunction,
    pattern: MonitoringPattern,
    k: int,
    m: int,
    next_input: str,
    history: Sequence[StepRecord],
    seed: int,
    temperature: float = 0.8,
    cache: ProgressionCache | None = None,
    max_model_calls: int | None = None,
) -> dict[str, RiskEstimate]:
    """Estimate the pattern probability for every constraint at once.

    The m sampled continuations are shared across constraints; the first
    continuation step uses ``next_input`` and later steps carry no input.
    An estimate costs m*k model calls; a configured budget below that is
    rejected up front.
    """
    if k < 1 or m < 1:
        raise ValueError("horizon k and sample count m must be >= 1")
    if max_model_calls is not None and m * k > max_model_calls:
        raise ValueError(
            f"estimate needs m*k = {m * k} model calls, exceeding the budget of {max_model_calls}"
        )
    sequences: dict[str, list[tuple[Verdict, ...]]] = {cid: [] for cid in states}
    matches: dict[str, int] = {cid: 0 for cid in states}
    for j in range(m):
        sampled_steps = list(history)
        copies = dict(states)
        verdicts: dict[str, list[Verdict]] = {
            cid: [st.last_verdict] for cid, st in states.items()
        }
        for offset in range(k):
            inp = next_input if offset == 0 else ""
            out = model.next_output(
                steps_to_history(sampled_steps),
                inp,
                SampleParams(temperature=temperature, seed=derive_seed(seed, "sample", j)),
            )
            record = StepRecord(t=len(sampled_steps) + 1, input=inp, output=out)
            labels = labeler([*sampled_steps, record])
            record = replace(record, labels=labels)
            sampled_steps.append(record)
            for cid in copies:
                copies[cid], verdict = step(copies[cid], labels, record, cache)
                verdicts[cid].append(verdict)
        for cid in states:
            seq = tuple(verdicts[cid])
            sequences[cid].append(seq)
            matches[cid] += pattern.matches(seq)
    return {
        cid: RiskEstimate(
            constraint_id=cid,
            probability=matches[cid] / m,
            samples=m,
            horizon=k,
            verdict_sequences=tuple(sequences[cid]),
        )
        for cid in states
    }


def estimate_risk(
    state: MonitorState,
    model: BlackBoxModel,
    labeler: LabelingFunction,
    pattern: MonitoringPattern,
    k: int,
    m: int,
    next_input: str,
    history: Sequence[StepRecord] = (),
    seed: int = 0,
    temperature: float = 0.8,
    cache: ProgressionCache | None = None,
) -> RiskEstimate:
    """Single-constraint risk estimate; see ``estimate_risks``."""
    return estimate_risks(
        {state.constraint_id: state},
        model,
        labeler,
        pattern,
        k,
        m,
        next_input,
        history,
        seed,
        temperature,
        cache,
    )[state.constraint_id]
