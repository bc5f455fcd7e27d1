"""Guarded execution: predict violation risk, intervene, then monitor.

Each session step follows a fixed order: estimate per-constraint risk of
the upcoming continuation, obtain the model's output, intervene if any
risk reaches the threshold (resample the output, inject a compliance
reminder into the input and regenerate, or switch to a substitute
model), then label and monitor the final pair with reset-mode recovery.

All randomness is derived from the session seed, the step index, and a
purpose tag, so runs are reproducible and the baseline (strategy
``none``) is byte-identical to an unguarded run under the same seed.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from importlib import resources

from .ltl import Formula, Verdict, render
from .models import BlackBoxModel, SampleParams, derive_seed, steps_to_history
from .monitor import MonitorState, ProgressionCache, new_state, step
from .predictive import MonitoringPattern, RiskEstimate, estimate_risks, get_pattern
from .trace import LabelingFunction, StepRecord, Trace, VerdictReport

STRATEGIES = ("none", "resample", "inject", "switch")


class PolicyError(ValueError):
    """Invalid intervention policy or session configuration."""


def default_inject_template() -> str:
    return resources.files("ltlguard.templates").joinpath("inject_template.txt").read_text(
        encoding="utf-8"
    )


def default_switch_prompt() -> str:
    return resources.files("ltlguard.templates").joinpath("switch_prompt.txt").read_text(
        encoding="utf-8"
    )


@dataclass(frozen=True)
class InterventionPolicy:
    strategy: str = "none"
    tau: float = 0.5
    n: int = 5
    k: int = 3
    m: int = 5
    pattern: str = "contains_violated"
    inject_template: str | None = None

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise PolicyError(f"unknown strategy {self.strategy!r}; one of {STRATEGIES}")
        if not 0.0 <= self.tau <= 1.0:
            raise PolicyError(f"tau must be in [0, 1], got {self.tau}")
        if self.n < 1:
            raise PolicyError("n must be >= 1")
        if self.k < 1 or self.m < 1:
            raise PolicyError("k and m must be >= 1")


@dataclass(frozen=True)
class GuardedStepOutcome:
    t: int
    input: str
    final_input: str
    original_output: str
    final_output: str
    intervened: bool
    strategy: str
    verdicts: Mapping[str, Verdict]
    residuals: Mapping[str, str]
    trigger_risk: Mapping[str, float] | None = None
    risk_original: Mapping[str, float] | None = None
    risk_after: Mapping[str, float] | None = None
    contract_ok: bool | None = None
    k: int | None = None
    m: int | None = None

    def to_dict(self) -> dict:
        def risks(value):
            return dict(sorted(value.items())) if value is not None else None

        return {
            "t": self.t,
            "input": self.input,
            "final_input": self.final_input,
            "original_output": self.original_output,
            "final_output": self.final_output,
            "intervened": self.intervened,
            "strategy": self.strategy,
            "verdicts": {cid: v.value for cid, v in sorted(self.verdicts.items())},
            "residuals": dict(sorted(self.residuals.items())),
            "trigger_risk": risks(self.trigger_risk),
            "risk_original": risks(self.risk_original),
            "risk_after": risks(self.risk_after),
            "contract_ok": self.contract_ok,
            "k": self.k,
            "m": self.m,
        }


class GuardedSession:
    """One strictly sequential guarded run against a set of constraints."""

    def __init__(
        self,
        model: BlackBoxModel,
        labeler: LabelingFunction,
        constraints: Mapping[str, Formula],
        policy: InterventionPolicy,
        substitute: BlackBoxModel | None = None,
        seed: int = 0,
        rules_text: str | None = None,
        stop_token: str = "DONE",
        action_temperature: float = 0.2,
        sampling_temperature: float = 0.8,
        reset_mode: bool = True,
    ):
        if policy.strategy == "switch" and substitute is None:
            raise PolicyError("strategy 'switch' requires a substitute model")
        self.model = model
        self.labeler = labeler
        self.policy = policy
        self.pattern: MonitoringPattern = get_pattern(policy.pattern)
        self.substitute = substitute
        self.seed = seed
        self.stop_token = stop_token
        self.action_temperature = action_temperature
        self.sampling_temperature = sampling_temperature
        self.states: dict[str, MonitorState] = {
            cid: new_state(cid, constraints[cid], reset_mode=reset_mode)
            for cid in sorted(constraints)
        }
        self.rules_text = rules_text or "\n".join(
            f"- {render(self.states[cid].objective, 'english')}" for cid in sorted(constraints)
        )
        self.cache = ProgressionCache()
        self.steps: list[StepRecord] = []
        self.outcomes: list[GuardedStepOutcome] = []
        self.verdict_log: dict[str, list[Verdict]] = {cid: [] for cid in self.states}
        self.finished = False

    def constraint_ids(self) -> list[str]:
        return sorted(self.states)


def apply_inject(
    input: str, residuals: Sequence[tuple[str, Formula]], template: str
) -> str:
    """Suffix the input with the compliance reminder for at-risk residuals.

    Residuals are rendered in english, one line each, ordered by
    constraint id; with no residuals the input passes through unchanged.
    """
    if not residuals:
        return input
    ordered = sorted(residuals, key=lambda pair: pair[0])
    lines = "\n".join(render(phi, "english") for _, phi in ordered)
    reminder = template.replace("{constraints}", lines).rstrip("\n")
    if not input:
        return reminder
    return f"{input}\n{reminder}"


def apply_switch(session: GuardedSession, t: int) -> str:
    """Query the substitute model with past actions and the session rules."""
    memory = "\n".join(
        f"{record.t}. {record.output}" for record in session.steps
    ) or "(none)"
    prompt = (
        default_switch_prompt()
        .replace("{memory}", memory)
        .replace("{rules}", session.rules_text)
    )
    return session.substitute.next_output(
        [],
        prompt,
        SampleParams(
            temperature=session.action_temperature, seed=derive_seed(session.seed, t, "switch")
        ),
    )


def _rollout_violations(
    session: GuardedSession,
    input: str,
    output: str,
    t: int,
    horizon_seed: int,
) -> int:
    """Predicted violation count across constraints when committing
    (input, output) now and continuing for the remaining horizon."""
    policy = session.policy
    steps = list(session.steps)
    states = dict(session.states)
    violations = 0
    record = StepRecord(t=len(steps) + 1, input=input, output=output)
    labels = session.labeler([*steps, record])
    record = StepRecord(t=record.t, input=input, output=output, labels=labels)
    steps.append(record)
    for cid in session.constraint_ids():
        states[cid], verdict = step(states[cid], labels, record, session.cache)
        violations += verdict is Verdict.VIOLATED
    for offset in range(policy.k - 1):
        out = session.model.next_output(
            steps_to_history(steps),
            "",
            SampleParams(
                temperature=session.sampling_temperature,
                seed=derive_seed(horizon_seed, "roll", offset),
            ),
        )
        rec = StepRecord(t=len(steps) + 1, input="", output=out)
        labels = session.labeler([*steps, rec])
        rec = StepRecord(t=rec.t, input="", output=out, labels=labels)
        steps.append(rec)
        for cid in session.constraint_ids():
            states[cid], verdict = step(states[cid], labels, rec, session.cache)
            violations += verdict is Verdict.VIOLATED
    return violations


def apply_resample(session: GuardedSession, input: str, n: int, t: int) -> str:
    """Best-of-n output selection by fewest predicted violations.

    Draws up to n candidates at the sampling temperature, scores each by
    the predicted terminal-violation count over the horizon (candidate
    step included), and returns the argmin; ties break on the earliest
    sample index.
    """
    best_output: str | None = None
    best_score: int | None = None
    for j in range(n):
        candidate = session.model.next_output(
            steps_to_history(session.steps),
            input,
            SampleParams(
                temperature=session.sampling_temperature,
                seed=derive_seed(session.seed, t, "resample", j),
            ),
        )
        score = _rollout_violations(
            session, input, candidate, t, derive_seed(session.seed, t, "resample", j)
        )
        if best_score is None or score < best_score:
            best_output, best_score = candidate, score
    assert best_output is not None
    return best_output


def _post_pair_risks(
    session: GuardedSession, input: str, output: str, seed: int
) -> dict[str, float]:
    """Estimated pattern risk after committing (input, output), the pair's
    own verdict included as the first element of each sequence."""
    record = StepRecord(t=len(session.steps) + 1, input=input, output=output)
    labels = session.labeler([*session.steps, record])
    record = StepRecord(t=record.t, input=input, output=output, labels=labels)
    progressed: dict[str, MonitorState] = {}
    for cid in session.constraint_ids():
        progressed[cid], _ = step(session.states[cid], labels, record, session.cache)
    estimates = estimate_risks(
        progressed,
        session.model,
        session.labeler,
        session.pattern,
        session.policy.k,
        session.policy.m,
        "",
        [*session.steps, record],
        seed,
        session.sampling_temperature,
        session.cache,
    )
    return {cid: est.probability for cid, est in estimates.items()}


def guard_step(session: GuardedSession, next_input: str) -> GuardedStepOutcome | None:
    """Run one guarded step; returns None once the stop token is emitted.

    On any model or labeler failure the exception propagates and the
    session is left at its pre-step state.
    """
    if session.finished:
        raise RuntimeError("session already finished")
    policy = session.policy
    t = len(session.steps) + 1
    trigger: dict[str, RiskEstimate] | None = None
    if policy.strategy != "none":
        trigger = estimate_risks(
            session.states,
            session.model,
            session.labeler,
            session.pattern,
            policy.k,
            policy.m,
            next_input,
            session.steps,
            derive_seed(session.seed, t, "predict"),
            session.sampling_temperature,
            session.cache,
        )
    original_output = session.model.next_output(
        steps_to_history(session.steps),
        next_input,
        SampleParams(
            temperature=session.action_temperature, seed=derive_seed(session.seed, t, "action")
        ),
    )
    if original_output == session.stop_token:
        session.finished = True
        return None

    final_input, final_output = next_input, original_output
    intervened = False
    risk_original = risk_after = None
    contract_ok = None
    if trigger is not None and any(
        est.probability >= policy.tau for est in trigger.values()
    ):
        intervened = True
        if policy.strategy == "resample":
            final_output = apply_resample(session, next_input, policy.n, t)
        elif policy.strategy == "inject":
            at_risk = [
                (cid, session.states[cid].residual)
                for cid in session.constraint_ids()
                if trigger[cid].probability >= policy.tau
            ]
            template = policy.inject_template or default_inject_template()
            final_input = apply_inject(next_input, at_risk, template)
            final_output = session.model.next_output(
                steps_to_history(session.steps),
                final_input,
                SampleParams(
                    temperature=session.action_temperature,
                    seed=derive_seed(session.seed, t, "inject"),
                ),
            )
        elif policy.strategy == "switch":
            final_output = apply_switch(session, t)
        post_seed = derive_seed(session.seed, t, "post")
        risk_original = _post_pair_risks(session, next_input, original_output, post_seed)
        risk_after = _post_pair_risks(session, final_input, final_output, post_seed)
        contract_ok = all(
            risk_after[cid] <= risk_original[cid] for cid in session.constraint_ids()
        )

    record = StepRecord(t=t, input=final_input, output=final_output)
    labels = session.labeler([*session.steps, record])
    record = StepRecord(t=t, input=final_input, output=final_output, labels=labels)
    verdicts: dict[str, Verdict] = {}
    new_states: dict[str, MonitorState] = {}
    for cid in session.constraint_ids():
        new_states[cid], verdicts[cid] = step(session.states[cid], labels, record, session.cache)
    outcome = GuardedStepOutcome(
        t=t,
        input=next_input,
        final_input=final_input,
        original_output=original_output,
        final_output=final_output,
        intervened=intervened,
        strategy=policy.strategy,
        verdicts=verdicts,
        residuals={
            cid: render(new_states[cid].residual, "ascii") for cid in new_states
        },
        trigger_risk=(
            {cid: est.probability for cid, est in trigger.items()} if trigger else None
        ),
        risk_original=risk_original,
        risk_after=risk_after,
        contract_ok=contract_ok,
        k=policy.k if trigger is not None else None,
        m=policy.m if trigger is not None else None,
    )
    session.steps.append(record)
    session.states = new_states
    for cid, verdict in verdicts.items():
        session.verdict_log[cid].append(verdict)
    session.outcomes.append(outcome)
    return outcome


def run_guarded(
    session: GuardedSession, max_steps: int, initial_input: str = ""
) -> tuple[Trace, list[GuardedStepOutcome], list[VerdictReport]]:
    """Run the closed loop until ``max_steps`` or the model's stop token.

    Returns the realized trace, the per-step outcomes, and per-constraint
    verdict reports with episode counters.
    """
    for t in range(1, max_steps + 1):
        next_input = initial_input if t == 1 else ""
        if guard_step(session, next_input) is None:
            break
    trace = Trace(
        tuple(session.steps),
        metadata={
            "seed": session.seed,
            "strategy": session.policy.strategy,
            "tau": session.policy.tau,
        },
    )
    reports = [
        VerdictReport(
            constraint_id=cid,
            verdicts=tuple(session.verdict_log[cid]),
            violations=session.states[cid].violations,
            satisfactions=session.states[cid].satisfactions,
            witnesses=session.states[cid].episodes,
        )
        for cid in session.constraint_ids()
    ]
    return trace, list(session.outcomes), reports


def violation_rate(reports: Sequence[VerdictReport]) -> float:
    """Total violations across constraints divided by monitored steps."""
    steps = max((len(r.verdicts) for r in reports), default=0)
    if steps == 0:
        return 0.0
    return sum(r.violations for r in reports) / steps
