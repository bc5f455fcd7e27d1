"""Monitor stepping, reset behavior, auditing, witnesses, and F1 scoring."""

import itertools
import random

import pytest

from ltlguard.ltl import (
    FALSE,
    TRUE,
    Verdict,
    evaluate_lasso,
    parse,
    progress,
    simplify,
)
from ltlguard.monitor import (
    audit_log,
    new_state,
    run_monitor,
    score_f1,
    step,
)
from ltlguard.trace import StepRecord, Trace, TraceError, VerdictReport

I, S, V = Verdict.INCONCLUSIVE, Verdict.SATISFIED, Verdict.VIOLATED


def labeled_trace(label_sets, outputs=None):
    steps = []
    for i, labels in enumerate(label_sets, 1):
        output = outputs[i - 1] if outputs else f"step-{i}"
        steps.append(StepRecord(i, "", output, frozenset(labels)))
    return Trace(tuple(steps))


def drive(state, label_sets):
    verdicts = []
    for i, labels in enumerate(label_sets, 1):
        state, verdict = step(state, frozenset(labels), StepRecord(i, "", f"o{i}", frozenset(labels)))
        verdicts.append(verdict)
    return state, verdicts


class TestStep:
    def test_eventually_satisfied(self):
        state = new_state("c", parse("F putdown"))
        state, verdicts = drive(state, [{"putdown"}])
        assert verdicts == [S]
        assert state.witness[-1].residual == TRUE

    def test_always_violated(self):
        state = new_state("c", parse("G p"))
        state, verdicts = drive(state, [set()])
        assert verdicts == [V]
        assert state.witness[-1].residual == FALSE

    def test_plain_mode_absorbs(self):
        state = new_state("c", parse("G p"))
        state, verdicts = drive(state, [set(), {"p"}, set()])
        assert verdicts == [V, V, V]
        assert state.residual == FALSE
        assert len(state.episodes) == 1

    def test_reset_mode_restores_objective(self):
        state = new_state("c", parse("G p"), reset_mode=True)
        state, verdicts = drive(state, [set(), {"p"}])
        assert verdicts == [V, I]
        assert state.violations == 1
        assert state.residual == parse("G p")
        assert state.witness == ()

    def test_reset_mode_counts_episodes(self):
        state = new_state("c", parse("F p"), reset_mode=True)
        state, verdicts = drive(state, [{"p"}, set(), {"p"}])
        assert verdicts == [S, I, S]
        assert state.satisfactions == 2
        assert len(state.episodes) == 2

    def test_witness_appended_only_on_residual_change(self):
        state = new_state("c", parse("F p"))
        state, _ = drive(state, [set(), set(), {"p"}])
        # Residual never changes while p is absent; one entry at satisfaction.
        assert [e.t for e in state.witness] == [3]

    def test_witness_records_step_context(self):
        state = new_state("c", parse("F p"))
        record = StepRecord(1, "ask", "answer p", frozenset({"p"}))
        state, _ = step(state, frozenset({"p"}), record)
        entry = state.witness[0]
        assert (entry.t, entry.input, entry.output) == (1, "ask", "answer p")
        assert entry.labels == frozenset({"p"})


class TestRunMonitor:
    def test_report_shapes(self):
        trace = labeled_trace([set()] * 5)
        reports = run_monitor(trace, {"a": parse("F p"), "b": parse("G q")})
        assert len(reports) == 2
        assert all(len(r.verdicts) == 5 for r in reports)
        assert [r.constraint_id for r in reports] == ["a", "b"]

    def test_trivially_true_constraint_in_reset_mode(self):
        trace = labeled_trace([set()] * 3)
        (report,) = run_monitor(trace, {"c": TRUE}, mode="reset")
        assert report.verdicts == (S, S, S)
        assert report.satisfactions == 3

    def test_trigger_then_fulfillment_timing(self):
        # A at step 2, B at step 7: inconclusive through 6, satisfied at 7.
        labels = [set(), {"A"}, set(), set(), set(), set(), {"B"}]
        trace = labeled_trace(labels)
        (report,) = run_monitor(trace, {"c": parse("F(A & X F B)")})
        assert report.verdicts == (I, I, I, I, I, I, S)

    def test_cross_checked_against_lasso_oracle(self):
        # The same scenario, checked semantically: the prefix extended by an
        # empty-step loop satisfies the formula only once B has occurred.
        phi = parse("F(A & X F B)")
        labels = [frozenset(), frozenset({"A"}), frozenset(), frozenset({"B"})]
        assert evaluate_lasso(phi, labels, [frozenset()]) is True
        assert evaluate_lasso(phi, labels[:3], [frozenset()]) is False

    def test_missing_labels_rejected(self):
        trace = Trace((StepRecord(1, "", "x"),))
        with pytest.raises(TraceError, match="missing labels"):
            run_monitor(trace, {"c": TRUE})

    def test_empty_trace_rejected(self):
        with pytest.raises(TraceError, match="empty"):
            run_monitor(Trace(()), {"c": TRUE})

    def test_unknown_mode(self):
        with pytest.raises(ValueError, match="mode"):
            run_monitor(labeled_trace([set()]), {"c": TRUE}, mode="weird")

    def test_independence_of_constraints(self):
        rng = random.Random(3)
        labels = [
            {p for p in ("p", "q") if rng.random() < 0.5} for _ in range(12)
        ]
        trace = labeled_trace(labels)
        both = run_monitor(trace, {"x": parse("F p"), "y": parse("G q")}, mode="reset")
        solo_x = run_monitor(trace, {"x": parse("F p")}, mode="reset")
        solo_y = run_monitor(trace, {"y": parse("G q")}, mode="reset")
        assert both[0] == solo_x[0]
        assert both[1] == solo_y[0]

    def test_plain_mode_verdicts_are_absorbing_pattern(self):
        rng = random.Random(9)
        for _ in range(50):
            labels = [{p for p in ("p", "q") if rng.random() < 0.4} for _ in range(10)]
            trace = labeled_trace(labels)
            for report in run_monitor(trace, {"c": parse("p U q"), "d": parse("G p")}):
                seq = list(report.verdicts)
                terminal = [v for v in seq if v is not I]
                if terminal:
                    first = seq.index(terminal[0])
                    assert all(v is I for v in seq[:first])
                    assert all(v is terminal[0] for v in seq[first:])

    def test_witness_replay_reproduces_terminal_residual(self):
        rng = random.Random(21)
        for _ in range(60):
            labels = [{p for p in ("p", "q") if rng.random() < 0.4} for _ in range(8)]
            trace = labeled_trace(labels)
            reports = run_monitor(trace, {"c": parse("G(p -> F q)"), "d": parse("p U q")})
            for report, phi in zip(reports, (parse("G(p -> F q)"), parse("p U q"))):
                for episode in report.witnesses:
                    residual = simplify(phi)
                    for entry in episode.entries:
                        residual = simplify(progress(residual, entry.labels))
                    expected = FALSE if episode.verdict is V else TRUE
                    assert residual == expected


class TestAuditLog:
    def test_matches_run_monitor(self):
        rng = random.Random(4)
        labels = [{p for p in ("p", "q") if rng.random() < 0.5} for _ in range(20)]
        trace = labeled_trace(labels)
        constraints = {"c": parse("F(p & X F q)"), "d": parse("G p")}
        assert audit_log(trace, constraints, mode="reset") == run_monitor(
            trace, constraints, mode="reset"
        )

    def test_cross_check_passes_on_random_trace(self):
        rng = random.Random(8)
        labels = [{p for p in ("p", "q") if rng.random() < 0.5} for _ in range(20)]
        trace = labeled_trace(labels)
        constraints = {"c": parse("p U q"), "d": parse("G(p -> F q)")}
        for mode in ("plain", "reset"):
            audit_log(trace, constraints, mode=mode, cross_check=True)

    def test_empty_constraint_set(self):
        assert audit_log(labeled_trace([set()]), {}) == []


class TestScoreF1:
    def make_report(self, cid, verdicts):
        return VerdictReport(
            constraint_id=cid,
            verdicts=tuple(verdicts),
            violations=sum(v is V for v in verdicts),
            satisfactions=sum(v is S for v in verdicts),
        )

    def test_identical_reports_score_one(self):
        reports = [self.make_report("c", [I, V, I, S])]
        result = score_f1(reports, reports)
        assert result.pooled.f1 == 1.0
        assert result.per_constraint["c"].f1 == 1.0

    def test_half_precision_full_recall(self):
        truth = [self.make_report("c", [I, V, I, I])]
        predicted = [self.make_report("c", [V, V, I, I])]
        result = score_f1(predicted, truth)
        assert result.pooled.precision == 0.5
        assert result.pooled.recall == 1.0
        assert result.pooled.f1 == pytest.approx(2 / 3, abs=1e-12)

    def test_no_predictions_scores_zero(self):
        truth = [self.make_report("c", [V, I])]
        predicted = [self.make_report("c", [I, I])]
        assert score_f1(predicted, truth).pooled.f1 == 0.0

    def test_kind_must_match(self):
        truth = [self.make_report("c", [V])]
        predicted = [self.make_report("c", [S])]
        result = score_f1(predicted, truth)
        assert result.pooled.tp == 0

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError, match="length"):
            score_f1(
                [self.make_report("c", [I])],
                [self.make_report("c", [I, I])],
            )
        with pytest.raises(ValueError, match="constraint ids"):
            score_f1(
                [self.make_report("c", [I])],
                [self.make_report("d", [I])],
            )

    def test_pooled_spans_constraints(self):
        truth = [self.make_report("a", [V, I]), self.make_report("b", [I, S])]
        predicted = [self.make_report("a", [V, I]), self.make_report("b", [I, I])]
        result = score_f1(predicted, truth)
        assert result.per_constraint["a"].f1 == 1.0
        assert result.per_constraint["b"].f1 == 0.0
        assert result.pooled.tp == 1 and result.pooled.fn == 1


class TestSoundnessExhaustiveSmall:
    """Terminal verdicts agree with the semantic oracle on every extension
    (scaled-down here; the full exhaustive sweep runs in the acceptance suite)."""

    def test_until_formula_small(self):
        props = ("p", "q")
        assignments = [
            frozenset(c) for r in range(3) for c in itertools.combinations(props, r)
        ]
        phi = parse("p U q")
        for n in (1, 2):
            for prefix in itertools.product(assignments, repeat=n):
                residual = simplify(phi)
                for sigma in prefix:
                    residual = simplify(progress(residual, sigma))
                if residual not in (TRUE, FALSE):
                    continue
                expected = residual == TRUE
                for loop_len in (1, 2):
                    for loop in itertools.product(assignments, repeat=loop_len):
                        assert (
                            evaluate_lasso(phi, list(prefix), list(loop)) is expected
                        )
