import pytest

from oddsafe.dtmc import BoundedReachProperty
from oddsafe.errors import SchemaError, TraceError
from oddsafe.learn import EstimatorConfig
from oddsafe.adapt import SynthesisConfig
from oddsafe.runtime import (
    KnowledgeBase,
    TraceEvent,
    load,
    load_snapshot,
    new_knowledge_base,
    read_trace,
    run,
    save_snapshot,
    snapshot,
    step,
    write_trace,
)
from oddsafe.scg import sink_situation

from helpers import make_scg

PROP = BoundedReachProperty("phi", "f1", 50, "<", 0.5)
EXACT = EstimatorConfig(mode="frequentist", smoothing_alpha=0.0)


def _belief(violating: bool):
    if violating:
        # s0 is a trap feeding f1 and s1 leaks into it
        delta = {
            "s0": {"f1": 0.9, "s0": 0.1},
            "s1": {"s0": 0.5, "s1": 0.5},
            "s2": {"s2": 0.99, "f1": 0.01},
        }
    else:
        delta = {
            "s0": {"s0": 0.99, "f1": 0.01},
            "s1": {"s1": 1.0},
            "s2": {"s2": 1.0},
        }
    return make_scg(delta, 3)


def _kb(violating: bool, baseline: bool = False) -> KnowledgeBase:
    return new_knowledge_base(
        _belief(violating), [PROP], estimator=EXACT, baseline=baseline
    )


def test_trace_event_validation():
    with pytest.raises(TraceError):
        TraceEvent(t=0, kind="teleported")
    with pytest.raises(TraceError):
        TraceEvent(t=0, kind="situation_entered")
    TraceEvent(t=0, kind="episode_reset")


def test_step_rejects_out_of_order_events():
    kb = _kb(violating=False)
    step(kb, TraceEvent(t=5, kind="situation_entered", id="s1"))
    with pytest.raises(TraceError):
        step(kb, TraceEvent(t=4, kind="situation_entered", id="s1"))


def test_step_rejects_unknown_ids():
    kb = _kb(violating=False)
    with pytest.raises(TraceError):
        step(kb, TraceEvent(t=0, kind="situation_entered", id="s9"))
    with pytest.raises(TraceError):
        step(kb, TraceEvent(t=0, kind="failure_observed", id="f9"))


def test_compliant_situation_continues():
    kb = _kb(violating=False)
    _, entry = step(kb, TraceEvent(t=0, kind="situation_entered", id="s1"))
    assert entry.directive.kind == "continue"
    assert entry.compliant is True
    assert kb.prev == "s1"


def test_failure_is_ingested_and_resets_cursor():
    kb = _kb(violating=False)
    step(kb, TraceEvent(t=0, kind="situation_entered", id="s1"))
    _, entry = step(kb, TraceEvent(t=1, kind="failure_observed", id="f1"))
    assert entry.directive.kind == "continue"
    assert kb.counts.row("s1") == {"f1": 1}
    assert kb.prev is None


def test_episode_reset_clears_cursor_without_counting():
    kb = _kb(violating=False)
    step(kb, TraceEvent(t=0, kind="situation_entered", id="s1"))
    step(kb, TraceEvent(t=1, kind="episode_reset"))
    assert kb.prev is None
    step(kb, TraceEvent(t=2, kind="situation_entered", id="s2"))
    assert kb.counts.total("s1") == 0


def test_violation_triggers_controller_switch():
    kb = _kb(violating=True)
    _, entry = step(kb, TraceEvent(t=0, kind="situation_entered", id="s1"))
    assert entry.directive.kind == "switch_controller"
    assert entry.directive.controller_id == "c1"
    assert entry.outcome.success and entry.outcome.avoided == ["s0"]
    assert kb.active_controller.id == "c1"
    assert kb.active_controller.avoided == ("s0",)
    assert len(kb.history) == 2
    assert kb.prev == "s1"
    # the adapted belief must actually be compliant now
    _, again = step(kb, TraceEvent(t=1, kind="situation_entered", id="s1"))
    assert again.directive.kind == "continue"
    assert again.compliant is True


def test_violation_in_sunk_target_safe_stops():
    kb = _kb(violating=True)
    _, entry = step(kb, TraceEvent(t=0, kind="situation_entered", id="s0"))
    assert entry.directive.kind == "safe_stop"
    assert entry.outcome.success
    assert kb.prev is None


def test_entering_avoided_situation_safe_stops():
    scg = sink_situation(_belief(violating=False), "s2")
    kb = new_knowledge_base(scg, [PROP], estimator=EXACT)
    _, entry = step(kb, TraceEvent(t=0, kind="situation_entered", id="s2"))
    assert entry.directive.kind == "safe_stop"
    assert "s2" in entry.directive.reason


def test_baseline_never_adapts():
    kb = _kb(violating=True, baseline=True)
    _, entry = step(kb, TraceEvent(t=0, kind="situation_entered", id="s1"))
    assert entry.directive.kind == "continue"
    assert entry.compliant is False
    assert len(kb.controllers) == 1


def test_synthesis_failure_safe_stops():
    kb = new_knowledge_base(
        _belief(violating=True),
        [PROP],
        estimator=EXACT,
        synthesis=SynthesisConfig(max_removals=0),
    )
    _, entry = step(kb, TraceEvent(t=0, kind="situation_entered", id="s1"))
    assert entry.directive.kind == "safe_stop"
    assert entry.outcome is not None and not entry.outcome.success
    assert kb.history[-1].outcome is entry.outcome


def test_snapshot_round_trip_preserves_everything():
    kb = _kb(violating=True)
    run(
        kb,
        [
            TraceEvent(t=0, kind="situation_entered", id="s1"),
            TraceEvent(t=1, kind="situation_entered", id="s2"),
            TraceEvent(t=2, kind="failure_observed", id="f1"),
        ],
    )
    doc = snapshot(kb)
    again = load(doc)
    assert snapshot(again) == doc
    assert again.active_controller.id == kb.active_controller.id
    assert again.prev == kb.prev
    assert again.last_t == kb.last_t


def test_snapshot_file_round_trip(tmp_path):
    kb = _kb(violating=False)
    step(kb, TraceEvent(t=0, kind="situation_entered", id="s1"))
    path = tmp_path / "kb.json"
    save_snapshot(kb, path)
    again = load_snapshot(path)
    assert snapshot(again) == snapshot(kb)


def test_load_reports_missing_sections():
    with pytest.raises(SchemaError) as exc:
        load({"scg": {}})
    assert "$.prior_scg" in exc.value.paths
    assert "$.counts" in exc.value.paths


def test_trace_file_round_trip(tmp_path):
    events = [
        TraceEvent(t=0, kind="situation_entered", id="s0"),
        TraceEvent(t=1, kind="failure_observed", id="f1"),
        TraceEvent(t=1, kind="episode_reset"),
    ]
    path = tmp_path / "trace.jsonl"
    write_trace(events, path)
    assert read_trace(path) == events


def test_run_log_is_reproducible():
    events = [
        TraceEvent(t=0, kind="situation_entered", id="s1"),
        TraceEvent(t=1, kind="situation_entered", id="s2"),
        TraceEvent(t=2, kind="failure_observed", id="f1"),
        TraceEvent(t=2, kind="episode_reset"),
    ]
    log_a = run(_kb(violating=True), list(events))
    log_b = run(_kb(violating=True), list(events))
    assert [e.to_dict() for e in log_a] == [e.to_dict() for e in log_b]
