"""The monitor-analyze-plan-execute loop over a shared knowledge base.

The loop owns a KnowledgeBase and folds trace events into it: every observed
situation change is ingested into the counts, the SCG belief is rebuilt from
the pre-deployment prior plus counts, and the current situation's model is
checked.  On violation a safe controller is synthesised by sinking critical
situations; entering an avoided situation triggers a crash stop.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .adapt import (
    AdaptationOutcome,
    Controller,
    SynthesisConfig,
    analyze,
    controller_from_outcome,
    synthesize_safe_controller,
)
from .dtmc import BoundedReachProperty
from .errors import SchemaError, TraceError
from .learn import EstimatorConfig, TransitionCounts, ingest, rebuild_scg
from .proplang import format_property, parse_property
from .scg import AugmentedScg, scg_from_dict, scg_to_dict, sink_situation

EVENT_KINDS = ("situation_entered", "failure_observed", "episode_reset")


@dataclass(frozen=True)
class TraceEvent:
    t: int
    kind: str
    id: str | None = None

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise TraceError(f"unknown event kind {self.kind!r}")
        if self.kind in ("situation_entered", "failure_observed") and not self.id:
            raise TraceError(f"{self.kind} event needs an id")

    def to_dict(self) -> dict:
        doc = {"t": self.t, "kind": self.kind}
        if self.id is not None:
            doc["id"] = self.id
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "TraceEvent":
        try:
            return cls(t=int(doc["t"]), kind=doc["kind"], id=doc.get("id"))
        except KeyError as exc:
            raise SchemaError(f"trace event missing {exc}") from exc


@dataclass(frozen=True)
class Directive:
    """Execution instruction handed to the managed system."""

    kind: str  # "continue" | "switch_controller" | "safe_stop"
    controller_id: str | None = None
    reason: str | None = None

    def to_dict(self) -> dict:
        doc = {"kind": self.kind}
        if self.controller_id is not None:
            doc["controller_id"] = self.controller_id
        if self.reason is not None:
            doc["reason"] = self.reason
        return doc


CONTINUE = Directive("continue")


def switch_controller(controller_id: str) -> Directive:
    return Directive("switch_controller", controller_id=controller_id)


def safe_stop(reason: str) -> Directive:
    return Directive("safe_stop", reason=reason)


@dataclass
class HistoryEntry:
    """One knowledge-base adaptation record (the initial controller included)."""

    t: int
    controller_id: str
    outcome: AdaptationOutcome | None = None  # None for the initial entry

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "controller_id": self.controller_id,
            "outcome": self.outcome.to_dict() if self.outcome else None,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "HistoryEntry":
        outcome = doc.get("outcome")
        return cls(
            t=int(doc["t"]),
            controller_id=doc["controller_id"],
            outcome=AdaptationOutcome.from_dict(outcome) if outcome else None,
        )


@dataclass
class KnowledgeBase:
    """Everything the loop shares between stages and across restarts."""

    prior_scg: AugmentedScg  # pre-deployment belief; estimation prior
    scg: AugmentedScg  # current belief, including sinks
    counts: TransitionCounts
    properties: list[BoundedReachProperty]
    controllers: list[Controller]
    history: list[HistoryEntry]
    estimator: EstimatorConfig
    synthesis: SynthesisConfig
    baseline: bool = False  # True: planning disabled (fixed controller)
    prev: str | None = None  # previous-situation cursor within the episode
    last_t: int = -1
    scg_version: int = 0

    @property
    def active_controller(self) -> Controller:
        return self.controllers[-1]


def new_knowledge_base(
    scg: AugmentedScg,
    properties: list[BoundedReachProperty],
    estimator: EstimatorConfig | None = None,
    synthesis: SynthesisConfig | None = None,
    baseline: bool = False,
) -> KnowledgeBase:
    initial = Controller(id="c0", scg=scg, avoided=tuple(sorted(scg.sunk)))
    return KnowledgeBase(
        prior_scg=scg,
        scg=scg,
        counts=TransitionCounts(failure_ids=frozenset(scg.failure_ids)),
        properties=list(properties),
        controllers=[initial],
        history=[HistoryEntry(t=0, controller_id="c0")],
        estimator=estimator or EstimatorConfig(),
        synthesis=synthesis or SynthesisConfig(),
        baseline=baseline,
    )


@dataclass
class RunLogEntry:
    t: int
    kind: str
    id: str | None
    directive: Directive
    compliant: bool | None = None  # current-situation verdict, when analysed
    outcome: AdaptationOutcome | None = None

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "kind": self.kind,
            "id": self.id,
            "directive": self.directive.to_dict(),
            "compliant": self.compliant,
            "outcome": self.outcome.to_dict() if self.outcome else None,
        }


def _rebuild_belief(kb: KnowledgeBase) -> None:
    belief = rebuild_scg(kb.prior_scg, kb.counts, kb.estimator)
    for sid in sorted(kb.active_controller.scg.sunk):
        belief = sink_situation(belief, sid)
    kb.scg = belief
    kb.scg_version += 1


def step(kb: KnowledgeBase, event: TraceEvent) -> tuple[KnowledgeBase, RunLogEntry]:
    """Fold one event into the knowledge base and emit a directive."""
    if event.t < kb.last_t:
        raise TraceError(f"out-of-order timestep {event.t} < {kb.last_t}")
    kb.last_t = event.t

    if event.kind == "episode_reset":
        kb.prev = None
        return kb, RunLogEntry(event.t, event.kind, None, CONTINUE)

    if event.kind == "failure_observed":
        if not kb.scg.is_failure(event.id):
            raise TraceError(f"unknown failure id {event.id!r}")
        if kb.prev is not None:
            ingest(kb.counts, kb.prev, event.id)
        kb.prev = None
        return kb, RunLogEntry(event.t, event.kind, event.id, CONTINUE)

    # situation_entered
    sid = event.id
    if not kb.scg.is_situation(sid):
        raise TraceError(f"unknown situation id {sid!r}")
    if kb.prev is not None:
        ingest(kb.counts, kb.prev, sid)
    _rebuild_belief(kb)

    if sid in kb.scg.sunk:
        kb.prev = None
        directive = safe_stop(f"entered avoided situation {sid}")
        return kb, RunLogEntry(event.t, event.kind, sid, directive)

    analysis = analyze(kb.scg, sid, kb.properties)
    if analysis.compliant or kb.baseline:
        kb.prev = sid
        return kb, RunLogEntry(
            event.t, event.kind, sid, CONTINUE, compliant=analysis.compliant
        )

    outcome = synthesize_safe_controller(kb.scg, kb.properties, kb.synthesis)
    if not outcome.success:
        kb.history.append(
            HistoryEntry(t=event.t, controller_id=kb.active_controller.id, outcome=outcome)
        )
        kb.prev = None
        directive = safe_stop(
            f"synthesis failed after sinking {outcome.avoided} "
            f"(max_removals={kb.synthesis.max_removals})"
        )
        return kb, RunLogEntry(
            event.t, event.kind, sid, directive, compliant=False, outcome=outcome
        )

    controller_id = f"c{len(kb.controllers)}"
    controller = controller_from_outcome(
        kb.scg, outcome, controller_id, prior_avoided=kb.active_controller.avoided
    )
    kb.controllers.append(controller)
    kb.history.append(
        HistoryEntry(t=event.t, controller_id=controller_id, outcome=outcome)
    )
    kb.scg = controller.scg
    if sid in controller.scg.sunk:
        kb.prev = None
        directive = safe_stop(f"current situation {sid} is now avoided")
    else:
        kb.prev = sid
        directive = switch_controller(controller_id)
    return kb, RunLogEntry(
        event.t, event.kind, sid, directive, compliant=False, outcome=outcome
    )


def run(kb: KnowledgeBase, events: list[TraceEvent]) -> list[RunLogEntry]:
    """Fold a whole trace; the log is deterministic given kb and trace."""
    log = []
    for event in events:
        _, entry = step(kb, event)
        log.append(entry)
    return log


# ---------------------------------------------------------------------------
# knowledge-base persistence


def snapshot(kb: KnowledgeBase) -> dict:
    return {
        "prior_scg": scg_to_dict(kb.prior_scg),
        "scg": scg_to_dict(kb.scg),
        "counts": kb.counts.to_dict(),
        "properties": [
            {"name": p.name, "expression": format_property(p)} for p in kb.properties
        ],
        "controllers": [
            {
                "id": c.id,
                "scg": scg_to_dict(c.scg),
                "avoided": list(c.avoided),
                "origin": c.origin,
            }
            for c in kb.controllers
        ],
        "history": [h.to_dict() for h in kb.history],
        "estimator": {
            "mode": kb.estimator.mode,
            "smoothing_alpha": kb.estimator.smoothing_alpha,
            "prior_strength_kappa": kb.estimator.prior_strength_kappa,
            "support_policy": kb.estimator.support_policy,
        },
        "synthesis": {
            "max_removals": kb.synthesis.max_removals,
            "rng_seed": kb.synthesis.rng_seed,
            "out_of_odd_horizon": kb.synthesis.out_of_odd_horizon,
        },
        "baseline": kb.baseline,
        "prev": kb.prev,
        "last_t": kb.last_t,
        "scg_version": kb.scg_version,
    }


def load(doc: dict) -> KnowledgeBase:
    required = (
        "prior_scg",
        "scg",
        "counts",
        "properties",
        "controllers",
        "history",
        "estimator",
        "synthesis",
    )
    missing = [k for k in required if k not in doc]
    if missing:
        raise SchemaError("knowledge-base snapshot incomplete", [f"$.{k}" for k in missing])
    try:
        properties = [
            parse_property(p["name"], p["expression"]) for p in doc["properties"]
        ]
        controllers = [
            Controller(
                id=c["id"],
                scg=scg_from_dict(c["scg"]),
                avoided=tuple(c["avoided"]),
                origin=c["origin"],
            )
            for c in doc["controllers"]
        ]
        est = doc["estimator"]
        syn = doc["synthesis"]
        return KnowledgeBase(
            prior_scg=scg_from_dict(doc["prior_scg"]),
            scg=scg_from_dict(doc["scg"]),
            counts=TransitionCounts.from_dict(doc["counts"]),
            properties=properties,
            controllers=controllers,
            history=[HistoryEntry.from_dict(h) for h in doc["history"]],
            estimator=EstimatorConfig(
                mode=est["mode"],
                smoothing_alpha=float(est["smoothing_alpha"]),
                prior_strength_kappa=float(est["prior_strength_kappa"]),
                support_policy=est["support_policy"],
            ),
            synthesis=SynthesisConfig(
                max_removals=int(syn["max_removals"]),
                rng_seed=int(syn["rng_seed"]),
                out_of_odd_horizon=syn.get("out_of_odd_horizon"),
            ),
            baseline=bool(doc.get("baseline", False)),
            prev=doc.get("prev"),
            last_t=int(doc.get("last_t", -1)),
            scg_version=int(doc.get("scg_version", 0)),
        )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed knowledge-base snapshot: {exc}") from exc


def save_snapshot(kb: KnowledgeBase, path) -> None:
    with open(path, "w") as fh:
        json.dump(snapshot(kb), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_snapshot(path) -> KnowledgeBase:
    with open(path) as fh:
        return load(json.load(fh))


def read_trace(path) -> list[TraceEvent]:
    """Read a JSON-lines trace file."""
    events = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                events.append(TraceEvent.from_dict(json.loads(line)))
    return events


def write_trace(events: list[TraceEvent], path) -> None:
    with open(path, "w") as fh:
        for event in events:
            fh.write(json.dumps(event.to_dict()) + "\n")
