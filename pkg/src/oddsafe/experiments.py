"""Seeded experiment drivers: drift-variant synthesis outcomes, the paired
baseline-vs-adaptive timeline, and the criticality-scoring benchmark."""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .adapt import SynthesisConfig, synthesize_safe_controller
from .dtmc import BoundedReachProperty, rank_situations
from .learn import EstimatorConfig
from .marsim import (
    MARITIME_FAILURES,
    GroundTruth,
    ScenarioConfig,
    TruthSampler,
    generate_scenario,
    inject_drift,
)
from .proplang import parse_property
from .runtime import (
    KnowledgeBase,
    RunLogEntry,
    TraceEvent,
    new_knowledge_base,
    step,
)
from .scg import AugmentedScg, enumerate_situations, sink_situation, OddAttribute


def default_properties() -> list[BoundedReachProperty]:
    return [
        parse_property("phi1", "P < 0.99 [ F<=50 f1 ]"),
        parse_property("phi2", "P < 0.95 [ F<=50 f2 ]"),
    ]


def drift_scg(scg: AugmentedScg, magnitude: float, seed: int) -> AugmentedScg:
    """Apply the truth-matrix drift perturbation directly to an SCG belief."""
    truth = GroundTruth(
        situations=tuple(scg.situation_ids),
        failures=tuple(scg.failure_ids),
        rows={s: dict(r) for s, r in scg.delta.items()},
    )
    drifted = inject_drift(truth, magnitude, seed)
    delta = {s: dict(r) for s, r in drifted.rows.items()}
    for sid in sorted(scg.sunk):
        delta[sid] = {sid: 1.0}
    return replace(scg, delta=delta)


# ---------------------------------------------------------------------------
# drift-variant synthesis experiment (effectiveness)


@dataclass(frozen=True)
class VariantConfig:
    seed: int = 0
    variants: int = 20
    drift_magnitude: float = 0.95
    max_removals: int = 4
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)


@dataclass
class ExperimentRecord:
    """One variant row: which properties broke and how adaptation fared."""

    id: int
    properties_violated: list[str]
    worst_criticality_score: float
    save_success: bool
    critical_situations_avoided: list[str]
    # in-memory only, for post-hoc re-checking
    drifted_scg: AugmentedScg | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "properties_violated": list(self.properties_violated),
            "worst_criticality_score": self.worst_criticality_score,
            "save_success": self.save_success,
            "critical_situations_avoided": list(self.critical_situations_avoided),
        }

    def to_csv_row(self) -> list[str]:
        return [
            str(self.id),
            "[" + ", ".join(self.properties_violated) + "]",
            f"{self.worst_criticality_score:.5f}",
            str(self.save_success),
            "[" + ", ".join(self.critical_situations_avoided) + "]",
        ]


CSV_HEADER = [
    "id",
    "properties_violated",
    "worst_criticality_score",
    "save_success",
    "critical_situations_avoided",
]


def run_variants(
    config: VariantConfig, properties: list[BoundedReachProperty] | None = None
) -> list[ExperimentRecord]:
    """Run the seeded drift variants and record each adaptation outcome."""
    properties = properties or default_properties()
    records = []
    for i in range(1, config.variants + 1):
        variant_seed = config.seed + 1000 * i
        scenario = replace(config.scenario, seed=variant_seed)
        _, belief = generate_scenario(scenario)
        drifted = drift_scg(belief, config.drift_magnitude, variant_seed + 1)
        report = rank_situations(drifted, properties)
        if report.all_compliant():
            records.append(
                ExperimentRecord(
                    id=i,
                    properties_violated=[],
                    worst_criticality_score=max(report.worst_scores.values()),
                    save_success=True,
                    critical_situations_avoided=[],
                    drifted_scg=drifted,
                )
            )
            continue
        outcome = synthesize_safe_controller(
            drifted,
            properties,
            SynthesisConfig(max_removals=config.max_removals, rng_seed=variant_seed),
        )
        records.append(
            ExperimentRecord(
                id=i,
                properties_violated=outcome.initial_violations,
                worst_criticality_score=outcome.worst_initial_score,
                save_success=outcome.success,
                critical_situations_avoided=list(outcome.avoided),
                drifted_scg=drifted,
            )
        )
    return records


def recheck_record(
    record: ExperimentRecord, properties: list[BoundedReachProperty] | None = None
) -> bool:
    """Re-verify a successful variant: its avoided set must silence everything."""
    properties = properties or default_properties()
    scg = record.drifted_scg
    for sid in record.critical_situations_avoided:
        scg = sink_situation(scg, sid)
    return rank_situations(scg, properties).all_compliant()


def rescue_rate(records: list[ExperimentRecord]) -> float | None:
    """Successes over violating variants; None when nothing violated."""
    violating = [r for r in records if r.properties_violated]
    if not violating:
        return None
    return sum(1 for r in violating if r.save_success) / len(violating)


# ---------------------------------------------------------------------------
# paired baseline-vs-adaptive timeline


@dataclass(frozen=True)
class TimelineConfig:
    seed: int = 7
    steps: int = 1000
    drift_time: int = 60
    drift_magnitude: float = 1.0
    max_removals: int = 4
    prior_strength_kappa: float = 1.0


@dataclass
class TimelineResult:
    baseline_log: list[RunLogEntry]
    adaptive_log: list[RunLogEntry]

    def baseline_failures(self) -> list[RunLogEntry]:
        return [e for e in self.baseline_log if e.kind == "failure_observed"]

    def adaptation_entries(self) -> list[RunLogEntry]:
        return [e for e in self.adaptive_log if e.outcome and e.outcome.success]

    def failures_after_adaptation_in_episode(self) -> list[RunLogEntry]:
        """Failure events between the first adaptation and its episode end."""
        adaptations = self.adaptation_entries()
        if not adaptations:
            return []
        start = self.adaptive_log.index(adaptations[0])
        out = []
        for entry in self.adaptive_log[start + 1 :]:
            if entry.kind == "episode_reset":
                break
            if entry.kind == "failure_observed":
                out.append(entry)
        return out


def _closed_loop(
    truth: GroundTruth, kb: KnowledgeBase, steps: int, sampler_seed: int
) -> list[RunLogEntry]:
    """Drive the loop against the truth sampler, honouring crash stops."""
    sampler = TruthSampler(truth, sampler_seed)
    log: list[RunLogEntry] = []
    t = 0
    current: str | None = None
    while t < steps:
        sampler.apply_drift(t)
        if current is None:
            sid = sampler.initial_situation()
            if sid in kb.scg.sunk:
                # crash-stopped before the episode starts; skip this spawn
                _, entry = step(kb, TraceEvent(t=t, kind="situation_entered", id=sid))
                log.append(entry)
                _, entry = step(kb, TraceEvent(t=t, kind="episode_reset"))
                log.append(entry)
                t += 1
                continue
            event = TraceEvent(t=t, kind="situation_entered", id=sid)
        else:
            nxt = sampler.next_state(current)
            kind = "failure_observed" if sampler.is_failure(nxt) else "situation_entered"
            event = TraceEvent(t=t, kind=kind, id=nxt)
        _, entry = step(kb, event)
        log.append(entry)
        if event.kind == "failure_observed" or entry.directive.kind == "safe_stop":
            _, reset_entry = step(kb, TraceEvent(t=t, kind="episode_reset"))
            log.append(reset_entry)
            current = None
        else:
            current = event.id
        t += 1
    return log


def run_timeline(
    config: TimelineConfig, properties: list[BoundedReachProperty] | None = None
) -> TimelineResult:
    """Same seeded drifting world, once with a fixed controller, once adaptive."""
    properties = properties or default_properties()
    scenario = ScenarioConfig(
        seed=config.seed,
        drift_magnitude=config.drift_magnitude,
        drift_time=config.drift_time,
    )
    truth, belief = generate_scenario(scenario)
    estimator = EstimatorConfig(
        mode="bayesian", prior_strength_kappa=config.prior_strength_kappa
    )
    synthesis = SynthesisConfig(max_removals=config.max_removals, rng_seed=config.seed)
    logs = {}
    for baseline in (True, False):
        kb = new_knowledge_base(
            belief, properties, estimator=estimator, synthesis=synthesis,
            baseline=baseline,
        )
        logs[baseline] = _closed_loop(truth, kb, config.steps, config.seed + 2)
    return TimelineResult(baseline_log=logs[True], adaptive_log=logs[False])


# ---------------------------------------------------------------------------
# criticality-scoring benchmark


def random_dense_scg(
    n_situations: int, density: float = 1.0, seed: int = 0
) -> AugmentedScg:
    """A benchmark SCG with n situations, 2 failures and the given row density."""
    if n_situations < 2:
        raise ValueError("need at least 2 situations")
    rng = np.random.default_rng(seed)
    attributes = (OddAttribute("bench", tuple(f"v{i}" for i in range(n_situations))),)
    situations = tuple(enumerate_situations(list(attributes)))
    n_states = n_situations + len(MARITIME_FAILURES)
    state_ids = [s.id for s in situations] + [f.id for f in MARITIME_FAILURES]
    per_row = max(1, round(density * n_states))
    delta = {}
    for s in situations:
        targets = rng.choice(state_ids, size=per_row, replace=False).tolist()
        probs = rng.dirichlet(np.ones(per_row))
        delta[s.id] = {t: float(p) for t, p in zip(targets, probs) if p > 0.0}
    return AugmentedScg(
        attributes=attributes,
        situations=situations,
        failures=MARITIME_FAILURES,
        delta=delta,
    )


def run_bench(
    n_list: list[int], horizon: int = 50, density: float = 1.0, seed: int = 0
) -> list[dict]:
    """Time rank_situations on generated SCGs; one CSV-able record per size."""
    properties = [
        parse_property("phi1", f"P < 0.99 [ F<={horizon} f1 ]"),
        parse_property("phi2", f"P < 0.95 [ F<={horizon} f2 ]"),
    ]
    rows = []
    for n in n_list:
        scg = random_dense_scg(n, density=density, seed=seed + n)
        transitions = sum(len(row) for row in scg.delta.values())
        start = time.perf_counter()
        rank_situations(scg, properties)
        elapsed_ms = (time.perf_counter() - start) * 1000.0
        rows.append(
            {
                "n": n,
                "states": n + len(MARITIME_FAILURES),
                "transitions": transitions,
                "ms": elapsed_ms,
            }
        )
    return rows


BENCH_CSV_HEADER = ["n", "states", "transitions", "ms"]
