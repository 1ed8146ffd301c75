"""Seeded maritime scenario generator and situation-level trace simulator.

The simulator works at the situation-transition abstraction: a hidden
row-stochastic ground-truth matrix over the 18-situation maritime grid plus
the two failure states drives Markov sampling.  Vessel kinematics exist only
inside the seeded generator that shapes the matrix.  Out-of-ODD drift is a
seeded perturbation of the matrix, bounded in per-row total variation.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .runtime import TraceEvent
from .scg import AugmentedScg, FailureMode, OddAttribute, enumerate_situations

MARITIME_ATTRIBUTES = (
    OddAttribute("density_a", ("none", "low", "high")),
    OddAttribute("density_b", ("none", "low", "high")),
    OddAttribute("ttc", ("short", "long")),
)

MARITIME_FAILURES = (
    FailureMode("f1", "f1", "inadequate time to react (short TTC)"),
    FailureMode("f2", "f2", "near-catastrophic collision"),
)

_TTC_INDEX = 2
_TTC_SHORT = 0

#: failure share drawn for strongly drifted rows; the rest self-loops, which
#: is what lets bounded reachability actually cross the property bounds
_DRIFT_FAILURE_SHARE_RANGE = (0.55, 0.8)
#: relative drift strength applied to the non-selected rows
_DRIFT_BACKGROUND = 0.1


@dataclass
class GroundTruth:
    """Hidden truth matrix (sparse rows) plus the scheduled drift events."""

    situations: tuple[str, ...]
    failures: tuple[str, ...]
    rows: dict[str, dict[str, float]]
    drift_schedule: list[tuple[int, float, int]] = field(default_factory=list)

    def copy(self) -> "GroundTruth":
        return replace(self, rows={s: dict(r) for s, r in self.rows.items()})


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 0
    episode_length: int = 50
    episodes: int = 200
    drift_magnitude: float = 0.0
    drift_time: int = 0
    failure_bias: dict = field(default_factory=lambda: {"f1": 1.0, "f2": 1.0})

    def __post_init__(self):
        if not (0.0 <= self.drift_magnitude <= 1.0):
            raise ValueError("drift_magnitude must be in [0, 1]")
        if any(v < 0 for v in self.failure_bias.values()):
            raise ValueError("failure_bias weights must be non-negative")


def _sample_truth_rows(rng: np.random.Generator, situations, bias) -> dict:
    """Truth rows: Dirichlet situation mass plus TTC-dependent failure mass."""
    sids = [s.id for s in situations]
    rows = {}
    for s in situations:
        short_ttc = s.assignment[_TTC_INDEX] == _TTC_SHORT
        if short_ttc:
            f1 = rng.uniform(0.005, 0.02) * bias.get("f1", 1.0)
            f2 = rng.uniform(0.002, 0.012) * bias.get("f2", 1.0)
        else:
            # long TTC never produces f1 directly
            f1 = 0.0
            f2 = rng.uniform(0.0, 0.004) * bias.get("f2", 1.0)
        fail_mass = f1 + f2
        situ = rng.dirichlet(np.full(len(sids), 0.8)) * (1.0 - fail_mass)
        row = {sid: float(p) for sid, p in zip(sids, situ) if p > 0.0}
        if f1 > 0.0:
            row["f1"] = float(f1)
        if f2 > 0.0:
            row["f2"] = float(f2)
        rows[s.id] = row
    return rows


def _estimate_belief_rows(
    rng: np.random.Generator, rows: dict, samples_per_row: int
) -> dict:
    """Frequentist belief from seeded multinomial pre-deployment sampling."""
    belief = {}
    for sid, row in rows.items():
        targets = list(row)
        probs = np.array([row[t] for t in targets])
        probs = probs / probs.sum()
        counts = rng.multinomial(samples_per_row, probs)
        belief[sid] = {
            t: float(c / samples_per_row) for t, c in zip(targets, counts) if c > 0
        }
    return belief


def generate_scenario(config: ScenarioConfig) -> tuple[GroundTruth, AugmentedScg]:
    """Sample a hidden maritime truth matrix and its pre-deployment belief."""
    rng = np.random.default_rng(config.seed)
    situations = enumerate_situations(list(MARITIME_ATTRIBUTES))
    rows = _sample_truth_rows(rng, situations, config.failure_bias)
    truth = GroundTruth(
        situations=tuple(s.id for s in situations),
        failures=tuple(f.id for f in MARITIME_FAILURES),
        rows=rows,
        drift_schedule=(
            [(config.drift_time, config.drift_magnitude, config.seed + 1)]
            if config.drift_magnitude > 0
            else []
        ),
    )
    total = config.episodes * config.episode_length
    samples_per_row = max(100, total // len(situations))
    belief_rows = _estimate_belief_rows(rng, rows, samples_per_row)
    belief = AugmentedScg(
        attributes=MARITIME_ATTRIBUTES,
        situations=tuple(situations),
        failures=MARITIME_FAILURES,
        delta=belief_rows,
    )
    return truth, belief


def _mix_row(
    row: dict[str, float], noise: dict[str, float], magnitude: float
) -> dict[str, float]:
    """Convex mixture; total variation from `row` is at most `magnitude`."""
    out: dict[str, float] = {}
    # sorted union keeps row key order independent of hash randomisation,
    # which sampling order (and thus whole traces) depends on
    for t in sorted(set(row) | set(noise)):
        p = (1.0 - magnitude) * row.get(t, 0.0) + magnitude * noise.get(t, 0.0)
        if p > 0.0:
            out[t] = p
    return out


def inject_drift(truth: GroundTruth, magnitude: float, seed: int) -> GroundTruth:
    """Perturb the truth matrix; a few seeded rows gain failure-directed mass.

    Every row moves at most `magnitude` in total variation and stays
    stochastic; magnitude 0 is the identity.
    """
    if not (0.0 <= magnitude <= 1.0):
        raise ValueError("magnitude must be in [0, 1]")
    out = truth.copy()
    if magnitude == 0.0:
        return out
    rng = np.random.default_rng(seed)
    sids = list(truth.situations)
    n_hot = int(rng.integers(1, min(4, len(sids)) + 1))
    hot = set(rng.choice(sids, size=n_hot, replace=False).tolist())
    for sid in sids:
        row = out.rows[sid]
        if sid in hot:
            # one failure mode dominates (sparse Dirichlet split) and the
            # remainder self-loops: the situation becomes a trap that feeds
            # its dominant failure
            fail_share = float(rng.uniform(*_DRIFT_FAILURE_SHARE_RANGE))
            fail_split = rng.dirichlet(np.full(len(truth.failures), 0.15))
            noise = {
                fid: float(fail_share * w)
                for fid, w in zip(truth.failures, fail_split)
                if w > 0.0
            }
            noise[sid] = noise.get(sid, 0.0) + (1.0 - fail_share)
            out.rows[sid] = _mix_row(row, noise, magnitude)
        else:
            spill = rng.dirichlet(np.ones(len(sids)))
            noise = {t: float(w) for t, w in zip(sids, spill) if w > 0.0}
            out.rows[sid] = _mix_row(row, noise, magnitude * _DRIFT_BACKGROUND)
    return out


class TruthSampler:
    """Stepwise Markov sampling from the (possibly drifting) truth matrix.

    Keeps its own RNG stream so closed-loop experiments stay deterministic.
    Drift events fire once their timestep is reached.
    """

    def __init__(self, truth: GroundTruth, seed: int):
        self.truth = truth.copy()
        self.rng = np.random.default_rng(seed)
        self._pending_drift = sorted(truth.drift_schedule)

    def apply_drift(self, t: int) -> bool:
        fired = False
        while self._pending_drift and self._pending_drift[0][0] <= t:
            _, magnitude, seed = self._pending_drift.pop(0)
            self.truth = inject_drift(self.truth, magnitude, seed)
            fired = True
        return fired

    def initial_situation(self) -> str:
        return str(self.rng.choice(list(self.truth.situations)))

    def next_state(self, current: str) -> str:
        row = self.truth.rows[current]
        targets = list(row)
        probs = np.array([row[t] for t in targets])
        probs = probs / probs.sum()
        return str(self.rng.choice(targets, p=probs))

    def is_failure(self, state: str) -> bool:
        return state in self.truth.failures


def simulate(truth: GroundTruth, steps: int, seed: int) -> list[TraceEvent]:
    """Sample a trace of `steps` state events (failures end episodes)."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    sampler = TruthSampler(truth, seed)
    events: list[TraceEvent] = []
    t = 0
    current: str | None = None
    while len(events) < steps:
        sampler.apply_drift(t)
        if current is None:
            current = sampler.initial_situation()
            events.append(TraceEvent(t=t, kind="situation_entered", id=current))
        else:
            nxt = sampler.next_state(current)
            if sampler.is_failure(nxt):
                events.append(TraceEvent(t=t, kind="failure_observed", id=nxt))
                events.append(TraceEvent(t=t, kind="episode_reset"))
                current = None
            else:
                events.append(TraceEvent(t=t, kind="situation_entered", id=nxt))
                current = nxt
        t += 1
    return events[:steps]
