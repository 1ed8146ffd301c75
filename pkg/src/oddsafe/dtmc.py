"""Per-situation Markov chains and bounded-reachability checking.

The checker runs value iteration for exactly k sweeps: x0(s) = 1 iff s carries
the target label, and x{j}(s) = 1 for labelled states, otherwise the
expectation of x{j-1} under the transition row.  Dense numpy is used for
well-filled matrices with a scipy.sparse fallback for sparse ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import NotFoundError
from .scg import AugmentedScg, require_valid

#: switch to CSR matvecs when at most this fraction of entries is nonzero
SPARSE_DENSITY_CUTOFF = 0.25


@dataclass(frozen=True)
class BoundedReachProperty:
    """P <cmp> <bound> [ F<=k <label> ] with a failure label as target."""

    name: str
    target_label: str
    horizon: int
    comparator: str  # one of "<", "<=", ">", ">="
    bound: float

    def __post_init__(self):
        if self.comparator not in ("<", "<=", ">", ">="):
            raise ValueError(f"bad comparator {self.comparator!r}")
        if not (0.0 <= self.bound <= 1.0):
            raise ValueError(f"bound {self.bound!r} outside [0, 1]")
        if self.horizon < 1:
            raise ValueError(f"horizon {self.horizon!r} must be >= 1")

    @property
    def is_upper_bound(self) -> bool:
        return self.comparator in ("<", "<=")


@dataclass(frozen=True)
class PropertyResult:
    """Checked value, signed criticality score and compliance flag."""

    value: float
    score: float
    compliant: bool


@dataclass
class Dtmc:
    """A DTMC over all SCG states with one situation as initial state."""

    states: list[str]
    initial: int
    matrix: np.ndarray  # row-stochastic, shape (n, n)
    labels: dict[str, set[int]]  # failure label -> state indices


@dataclass
class CriticalityReport:
    """Per-situation, per-property results plus the global worst situation."""

    records: dict[str, dict[str, PropertyResult]]
    worst_scores: dict[str, float]
    worst_situation: str | None

    def violations(self) -> dict[str, list[str]]:
        """Situation id -> names of properties it violates."""
        out = {}
        for sid, props in self.records.items():
            bad = [name for name, res in props.items() if not res.compliant]
            if bad:
                out[sid] = bad
        return out

    def all_compliant(self) -> bool:
        return not self.violations()

    def violated_properties(self) -> list[str]:
        """Property names violated by at least one situation, first-seen order."""
        seen: list[str] = []
        for props in self.records.values():
            for name, res in props.items():
                if not res.compliant and name not in seen:
                    seen.append(name)
        return seen

    def to_dict(self) -> dict:
        return {
            "records": {
                sid: {
                    name: {
                        "value": r.value,
                        "score": r.score,
                        "compliant": r.compliant,
                    }
                    for name, r in props.items()
                }
                for sid, props in self.records.items()
            },
            "worst_scores": dict(self.worst_scores),
            "worst_situation": self.worst_situation,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CriticalityReport":
        records = {
            sid: {
                name: PropertyResult(
                    value=float(r["value"]),
                    score=float(r["score"]),
                    compliant=bool(r["compliant"]),
                )
                for name, r in props.items()
            }
            for sid, props in doc["records"].items()
        }
        return cls(
            records=records,
            worst_scores={s: float(v) for s, v in doc["worst_scores"].items()},
            worst_situation=doc["worst_situation"],
        )


def transition_matrix(scg: AugmentedScg) -> tuple[list[str], np.ndarray]:
    """Dense row-stochastic matrix over situations-then-failures ordering."""
    states = scg.state_ids
    index = {sid: i for i, sid in enumerate(states)}
    n = len(states)
    mat = np.zeros((n, n))
    for sid in scg.situation_ids:
        i = index[sid]
        for target, p in scg.delta[sid].items():
            mat[i, index[target]] += p
    for fid in scg.failure_ids:
        i = index[fid]
        mat[i, i] = 1.0
    return states, mat


def build_model(scg: AugmentedScg, initial: str) -> Dtmc:
    """Assemble the DTMC whose initial state is the given situation."""
    require_valid(scg)
    if not scg.is_situation(initial):
        raise NotFoundError(f"unknown initial situation {initial!r}")
    states, mat = transition_matrix(scg)
    index = {sid: i for i, sid in enumerate(states)}
    labels = {f.label: {index[f.id]} for f in scg.failures}
    return Dtmc(states=states, initial=index[initial], matrix=mat, labels=labels)


def bounded_reach_vector(matrix: np.ndarray, targets: set[int], k: int) -> np.ndarray:
    """Reach-within-k probabilities of the target set, from every state."""
    n = matrix.shape[0]
    target_idx = sorted(targets)
    x = np.zeros(n)
    x[target_idx] = 1.0
    if k == 0 or not target_idx:
        return x
    density = np.count_nonzero(matrix) / matrix.size
    op = sp.csr_matrix(matrix) if density <= SPARSE_DENSITY_CUTOFF else matrix
    for _ in range(k):
        x = op @ x
        x[target_idx] = 1.0
    return x


def check_bounded_reach(model: Dtmc, target_label: str, horizon: int) -> float:
    """Probability of reaching any target-labelled state within `horizon` steps."""
    if target_label not in model.labels:
        raise NotFoundError(f"unknown label {target_label!r}")
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    x = bounded_reach_vector(model.matrix, model.labels[target_label], horizon)
    value = float(x[model.initial])
    assert -1e-9 <= value <= 1.0 + 1e-9, f"reach value {value} escaped [0, 1]"
    return value


def score_value(value: float, prop: BoundedReachProperty) -> PropertyResult:
    """Signed deviation from the bound, positive meaning violation."""
    if prop.is_upper_bound:
        score = value - prop.bound
    else:
        score = prop.bound - value
    compliant = {
        "<": value < prop.bound,
        "<=": value <= prop.bound,
        ">": value > prop.bound,
        ">=": value >= prop.bound,
    }[prop.comparator]
    return PropertyResult(value=value, score=score, compliant=compliant)


def criticality(model: Dtmc, prop: BoundedReachProperty) -> PropertyResult:
    """Check one property against one model and score the outcome."""
    value = check_bounded_reach(model, prop.target_label, prop.horizon)
    return score_value(value, prop)


def rank_situations(
    scg: AugmentedScg, properties: list[BoundedReachProperty]
) -> CriticalityReport:
    """Evaluate every property from every non-sunk situation.

    All per-situation models share the transition matrix, so one k-sweep
    value iteration per property yields the value for every initial state.
    """
    require_valid(scg)
    if not properties:
        raise ValueError("need at least one property")
    states, mat = transition_matrix(scg)
    index = {sid: i for i, sid in enumerate(states)}
    label_to_idx = {f.label: {index[f.id]} for f in scg.failures}
    active = [sid for sid in scg.situation_ids if sid not in scg.sunk]

    per_prop: dict[str, np.ndarray] = {}
    for prop in properties:
        if prop.target_label not in label_to_idx:
            raise NotFoundError(f"unknown label {prop.target_label!r}")
        per_prop[prop.name] = bounded_reach_vector(
            mat, label_to_idx[prop.target_label], prop.horizon
        )

    records: dict[str, dict[str, PropertyResult]] = {}
    worst_scores: dict[str, float] = {}
    for sid in active:
        props: dict[str, PropertyResult] = {}
        for prop in properties:
            value = float(per_prop[prop.name][index[sid]])
            assert -1e-9 <= value <= 1.0 + 1e-9
            props[prop.name] = score_value(value, prop)
        records[sid] = props
        worst_scores[sid] = max(r.score for r in props.values())

    worst_situation = None
    if worst_scores:
        best = max(worst_scores.values())
        worst_situation = min(s for s, v in worst_scores.items() if v == best)
    return CriticalityReport(
        records=records, worst_scores=worst_scores, worst_situation=worst_situation
    )
