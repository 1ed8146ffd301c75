"""Situation grids: ODD attributes, enumeration, and the augmented SCG.

An augmented SCG is the situation grid extended with failure states and a
row-stochastic transition function delta over situation rows.  Failure states
are sinks by construction and never own a delta row.  All operations here are
pure: they return new values and never mutate their inputs.
"""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass, field, replace

from .errors import InvalidOddError, ModelError, NotFoundError, SchemaError

#: rows must sum to 1 within this tolerance to be considered well-formed
ROW_SUM_ATOL = 1e-9
#: rows off by up to this much are renormalised (with a warning) on load
ROW_SUM_RENORM = 1e-6


@dataclass(frozen=True)
class OddAttribute:
    """One discretised ODD attribute: a name plus its ordered value labels."""

    name: str
    values: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))


@dataclass(frozen=True)
class Situation:
    """A point assignment of one value index per ODD attribute."""

    id: str
    assignment: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(self.assignment))


@dataclass(frozen=True)
class FailureMode:
    """A monitored failure condition; `label` is the atomic proposition name."""

    id: str
    label: str
    description: str = ""


@dataclass(frozen=True)
class Violation:
    """One well-formedness defect found by validate_scg."""

    code: str
    subject: str
    message: str


@dataclass(frozen=True)
class AugmentedScg:
    """Situations plus failures with a sparse row-stochastic transition map.

    `delta` maps each situation id to a sparse distribution over situation and
    failure ids (absent entries mean probability zero).  `sunk` holds the
    situation ids currently modelled as absorbing self-loops.
    """

    attributes: tuple[OddAttribute, ...]
    situations: tuple[Situation, ...]
    failures: tuple[FailureMode, ...]
    delta: dict[str, dict[str, float]]
    sunk: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        object.__setattr__(self, "situations", tuple(self.situations))
        object.__setattr__(self, "failures", tuple(self.failures))
        object.__setattr__(self, "sunk", frozenset(self.sunk))

    @property
    def situation_ids(self) -> list[str]:
        return [s.id for s in self.situations]

    @property
    def failure_ids(self) -> list[str]:
        return [f.id for f in self.failures]

    @property
    def state_ids(self) -> list[str]:
        """Situations first, then failures; the canonical state ordering."""
        return self.situation_ids + self.failure_ids

    def is_situation(self, sid: str) -> bool:
        return any(s.id == sid for s in self.situations)

    def is_failure(self, sid: str) -> bool:
        return any(f.id == sid for f in self.failures)


def enumerate_situations(attributes: list[OddAttribute]) -> list[Situation]:
    """Enumerate the full situation grid in lexicographic index order.

    Ids are assigned "s0", "s1", ... following that order.
    """
    if not attributes:
        raise InvalidOddError("ODD needs at least one attribute")
    names = [a.name for a in attributes]
    if len(set(names)) != len(names):
        raise InvalidOddError("duplicate attribute names in ODD")
    for attr in attributes:
        if not attr.values:
            raise InvalidOddError(f"attribute {attr.name!r} has no values")
        if len(set(attr.values)) != len(attr.values):
            raise InvalidOddError(f"attribute {attr.name!r} has duplicate values")
    ranges = [range(len(a.values)) for a in attributes]
    return [
        Situation(id=f"s{i}", assignment=combo)
        for i, combo in enumerate(itertools.product(*ranges))
    ]


def describe_situation(scg: AugmentedScg, sid: str) -> str:
    """Render a situation as its attribute-value tuple, e.g. "(none,low,short)"."""
    for s in scg.situations:
        if s.id == sid:
            labels = [a.values[v] for a, v in zip(scg.attributes, s.assignment)]
            return "(" + ",".join(labels) + ")"
    raise NotFoundError(f"unknown situation {sid!r}")


def validate_scg(scg: AugmentedScg) -> list[Violation]:
    """Report every well-formedness defect; an empty list means valid."""
    out: list[Violation] = []
    situation_ids = set(scg.situation_ids)
    failure_ids = set(scg.failure_ids)
    state_ids = situation_ids | failure_ids

    if len(situation_ids) != len(scg.situations):
        out.append(Violation("duplicate-situation", "-", "duplicate situation ids"))
    if len(failure_ids) != len(scg.failures):
        out.append(Violation("duplicate-failure", "-", "duplicate failure ids"))
    overlap = situation_ids & failure_ids
    for sid in sorted(overlap):
        out.append(Violation("id-overlap", sid, f"{sid!r} is both situation and failure"))

    labels = [f.label for f in scg.failures]
    if len(set(labels)) != len(labels):
        out.append(Violation("duplicate-label", "-", "duplicate failure labels"))

    for sid in sorted(failure_ids & set(scg.delta)):
        out.append(
            Violation("failure-has-outgoing", sid, f"failure {sid!r} owns a delta row")
        )
    for sid in scg.situation_ids:
        row = scg.delta.get(sid)
        if row is None:
            out.append(Violation("missing-row", sid, f"situation {sid!r} has no distribution"))
            continue
        for target, p in row.items():
            if target not in state_ids:
                out.append(
                    Violation("unknown-target", sid, f"{sid!r} -> unknown state {target!r}")
                )
            if not (0.0 <= p <= 1.0):
                out.append(
                    Violation("probability-range", sid, f"{sid!r} -> {target!r} = {p}")
                )
        total = sum(row.values())
        if abs(total - 1.0) > ROW_SUM_ATOL:
            out.append(
                Violation("row-sum", sid, f"row {sid!r} sums to {total!r}")
            )
    for sid in sorted(scg.sunk):
        if sid not in situation_ids:
            out.append(Violation("unknown-sunk", sid, f"sunk id {sid!r} is not a situation"))
        elif scg.delta.get(sid) != {sid: 1.0}:
            out.append(
                Violation("sunk-not-self-loop", sid, f"sunk {sid!r} is not a pure self-loop")
            )
    extra = set(scg.delta) - situation_ids - failure_ids
    for sid in sorted(extra):
        out.append(Violation("unknown-row", sid, f"delta row for unknown id {sid!r}"))
    return out


def require_valid(scg: AugmentedScg) -> None:
    """Raise ModelError when validate_scg reports anything."""
    violations = validate_scg(scg)
    if violations:
        summary = "; ".join(f"{v.code}({v.subject})" for v in violations[:5])
        raise ModelError(f"invalid augmented SCG: {summary}")


def sink_situation(scg: AugmentedScg, target: str) -> AugmentedScg:
    """Make `target` absorbing: its row becomes a self-loop of probability 1.

    Incoming transitions are untouched; the operation is idempotent.
    """
    if scg.is_failure(target):
        raise TypeError(f"cannot sink failure state {target!r}")
    if not scg.is_situation(target):
        raise NotFoundError(f"unknown situation {target!r}")
    if target in scg.sunk and scg.delta.get(target) == {target: 1.0}:
        return scg
    delta = {sid: dict(row) for sid, row in scg.delta.items()}
    delta[target] = {target: 1.0}
    return replace(scg, delta=delta, sunk=scg.sunk | {target})


# ---------------------------------------------------------------------------
# JSON interchange


def scg_to_dict(scg: AugmentedScg) -> dict:
    return {
        "attributes": [
            {"name": a.name, "values": list(a.values)} for a in scg.attributes
        ],
        "failures": [
            {"id": f.id, "label": f.label, "description": f.description}
            for f in scg.failures
        ],
        "delta": {sid: dict(row) for sid, row in scg.delta.items()},
        "sunk": sorted(scg.sunk),
    }


def scg_from_dict(doc: dict) -> AugmentedScg:
    """Build an AugmentedScg from its JSON form, renormalising noisy rows.

    Rows off 1 by at most ROW_SUM_RENORM are renormalised with a warning;
    anything worse raises ModelError.
    """
    missing = [k for k in ("attributes", "failures", "delta") if k not in doc]
    if missing:
        raise SchemaError("SCG document missing keys", [f"$.{k}" for k in missing])
    try:
        attributes = tuple(
            OddAttribute(a["name"], tuple(a["values"])) for a in doc["attributes"]
        )
        failures = tuple(
            FailureMode(f["id"], f["label"], f.get("description", ""))
            for f in doc["failures"]
        )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed attribute/failure entry: {exc}") from exc
    situations = tuple(enumerate_situations(list(attributes)))
    delta: dict[str, dict[str, float]] = {}
    for sid, row in doc["delta"].items():
        row = {t: float(p) for t, p in row.items()}
        total = sum(row.values())
        off = abs(total - 1.0)
        if ROW_SUM_ATOL < off <= ROW_SUM_RENORM:
            warnings.warn(f"renormalising row {sid!r} (sum {total!r})", stacklevel=2)
            row = {t: p / total for t, p in row.items()}
        elif off > ROW_SUM_RENORM:
            raise ModelError(f"row {sid!r} sums to {total!r}; beyond renormalisation")
        delta[sid] = row
    scg = AugmentedScg(
        attributes=attributes,
        situations=situations,
        failures=failures,
        delta=delta,
        sunk=frozenset(doc.get("sunk", [])),
    )
    require_valid(scg)
    return scg


def save_scg(scg: AugmentedScg, path) -> None:
    with open(path, "w") as fh:
        json.dump(scg_to_dict(scg), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_scg(path) -> AugmentedScg:
    with open(path) as fh:
        return scg_from_dict(json.load(fh))
