"""Shared test fixtures: the path-enumeration oracle and random model builders.

The oracle deliberately enumerates every path of length <= k instead of doing
value iteration, so it stays independent of the checker it validates.
"""

from __future__ import annotations

import random

from oddsafe.scg import AugmentedScg, FailureMode, OddAttribute, enumerate_situations


def reach_by_paths(
    rows: dict[str, dict[str, float]],
    start: str,
    targets: set[str],
    k: int,
) -> float:
    """Probability of hitting `targets` within k steps, by path enumeration.

    States without a row are treated as absorbing.
    """
    if start in targets:
        return 1.0
    if k == 0:
        return 0.0
    row = rows.get(start)
    if not row:
        return 0.0
    return sum(p * reach_by_paths(rows, t, targets, k - 1) for t, p in row.items())


def scg_rows_with_sinks(scg: AugmentedScg) -> dict[str, dict[str, float]]:
    """SCG delta extended with failure self-loops, for the oracle."""
    rows = {s: dict(r) for s, r in scg.delta.items()}
    for fid in scg.failure_ids:
        rows[fid] = {fid: 1.0}
    return rows


def random_rows(
    rng: random.Random,
    states: list[str],
    max_support: int = 3,
) -> dict[str, dict[str, float]]:
    """Random sparse row-stochastic rows over the given states."""
    rows = {}
    for s in states:
        support = rng.sample(states, rng.randint(1, min(max_support, len(states))))
        weights = [rng.random() + 1e-3 for _ in support]
        total = sum(weights)
        rows[s] = {t: w / total for t, w in zip(support, weights)}
    return rows


def make_scg(
    delta: dict[str, dict[str, float]],
    n_situations: int,
    failures: tuple[str, ...] = ("f1", "f2"),
    sunk: frozenset[str] = frozenset(),
) -> AugmentedScg:
    """SCG over s0..s{n-1} (single synthetic attribute) with given rows."""
    attributes = (OddAttribute("attr", tuple(f"v{i}" for i in range(n_situations))),)
    situations = tuple(enumerate_situations(list(attributes)))
    return AugmentedScg(
        attributes=attributes,
        situations=situations,
        failures=tuple(FailureMode(f, f) for f in failures),
        delta=delta,
        sunk=sunk,
    )


def random_scg(
    rng: random.Random,
    n_situations: int = 4,
    failure_mass: float = 0.3,
    failures: tuple[str, ...] = ("f1", "f2"),
) -> AugmentedScg:
    """Random valid SCG whose situation rows may feed the failure states."""
    sids = [f"s{i}" for i in range(n_situations)]
    delta = {}
    for s in sids:
        support = rng.sample(sids, rng.randint(1, min(3, len(sids))))
        weights = {t: rng.random() + 1e-3 for t in support}
        for f in failures:
            if rng.random() < 0.5:
                weights[f] = rng.random() * failure_mass
        total = sum(weights.values())
        delta[s] = {t: w / total for t, w in weights.items()}
    return make_scg(delta, n_situations, failures)
