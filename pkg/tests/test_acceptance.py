"""End-to-end acceptance checks, one test per criterion.

The conftest terminal-summary hook prints one PASS/FAIL line per criterion
after the run.
"""

import csv
import random
import time

import numpy as np
import pytest

from oddsafe.dtmc import BoundedReachProperty, bounded_reach_vector, score_value, transition_matrix
from oddsafe.experiments import (
    BENCH_CSV_HEADER,
    TimelineConfig,
    VariantConfig,
    recheck_record,
    rescue_rate,
    run_bench,
    run_timeline,
    run_variants,
)
from oddsafe.learn import estimate_bayesian, estimate_frequentist
from oddsafe.marsim import ScenarioConfig, generate_scenario, simulate
from oddsafe.proplang import format_property, parse_property
from oddsafe.runtime import load, new_knowledge_base, run, snapshot, step
from oddsafe.scg import sink_situation

from helpers import random_rows, random_scg, reach_by_paths, scg_rows_with_sinks


def test_criterion_1_checker_matches_path_enumeration_oracle():
    rng = random.Random(2024)
    start = time.perf_counter()
    for _ in range(1000):
        n = rng.randint(2, 5)
        states = [f"q{i}" for i in range(n)]
        rows = random_rows(rng, states, max_support=3)
        k = rng.randint(1, 6)
        targets = set(rng.sample(states, rng.randint(1, min(3, n))))
        matrix = np.zeros((n, n))
        for i, s in enumerate(states):
            for t, p in rows[s].items():
                matrix[i, states.index(t)] = p
        target_idx = {states.index(t) for t in targets}
        x = bounded_reach_vector(matrix, target_idx, k)
        for i, s in enumerate(states):
            expected = reach_by_paths(rows, s, targets, k)
            assert abs(float(x[i]) - expected) < 1e-10
    assert time.perf_counter() - start < 10.0


def test_criterion_2_criticality_worked_example():
    prop = BoundedReachProperty("req", "goal", 50, ">=", 0.96)
    low = score_value(0.85, prop)
    high = score_value(0.94, prop)
    assert round(low.score, 12) == 0.11
    assert round(high.score, 12) == 0.02
    assert not low.compliant and not high.compliant
    assert low.score > high.score


def test_criterion_3_property_round_trip_is_byte_identical():
    for name, expr in (
        ("phi1", "P < 0.99 [ F<=50 f1 ]"),
        ("phi2", "P < 0.95 [ F<=50 f2 ]"),
    ):
        prop = parse_property(name, expr)
        assert format_property(prop) == expr
        assert parse_property(name, format_property(prop)) == prop


def test_criterion_4_drift_variants_rescued():
    start = time.perf_counter()
    records = run_variants(VariantConfig(seed=0, variants=20, max_removals=4))
    assert len(records) == 20
    violating = [r for r in records if r.properties_violated]
    assert violating, "drift produced no violating variants"
    for record in records:
        if record.save_success:
            # hard requirement: a claimed success must re-check clean
            assert recheck_record(record)
    rate = rescue_rate(records)
    assert rate is not None and rate >= 0.5
    assert time.perf_counter() - start < 120.0


def test_criterion_5_sinking_never_increases_reachability():
    rng = random.Random(99)
    for _ in range(200):
        scg = random_scg(rng, n_situations=rng.randint(3, 6))
        states, before_mat = transition_matrix(scg)
        index = {sid: i for i, sid in enumerate(states)}
        victim = rng.choice(scg.situation_ids)
        sunk = sink_situation(scg, victim)
        _, after_mat = transition_matrix(sunk)
        for fid in scg.failure_ids:
            targets = {index[fid]}
            for k in (1, 10, 50):
                before = bounded_reach_vector(before_mat, targets, k)
                after = bounded_reach_vector(after_mat, targets, k)
                for sid in scg.situation_ids:
                    i = index[sid]
                    assert after[i] <= before[i] + 1e-12


def test_criterion_6_timeline_baseline_fails_adaptive_recovers():
    runs = [run_timeline(TimelineConfig()) for _ in range(3)]
    for result in runs:
        assert result.baseline_failures(), "baseline run saw no failure"
        adaptations = result.adaptation_entries()
        assert adaptations, "adaptive run never adapted"
        assert adaptations[0].directive.kind in ("switch_controller", "safe_stop")
        assert adaptations[0].outcome.avoided
        assert result.failures_after_adaptation_in_episode() == []
    serialised = [
        (
            [e.to_dict() for e in r.baseline_log],
            [e.to_dict() for e in r.adaptive_log],
        )
        for r in runs
    ]
    assert serialised[0] == serialised[1] == serialised[2]


def test_criterion_7_bench_ladder(tmp_path):
    start = time.perf_counter()
    rows = run_bench([10, 20, 40, 80, 160], horizon=50, density=1.0)
    for row in rows:
        assert row["states"] == row["n"] + 2
        assert row["transitions"] == row["n"] * (row["n"] + 2)
        assert row["ms"] > 0.0
    out = tmp_path / "bench.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BENCH_CSV_HEADER)
        for row in rows:
            writer.writerow([row["n"], row["states"], row["transitions"], row["ms"]])
    with open(out, newline="") as fh:
        parsed = list(csv.reader(fh))
    assert parsed[0] == BENCH_CSV_HEADER
    assert len(parsed) == 6
    assert time.perf_counter() - start < 300.0


def test_criterion_8_estimators_recover_ground_truth():
    rng = np.random.default_rng(7)
    support = ["a", "b", "c", "d", "e"]
    truth = {"a": 0.4, "b": 0.3, "c": 0.15, "d": 0.1, "e": 0.05}
    counts = {
        t: int(c)
        for t, c in zip(support, rng.multinomial(10_000, [truth[t] for t in support]))
    }
    uniform_prior = {t: 0.2 for t in support}
    freq = estimate_frequentist(uniform_prior, counts, 1.0, support)
    bayes = estimate_bayesian(uniform_prior, counts, 20.0, support)
    for row in (freq, bayes):
        tv = 0.5 * sum(abs(row[t] - truth[t]) for t in support)
        assert tv < 0.02
    # kappa=0 must equal alpha=0 bit-for-bit
    py_rng = random.Random(8)
    for _ in range(100):
        counts = {t: py_rng.randrange(0, 50) for t in support}
        if sum(counts.values()) == 0:
            counts["a"] = 1
        prior = {t: py_rng.random() + 0.01 for t in support}
        total = sum(prior.values())
        prior = {t: p / total for t, p in prior.items()}
        assert estimate_frequentist(prior, counts, 0.0, support) == estimate_bayesian(
            prior, counts, 0.0, support
        )


def test_criterion_9_snapshot_resume_reproduces_run_log():
    truth, belief = generate_scenario(
        ScenarioConfig(seed=11, drift_magnitude=0.9, drift_time=5)
    )
    from oddsafe.experiments import default_properties

    events = simulate(truth, 50, seed=12)
    assert len(events) == 50

    full_kb = new_knowledge_base(belief, default_properties())
    full_log = run(full_kb, events)

    part_kb = new_knowledge_base(belief, default_properties())
    resumed_log = run(part_kb, events[:25])
    restored = load(snapshot(part_kb))
    for event in events[25:]:
        _, entry = step(restored, event)
        resumed_log.append(entry)

    assert [e.to_dict() for e in resumed_log] == [e.to_dict() for e in full_log]
