"""Acceptance suite: ten numbered criteria, one printed verdict line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the verdict lines
inline; each test fails loudly if its criterion is not met.
"""

import json
import math
import random
import time

import pytest

from naive_oracle import naive_closure
from rule_cases import CASES

from spatialqa.answering import NO, YES
from spatialqa.engine import Fact, Stated, TruthValue, closure
from spatialqa.generator import (
    GenConfig,
    GoldTriplet,
    build_story,
    generate_dataset,
    generate_scene,
    select_stated_facts,
    synthesize_extra_questions,
)
from spatialqa.metrics import evaluate
from spatialqa.pipeline import PipelineMode, run_pipeline
from spatialqa.relations import Relation as R


def verdict(number, message):
    print(f"\n[criterion {number:>2}] PASS: {message}")


def stated(subject, relation, obj, sentence=0):
    return Fact(subject, relation, obj, provenance=Stated(sentence))


ACCEPTANCE_SEED = 20_260_809


@pytest.fixture(scope="module")
def corpus():
    dataset = generate_dataset(GenConfig(seed=ACCEPTANCE_SEED), 500)
    return dataset


def test_criterion_01_rule_schema_suite():
    started = time.perf_counter()
    assert len(CASES) >= 25
    schemas = set()
    for name, rule, premises, expected in CASES:
        derived = rule(*premises)
        schemas.add(rule.__name__)
        if expected is None:
            assert derived is None, name
        else:
            relation, subject, obj, negated = expected
            assert derived is not None, name
            assert (
                derived.subject,
                derived.relation,
                derived.object,
                derived.negated,
            ) == (subject, relation, obj, negated), name
    assert len(schemas) == 5

    # the worked pipeline example: a stated FRONT derives BEHIND of the
    # swapped pair, and the reverse directions come out negative
    front = closure([stated(0, R.FRONT, 1)])
    assert front.query(1, R.BEHIND, 0) is TruthValue.TRUE
    assert front.query(1, R.FRONT, 0) is TruthValue.FALSE
    assert front.explain(1, R.BEHIND, 0).rule == "Inverse"

    # the worked containment example: stated NTPP yields its inverse
    plants = closure([stated(0, R.NTPP, 1)])
    assert plants.query(1, R.NTPPI, 0) is TruthValue.TRUE
    assert plants.explain(1, R.NTPPI, 0).rule == "Inverse"

    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    verdict(1, f"{len(CASES)} rule cases over 5 schemas in {elapsed:.3f}s (< 1s)")


def test_criterion_02_gold_pipeline_accuracy(corpus):
    started = time.perf_counter()
    n_yn = sum(1 for s in corpus.stories for q in s.questions if q.mode == "YN")
    n_fr = sum(1 for s in corpus.stories for q in s.questions if q.mode == "FR")
    assert len(corpus.stories) == 500
    assert n_yn >= 2250 and n_fr >= 1350  # ~2500 YN + ~1500 FR requested

    run = run_pipeline(corpus, PipelineMode.GOLD_TRIPLETS)
    metrics = evaluate(run.predictions, corpus)
    elapsed = time.perf_counter() - started
    assert metrics.yn_accuracy == 1.0
    assert metrics.fr_exact_accuracy == 1.0
    assert elapsed < 60.0
    verdict(
        2,
        f"gold-triplets mode: YN {metrics.yn_accuracy:.4f}, FR "
        f"{metrics.fr_exact_accuracy:.4f} on {n_yn} YN + {n_fr} FR in {elapsed:.1f}s (< 60s)",
    )


def test_criterion_03_full_pipeline_and_dropout(corpus):
    run = run_pipeline(corpus, PipelineMode.FULL_PARSE)
    metrics = evaluate(run.predictions, corpus)
    assert metrics.yn_accuracy == 1.0
    assert metrics.fr_exact_accuracy == 1.0

    gold_yn = {
        q.id: q.gold for s in corpus.stories for q in s.questions if q.mode == "YN"
    }
    corrupted = run_pipeline(
        corpus, PipelineMode.FULL_PARSE, dropout=0.05, dropout_seed=ACCEPTANCE_SEED
    )
    false_no = false_yes = 0
    for prediction in corrupted.predictions:
        gold = gold_yn.get(prediction.question_id)
        if gold is None or prediction.answer == gold:
            continue
        if gold == YES and prediction.answer == NO:
            false_no += 1
        else:
            false_yes += 1
    assert false_yes == 0
    assert false_no > 0
    verdict(
        3,
        f"full-parse mode: YN {metrics.yn_accuracy:.4f}, FR "
        f"{metrics.fr_exact_accuracy:.4f}; 5% dropout caused {false_no} false-No "
        f"and {false_yes} false-Yes answers",
    )


def test_criterion_04_soundness_against_geometry():
    started = time.perf_counter()
    configs = [
        GenConfig(seed=0),
        GenConfig(seed=0, num_blocks=(1, 2), objects_per_block=(1, 3)),
        GenConfig(seed=0, num_blocks=(3, 4), objects_per_block=(2, 3), density=0.7),
        GenConfig(seed=0, density=1.0, near_threshold=1, far_threshold=4),
    ]
    scenes = 0
    checked = 0
    for index in range(1000):
        config = configs[index % len(configs)]
        rng = random.Random(index * 31 + 7)
        scene = generate_scene(config, rng)
        facts = select_stated_facts(scene, config, rng)
        result = closure([stated(s, rel, o) for rel, s, o in facts])
        assert result.contradiction is None
        for relation, subject, obj in result.positives:
            assert subject != obj
            assert scene.truth(subject, relation, obj), (
                index,
                relation,
                subject,
                obj,
            )
            checked += 1
        for relation, subject, obj in result.negatives:
            if subject != obj:
                assert not scene.truth(subject, relation, obj), (
                    index,
                    relation,
                    subject,
                    obj,
                )
                checked += 1
        scenes += 1
    elapsed = time.perf_counter() - started
    assert elapsed < 120.0
    verdict(
        4,
        f"{scenes} scenes, {checked} derived facts checked against the oracle, "
        f"0 violations in {elapsed:.1f}s (< 120s)",
    )


def test_criterion_05_oracle_equivalence():
    started = time.perf_counter()
    rng = random.Random(1234)
    relations = list(R)
    instances = 0
    for _ in range(200):
        n_entities = rng.randint(3, 8)
        n_facts = rng.randint(3, 12)
        facts = []
        for index in range(n_facts):
            subject = rng.randrange(n_entities)
            obj = rng.randrange(n_entities)
            while obj == subject:
                obj = rng.randrange(n_entities)
            facts.append(stated(subject, rng.choice(relations), obj, index))
        result = closure(facts)
        oracle_pos, oracle_neg = naive_closure(facts)
        assert set(result.positives) == oracle_pos
        assert set(result.negatives) == oracle_neg
        instances += 1
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0
    verdict(
        5,
        f"{instances} random instances match exhaustive naive iteration exactly "
        f"in {elapsed:.1f}s (< 30s)",
    )


def test_criterion_06_order_independence():
    facts = [
        stated(0, R.NTPPI, 2, 0),
        stated(0, R.NTPPI, 3, 0),
        stated(1, R.NTPPI, 4, 1),
        stated(0, R.LEFT, 1, 2),
        stated(2, R.BELOW, 3, 3),
        stated(2, R.NEAR, 3, 4),
        stated(3, R.FRONT, 2, 5),
        stated(0, R.FAR, 1, 6),
        stated(2, R.EC, 3, 7),
    ]
    reference = json.dumps(closure(facts).to_json_dict(), sort_keys=True)
    rng = random.Random(99)
    for _ in range(100):
        shuffled = list(facts)
        rng.shuffle(shuffled)
        serialized = json.dumps(closure(shuffled).to_json_dict(), sort_keys=True)
        assert serialized == reference
    verdict(6, "100 stated-order permutations produced byte-identical closures")


def test_criterion_07_zero_training_on_held_out_corpus():
    held_out = generate_dataset(GenConfig(seed=ACCEPTANCE_SEED + 1), 100)
    run = run_pipeline(held_out, PipelineMode.FULL_PARSE)
    metrics = evaluate(run.predictions, held_out)
    assert metrics.yn_accuracy == 1.0
    assert metrics.fr_exact_accuracy == 1.0
    verdict(
        7,
        "full-parse mode scored 100% on a fresh held-out corpus with no fitted "
        "parameters anywhere in the pipeline",
    )


def test_criterion_08_extra_question_balance():
    relations = [R.FRONT, R.LEFT, R.NEAR, R.NTPPI, R.ABOVE, R.EC]
    for n in range(0, 24):
        triplets = [
            GoldTriplet(f"a thing{i}", "x", f"a widget{i}", relations[i % len(relations)], i)
            for i in range(n)
        ]
        questions = synthesize_extra_questions(triplets)
        yes = sum(1 for q in questions if q.gold == YES)
        no = sum(1 for q in questions if q.gold == NO)
        assert yes == (n + 1) // 2, n
        assert no == n // 2, n
    verdict(8, "sizes 0..23 all emit ceil(n/2) gold-Yes and floor(n/2) gold-No")


_STRESS_SCRIPT = """
import json, resource, sys, time
from spatialqa.engine import Fact, Stated, closure
from spatialqa.relations import Relation

out = {}
for n in (64, 128, 256, 512):
    best = None
    for _ in range(2):
        facts = [Fact(i, Relation.LEFT, i + 1, provenance=Stated(i)) for i in range(n - 1)]
        t0 = time.perf_counter()
        result = closure(facts)
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    out[str(n)] = best
out["left_512"] = sum(1 for (r, _, _) in result.positives if r is Relation.LEFT)
out["positives_512"] = len(result.positives)
out["maxrss_kib"] = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
print(json.dumps(out))
"""


def test_criterion_09_transitive_closure_stress():
    # a fresh interpreter so the memory bound measures this closure, not
    # whatever the rest of the suite left resident
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-c", _STRESS_SCRIPT], capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr
    stats = json.loads(proc.stdout)

    expected_left = 512 * 511 // 2
    assert stats["left_512"] == expected_left
    assert stats["positives_512"] == 2 * expected_left  # plus the RIGHT inverses
    assert stats["512"] < 5.0

    rss_gib = stats["maxrss_kib"] / 2**20
    assert rss_gib < 1.0

    times = {n: stats[str(n)] for n in (64, 128, 256, 512)}
    xs = [math.log(n) for n in times]
    ys = [math.log(t) for t in times.values()]
    mean_x = sum(xs) / len(xs)
    mean_y = sum(ys) / len(ys)
    slope = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys)) / sum(
        (x - mean_x) ** 2 for x in xs
    )
    assert slope <= 3.2
    verdict(
        9,
        f"512-entity chain saturated ({stats['left_512']} LEFT facts) in "
        f"{stats['512']:.2f}s (< 5s), peak RSS {rss_gib:.2f}GiB (< 1GiB), "
        f"log-log slope {slope:.2f} (<= 3.2)",
    )


def test_criterion_10_quantifier_semantics():
    config = GenConfig(seed=ACCEPTANCE_SEED + 2, quantified_per_story=2, yn_per_story=4)
    checked = 0
    index = 0
    while checked < 200 and index < 400:
        build = build_story(config, index)
        index += 1
        record = build.record()
        from spatialqa.generator import Dataset

        dataset = Dataset(stories=[record], config=config, seed=config.seed)
        predictions = {
            p.question_id: p.answer
            for p in run_pipeline(dataset, PipelineMode.FULL_PARSE).predictions
        }
        geometry = build.render.geometry
        for question in build.questions:
            if question.meta.get("kind") != "yn_quantified":
                continue
            relation = R[question.meta["relation"]]
            t_ids = question.meta["trajector_ids"]
            l_ids = question.meta["landmark_ids"]

            def inner(t):
                landmarks = [l for l in l_ids if l != t]
                values = [geometry.truth(t, relation, l) for l in landmarks]
                return all(values) if question.meta["lq"] == "All" else any(values)

            outcomes = [inner(t) for t in t_ids]
            oracle = (
                all(outcomes) if question.meta["tq"] == "All" else any(outcomes)
            )
            expected = YES if oracle else NO
            assert question.gold == expected, question.text
            assert predictions[question.id] == expected, question.text
            checked += 1
    assert checked >= 200
    verdict(
        10,
        f"{checked} quantified questions match brute-force forall/exists "
        "oracle evaluation exactly",
    )
