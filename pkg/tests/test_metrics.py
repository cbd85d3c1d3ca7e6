import pytest

from spatialqa.answering import NO, YES
from spatialqa.errors import DataError
from spatialqa.generator import Dataset, GenConfig, QuestionRecord, StoryRecord
from spatialqa.metrics import evaluate
from spatialqa.pipeline import Prediction


def make_dataset(questions):
    story = StoryRecord(
        id="s0", sentences=[], gold_triplets=[], gold_coref=[], questions=questions
    )
    return Dataset(stories=[story], config=GenConfig(), seed=0)


def yn(qid, gold, hops=1):
    return QuestionRecord(id=qid, mode="YN", text="", gold=gold, hops=hops)


def fr(qid, gold, hops=1, candidates=("LEFT", "RIGHT", "NEAR")):
    return QuestionRecord(
        id=qid, mode="FR", text="", gold=gold, hops=hops, candidates=candidates
    )


def test_all_correct_gives_perfect_scores():
    dataset = make_dataset([yn("q1", YES), yn("q2", NO), fr("q3", ["LEFT"])])
    predictions = [
        Prediction("q1", YES),
        Prediction("q2", NO),
        Prediction("q3", ["LEFT"]),
    ]
    metrics = evaluate(predictions, dataset)
    assert metrics.yn_accuracy == 1.0
    assert metrics.fr_exact_accuracy == 1.0
    assert metrics.macro_f1 == 1.0
    assert metrics.counts == {
        "yn_gold_yes": 1,
        "yn_gold_no": 1,
        "yn_pred_yes": 1,
        "yn_pred_no": 1,
    }


def test_empty_fr_predictions_zero_recall_convention():
    dataset = make_dataset([fr("q1", ["LEFT", "NEAR"]), fr("q2", ["RIGHT"])])
    predictions = [Prediction("q1", []), Prediction("q2", [])]
    metrics = evaluate(predictions, dataset)
    assert metrics.fr_exact_accuracy == 0.0
    for score in metrics.per_relation.values():
        assert score.recall == 0.0
        assert score.precision == 0.0
    assert metrics.macro_f1 == 0.0


def test_majority_no_on_balanced_set():
    questions = [yn(f"q{i}", YES if i % 2 else NO) for i in range(10)]
    predictions = [Prediction(f"q{i}", NO) for i in range(10)]
    metrics = evaluate(predictions, make_dataset(questions))
    assert metrics.yn_accuracy == 0.5


def test_spurious_fr_prediction_costs_precision():
    dataset = make_dataset([fr("q1", ["LEFT"])])
    metrics = evaluate([Prediction("q1", ["LEFT", "NEAR"])], dataset)
    assert metrics.fr_exact_accuracy == 0.0
    assert metrics.per_relation["LEFT"].f1 == 1.0
    assert metrics.per_relation["NEAR"].precision == 0.0
    assert metrics.per_relation["NEAR"].support == 0
    # macro-F1 averages only relations present in gold
    assert metrics.macro_f1 == 1.0


def test_missing_prediction_raises():
    dataset = make_dataset([yn("q1", YES), yn("q2", NO)])
    with pytest.raises(DataError, match="missing"):
        evaluate([Prediction("q1", YES)], dataset)


def test_abstained_counts_and_scores_as_answered():
    dataset = make_dataset([yn("q1", NO), yn("q2", YES)])
    predictions = [
        Prediction("q1", NO, abstained=True),
        Prediction("q2", NO, abstained=True),
    ]
    metrics = evaluate(predictions, dataset)
    assert metrics.abstained == 2
    assert metrics.yn_accuracy == 0.5  # abstentions score as plain No answers


def test_by_hops_breakdown():
    dataset = make_dataset(
        [yn("q1", YES, hops=1), yn("q2", YES, hops=3), fr("q3", ["LEFT"], hops=3)]
    )
    predictions = [
        Prediction("q1", YES),
        Prediction("q2", NO),
        Prediction("q3", ["LEFT"]),
    ]
    metrics = evaluate(predictions, dataset, by_hops=True)
    assert metrics.by_hops[1]["yn_accuracy"] == 1.0
    assert metrics.by_hops[3]["yn_accuracy"] == 0.0
    assert metrics.by_hops[3]["fr_exact_accuracy"] == 1.0
    assert metrics.by_hops[1]["fr_count"] == 0


def test_wrong_answer_type_rejected():
    dataset = make_dataset([yn("q1", YES)])
    with pytest.raises(DataError, match="not Yes/No"):
        evaluate([Prediction("q1", ["LEFT"])], dataset)
