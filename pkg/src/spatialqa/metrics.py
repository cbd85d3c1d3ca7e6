"""Scoring: YN accuracy, FR exact-match accuracy, per-relation P/R/F1.

YN questions score on exact answer match; abstentions count as No. FR
questions score both as exact set match and through per-relation precision
and recall over set membership, with macro-F1 averaged over the relations
that appear in any gold answer. The optional hop breakdown slices both
accuracies by the annotated derivation depth.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .answering import YES
from .errors import DataError
from .generator import Dataset
from .pipeline import Prediction
from .relations import CANONICAL_ORDER


@dataclass
class RelationScore:
    precision: float
    recall: float
    f1: float
    support: int
    predicted: int

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "support": self.support,
            "predicted": self.predicted,
        }


@dataclass
class Metrics:
    yn_accuracy: Optional[float]
    fr_exact_accuracy: Optional[float]
    macro_f1: Optional[float]
    per_relation: dict[str, RelationScore]
    counts: dict[str, int]
    abstained: int
    mean_runtime_s: Optional[float] = None
    by_hops: Optional[dict[int, dict]] = None

    def to_dict(self) -> dict:
        out = {
            "yn_accuracy": self.yn_accuracy,
            "fr_exact_accuracy": self.fr_exact_accuracy,
            "macro_f1": self.macro_f1,
            "per_relation": {name: s.to_dict() for name, s in self.per_relation.items()},
            "counts": dict(self.counts),
            "abstained": self.abstained,
            "mean_runtime_s": self.mean_runtime_s,
        }
        if self.by_hops is not None:
            out["by_hops"] = {str(h): dict(v) for h, v in sorted(self.by_hops.items())}
        return out


def evaluate(
    predictions: list[Prediction],
    dataset: Dataset,
    *,
    by_hops: bool = False,
) -> Metrics:
    """Score predictions against gold; raises DataError on missing ids."""
    by_id = {p.question_id: p for p in predictions}

    questions = [(s, q) for s in dataset.stories for q in s.questions]
    missing = [q.id for _, q in questions if q.id not in by_id]
    if missing:
        raise DataError(
            f"predictions missing for {len(missing)} question(s), first: {missing[0]}"
        )

    yn_total = yn_correct = 0
    fr_total = fr_correct = 0
    abstained = 0
    counts = {"yn_gold_yes": 0, "yn_gold_no": 0, "yn_pred_yes": 0, "yn_pred_no": 0}
    tp: dict[str, int] = {}
    fp: dict[str, int] = {}
    fn: dict[str, int] = {}
    hop_stats: dict[int, dict[str, int]] = {}
    runtimes: list[float] = []

    for _, question in questions:
        prediction = by_id[question.id]
        if prediction.abstained:
            abstained += 1
        if prediction.runtime_s is not None:
            runtimes.append(prediction.runtime_s)
        stats = hop_stats.setdefault(
            question.hops,
            {"yn_total": 0, "yn_correct": 0, "fr_total": 0, "fr_correct": 0},
        )
        if question.mode == "YN":
            yn_total += 1
            stats["yn_total"] += 1
            answer = prediction.answer
            if not isinstance(answer, str):
                raise DataError(f"YN prediction for {question.id} is not Yes/No")
            counts["yn_gold_yes" if question.gold == YES else "yn_gold_no"] += 1
            counts["yn_pred_yes" if answer == YES else "yn_pred_no"] += 1
            if answer == question.gold:
                yn_correct += 1
                stats["yn_correct"] += 1
        else:
            fr_total += 1
            stats["fr_total"] += 1
            answer = prediction.answer
            if not isinstance(answer, list):
                raise DataError(f"FR prediction for {question.id} is not a relation list")
            gold_set = set(question.gold)
            pred_set = set(answer)
            if gold_set == pred_set:
                fr_correct += 1
                stats["fr_correct"] += 1
            for name in pred_set & gold_set:
                tp[name] = tp.get(name, 0) + 1
            for name in pred_set - gold_set:
                fp[name] = fp.get(name, 0) + 1
            for name in gold_set - pred_set:
                fn[name] = fn.get(name, 0) + 1

    per_relation: dict[str, RelationScore] = {}
    for relation in CANONICAL_ORDER:
        name = relation.name
        n_tp, n_fp, n_fn = tp.get(name, 0), fp.get(name, 0), fn.get(name, 0)
        support = n_tp + n_fn
        predicted = n_tp + n_fp
        if support == 0 and predicted == 0:
            continue
        precision = n_tp / predicted if predicted else 0.0
        recall = n_tp / support if support else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_relation[name] = RelationScore(precision, recall, f1, support, predicted)

    with_support = [s.f1 for s in per_relation.values() if s.support > 0]
    macro_f1 = sum(with_support) / len(with_support) if with_support else None

    by_hops_out = None
    if by_hops:
        by_hops_out = {}
        for hops, stats in sorted(hop_stats.items()):
            entry: dict = {"yn_count": stats["yn_total"], "fr_count": stats["fr_total"]}
            entry["yn_accuracy"] = (
                stats["yn_correct"] / stats["yn_total"] if stats["yn_total"] else None
            )
            entry["fr_exact_accuracy"] = (
                stats["fr_correct"] / stats["fr_total"] if stats["fr_total"] else None
            )
            by_hops_out[hops] = entry

    return Metrics(
        yn_accuracy=yn_correct / yn_total if yn_total else None,
        fr_exact_accuracy=fr_correct / fr_total if fr_total else None,
        macro_f1=macro_f1,
        per_relation=per_relation,
        counts=counts,
        abstained=abstained,
        mean_runtime_s=sum(runtimes) / len(runtimes) if runtimes else None,
        by_hops=by_hops_out,
    )
