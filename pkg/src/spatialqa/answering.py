"""Answer generation: quantified YN evaluation and FR candidate filtering.

Both the solver and the benchmark generator evaluate the same quantified
formula, differing only in the pair predicate (closure-derived truth for the
solver, geometric truth for gold answers), so the semantics live here once.
Unknown collapses to No at this layer; the engine itself stays three-valued.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

from .coref import Quantifier
from .engine import ClosureResult, TruthValue
from .relations import CANONICAL_ORDER, Relation

YES = "Yes"
NO = "No"

PairPredicate = Callable[[int, int], bool]


def evaluate_quantified(
    trajector_quantifier: str,
    trajector_ids: Sequence[int],
    landmark_quantifier: str,
    landmark_ids: Sequence[int],
    holds: PairPredicate,
) -> bool:
    """Evaluate Q1 t. Q2 l. holds(t, l) with All = forall, Any/Unique = exists.

    Pairs with t == l are excluded from the inner domain, so a group never
    quantifies over its own members reflexively.
    """

    def inner(t: int) -> bool:
        landmarks = [l for l in landmark_ids if l != t]
        if landmark_quantifier == Quantifier.ALL:
            return all(holds(t, l) for l in landmarks)
        return any(holds(t, l) for l in landmarks)

    if trajector_quantifier == Quantifier.ALL:
        return all(inner(t) for t in trajector_ids)
    return any(inner(t) for t in trajector_ids)


def answer_yn(
    result: ClosureResult,
    relation: Relation,
    trajector_quantifier: str,
    trajector_ids: Sequence[int],
    landmark_quantifier: str,
    landmark_ids: Sequence[int],
) -> str:
    """Yes when the quantified query is derivably true; False and Unknown are No."""

    def holds(t: int, l: int) -> bool:
        return result.query(t, relation, l) is TruthValue.TRUE

    truth = evaluate_quantified(
        trajector_quantifier, trajector_ids, landmark_quantifier, landmark_ids, holds
    )
    return YES if truth else NO


def answer_fr(
    result: ClosureResult,
    pair: tuple[int, int],
    candidates: Iterable[Relation],
) -> list[Relation]:
    """Every candidate relation derivably true of the pair, in canonical order."""
    subject, obj = pair
    wanted = set(candidates)
    return [
        r
        for r in CANONICAL_ORDER
        if r in wanted and result.query(subject, r, obj) is TruthValue.TRUE
    ]
