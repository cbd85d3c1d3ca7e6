import json

import pytest

from spatialqa.engine import (
    DerivationNode,
    Fact,
    Stated,
    TruthValue,
    closure,
    replay,
)
from spatialqa.errors import CapacityError, ContradictionError, DataError
from spatialqa.relations import Relation as R


def stated(subject, relation, obj, sentence=0):
    return Fact(subject, relation, obj, provenance=Stated(sentence))


class TestClosureBasics:
    def test_empty(self):
        result = closure([])
        assert not result.positives
        assert not result.negatives
        assert result.contradiction is None

    def test_single_front_fact(self):
        # a single stated FRONT yields its inverse plus the two negations
        result = closure([stated(0, R.FRONT, 1)])
        assert set(result.positives) == {(R.FRONT, 0, 1), (R.BEHIND, 1, 0)}
        assert set(result.negatives) == {(R.BEHIND, 0, 1), (R.FRONT, 1, 0)}
        assert result.query(1, R.BEHIND, 0) is TruthValue.TRUE
        assert result.query(1, R.FRONT, 0) is TruthValue.FALSE
        assert result.query(0, R.NEAR, 1) is TruthValue.UNKNOWN

    def test_left_chain_of_four(self):
        result = closure([stated(i, R.LEFT, i + 1, i) for i in range(3)])
        for pair in ((0, 2), (0, 3), (1, 3)):
            assert (R.LEFT, *pair) in result.positives
        assert len(result.positives) == 12  # 6 LEFT + 6 RIGHT

    def test_symmetry_closure(self):
        result = closure([stated(0, R.NEAR, 1)])
        assert (R.NEAR, 1, 0) in result.positives
        assert not result.negatives

    def test_combination_closure(self):
        result = closure(
            [
                stated(0, R.NTPPI, 2),  # block 0 has cup 2
                stated(0, R.LEFT, 1),
                stated(1, R.NTPPI, 3),  # block 1 has plate 3
            ]
        )
        assert (R.LEFT, 2, 3) in result.positives
        assert result.query(3, R.RIGHT, 2) is TruthValue.TRUE

    def test_depths(self):
        result = closure([stated(i, R.LEFT, i + 1, i) for i in range(3)])
        assert result.depth(0, R.LEFT, 1) == 1
        assert result.depth(0, R.LEFT, 2) == 2
        assert result.depth(0, R.LEFT, 3) == 3
        assert result.depth(1, R.RIGHT, 0) == 2  # inverse of a stated fact


class TestStatedValidation:
    def test_rejects_negated(self):
        with pytest.raises(DataError, match="positive"):
            closure([Fact(0, R.LEFT, 1, negated=True)])

    def test_rejects_self_relation(self):
        with pytest.raises(DataError, match="distinct"):
            closure([stated(3, R.LEFT, 3)])

    def test_rejects_negative_ids(self):
        with pytest.raises(DataError, match="non-negative"):
            closure([stated(-1, R.LEFT, 0)])

    def test_duplicate_stated_keeps_earliest_sentence(self):
        result = closure([stated(0, R.LEFT, 1, 4), stated(0, R.LEFT, 1, 2)])
        assert result.positives[(R.LEFT, 0, 1)][3] == 2
        assert result.stated_count == 1


class TestContradiction:
    def test_detected_and_total(self):
        result = closure([stated(0, R.LEFT, 1), stated(0, R.RIGHT, 1)])
        assert result.contradiction is not None
        positive, negative = result.contradiction
        assert positive.key() == negative.key()
        assert not positive.negated and negative.negated

    def test_first_contradiction_is_canonical(self):
        facts = [
            stated(0, R.LEFT, 1),
            stated(0, R.RIGHT, 1),
            stated(2, R.BELOW, 3),
            stated(2, R.ABOVE, 3),
        ]
        result = closure(facts)
        # LEFT sorts before BELOW-derived conflicts in canonical order
        assert result.contradiction[0].relation in (R.LEFT, R.RIGHT)

    def test_query_raises_on_contradiction(self):
        result = closure([stated(0, R.LEFT, 1), stated(0, R.RIGHT, 1)])
        with pytest.raises(ContradictionError):
            result.query(0, R.LEFT, 1)

    def test_cyclic_input_contradicts(self):
        result = closure([stated(0, R.LEFT, 1), stated(1, R.LEFT, 0)])
        assert result.contradiction is not None


def test_capacity_bound():
    facts = [stated(i, R.LEFT, i + 1, i) for i in range(60)]
    with pytest.raises(CapacityError):
        closure(facts, max_facts=100)


class TestExplain:
    def test_stated_fact_is_single_leaf(self):
        result = closure([stated(0, R.FRONT, 1, 7)])
        node = result.explain(0, R.FRONT, 1)
        assert node.rule is None
        assert node.children == ()
        assert node.sentence_index == 7
        assert node.depth == 1

    def test_inverse_derivation(self):
        result = closure([stated(0, R.FRONT, 1)])
        node = result.explain(1, R.BEHIND, 0)
        assert node.rule == "Inverse"
        assert [leaf.fact.key() for leaf in node.leaves()] == [(R.FRONT, 0, 1)]

    def test_chain_tree_shape(self):
        result = closure([stated(i, R.LEFT, i + 1, i) for i in range(3)])
        node = result.explain(0, R.LEFT, 3)
        rules = _collect_rules(node)
        assert rules.count("Transitivity") == 2
        leaves = node.leaves()
        assert len(leaves) == 3
        assert all(leaf.rule is None for leaf in leaves)

    def test_negative_explanation(self):
        result = closure([stated(0, R.LEFT, 1)])
        node = result.explain(0, R.RIGHT, 1, negated=True)
        assert node.rule == "Not"
        assert node.fact.negated

    def test_missing_fact_raises(self):
        result = closure([stated(0, R.LEFT, 1)])
        with pytest.raises(KeyError):
            result.explain(0, R.NEAR, 1)

    def test_replay_returns_root_fact(self):
        result = closure(
            [
                stated(0, R.NTPPI, 2),
                stated(0, R.LEFT, 1),
                stated(1, R.NTPPI, 3),
            ]
        )
        node = result.explain(2, R.LEFT, 3)
        assert node.rule == "Combination"
        root = replay(node)
        assert root.key() == (R.LEFT, 2, 3)

    def test_replay_rejects_tampered_tree(self):
        result = closure([stated(0, R.FRONT, 1)])
        node = result.explain(1, R.BEHIND, 0)
        forged = DerivationNode(
            fact=Fact(1, R.LEFT, 0), rule="Inverse", children=node.children
        )
        with pytest.raises(DataError):
            replay(forged)


def test_serialization_is_canonical_and_stable():
    facts = [stated(0, R.LEFT, 1), stated(1, R.NTPP, 2), stated(0, R.NEAR, 2)]
    blob = closure(facts).to_json_dict()
    assert set(blob) == {"positives", "negatives", "contradiction", "traces"}
    assert all(trace["depth"] >= 1 for trace in blob["traces"].values())
    text = json.dumps(blob, sort_keys=True)
    again = json.dumps(closure(list(reversed(facts))).to_json_dict(), sort_keys=True)
    assert text == again


def _collect_rules(node):
    rules = [] if node.rule is None else [node.rule]
    for child in node.children:
        rules.extend(_collect_rules(child))
    return rules
