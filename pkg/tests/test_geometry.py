import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spatialqa.engine import (
    Fact,
    apply_combination,
    apply_inverse,
    apply_not,
    apply_symmetry,
    apply_transitivity,
)
from spatialqa.errors import DataError
from spatialqa.generator import GenConfig, generate_scene
from spatialqa.geometry import Box, Scene, SceneEntity, box_gap, relation_holds
from spatialqa.relations import RCC_NON_PP, PROPER_PART, Relation as R, reverse

RCC8 = sorted(RCC_NON_PP | PROPER_PART, key=lambda r: r.name)


def cube(lo, hi):
    return Box((lo, hi), (lo, hi), (lo, hi))


def holds(a, b, relation, near=2, far=5):
    return relation_holds(a, b, relation, near, far)


class TestHandCases:
    def test_separated_cubes(self):
        a, b = cube(0, 2), cube(5, 7)
        assert holds(a, b, R.LEFT)
        assert holds(a, b, R.DC)
        assert holds(a, b, R.FAR, far=2)
        assert not holds(a, b, R.RIGHT)
        assert not holds(a, b, R.NEAR)

    def test_strict_containment(self):
        inner, outer = cube(1, 2), cube(0, 3)
        assert holds(inner, outer, R.NTPP)
        assert holds(outer, inner, R.NTPPI)
        assert not holds(inner, outer, R.TPP)

    def test_identical_boxes(self):
        a = cube(0, 3)
        assert holds(a, a, R.EQ)
        assert not holds(a, a, R.NTPP)
        assert not holds(a, a, R.TPP)
        assert not holds(a, a, R.PO)

    def test_tangential_proper_part(self):
        inner = Box((0, 1), (1, 2), (1, 2))  # shares outer's x-low face
        outer = cube(0, 3)
        assert holds(inner, outer, R.TPP)
        assert holds(outer, inner, R.TPPI)
        assert not holds(inner, outer, R.NTPP)

    def test_external_connection(self):
        a = Box((0, 2), (0, 2), (0, 2))
        b = Box((2, 4), (0, 2), (0, 2))
        assert holds(a, b, R.EC)
        assert not holds(a, b, R.DC)
        assert not holds(a, b, R.LEFT)  # touching, not strictly separated
        assert not holds(a, b, R.NEAR)  # near requires disconnection

    def test_partial_overlap(self):
        a = Box((0, 2), (0, 2), (0, 2))
        b = Box((1, 3), (0, 2), (0, 2))
        assert holds(a, b, R.PO)
        assert not holds(a, b, R.EC)

    def test_near_far_band(self):
        a = cube(0, 2)
        near_b = Box((3, 4), (0, 2), (0, 2))  # gap 1
        mid_b = Box((6, 7), (0, 2), (0, 2))  # gap 4
        far_b = Box((9, 10), (0, 2), (0, 2))  # gap 7
        assert holds(a, near_b, R.NEAR) and not holds(a, near_b, R.FAR)
        assert not holds(a, mid_b, R.NEAR) and not holds(a, mid_b, R.FAR)
        assert holds(a, far_b, R.FAR) and not holds(a, far_b, R.NEAR)

    def test_gap_is_smallest_positive_axis_separation(self):
        a = cube(0, 2)
        b = Box((5, 7), (3, 5), (0, 2))  # x gap 3, y gap 1, z overlap
        assert box_gap(a, b) == 1
        assert box_gap(a, Box((1, 3), (0, 2), (0, 2))) == 0

    def test_degenerate_interval_rejected(self):
        with pytest.raises(DataError):
            Box((2, 1), (0, 1), (0, 1))


int_boxes = st.builds(
    Box,
    *(
        st.tuples(st.integers(0, 8), st.integers(0, 8)).map(
            lambda t: (min(t), max(t) + 1)
        )
        for _ in range(3)
    ),
)


@settings(max_examples=300, deadline=None)
@given(int_boxes, int_boxes)
def test_rcc8_exactly_one_holds(a, b):
    matching = [r for r in RCC8 if holds(a, b, r)]
    assert len(matching) == 1


@settings(max_examples=300, deadline=None)
@given(int_boxes, int_boxes)
def test_converse_consistency(a, b):
    for relation in R:
        assert holds(a, b, relation) == holds(b, a, reverse(relation))


@settings(max_examples=300, deadline=None)
@given(int_boxes, int_boxes)
def test_near_far_exclusive(a, b):
    assert not (holds(a, b, R.NEAR) and holds(a, b, R.FAR))


@settings(max_examples=200, deadline=None)
@given(int_boxes, int_boxes)
def test_not_rule_semantics(a, b):
    # a geometric truth never coexists with its converse on the same pair
    for relation in R.LEFT, R.BELOW, R.BEHIND, R.TPP, R.NTPP:
        if holds(a, b, relation):
            assert not holds(a, b, reverse(relation))


class TestSceneInvariants:
    @pytest.mark.parametrize("seed", range(12))
    def test_generated_scenes_validate(self, seed):
        scene = generate_scene(GenConfig(seed=seed), random.Random(seed))
        scene.validate()
        blocks = [e for e in scene.entities if e.is_block]
        objects = [e for e in scene.entities if not e.is_block]
        assert blocks and objects
        for obj in objects:
            assert scene.truth(obj.id, R.NTPP, obj.parent)

    def test_same_seed_same_scene(self):
        a = generate_scene(GenConfig(seed=5), random.Random(99))
        b = generate_scene(GenConfig(seed=5), random.Random(99))
        assert [e.box for e in a.entities] == [e.box for e in b.entities]

    def test_invalid_scene_rejected(self):
        entities = [
            SceneEntity(0, {"block": "A"}, cube(0, 4)),
            SceneEntity(1, {"noun": "circle"}, cube(2, 9), parent=0),
        ]
        with pytest.raises(DataError, match="escapes"):
            Scene(entities).validate()


def _scene_truths(scene):
    ids = [e.id for e in scene.entities]
    truths = set()
    for a in ids:
        for b in ids:
            if a == b:
                continue
            for relation in R:
                if scene.truth(a, relation, b):
                    truths.add((relation, a, b))
    return truths


@pytest.mark.parametrize("seed", range(8))
def test_rule_schemas_sound_over_scene_truths(seed):
    """Every rule instantiation over geometric truths concludes a geometric truth."""
    scene = generate_scene(GenConfig(seed=seed), random.Random(seed * 7 + 1))
    truths = _scene_truths(scene)
    facts = [Fact(s, r, o) for (r, s, o) in truths]

    for fact in facts:
        for derived in (apply_inverse(fact), apply_symmetry(fact)):
            if derived is not None:
                assert (derived.relation, derived.subject, derived.object) in truths
        negated = apply_not(fact)
        if negated is not None:
            assert (negated.relation, negated.subject, negated.object) not in truths

    pp = [f for f in facts if f.relation in (R.TPP, R.NTPP)]
    dirs = [f for f in facts if f.relation in
            (R.LEFT, R.RIGHT, R.BELOW, R.ABOVE, R.BEHIND, R.FRONT)]
    transitive = [f for f in facts if f.relation in
                  (R.LEFT, R.RIGHT, R.BELOW, R.ABOVE, R.BEHIND, R.FRONT,
                   R.TPP, R.NTPP, R.TPPI, R.NTPPI)]
    for f1 in transitive:
        for f2 in transitive:
            derived = apply_transitivity(f1, f2)
            if derived is not None and derived.subject != derived.object:
                assert (derived.relation, derived.subject, derived.object) in truths
    for f1 in pp:
        for f2 in dirs:
            for f3 in pp:
                derived = apply_combination(f1, f2, f3)
                if derived is not None and derived.subject != derived.object:
                    assert (derived.relation, derived.subject, derived.object) in truths
