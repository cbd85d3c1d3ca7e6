"""Axis-aligned box geometry and the brute-force relation oracle.

Every entity is a closed 3-D box. Directional relations use strict interval
separation on the matching axis (LEFT means the whole box lies at smaller x
with a positive gap), which keeps transitivity and containment propagation
sound. Distance relations compare the smallest positive per-axis gap between
disconnected boxes against the scene's near/far thresholds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import DataError
from .relations import Relation

Interval = tuple[float, float]


@dataclass(frozen=True)
class Box:
    """Closed box given by one (lo, hi) interval per axis, lo <= hi."""

    x: Interval
    y: Interval
    z: Interval

    def __post_init__(self):
        for lo, hi in (self.x, self.y, self.z):
            if not (lo <= hi):
                raise DataError(f"degenerate interval ({lo}, {hi})")

    @property
    def axes(self) -> tuple[Interval, Interval, Interval]:
        return (self.x, self.y, self.z)


def contains(outer: Box, inner: Box) -> bool:
    """Closed containment: inner lies within outer (boundaries may touch)."""
    return all(o[0] <= i[0] and i[1] <= o[1] for o, i in zip(outer.axes, inner.axes))


def strictly_contains(outer: Box, inner: Box) -> bool:
    return all(o[0] < i[0] and i[1] < o[1] for o, i in zip(outer.axes, inner.axes))


def interiors_overlap(a: Box, b: Box) -> bool:
    return all(max(p[0], q[0]) < min(p[1], q[1]) for p, q in zip(a.axes, b.axes))


def closed_intersect(a: Box, b: Box) -> bool:
    return all(max(p[0], q[0]) <= min(p[1], q[1]) for p, q in zip(a.axes, b.axes))


def box_gap(a: Box, b: Box) -> float:
    """Smallest positive per-axis separation; 0 when the boxes touch or overlap."""
    gaps = [max(p[0], q[0]) - min(p[1], q[1]) for p, q in zip(a.axes, b.axes)]
    positive = [g for g in gaps if g > 0]
    return min(positive) if positive else 0


def _axis_before(a: Interval, b: Interval) -> bool:
    return a[1] < b[0]


def relation_holds(
    a: Box, b: Box, relation: Relation, near_threshold: float, far_threshold: float
) -> bool:
    """Evaluate one relation directly on two boxes."""
    if relation is Relation.LEFT:
        return _axis_before(a.x, b.x)
    if relation is Relation.RIGHT:
        return _axis_before(b.x, a.x)
    if relation is Relation.BELOW:
        return _axis_before(a.y, b.y)
    if relation is Relation.ABOVE:
        return _axis_before(b.y, a.y)
    if relation is Relation.BEHIND:
        return _axis_before(a.z, b.z)
    if relation is Relation.FRONT:
        return _axis_before(b.z, a.z)
    if relation is Relation.EQ:
        return a == b
    if relation is Relation.NTPP:
        return strictly_contains(b, a)
    if relation is Relation.NTPPI:
        return strictly_contains(a, b)
    if relation is Relation.TPP:
        return contains(b, a) and a != b and not strictly_contains(b, a)
    if relation is Relation.TPPI:
        return contains(a, b) and a != b and not strictly_contains(a, b)
    if relation is Relation.PO:
        return interiors_overlap(a, b) and not contains(a, b) and not contains(b, a)
    if relation is Relation.EC:
        return closed_intersect(a, b) and not interiors_overlap(a, b)
    if relation is Relation.DC:
        return not closed_intersect(a, b)
    if relation is Relation.NEAR:
        return not closed_intersect(a, b) and box_gap(a, b) <= near_threshold
    if relation is Relation.FAR:
        return not closed_intersect(a, b) and box_gap(a, b) >= far_threshold
    raise DataError(f"unknown relation {relation!r}")


@dataclass
class SceneEntity:
    id: int
    attributes: dict[str, str]
    box: Box
    parent: Optional[int] = None

    @property
    def is_block(self) -> bool:
        return "block" in self.attributes


@dataclass
class Scene:
    """Geometric ground truth: entities plus a containment hierarchy."""

    entities: list[SceneEntity]
    near_threshold: float = 2
    far_threshold: float = 5

    def __post_init__(self):
        if not (self.near_threshold < self.far_threshold):
            raise DataError("near threshold must be below far threshold")
        for index, entity in enumerate(self.entities):
            if entity.id != index:
                raise DataError("entity ids must be dense and ordered")

    def entity(self, entity_id: int) -> SceneEntity:
        return self.entities[entity_id]

    def truth(self, a: int, relation: Relation, b: int) -> bool:
        """Brute-force oracle: does ``relation`` hold between entities a and b?"""
        if a == b:
            raise DataError("oracle is defined over distinct entities")
        return relation_holds(
            self.entities[a].box,
            self.entities[b].box,
            relation,
            self.near_threshold,
            self.far_threshold,
        )

    def children_of(self, entity_id: int) -> list[int]:
        return [e.id for e in self.entities if e.parent == entity_id]

    def siblings(self) -> list[tuple[int, int]]:
        """Unordered pairs of entities sharing a parent (including top level)."""
        pairs = []
        for i, a in enumerate(self.entities):
            for b in self.entities[i + 1 :]:
                if a.parent == b.parent:
                    pairs.append((a.id, b.id))
        return pairs

    def validate(self) -> None:
        """Check containment and sibling-disjointness invariants; raises DataError."""
        for entity in self.entities:
            if entity.parent is not None:
                parent = self.entities[entity.parent]
                if not contains(parent.box, entity.box):
                    raise DataError(
                        f"entity {entity.id} escapes its parent {parent.id}"
                    )
        for a, b in self.siblings():
            if interiors_overlap(self.entities[a].box, self.entities[b].box):
                raise DataError(f"sibling boxes {a} and {b} overlap")


def geometric_truth(scene: Scene, a: int, relation: Relation, b: int) -> bool:
    return scene.truth(a, relation, b)
