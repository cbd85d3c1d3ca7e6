"""Synthetic benchmark generation with a geometric oracle.

A scene is a row of blocks along the x axis, each holding a few boxes placed
in disjoint interior cells. Stated facts are a connected subset of the
geometric truths (all containment edges plus sampled sibling and block-level
relations, never both orientations of the same converse pair). Stories
render one clause per fact in controlled language; questions are sampled so
that every positive is derivable by the rule engine and every negative is
geometrically false, which makes the gold answers simultaneously sound
against the oracle and reachable by the solver.

Generation is fully determined by (seed, config): each story draws from its
own RNG seeded by mixing the dataset seed with the story index.
"""

from __future__ import annotations

import json
import random
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import answering
from .answering import NO, YES
from .coref import (
    DEFAULT_COLORS,
    DEFAULT_SHAPES,
    DEFAULT_SIZES,
    AttributeConfig,
    Cardinality,
    CorefChain,
    Quantifier,
    resolve_question_entity,
)
from .engine import (
    DEFAULT_MAX_FACTS,
    ClosureResult,
    Fact,
    Stated,
    TruthValue,
    closure,
)
from .errors import ConfigError, DataError, NoMatchError, SpatialQAError
from .geometry import Box, Scene, SceneEntity, contains, relation_holds
from .parsing import (
    DEFAULT_FR_CANDIDATES,
    mention_from_surface,
    parse_question,
    pluralize,
)
from .relations import (
    CANONICAL_ORDER,
    DIRECTIONAL,
    DISTANCE,
    Relation,
    RelationLexicon,
    reverse,
)

FORMAT_VERSION = "1"

BLOCK_SPAN = 12
_CELL_BOUNDS = ((1, 6), (6, 11))

#: expressions used when rendering a stated fact after "is"/"are"
RENDER_EXPRESSIONS: dict[Relation, tuple[str, ...]] = {
    Relation.LEFT: ("to the left of", "left of"),
    Relation.RIGHT: ("to the right of", "right of"),
    Relation.BELOW: ("below", "under"),
    Relation.ABOVE: ("above", "over"),
    Relation.BEHIND: ("behind",),
    Relation.FRONT: ("in front of",),
    Relation.NEAR: ("near", "close to"),
    Relation.FAR: ("far from",),
    Relation.DC: ("disjoint from",),
    Relation.EC: ("touching",),
}

#: expressions used inside "Is X <expr> Y?" questions, one list per type
QUESTION_EXPRESSIONS: dict[Relation, tuple[str, ...]] = {
    **RENDER_EXPRESSIONS,
    Relation.NTPP: ("inside",),
    Relation.TPP: ("covered by",),
    Relation.NTPPI: ("containing",),
    Relation.TPPI: ("covering",),
    Relation.EQ: ("equal to",),
    Relation.PO: ("overlapping",),
}

#: relations stated between siblings or blocks, and asked in negatives
STATEABLE = tuple(
    r for r in CANONICAL_ORDER if r in DIRECTIONAL or r in DISTANCE or r in (Relation.DC, Relation.EC)
)


def mix_seed(seed: int, index: int) -> int:
    """Derive a per-story seed; stable across runs and platforms."""
    return (seed * 0x9E3779B97F4A7C15 + index * 0xD1B54A32D192ED03 + 0x632BE59BD9B4E019) % 2**64


@dataclass(frozen=True)
class GenConfig:
    """Everything that, together with the seed, determines a dataset."""

    seed: int = 42
    num_blocks: tuple[int, int] = (2, 3)
    objects_per_block: tuple[int, int] = (2, 4)
    colors: tuple[str, ...] = DEFAULT_COLORS
    shapes: tuple[str, ...] = DEFAULT_SHAPES
    sizes: tuple[str, ...] = DEFAULT_SIZES
    size_probability: float = 0.35
    near_threshold: float = 2
    far_threshold: float = 5
    density: float = 0.3
    group_probability: float = 0.4
    conjunction_probability: float = 0.3
    yn_per_story: int = 5
    fr_per_story: int = 3
    quantified_per_story: int = 1
    hop_range: tuple[int, int] = (1, 6)
    fr_candidates: tuple[Relation, ...] = DEFAULT_FR_CANDIDATES
    max_facts: int = DEFAULT_MAX_FACTS

    def __post_init__(self):
        def check_range(name, value, lo=1):
            if len(value) != 2 or value[0] > value[1] or value[0] < lo:
                raise ConfigError(f"{name} must be a non-empty (min, max) range, got {value}")

        check_range("num_blocks", self.num_blocks)
        check_range("objects_per_block", self.objects_per_block)
        check_range("hop_range", self.hop_range)
        if self.objects_per_block[1] > 8:
            raise ConfigError("at most 8 objects fit one block")
        if not (0 <= self.seed < 2**64):
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if not (self.near_threshold < self.far_threshold):
            raise ConfigError("near_threshold must be below far_threshold")
        if not self.colors or not self.shapes:
            raise ConfigError("attribute pools must be non-empty")
        for name in ("density", "group_probability", "conjunction_probability", "size_probability"):
            value = getattr(self, name)
            if not (0 <= value <= 1):
                raise ConfigError(f"{name} must be in [0, 1]")
        if self.quantified_per_story > self.yn_per_story:
            raise ConfigError("quantified_per_story cannot exceed yn_per_story")
        if not self.fr_candidates:
            raise ConfigError("fr_candidates must be non-empty")

    def attribute_config(self) -> AttributeConfig:
        return AttributeConfig(colors=self.colors, shapes=self.shapes, sizes=self.sizes)

    def to_dict(self) -> dict:
        out = {}
        for name in (
            "seed",
            "num_blocks",
            "objects_per_block",
            "colors",
            "shapes",
            "sizes",
            "size_probability",
            "near_threshold",
            "far_threshold",
            "density",
            "group_probability",
            "conjunction_probability",
            "yn_per_story",
            "fr_per_story",
            "quantified_per_story",
            "hop_range",
            "max_facts",
        ):
            value = getattr(self, name)
            out[name] = list(value) if isinstance(value, tuple) else value
        out["fr_candidates"] = [r.name for r in self.fr_candidates]
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "GenConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        kwargs = dict(raw)
        for name in ("num_blocks", "objects_per_block", "hop_range"):
            if name in kwargs:
                kwargs[name] = tuple(kwargs[name])
        for name in ("colors", "shapes", "sizes"):
            if name in kwargs:
                kwargs[name] = tuple(kwargs[name])
        if "fr_candidates" in kwargs:
            try:
                kwargs["fr_candidates"] = tuple(
                    Relation[name] for name in kwargs["fr_candidates"]
                )
            except KeyError as exc:
                raise ConfigError(f"unknown relation in fr_candidates: {exc}") from None
        return cls(**kwargs)


# --- scene sampling ----------------------------------------------------------

def _block_letter(index: int) -> str:
    return chr(ord("A") + index)


def generate_scene(config: GenConfig, rng: random.Random) -> Scene:
    """Sample a scene satisfying the containment and disjointness invariants."""
    entities: list[SceneEntity] = []
    n_blocks = rng.randint(*config.num_blocks)

    cursor = 0
    block_ids = []
    for b in range(n_blocks):
        box = Box((cursor, cursor + BLOCK_SPAN), (0, BLOCK_SPAN), (0, BLOCK_SPAN))
        entity = SceneEntity(
            id=len(entities), attributes={"block": _block_letter(b)}, box=box, parent=None
        )
        entities.append(entity)
        block_ids.append(entity.id)
        cursor += BLOCK_SPAN + rng.randint(1, int(config.far_threshold) + 3)

    cells = [(cx, cy, cz) for cx in range(2) for cy in range(2) for cz in range(2)]
    used_attrs: list[set] = []

    def sample_attributes() -> dict[str, str]:
        for attempt in range(64):
            attrs = {}
            # force a size once plain color+shape combinations get crowded
            if rng.random() < config.size_probability or attempt >= 32:
                attrs["size"] = rng.choice(config.sizes)
            attrs["color"] = rng.choice(config.colors)
            attrs["noun"] = rng.choice(config.shapes)
            # subset-free across the scene: "a red oval" next to "a big red
            # oval" would make definite references ambiguous
            items = set(attrs.items())
            if not any(items <= seen or seen <= items for seen in used_attrs):
                used_attrs.append(items)
                return attrs
        raise ConfigError("attribute pools too small for the requested object count")

    for block_id in block_ids:
        block_box = entities[block_id].box
        n_objects = rng.randint(*config.objects_per_block)
        for cell in rng.sample(cells, n_objects):
            axes = []
            for axis_index, axis in enumerate(cell):
                c_lo, c_hi = _CELL_BOUNDS[axis]
                offset = block_box.axes[axis_index][0] if axis_index == 0 else 0
                lo = offset + c_lo + rng.randint(0, 2)
                hi = offset + rng.randint(lo - offset + 1, c_hi)
                axes.append((lo, hi))
            entities.append(
                SceneEntity(
                    id=len(entities),
                    attributes=sample_attributes(),
                    box=Box(*axes),
                    parent=block_id,
                )
            )

    scene = Scene(
        entities=entities,
        near_threshold=config.near_threshold,
        far_threshold=config.far_threshold,
    )
    scene.validate()
    return scene


# --- stated-fact selection ---------------------------------------------------

def _normalized(rel: Relation, a: int, b: int) -> tuple[int, int, Relation]:
    """Orientation-free key: a stated fact and its converse collide."""
    if a <= b:
        return (a, b, rel)
    return (b, a, reverse(rel))


def select_stated_facts(
    scene: Scene, config: GenConfig, rng: random.Random
) -> list[tuple[Relation, int, int]]:
    """Choose the facts a story will state, as (relation, subject, object).

    All containment edges are stated (as NTPPI from the parent); sibling and
    block-level relations are sampled so the fact graph stays connected and
    no stated fact is one Inverse or Symmetry step from another.
    """
    facts: list[tuple[Relation, int, int]] = []
    seen: set[tuple[int, int, Relation]] = set()

    def state(rel: Relation, a: int, b: int) -> None:
        key = _normalized(rel, a, b)
        if key in seen:
            return
        seen.add(key)
        facts.append((rel, a, b))

    def oriented(rel: Relation, a: int, b: int) -> tuple[Relation, int, int]:
        if rng.random() < 0.5:
            return (reverse(rel), b, a)
        return (rel, a, b)

    blocks = [e.id for e in scene.entities if e.is_block]
    for block_id in blocks:
        for child in scene.children_of(block_id):
            state(Relation.NTPPI, block_id, child)

    def true_relations(a: int, b: int) -> list[Relation]:
        return [r for r in STATEABLE if scene.truth(a, r, b)]

    for block_id in blocks:
        children = scene.children_of(block_id)
        if len(children) < 2:
            continue
        order = rng.sample(children, len(children))
        pairs = {tuple(sorted(p)) for p in zip(order, order[1:])}
        for i, a in enumerate(children):
            for b in children[i + 1 :]:
                if (a, b) not in pairs and rng.random() < config.density:
                    pairs.add((a, b))
        for a, b in sorted(pairs):
            truths = true_relations(a, b)
            if not truths:
                continue
            directional = [r for r in truths if r in DIRECTIONAL]
            primary = rng.choice(directional or truths)
            state(*oriented(primary, a, b))
            for extra in truths:
                if extra is not primary and rng.random() < config.density:
                    state(*oriented(extra, a, b))

    for i, a in enumerate(blocks):
        for b in blocks[i + 1 :]:
            consecutive = b == a + 1
            truths = true_relations(a, b)
            directional = [r for r in truths if r in DIRECTIONAL]
            if consecutive and directional:
                state(*oriented(rng.choice(directional), a, b))
            elif directional and rng.random() < config.density:
                state(*oriented(rng.choice(directional), a, b))
            for extra in truths:
                if extra not in DIRECTIONAL and rng.random() < config.density:
                    state(*oriented(extra, a, b))

    return facts


# --- rendering ---------------------------------------------------------------

@dataclass(frozen=True)
class GoldTriplet:
    trajector: str
    indicator: str
    landmark: str
    relation: Relation
    sentence: int

    def to_dict(self) -> dict:
        return {
            "trajector": self.trajector,
            "indicator": self.indicator,
            "landmark": self.landmark,
            "relation": self.relation.name,
            "sentence": self.sentence,
        }


@dataclass
class GoldChain:
    id: int
    mentions: list[tuple[int, str]]
    count: Optional[int] = None
    members: Optional[list[int]] = None

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "mentions": [{"sentence": s, "surface": text} for s, text in self.mentions],
        }
        if self.count is not None:
            out["count"] = self.count
        if self.members is not None:
            out["members"] = list(self.members)
        return out


class StoryGeometry:
    """Geometric oracle re-keyed to story entity ids."""

    def __init__(self, boxes: dict[int, Box], near_threshold: float, far_threshold: float):
        self.boxes = boxes
        self.near_threshold = near_threshold
        self.far_threshold = far_threshold

    def truth(self, a: int, relation: Relation, b: int) -> bool:
        if a == b:
            raise DataError("oracle is defined over distinct entities")
        return relation_holds(
            self.boxes[a], self.boxes[b], relation, self.near_threshold, self.far_threshold
        )


@dataclass
class RenderedStory:
    sentences: list[str]
    gold_triplets: list[GoldTriplet]
    gold_chains: list[GoldChain]
    story_facts: list[Fact]
    story_of_scene: dict[int, int]
    geometry: StoryGeometry
    object_story_ids: list[int]
    block_story_ids: list[int]
    attributes_of: dict[int, dict[str, str]]


def _np_words(attributes: dict[str, str]) -> list[str]:
    words = []
    for key in ("size", "color", "noun"):
        if key in attributes:
            words.append(attributes[key])
    return words


def _indefinite(words: list[str]) -> str:
    article = "an" if words[0][0] in "aeiou" else "a"
    return f"{article} {' '.join(words)}"


def render_story(
    scene: Scene,
    stated: list[tuple[Relation, int, int]],
    config: GenConfig,
    rng: random.Random,
    lexicon: RelationLexicon | None = None,
) -> RenderedStory:
    """Render stated facts into sentences with gold triplets and coref chains."""
    lexicon = lexicon or RelationLexicon.default()
    for expressions in RENDER_EXPRESSIONS.values():
        for expr in expressions:
            if expr not in lexicon:
                raise DataError(f"render expression {expr!r} missing from lexicon")

    blocks = [e.id for e in scene.entities if e.is_block]
    noun_count_scene: dict[str, int] = {}
    for entity in scene.entities:
        noun = entity.attributes.get("noun")
        if noun:
            noun_count_scene[noun] = noun_count_scene.get(noun, 0) + 1

    # decide which same-noun sets render as a counted plural ("two circles")
    group_of_entity: dict[int, tuple[int, str]] = {}
    group_members: dict[tuple[int, str], list[int]] = {}
    for block_id in blocks:
        by_noun: dict[str, list[int]] = {}
        for child in scene.children_of(block_id):
            by_noun.setdefault(scene.entity(child).attributes["noun"], []).append(child)
        for noun, members in sorted(by_noun.items()):
            if (
                2 <= len(members) <= 4
                and noun_count_scene[noun] == len(members)
                and rng.random() < config.group_probability
            ):
                key = (block_id, noun)
                group_members[key] = members
                for member in members:
                    group_of_entity[member] = key

    sentences: list[str] = []
    gold_triplets: list[GoldTriplet] = []
    mention_log: list[tuple[int, str, tuple]] = []  # (sentence, surface, ref)

    def log_mention(sentence_index: int, surface: str, ref: tuple) -> None:
        mention_log.append((sentence_index, surface, ref))

    def block_surface(block_id: int) -> str:
        return f"block {scene.entity(block_id).attributes['block']}"

    def entity_np(entity_id: int, definite: bool) -> str:
        words = _np_words(scene.entity(entity_id).attributes)
        return f"the {' '.join(words)}" if definite else _indefinite(words)

    number_words = {2: "two", 3: "three", 4: "four"}

    containment = [(rel, s, o) for rel, s, o in stated if rel is Relation.NTPPI]
    relational = [(rel, s, o) for rel, s, o in stated if rel is not Relation.NTPPI]

    # containment sentences, one per block
    for block_id in blocks:
        children = [o for rel, s, o in containment if s == block_id]
        if not children:
            continue
        sentence_index = len(sentences)
        verb = rng.choice(("has", "contains"))
        subject_surface = block_surface(block_id)
        log_mention(sentence_index, subject_surface, ("e", block_id))
        items: list[str] = []
        emitted_groups: set[tuple[int, str]] = set()
        for child in children:
            group_key = group_of_entity.get(child)
            if group_key is not None:
                if group_key in emitted_groups:
                    continue
                emitted_groups.add(group_key)
                members = group_members[group_key]
                surface = f"{number_words[len(members)]} {pluralize(group_key[1])}"
                items.append(surface)
                log_mention(sentence_index, surface, ("g",) + group_key)
            else:
                surface = entity_np(child, definite=False)
                items.append(surface)
                log_mention(sentence_index, surface, ("e", child))
        body = f"{subject_surface} {verb} {' and '.join(items)}."
        sentences.append(body[0].upper() + body[1:])
        for item_surface in items:
            gold_triplets.append(
                GoldTriplet(subject_surface, verb, item_surface, Relation.NTPPI, sentence_index)
            )

    # relation sentences, optionally conjoining clauses that share a subject
    i = 0
    while i < len(relational):
        rel, subject, obj = relational[i]
        clause_facts = [(rel, subject, obj)]
        while (
            i + len(clause_facts) < len(relational)
            and relational[i + len(clause_facts)][1] == subject
            and rng.random() < config.conjunction_probability
        ):
            clause_facts.append(relational[i + len(clause_facts)])
        i += len(clause_facts)

        sentence_index = len(sentences)
        subject_entity = scene.entity(subject)
        if subject_entity.is_block:
            subject_surface = block_surface(subject)
        else:
            subject_surface = entity_np(subject, definite=True)
        log_mention(sentence_index, subject_surface, ("e", subject))

        clauses = []
        for clause_rel, _, clause_obj in clause_facts:
            expr = rng.choice(RENDER_EXPRESSIONS[clause_rel])
            target = scene.entity(clause_obj)
            if target.is_block:
                target_surface = block_surface(clause_obj)
            else:
                target_surface = entity_np(clause_obj, definite=True)
            log_mention(sentence_index, target_surface, ("e", clause_obj))
            clauses.append(f"{expr} {target_surface}")
            gold_triplets.append(
                GoldTriplet(subject_surface, expr, target_surface, clause_rel, sentence_index)
            )
        body = f"{subject_surface} is {' and '.join(clauses)}."
        sentences.append(body[0].upper() + body[1:])

    # story ids follow first-mention order
    story_of_ref: dict[tuple, int] = {}
    for sentence_index, surface, ref in mention_log:
        if ref not in story_of_ref:
            story_of_ref[ref] = len(story_of_ref)

    gold_chains: list[GoldChain] = []
    for ref, story_id in story_of_ref.items():
        mentions = [(s, text) for s, text, r in mention_log if r == ref]
        if ref[0] == "g":
            members_scene = group_members[(ref[1], ref[2])]
            member_ids = sorted(
                (story_of_ref[("e", m)] for m in members_scene),
            )
            gold_chains.append(
                GoldChain(story_id, mentions, count=len(members_scene), members=member_ids)
            )
        else:
            gold_chains.append(GoldChain(story_id, mentions))

    story_of_scene = {
        ref[1]: story_id for ref, story_id in story_of_ref.items() if ref[0] == "e"
    }

    # sentence index per stated fact, for provenance
    containment_sentence: dict[int, int] = {}
    for gt in gold_triplets:
        if gt.relation is Relation.NTPPI and gt.trajector.startswith("block "):
            letter = gt.trajector.split()[1].upper()
            for block_id in blocks:
                if scene.entity(block_id).attributes["block"] == letter:
                    containment_sentence[block_id] = gt.sentence
                    break

    story_facts: list[Fact] = []
    for rel, s, o in containment:
        sentence_index = containment_sentence[s]
        story_facts.append(
            Fact(
                story_of_scene[s],
                rel,
                story_of_scene[o],
                provenance=Stated(sentence_index),
            )
        )
    relational_gold = [gt for gt in gold_triplets if gt.relation is not Relation.NTPPI]
    for (rel, s, o), gt in zip(relational, relational_gold):
        story_facts.append(
            Fact(story_of_scene[s], rel, story_of_scene[o], provenance=Stated(gt.sentence))
        )

    boxes = {
        story_of_scene[e.id]: e.box for e in scene.entities if e.id in story_of_scene
    }
    geometry = StoryGeometry(boxes, scene.near_threshold, scene.far_threshold)

    object_story_ids = sorted(
        story_of_scene[e.id]
        for e in scene.entities
        if not e.is_block and e.id in story_of_scene
    )
    block_story_ids = sorted(story_of_scene[b] for b in blocks if b in story_of_scene)
    attributes_of = {
        story_of_scene[e.id]: dict(e.attributes)
        for e in scene.entities
        if e.id in story_of_scene
    }

    return RenderedStory(
        sentences=sentences,
        gold_triplets=gold_triplets,
        gold_chains=gold_chains,
        story_facts=story_facts,
        story_of_scene=story_of_scene,
        geometry=geometry,
        object_story_ids=object_story_ids,
        block_story_ids=block_story_ids,
        attributes_of=attributes_of,
    )


def chains_from_gold(
    records: list[GoldChain], attribute_config: AttributeConfig | None = None
) -> list[CorefChain]:
    """Rebuild coreference chains from gold records (the gold-pipeline path)."""
    config = attribute_config or AttributeConfig()
    ordered = sorted(records, key=lambda r: r.id)
    if [r.id for r in ordered] != list(range(len(ordered))):
        raise DataError("gold chain ids must be dense 0..n-1")
    chains: list[CorefChain] = []
    for record in ordered:
        mentions = [
            mention_from_surface(surface, sentence, attribute_config=config)
            for sentence, surface in record.mentions
        ]
        canonical: dict[str, str] = {}
        for mention in mentions:
            for key, value in mention.match_attributes().items():
                if canonical.get(key, value) != value:
                    raise DataError(
                        f"gold chain {record.id} mixes {key}={canonical[key]!r} "
                        f"and {key}={value!r}"
                    )
                canonical[key] = value
        if record.members is not None:
            cardinality = (
                Cardinality.counted(record.count) if record.count else Cardinality.group()
            )
            members = list(record.members)
        else:
            cardinality = Cardinality.singular()
            members = None
        last_sentence = max(s for s, _ in record.mentions)
        chains.append(
            CorefChain(
                id=record.id,
                mentions=mentions,
                canonical_attributes=canonical,
                cardinality=cardinality,
                members=members,
                last_position=last_sentence * 1_000_000 + record.id,
            )
        )
    return chains


# --- question generation -----------------------------------------------------

@dataclass
class QuestionRecord:
    id: str
    mode: str  # "YN" | "FR"
    text: str
    gold: object  # "Yes" | "No" | list[str]
    hops: int
    candidates: Optional[tuple[str, ...]] = None
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "mode": self.mode,
            "text": self.text,
            "gold": self.gold,
            "hops": self.hops,
        }
        if self.candidates is not None:
            out["candidates"] = list(self.candidates)
        return out


class _QuestionFactory:
    """Samples questions whose gold answers are oracle-true and solver-reachable."""

    def __init__(self, render, chains, result, config, rng):
        self.render = render
        self.chains = chains
        self.result = result
        self.config = config
        self.rng = rng
        self.object_ids = render.object_story_ids
        self.object_chains = [c for c in chains if not c.is_group and not c.is_block]
        self.block_of = {
            sid: self._parent_block(sid) for sid in self.object_ids
        }
        self.texts: set[str] = set()
        self.questions: list[QuestionRecord] = []

    def _parent_block(self, story_id: int) -> Optional[int]:
        # recover the block from geometry: the unique block box containing this one
        box = self.render.geometry.boxes[story_id]
        for block_id in self.render.block_story_ids:
            if contains(self.render.geometry.boxes[block_id], box):
                return block_id
        return None

    def _count_matches(self, attrs: dict[str, str]) -> int:
        return sum(
            1
            for c in self.object_chains
            if all(c.canonical_attributes.get(k) == v for k, v in attrs.items())
        )

    def unique_surface(self, story_id: int) -> Optional[str]:
        attrs = self.render.attributes_of[story_id]
        key_orders = (("noun",), ("color", "noun"), ("size", "color", "noun"))
        options = []
        for keys in key_orders:
            subset = {k: attrs[k] for k in keys if k in attrs}
            if subset and subset not in options:
                options.append(subset)
        unique = [o for o in options if self._count_matches(o) == 1]
        if not unique:
            return None
        chosen = unique[0] if self.rng.random() < 0.5 else unique[-1]
        words = [chosen[k] for k in ("size", "color", "noun") if k in chosen]
        return "the " + " ".join(words)

    def _resolve(self, mention) -> Optional[tuple[int, ...]]:
        try:
            resolved = resolve_question_entity(
                mention, self.chains, attribute_config=self.config.attribute_config()
            )
        except NoMatchError:
            return None
        return resolved.entity_ids

    def _verify(self, text: str, expect_t, expect_l, expect_rel=None) -> bool:
        try:
            parsed = parse_question(
                text,
                attribute_config=self.config.attribute_config(),
                fr_candidates=self.config.fr_candidates,
            )
        except SpatialQAError:
            return False
        if expect_rel is not None and parsed.relation is not expect_rel:
            return False
        t_ids = self._resolve(parsed.trajector_mention)
        l_ids = self._resolve(parsed.landmark_mention)
        return t_ids == tuple(expect_t) and l_ids == tuple(expect_l)

    def _add(self, record: QuestionRecord) -> bool:
        if record.text in self.texts:
            return False
        self.texts.add(record.text)
        self.questions.append(record)
        return True

    def _cross_block(self, a: int, b: int) -> bool:
        return self.block_of.get(a) != self.block_of.get(b)

    def _direct_yn(self, key, depth: int, gold: str, kind: str) -> bool:
        relation, subject, obj = key
        t_surface = self.unique_surface(subject)
        l_surface = self.unique_surface(obj)
        if t_surface is None or l_surface is None:
            return False
        expr = self.rng.choice(QUESTION_EXPRESSIONS[relation])
        text = f"Is {t_surface} {expr} {l_surface}?"
        if not self._verify(text, (subject,), (obj,), relation):
            return False
        return self._add(
            QuestionRecord(
                id="",
                mode="YN",
                text=text,
                gold=gold,
                hops=depth,
                meta={
                    "kind": kind,
                    "relation": relation.name,
                    "trajector_ids": (subject,),
                    "landmark_ids": (obj,),
                    "tq": Quantifier.UNIQUE,
                    "lq": Quantifier.UNIQUE,
                    "cross_block": self._cross_block(subject, obj),
                },
            )
        )

    def sample_positive_yn(self, count: int, force_cross_block: bool) -> int:
        objects = set(self.object_ids)
        lo, hi = self.config.hop_range
        pool = sorted(
            (
                (key, trace[2])
                for key, trace in self.result.positives.items()
                if key[1] in objects and key[2] in objects and lo <= trace[2] <= hi
            ),
            key=lambda item: (item[1], str(item[0])),
        )
        self.rng.shuffle(pool)
        added = 0
        if force_cross_block:
            for key, depth in pool:
                if self._cross_block(key[1], key[2]):
                    if self._direct_yn(key, depth, YES, "yn_pos"):
                        added += 1
                        break
        for key, depth in pool:
            if added >= count:
                break
            if self._direct_yn(key, depth, YES, "yn_pos"):
                added += 1
        return added

    def sample_negative_yn(self, count: int) -> int:
        objects = set(self.object_ids)
        derivable = sorted(
            (
                (key, trace[2])
                for key, trace in self.result.negatives.items()
                if key[1] in objects and key[2] in objects
            ),
            key=lambda item: (item[1], str(item[0])),
        )
        self.rng.shuffle(derivable)
        added = 0
        use_derivable = True
        attempts = 0
        while added < count and attempts < 200:
            attempts += 1
            if use_derivable and derivable:
                key, depth = derivable.pop()
                if self._direct_yn(key, depth, NO, "yn_neg_derivable"):
                    added += 1
                    use_derivable = False
                continue
            # an unknown pair: geometrically false and underivable either way
            if len(self.object_ids) < 2:
                break
            subject, obj = self.rng.sample(self.object_ids, 2)
            relation = self.rng.choice(STATEABLE)
            key = (relation, subject, obj)
            if key in self.result.positives or key in self.result.negatives:
                continue
            if self.render.geometry.truth(subject, relation, obj):
                continue
            if self._direct_yn(key, 1, NO, "yn_neg_unknown"):
                added += 1
                use_derivable = True
        return added

    def _quantified_hops(self, tq, t_ids, lq, l_ids, relation) -> int:
        def pair_depth(t, l):
            return self.result.depth(t, relation, l)

        def true_pair(t, l):
            return self.result.query(t, relation, l) is TruthValue.TRUE

        def inner(t):
            landmarks = [l for l in l_ids if l != t]
            if lq == Quantifier.ALL:
                return max((pair_depth(t, l) for l in landmarks), default=1)
            depths = [pair_depth(t, l) for l in landmarks if true_pair(t, l)]
            return min(depths) if depths else 1

        if tq == Quantifier.ALL:
            return max((inner(t) for t in t_ids), default=1)
        satisfied = [
            inner(t)
            for t in t_ids
            if answering.evaluate_quantified(
                Quantifier.ANY, (t,), lq, l_ids, true_pair
            )
        ]
        return min(satisfied) if satisfied else 1

    def sample_quantified_yn(self, count: int) -> int:
        by_noun: dict[str, list[int]] = {}
        for sid in self.object_ids:
            noun = self.render.attributes_of[sid].get("noun")
            if noun:
                by_noun.setdefault(noun, []).append(sid)
        eligible = [n for n, ids in sorted(by_noun.items()) if 2 <= len(ids) <= 4]

        candidates = []
        for noun in eligible:
            t_ids = tuple(sorted(by_noun[noun]))
            for tq in (Quantifier.ALL, Quantifier.ANY):
                for other, other_ids in sorted(by_noun.items()):
                    if other == noun:
                        continue
                    for sid in other_ids:
                        candidates.append((tq, noun, t_ids, Quantifier.UNIQUE, (sid,), sid))
                    for lq in (Quantifier.ANY, Quantifier.ALL):
                        candidates.append(
                            (tq, noun, t_ids, lq, tuple(sorted(other_ids)), other)
                        )
        if 2 <= len(self.object_ids) <= 4:
            all_ids = tuple(sorted(self.object_ids))
            for sid in self.object_ids:
                candidates.append(
                    (Quantifier.ANY, "object", all_ids, Quantifier.UNIQUE, (sid,), sid)
                )
        self.rng.shuffle(candidates)

        relations = [r for r in STATEABLE]
        added = 0
        for tq, noun, t_ids, lq, l_ids, landmark_ref in candidates:
            if added >= count:
                break
            for relation in self.rng.sample(relations, len(relations)):
                def oracle_holds(t, l):
                    return self.render.geometry.truth(t, relation, l)

                def closure_holds(t, l):
                    return self.result.query(t, relation, l) is TruthValue.TRUE

                oracle_val = answering.evaluate_quantified(tq, t_ids, lq, l_ids, oracle_holds)
                closure_val = answering.evaluate_quantified(tq, t_ids, lq, l_ids, closure_holds)
                if oracle_val != closure_val:
                    continue

                if tq == Quantifier.ALL:
                    t_surface = f"all {pluralize(noun)}"
                    verb = "Are"
                else:
                    t_surface = f"any {noun}"
                    verb = "Is"
                if lq == Quantifier.UNIQUE:
                    l_surface = self.unique_surface(landmark_ref)
                    if l_surface is None:
                        continue
                elif lq == Quantifier.ALL:
                    l_surface = f"all {pluralize(landmark_ref)}"
                else:
                    l_surface = f"any {landmark_ref}"
                expr = self.rng.choice(QUESTION_EXPRESSIONS[relation])
                text = f"{verb} {t_surface} {expr} {l_surface}?"
                if not self._verify(text, t_ids, l_ids, relation):
                    continue
                gold = YES if oracle_val else NO
                hops = (
                    self._quantified_hops(tq, t_ids, lq, l_ids, relation)
                    if oracle_val
                    else 1
                )
                if self._add(
                    QuestionRecord(
                        id="",
                        mode="YN",
                        text=text,
                        gold=gold,
                        hops=hops,
                        meta={
                            "kind": "yn_quantified",
                            "relation": relation.name,
                            "trajector_ids": t_ids,
                            "landmark_ids": l_ids,
                            "tq": tq,
                            "lq": lq,
                            "cross_block": False,
                        },
                    )
                ):
                    added += 1
                    break
        return added

    def sample_fr(self, count: int, force_cross_block: bool) -> int:
        pairs = [
            (a, b)
            for a in self.object_ids
            for b in self.object_ids
            if a != b
        ]
        self.rng.shuffle(pairs)
        gold_of: dict[tuple[int, int], list[Relation]] = {}

        def fr_gold(pair):
            if pair not in gold_of:
                gold_of[pair] = answering.answer_fr(
                    self.result, pair, self.config.fr_candidates
                )
            return gold_of[pair]

        ordered = sorted(pairs, key=lambda p: (len(fr_gold(p)) == 0,))
        if force_cross_block:
            cross = [p for p in ordered if self._cross_block(*p) and fr_gold(p)]
            if cross:
                ordered.remove(cross[0])
                ordered.insert(0, cross[0])

        added = 0
        for pair in ordered:
            if added >= count:
                break
            subject, obj = pair
            t_surface = self.unique_surface(subject)
            l_surface = self.unique_surface(obj)
            if t_surface is None or l_surface is None:
                continue
            text = f"What is the position of {t_surface} relative to {l_surface}?"
            if not self._verify(text, (subject,), (obj,)):
                continue
            gold = fr_gold(pair)
            hops = max(
                (self.result.depth(subject, r, obj) for r in gold), default=1
            )
            if self._add(
                QuestionRecord(
                    id="",
                    mode="FR",
                    text=text,
                    gold=[r.name for r in gold],
                    hops=hops,
                    candidates=tuple(r.name for r in self.config.fr_candidates),
                    meta={
                        "kind": "fr",
                        "trajector_ids": (subject,),
                        "landmark_ids": (obj,),
                        "cross_block": self._cross_block(subject, obj),
                    },
                )
            ):
                added += 1
        return added


def generate_questions(
    render: RenderedStory,
    chains: list[CorefChain],
    result: ClosureResult,
    config: GenConfig,
    rng: random.Random,
    story_index: int = 0,
) -> list[QuestionRecord]:
    """Sample the YN/FR question mix for one story, with gold answers."""
    factory = _QuestionFactory(render, chains, result, config, rng)

    multi_block = len(render.block_story_ids) >= 2
    n_quantified = factory.sample_quantified_yn(config.quantified_per_story)
    n_direct = config.yn_per_story - n_quantified
    n_pos_target = (n_direct + 1) // 2
    n_pos = factory.sample_positive_yn(n_pos_target, force_cross_block=multi_block)
    n_neg = factory.sample_negative_yn(config.yn_per_story - n_quantified - n_pos)
    has_cross = any(q.meta.get("cross_block") for q in factory.questions)
    n_fr = factory.sample_fr(
        config.fr_per_story, force_cross_block=multi_block and not has_cross
    )

    total = n_quantified + n_pos + n_neg + n_fr
    requested = config.yn_per_story + config.fr_per_story
    if total < requested:
        warnings.warn(
            f"story {story_index}: emitted {total} of {requested} requested questions "
            "(scene too sparse)",
            stacklevel=2,
        )
    for k, question in enumerate(factory.questions):
        question.id = f"q{story_index:05d}_{k}"
    return factory.questions


def synthesize_extra_questions(triplets, lexicon=None) -> list[QuestionRecord]:
    """One YN question per extracted triplet, alternating original and reversed.

    Even positions keep the triplet's relation (gold Yes); odd positions ask
    the converse instead (gold No), yielding ceil(n/2) positive and
    floor(n/2) negative questions.
    """
    questions = []
    for index, triplet in enumerate(triplets):
        relation = triplet.relation
        if relation is None:
            raise DataError("extra-question synthesis needs typed triplets")
        trajector = (
            triplet.trajector if isinstance(triplet.trajector, str) else triplet.trajector.surface
        )
        landmark = (
            triplet.landmark if isinstance(triplet.landmark, str) else triplet.landmark.surface
        )
        flipped = index % 2 == 1
        asked = reverse(relation) if flipped else relation
        expr = QUESTION_EXPRESSIONS[asked][0]
        text = f"Is {trajector} {expr} {landmark}?"
        questions.append(
            QuestionRecord(
                id=f"x{index}",
                mode="YN",
                text=text,
                gold=NO if flipped else YES,
                hops=1,
                meta={"kind": "extra", "reversed": flipped, "relation": asked.name},
            )
        )
    return questions


# --- dataset assembly and serialization --------------------------------------

@dataclass
class StoryRecord:
    id: str
    sentences: list[str]
    gold_triplets: list[GoldTriplet]
    gold_coref: list[GoldChain]
    questions: list[QuestionRecord]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "sentences": list(self.sentences),
            "gold_triplets": [t.to_dict() for t in self.gold_triplets],
            "gold_coref": [c.to_dict() for c in self.gold_coref],
            "questions": [q.to_dict() for q in self.questions],
        }


@dataclass
class StoryBuild:
    """Everything produced for one story; the dataset keeps only the record."""

    index: int
    scene: Scene
    stated: list[tuple[Relation, int, int]]
    render: RenderedStory
    chains: list[CorefChain]
    closure_result: ClosureResult
    questions: list[QuestionRecord]

    def record(self) -> StoryRecord:
        return StoryRecord(
            id=f"s{self.index:05d}",
            sentences=self.render.sentences,
            gold_triplets=self.render.gold_triplets,
            gold_coref=self.render.gold_chains,
            questions=self.questions,
        )


@dataclass
class Dataset:
    stories: list[StoryRecord]
    config: GenConfig
    seed: int
    format_version: str = FORMAT_VERSION

    def to_json_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "seed": self.seed,
            "config": self.config.to_dict(),
            "stories": [s.to_dict() for s in self.stories],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"


def build_story(config: GenConfig, index: int) -> StoryBuild:
    rng = random.Random(mix_seed(config.seed, index))
    scene = generate_scene(config, rng)
    stated = select_stated_facts(scene, config, rng)
    render = render_story(scene, stated, config, rng)
    result = closure(render.story_facts, config.max_facts)
    chains = chains_from_gold(render.gold_chains, config.attribute_config())
    questions = generate_questions(render, chains, result, config, rng, story_index=index)
    return StoryBuild(
        index=index,
        scene=scene,
        stated=stated,
        render=render,
        chains=chains,
        closure_result=result,
        questions=questions,
    )


def generate_dataset(config: GenConfig, num_stories: int) -> Dataset:
    if num_stories < 1:
        raise ConfigError("num_stories must be positive")
    stories = [build_story(config, i).record() for i in range(num_stories)]
    return Dataset(stories=stories, config=config, seed=config.seed)


def save_dataset(dataset: Dataset, path) -> None:
    Path(path).write_text(dataset.dumps(), encoding="utf-8")


def _require(raw: dict, key: str, kind, where: str):
    if key not in raw:
        raise DataError(f"{where}: missing {key!r}")
    value = raw[key]
    if kind is not None and not isinstance(value, kind):
        raise DataError(f"{where}: {key!r} has wrong type")
    return value


def dataset_from_dict(raw: dict) -> Dataset:
    if not isinstance(raw, dict):
        raise DataError("dataset must be a JSON object")
    version = _require(raw, "format_version", str, "dataset")
    if version != FORMAT_VERSION:
        raise DataError(f"unsupported format_version {version!r}")
    seed = _require(raw, "seed", int, "dataset")
    try:
        config = GenConfig.from_dict(_require(raw, "config", dict, "dataset"))
    except ConfigError as exc:
        raise DataError(f"dataset config invalid: {exc}") from None

    stories = []
    for story_raw in _require(raw, "stories", list, "dataset"):
        where = f"story {story_raw.get('id', '?')}" if isinstance(story_raw, dict) else "story"
        if not isinstance(story_raw, dict):
            raise DataError("story entries must be objects")
        story_id = _require(story_raw, "id", str, where)
        sentences = _require(story_raw, "sentences", list, where)
        if not all(isinstance(s, str) for s in sentences):
            raise DataError(f"{where}: sentences must be strings")

        triplets = []
        for t in _require(story_raw, "gold_triplets", list, where):
            try:
                relation = Relation[t["relation"]]
            except (KeyError, TypeError):
                raise DataError(f"{where}: bad triplet relation") from None
            triplets.append(
                GoldTriplet(
                    trajector=_require(t, "trajector", str, where),
                    indicator=_require(t, "indicator", str, where),
                    landmark=_require(t, "landmark", str, where),
                    relation=relation,
                    sentence=_require(t, "sentence", int, where),
                )
            )

        chains = []
        for c in _require(story_raw, "gold_coref", list, where):
            mentions = [
                (_require(m, "sentence", int, where), _require(m, "surface", str, where))
                for m in _require(c, "mentions", list, where)
            ]
            chains.append(
                GoldChain(
                    id=_require(c, "id", int, where),
                    mentions=mentions,
                    count=c.get("count"),
                    members=c.get("members"),
                )
            )

        questions = []
        for q in _require(story_raw, "questions", list, where):
            mode = _require(q, "mode", str, where)
            gold = _require(q, "gold", None, where)
            if mode == "YN" and gold not in (YES, NO):
                raise DataError(f"{where}: YN gold must be Yes or No")
            if mode == "FR":
                if not isinstance(gold, list):
                    raise DataError(f"{where}: FR gold must be a relation list")
                if "candidates" not in q:
                    raise DataError(f"{where}: FR question without candidates")
            candidates = q.get("candidates")
            questions.append(
                QuestionRecord(
                    id=_require(q, "id", str, where),
                    mode=mode,
                    text=_require(q, "text", str, where),
                    gold=gold,
                    hops=_require(q, "hops", int, where),
                    candidates=tuple(candidates) if candidates is not None else None,
                )
            )

        stories.append(
            StoryRecord(
                id=story_id,
                sentences=list(sentences),
                gold_triplets=triplets,
                gold_coref=chains,
                questions=questions,
            )
        )

    return Dataset(stories=stories, config=config, seed=seed, format_version=version)


def load_dataset(path) -> Dataset:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON ({exc})") from None
    return dataset_from_dict(raw)
