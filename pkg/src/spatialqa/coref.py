"""Rule-based entity linking across a story and question-entity resolution.

Every mention first tries an exact surface match (determiner stripped)
against an existing chain, most recent chain winning. Definite mentions
("the car") additionally fall back to attribute-subset matching and, for
singular mentions, to membership in an open group chain; indefinite and
counted mentions introduce entities, so without an exact match they open a
fresh chain. Counted plurals ("two circles") become group chains whose
members are the singular chains that individuate them; membership is
discovered in either direction, so sentence order does not change the final
chain structure.

Question mentions resolve against story chains by the same exact-then-
partial matching, with the quantifier read off the determiner ("all" binds
the whole matched group, "any"/"a" binds existentially, "the" picks the
unique referent, tie-broken by recency).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import AmbiguityError, ArityError, DataError, NoMatchError

#: attribute keys that participate in chain compatibility and matching
MATCH_KEYS = ("size", "color", "noun", "block")

PRONOUNS = frozenset({"it"})

DEFAULT_COLORS = ("black", "blue", "green", "grey", "red", "yellow", "purple", "brown")
DEFAULT_SHAPES = (
    "circle",
    "square",
    "triangle",
    "oval",
    "star",
    "hexagon",
    "car",
    "house",
    "cup",
    "plate",
)
DEFAULT_SIZES = ("small", "medium", "big", "large")
DEFAULT_GENERIC_NOUNS = ("object", "shape", "thing", "item")


@dataclass(frozen=True)
class AttributeConfig:
    """Word lists driving attribute extraction and generic-noun filtering."""

    colors: tuple[str, ...] = DEFAULT_COLORS
    shapes: tuple[str, ...] = DEFAULT_SHAPES
    sizes: tuple[str, ...] = DEFAULT_SIZES
    generic_nouns: tuple[str, ...] = DEFAULT_GENERIC_NOUNS

    @classmethod
    def from_file(cls, path) -> "AttributeConfig":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise DataError(f"{path}: attribute config must be a JSON object")
        kwargs = {}
        for key in ("colors", "shapes", "sizes", "generic_nouns"):
            if key in raw:
                values = raw[key]
                if not isinstance(values, list) or not all(
                    isinstance(v, str) for v in values
                ):
                    raise DataError(f"{path}: {key} must be a list of strings")
                kwargs[key] = tuple(v.lower() for v in values)
        return cls(**kwargs)

    @property
    def nouns(self) -> tuple[str, ...]:
        return self.shapes + self.generic_nouns


@dataclass(frozen=True)
class Cardinality:
    """singular, counted plural ("two circles"), or uncounted group ("all circles")."""

    plural: bool = False
    count: Optional[int] = None

    def __post_init__(self):
        if self.count is not None and self.count < 2:
            raise DataError("plural cardinality requires a count of at least 2")

    @classmethod
    def singular(cls) -> "Cardinality":
        return cls(False, None)

    @classmethod
    def counted(cls, n: int) -> "Cardinality":
        return cls(True, n)

    @classmethod
    def group(cls) -> "Cardinality":
        return cls(True, None)


@dataclass(frozen=True)
class Mention:
    """One noun phrase occurrence with its extracted attributes."""

    surface: str
    sentence_index: int
    attributes: dict[str, str] = field(default_factory=dict, hash=False)
    cardinality: Cardinality = field(default_factory=Cardinality.singular)

    def match_attributes(self) -> dict[str, str]:
        return {k: v for k, v in self.attributes.items() if k in MATCH_KEYS}

    def stripped_surface(self) -> str:
        """Surface without its leading determiner or quantifier word."""
        words = self.surface.split()
        if words and words[0] in {"a", "an", "the", "any", "all"}:
            words = words[1:]
        return " ".join(words)

    @property
    def is_pronoun(self) -> bool:
        return self.surface in PRONOUNS


class Quantifier:
    UNIQUE = "Unique"
    ANY = "Any"
    ALL = "All"


@dataclass(frozen=True)
class EntitySelector:
    """A quantified attribute pattern over story entities."""

    attributes: dict[str, str] = field(default_factory=dict, hash=False)
    quantifier: str = Quantifier.UNIQUE


@dataclass
class CorefChain:
    id: int
    mentions: list[Mention]
    canonical_attributes: dict[str, str]
    cardinality: Cardinality
    members: Optional[list[int]] = None
    last_position: int = 0

    @property
    def is_group(self) -> bool:
        return self.members is not None

    @property
    def is_block(self) -> bool:
        return "block" in self.canonical_attributes


def _compatible_subset(sub: dict, full: dict) -> bool:
    return all(full.get(k) == v for k, v in sub.items())


def _quantifier_for(mention: Mention) -> str:
    determiner = mention.attributes.get("determiner", "")
    if determiner == "all":
        return Quantifier.ALL
    if determiner in {"any", "a", "an"}:
        return Quantifier.ANY
    return Quantifier.UNIQUE


def link_story(
    mentions: list[Mention],
    *,
    resolve_pronouns: bool = True,
    strict: bool = False,
) -> list[CorefChain]:
    """Assign dense entity ids to mentions, grouping coreferent ones.

    Raises AmbiguityError in strict mode when a definite mention compatibly
    matches more than one chain; the default tie-break picks the most recent.
    """
    chains: list[CorefChain] = []

    def join(chain: CorefChain, mention: Mention, position: int) -> None:
        attrs = mention.match_attributes()
        for key, value in attrs.items():
            existing = chain.canonical_attributes.get(key)
            if existing is not None and existing != value:
                raise AmbiguityError(
                    f"mention {mention.surface!r} conflicts with chain "
                    f"{chain.id} on {key} ({existing!r} vs {value!r})"
                )
        chain.canonical_attributes.update(attrs)
        chain.mentions.append(mention)
        chain.last_position = position

    def new_chain(mention: Mention, position: int) -> CorefChain:
        chain = CorefChain(
            id=len(chains),
            mentions=[mention],
            canonical_attributes=dict(mention.match_attributes()),
            cardinality=mention.cardinality,
            members=[] if mention.cardinality.plural else None,
            last_position=position,
        )
        chains.append(chain)
        return chain

    def adopt_members(group: CorefChain) -> None:
        # a plural mention may arrive after its members were individuated
        wanted = group.cardinality.count
        for chain in chains:
            if wanted is not None and len(group.members) >= wanted:
                break
            if chain.is_group or chain.is_block or chain.id == group.id:
                continue
            if any(chain.id in g.members for g in chains if g.is_group):
                continue
            if _compatible_subset(group.canonical_attributes, chain.canonical_attributes):
                group.members.append(chain.id)

    for position, mention in enumerate(mentions):
        if mention.is_pronoun:
            if not resolve_pronouns:
                if strict:
                    raise AmbiguityError(f"pronoun {mention.surface!r} in strict mode")
                new_chain(mention, position)
                continue
            singular = [c for c in chains if not c.is_group and not c.is_block]
            if not singular:
                new_chain(mention, position)
                continue
            target = max(singular, key=lambda c: c.last_position)
            target.mentions.append(mention)
            target.last_position = position
            continue

        stripped = mention.stripped_surface()
        attrs = mention.match_attributes()
        definite = mention.attributes.get("determiner") == "the"

        exact = [
            c
            for c in chains
            if c.cardinality.plural == mention.cardinality.plural
            and any(m.stripped_surface() == stripped for m in c.mentions)
        ]
        if exact:
            join(max(exact, key=lambda c: c.last_position), mention, position)
            continue

        # indefinite and counted mentions introduce entities: without an
        # exact surface match they open a fresh chain
        if definite:
            compatible = [
                c
                for c in chains
                if c.cardinality.plural == mention.cardinality.plural
                and (
                    mention.cardinality.count is None
                    or c.cardinality.count is None
                    or c.cardinality.count == mention.cardinality.count
                )
                and _compatible_subset(attrs, c.canonical_attributes)
            ]
            if compatible:
                if strict and len(compatible) > 1:
                    raise AmbiguityError(
                        f"definite mention {mention.surface!r} matches chains "
                        f"{[c.id for c in compatible]}"
                    )
                join(max(compatible, key=lambda c: c.last_position), mention, position)
                continue

            if not mention.cardinality.plural:
                open_groups = [
                    g
                    for g in chains
                    if g.is_group
                    and (
                        g.cardinality.count is None
                        or len(g.members) < g.cardinality.count
                    )
                    and _compatible_subset(g.canonical_attributes, attrs)
                ]
                if open_groups:
                    group = max(open_groups, key=lambda g: g.last_position)
                    member = new_chain(mention, position)
                    group.members.append(member.id)
                    continue

        created = new_chain(mention, position)
        if created.is_group:
            adopt_members(created)

    return chains


def expand_group(chain: CorefChain) -> list[int]:
    """Member ids of a group chain; callers replicate group facts per member."""
    if not chain.is_group:
        raise ArityError(f"chain {chain.id} is not a group chain")
    declared = chain.cardinality.count
    if declared is not None and declared != len(chain.members):
        raise ArityError(
            f"group chain {chain.id} declares {declared} members "
            f"but {len(chain.members)} were found"
        )
    if len(chain.members) < 2:
        raise ArityError(f"group chain {chain.id} has fewer than 2 members")
    return list(chain.members)


@dataclass(frozen=True)
class ResolvedSelector:
    selector: EntitySelector
    entity_ids: tuple[int, ...]


def resolve_question_entity(
    selector_mention: Mention,
    chains: list[CorefChain],
    *,
    attribute_config: AttributeConfig | None = None,
    strict: bool = False,
) -> ResolvedSelector:
    """Match a question mention against story chains (exact, then partial).

    Generic nouns ("object", "shape") are dropped from the attribute pattern
    so "any object" ranges over every non-block entity. Raises NoMatchError
    when nothing matches: the pipeline's no-prediction case.
    """
    config = attribute_config or AttributeConfig()
    attrs = selector_mention.match_attributes()
    if attrs.get("noun") in config.generic_nouns:
        attrs = {k: v for k, v in attrs.items() if k != "noun"}
    quantifier = _quantifier_for(selector_mention)
    selector = EntitySelector(attributes=attrs, quantifier=quantifier)

    candidates = [c for c in chains if not c.is_group and not c.is_block]
    stripped = selector_mention.stripped_surface()
    exact = [
        c
        for c in candidates
        if any(m.stripped_surface() == stripped for m in c.mentions)
    ]
    matched = exact or [
        c for c in candidates if _compatible_subset(attrs, c.canonical_attributes)
    ]
    if not matched:
        raise NoMatchError(f"no story entity matches {selector_mention.surface!r}")

    if quantifier == Quantifier.UNIQUE and len(matched) > 1:
        if strict:
            raise AmbiguityError(
                f"{selector_mention.surface!r} matches chains {[c.id for c in matched]}"
            )
        matched = [max(matched, key=lambda c: c.last_position)]

    ids = tuple(sorted(c.id for c in matched))
    return ResolvedSelector(selector=selector, entity_ids=ids)
