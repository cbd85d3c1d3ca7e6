"""Spatial relation vocabulary, rule classes, and the expression lexicon.

Sixteen qualitative relations in three families: the eight RCC8 topological
relations, six directional relations on three opposing axis pairs, and two
distance relations. The inference rules are gated on a coarser partition of
the vocabulary into four classes, so that partition and the converse mapping
live here alongside the enum.

The lexicon maps lowercased surface expressions ("in front of", "touching")
to relation types. Lookups are longest-match-first so that "in front of"
resolves to FRONT rather than letting "in" shadow it.
"""

from __future__ import annotations

from enum import Enum
from pathlib import Path

from .errors import LexiconError


class Relation(Enum):
    """The sixteen relation types, in canonical order."""

    # topological (RCC8)
    DC = "DC"
    EC = "EC"
    PO = "PO"
    EQ = "EQ"
    TPP = "TPP"
    NTPP = "NTPP"
    TPPI = "TPPI"
    NTPPI = "NTPPI"
    # directional
    LEFT = "LEFT"
    RIGHT = "RIGHT"
    BELOW = "BELOW"
    ABOVE = "ABOVE"
    BEHIND = "BEHIND"
    FRONT = "FRONT"
    # distance
    FAR = "FAR"
    NEAR = "NEAR"

    # members are singletons, so the identity hash is equivalent to the
    # default name hash but stays in C; fact keys hash these constantly
    __hash__ = object.__hash__

    def __repr__(self) -> str:
        return self.name


class RelationClass(Enum):
    """Rule-gating classes partitioning the sixteen relation types."""

    DIRECTIONAL = "Dir"
    DISTANCE = "Dis"
    PROPER_PART = "PP"
    RCC_NON_PP = "RccNonPp"


CANONICAL_ORDER: tuple[Relation, ...] = tuple(Relation)
RELATION_INDEX: dict[Relation, int] = {r: i for i, r in enumerate(CANONICAL_ORDER)}

DIRECTIONAL = frozenset(
    {Relation.LEFT, Relation.RIGHT, Relation.BELOW, Relation.ABOVE, Relation.BEHIND, Relation.FRONT}
)
DISTANCE = frozenset({Relation.FAR, Relation.NEAR})
PROPER_PART = frozenset({Relation.TPP, Relation.NTPP, Relation.TPPI, Relation.NTPPI})
RCC_NON_PP = frozenset({Relation.DC, Relation.EC, Relation.PO, Relation.EQ})

#: Domain of the Not, Inverse, and Transitivity rules.
DIR_PP = DIRECTIONAL | PROPER_PART
#: Domain of the Symmetry rule; exactly the self-converse relations.
DIS_RCC = DISTANCE | RCC_NON_PP

_CLASS_OF: dict[Relation, RelationClass] = {}
for _r in DIRECTIONAL:
    _CLASS_OF[_r] = RelationClass.DIRECTIONAL
for _r in DISTANCE:
    _CLASS_OF[_r] = RelationClass.DISTANCE
for _r in PROPER_PART:
    _CLASS_OF[_r] = RelationClass.PROPER_PART
for _r in RCC_NON_PP:
    _CLASS_OF[_r] = RelationClass.RCC_NON_PP

_CONVERSE_PAIRS = (
    (Relation.LEFT, Relation.RIGHT),
    (Relation.BELOW, Relation.ABOVE),
    (Relation.BEHIND, Relation.FRONT),
    (Relation.TPP, Relation.TPPI),
    (Relation.NTPP, Relation.NTPPI),
)

_REVERSE: dict[Relation, Relation] = {r: r for r in Relation}
for _a, _b in _CONVERSE_PAIRS:
    _REVERSE[_a] = _b
    _REVERSE[_b] = _a


def reverse(relation: Relation) -> Relation:
    """Return the converse relation; self-converse relations map to themselves."""
    return _REVERSE[relation]


def class_of(relation: Relation) -> RelationClass:
    """Return the unique rule class containing ``relation``."""
    return _CLASS_OF[relation]


def is_symmetric(relation: Relation) -> bool:
    return _REVERSE[relation] is relation


# Default surface vocabulary. The core entries follow the standard expression
# inventory for each type; the rest are common synonyms needed to render and
# re-parse fluent controlled-language sentences. Extend or replace through a
# lexicon file (see RelationLexicon.from_file).
DEFAULT_EXPRESSIONS: tuple[tuple[str, Relation], ...] = (
    ("disjoint", Relation.DC),
    ("disjoint from", Relation.DC),
    ("disconnected from", Relation.DC),
    ("touching", Relation.EC),
    ("overlapped", Relation.PO),
    ("overlapping", Relation.PO),
    ("equal", Relation.EQ),
    ("equal to", Relation.EQ),
    ("covered by", Relation.TPP),
    ("in", Relation.NTPP),
    ("inside", Relation.NTPP),
    ("within", Relation.NTPP),
    ("covers", Relation.TPPI),
    ("covering", Relation.TPPI),
    ("has", Relation.NTPPI),
    ("contains", Relation.NTPPI),
    ("containing", Relation.NTPPI),
    ("left of", Relation.LEFT),
    ("to the left of", Relation.LEFT),
    ("on the left side of", Relation.LEFT),
    ("right of", Relation.RIGHT),
    ("to the right of", Relation.RIGHT),
    ("on the right side of", Relation.RIGHT),
    ("under", Relation.BELOW),
    ("below", Relation.BELOW),
    ("beneath", Relation.BELOW),
    ("over", Relation.ABOVE),
    ("above", Relation.ABOVE),
    ("behind", Relation.BEHIND),
    ("in front", Relation.FRONT),
    ("in front of", Relation.FRONT),
    ("far", Relation.FAR),
    ("far from", Relation.FAR),
    ("close", Relation.NEAR),
    ("close to", Relation.NEAR),
    ("near", Relation.NEAR),
    ("near to", Relation.NEAR),
)


def _normalize(phrase: str) -> str:
    return " ".join(phrase.lower().split())


class RelationLexicon:
    """Ordered map from surface expressions to relation types.

    Every relation type must be covered by at least one expression; loading
    a file that drops a type raises LexiconError. Token-level prefix matching
    (``match_at``) prefers the longest expression.
    """

    def __init__(self, entries):
        self._by_phrase: dict[str, Relation] = {}
        self._expressions: dict[Relation, list[str]] = {r: [] for r in Relation}
        for phrase, relation in entries:
            norm = _normalize(phrase)
            if not norm:
                raise LexiconError("empty expression in lexicon")
            if not isinstance(relation, Relation):
                raise LexiconError(f"unknown relation for expression {phrase!r}")
            if norm in self._by_phrase and self._by_phrase[norm] is not relation:
                raise LexiconError(
                    f"expression {norm!r} maps to both "
                    f"{self._by_phrase[norm].name} and {relation.name}"
                )
            if norm not in self._by_phrase:
                self._by_phrase[norm] = relation
                self._expressions[relation].append(norm)
        missing = [r.name for r in Relation if not self._expressions[r]]
        if missing:
            raise LexiconError(f"no expression for relation(s): {', '.join(missing)}")
        self._max_tokens = max(len(p.split()) for p in self._by_phrase)

    @classmethod
    def default(cls) -> "RelationLexicon":
        return cls(DEFAULT_EXPRESSIONS)

    @classmethod
    def from_file(cls, path) -> "RelationLexicon":
        """Load ``<expression> TAB <RELATION_NAME>`` lines; ``#`` starts a comment."""
        entries = []
        text = Path(path).read_text(encoding="utf-8")
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "\t" not in line:
                raise LexiconError(f"{path}:{lineno}: expected '<expression> TAB <RELATION>'")
            phrase, _, name = line.partition("\t")
            name = name.strip().upper()
            try:
                relation = Relation[name]
            except KeyError:
                raise LexiconError(f"{path}:{lineno}: unknown relation {name!r}") from None
            entries.append((phrase, relation))
        return cls(entries)

    def lookup(self, phrase: str) -> Relation | None:
        """Exact lookup of a normalized phrase; None when non-spatial."""
        return self._by_phrase.get(_normalize(phrase))

    def match_at(self, tokens, start: int) -> tuple[Relation, int] | None:
        """Longest expression matching ``tokens[start:]``; returns (relation, length)."""
        limit = min(self._max_tokens, len(tokens) - start)
        for length in range(limit, 0, -1):
            phrase = " ".join(tokens[start : start + length])
            relation = self._by_phrase.get(phrase)
            if relation is not None:
                return relation, length
        return None

    def expressions_for(self, relation: Relation) -> tuple[str, ...]:
        return tuple(self._expressions[relation])

    def __contains__(self, phrase: str) -> bool:
        return _normalize(phrase) in self._by_phrase

    def __len__(self) -> int:
        return len(self._by_phrase)
