"""Deterministic extraction from controlled-language stories and questions.

Grammar (terminals drawn from the relation lexicon and attribute word lists):

    STORY-SENT := NP ("is"|"are") REL-EXPR NP ("and" REL-EXPR NP)* "."
                | NP ("has"|"contains") NP ("and" NP)* "."
    NP         := ("a"|"an"|"the"|NUMBER) [SIZE] [COLOR] NOUN | "block" LETTER
    YN-Q       := ("Is"|"Are") QNP REL-EXPR QNP "?"
    QNP        := ("the"|"any"|"all"|"a"|"an") [SIZE] [COLOR] NOUN
    FR-Q       := "What is the position of" QNP "relative to" QNP "?"

The sentence subject is always the trajector. Strict mode raises
GrammarError with a token position; lenient mode returns no triplets for
sentences that fall outside the grammar and marks triplets whose indicator
is not in the lexicon with relation None.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .coref import AttributeConfig, Cardinality, EntitySelector, Mention, PRONOUNS
from .errors import GrammarError
from .relations import Relation, RelationLexicon

NUMBER_WORDS = {
    "one": 1,
    "two": 2,
    "three": 3,
    "four": 4,
    "five": 5,
    "six": 6,
    "seven": 7,
    "eight": 8,
    "nine": 9,
}

ARTICLES = ("a", "an", "the")
QUESTION_DETERMINERS = ("the", "any", "all", "a", "an")
CONTAINMENT_VERBS = ("has", "contains")

#: default FR candidate list: every type that generated scenes can realize
#: (EQ and PO are excluded; distinct scene boxes are never equal and sibling
#: interiors never partially overlap)
DEFAULT_FR_CANDIDATES: tuple[Relation, ...] = tuple(
    r for r in Relation if r not in (Relation.EQ, Relation.PO)
)

_TOKEN_RE = re.compile(r"[A-Za-z]+|[.?]")


def tokenize(text: str) -> list[str]:
    return [t.lower() for t in _TOKEN_RE.findall(text)]


def pluralize(noun: str) -> str:
    if noun.endswith(("s", "x", "z", "ch", "sh")):
        return noun + "es"
    return noun + "s"


def singularize(word: str, nouns: tuple[str, ...]) -> Optional[str]:
    """Map a possibly-plural token back onto the noun inventory."""
    if word in nouns:
        return word
    if word.endswith("es") and word[:-2] in nouns:
        return word[:-2]
    if word.endswith("s") and word[:-1] in nouns:
        return word[:-1]
    return None


@dataclass(frozen=True)
class ParsedTriplet:
    trajector: Mention
    indicator: str
    landmark: Mention
    relation: Optional[Relation]
    sentence_index: int


@dataclass(frozen=True)
class ParsedQuestion:
    mode: str  # "YN" | "FR"
    trajector_mention: Mention
    landmark_mention: Mention
    relation: Optional[Relation] = None
    candidates: tuple[Relation, ...] = ()

    @property
    def trajector_selector(self) -> EntitySelector:
        from .coref import _quantifier_for

        return EntitySelector(
            attributes=self.trajector_mention.match_attributes(),
            quantifier=_quantifier_for(self.trajector_mention),
        )

    @property
    def landmark_selector(self) -> EntitySelector:
        from .coref import _quantifier_for

        return EntitySelector(
            attributes=self.landmark_mention.match_attributes(),
            quantifier=_quantifier_for(self.landmark_mention),
        )


class _NoParse(Exception):
    def __init__(self, position: int, message: str):
        super().__init__(message)
        self.position = position
        self.message = message


def _parse_np(
    tokens: list[str],
    i: int,
    sentence_index: int,
    attrs: AttributeConfig,
    *,
    determiners: tuple[str, ...],
    allow_block: bool = True,
    allow_pronoun: bool = False,
    allow_plural: bool = False,
) -> tuple[Mention, int]:
    if i >= len(tokens):
        raise _NoParse(i, "expected a noun phrase")
    token = tokens[i]

    if allow_block and token == "block":
        if i + 1 >= len(tokens) or len(tokens[i + 1]) != 1 or not tokens[i + 1].isalpha():
            raise _NoParse(i + 1, "expected a block letter")
        letter = tokens[i + 1].upper()
        mention = Mention(
            surface=f"block {letter}",
            sentence_index=sentence_index,
            attributes={"block": letter},
            cardinality=Cardinality.singular(),
        )
        return mention, i + 2

    if allow_pronoun and token in PRONOUNS:
        mention = Mention(
            surface=token,
            sentence_index=sentence_index,
            attributes={},
            cardinality=Cardinality.singular(),
        )
        return mention, i + 1

    count = None
    if token in determiners:
        determiner = token
    elif token in NUMBER_WORDS:
        determiner = token
        count = NUMBER_WORDS[token]
    else:
        raise _NoParse(i, f"expected a determiner, got {token!r}")

    j = i + 1
    attributes: dict[str, str] = {"determiner": determiner}
    if j < len(tokens) and tokens[j] in attrs.sizes:
        attributes["size"] = tokens[j]
        j += 1
    if j < len(tokens) and tokens[j] in attrs.colors:
        attributes["color"] = tokens[j]
        j += 1
    if j >= len(tokens):
        raise _NoParse(j, "expected a noun")
    noun = singularize(tokens[j], attrs.nouns)
    if noun is None:
        raise _NoParse(j, f"unknown noun {tokens[j]!r}")
    was_plural = tokens[j] != noun
    attributes["noun"] = noun
    j += 1

    if count is not None and count >= 2:
        cardinality = Cardinality.counted(count)
    elif was_plural:
        if not allow_plural and count is None:
            raise _NoParse(j - 1, "bare plural noun phrase outside question grammar")
        cardinality = Cardinality.group()
    else:
        cardinality = Cardinality.singular()

    surface = " ".join(tokens[i:j])
    mention = Mention(
        surface=surface,
        sentence_index=sentence_index,
        attributes=attributes,
        cardinality=cardinality,
    )
    return mention, j


def _find_np_start(tokens, i, determiners):
    for j in range(i, len(tokens)):
        t = tokens[j]
        if t in determiners or t in NUMBER_WORDS or t == "block":
            return j
    return None


def _parse_story_sentence(
    sentence: str,
    sentence_index: int,
    lexicon: RelationLexicon,
    attrs: AttributeConfig,
    strict: bool,
) -> tuple[list[ParsedTriplet], list[Mention]]:
    tokens = tokenize(sentence)
    if not tokens or tokens[-1] != ".":
        if strict:
            raise GrammarError(
                "story sentence must end with '.'",
                sentence=sentence,
                position=len(tokens),
            )
        return [], []
    tokens = tokens[:-1]

    try:
        subject, i = _parse_np(
            tokens, 0, sentence_index, attrs, determiners=ARTICLES, allow_pronoun=not strict
        )
        if i >= len(tokens):
            raise _NoParse(i, "expected a verb")

        triplets: list[ParsedTriplet] = []
        mentions: list[Mention] = [subject]

        if tokens[i] in CONTAINMENT_VERBS:
            verb = tokens[i]
            relation = lexicon.lookup(verb)
            i += 1
            while True:
                landmark, i = _parse_np(
                    tokens, i, sentence_index, attrs, determiners=ARTICLES
                )
                mentions.append(landmark)
                triplets.append(
                    ParsedTriplet(subject, verb, landmark, relation, sentence_index)
                )
                if i < len(tokens) and tokens[i] == "and":
                    i += 1
                    continue
                break
        elif tokens[i] in ("is", "are"):
            i += 1
            while True:
                match = lexicon.match_at(tokens, i)
                if match is not None:
                    relation, length = match
                    indicator = " ".join(tokens[i : i + length])
                    i += length
                else:
                    if strict:
                        raise _NoParse(i, f"unknown spatial indicator at {tokens[i]!r}")
                    start = _find_np_start(tokens, i + 1, ARTICLES)
                    if start is None:
                        raise _NoParse(i, "no landmark noun phrase")
                    relation = None
                    indicator = " ".join(tokens[i:start])
                    i = start
                landmark, i = _parse_np(
                    tokens, i, sentence_index, attrs, determiners=ARTICLES
                )
                mentions.append(landmark)
                triplets.append(
                    ParsedTriplet(subject, indicator, landmark, relation, sentence_index)
                )
                if i < len(tokens) and tokens[i] == "and":
                    i += 1
                    continue
                break
        else:
            raise _NoParse(i, f"expected 'is', 'are', 'has', or 'contains', got {tokens[i]!r}")

        if i != len(tokens):
            raise _NoParse(i, f"trailing tokens after sentence: {tokens[i:]!r}")
        return triplets, mentions
    except _NoParse as exc:
        if strict:
            raise GrammarError(
                exc.message, sentence=sentence, position=exc.position
            ) from None
        return [], []


def parse_sentence(
    sentence: str,
    lexicon: RelationLexicon | None = None,
    *,
    attribute_config: AttributeConfig | None = None,
    sentence_index: int = 0,
    strict: bool = False,
) -> list[ParsedTriplet]:
    """Parse one story sentence into relation triplets."""
    triplets, _ = _parse_story_sentence(
        sentence,
        sentence_index,
        lexicon or RelationLexicon.default(),
        attribute_config or AttributeConfig(),
        strict,
    )
    return triplets


def extract_story(
    story: list[str],
    lexicon: RelationLexicon | None = None,
    *,
    attribute_config: AttributeConfig | None = None,
    strict: bool = False,
) -> tuple[list[ParsedTriplet], list[Mention]]:
    """Parse every sentence; returns all triplets plus the ordered mention list."""
    lexicon = lexicon or RelationLexicon.default()
    attrs = attribute_config or AttributeConfig()
    all_triplets: list[ParsedTriplet] = []
    all_mentions: list[Mention] = []
    for index, sentence in enumerate(story):
        triplets, mentions = _parse_story_sentence(sentence, index, lexicon, attrs, strict)
        all_triplets.extend(triplets)
        all_mentions.extend(mentions)
    return all_triplets, all_mentions


def mention_from_surface(
    surface: str,
    sentence_index: int = 0,
    *,
    attribute_config: AttributeConfig | None = None,
) -> Mention:
    """Parse a bare noun phrase (as stored in gold coref records)."""
    attrs = attribute_config or AttributeConfig()
    tokens = tokenize(surface)
    try:
        mention, end = _parse_np(
            tokens,
            0,
            sentence_index,
            attrs,
            determiners=QUESTION_DETERMINERS,
            allow_pronoun=True,
            allow_plural=True,
        )
        if end != len(tokens):
            raise _NoParse(end, "trailing tokens in noun phrase")
    except _NoParse as exc:
        raise GrammarError(exc.message, sentence=surface, position=exc.position) from None
    return mention


def parse_question(
    question: str,
    lexicon: RelationLexicon | None = None,
    *,
    attribute_config: AttributeConfig | None = None,
    fr_candidates: tuple[Relation, ...] = DEFAULT_FR_CANDIDATES,
    sentence_index: int = 0,
) -> ParsedQuestion:
    """Parse a YN or FR question; raises GrammarError on malformed input."""
    lexicon = lexicon or RelationLexicon.default()
    attrs = attribute_config or AttributeConfig()
    tokens = tokenize(question)
    if not tokens or tokens[-1] != "?":
        raise GrammarError(
            "question must end with '?'", sentence=question, position=len(tokens)
        )
    tokens = tokens[:-1]

    try:
        if tokens[:5] == ["what", "is", "the", "position", "of"]:
            trajector, i = _parse_np(
                tokens,
                5,
                sentence_index,
                attrs,
                determiners=QUESTION_DETERMINERS,
                allow_block=False,
                allow_plural=True,
            )
            if tokens[i : i + 2] != ["relative", "to"]:
                raise _NoParse(i, "expected 'relative to'")
            landmark, i = _parse_np(
                tokens,
                i + 2,
                sentence_index,
                attrs,
                determiners=QUESTION_DETERMINERS,
                allow_block=False,
                allow_plural=True,
            )
            if i != len(tokens):
                raise _NoParse(i, "trailing tokens after question")
            if not fr_candidates:
                raise GrammarError(
                    "FR questions need a non-empty candidate list", sentence=question
                )
            return ParsedQuestion(
                mode="FR",
                trajector_mention=trajector,
                landmark_mention=landmark,
                candidates=tuple(fr_candidates),
            )

        if tokens and tokens[0] in ("is", "are"):
            trajector, i = _parse_np(
                tokens,
                1,
                sentence_index,
                attrs,
                determiners=QUESTION_DETERMINERS,
                allow_block=False,
                allow_plural=True,
            )
            match = lexicon.match_at(tokens, i)
            if match is None:
                raise _NoParse(i, f"unknown relation expression at {tokens[i:]!r}")
            relation, length = match
            i += length
            landmark, i = _parse_np(
                tokens,
                i,
                sentence_index,
                attrs,
                determiners=QUESTION_DETERMINERS,
                allow_block=False,
                allow_plural=True,
            )
            if i != len(tokens):
                raise _NoParse(i, "trailing tokens after question")
            return ParsedQuestion(
                mode="YN",
                trajector_mention=trajector,
                landmark_mention=landmark,
                relation=relation,
            )

        raise _NoParse(0, "question must start with 'Is', 'Are', or 'What is the position of'")
    except _NoParse as exc:
        raise GrammarError(exc.message, sentence=question, position=exc.position) from None
