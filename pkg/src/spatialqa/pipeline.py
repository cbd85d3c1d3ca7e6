"""End-to-end solving: extract triplets, link entities, reason, answer.

Two modes: GOLD_TRIPLETS consumes the dataset's gold triplets and coref
chains (the upper-bound configuration with perfect extraction); FULL_PARSE
re-parses every sentence and links mentions with the rule-based linker.
Failures are isolated: a malformed story or an unresolvable question mention
becomes an abstained prediction (scored No downstream) instead of aborting
the run.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from . import answering
from .answering import NO
from .coref import CorefChain, expand_group, link_story, resolve_question_entity
from .engine import ClosureResult, Fact, Stated, TruthValue, closure
from .errors import SpatialQAError
from .generator import Dataset, StoryRecord, chains_from_gold
from .parsing import ParsedTriplet, extract_story, parse_question
from .relations import Relation, RelationLexicon


class PipelineMode(Enum):
    GOLD_TRIPLETS = "gold"
    FULL_PARSE = "parse"


@dataclass
class Prediction:
    question_id: str
    answer: object  # "Yes" | "No" | list[str]
    abstained: bool = False
    trace: Optional[dict] = None
    runtime_s: Optional[float] = None

    def to_dict(self) -> dict:
        out = {
            "question_id": self.question_id,
            "answer": self.answer,
            "abstained": self.abstained,
        }
        if self.trace is not None:
            out["trace"] = self.trace
        return out


@dataclass
class StoryOutcome:
    predictions: list[Prediction]
    contradiction: bool = False
    error: Optional[str] = None


def _facts_from_gold(story: StoryRecord, chains: list[CorefChain]) -> list[Fact]:
    """Ground gold triplets in chain ids, replicating group facts per member."""
    by_mention: dict[tuple[int, str], int] = {}
    for chain in chains:
        for mention in chain.mentions:
            by_mention[(mention.sentence_index, mention.surface)] = chain.id
    chain_of = {c.id: c for c in chains}

    facts: list[Fact] = []
    for triplet in story.gold_triplets:
        subject_id = by_mention.get((triplet.sentence, triplet.trajector))
        object_id = by_mention.get((triplet.sentence, triplet.landmark))
        if subject_id is None or object_id is None:
            raise SpatialQAError(
                f"gold triplet references unknown mention in sentence {triplet.sentence}"
            )
        subjects = _expand(chain_of[subject_id], chain_of)
        objects = _expand(chain_of[object_id], chain_of)
        for s in subjects:
            for o in objects:
                if s == o:
                    continue
                facts.append(Fact(s, triplet.relation, o, provenance=Stated(triplet.sentence)))
    return facts


def _expand(chain: CorefChain, chain_of: dict[int, CorefChain]) -> list[int]:
    if chain.is_group:
        return expand_group(chain)
    return [chain.id]


def _facts_from_parse(
    triplets: list[ParsedTriplet], chains: list[CorefChain]
) -> list[Fact]:
    chain_of_mention = {id(m): chain for chain in chains for m in chain.mentions}
    chain_of = {c.id: c for c in chains}
    facts: list[Fact] = []
    for triplet in triplets:
        if triplet.relation is None:
            continue  # the no-spatial-meaning class: nothing to assert
        subject_chain = chain_of_mention.get(id(triplet.trajector))
        object_chain = chain_of_mention.get(id(triplet.landmark))
        if subject_chain is None or object_chain is None:
            continue
        for s in _expand(subject_chain, chain_of):
            for o in _expand(object_chain, chain_of):
                if s == o:
                    continue  # self-relations are extraction noise, drop them
                facts.append(
                    Fact(s, triplet.relation, o, provenance=Stated(triplet.sentence_index))
                )
    return facts


def solve_story(
    story: StoryRecord,
    mode: PipelineMode,
    *,
    lexicon: RelationLexicon | None = None,
    attribute_config=None,
    trace: bool = False,
    dropout: float = 0.0,
    dropout_rng: random.Random | None = None,
    max_facts: Optional[int] = None,
    parser_strict: bool = True,
) -> StoryOutcome:
    """Answer every question of one story; errors turn into abstentions.

    ``parser_strict`` validates generated corpora; turn it off for
    hand-written stories so off-grammar sentences degrade to missing facts
    instead of abstaining the whole story.
    """
    lexicon = lexicon or RelationLexicon.default()
    started = time.perf_counter()

    def abstain_all(error: str, contradiction: bool = False) -> StoryOutcome:
        predictions = []
        for question in story.questions:
            answer = NO if question.mode == "YN" else []
            predictions.append(
                Prediction(question_id=question.id, answer=answer, abstained=True)
            )
        return StoryOutcome(predictions, contradiction=contradiction, error=error)

    try:
        if mode is PipelineMode.GOLD_TRIPLETS:
            chains = chains_from_gold(story.gold_coref, attribute_config)
            facts = _facts_from_gold(story, chains)
        else:
            triplets, mentions = extract_story(
                story.sentences,
                lexicon,
                attribute_config=attribute_config,
                strict=parser_strict,
            )
            if dropout > 0.0:
                rng = dropout_rng or random.Random(0)
                triplets = [t for t in triplets if rng.random() >= dropout]
            chains = link_story(mentions)
            facts = _facts_from_parse(triplets, chains)

        kwargs = {} if max_facts is None else {"max_facts": max_facts}
        result = closure(facts, **kwargs)
    except SpatialQAError as exc:
        return abstain_all(str(exc))

    if result.contradiction is not None:
        return abstain_all(f"contradictory facts: {result.contradiction[0]}", True)

    setup_time = time.perf_counter() - started
    per_question_setup = setup_time / max(len(story.questions), 1)

    predictions: list[Prediction] = []
    for question in story.questions:
        q_started = time.perf_counter()
        try:
            candidates = (
                tuple(Relation[name] for name in question.candidates)
                if question.candidates
                else ()
            )
            if question.mode == "FR":
                parsed = parse_question(
                    question.text,
                    lexicon,
                    attribute_config=attribute_config,
                    fr_candidates=candidates,
                )
            else:
                parsed = parse_question(
                    question.text, lexicon, attribute_config=attribute_config
                )
            resolved_t = resolve_question_entity(
                parsed.trajector_mention, chains, attribute_config=attribute_config
            )
            resolved_l = resolve_question_entity(
                parsed.landmark_mention, chains, attribute_config=attribute_config
            )

            if parsed.mode == "YN":
                answer = answering.answer_yn(
                    result,
                    parsed.relation,
                    resolved_t.selector.quantifier,
                    resolved_t.entity_ids,
                    resolved_l.selector.quantifier,
                    resolved_l.entity_ids,
                )
                prediction = Prediction(question.id, answer)
                if trace:
                    prediction.trace = _yn_trace(
                        result, parsed.relation, resolved_t.entity_ids, resolved_l.entity_ids
                    )
            else:
                relations = answering.answer_fr(
                    result,
                    (resolved_t.entity_ids[0], resolved_l.entity_ids[0]),
                    candidates,
                )
                prediction = Prediction(question.id, [r.name for r in relations])
                if trace:
                    prediction.trace = {
                        r.name: result.explain(
                            resolved_t.entity_ids[0], r, resolved_l.entity_ids[0]
                        ).to_dict()
                        for r in relations
                    }
        except SpatialQAError:
            answer = NO if question.mode == "YN" else []
            prediction = Prediction(question.id, answer, abstained=True)
        prediction.runtime_s = (time.perf_counter() - q_started) + per_question_setup
        predictions.append(prediction)

    return StoryOutcome(predictions)


def _yn_trace(result: ClosureResult, relation, t_ids, l_ids) -> Optional[dict]:
    if len(t_ids) == 1 and len(l_ids) == 1 and t_ids[0] != l_ids[0]:
        truth = result.query(t_ids[0], relation, l_ids[0])
        if truth is TruthValue.TRUE:
            return result.explain(t_ids[0], relation, l_ids[0]).to_dict()
        if truth is TruthValue.FALSE:
            return result.explain(t_ids[0], relation, l_ids[0], negated=True).to_dict()
    return None


@dataclass
class PipelineRun:
    predictions: list[Prediction]
    contradictions: int
    story_errors: list[tuple[str, str]]

    @property
    def mean_runtime_s(self) -> Optional[float]:
        timed = [p.runtime_s for p in self.predictions if p.runtime_s is not None]
        return sum(timed) / len(timed) if timed else None


def run_pipeline(
    dataset: Dataset,
    mode: PipelineMode,
    *,
    lexicon: RelationLexicon | None = None,
    trace: bool = False,
    dropout: float = 0.0,
    dropout_seed: int = 0,
    max_facts: Optional[int] = None,
    parser_strict: bool = True,
) -> PipelineRun:
    """Solve every story of a dataset; deterministic for fixed inputs."""
    lexicon = lexicon or RelationLexicon.default()
    attribute_config = dataset.config.attribute_config()
    predictions: list[Prediction] = []
    contradictions = 0
    errors: list[tuple[str, str]] = []
    for story_index, story in enumerate(dataset.stories):
        dropout_rng = (
            random.Random((dropout_seed << 20) ^ story_index) if dropout > 0 else None
        )
        outcome = solve_story(
            story,
            mode,
            lexicon=lexicon,
            attribute_config=attribute_config,
            trace=trace,
            dropout=dropout,
            dropout_rng=dropout_rng,
            max_facts=max_facts,
            parser_strict=parser_strict,
        )
        predictions.extend(outcome.predictions)
        if outcome.contradiction:
            contradictions += 1
        if outcome.error:
            errors.append((story.id, outcome.error))
    return PipelineRun(predictions, contradictions, errors)
