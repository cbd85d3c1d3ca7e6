"""Qualitative spatial reasoning and spatial question answering.

The package separates extraction from reasoning: a controlled-language
parser and rule-based entity linker produce relation triplets, a
forward-chaining engine closes them under five inference rules, and an
answer layer evaluates quantified yes/no and find-all-relations queries.
A scene generator with a geometric oracle produces benchmark datasets whose
every gold answer is independently checkable.
"""

from .answering import NO, YES, answer_fr, answer_yn, evaluate_quantified
from .coref import (
    AttributeConfig,
    Cardinality,
    CorefChain,
    EntitySelector,
    Mention,
    Quantifier,
    expand_group,
    link_story,
    resolve_question_entity,
)
from .engine import (
    ClosureResult,
    DerivationNode,
    Fact,
    Derived,
    Stated,
    TruthValue,
    apply_combination,
    apply_inverse,
    apply_not,
    apply_symmetry,
    apply_transitivity,
    closure,
    replay,
)
from .errors import (
    AmbiguityError,
    ArityError,
    CapacityError,
    ConfigError,
    ContradictionError,
    DataError,
    GrammarError,
    LexiconError,
    NoMatchError,
    SpatialQAError,
)
from .generator import (
    Dataset,
    GenConfig,
    GoldChain,
    GoldTriplet,
    QuestionRecord,
    StoryRecord,
    build_story,
    generate_dataset,
    generate_scene,
    load_dataset,
    render_story,
    save_dataset,
    select_stated_facts,
    synthesize_extra_questions,
)
from .geometry import Box, Scene, SceneEntity, geometric_truth
from .metrics import Metrics, evaluate
from .parsing import (
    ParsedQuestion,
    ParsedTriplet,
    extract_story,
    parse_question,
    parse_sentence,
)
from .pipeline import PipelineMode, Prediction, run_pipeline, solve_story
from .relations import (
    Relation,
    RelationClass,
    RelationLexicon,
    class_of,
    reverse,
)

__version__ = "0.1.0"
