"""Deterministic forward-chaining inference over spatial facts.

Five rule schemas operate on positive facts:

* Not          R in Dir|PP:        R(x,y)           =>  NOT reverse(R)(x,y)
* Inverse      R in Dir|PP:        R(x,y)           =>  reverse(R)(y,x)
* Symmetry     R in Dis|RccNonPp:  R(x,y)           =>  R(y,x)
* Transitivity R in Dir|PP:        R(x,z), R(z,y)   =>  R(x,y)
* Combination  pp,pp' in {TPP,NTPP}, R in Dir:
               pp(x,z), R(z,h), pp'(y,h)            =>  R(x,y)

``closure`` materializes the least fact set containing the stated facts and
closed under all five schemas, with a derivation trace and a depth (hop
count, stated = 1) per fact. The result is deterministic and independent of
the order in which stated facts are supplied: stated facts are sorted into
canonical order up front and every internal iteration is over sorted keys.

Evaluation strategy: unary rules run over a worklist; transitivity is
computed per relation as graph reachability over the "base" edges (facts of
that relation not themselves produced by transitivity), which yields the
same fixpoint as pairwise chaining at a fraction of the rule firings; the
combination rule joins directional facts against proper-part child indexes.
Equality with exhaustive naive iteration is covered by the test suite.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Union

from .errors import CapacityError, ContradictionError, DataError
from .relations import (
    DIR_PP,
    DIRECTIONAL,
    DIS_RCC,
    RELATION_INDEX,
    Relation,
    reverse,
)

EntityId = int
FactKey = tuple[Relation, int, int]

RULE_NOT = "Not"
RULE_INVERSE = "Inverse"
RULE_SYMMETRY = "Symmetry"
RULE_TRANSITIVITY = "Transitivity"
RULE_COMBINATION = "Combination"
RULE_NAMES = (RULE_NOT, RULE_INVERSE, RULE_SYMMETRY, RULE_TRANSITIVITY, RULE_COMBINATION)

DEFAULT_MAX_FACTS = 10_000_000

_COMBINABLE_PP = (Relation.TPP, Relation.NTPP)


@dataclass(frozen=True)
class Stated:
    """Provenance of a fact read directly from a story sentence."""

    sentence_index: int


@dataclass(frozen=True)
class Derived:
    """Provenance of a rule-derived fact; premises reference positive facts."""

    rule: str
    premises: tuple[FactKey, ...]


Provenance = Union[Stated, Derived]


@dataclass(frozen=True)
class Fact:
    """A grounded triplet with polarity and provenance."""

    subject: int
    relation: Relation
    object: int
    negated: bool = False
    provenance: Optional[Provenance] = None

    def key(self) -> FactKey:
        return (self.relation, self.subject, self.object)

    def __str__(self) -> str:
        body = f"{self.relation.name}({self.subject},{self.object})"
        return f"NOT {body}" if self.negated else body


class TruthValue(Enum):
    TRUE = "True"
    FALSE = "False"
    UNKNOWN = "Unknown"


def fact_sort_key(key: FactKey) -> tuple[int, int, int]:
    relation, subject, obj = key
    return (RELATION_INDEX[relation], subject, obj)


def format_key(key: FactKey, negated: bool = False) -> str:
    relation, subject, obj = key
    body = f"{relation.name}({subject},{obj})"
    return f"NOT {body}" if negated else body


# --- the five rule schemas as total functions -------------------------------

def apply_inverse(fact: Fact) -> Fact | None:
    """Dir|PP: R(x,y) => reverse(R)(y,x)."""
    if fact.negated or fact.relation not in DIR_PP:
        return None
    return Fact(
        fact.object,
        reverse(fact.relation),
        fact.subject,
        provenance=Derived(RULE_INVERSE, (fact.key(),)),
    )


def apply_symmetry(fact: Fact) -> Fact | None:
    """Dis|RccNonPp: R(x,y) => R(y,x)."""
    if fact.negated or fact.relation not in DIS_RCC:
        return None
    return Fact(
        fact.object,
        fact.relation,
        fact.subject,
        provenance=Derived(RULE_SYMMETRY, (fact.key(),)),
    )


def apply_not(fact: Fact) -> Fact | None:
    """Dir|PP: R(x,y) => NOT reverse(R)(x,y)."""
    if fact.negated or fact.relation not in DIR_PP:
        return None
    return Fact(
        fact.subject,
        reverse(fact.relation),
        fact.object,
        negated=True,
        provenance=Derived(RULE_NOT, (fact.key(),)),
    )


def apply_transitivity(f1: Fact, f2: Fact) -> Fact | None:
    """Dir|PP, one fixed R: R(x,z), R(z,y) => R(x,y)."""
    if f1.negated or f2.negated:
        return None
    if f1.relation is not f2.relation or f1.relation not in DIR_PP:
        return None
    if f1.object != f2.subject:
        return None
    return Fact(
        f1.subject,
        f1.relation,
        f2.object,
        provenance=Derived(RULE_TRANSITIVITY, (f1.key(), f2.key())),
    )


def apply_combination(f1: Fact, f2: Fact, f3: Fact) -> Fact | None:
    """pp(x,z), R(z,h), pp'(y,h) => R(x,y) for pp, pp' in {TPP, NTPP}, R in Dir."""
    if f1.negated or f2.negated or f3.negated:
        return None
    if f1.relation not in _COMBINABLE_PP or f3.relation not in _COMBINABLE_PP:
        return None
    if f2.relation not in DIRECTIONAL:
        return None
    if f1.object != f2.subject or f3.object != f2.object:
        return None
    return Fact(
        f1.subject,
        f2.relation,
        f3.subject,
        provenance=Derived(RULE_COMBINATION, (f1.key(), f2.key(), f3.key())),
    )


# --- derivation traces -------------------------------------------------------

@dataclass(frozen=True)
class DerivationNode:
    """A node of a derivation tree; leaves are stated facts (rule is None)."""

    fact: Fact
    rule: Optional[str]
    children: tuple["DerivationNode", ...] = ()
    sentence_index: Optional[int] = None

    @property
    def depth(self) -> int:
        if not self.children:
            return 1
        return 1 + max(child.depth for child in self.children)

    def leaves(self) -> list["DerivationNode"]:
        if not self.children:
            return [self]
        out = []
        for child in self.children:
            out.extend(child.leaves())
        return out

    def to_dict(self) -> dict:
        node = {"fact": str(self.fact), "rule": self.rule}
        if self.sentence_index is not None:
            node["sentence"] = self.sentence_index
        if self.children:
            node["premises"] = [child.to_dict() for child in self.children]
        return node


_RULE_FUNCS = {
    RULE_INVERSE: apply_inverse,
    RULE_SYMMETRY: apply_symmetry,
    RULE_NOT: apply_not,
    RULE_TRANSITIVITY: apply_transitivity,
    RULE_COMBINATION: apply_combination,
}

_REVERSE_FAST = {r: reverse(r) for r in Relation}


def replay(node: DerivationNode) -> Fact:
    """Re-derive a tree bottom-up; raises DataError on any inconsistent step."""
    if node.rule is None:
        return node.fact
    func = _RULE_FUNCS.get(node.rule)
    if func is None:
        raise DataError(f"unknown rule in trace: {node.rule!r}")
    premises = [replay(child) for child in node.children]
    derived = func(*premises)
    if derived is None:
        raise DataError(f"rule {node.rule} does not fire on recorded premises")
    if (derived.key(), derived.negated) != (node.fact.key(), node.fact.negated):
        raise DataError(
            f"replaying {node.rule} gives {derived}, trace claims {node.fact}"
        )
    return node.fact


# --- closure -----------------------------------------------------------------

# trace record: (rule, premises, depth, sentence_index); rule is "stated" for leaves.
_Trace = tuple[str, tuple[FactKey, ...], int, Optional[int]]
STATED = "stated"


@dataclass
class ClosureResult:
    """Fixpoint of the five rule schemas over a stated fact set.

    ``positives`` and ``negatives`` map fact keys to trace records. The
    contradiction field carries the canonically-first (positive, negative)
    pair sharing a key, if any; closure always completes.
    """

    positives: dict[FactKey, _Trace]
    negatives: dict[FactKey, _Trace]
    contradiction: Optional[tuple[Fact, Fact]]
    stated_count: int

    def query(self, subject: int, relation: Relation, obj: int) -> TruthValue:
        if self.contradiction is not None:
            raise ContradictionError(
                f"closure is contradictory on {self.contradiction[0]}"
            )
        key = (relation, subject, obj)
        if key in self.positives:
            return TruthValue.TRUE
        if key in self.negatives:
            return TruthValue.FALSE
        return TruthValue.UNKNOWN

    def depth(self, subject: int, relation: Relation, obj: int, negated: bool = False) -> int:
        table = self.negatives if negated else self.positives
        return table[(relation, subject, obj)][2]

    def explain(
        self, subject: int, relation: Relation, obj: int, negated: bool = False
    ) -> DerivationNode:
        key = (relation, subject, obj)
        table = self.negatives if negated else self.positives
        if key not in table:
            raise KeyError(f"fact was never derived: {format_key(key, negated)}")
        return self._node(key, negated)

    def _node(self, key: FactKey, negated: bool) -> DerivationNode:
        rule, premises, _depth, sentence = (
            self.negatives[key] if negated else self.positives[key]
        )
        relation, subject, obj = key
        fact = Fact(subject, relation, obj, negated=negated)
        if rule == STATED:
            return DerivationNode(fact, None, (), sentence)
        children = tuple(self._node(p, False) for p in premises)
        return DerivationNode(fact, rule, children)

    def positive_facts(self) -> list[Fact]:
        return [Fact(s, r, o) for (r, s, o) in sorted(self.positives, key=fact_sort_key)]

    def negative_facts(self) -> list[Fact]:
        return [
            Fact(s, r, o, negated=True)
            for (r, s, o) in sorted(self.negatives, key=fact_sort_key)
        ]

    def to_json_dict(self, include_traces: bool = True) -> dict:
        """Canonical serialization; byte-identical across stated-order permutations."""
        out = {
            "positives": [format_key(k) for k in sorted(self.positives, key=fact_sort_key)],
            "negatives": [
                format_key(k, True) for k in sorted(self.negatives, key=fact_sort_key)
            ],
            "contradiction": None,
        }
        if self.contradiction is not None:
            pos, neg = self.contradiction
            out["contradiction"] = {"fact": str(pos), "conflicting": str(neg)}
        if include_traces:
            traces = {}
            for table, negated in ((self.positives, False), (self.negatives, True)):
                for key in sorted(table, key=fact_sort_key):
                    rule, premises, depth, sentence = table[key]
                    entry = {"rule": rule, "depth": depth}
                    if rule == STATED:
                        entry["sentence"] = sentence
                    else:
                        entry["premises"] = [format_key(p) for p in premises]
                    traces[format_key(key, negated)] = entry
            out["traces"] = traces
        return out


class _Builder:
    def __init__(self, max_facts: int):
        self.max_facts = max_facts
        self.pos: dict[FactKey, _Trace] = {}
        self.neg: dict[FactKey, _Trace] = {}
        self.pos_order: list[FactKey] = []
        self.pending_idx = 0
        self.stated_count = 0
        self.derived_count = 0
        # per-relation adjacency over non-transitivity facts, for reachability
        self.base_adj: dict[Relation, dict[int, set[int]]] = {}
        self.base_version: dict[Relation, int] = {}
        self.tc_version: dict[Relation, int] = {}
        # container -> {child: pp relation} for the combination rule
        self.pp_children: dict[int, dict[int, Relation]] = {}
        self.pp_version = 0
        self.comb_watermark = 0
        self.comb_pp_version = -1

    def _bump(self) -> None:
        self.derived_count += 1
        if self.derived_count > self.max_facts:
            raise CapacityError(f"derived-fact count exceeded bound of {self.max_facts}")

    def add_positive(self, key: FactKey, trace: _Trace) -> bool:
        if key in self.pos:
            return False
        self.pos[key] = trace
        self.pos_order.append(key)
        relation, subject, obj = key
        if trace[0] != RULE_TRANSITIVITY and relation in DIR_PP:
            self.base_adj.setdefault(relation, {}).setdefault(subject, set()).add(obj)
            self.base_version[relation] = self.base_version.get(relation, 0) + 1
        if relation is Relation.TPP or relation is Relation.NTPP:
            kids = self.pp_children.setdefault(obj, {})
            # deterministic choice when a pair is both TPP and NTPP: keep the
            # canonically-first relation as the combination premise
            prev = kids.get(subject)
            if prev is None or RELATION_INDEX[relation] < RELATION_INDEX[prev]:
                kids[subject] = relation
            self.pp_version += 1
        if trace[0] != STATED:
            self._bump()
        return True

    def add_negative(self, key: FactKey, trace: _Trace) -> bool:
        if key in self.neg:
            return False
        self.neg[key] = trace
        self._bump()
        return True

    def run_unary(self) -> bool:
        added = False
        pos = self.pos
        neg = self.neg
        order = self.pos_order
        dir_pp = DIR_PP
        max_facts = self.max_facts
        derived = self.derived_count
        while self.pending_idx < len(order):
            key = order[self.pending_idx]
            self.pending_idx += 1
            relation, subject, obj = key
            depth = pos[key][2] + 1
            if relation in dir_pp:
                rev = _REVERSE_FAST[relation]
                inv_key = (rev, obj, subject)
                if inv_key not in pos:
                    self.derived_count = derived
                    self.add_positive(inv_key, (RULE_INVERSE, (key,), depth, None))
                    derived = self.derived_count
                    added = True
                not_key = (rev, subject, obj)
                if not_key not in neg:
                    neg[not_key] = (RULE_NOT, (key,), depth, None)
                    derived += 1
                    if derived > max_facts:
                        self.derived_count = derived
                        raise CapacityError(
                            f"derived-fact count exceeded bound of {max_facts}"
                        )
                    added = True
            else:
                sym_key = (relation, obj, subject)
                if sym_key not in pos:
                    self.derived_count = derived
                    self.add_positive(sym_key, (RULE_SYMMETRY, (key,), depth, None))
                    derived = self.derived_count
                    added = True
        self.derived_count = derived
        return added

    def run_transitivity(self) -> bool:
        added = False
        for relation in sorted(self.base_adj, key=lambda r: RELATION_INDEX[r]):
            version = self.base_version.get(relation, 0)
            if self.tc_version.get(relation) == version:
                continue
            self.tc_version[relation] = version
            pos = self.pos
            order_append = self.pos_order.append
            is_pp = relation is Relation.TPP or relation is Relation.NTPP
            max_facts = self.max_facts
            derived = self.derived_count
            adj = {
                node: sorted(targets)
                for node, targets in self.base_adj[relation].items()
            }
            for source in sorted(adj):
                seen: set[int] = set()
                seen_add = seen.add
                queue = deque((source,))
                pop = queue.popleft
                push = queue.append
                while queue:
                    mid = pop()
                    successors = adj.get(mid)
                    if not successors:
                        continue
                    for target in successors:
                        if target in seen:
                            continue
                        seen_add(target)
                        push(target)
                        key = (relation, source, target)
                        if key in pos:
                            continue
                        left = (relation, source, mid)
                        right = (relation, mid, target)
                        dl = pos[left][2]
                        dr = pos[right][2]
                        depth = (dl if dl >= dr else dr) + 1
                        # transitivity facts are never base edges, so the
                        # generic add bookkeeping reduces to this
                        pos[key] = (RULE_TRANSITIVITY, (left, right), depth, None)
                        order_append(key)
                        if is_pp:
                            kids = self.pp_children.setdefault(target, {})
                            prev = kids.get(source)
                            if prev is None or RELATION_INDEX[relation] < RELATION_INDEX[prev]:
                                kids[source] = relation
                            self.pp_version += 1
                        derived += 1
                        if derived > max_facts:
                            self.derived_count = derived
                            raise CapacityError(
                                f"derived-fact count exceeded bound of {max_facts}"
                            )
                        added = True
            self.derived_count = derived
        return added

    def run_combination(self) -> bool:
        if not self.pp_children:
            self.comb_watermark = len(self.pos_order)
            return False
        added = False
        if self.comb_pp_version != self.pp_version:
            self.comb_watermark = 0
            self.comb_pp_version = self.pp_version
        order = self.pos_order
        pos = self.pos
        i = self.comb_watermark
        while i < len(order):
            key = order[i]
            i += 1
            relation, mid, host = key
            if relation not in DIRECTIONAL:
                continue
            kids_mid = self.pp_children.get(mid)
            kids_host = self.pp_children.get(host)
            if not kids_mid or not kids_host:
                continue
            dir_depth = pos[key][2]
            for x in sorted(kids_mid):
                left = (kids_mid[x], x, mid)
                left_depth = pos[left][2]
                for y in sorted(kids_host):
                    ckey = (relation, x, y)
                    if ckey in pos:
                        continue
                    right = (kids_host[y], y, host)
                    depth = 1 + max(left_depth, dir_depth, pos[right][2])
                    self.add_positive(
                        ckey, (RULE_COMBINATION, (left, key, right), depth, None)
                    )
                    added = True
        self.comb_watermark = i
        return added


def closure(
    stated: Iterable[Fact], max_facts: int = DEFAULT_MAX_FACTS
) -> ClosureResult:
    """Close a stated fact set under the five rule schemas.

    Raises DataError for negated or self-referential stated facts and
    CapacityError when the derived-fact count exceeds ``max_facts``.
    """
    builder = _Builder(max_facts)

    keyed: dict[FactKey, int] = {}
    for fact in stated:
        if fact.negated:
            raise DataError(f"stated facts must be positive: {fact}")
        if fact.subject == fact.object:
            raise DataError(f"stated facts must relate distinct entities: {fact}")
        if fact.subject < 0 or fact.object < 0:
            raise DataError(f"entity ids must be non-negative: {fact}")
        sentence = (
            fact.provenance.sentence_index
            if isinstance(fact.provenance, Stated)
            else 0
        )
        key = fact.key()
        if key in keyed:
            keyed[key] = min(keyed[key], sentence)
        else:
            keyed[key] = sentence

    for key in sorted(keyed, key=fact_sort_key):
        builder.add_positive(key, (STATED, (), 1, keyed[key]))
        builder.stated_count += 1

    changed = True
    while changed:
        changed = False
        if builder.run_unary():
            changed = True
        if builder.run_transitivity():
            changed = True
        if builder.run_combination():
            changed = True

    contradiction = None
    common = sorted(builder.pos.keys() & builder.neg.keys(), key=fact_sort_key)
    if common:
        relation, subject, obj = common[0]
        contradiction = (
            Fact(subject, relation, obj),
            Fact(subject, relation, obj, negated=True),
        )

    return ClosureResult(
        positives=builder.pos,
        negatives=builder.neg,
        contradiction=contradiction,
        stated_count=builder.stated_count,
    )
