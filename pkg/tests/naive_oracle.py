"""Exhaustive naive fixpoint: re-apply every rule to every fact tuple until
no change. Deliberately strategy-free; the reference the engine is checked
against."""

from spatialqa.engine import (
    Fact,
    apply_combination,
    apply_inverse,
    apply_not,
    apply_symmetry,
    apply_transitivity,
)
from spatialqa.relations import DIRECTIONAL, Relation


def naive_closure(stated):
    """Returns (positive key set, negative key set)."""
    pos = {}
    neg = set()
    for fact in stated:
        pos[fact.key()] = Fact(fact.subject, fact.relation, fact.object)

    changed = True
    while changed:
        changed = False
        snapshot = list(pos.values())

        for fact in snapshot:
            for derived in (apply_inverse(fact), apply_symmetry(fact)):
                if derived is not None and derived.key() not in pos:
                    pos[derived.key()] = Fact(derived.subject, derived.relation, derived.object)
                    changed = True
            negated = apply_not(fact)
            if negated is not None and negated.key() not in neg:
                neg.add(negated.key())
                changed = True

        for f1 in snapshot:
            for f2 in snapshot:
                derived = apply_transitivity(f1, f2)
                if derived is not None and derived.key() not in pos:
                    pos[derived.key()] = Fact(derived.subject, derived.relation, derived.object)
                    changed = True

        pp = [f for f in snapshot if f.relation in (Relation.TPP, Relation.NTPP)]
        dirs = [f for f in snapshot if f.relation in DIRECTIONAL]
        for f1 in pp:
            for f2 in dirs:
                for f3 in pp:
                    derived = apply_combination(f1, f2, f3)
                    if derived is not None and derived.key() not in pos:
                        pos[derived.key()] = Fact(
                            derived.subject, derived.relation, derived.object
                        )
                        changed = True

    return set(pos), neg
