"""Recover the proposition behind a template-shaped question.

Used by the consistency checker and the oracle answerer. The brute-force
fact-checker in the test suite deliberately does NOT use this module.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .lexicon import Lexicon

_EXISTENCE = re.compile(r"^is there (?:an? )?(.+)\?$")
_EMPTINESS = re.compile(r"^is the (.+) empty\?$")
_WH_RELATION = re.compile(r"^what is (.+?) the (.+)\?$")
_WH_ATTRIBUTE = re.compile(r"^what (.+) is the (.+)\?$")
_ATTR_FALLBACK = re.compile(r"^is the (.+) (\S+)\?$")


@dataclass(frozen=True)
class Proposition:
    form: str  # existence | emptiness | attribute | wh_attribute | relation | wh_relation
    entity: str = ""
    attr: str = ""
    category: str = ""
    predicate: str = ""
    object: str = ""

    def entities(self) -> set[str]:
        return {e for e in (self.entity, self.object) if e}


def _known_predicates(lex: Lexicon) -> list[str]:
    preds = set(lex.relation_antonyms) | set(lex.relation_antonyms.values())
    return sorted(preds, key=len, reverse=True)


def parse_question(
    question: str, lex: Lexicon, entity_hints: Sequence[str] = ()
) -> Proposition | None:
    """Parse a question into a Proposition, or None when no template matches.

    entity_hints (known noun phrases, e.g. the fact's entities or the graph's
    object names) disambiguate multi-word subjects in attribute probes.
    """
    m = _EXISTENCE.match(question)
    if m:
        return Proposition(form="existence", entity=m.group(1))

    m = _EMPTINESS.match(question)
    if m:
        return Proposition(form="emptiness", entity=m.group(1))

    m = _WH_RELATION.match(question)
    if m:
        return Proposition(form="wh_relation", predicate=m.group(1), object=m.group(2))

    m = _WH_ATTRIBUTE.match(question)
    if m:
        return Proposition(form="wh_attribute", category=m.group(1), entity=m.group(2))

    if question.startswith("is the ") and question.endswith("?"):
        body = question[len("is the ") : -1]
        # Relation probe: "is the {subj} {pred} the {obj}?" with a known predicate.
        for pred in _known_predicates(lex):
            marker = f" {pred} the "
            if marker in body:
                subj, obj = body.split(marker, 1)
                if subj and obj:
                    return Proposition(form="relation", entity=subj, predicate=pred, object=obj)
        # Attribute probe: prefer the longest known entity as the subject.
        for hint in sorted(set(entity_hints), key=len, reverse=True):
            prefix = f"{hint} "
            if body.startswith(prefix):
                attr = body[len(prefix) :]
                if attr:
                    return Proposition(form="attribute", entity=hint, attr=attr)
        m = _ATTR_FALLBACK.match(question)
        if m:
            return Proposition(form="attribute", entity=m.group(1), attr=m.group(2))

    return None
