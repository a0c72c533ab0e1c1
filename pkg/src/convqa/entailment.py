"""Rule-based entailed-question generation.

Given a source QA pair and the visual fact behind it, each rule emits a
question whose answer is determined by that fact alone. Rule inventory
(rule ids double as the deterministic output order, see docs/templates.md):

  attr-affirm     attribute fact -> "is the {subject} {attr}?"        yes
  attr-antonym    attribute fact -> "is the {subject} {antonym}?"     no
  attr-wh         attribute fact -> "what {hypernym} is the {subject}?" attr
  exist-object    relation fact  -> "is there {a/an} {object}?"       yes
  exist-subject   any fact       -> "is there {a/an} {subject}?"      yes
  rel-affirm      relation fact  -> "is the {subject} {pred} the {object}?" yes
  rel-antonym     relation fact  -> "is the {subject} {opposite} the {object}?" no
  rel-not-empty   relation fact, pred in {on, in} -> "is the {object} empty?" no
  rel-wh          relation fact  -> "what is {pred} the {object}?"    subject
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

from .lexicon import Lexicon, surface_forms
from .qa_gen import QAPair
from .scene_graph import Fact, FactKind

CONTAINMENT_PREDICATES = ("on", "in")


@dataclass(frozen=True)
class EntailedQuestion:
    question: str
    implied_answer: str
    source_fact_id: str
    rule_id: str

    def to_json_dict(self) -> dict:
        return {
            "question": self.question,
            "implied_answer": self.implied_answer,
            "source_fact_id": self.source_fact_id,
            "rule_id": self.rule_id,
        }


class EntailedQuestionGenerator(Protocol):
    """Interface the CTM loop depends on; learned generators plug in here."""

    def generate(self, source: QAPair, fact: Fact, k: int) -> list[EntailedQuestion]: ...


def generate_entailed(
    source: QAPair, fact: Fact, lex: Lexicon, k: int = 3
) -> list[EntailedQuestion]:
    """Fire every applicable rule, drop the source question itself, keep k."""
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    fid = fact.fact_id
    candidates: list[EntailedQuestion] = []

    if fact.kind in (FactKind.ATTRIBUTE, FactKind.EXISTENCE, FactKind.RELATION):
        np = surface_forms(fact.subject, lex)["np_with_article"]
        candidates.append(EntailedQuestion(f"is there {np}?", "yes", fid, "exist-subject"))

    if fact.kind is FactKind.ATTRIBUTE:
        subject, attr = fact.subject, fact.predicate
        candidates.append(EntailedQuestion(f"is the {subject} {attr}?", "yes", fid, "attr-affirm"))
        antonym = lex.antonym_of(attr)
        if antonym is not None:
            candidates.append(EntailedQuestion(f"is the {subject} {antonym}?", "no", fid, "attr-antonym"))
        hypernym = lex.hypernym_of(attr)
        if hypernym is not None:
            candidates.append(
                EntailedQuestion(f"what {hypernym} is the {subject}?", attr, fid, "attr-wh")
            )

    if fact.kind is FactKind.RELATION:
        subject, pred, obj = fact.subject, fact.predicate, fact.object
        obj_np = surface_forms(obj, lex)["np_with_article"]
        candidates.append(EntailedQuestion(f"is there {obj_np}?", "yes", fid, "exist-object"))
        candidates.append(
            EntailedQuestion(f"is the {subject} {pred} the {obj}?", "yes", fid, "rel-affirm")
        )
        opposite = lex.relation_antonym_of(pred)
        if opposite is not None:
            candidates.append(
                EntailedQuestion(f"is the {subject} {opposite} the {obj}?", "no", fid, "rel-antonym")
            )
        if pred in CONTAINMENT_PREDICATES:
            candidates.append(EntailedQuestion(f"is the {obj} empty?", "no", fid, "rel-not-empty"))
        candidates.append(EntailedQuestion(f"what is {pred} the {obj}?", subject, fid, "rel-wh"))

    kept = [c for c in candidates if c.question != source.question]
    kept.sort(key=lambda c: c.rule_id)
    return kept[:k]


class RuleBasedGenerator:
    """Reference EntailedQuestionGenerator over the fixed rule table."""

    def __init__(self, lex: Lexicon):
        self._lex = lex

    def generate(self, source: QAPair, fact: Fact, k: int) -> list[EntailedQuestion]:
        return generate_entailed(source, fact, self._lex, k)
