"""Rule-based consistency checker.

Classifies a candidate (question, answer) against the visual fact behind a
source QA pair as consistent, inconsistent, or unrelated, with a confidence
usable as an abstention gate. Confidence is a fixed three-point scale:
1.0 when the question parses exactly and its truth is determined by the fact,
0.6 when the question mentions a fact entity but the pattern is unrecognized
relative to the fact, 0.5 when the question does not parse at all.

Any learned checker substituted behind the same interface should calibrate
its scores to the same gate semantics (abstain below the threshold).
"""

from __future__ import annotations

from dataclasses import dataclass

from .lexicon import Lexicon
from .metrics import normalize_answer
from .qa_gen import Label, QAPair, QaKind
from .question_parse import Proposition, parse_question
from .scene_graph import Fact, FactKind

CONTAINMENT_PREDICATES = ("on", "in")


@dataclass(frozen=True)
class Verdict:
    label: Label
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0,1], got {self.confidence}")


@dataclass(frozen=True)
class CheckerConfig:
    confidence_threshold: float = 0.9

    def __post_init__(self):
        if not 0.0 <= self.confidence_threshold <= 1.0:
            raise ValueError(f"threshold must be in [0,1], got {self.confidence_threshold}")


def proposition_truth(prop: Proposition, fact: Fact, lex: Lexicon) -> str | None:
    """Answer the proposition from the fact alone, or None if undetermined."""
    if prop.form == "existence":
        if prop.entity == fact.subject or (fact.object and prop.entity == fact.object):
            return "yes"
        return None

    if prop.form == "emptiness":
        if (
            fact.kind is FactKind.RELATION
            and fact.object == prop.entity
            and fact.predicate in CONTAINMENT_PREDICATES
        ):
            return "no"
        if fact.kind is FactKind.ATTRIBUTE and fact.subject == prop.entity:
            if fact.predicate == "empty":
                return "yes"
            if lex.is_antonym_pair("empty", fact.predicate):
                return "no"
        return None

    if prop.form == "attribute":
        if fact.kind is FactKind.ATTRIBUTE and fact.subject == prop.entity:
            if prop.attr == fact.predicate:
                return "yes"
            if lex.is_antonym_pair(prop.attr, fact.predicate):
                return "no"
        return None

    if prop.form == "wh_attribute":
        if (
            fact.kind is FactKind.ATTRIBUTE
            and fact.subject == prop.entity
            and lex.hypernym_of(fact.predicate) == prop.category
        ):
            return fact.predicate
        return None

    if prop.form == "relation":
        if fact.kind is FactKind.RELATION and fact.subject == prop.entity and fact.object == prop.object:
            if prop.predicate == fact.predicate:
                return "yes"
            if lex.is_relation_antonym_pair(prop.predicate, fact.predicate):
                return "no"
        return None

    if prop.form == "wh_relation":
        if fact.kind is FactKind.RELATION and fact.predicate == prop.predicate and fact.object == prop.object:
            return fact.subject
        return None

    return None


def classify(
    source: QAPair,
    fact: Fact,
    candidate_question: str,
    candidate_answer: str,
    lex: Lexicon,
) -> Verdict:
    """Classify a candidate QA against the source QA's fact."""
    prop = parse_question(candidate_question, lex, entity_hints=(fact.subject, fact.object))
    if prop is None:
        return Verdict(Label.UNRELATED, 0.5)

    fact_entities = {fact.subject} | ({fact.object} if fact.object else set())
    if not (prop.entities() & fact_entities):
        return Verdict(Label.UNRELATED, 0.6)

    truth = proposition_truth(prop, fact, lex)
    if truth is None:
        return Verdict(Label.UNRELATED, 0.6)

    if normalize_answer(candidate_answer) == normalize_answer(truth):
        return Verdict(Label.CONSISTENT, 1.0)
    return Verdict(Label.INCONSISTENT, 1.0)


def gated_classify(
    cfg: CheckerConfig,
    source: QAPair,
    fact: Fact,
    candidate_question: str,
    candidate_answer: str,
    lex: Lexicon,
) -> Verdict | None:
    """classify, abstaining (None) below the confidence threshold."""
    verdict = classify(source, fact, candidate_question, candidate_answer, lex)
    if verdict.confidence >= cfg.confidence_threshold:
        return verdict
    return None


def infer_fact_from_source(question: str, answer: str, lex: Lexicon, image_id: str = "") -> Fact | None:
    """Recover the fact asserted by a template-shaped source QA pair.

    Lets the checker run in batch mode over labeled-pair files that carry no
    explicit fact. Returns None when the pair is not template-shaped.
    """
    prop = parse_question(question, lex)
    if prop is None:
        return None
    answer = normalize_answer(answer)

    if prop.form == "existence" and answer == "yes":
        return Fact(image_id, FactKind.EXISTENCE, subject=prop.entity)
    if prop.form == "attribute":
        if answer == "yes":
            return Fact(image_id, FactKind.ATTRIBUTE, subject=prop.entity, predicate=prop.attr)
        if answer == "no":
            antonym = lex.antonym_of(prop.attr)
            if antonym is not None:
                return Fact(image_id, FactKind.ATTRIBUTE, subject=prop.entity, predicate=antonym)
        return None
    if prop.form == "wh_attribute" and answer:
        return Fact(image_id, FactKind.ATTRIBUTE, subject=prop.entity, predicate=answer)
    if prop.form == "relation":
        if answer == "yes":
            return Fact(
                image_id, FactKind.RELATION, subject=prop.entity, predicate=prop.predicate, object=prop.object
            )
        if answer == "no":
            opposite = lex.relation_antonym_of(prop.predicate)
            if opposite is not None:
                return Fact(
                    image_id, FactKind.RELATION, subject=prop.entity, predicate=opposite, object=prop.object
                )
        return None
    if prop.form == "wh_relation" and answer:
        return Fact(
            image_id, FactKind.RELATION, subject=answer, predicate=prop.predicate, object=prop.object
        )
    return None


def check_labeled_pairs(records: list[dict], lex: Lexicon, cfg: CheckerConfig | None = None) -> list[dict]:
    """Batch mode over LabeledPair records: verdict + gold label per record."""
    out = []
    for record in records:
        src = record["source"]
        fact = infer_fact_from_source(src["question"], src["answer"], lex)
        if fact is None:
            verdict = Verdict(Label.UNRELATED, 0.5)
        else:
            source = QAPair(src["question"], src["answer"], _kind_of(src["question"]), fact.fact_id)
            verdict = classify(
                source, fact, record["candidate"]["question"], record["candidate"]["answer"], lex
            )
        gated = cfg is None or verdict.confidence >= cfg.confidence_threshold
        out.append(
            {
                "label": verdict.label.value,
                "confidence": verdict.confidence,
                "gold_label": record.get("label"),
                "abstained": not gated,
            }
        )
    return out


def confusion_matrix_tsv(verdicts: list[dict]) -> str:
    """Gold-by-predicted counts over non-abstained verdicts, as TSV."""
    labels = [label.value for label in Label]
    counts = {(g, p): 0 for g in labels for p in labels}
    for v in verdicts:
        if v.get("abstained") or v.get("gold_label") not in labels:
            continue
        counts[(v["gold_label"], v["label"])] += 1
    lines = ["gold\\pred\t" + "\t".join(labels)]
    for g in labels:
        lines.append(g + "\t" + "\t".join(str(counts[(g, p)]) for p in labels))
    return "\n".join(lines) + "\n"


def _kind_of(question: str) -> QaKind:
    return QaKind.WH if question.startswith("what") else QaKind.YESNO
