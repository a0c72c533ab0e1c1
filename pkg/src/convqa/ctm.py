"""Consistency teacher loop: entail, answer, gate, augment.

For every source QA in every set, entailed questions are posed to a pluggable
answerer. An answer is accepted as synthetic ground truth only when the
checker judges it consistent at or above its confidence gate AND the answerer
reported confidence strictly above the answer gate. Accepted examples are
emitted as training data and fed back to the answerer's learn hook.

The loop passes question text only to the answerer; the rules' implied
answers exist solely for tests and never cross the answerer interface.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Protocol, Sequence

from .checker import CheckerConfig, classify, gated_classify, proposition_truth
from .entailment import EntailedQuestionGenerator, RuleBasedGenerator
from .errors import UnknownImage
from .lexicon import Lexicon
from .metrics import MetricsReport, Prediction, evaluate
from .qa_gen import ConsistentSet, Label
from .question_parse import parse_question
from .scene_graph import SceneGraph


@dataclass(frozen=True)
class Answer:
    text: str
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0,1], got {self.confidence}")


class Answerer(Protocol):
    def answer(self, question: str, image_id: str) -> Answer: ...

    def learn(self, question: str, answer_text: str, image_id: str) -> None: ...


@dataclass(frozen=True)
class AugmentedExample:
    image_id: str
    question: str
    answer: str
    set_id: str
    rule_id: str
    checker_confidence: float
    answer_confidence: float

    def to_json_dict(self) -> dict:
        return {
            "image_id": self.image_id,
            "question": self.question,
            "answer": self.answer,
            "provenance": {
                "set_id": self.set_id,
                "rule_id": self.rule_id,
                "checker_conf": self.checker_confidence,
                "answer_conf": self.answer_confidence,
            },
        }


@dataclass(frozen=True)
class CtmConfig:
    answer_confidence_threshold: float = 0.7
    checker: CheckerConfig = field(default_factory=CheckerConfig)
    k: int = 3
    rounds: int = 1
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.answer_confidence_threshold <= 1.0:
            raise ValueError("answer_confidence_threshold must be in [0,1]")
        if self.rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {self.rounds}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")


@dataclass
class RoundStats:
    emitted: int = 0
    inconsistent: int = 0
    unrelated: int = 0
    abstained: int = 0
    low_confidence: int = 0
    failures: int = 0

    def to_json_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class TrainingReport:
    rounds: tuple[tuple[RoundStats, MetricsReport | None], ...]
    warnings: tuple[str, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "rounds": [
                {
                    "stats": stats.to_json_dict(),
                    "metrics": metrics.to_json_dict() if metrics is not None else None,
                }
                for stats, metrics in self.rounds
            ],
            "warnings": list(self.warnings),
        }


def ctm_round(
    sets: Iterable[ConsistentSet],
    answerer: Answerer,
    cfg: CtmConfig,
    lex: Lexicon,
    generator: EntailedQuestionGenerator | None = None,
) -> tuple[list[AugmentedExample], RoundStats]:
    """One pass of the teacher loop over the sets, in deterministic order."""
    if generator is None:
        generator = RuleBasedGenerator(lex)
    stats = RoundStats()
    emitted: list[AugmentedExample] = []

    for cset in sets:
        for source in cset.qas:
            for eq in generator.generate(source, cset.fact, cfg.k):
                try:
                    answer = answerer.answer(eq.question, cset.image_id)
                except Exception:
                    stats.failures += 1
                    continue
                verdict = gated_classify(
                    cfg.checker, source, cset.fact, eq.question, answer.text, lex
                )
                if verdict is None:
                    stats.abstained += 1
                elif verdict.label is Label.INCONSISTENT:
                    stats.inconsistent += 1
                elif verdict.label is Label.UNRELATED:
                    stats.unrelated += 1
                elif answer.confidence <= cfg.answer_confidence_threshold:
                    stats.low_confidence += 1
                else:
                    example = AugmentedExample(
                        image_id=cset.image_id,
                        question=eq.question,
                        answer=answer.text,
                        set_id=cset.set_id,
                        rule_id=eq.rule_id,
                        checker_confidence=verdict.confidence,
                        answer_confidence=answer.confidence,
                    )
                    stats.emitted += 1
                    emitted.append(example)
                    answerer.learn(example.question, example.answer, example.image_id)
    return emitted, stats


def evaluate_answerer(answerer: Answerer, eval_sets: Sequence[ConsistentSet]) -> MetricsReport | None:
    """Score the answerer on gold sets; None when there is nothing to score."""
    if not eval_sets:
        return None
    preds = []
    for cset in eval_sets:
        for idx, qa in enumerate(cset.qas):
            try:
                ans = answerer.answer(qa.question, cset.image_id)
            except Exception:
                continue
            preds.append(Prediction(cset.set_id, idx, ans.text, ans.confidence))
    return evaluate(eval_sets, preds)


def run_ctm(
    sets: Sequence[ConsistentSet],
    answerer: Answerer,
    cfg: CtmConfig,
    lex: Lexicon,
    eval_sets: Sequence[ConsistentSet] = (),
    generator: EntailedQuestionGenerator | None = None,
) -> tuple[list[AugmentedExample], TrainingReport]:
    """Run cfg.rounds teacher rounds, evaluating after each one."""
    all_examples: list[AugmentedExample] = []
    rounds = []
    warnings = []
    for round_index in range(cfg.rounds):
        examples, stats = ctm_round(sets, answerer, cfg, lex, generator)
        all_examples.extend(examples)
        if stats.failures:
            warnings.append(f"round {round_index}: {stats.failures} answerer failures")
        metrics = evaluate_answerer(answerer, eval_sets)
        rounds.append((stats, metrics))
    return all_examples, TrainingReport(tuple(rounds), tuple(warnings))


class OracleAnswerer:
    """Answers template-parseable questions truthfully against scene graphs.

    Closed-world: existence of an absent entity is "no", emptiness holds
    unless a relation puts something on/in the entity, wh-questions about
    unknown entities are "unknown" at confidence 0. learn is a no-op.
    """

    def __init__(self, graphs: dict[str, SceneGraph], lex: Lexicon):
        self._graphs = dict(graphs)
        self._lex = lex

    def answer(self, question: str, image_id: str) -> Answer:
        graph = self._graphs.get(image_id)
        if graph is None:
            raise UnknownImage(f"no scene graph for image {image_id}")
        prop = parse_question(question, self._lex, entity_hints=graph.object_names())
        if prop is None:
            return Answer("unknown", 0.0)

        by_id = {o.object_id: o for o in graph.objects}
        names = set(graph.object_names())

        if prop.form == "existence":
            return Answer("yes" if prop.entity in names else "no", 1.0)

        if prop.form == "emptiness":
            occupied = any(
                rel.predicate in ("on", "in") and by_id[rel.object_id].name == prop.entity
                for rel in graph.relations
            )
            if occupied:
                return Answer("no", 1.0)
            if prop.entity not in names:
                return Answer("unknown", 0.0)
            attrs = {a for o in graph.objects if o.name == prop.entity for a in o.attributes}
            if "empty" in attrs:
                return Answer("yes", 1.0)
            if any(self._lex.is_antonym_pair("empty", a) for a in attrs):
                return Answer("no", 1.0)
            return Answer("yes", 1.0)

        if prop.form == "attribute":
            if prop.entity not in names:
                return Answer("no", 1.0)
            attrs = {a for o in graph.objects if o.name == prop.entity for a in o.attributes}
            return Answer("yes" if prop.attr in attrs else "no", 1.0)

        if prop.form == "wh_attribute":
            for o in graph.objects:
                if o.name != prop.entity:
                    continue
                for attr in o.attributes:
                    if self._lex.hypernym_of(attr) == prop.category:
                        return Answer(attr, 1.0)
            return Answer("unknown", 0.0)

        if prop.form == "relation":
            holds = any(
                by_id[rel.subject_id].name == prop.entity
                and by_id[rel.object_id].name == prop.object
                and rel.predicate == prop.predicate
                for rel in graph.relations
            )
            if prop.entity not in names or prop.object not in names:
                return Answer("no", 1.0)
            return Answer("yes" if holds else "no", 1.0)

        if prop.form == "wh_relation":
            for rel in graph.relations:
                if rel.predicate == prop.predicate and by_id[rel.object_id].name == prop.object:
                    return Answer(by_id[rel.subject_id].name, 1.0)
            return Answer("unknown", 0.0)

        return Answer("unknown", 0.0)

    def learn(self, question: str, answer_text: str, image_id: str) -> None:
        pass


def make_oracle_answerer(graphs: dict[str, SceneGraph], lex: Lexicon) -> OracleAnswerer:
    return OracleAnswerer(graphs, lex)


class InvertingAnswerer:
    """Adversarial wrapper: flips every yes/no answer of the inner answerer."""

    def __init__(self, inner: Answerer):
        self._inner = inner

    def answer(self, question: str, image_id: str) -> Answer:
        ans = self._inner.answer(question, image_id)
        if ans.text == "yes":
            return Answer("no", ans.confidence)
        if ans.text == "no":
            return Answer("yes", ans.confidence)
        return ans

    def learn(self, question: str, answer_text: str, image_id: str) -> None:
        self._inner.learn(question, answer_text, image_id)


class FixedConfidenceAnswerer:
    """Wrapper pinning the reported confidence, for gate tests."""

    def __init__(self, inner: Answerer, confidence: float):
        self._inner = inner
        self._confidence = confidence

    def answer(self, question: str, image_id: str) -> Answer:
        return Answer(self._inner.answer(question, image_id).text, self._confidence)

    def learn(self, question: str, answer_text: str, image_id: str) -> None:
        self._inner.learn(question, answer_text, image_id)


class TabularAnswerer:
    """Reference learning agent: exact-match memory over (image_id, question).

    Confidence 1.0 on hits, ("unknown", 0.0) otherwise. learn writes memory.
    """

    def __init__(self, seed_memory: dict[tuple[str, str], str] | None = None):
        self._memory: dict[tuple[str, str], str] = dict(seed_memory or {})

    @classmethod
    def seeded_with_sets(cls, sets: Iterable[ConsistentSet]) -> "TabularAnswerer":
        memory = {}
        for cset in sets:
            for qa in cset.qas:
                memory[(cset.image_id, qa.question)] = qa.answer
        return cls(memory)

    def answer(self, question: str, image_id: str) -> Answer:
        hit = self._memory.get((image_id, question))
        if hit is None:
            return Answer("unknown", 0.0)
        return Answer(hit, 1.0)

    def learn(self, question: str, answer_text: str, image_id: str) -> None:
        self._memory[(image_id, question)] = answer_text
