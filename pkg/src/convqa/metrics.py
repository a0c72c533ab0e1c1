"""Consistency metrics over gold QA sets and model predictions.

Three numbers, all percentages:
  perf_con — share of sets with every question answered correctly
  avg_con  — mean per-set accuracy
  top1     — overall question-level accuracy
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from .errors import DuplicatePrediction, MissingPrediction, UnknownSet
from .qa_gen import ConsistentSet

_WS = re.compile(r"\s+")
_PUNCT = re.compile(r"[^\w\s]")
_LEADING_ARTICLE = re.compile(r"^(a|an|the)\s+")


def normalize_answer(text: str) -> str:
    """Lowercase, strip punctuation, drop a leading article, collapse spaces."""
    out = _PUNCT.sub("", text.lower())
    out = _WS.sub(" ", out).strip()
    return _LEADING_ARTICLE.sub("", out)


class MissingPolicy(str, Enum):
    COUNT_WRONG = "count_wrong"
    ERROR = "error"


@dataclass(frozen=True)
class Prediction:
    set_id: str
    qa_index: int
    answer: str
    confidence: float | None = None

    @classmethod
    def from_json_dict(cls, record: dict) -> "Prediction":
        return cls(
            set_id=record["set_id"],
            qa_index=int(record["qa_index"]),
            answer=str(record["answer"]),
            confidence=record.get("confidence"),
        )


@dataclass(frozen=True)
class MetricsReport:
    perf_con: float
    avg_con: float
    top1: float
    n_sets: int
    n_questions: int
    per_set: tuple[tuple[str, int, int], ...] = field(default=(), repr=False)
    by_kind: dict[str, float] = field(default_factory=dict, repr=False)

    def to_json_dict(self) -> dict:
        return {
            "perf_con": self.perf_con,
            "avg_con": self.avg_con,
            "top1": self.top1,
            "n_sets": self.n_sets,
            "n_questions": self.n_questions,
            "per_set": [list(row) for row in self.per_set],
            "by_kind": dict(self.by_kind),
        }

    def render(self) -> str:
        lines = [
            f"sets:      {self.n_sets}",
            f"questions: {self.n_questions}",
            f"Perf-Con:  {self.perf_con:.2f}",
            f"Avg-Con:   {self.avg_con:.2f}",
            f"Top-1:     {self.top1:.2f}",
        ]
        for kind, value in sorted(self.by_kind.items()):
            lines.append(f"Top-1[{kind}]: {value:.2f}")
        return "\n".join(lines)


def evaluate(
    gold: Iterable[ConsistentSet],
    preds: Iterable[Prediction],
    policy: MissingPolicy = MissingPolicy.COUNT_WRONG,
) -> MetricsReport:
    """Score predictions against gold sets by normalized exact match."""
    sets = list(gold)
    by_set = {s.set_id: s for s in sets}

    answers: dict[tuple[str, int], str] = {}
    for pred in preds:
        if pred.set_id not in by_set:
            raise UnknownSet(f"prediction for unknown set {pred.set_id}")
        size = len(by_set[pred.set_id].qas)
        if not 0 <= pred.qa_index < size:
            raise UnknownSet(f"qa_index {pred.qa_index} out of range for set {pred.set_id} (size {size})")
        key = (pred.set_id, pred.qa_index)
        if key in answers:
            raise DuplicatePrediction(f"duplicate prediction for {key}")
        answers[key] = pred.answer

    per_set: list[tuple[str, int, int]] = []
    total_correct = 0
    total_questions = 0
    kind_correct: dict[str, int] = {}
    kind_total: dict[str, int] = {}
    for cset in sets:
        correct = 0
        for idx, qa in enumerate(cset.qas):
            predicted = answers.get((cset.set_id, idx))
            if predicted is None and policy is MissingPolicy.ERROR:
                raise MissingPrediction(f"no prediction for ({cset.set_id}, {idx})")
            hit = predicted is not None and normalize_answer(predicted) == normalize_answer(qa.answer)
            correct += hit
            kind = qa.kind.value
            kind_total[kind] = kind_total.get(kind, 0) + 1
            kind_correct[kind] = kind_correct.get(kind, 0) + hit
        per_set.append((cset.set_id, correct, len(cset.qas)))
        total_correct += correct
        total_questions += len(cset.qas)

    n_sets = len(sets)
    perf_con = 100.0 * sum(1 for _, c, n in per_set if c == n) / n_sets if n_sets else 0.0
    avg_con = 100.0 * sum(c / n for _, c, n in per_set) / n_sets if n_sets else 0.0
    top1 = 100.0 * total_correct / total_questions if total_questions else 0.0
    by_kind = {
        kind: 100.0 * kind_correct[kind] / kind_total[kind] for kind in kind_total if kind_total[kind]
    }
    return MetricsReport(perf_con, avg_con, top1, n_sets, total_questions, tuple(per_set), by_kind)


def compare_reports(a: MetricsReport, b: MetricsReport) -> dict:
    """Side-by-side metric deltas (b minus a), with a size-mismatch warning."""
    rows = [
        ("Perf-Con", a.perf_con, b.perf_con),
        ("Avg-Con", a.avg_con, b.avg_con),
        ("Top-1", a.top1, b.top1),
    ]
    warning = None
    if a.n_sets != b.n_sets:
        warning = f"reports cover different set counts ({a.n_sets} vs {b.n_sets})"

    tsv_lines = ["metric\ta\tb\tdelta"]
    text_lines = [f"{'metric':<10}{'a':>10}{'b':>10}{'delta':>10}"]
    deltas = {}
    for name, va, vb in rows:
        delta = vb - va
        deltas[name] = delta
        tsv_lines.append(f"{name}\t{va:.2f}\t{vb:.2f}\t{delta:+.2f}")
        text_lines.append(f"{name:<10}{va:>10.2f}{vb:>10.2f}{delta:>+10.2f}")
    if warning:
        text_lines.append(f"warning: {warning}")
    return {
        "deltas": deltas,
        "warning": warning,
        "tsv": "\n".join(tsv_lines) + "\n",
        "text": "\n".join(text_lines) + "\n",
    }
