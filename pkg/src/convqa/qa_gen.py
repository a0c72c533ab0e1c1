"""Template-based generation of consistent QA sets from visual facts,
plus labeled corruptions (inconsistent / unrelated) and dataset splitting.

Template inventory (format version 1, see docs/templates.md):

  attribute fact (subject, attr):
    T-ATTR-YES  "is the {subject} {attr}?"            -> yes
    T-ATTR-ANT  "is the {subject} {antonym}?"         -> no    (needs antonym)
    T-ATTR-WH   "what {hypernym} is the {subject}?"   -> attr  (needs hypernym)
  existence fact (subject):
    T-EXIST     "is there {a/an} {subject}?"          -> yes
  relation fact (subject, pred, object):
    T-REL-YES   "is the {subject} {pred} the {object}?"    -> yes
    T-REL-ANT   "is the {subject} {opposite} the {object}?" -> no  (needs opposite)
    T-REL-WH    "what is {pred} the {object}?"        -> subject

A set is only emitted when at least two distinct questions are derivable,
so existence facts alone never form a set.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable

from .errors import InvalidRatios, MalformedInput
from .lexicon import Lexicon, surface_forms
from .scene_graph import (
    Fact,
    FactKind,
    FilterConfig,
    SceneGraph,
    extract_facts,
    parse_scene_graph,
    stable_digest,
)

DATASET_FORMAT_VERSION = 1


class QaKind(str, Enum):
    YESNO = "yesno"
    WH = "wh"


class Label(str, Enum):
    CONSISTENT = "consistent"
    INCONSISTENT = "inconsistent"
    UNRELATED = "unrelated"


@dataclass(frozen=True)
class QAPair:
    question: str
    answer: str
    kind: QaKind
    source_fact_id: str

    def __post_init__(self):
        if self.kind is QaKind.YESNO and self.answer not in ("yes", "no"):
            raise MalformedInput(f"yes/no answer must be yes or no, got {self.answer!r}")
        if not self.question.endswith("?"):
            raise MalformedInput(f"question must end with '?': {self.question!r}")

    def to_json_dict(self) -> dict:
        return {"question": self.question, "answer": self.answer, "kind": self.kind.value}


@dataclass(frozen=True)
class ConsistentSet:
    set_id: str
    image_id: str
    fact: Fact
    qas: tuple[QAPair, ...]

    def to_json_dict(self) -> dict:
        return {
            "set_id": self.set_id,
            "image_id": self.image_id,
            "fact": {
                "kind": self.fact.kind.value,
                "subject": self.fact.subject,
                "predicate": self.fact.predicate,
                "object": self.fact.object,
            },
            "qas": [qa.to_json_dict() for qa in self.qas],
        }

    @classmethod
    def from_json_dict(cls, record: dict) -> "ConsistentSet":
        fact = Fact(
            image_id=record["image_id"],
            kind=FactKind(record["fact"]["kind"]),
            subject=record["fact"]["subject"],
            predicate=record["fact"].get("predicate", ""),
            object=record["fact"].get("object", ""),
        )
        qas = tuple(
            QAPair(q["question"], q["answer"], QaKind(q["kind"]), fact.fact_id)
            for q in record["qas"]
        )
        return cls(record["set_id"], record["image_id"], fact, qas)


@dataclass(frozen=True)
class LabeledPair:
    source: QAPair
    candidate: QAPair
    label: Label

    def to_json_dict(self) -> dict:
        return {
            "source": {"question": self.source.question, "answer": self.source.answer},
            "candidate": {"question": self.candidate.question, "answer": self.candidate.answer},
            "label": self.label.value,
        }


def set_id_for(fact_id: str) -> str:
    return stable_digest("set", fact_id)


def generate_set(fact: Fact, lex: Lexicon) -> ConsistentSet | None:
    """Expand one fact into its consistent QA set; None when < 2 QAs derive."""
    fid = fact.fact_id
    qas: list[QAPair] = []

    if fact.kind is FactKind.ATTRIBUTE:
        subject, attr = fact.subject, fact.predicate
        qas.append(QAPair(f"is the {subject} {attr}?", "yes", QaKind.YESNO, fid))
        antonym = lex.antonym_of(attr)
        if antonym is not None:
            qas.append(QAPair(f"is the {subject} {antonym}?", "no", QaKind.YESNO, fid))
        hypernym = lex.hypernym_of(attr)
        if hypernym is not None:
            qas.append(QAPair(f"what {hypernym} is the {subject}?", attr, QaKind.WH, fid))
    elif fact.kind is FactKind.EXISTENCE:
        np = surface_forms(fact.subject, lex)["np_with_article"]
        qas.append(QAPair(f"is there {np}?", "yes", QaKind.YESNO, fid))
    elif fact.kind is FactKind.RELATION:
        subject, pred, obj = fact.subject, fact.predicate, fact.object
        qas.append(QAPair(f"is the {subject} {pred} the {obj}?", "yes", QaKind.YESNO, fid))
        opposite = lex.relation_antonym_of(pred)
        if opposite is not None:
            qas.append(QAPair(f"is the {subject} {opposite} the {obj}?", "no", QaKind.YESNO, fid))
        qas.append(QAPair(f"what is {pred} the {obj}?", subject, QaKind.WH, fid))

    # No two questions in a set may share text.
    unique: list[QAPair] = []
    seen: set[str] = set()
    for qa in qas:
        if qa.question not in seen:
            seen.add(qa.question)
            unique.append(qa)
    if len(unique) < 2:
        return None
    return ConsistentSet(set_id_for(fid), fact.image_id, fact, tuple(unique))


def generate_sets_for_graph(g: SceneGraph, lex: Lexicon, cfg: FilterConfig) -> list[ConsistentSet]:
    """Filter, extract facts, and generate sets for one graph, fact_id order."""
    sets = []
    for fact in extract_facts(g, cfg):
        cset = generate_set(fact, lex)
        if cset is not None:
            sets.append(cset)
    return sets


def generate_dataset(
    graphs: Iterable[SceneGraph], lex: Lexicon, cfg: FilterConfig
) -> list[ConsistentSet]:
    """Generate sets over a corpus, ordered by (image_id, fact_id)."""
    out = []
    for g in graphs:
        out.extend(generate_sets_for_graph(g, lex, cfg))
    out.sort(key=lambda s: (s.image_id, s.fact.fact_id))
    return out


def generate_from_jsonl(
    lines: Iterable[bytes | str],
    lex: Lexicon,
    cfg: FilterConfig,
    on_error: Callable[[int, Exception], None] | None = None,
) -> list[ConsistentSet]:
    """Like generate_dataset over raw JSONL records.

    One malformed record never aborts the stream: the error is reported to
    on_error with its 1-based line number and the record is skipped.
    """
    graphs = []
    for lineno, line in enumerate(lines, start=1):
        text = line.decode("utf-8") if isinstance(line, bytes) else line
        if not text.strip():
            continue
        try:
            graphs.append(parse_scene_graph(text))
        except Exception as exc:
            if on_error is not None:
                on_error(lineno, exc)
    return generate_dataset(graphs, lex, cfg)


def _flip(candidate: QAPair, lex: Lexicon) -> QAPair | None:
    """Flip a yes/no answer, or substitute an antonym into a wh answer."""
    if candidate.kind is QaKind.YESNO:
        flipped = "no" if candidate.answer == "yes" else "yes"
        return QAPair(candidate.question, flipped, candidate.kind, candidate.source_fact_id)
    antonym = lex.antonym_of(candidate.answer)
    if antonym is None:
        return None
    return QAPair(candidate.question, antonym, candidate.kind, candidate.source_fact_id)


def _replace_entity(candidate: QAPair, old: str, new: str) -> QAPair | None:
    if f"the {old}" not in candidate.question:
        return None
    question = candidate.question.replace(f"the {old}", f"the {new}", 1)
    return QAPair(question, candidate.answer, candidate.kind, candidate.source_fact_id)


def corrupt(
    cset: ConsistentSet, graph: SceneGraph, lex: Lexicon, seed: int = 0
) -> list[LabeledPair]:
    """Emit labeled pairs for checker calibration.

    Every ordered pair within the set is consistent; flipping the candidate's
    answer makes it inconsistent; swapping the candidate's entity for another
    object in the graph makes it unrelated. Deterministic for a fixed seed.
    """
    rng = random.Random(seed)
    fact = cset.fact
    entity = fact.subject if any(f"the {fact.subject}" in qa.question for qa in cset.qas) else fact.object
    alternatives = sorted(set(graph.object_names()) - {fact.subject, fact.object})

    pairs: list[LabeledPair] = []
    for source in cset.qas:
        for candidate in cset.qas:
            if candidate is source:
                continue
            pairs.append(LabeledPair(source, candidate, Label.CONSISTENT))
            flipped = _flip(candidate, lex)
            if flipped is not None:
                pairs.append(LabeledPair(source, flipped, Label.INCONSISTENT))
            if alternatives:
                replaced = _replace_entity(candidate, entity, rng.choice(alternatives))
                if replaced is not None:
                    pairs.append(LabeledPair(source, replaced, Label.UNRELATED))
    return pairs


def split_dataset(
    sets: Iterable[ConsistentSet], ratios: tuple[float, float, float]
) -> tuple[list[ConsistentSet], list[ConsistentSet], list[ConsistentSet]]:
    """Partition sets into train/val/test by image, never splitting an image.

    Assignment hashes image_id to [0,1) and cuts at the cumulative ratios, so
    it is stable across runs, machines, and input order.
    """
    train_r, val_r, test_r = ratios
    if min(ratios) < 0 or abs(sum(ratios) - 1.0) > 1e-9:
        raise InvalidRatios(f"ratios must be non-negative and sum to 1, got {ratios}")
    splits: tuple[list[ConsistentSet], ...] = ([], [], [])
    for cset in sets:
        u = int(stable_digest("split", cset.image_id), 16) / 2**64
        if u < train_r:
            splits[0].append(cset)
        elif u < train_r + val_r:
            splits[1].append(cset)
        else:
            splits[2].append(cset)
    return splits
