"""Scene graph parsing, saliency/frequency filtering, and fact extraction.

A scene graph is a set of objects with attributes plus subject-predicate-object
relations. Each (object, attribute), retained object, and retained relation
becomes one visual fact, the unit everything downstream (QA sets, consistency
checks) is keyed on.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Iterator, Mapping

from .errors import DanglingReference, EmptyGraph, MalformedInput

_WS = re.compile(r"\s+")
_TERMINAL_PUNCT = ".,;:!?"


def normalize_text(text: str) -> str:
    """Lowercase, trim, collapse whitespace, strip terminal punctuation."""
    out = _WS.sub(" ", text.strip().lower()).strip()
    return out.rstrip(_TERMINAL_PUNCT).strip()


def stable_digest(*fields: str) -> str:
    """Stable 64-bit hex digest of the fields joined with a fixed separator.

    blake2b with an 8-byte digest; fixed across runs and machines so fact ids,
    set ids, and split assignment are reproducible.
    """
    payload = "\x1f".join(fields).encode("utf-8")
    return hashlib.blake2b(payload, digest_size=8).hexdigest()


class FactKind(str, Enum):
    ATTRIBUTE = "attribute"
    EXISTENCE = "existence"
    RELATION = "relation"


@dataclass(frozen=True)
class BoundingBox:
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise MalformedInput(f"bounding box must have positive size, got w={self.w} h={self.h}")
        if self.x < 0 or self.y < 0:
            raise MalformedInput(f"bounding box origin must be non-negative, got x={self.x} y={self.y}")

    @property
    def area(self) -> float:
        return self.w * self.h


@dataclass(frozen=True)
class ObjectNode:
    object_id: str
    name: str
    attributes: tuple[str, ...]
    bbox: BoundingBox


@dataclass(frozen=True)
class Relation:
    subject_id: str
    predicate: str
    object_id: str


@dataclass(frozen=True)
class SceneGraph:
    image_id: str
    width: int
    height: int
    objects: tuple[ObjectNode, ...]
    relations: tuple[Relation, ...]

    def object_by_id(self, object_id: str) -> ObjectNode:
        return {o.object_id: o for o in self.objects}[object_id]

    def object_names(self) -> list[str]:
        return [o.name for o in self.objects]


@dataclass(frozen=True)
class Fact:
    image_id: str
    kind: FactKind
    subject: str
    predicate: str = ""
    object: str = ""
    fact_id: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(
            self,
            "fact_id",
            stable_digest(self.image_id, self.kind.value, self.subject, self.predicate, self.object),
        )


@dataclass(frozen=True)
class FilterConfig:
    """Saliency and frequency filtering knobs.

    min_area_fraction: objects whose bbox covers less than this fraction of
    the image are dropped. min_name_count: objects whose name occurs fewer
    than this many times in name_counts are dropped; with no table supplied
    the frequency filter is inert.
    """

    min_area_fraction: float = 0.05
    min_name_count: int = 2
    name_counts: Mapping[str, int] | None = None

    def __post_init__(self):
        if not 0.0 <= self.min_area_fraction <= 1.0:
            raise MalformedInput(f"min_area_fraction must be in [0,1], got {self.min_area_fraction}")
        if self.min_name_count < 0:
            raise MalformedInput(f"min_name_count must be >= 0, got {self.min_name_count}")


def parse_scene_graph(raw: bytes | str) -> SceneGraph:
    """Parse one JSON scene-graph record into a validated SceneGraph."""
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    try:
        record = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"invalid JSON: {exc.msg}", offset=exc.pos) from exc
    if not isinstance(record, dict):
        raise MalformedInput("scene graph record must be a JSON object")

    try:
        image_id = str(record["image_id"])
        width = int(record["width"])
        height = int(record["height"])
        raw_objects = record["objects"]
        raw_relations = record.get("relations", [])
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"missing or malformed field: {exc}") from exc
    if width <= 0 or height <= 0:
        raise MalformedInput(f"image size must be positive, got {width}x{height}")

    objects = []
    seen_ids = set()
    for obj in raw_objects:
        try:
            object_id = str(obj["object_id"])
            name = normalize_text(str(obj["name"]))
            attributes = tuple(normalize_text(str(a)) for a in obj.get("attributes", []))
            bbox = BoundingBox(float(obj["x"]), float(obj["y"]), float(obj["w"]), float(obj["h"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"malformed object record: {exc}") from exc
        if not name:
            raise MalformedInput(f"object {object_id} has an empty name")
        if object_id in seen_ids:
            raise MalformedInput(f"duplicate object_id {object_id}")
        seen_ids.add(object_id)
        objects.append(ObjectNode(object_id, name, tuple(a for a in attributes if a), bbox))
    if not objects:
        raise EmptyGraph(f"scene graph {image_id} has no objects")

    relations = []
    for rel in raw_relations:
        try:
            subject_id = str(rel["subject_id"])
            predicate = normalize_text(str(rel["predicate"]))
            object_id = str(rel["object_id"])
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"malformed relation record: {exc}") from exc
        for endpoint in (subject_id, object_id):
            if endpoint not in seen_ids:
                raise DanglingReference(f"relation endpoint {endpoint} not among objects of {image_id}")
        if subject_id == object_id:
            raise MalformedInput(f"relation in {image_id} loops object {subject_id} to itself")
        if not predicate:
            raise MalformedInput(f"relation in {image_id} has an empty predicate")
        relations.append(Relation(subject_id, predicate, object_id))

    return SceneGraph(image_id, width, height, tuple(objects), tuple(relations))


def iter_scene_graphs(lines: Iterable[bytes | str]) -> Iterator[SceneGraph]:
    """Parse a JSONL stream, one scene graph per non-empty line."""
    for line in lines:
        text = line.decode("utf-8") if isinstance(line, bytes) else line
        if not text.strip():
            continue
        yield parse_scene_graph(text)


def filter_salient(g: SceneGraph, cfg: FilterConfig) -> SceneGraph:
    """Drop small and infrequent objects, then relations touching them."""
    image_area = float(g.width * g.height)
    kept = []
    for obj in g.objects:
        if obj.bbox.area / image_area < cfg.min_area_fraction:
            continue
        if cfg.name_counts is not None and cfg.name_counts.get(obj.name, 0) < cfg.min_name_count:
            continue
        kept.append(obj)
    kept_ids = {o.object_id for o in kept}
    relations = tuple(r for r in g.relations if r.subject_id in kept_ids and r.object_id in kept_ids)
    return replace(g, objects=tuple(kept), relations=relations)


def extract_facts(g: SceneGraph, cfg: FilterConfig | None = None) -> list[Fact]:
    """Extract attribute, existence, and relation facts, sorted by fact_id."""
    if cfg is not None:
        g = filter_salient(g, cfg)
    facts = []
    for obj in g.objects:
        facts.append(Fact(g.image_id, FactKind.EXISTENCE, subject=obj.name))
        for attr in obj.attributes:
            facts.append(Fact(g.image_id, FactKind.ATTRIBUTE, subject=obj.name, predicate=attr))
    by_id = {o.object_id: o for o in g.objects}
    for rel in g.relations:
        facts.append(
            Fact(
                g.image_id,
                FactKind.RELATION,
                subject=by_id[rel.subject_id].name,
                predicate=rel.predicate,
                object=by_id[rel.object_id].name,
            )
        )
    # Deduplicate: two objects with the same name/attribute encode one fact.
    unique = {f.fact_id: f for f in facts}
    return sorted(unique.values(), key=lambda f: f.fact_id)


def load_frequency_table(lines: Iterable[str]) -> dict[str, int]:
    """Load a `name<TAB>count` TSV into a dict."""
    counts: dict[str, int] = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 2:
            raise MalformedInput(f"frequency table line {lineno}: expected `name<TAB>count`")
        try:
            counts[normalize_text(parts[0])] = int(parts[1])
        except ValueError as exc:
            raise MalformedInput(f"frequency table line {lineno}: bad count {parts[1]!r}") from exc
    return counts
