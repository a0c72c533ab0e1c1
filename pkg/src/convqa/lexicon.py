"""Antonym/hypernym lexicon and surface-form helpers for question templates."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

from .errors import DuplicateKey, MalformedInput, SelfAntonym, UnknownCategory
from .scene_graph import normalize_text

_VOWELS = "aeiou"


@dataclass(frozen=True)
class Lexicon:
    antonyms: dict[str, tuple[str, ...]]
    hypernyms: dict[str, str]
    relation_antonyms: dict[str, str]
    categories: frozenset[str]
    no_article: frozenset[str] = field(default_factory=frozenset)

    def antonym_of(self, phrase: str) -> str | None:
        """First listed antonym of the phrase, or None."""
        options = self.antonyms.get(phrase)
        return options[0] if options else None

    def is_antonym_pair(self, a: str, b: str) -> bool:
        return b in self.antonyms.get(a, ()) or a in self.antonyms.get(b, ())

    def hypernym_of(self, phrase: str) -> str | None:
        return self.hypernyms.get(phrase)

    def relation_antonym_of(self, predicate: str) -> str | None:
        return self.relation_antonyms.get(predicate)

    def is_relation_antonym_pair(self, a: str, b: str) -> bool:
        return self.relation_antonyms.get(a) == b or self.relation_antonyms.get(b) == a


def surface_forms(noun: str, lex: Lexicon | None = None) -> dict[str, str]:
    """Pick an article for a noun phrase: "an" before a vowel, "a" otherwise,
    none for mass/plural nouns flagged in the lexicon."""
    noun = normalize_text(noun)
    if not noun:
        raise MalformedInput("surface_forms requires a nonempty noun phrase")
    if lex is not None and noun in lex.no_article:
        article = ""
    elif noun[0] in _VOWELS:
        article = "an"
    else:
        article = "a"
    np_with_article = f"{article} {noun}" if article else noun
    return {"article": article, "np_with_article": np_with_article}


def load_lexicon(raw: bytes | str) -> Lexicon:
    """Parse the lexicon file format.

    Header: `#categories: color,size,...`. Attribute entries:
    `key: antonym1,antonym2 | category` (either half may be empty). A
    `#relations` line starts predicate entries `key: opposite`; a
    `#noarticle` line starts one mass/plural noun per line.
    """
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    lines = raw.splitlines()

    categories: frozenset[str] | None = None
    antonyms: dict[str, tuple[str, ...]] = {}
    hypernyms: dict[str, str] = {}
    relation_antonyms: dict[str, str] = {}
    no_article: set[str] = set()
    section = "attributes"

    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#categories:"):
            categories = frozenset(
                normalize_text(c) for c in line.split(":", 1)[1].split(",") if c.strip()
            )
            continue
        if line == "#relations":
            section = "relations"
            continue
        if line == "#noarticle":
            section = "noarticle"
            continue
        if line.startswith("#"):
            continue

        if section == "noarticle":
            no_article.add(normalize_text(line))
            continue

        if ":" not in line:
            raise MalformedInput(f"lexicon line {lineno}: expected `key: ...`, got {line!r}")
        key_raw, rest = line.split(":", 1)
        key = normalize_text(key_raw)
        if not key:
            raise MalformedInput(f"lexicon line {lineno}: empty key")

        if section == "relations":
            if key in relation_antonyms:
                raise DuplicateKey(f"lexicon line {lineno}: duplicate relation key {key!r}")
            opposite = normalize_text(rest)
            if not opposite:
                raise MalformedInput(f"lexicon line {lineno}: relation {key!r} has no opposite")
            if opposite == key:
                raise SelfAntonym(f"lexicon line {lineno}: relation {key!r} is its own opposite")
            relation_antonyms[key] = opposite
            continue

        if categories is None:
            raise MalformedInput("lexicon file must declare `#categories:` before attribute entries")
        if key in antonyms or key in hypernyms:
            raise DuplicateKey(f"lexicon line {lineno}: duplicate key {key!r}")
        if "|" in rest:
            ant_part, cat_part = rest.split("|", 1)
        else:
            ant_part, cat_part = rest, ""
        ants = tuple(normalize_text(a) for a in ant_part.split(",") if a.strip())
        if key in ants:
            raise SelfAntonym(f"lexicon line {lineno}: {key!r} listed as its own antonym")
        category = normalize_text(cat_part)
        if category and category not in categories:
            raise UnknownCategory(f"lexicon line {lineno}: category {category!r} not declared in header")
        antonyms[key] = ants
        if category:
            hypernyms[key] = category

    return Lexicon(
        antonyms=antonyms,
        hypernyms=hypernyms,
        relation_antonyms=relation_antonyms,
        categories=categories or frozenset(),
        no_article=frozenset(no_article),
    )


def lint_lexicon(lex: Lexicon) -> list[str]:
    """Report antonym asymmetries. Diagnostic only, never raises."""
    warnings = []
    for key, ants in sorted(lex.antonyms.items()):
        for ant in ants:
            if key not in lex.antonyms.get(ant, ()):
                warnings.append(f"antonym asymmetry: {key!r} -> {ant!r} has no reverse entry")
    for key, opp in sorted(lex.relation_antonyms.items()):
        if lex.relation_antonyms.get(opp) != key:
            warnings.append(f"relation asymmetry: {key!r} -> {opp!r} has no reverse entry")
    return warnings


def default_lexicon() -> Lexicon:
    """Load the seed lexicon shipped with the package."""
    text = resources.files("convqa.data").joinpath("lexicon.txt").read_text("utf-8")
    return load_lexicon(text)
