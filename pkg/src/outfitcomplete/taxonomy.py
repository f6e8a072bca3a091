"""Fashion taxonomy: flat term classes (apparel / color / pattern) plus synonyms."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Optional

MAX_TERM_WORDS = 3


class TaxonomyError(ValueError):
    """Malformed or inconsistent taxonomy file."""


class TermClass(Enum):
    APPAREL = "apparel"
    COLOR = "color"
    PATTERN = "pattern"
    NONE = "none"


def canonicalize(term: str) -> str:
    """Lowercase, trim, and collapse internal whitespace."""
    return " ".join(term.lower().split())


@dataclass(frozen=True)
class Taxonomy:
    apparel_terms: frozenset[str]
    color_terms: frozenset[str]
    pattern_terms: frozenset[str]
    synonyms: dict[str, str] = field(default_factory=dict)

    def classify(self, canonical: str) -> TermClass:
        if canonical in self.apparel_terms:
            return TermClass.APPAREL
        if canonical in self.color_terms:
            return TermClass.COLOR
        if canonical in self.pattern_terms:
            return TermClass.PATTERN
        return TermClass.NONE

    def lookup(self, ngram: str) -> tuple[TermClass, Optional[str]]:
        """Classify an n-gram (1-3 words), following synonym indirection.

        Returns (TermClass.NONE, None) for unknown terms.
        """
        canonical = canonicalize(ngram)
        if len(canonical.split()) > MAX_TERM_WORDS:
            raise ValueError(
                f"n-gram {ngram!r} has more than {MAX_TERM_WORDS} words"
            )
        canonical = self.synonyms.get(canonical, canonical)
        cls = self.classify(canonical)
        if cls is TermClass.NONE:
            return TermClass.NONE, None
        return cls, canonical

    def to_dict(self) -> dict:
        return {
            "apparel": sorted(self.apparel_terms),
            "colors": sorted(self.color_terms),
            "patterns": sorted(self.pattern_terms),
            "synonyms": dict(sorted(self.synonyms.items())),
        }


def _validate(apparel: set[str], colors: set[str], patterns: set[str],
              synonyms: dict[str, str]) -> None:
    for term in apparel | colors | patterns:
        if len(term.split()) > MAX_TERM_WORDS:
            raise TaxonomyError(f"term {term!r} exceeds {MAX_TERM_WORDS} words")
    for name, (a, b) in (("apparel/colors", (apparel, colors)),
                         ("apparel/patterns", (apparel, patterns)),
                         ("colors/patterns", (colors, patterns))):
        clash = a & b
        if clash:
            raise TaxonomyError(
                f"term {sorted(clash)[0]!r} appears in both {name}"
            )
    all_terms = apparel | colors | patterns
    for src, dst in synonyms.items():
        if dst not in all_terms:
            raise TaxonomyError(f"synonym target {dst!r} is not a known term")
        if src in all_terms:
            raise TaxonomyError(f"synonym source {src!r} is itself a term")


def build_taxonomy(apparel, colors, patterns, synonyms=None) -> Taxonomy:
    apparel = {canonicalize(t) for t in apparel}
    colors = {canonicalize(t) for t in colors}
    patterns = {canonicalize(t) for t in patterns}
    synonyms = {canonicalize(k): canonicalize(v)
                for k, v in (synonyms or {}).items()}
    _validate(apparel, colors, patterns, synonyms)
    return Taxonomy(frozenset(apparel), frozenset(colors),
                    frozenset(patterns), synonyms)


def load_taxonomy(path: str | Path) -> Taxonomy:
    """Load a taxonomy from a JSON file (keys: apparel, colors, patterns, synonyms)."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise TaxonomyError(f"{path}: invalid JSON at line {exc.lineno}") from exc
    if not isinstance(raw, dict):
        raise TaxonomyError(f"{path}: expected a JSON object at the top level")
    for key in ("apparel", "colors", "patterns"):
        if key not in raw or not isinstance(raw[key], list):
            raise TaxonomyError(f"{path}: missing or non-array key {key!r}")
    synonyms = raw.get("synonyms", {})
    if not isinstance(synonyms, dict):
        raise TaxonomyError(f"{path}: 'synonyms' must be an object")
    return build_taxonomy(raw["apparel"], raw["colors"], raw["patterns"], synonyms)


def save_taxonomy(taxonomy: Taxonomy, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(taxonomy.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def fixture_taxonomy() -> Taxonomy:
    """The bundled test/demo taxonomy."""
    data = resources.files("outfitcomplete.data").joinpath("fixture_taxonomy.json")
    with resources.as_file(data) as path:
        return load_taxonomy(path)


def fixture_taxonomy_path() -> Path:
    data = resources.files("outfitcomplete.data").joinpath("fixture_taxonomy.json")
    with resources.as_file(data) as path:
        return Path(path)
