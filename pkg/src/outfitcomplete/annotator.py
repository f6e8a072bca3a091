"""Fashion Text Annotator: n-gram sliding-window parsing of post text into attributed items."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .taxonomy import Taxonomy, TermClass

# attributes attach to an apparel at most this many tokens ahead
ATTACH_WINDOW = 4

_WORD_RE = re.compile(r"[a-z0-9]+")
_CLAUSE_SPLIT_RE = re.compile(r"[.,;:!?()\[\]{}\"]|\band\b")


@dataclass(frozen=True)
class AttributedItem:
    apparel: str
    color: Optional[str] = None
    pattern: Optional[str] = None

    def words(self) -> list[str]:
        out = []
        if self.color:
            out.extend(self.color.split())
        if self.pattern:
            out.extend(self.pattern.split())
        out.extend(self.apparel.split())
        return out

    def render(self) -> str:
        return " ".join(self.words())


@dataclass(frozen=True)
class StructuredPost:
    source_id: str
    items: tuple[AttributedItem, ...]


def _clauses(text: str) -> list[list[str]]:
    """Split text into clauses at punctuation and 'and', then into word tokens."""
    out = []
    for chunk in _CLAUSE_SPLIT_RE.split(text.lower()):
        words = _WORD_RE.findall(chunk)
        if words:
            out.append(words)
    return out


def _scan_clause(words: list[str], taxonomy: Taxonomy):
    """Longest-match-first n-gram scan; returns (position, class, canonical) matches."""
    matches = []
    i = 0
    while i < len(words):
        for n in (3, 2, 1):
            if i + n > len(words):
                continue
            cls, canonical = taxonomy.lookup(" ".join(words[i:i + n]))
            if cls is not TermClass.NONE:
                matches.append((i, cls, canonical))
                i += n
                break
        else:
            i += 1
    return matches


def annotate(text: str, taxonomy: Taxonomy) -> list[AttributedItem]:
    """Parse free text into attributed items.

    Colors and patterns attach to the nearest following apparel within
    ATTACH_WINDOW tokens of the same clause; unattached attributes are dropped.
    Never raises on content: unparseable text yields an empty list.
    """
    items: list[AttributedItem] = []
    for words in _clauses(text):
        pending: list[tuple[int, TermClass, str]] = []
        for pos, cls, canonical in _scan_clause(words, taxonomy):
            if cls is TermClass.APPAREL:
                color = pattern = None
                for ppos, pcls, pterm in reversed(pending):
                    if pos - ppos > ATTACH_WINDOW:
                        break
                    if pcls is TermClass.COLOR and color is None:
                        color = pterm
                    elif pcls is TermClass.PATTERN and pattern is None:
                        pattern = pterm
                items.append(AttributedItem(canonical, color, pattern))
                pending.clear()
            else:
                pending.append((pos, cls, canonical))
    # exact duplicates carry no extra signal
    seen = set()
    unique = []
    for item in items:
        if item not in seen:
            seen.add(item)
            unique.append(item)
    return unique


def annotate_post(post, taxonomy: Taxonomy) -> Optional[StructuredPost]:
    """Annotate a SocialPost; returns None (skip) when fewer than 2 items are found."""
    items = annotate(post.text, taxonomy)
    if len(items) < 2:
        return None
    return StructuredPost(source_id=post.id, items=tuple(items))
