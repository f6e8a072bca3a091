"""Apriori frequent itemset mining and the Style Rule Lexicon baseline."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from pathlib import Path

from .annotator import AttributedItem


class Granularity(Enum):
    FULL = "full"
    COLOR_APPAREL = "color-apparel"
    PATTERN_APPAREL = "pattern-apparel"
    APPAREL_ONLY = "apparel"


def project(item: AttributedItem, g: Granularity) -> str:
    """Render the item keeping only the granularity's attribute slots."""
    parts = []
    if g in (Granularity.FULL, Granularity.COLOR_APPAREL) and item.color:
        parts.append(item.color)
    if g in (Granularity.FULL, Granularity.PATTERN_APPAREL) and item.pattern:
        parts.append(item.pattern)
    parts.append(item.apparel)
    return " ".join(parts)


@dataclass(frozen=True)
class FrequentItemset:
    items: frozenset[str]
    support: int


def mine_frequent(transactions: list[set[str]] | list[frozenset[str]],
                  min_support: int) -> list[FrequentItemset]:
    """Level-wise apriori: join, prune by downward closure, count by scan."""
    if min_support < 1:
        raise ValueError("min_support must be >= 1")
    txns = [frozenset(t) for t in transactions]
    counts: dict[frozenset, int] = {}
    for t in txns:
        for item in t:
            key = frozenset([item])
            counts[key] = counts.get(key, 0) + 1
    frequent = {s: c for s, c in counts.items() if c >= min_support}
    result = dict(frequent)
    level = set(frequent)
    k = 1
    while level:
        k += 1
        # join step: merge (k-1)-itemsets sharing k-2 items
        sorted_level = sorted(level, key=sorted)
        candidates = set()
        for a, b in combinations(sorted_level, 2):
            union = a | b
            if len(union) != k:
                continue
            # prune: every (k-1)-subset must itself be frequent
            if all(frozenset(sub) in level for sub in combinations(union, k - 1)):
                candidates.add(union)
        counts = {c: 0 for c in candidates}
        for t in txns:
            for c in candidates:
                if c <= t:
                    counts[c] += 1
        level = {c for c, n in counts.items() if n >= min_support}
        for c in level:
            result[c] = counts[c]
    return sorted((FrequentItemset(s, c) for s, c in result.items()),
                  key=lambda f: (len(f.items), sorted(f.items)))


class StyleRuleLexicon:
    """Item -> co-occurring items with supports, from frequent 2-itemsets."""

    def __init__(self, entries: dict[str, list[tuple[str, int]]]):
        self.entries = {
            item: sorted(pairs, key=lambda p: (-p[1], p[0]))
            for item, pairs in entries.items()
        }

    def __contains__(self, item: str) -> bool:
        return item in self.entries

    def to_dict(self) -> dict:
        return {item: [[co, s] for co, s in pairs]
                for item, pairs in sorted(self.entries.items())}

    @classmethod
    def from_dict(cls, raw: dict) -> "StyleRuleLexicon":
        return cls({item: [(co, int(s)) for co, s in pairs]
                    for item, pairs in raw.items()})

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "StyleRuleLexicon":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def build_lexicon(frequent: list[FrequentItemset]) -> StyleRuleLexicon:
    entries: dict[str, dict[str, int]] = {}
    for fs in frequent:
        if len(fs.items) != 2:
            continue
        a, b = sorted(fs.items)
        entries.setdefault(a, {})[b] = max(entries.get(a, {}).get(b, 0), fs.support)
        entries.setdefault(b, {})[a] = max(entries.get(b, {}).get(a, 0), fs.support)
    return StyleRuleLexicon(
        {item: list(pairs.items()) for item, pairs in entries.items()})


def recommend(lexicon: StyleRuleLexicon, query_items: list[str],
              k: int = 10) -> list[tuple[str, int]]:
    """Top-k co-items by summed support across the query; empty means NIL."""
    scores: dict[str, int] = {}
    query = set(query_items)
    for item in query_items:
        for co, support in lexicon.entries.get(item, []):
            if co in query:
                continue
            scores[co] = scores.get(co, 0) + support
    ranked = sorted(scores.items(), key=lambda p: (-p[1], p[0]))
    return ranked[:k]


def mine_transactions(posts, granularity: Granularity,
                      min_support: int) -> StyleRuleLexicon:
    """Mine structured posts into a lexicon at the given granularity."""
    txns = [{project(item, granularity) for item in post.items} for post in posts]
    return build_lexicon(mine_frequent(txns, min_support))
