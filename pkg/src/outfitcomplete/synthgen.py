"""Synthetic post generator with planted, machine-checkable style rules.

Posts sample mutually-compatible apparel cliques ("themes") and a single
color group; noisy items break one of those constraints, and noisy posts
draw lower social counts so the percentile filter has something to find.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .annotator import AttributedItem
from .corpus import SocialPost


class RuleError(ValueError):
    pass


@dataclass
class StyleRuleSet:
    themes: list[list[str]]               # each theme is a clique of apparels
    color_groups: list[list[str]]         # compatible colors share a group
    patterns: list[str]
    noise_rate: float = 0.15

    def __post_init__(self):
        if not 0 <= self.noise_rate < 0.5:
            raise RuleError("noise_rate must be in [0, 0.5)")
        self.apparel_graph: dict[str, set[str]] = {}
        for theme in self.themes:
            for a in theme:
                self.apparel_graph.setdefault(a, set()).update(
                    b for b in theme if b != a)
        for a, neighbors in self.apparel_graph.items():
            if not neighbors:
                raise RuleError(f"apparel {a!r} has no compatible partner")
        self.color_group_of: dict[str, int] = {}
        for gi, group in enumerate(self.color_groups):
            for c in group:
                self.color_group_of[c] = gi

    def to_dict(self) -> dict:
        return {
            "color_groups": [sorted(g) for g in self.color_groups],
            "noise_rate": self.noise_rate,
            "patterns": sorted(self.patterns),
            "themes": [sorted(t) for t in self.themes],
        }

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "StyleRuleSet":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls(themes=raw["themes"], color_groups=raw["color_groups"],
                   patterns=raw["patterns"],
                   noise_rate=float(raw.get("noise_rate", 0.15)))


@dataclass
class GenConfig:
    n_posts: int = 2000
    min_items: int = 2
    max_items: int = 5
    seed: int = 0
    clean_social_mean: float = 40.0
    noisy_social_factor: float = 0.5   # noisy posts' mean social counts, relative
    color_prob: float = 0.9
    pattern_prob: float = 0.5

    def __post_init__(self):
        if self.n_posts < 1:
            raise RuleError("n_posts must be >= 1")
        if not 2 <= self.min_items <= self.max_items:
            raise RuleError("need 2 <= min_items <= max_items")


def default_rules(noise_rate: float = 0.15) -> StyleRuleSet:
    """Planted rules over the fixture taxonomy's vocabulary."""
    themes = [
        ["dress", "heels", "clutch", "bracelet", "necklace"],
        ["jeans", "top", "sneakers", "jacket", "bag"],
        ["skirt", "blouse", "pumps", "cardigan", "earrings"],
        ["trousers", "shirt", "loafers", "blazer", "watch"],
        ["leggings", "tunic", "sandals", "scarf"],
        ["shorts", "t shirt", "running shoes", "sunglasses"],
    ]
    color_groups = [
        ["black", "white", "grey", "silver"],
        ["red", "maroon", "pink", "gold"],
        ["blue", "navy", "teal", "green"],
        ["brown", "beige", "mustard", "copper"],
    ]
    patterns = ["floral", "printed", "striped", "solid", "polka dot",
                "lace", "leather", "checked"]
    return StyleRuleSet(themes, color_groups, patterns, noise_rate)


def _poisson(rng: random.Random, lam: float) -> int:
    # Knuth's method; lambdas here are small
    limit = pow(2.718281828459045, -lam)
    k, p = 0, 1.0
    while True:
        p *= rng.random()
        if p <= limit:
            return k
        k += 1


def _sample_item(rng: random.Random, rules: StyleRuleSet, theme: list[str],
                 group: int, used: set[str], config: GenConfig) -> AttributedItem:
    apparel = rng.choice([a for a in theme if a not in used])
    color = None
    if rng.random() < config.color_prob:
        color = rng.choice(rules.color_groups[group])
    pattern = rng.choice(rules.patterns) if rng.random() < config.pattern_prob else None
    return AttributedItem(apparel, color, pattern)


def _violate(rng: random.Random, rules: StyleRuleSet, item: AttributedItem,
             theme_idx: int, group: int) -> AttributedItem:
    """Break either the color-group rule or the apparel-clique rule."""
    other_groups = [g for g in range(len(rules.color_groups)) if g != group]
    if item.color is not None and rng.random() < 0.5:
        bad_group = rng.choice(other_groups)
        return AttributedItem(item.apparel,
                              rng.choice(rules.color_groups[bad_group]),
                              item.pattern)
    theme = set(rules.themes[theme_idx])
    outsiders = sorted(set(rules.apparel_graph) - theme
                       - rules.apparel_graph[item.apparel])
    if outsiders:
        return AttributedItem(rng.choice(outsiders), item.color, item.pattern)
    if item.color is not None and other_groups:
        bad_group = rng.choice(other_groups)
        return AttributedItem(item.apparel,
                              rng.choice(rules.color_groups[bad_group]),
                              item.pattern)
    raise RuleError("rule set leaves no way to generate a violation")


@dataclass
class GeneratedPost:
    post: SocialPost
    items: list[AttributedItem]
    clean: bool


def generate_corpus(rules: StyleRuleSet, config: GenConfig) -> list[GeneratedPost]:
    """Seed-deterministic posts; rule-violating posts get lower social counts."""
    rng = random.Random(config.seed)
    out = []
    for idx in range(config.n_posts):
        theme_idx = rng.randrange(len(rules.themes))
        theme = rules.themes[theme_idx]
        group = rng.randrange(len(rules.color_groups))
        n_items = rng.randint(config.min_items,
                              min(config.max_items, len(theme)))
        items, used = [], set()
        clean = True
        for _ in range(n_items):
            item = _sample_item(rng, rules, theme, group, used, config)
            used.add(item.apparel)
            if rng.random() < rules.noise_rate:
                item = _violate(rng, rules, item, theme_idx, group)
                clean = False
            items.append(item)
        mean = config.clean_social_mean * (1.0 if clean
                                           else config.noisy_social_factor)
        post = SocialPost(
            id=f"synth-{config.seed}-{idx:05d}",
            text=", ".join(item.render() for item in items),
            votes=_poisson(rng, mean),
            likes=_poisson(rng, mean),
            comments=_poisson(rng, mean / 4),
        )
        out.append(GeneratedPost(post=post, items=items, clean=clean))
    return out


def oracle_valid(rules: StyleRuleSet, query_items: list[AttributedItem],
                 candidate: AttributedItem) -> bool:
    """True iff the candidate is rule-compatible with every query item."""
    if candidate.apparel not in rules.apparel_graph:
        raise RuleError(f"unknown apparel {candidate.apparel!r}")
    for item in query_items:
        if item.apparel not in rules.apparel_graph:
            raise RuleError(f"unknown apparel {item.apparel!r}")
        if candidate.apparel not in rules.apparel_graph[item.apparel]:
            return False
        if candidate.color is not None and item.color is not None:
            if rules.color_group_of.get(candidate.color) != \
                    rules.color_group_of.get(item.color):
                return False
    return True
