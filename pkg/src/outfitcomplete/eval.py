"""Evaluation: Jaccard similarity at k, mean reciprocal rank, retrieval and cross-corpus runs."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .apriori import Granularity, StyleRuleLexicon, project, recommend
from .corpus import Corpus, EOI_ID, TrainingExample
from .decoding import beam_search, parse_item_words
from .model import ModelParams, sequence_logprob
from .taxonomy import Taxonomy, TermClass


class EvalError(ValueError):
    pass


def jss(truth: set[str], pred: set[str]) -> float:
    """Jaccard similarity of two token sets."""
    if not truth:
        raise EvalError("empty ground-truth token set")
    if not pred:
        return 0.0
    return len(truth & pred) / len(truth | pred)


def jss_at_k(truth: set[str], preds: list[set[str]], k: int | None = None) -> float:
    """Best Jaccard similarity over the first k predictions (0.0 when none)."""
    if not truth:
        raise EvalError("empty ground-truth token set")
    k = len(preds) if k is None else k
    if k < 1:
        raise EvalError("k must be >= 1")
    window = preds[:k]
    if not window:
        return 0.0
    return max(jss(truth, p) for p in window)


def mrr(ranks: list[int]) -> float:
    """Mean reciprocal rank."""
    if not ranks:
        raise EvalError("mrr over an empty rank list")
    if min(ranks) < 1:
        raise EvalError("ranks must be >= 1")
    return sum(1.0 / r for r in ranks) / len(ranks)


def expected_random_mrr(k_neg: int) -> float:
    """E[1/rank] when the true label's rank is uniform on 1..k_neg+1."""
    return sum(1.0 / r for r in range(1, k_neg + 2)) / (k_neg + 1)


def retrieval_experiment(params: ModelParams, test_set: list[TrainingExample],
                         k_neg: int, seed: int = 0) -> float:
    """MRR of the true target against k_neg sampled negatives per query.

    Negatives come from the pool of distinct ground-truth targets; ties
    rank the true label pessimistically.
    """
    if not test_set:
        raise EvalError("empty test set")
    if not 1 <= k_neg:
        raise EvalError("k_neg must be >= 1")
    pool = sorted({ex.target_ids for ex in test_set})
    if len(pool) < k_neg + 1:
        raise EvalError(
            f"label pool of {len(pool)} is too small for {k_neg} negatives")
    rng = random.Random(seed)
    ranks = []
    for ex in test_set:
        negatives = []
        seen = {ex.target_ids}
        while len(negatives) < k_neg:
            cand = pool[rng.randrange(len(pool))]
            if cand not in seen:
                seen.add(cand)
                negatives.append(cand)
        truth_score = sequence_logprob(ex.source_ids, ex.target_ids, params)
        neg_scores = [sequence_logprob(ex.source_ids, n, params)
                      for n in negatives]
        rank = 1 + sum(1 for s in neg_scores if s >= truth_score)
        ranks.append(rank)
    return mrr(ranks)


# ---------------------------------------------------------------------------
# granularity projection of word-token sequences

def project_words(words: list[str], g: Granularity,
                  taxonomy: Taxonomy) -> frozenset[str]:
    """Token set of a predicted/true word sequence at a granularity."""
    item = parse_item_words(words, taxonomy)
    if item is not None:
        return frozenset(project(item, g).split())
    keep_color = g in (Granularity.FULL, Granularity.COLOR_APPAREL)
    keep_pattern = g in (Granularity.FULL, Granularity.PATTERN_APPAREL)
    kept = []
    for w in words:
        cls, _ = taxonomy.lookup(w)
        if cls is TermClass.APPAREL:
            kept.append(w)
        elif cls is TermClass.COLOR and keep_color:
            kept.append(w)
        elif cls is TermClass.PATTERN and keep_pattern:
            kept.append(w)
        elif cls is TermClass.NONE and g is Granularity.FULL:
            kept.append(w)
    return frozenset(kept)


def source_items(ex: TrainingExample, vocab, taxonomy: Taxonomy):
    """Recover attributed items from an encoded source sequence."""
    items, current = [], []
    for tok in ex.source_ids:
        if tok == EOI_ID:
            if current:
                item = parse_item_words(current, taxonomy)
                if item is not None:
                    items.append(item)
            current = []
        else:
            current.append(vocab.decode(tok))
    return items


@dataclass
class EvalReport:
    method: str
    granularity: str
    corpus_id: str = ""
    jss_at_k: dict[int, float] = field(default_factory=dict)
    mrr_at_kneg: dict[int, float] = field(default_factory=dict)
    n_examples: int = 0
    random_recall_at_1: dict[int, float] = field(
        default_factory=lambda: {k: 1.0 / (k + 1) for k in range(1, 5)})
    random_mrr: dict[int, float] = field(
        default_factory=lambda: {k: expected_random_mrr(k) for k in range(1, 5)})

    def to_json(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({
                "corpus_id": self.corpus_id,
                "granularity": self.granularity,
                "jss_at_k": {str(k): v for k, v in sorted(self.jss_at_k.items())},
                "method": self.method,
                "mrr_at_kneg": {str(k): v for k, v in sorted(self.mrr_at_kneg.items())},
                "n_examples": self.n_examples,
                "random_mrr": {str(k): v for k, v in sorted(self.random_mrr.items())},
                "random_recall_at_1": {str(k): v for k, v in
                                       sorted(self.random_recall_at_1.items())},
            }, fh, sort_keys=True, indent=2)
            fh.write("\n")

    def table(self) -> str:
        lines = [f"method: {self.method}   granularity: {self.granularity}"
                 f"   examples: {self.n_examples}",
                 "recommendations  JSS"]
        for k in sorted(self.jss_at_k):
            lines.append(f"{k:>15}  {self.jss_at_k[k]:.4f}")
        if self.mrr_at_kneg:
            lines.append("negative samples  MRR")
            for k in sorted(self.mrr_at_kneg):
                lines.append(f"{k:>16}  {self.mrr_at_kneg[k]:.4f}")
        return "\n".join(lines)


def evaluate(method: str, test_set: list[TrainingExample],
             taxonomy: Taxonomy, granularity: Granularity,
             params: Optional[ModelParams] = None,
             lexicon: Optional[StyleRuleLexicon] = None,
             max_k: int = 10, corpus_id: str = "") -> EvalReport:
    """JSS@k (k=1..max_k) for a model checkpoint or an apriori lexicon."""
    if not test_set:
        raise EvalError("empty test set")
    if method == "apriori":
        if lexicon is None:
            raise EvalError("method 'apriori' requires a lexicon")
        return evaluate_apriori(test_set, lexicon, granularity,
                                max_k=max_k, corpus_id=corpus_id)
    if method not in ("model", "model-no-attention"):
        raise EvalError(f"unknown method {method!r}")
    if params is None:
        raise EvalError(f"method {method!r} requires model params")

    totals = {k: 0.0 for k in range(1, max_k + 1)}
    vocab = params.target_vocab
    for ex in test_set:
        truth_words = [vocab.decode(t) for t in ex.target_ids[1:-1]]
        truth = project_words(truth_words, granularity, taxonomy)
        hyps = beam_search(ex.source_ids, params, k=max_k)
        preds = [project_words([vocab.decode(t) for t in h.tokens],
                               granularity, taxonomy) for h in hyps]
        if not truth:
            continue
        for k in totals:
            totals[k] += jss_at_k(truth, preds, k)
    n = len(test_set)
    return EvalReport(method=method, granularity=granularity.value,
                      corpus_id=corpus_id, n_examples=n,
                      jss_at_k={k: v / n for k, v in totals.items()})


@dataclass(frozen=True)
class AprioriQuery:
    """A test query in item-string space for the apriori baseline."""
    query_projections: tuple[str, ...]
    truth_projection: tuple[str, ...]


def apriori_queries(posts, granularity: Granularity) -> list[AprioriQuery]:
    """Leave-one-out queries projected to the granularity, from structured posts."""
    out = []
    for post in posts:
        for i, target in enumerate(post.items):
            inputs = [item for j, item in enumerate(post.items) if j != i]
            out.append(AprioriQuery(
                query_projections=tuple(project(it, granularity) for it in inputs),
                truth_projection=tuple(project(target, granularity).split())))
    return out


def evaluate_apriori(queries: list[AprioriQuery], lexicon: StyleRuleLexicon,
                     granularity: Granularity, max_k: int = 10,
                     corpus_id: str = "") -> EvalReport:
    if not queries:
        raise EvalError("empty test set")
    totals = {k: 0.0 for k in range(1, max_k + 1)}
    for q in queries:
        truth = frozenset(q.truth_projection)
        preds = [frozenset(p.split()) for p, _ in
                 recommend(lexicon, list(q.query_projections), k=max_k)]
        for k in totals:
            totals[k] += jss_at_k(truth, preds, k)
    n = len(queries)
    return EvalReport(method="apriori", granularity=granularity.value,
                      corpus_id=corpus_id, n_examples=n,
                      jss_at_k={k: v / n for k, v in totals.items()})


def reencode_for(params: ModelParams, foreign: Corpus) -> list[TrainingExample]:
    """Map a foreign corpus's test split into this model's vocabularies."""
    out = []
    for ex in foreign.test:
        src_words = [foreign.source_vocab.decode(t) for t in ex.source_ids]
        tgt_words = [foreign.target_vocab.decode(t) for t in ex.target_ids]
        out.append(TrainingExample(
            source_ids=tuple(params.source_vocab.encode(w) if w != "<eoi>"
                             else EOI_ID for w in src_words),
            target_ids=(ex.target_ids[0],) + tuple(
                params.target_vocab.encode(w) for w in tgt_words[1:-1]
            ) + (ex.target_ids[-1],),
            post_id=ex.post_id))
    return out


def cross_eval(params: ModelParams, foreign: Corpus, taxonomy: Taxonomy,
               granularity: Granularity, max_k: int = 10,
               corpus_id: str = "") -> EvalReport:
    """Evaluate a model trained on corpus A against corpus B's test split."""
    return evaluate("model", reencode_for(params, foreign), taxonomy,
                    granularity, params=params, max_k=max_k,
                    corpus_id=corpus_id)
