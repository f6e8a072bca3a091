"""End-to-end synthetic benchmark: generate, filter, annotate, train, compare."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import corpus as cp
from .annotator import annotate_post
from .apriori import Granularity, mine_transactions
from .eval import apriori_queries, evaluate, evaluate_apriori, retrieval_experiment
from .model import ModelConfig, ModelParams
from .synthgen import GenConfig, StyleRuleSet, default_rules, generate_corpus
from .taxonomy import Taxonomy, fixture_taxonomy
from .training import TrainConfig, train


@dataclass
class BenchmarkConfig:
    seed: int = 0
    n_posts: int = 2000
    noise_rate: float = 0.15
    percentile: float = 30.0
    embedding_dim: int = 16
    hidden_dim: int = 32
    epochs: int = 12
    patience: int = 4
    min_support: int = 2
    k_neg: int = 4
    max_k: int = 10


@dataclass
class BenchmarkResult:
    seed: int
    clean_fraction_before: float
    clean_fraction_after: float
    jss1_attention: float
    jss1_apriori: float
    mrr_attention: float
    mrr_no_attention: float
    jss_curve_attention: dict[int, float] = field(default_factory=dict)
    jss_curve_apriori: dict[int, float] = field(default_factory=dict)

    @property
    def jss_relative_gain(self) -> float:
        if self.jss1_apriori == 0:
            return float("inf") if self.jss1_attention > 0 else 0.0
        return self.jss1_attention / self.jss1_apriori - 1.0

    @property
    def mrr_relative_gain(self) -> float:
        if self.mrr_no_attention == 0:
            return float("inf") if self.mrr_attention > 0 else 0.0
        return self.mrr_attention / self.mrr_no_attention - 1.0


def prepare_synthetic(config: BenchmarkConfig,
                      rules: StyleRuleSet | None = None,
                      taxonomy: Taxonomy | None = None):
    """Generate, percentile-filter, annotate, and split a synthetic corpus.

    Returns (generated posts, kept structured posts, corpus, clean fractions).
    """
    rules = rules or default_rules(config.noise_rate)
    taxonomy = taxonomy or fixture_taxonomy()
    generated = generate_corpus(rules, GenConfig(
        n_posts=config.n_posts, seed=config.seed))
    clean_by_id = {g.post.id: g.clean for g in generated}
    posts = [g.post for g in generated]
    before = sum(g.clean for g in generated) / len(generated)
    kept = cp.filter_top_percentile(posts, cp.ScoreWeights(), config.percentile)
    after = sum(clean_by_id[p.id] for p in kept) / len(kept)
    structured = [sp for sp in (annotate_post(p, taxonomy) for p in kept)
                  if sp is not None]
    corpus = cp.split(structured, seed=config.seed)
    return generated, structured, corpus, (before, after)


def train_pair(corpus: cp.Corpus, config: BenchmarkConfig
               ) -> tuple[ModelParams, ModelParams]:
    """Train attention-on and attention-off models with matched settings."""
    tc = TrainConfig(epochs=config.epochs,
                     early_stop_patience=config.patience, seed=config.seed)
    models = []
    for attention in (True, False):
        mc = ModelConfig(embedding_dim=config.embedding_dim,
                         hidden_dim=config.hidden_dim,
                         attention_enabled=attention, seed=config.seed)
        params, _ = train(corpus, mc, tc)
        models.append(params)
    return models[0], models[1]


def run_benchmark(config: BenchmarkConfig,
                  rules: StyleRuleSet | None = None) -> BenchmarkResult:
    taxonomy = fixture_taxonomy()
    rules = rules or default_rules(config.noise_rate)
    _, structured, corpus, (before, after) = prepare_synthetic(
        config, rules, taxonomy)

    with_attn, without_attn = train_pair(corpus, config)

    report_model = evaluate("model", corpus.test, taxonomy, Granularity.FULL,
                            params=with_attn, max_k=config.max_k)

    train_ids = set(corpus.split_post_ids.get("train", []))
    test_ids = set(corpus.split_post_ids.get("test", []))
    train_posts = [p for p in structured if p.source_id in train_ids]
    test_posts = [p for p in structured if p.source_id in test_ids]
    lexicon = mine_transactions(train_posts, Granularity.FULL,
                                config.min_support)
    report_apriori = evaluate_apriori(
        apriori_queries(test_posts, Granularity.FULL), lexicon,
        Granularity.FULL, max_k=config.max_k)

    mrr_attn = retrieval_experiment(with_attn, corpus.test,
                                    config.k_neg, seed=config.seed)
    mrr_plain = retrieval_experiment(without_attn, corpus.test,
                                     config.k_neg, seed=config.seed)

    return BenchmarkResult(
        seed=config.seed,
        clean_fraction_before=before,
        clean_fraction_after=after,
        jss1_attention=report_model.jss_at_k[1],
        jss1_apriori=report_apriori.jss_at_k[1],
        mrr_attention=mrr_attn,
        mrr_no_attention=mrr_plain,
        jss_curve_attention=report_model.jss_at_k,
        jss_curve_apriori=report_apriori.jss_at_k,
    )
