"""Command-line pipeline: gen, annotate, filter, prepare, mine, train, eval, retrieval, recommend, serve."""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from . import corpus as cp
from .annotator import annotate, annotate_post
from .apriori import Granularity, StyleRuleLexicon, mine_transactions
from .decoding import DecodingError, complete_itemset
from .eval import (EvalError, apriori_queries, evaluate, evaluate_apriori,
                   retrieval_experiment)
from .model import ModelConfig, load_checkpoint, save_checkpoint
from .numeric import NumericError
from .synthgen import GenConfig, RuleError, StyleRuleSet, default_rules, generate_corpus
from .taxonomy import TaxonomyError, fixture_taxonomy, load_taxonomy
from .training import TrainConfig, train

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

GRANULARITIES = {g.value: g for g in Granularity}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_USAGE)


_ARGV: list[str] = []


def _write_manifest(out_path: Path, subcommand: str, config: dict,
                    inputs: list[str], outputs: list[str], seed, started: float):
    manifest = {
        "argv": list(_ARGV),
        "config": config,
        "inputs": sorted(inputs),
        "outputs": sorted(outputs),
        "seed": seed,
        "subcommand": subcommand,
        "version": __version__,
        "wall_time_s": round(time.time() - started, 3),
    }
    path = out_path / "manifest.json" if out_path.is_dir() \
        else out_path.with_name(out_path.name + ".manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise cp.CorpusError(f"{path}: config file must be a JSON object")
    return raw


def _resolve(args, file_cfg: dict, name: str, default):
    """Flag > config file > default."""
    value = getattr(args, name.replace("-", "_"), None)
    if value is not None:
        return value
    if name in file_cfg:
        return file_cfg[name]
    return default


def _taxonomy(args):
    return load_taxonomy(args.taxonomy) if args.taxonomy else fixture_taxonomy()


def cmd_gen(args) -> int:
    started = time.time()
    rules = StyleRuleSet.load(args.rules) if args.rules else default_rules(args.noise)
    config = GenConfig(n_posts=args.n, seed=args.seed)
    generated = generate_corpus(rules, config)
    out = Path(args.out)
    cp.save_posts([g.post for g in generated], out)
    _write_manifest(out, "gen",
                    {"n": args.n, "noise": rules.noise_rate,
                     "rules": args.rules or "default"},
                    [args.rules] if args.rules else [], [str(out)],
                    args.seed, started)
    if not args.quiet:
        print(f"wrote {len(generated)} posts to {out}")
    return EXIT_OK


def cmd_annotate(args) -> int:
    started = time.time()
    taxonomy = _taxonomy(args)
    posts = cp.load_posts(args.infile)
    structured = [sp for sp in (annotate_post(p, taxonomy) for p in posts)
                  if sp is not None]
    out = Path(args.out)
    cp.save_structured(structured, out)
    _write_manifest(out, "annotate", {"taxonomy": args.taxonomy or "fixture"},
                    [args.infile], [str(out)], None, started)
    if not args.quiet:
        print(f"annotated {len(structured)}/{len(posts)} posts "
              f"({len(posts) - len(structured)} skipped)")
    return EXIT_OK


def cmd_filter(args) -> int:
    started = time.time()
    posts = cp.load_posts(args.infile)
    weights = cp.ScoreWeights(args.w_votes, args.w_likes, args.w_comments)
    kept = cp.filter_top_percentile(posts, weights, args.percentile)
    out = Path(args.out)
    cp.save_posts(kept, out)
    _write_manifest(out, "filter",
                    {"percentile": args.percentile,
                     "weights": [args.w_votes, args.w_likes, args.w_comments]},
                    [args.infile], [str(out)], None, started)
    if not args.quiet:
        print(f"kept {len(kept)}/{len(posts)} posts")
    return EXIT_OK


def cmd_prepare(args) -> int:
    started = time.time()
    structured = cp.load_structured(args.infile)
    ratios = tuple(float(r) for r in args.ratios.split(","))
    if len(ratios) != 3:
        raise cp.CorpusError("--ratios must be three comma-separated numbers")
    corpus = cp.split(structured, ratios=ratios, seed=args.seed)
    outdir = Path(args.out)
    cp.save_corpus(corpus, outdir)
    by_id = {p.source_id: p for p in structured}
    for name in ("train", "test", "validate"):
        split_posts = [by_id[i] for i in corpus.split_post_ids[name]]
        cp.save_structured(split_posts, outdir / f"structured_{name}.jsonl")
    _write_manifest(outdir, "prepare", {"ratios": list(ratios)},
                    [args.infile], [str(outdir)], args.seed, started)
    if not args.quiet:
        print(f"prepared corpus: train={len(corpus.train)} "
              f"test={len(corpus.test)} validate={len(corpus.validate)} examples")
    return EXIT_OK


def cmd_mine(args) -> int:
    started = time.time()
    posts = cp.load_structured(Path(args.corpus) / "structured_train.jsonl")
    granularity = GRANULARITIES[args.granularity]
    lexicon = mine_transactions(posts, granularity, args.min_support)
    out = Path(args.out)
    lexicon.save(out)
    _write_manifest(out, "mine",
                    {"granularity": args.granularity,
                     "min_support": args.min_support},
                    [args.corpus], [str(out)], None, started)
    if not args.quiet:
        print(f"lexicon with {len(lexicon.entries)} head items written to {out}")
    return EXIT_OK


def cmd_train(args) -> int:
    started = time.time()
    file_cfg = _load_config_file(args.config)
    corpus = cp.load_corpus(args.corpus)
    model_config = ModelConfig(
        embedding_dim=int(_resolve(args, file_cfg, "embedding-dim", 64)),
        hidden_dim=int(_resolve(args, file_cfg, "hidden-dim", 128)),
        attention_enabled=args.attention == "on",
        max_target_len=int(_resolve(args, file_cfg, "max-target-len", 8)),
        init_scale=float(_resolve(args, file_cfg, "init-scale", 0.08)),
        seed=args.seed)
    train_config = TrainConfig(
        learning_rate=float(_resolve(args, file_cfg, "lr", 1.0)),
        lr_decay=float(_resolve(args, file_cfg, "lr-decay", 0.5)),
        epochs=int(_resolve(args, file_cfg, "epochs", 100)),
        batch_size=int(_resolve(args, file_cfg, "batch-size", 1)),
        clip_norm=float(_resolve(args, file_cfg, "clip-norm", 5.0)),
        early_stop_patience=int(_resolve(args, file_cfg, "patience", 10)),
        seed=args.seed)
    params, report = train(corpus, model_config, train_config)
    out = Path(args.out)
    save_checkpoint(params, out)
    report.to_jsonl(out.with_name(out.name + ".report.jsonl"))
    from dataclasses import asdict
    _write_manifest(out, "train",
                    {"attention": args.attention,
                     "model": asdict(model_config), "train": asdict(train_config)},
                    [args.corpus], [str(out)], args.seed, started)
    if not args.quiet:
        print(f"best epoch {report.best_epoch}, "
              f"validation NLL {min(report.validation_nll):.4f}")
    return EXIT_OK


def cmd_eval(args) -> int:
    started = time.time()
    taxonomy = _taxonomy(args)
    granularity = GRANULARITIES[args.granularity]
    if bool(args.model) == bool(args.lexicon):
        raise EvalError("exactly one of --model / --lexicon is required")
    if args.model:
        params = load_checkpoint(args.model)
        corpus = cp.load_corpus(args.test)
        report = evaluate("model", corpus.test, taxonomy, granularity,
                          params=params, max_k=args.k, corpus_id=args.test)
    else:
        lexicon = StyleRuleLexicon.load(args.lexicon)
        posts = cp.load_structured(Path(args.test) / "structured_test.jsonl")
        report = evaluate_apriori(apriori_queries(posts, granularity), lexicon,
                                  granularity, max_k=args.k, corpus_id=args.test)
    out = Path(args.report)
    report.to_json(out)
    _write_manifest(out, "eval",
                    {"granularity": args.granularity, "k": args.k,
                     "lexicon": args.lexicon, "model": args.model},
                    [args.test], [str(out)], None, started)
    if not args.quiet:
        print(report.table())
    return EXIT_OK


def cmd_retrieval(args) -> int:
    started = time.time()
    params = load_checkpoint(args.model)
    corpus = cp.load_corpus(args.test)
    score = retrieval_experiment(params, corpus.test, args.k_neg, seed=args.seed)
    out = Path(args.report)
    with open(out, "w", encoding="utf-8") as fh:
        json.dump({"k_neg": args.k_neg, "mrr": score, "seed": args.seed},
                  fh, sort_keys=True, indent=2)
        fh.write("\n")
    _write_manifest(out, "retrieval", {"k_neg": args.k_neg},
                    [args.test], [str(out)], args.seed, started)
    if not args.quiet:
        print(f"MRR@{args.k_neg} negatives: {score:.4f}")
    return EXIT_OK


def cmd_recommend(args) -> int:
    params = load_checkpoint(args.model)
    taxonomy = _taxonomy(args)
    items = []
    for chunk in args.query.split(","):
        items.extend(annotate(chunk, taxonomy))
    if not items:
        raise DecodingError(f"no fashion items recognized in {args.query!r}")
    candidates = complete_itemset(items, params, taxonomy, k=args.k)
    for rank, cand in enumerate(candidates, 1):
        label = cand.item.render() if cand.item else " ".join(cand.tokens) + " [raw]"
        print(f"{rank}\t{label}\t{cand.logprob:.4f}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn
    from .service import build_app
    app = build_app(model_path=args.model, taxonomy_path=args.taxonomy,
                    lexicon_path=args.lexicon)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="outfitcomplete",
                     description="Complementary fashion item recommendation pipeline")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, seed=True):
        p.add_argument("--quiet", action="store_true")
        p.add_argument("--config", help="JSON config file (flags take precedence)")
        if seed:
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("gen", help="generate a synthetic post corpus")
    common(p)
    p.add_argument("--rules", help="style-rule JSON file (default: built-in rules)")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--noise", type=float, default=0.15)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("annotate", help="parse posts into structured items")
    common(p, seed=False)
    p.add_argument("--taxonomy", help="taxonomy JSON (default: bundled fixture)")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("filter", help="keep the top percentile by fashion score")
    common(p, seed=False)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--percentile", type=float, default=30.0)
    p.add_argument("--w-votes", type=float, default=1.0)
    p.add_argument("--w-likes", type=float, default=1.0)
    p.add_argument("--w-comments", type=float, default=1.0)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("prepare", help="split posts and build vocabularies")
    common(p)
    p.add_argument("--in", dest="infile", required=True,
                   help="structured posts file")
    p.add_argument("--out", required=True, help="corpus output directory")
    p.add_argument("--ratios", default="0.7,0.2,0.1")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("mine", help="mine a style rule lexicon (apriori)")
    common(p, seed=False)
    p.add_argument("--corpus", required=True)
    p.add_argument("--granularity", choices=sorted(GRANULARITIES), default="full")
    p.add_argument("--min-support", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("train", help="train the encoder-decoder")
    common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--attention", choices=["on", "off"], default="on")
    p.add_argument("--out", required=True)
    p.add_argument("--embedding-dim", type=int)
    p.add_argument("--hidden-dim", type=int)
    p.add_argument("--max-target-len", type=int)
    p.add_argument("--init-scale", type=float)
    p.add_argument("--lr", type=float)
    p.add_argument("--lr-decay", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--clip-norm", type=float)
    p.add_argument("--patience", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="JSS@k report for a model or lexicon")
    common(p, seed=False)
    p.add_argument("--model")
    p.add_argument("--lexicon")
    p.add_argument("--test", required=True, help="corpus directory")
    p.add_argument("--taxonomy")
    p.add_argument("--granularity", choices=sorted(GRANULARITIES), default="full")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("retrieval", help="MRR with sampled negatives")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--k-neg", type=int, default=4)
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_retrieval)

    p = sub.add_parser("recommend", help="complete an itemset from the CLI")
    common(p, seed=False)
    p.add_argument("--model", required=True)
    p.add_argument("--taxonomy")
    p.add_argument("--query", required=True,
                   help='e.g. "red floral dress, black leather bag"')
    p.add_argument("--k", type=int, default=5)
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("serve", help="run the HTTP completion service")
    common(p, seed=False)
    p.add_argument("--model", required=True)
    p.add_argument("--lexicon")
    p.add_argument("--taxonomy")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)
    return parser


def dispatch(argv: list[str] | None = None) -> int:
    global _ARGV
    _ARGV = list(argv) if argv is not None else sys.argv[1:]
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (cp.CorpusError, TaxonomyError, EvalError, DecodingError, RuleError,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
