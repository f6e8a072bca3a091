"""Post ingestion, fashion-score filtering, tuple generation, vocabularies, and splits."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .annotator import AttributedItem, StructuredPost

PAD, SOS, EOS, EOI, UNK = "<pad>", "<sos>", "<eos>", "<eoi>", "<unk>"
RESERVED = (PAD, SOS, EOS, EOI, UNK)
PAD_ID, SOS_ID, EOS_ID, EOI_ID, UNK_ID = range(5)


class CorpusError(ValueError):
    """Malformed corpus input or empty dataset."""


@dataclass(frozen=True)
class SocialPost:
    id: str
    text: str
    votes: int = 0
    likes: int = 0
    comments: int = 0

    def __post_init__(self):
        if min(self.votes, self.likes, self.comments) < 0:
            raise CorpusError(f"post {self.id}: negative social counts")


@dataclass(frozen=True)
class ScoreWeights:
    w_votes: float = 1.0
    w_likes: float = 1.0
    w_comments: float = 1.0

    def __post_init__(self):
        if min(self.w_votes, self.w_likes, self.w_comments) < 0:
            raise CorpusError("score weights must be nonnegative")
        if self.w_votes == self.w_likes == self.w_comments == 0:
            raise CorpusError("at least one score weight must be positive")


def fashion_score(post: SocialPost, w: ScoreWeights = ScoreWeights()) -> float:
    return w.w_votes * post.votes + w.w_likes * post.likes + w.w_comments * post.comments


def filter_top_percentile(posts: list[SocialPost], w: ScoreWeights,
                          p: float) -> list[SocialPost]:
    """Keep posts whose score is at or above the (100-p)th percentile; stable order."""
    if not 0 < p <= 100:
        raise CorpusError(f"percentile p must be in (0, 100], got {p}")
    if not posts:
        return []
    scores = [fashion_score(post, w) for post in posts]
    ranked = sorted(scores)
    # score at the (100-p)th percentile; ties at the threshold are kept
    idx = max(0, min(len(ranked) - 1, int((100 - p) / 100 * len(ranked))))
    threshold = ranked[idx]
    return [post for post, s in zip(posts, scores) if s >= threshold]


def make_examples(post: StructuredPost) -> list[tuple[list[AttributedItem], AttributedItem]]:
    """Leave-one-out tuples: each item becomes the target once."""
    if len(post.items) < 2:
        raise CorpusError(f"post {post.source_id}: need >= 2 items for tuples")
    out = []
    for i, target in enumerate(post.items):
        inputs = [item for j, item in enumerate(post.items) if j != i]
        out.append((inputs, target))
    return out


class Vocabulary:
    """Token<->id bijection with fixed reserved ids 0-4."""

    def __init__(self, tokens: Iterable[str], side: str):
        self.side = side
        self.id_to_token = list(RESERVED)
        self.token_to_id = {t: i for i, t in enumerate(RESERVED)}
        for tok in sorted(set(tokens)):
            if tok in self.token_to_id:
                continue
            self.token_to_id[tok] = len(self.id_to_token)
            self.id_to_token.append(tok)

    def __len__(self) -> int:
        return len(self.id_to_token)

    def encode(self, token: str) -> int:
        return self.token_to_id.get(token, UNK_ID)

    def decode(self, idx: int) -> str:
        return self.id_to_token[idx]

    def to_dict(self) -> dict:
        return {"side": self.side, "tokens": self.id_to_token[len(RESERVED):]}

    @classmethod
    def from_dict(cls, raw: dict) -> "Vocabulary":
        return cls(raw["tokens"], raw["side"])


@dataclass(frozen=True)
class TrainingExample:
    source_ids: tuple[int, ...]
    target_ids: tuple[int, ...]
    post_id: str = ""

    def __post_init__(self):
        if not self.source_ids:
            raise CorpusError("empty source sequence")
        if len(self.target_ids) < 3 or self.target_ids[0] != SOS_ID \
                or self.target_ids[-1] != EOS_ID:
            raise CorpusError("target must be <sos> word+ <eos>")


def encode_source(items: list[AttributedItem], vocab: Vocabulary) -> list[int]:
    """Per item: color?, pattern?, apparel word ids, then <eoi>."""
    if not items:
        raise CorpusError("cannot encode an empty item list")
    ids = []
    for item in items:
        ids.extend(vocab.encode(w) for w in item.words())
        ids.append(EOI_ID)
    return ids


def encode_target(item: AttributedItem, vocab: Vocabulary) -> list[int]:
    return [SOS_ID] + [vocab.encode(w) for w in item.words()] + [EOS_ID]


def build_vocab(tuples: list[tuple[list[AttributedItem], AttributedItem]]
                ) -> tuple[Vocabulary, Vocabulary]:
    """Source and target vocabularies over the given (train) tuples."""
    if not tuples:
        raise CorpusError("cannot build vocabulary from an empty corpus")
    src_tokens, tgt_tokens = [], []
    for inputs, target in tuples:
        for item in inputs:
            src_tokens.extend(item.words())
        tgt_tokens.extend(target.words())
    return Vocabulary(src_tokens, "source"), Vocabulary(tgt_tokens, "target")


def split_counts(total: int, ratios: tuple[float, ...]) -> list[int]:
    """Floor each split but the last; the last absorbs the remainder."""
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise CorpusError(f"split ratios must sum to 1, got {ratios}")
    counts = [int(total * r) for r in ratios[:-1]]
    counts.append(total - sum(counts))
    return counts


@dataclass
class Corpus:
    train: list[TrainingExample]
    test: list[TrainingExample]
    validate: list[TrainingExample]
    source_vocab: Vocabulary
    target_vocab: Vocabulary
    split_post_ids: dict = field(default_factory=dict)


def split(posts: list[StructuredPost],
          ratios: tuple[float, float, float] = (0.7, 0.2, 0.1),
          seed: int = 0) -> Corpus:
    """Post-level train/test/validate split; vocab built from train only."""
    if not posts:
        raise CorpusError("no structured posts to split")
    order = list(posts)
    random.Random(seed).shuffle(order)
    n_train, n_test, n_val = split_counts(len(order), ratios)
    groups = {
        "train": order[:n_train],
        "test": order[n_train:n_train + n_test],
        "validate": order[n_train + n_test:],
    }
    train_tuples = [t for p in groups["train"] for t in make_examples(p)]
    if not train_tuples:
        raise CorpusError("train split produced no examples")
    src_vocab, tgt_vocab = build_vocab(train_tuples)

    def encode_all(split_posts):
        out = []
        for post in split_posts:
            for inputs, target in make_examples(post):
                out.append(TrainingExample(
                    source_ids=tuple(encode_source(inputs, src_vocab)),
                    target_ids=tuple(encode_target(target, tgt_vocab)),
                    post_id=post.source_id))
        return out

    return Corpus(
        train=encode_all(groups["train"]),
        test=encode_all(groups["test"]),
        validate=encode_all(groups["validate"]),
        source_vocab=src_vocab,
        target_vocab=tgt_vocab,
        split_post_ids={k: [p.source_id for p in v] for k, v in groups.items()},
    )


# ---------------------------------------------------------------------------
# file formats: one JSON object per line, sorted keys

def load_posts(path: str | Path) -> list[SocialPost]:
    posts = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
                posts.append(SocialPost(
                    id=str(raw["id"]), text=raw["text"],
                    votes=int(raw.get("votes", 0)),
                    likes=int(raw.get("likes", 0)),
                    comments=int(raw.get("comments", 0))))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorpusError(f"{path}:{lineno}: bad post record: {exc}") from exc
    return posts


def save_posts(posts: list[SocialPost], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in posts:
            fh.write(json.dumps(
                {"comments": p.comments, "id": p.id, "likes": p.likes,
                 "text": p.text, "votes": p.votes}, sort_keys=True) + "\n")


def save_structured(posts: list[StructuredPost], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in posts:
            fh.write(json.dumps({
                "id": p.source_id,
                "items": [{"apparel": i.apparel, "color": i.color,
                           "pattern": i.pattern} for i in p.items],
            }, sort_keys=True) + "\n")


def load_structured(path: str | Path) -> list[StructuredPost]:
    posts = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
                items = tuple(AttributedItem(i["apparel"], i.get("color"),
                                             i.get("pattern"))
                              for i in raw["items"])
                posts.append(StructuredPost(source_id=str(raw["id"]), items=items))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorpusError(f"{path}:{lineno}: bad structured record: {exc}") from exc
    return posts


def save_corpus(corpus: Corpus, outdir: str | Path) -> None:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for name in ("train", "test", "validate"):
        with open(outdir / f"{name}.jsonl", "w", encoding="utf-8") as fh:
            for ex in getattr(corpus, name):
                fh.write(json.dumps({
                    "post_id": ex.post_id,
                    "source_ids": list(ex.source_ids),
                    "target_ids": list(ex.target_ids),
                }, sort_keys=True) + "\n")
    with open(outdir / "vocab.json", "w", encoding="utf-8") as fh:
        json.dump({"source": corpus.source_vocab.to_dict(),
                   "target": corpus.target_vocab.to_dict(),
                   "splits": corpus.split_post_ids},
                  fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_corpus(outdir: str | Path) -> Corpus:
    outdir = Path(outdir)
    with open(outdir / "vocab.json", encoding="utf-8") as fh:
        meta = json.load(fh)

    def load_split(name):
        out = []
        with open(outdir / f"{name}.jsonl", encoding="utf-8") as fh:
            for line in fh:
                raw = json.loads(line)
                out.append(TrainingExample(tuple(raw["source_ids"]),
                                           tuple(raw["target_ids"]),
                                           raw.get("post_id", "")))
        return out

    return Corpus(
        train=load_split("train"), test=load_split("test"),
        validate=load_split("validate"),
        source_vocab=Vocabulary.from_dict(meta["source"]),
        target_vocab=Vocabulary.from_dict(meta["target"]),
        split_post_ids=meta.get("splits", {}),
    )
