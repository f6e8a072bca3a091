"""Word-based beam search and itemset completion on top of the trained model."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .annotator import AttributedItem
from .corpus import EOS_ID, PAD_ID, SOS_ID, UNK_ID, EOI_ID, encode_source
from .model import ModelParams, decode_step, encode, initial_decoder_state
from .taxonomy import Taxonomy, TermClass


class DecodingError(ValueError):
    pass


@dataclass
class Hypothesis:
    tokens: tuple[int, ...]        # after <sos>, excluding <eos>
    logprob: float
    finished: bool = False
    attention: Optional[np.ndarray] = None   # final-step weights, if enabled

    def sort_key(self, length_normalize: bool = False):
        score = self.logprob / max(1, len(self.tokens)) if length_normalize \
            else self.logprob
        return (-score, self.tokens)


def beam_search(source_ids, params: ModelParams, k: int = 10,
                max_len: int | None = None,
                length_normalize: bool = False) -> list[Hypothesis]:
    """Top-k finished hypotheses by cumulative log-probability.

    Ties break toward the lexicographically smaller token-id sequence.
    Live hypotheses at max_len are force-finished by emitting <eos>.
    """
    if k < 1:
        raise DecodingError("beam width must be >= 1")
    if not source_ids:
        raise DecodingError("empty source sequence")
    config = params.config
    max_len = max_len or config.max_target_len
    pt = params.as_tensors(requires_grad=False)
    enc = encode(source_ids, pt, config)

    # per-live-hypothesis decoder state, parallel to `live`
    live = [Hypothesis(tokens=(), logprob=0.0)]
    states = [(initial_decoder_state(enc), SOS_ID)]
    finished: list[Hypothesis] = []

    for step in range(max_len):
        candidates = []   # (hyp, state) pairs
        for hyp, (state, prev) in zip(live, states):
            dist, new_state, attn = decode_step(
                prev, state, enc, pt, config, return_attention=True)
            logp = np.log(dist.data)
            attn_w = attn.data.copy() if attn is not None else None
            for tok in range(len(logp)):
                if tok in (PAD_ID, SOS_ID):
                    continue
                if tok == EOS_ID:
                    if not hyp.tokens:
                        continue   # targets carry at least one word
                    candidates.append((Hypothesis(
                        hyp.tokens, hyp.logprob + logp[tok], True, attn_w), None))
                else:
                    candidates.append((Hypothesis(
                        hyp.tokens + (tok,), hyp.logprob + logp[tok],
                        False, attn_w), (new_state, tok)))
        candidates.sort(key=lambda c: c[0].sort_key(length_normalize))
        kept = candidates[:k]
        live, states = [], []
        for hyp, st in kept:
            if hyp.finished:
                finished.append(hyp)
            else:
                live.append(hyp)
                states.append(st)
        if len(finished) >= k or not live:
            break

    # force-finish survivors with their actual <eos> probability
    for hyp, (state, prev) in zip(live, states):
        dist, _, attn = decode_step(prev, state, enc, pt, config,
                                    return_attention=True)
        finished.append(Hypothesis(
            hyp.tokens, hyp.logprob + float(np.log(dist.data[EOS_ID])), True,
            attn.data.copy() if attn is not None else None))

    finished.sort(key=lambda h: h.sort_key(length_normalize))
    return finished[:k]


def parse_item_words(words: list[str], taxonomy: Taxonomy) -> Optional[AttributedItem]:
    """Parse a word sequence against the color? pattern? apparel grammar."""
    n = len(words)

    def term_of(span, cls):
        if not span:
            return None, True
        try:
            got, canonical = taxonomy.lookup(" ".join(span))
        except ValueError:
            return None, False
        return canonical, got is cls

    for c_end in range(0, min(2, n) + 1):
        color, ok = term_of(words[:c_end], TermClass.COLOR)
        if not ok:
            continue
        for p_end in range(c_end, min(c_end + 2, n) + 1):
            pattern, ok = term_of(words[c_end:p_end], TermClass.PATTERN)
            if not ok:
                continue
            if not 1 <= n - p_end <= 3:
                continue
            apparel, ok = term_of(words[p_end:], TermClass.APPAREL)
            if ok:
                return AttributedItem(apparel, color, pattern)
    return None


@dataclass
class Candidate:
    tokens: tuple[str, ...]
    logprob: float
    score: float                       # normalized over the returned list
    item: Optional[AttributedItem] = None
    raw: bool = False                  # tokens did not parse as an item
    attention: Optional[list[float]] = None


def complete_itemset(items: list[AttributedItem], params: ModelParams,
                     taxonomy: Taxonomy, k: int = 10) -> list[Candidate]:
    """Encode an itemset, beam-search completions, and parse them back into items."""
    source_ids = encode_source(items, params.source_vocab)
    if all(t == UNK_ID for t in source_ids if t != EOI_ID):
        raise DecodingError(
            "every query word is unknown to the model vocabulary; "
            "taxonomy and checkpoint are likely mismatched")
    hyps = beam_search(source_ids, params, k=k)
    if not hyps:
        return []
    weights = np.exp([h.logprob for h in hyps])
    weights = weights / weights.sum()
    out = []
    for hyp, w in zip(hyps, weights):
        words = [params.target_vocab.decode(t) for t in hyp.tokens]
        item = parse_item_words(words, taxonomy)
        out.append(Candidate(
            tokens=tuple(words), logprob=hyp.logprob, score=float(w),
            item=item, raw=item is None,
            attention=list(hyp.attention) if hyp.attention is not None else None))
    return out
