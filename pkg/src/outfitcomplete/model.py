"""Encoder-decoder with dot-product attention over the item-word sequence."""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from . import numeric as nm
from .corpus import Vocabulary, PAD_ID, SOS_ID, EOS_ID
from .numeric import Tensor


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    embedding_dim: int = 64
    hidden_dim: int = 128
    attention_enabled: bool = True
    max_target_len: int = 8
    init_scale: float = 0.08
    seed: int = 0

    def __post_init__(self):
        if self.embedding_dim < 1 or self.hidden_dim < 1:
            raise ModelError("dims must be >= 1")
        if self.max_target_len < 2:
            raise ModelError("max_target_len must be >= 2")


PARAM_NAMES = ("src_embed", "tgt_embed", "enc_wx", "enc_wh", "enc_b",
               "dec_wx", "dec_wh", "dec_b", "w_out")


class ModelParams:
    """Named weight arrays plus the config and vocabularies they belong to."""

    def __init__(self, arrays: dict[str, np.ndarray], config: ModelConfig,
                 source_vocab: Vocabulary, target_vocab: Vocabulary):
        self.arrays = arrays
        self.config = config
        self.source_vocab = source_vocab
        self.target_vocab = target_vocab
        self._check_shapes()

    def _check_shapes(self):
        d, n = self.config.embedding_dim, self.config.hidden_dim
        out_width = 2 * n if self.config.attention_enabled else n
        expected = {
            "src_embed": (len(self.source_vocab), d),
            "tgt_embed": (len(self.target_vocab), d),
            "enc_wx": (4 * n, d), "enc_wh": (4 * n, n), "enc_b": (4 * n,),
            "dec_wx": (4 * n, d), "dec_wh": (4 * n, n), "dec_b": (4 * n,),
            "w_out": (len(self.target_vocab), out_width),
        }
        for name, shape in expected.items():
            if name not in self.arrays:
                raise ModelError(f"missing parameter {name}")
            if self.arrays[name].shape != shape:
                raise ModelError(
                    f"parameter {name} has shape {self.arrays[name].shape}, "
                    f"expected {shape} (attention={self.config.attention_enabled})")

    def copy(self) -> "ModelParams":
        return ModelParams({k: v.copy() for k, v in self.arrays.items()},
                           self.config, self.source_vocab, self.target_vocab)

    def as_tensors(self, requires_grad: bool = False) -> dict[str, Tensor]:
        return {k: Tensor(v, requires_grad=requires_grad)
                for k, v in self.arrays.items()}


def init_params(config: ModelConfig, source_vocab: Vocabulary,
                target_vocab: Vocabulary) -> ModelParams:
    """Uniform [-init_scale, init_scale] init from a seeded generator."""
    rng = np.random.default_rng(config.seed)
    d, n = config.embedding_dim, config.hidden_dim
    out_width = 2 * n if config.attention_enabled else n
    shapes = {
        "src_embed": (len(source_vocab), d),
        "tgt_embed": (len(target_vocab), d),
        "enc_wx": (4 * n, d), "enc_wh": (4 * n, n), "enc_b": (4 * n,),
        "dec_wx": (4 * n, d), "dec_wh": (4 * n, n), "dec_b": (4 * n,),
        "w_out": (len(target_vocab), out_width),
    }
    arrays = {name: rng.uniform(-config.init_scale, config.init_scale, shape)
              for name, shape in shapes.items()}
    return ModelParams(arrays, config, source_vocab, target_vocab)


def _lstm_weights(pt: dict[str, Tensor], prefix: str) -> nm.LSTMWeights:
    return nm.LSTMWeights(pt[f"{prefix}_wx"], pt[f"{prefix}_wh"], pt[f"{prefix}_b"])


@dataclass
class EncoderStates:
    hidden: list[Tensor]     # h^e_1 .. h^e_s
    cell: list[Tensor]


def encode(source_ids, pt: dict[str, Tensor], config: ModelConfig) -> EncoderStates:
    """Run the encoder LSTM over embedded source tokens from a zero state."""
    if not source_ids:
        raise ModelError("empty source sequence")
    n = config.hidden_dim
    weights = _lstm_weights(pt, "enc")
    h = Tensor(np.zeros(n))
    c = Tensor(np.zeros(n))
    hs, cs = [], []
    for tok in source_ids:
        x = nm.embed(int(tok), pt["src_embed"])
        h, c = nm.lstm_cell(x, h, c, weights)
        hs.append(h)
        cs.append(c)
    return EncoderStates(hs, cs)


def attend(h_d: Tensor, enc: EncoderStates) -> tuple[Tensor, Tensor]:
    """Dot-product attention: weights over encoder states and their weighted average."""
    if not enc.hidden:
        raise ModelError("attention over empty encoder states")
    h_stack = nm.stack(enc.hidden)           # (s, n)
    weights = nm.softmax(nm.matvec(h_stack, h_d))
    query = nm.matvec_t(h_stack, weights)    # (n,)
    return weights, query


def decode_step(prev_token_id: int, state: tuple[Tensor, Tensor],
                enc: EncoderStates, pt: dict[str, Tensor],
                config: ModelConfig, return_attention: bool = False):
    """One decoder step; returns (probability vector over V^T, new state[, attention])."""
    weights = _lstm_weights(pt, "dec")
    x = nm.embed(int(prev_token_id), pt["tgt_embed"])
    h, c = nm.lstm_cell(x, state[0], state[1], weights)
    attn = None
    if config.attention_enabled:
        attn, query = attend(h, enc)
        features = nm.concat([query, h])
    else:
        features = h
    if pt["w_out"].shape[1] != features.shape[0]:
        raise ModelError(
            f"w_out width {pt['w_out'].shape[1]} does not match attention flag "
            f"(features of size {features.shape[0]})")
    dist = nm.softmax(nm.matvec(pt["w_out"], features))
    if return_attention:
        return dist, (h, c), attn
    return dist, (h, c)


def initial_decoder_state(enc: EncoderStates) -> tuple[Tensor, Tensor]:
    # decoder starts from the final encoder state
    return enc.hidden[-1], enc.cell[-1]


def nll_graph(source_ids, target_ids, pt: dict[str, Tensor],
              config: ModelConfig) -> Tensor:
    """Teacher-forced negative log likelihood of one example as a graph node."""
    if len(target_ids) < 2:
        raise ModelError("target must have at least one scored position")
    enc = encode(source_ids, pt, config)
    state = initial_decoder_state(enc)
    terms = []
    for j in range(1, len(target_ids)):
        dist, state = decode_step(target_ids[j - 1], state, enc, pt, config)
        terms.append(nm.cross_entropy(dist, int(target_ids[j])))
    return nm.add_n(terms)


def sequence_logprob(source_ids, target_ids, params: ModelParams) -> float:
    """log p(y|x) summed over target positions after <sos> (always <= 0)."""
    pt = params.as_tensors(requires_grad=False)
    return -nll_graph(source_ids, target_ids, pt, params.config).item()


def greedy_decode(source_ids, params: ModelParams, max_len: int | None = None) -> list[int]:
    """Argmax decoding until <eos>; returns token ids without <sos>/<eos>.

    <pad> and <sos> are never emitted, and <eos> cannot be the first token,
    matching the beam search expansion rule.
    """
    config = params.config
    max_len = max_len or config.max_target_len
    pt = params.as_tensors(requires_grad=False)
    enc = encode(source_ids, pt, config)
    state = initial_decoder_state(enc)
    prev = SOS_ID
    out = []
    for step in range(max_len):
        dist, state = decode_step(prev, state, enc, pt, config)
        masked = dist.data.copy()
        masked[PAD_ID] = -np.inf
        masked[SOS_ID] = -np.inf
        if not out:
            masked[EOS_ID] = -np.inf
        nxt = int(np.argmax(masked))
        if nxt == EOS_ID:
            break
        out.append(nxt)
        prev = nxt
    return out


# ---------------------------------------------------------------------------
# checkpointing

def save_checkpoint(params: ModelParams, path: str | Path) -> None:
    path = Path(path)
    nm.save_tensors(path, params.arrays)
    sidecar = {
        "config": asdict(params.config),
        "source_vocab": params.source_vocab.to_dict(),
        "target_vocab": params.target_vocab.to_dict(),
    }
    with open(path.with_suffix(path.suffix + ".json"), "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_checkpoint(path: str | Path) -> ModelParams:
    path = Path(path)
    arrays = nm.load_tensors(path)
    with open(path.with_suffix(path.suffix + ".json"), encoding="utf-8") as fh:
        sidecar = json.load(fh)
    config = ModelConfig(**sidecar["config"])
    return ModelParams(arrays, config,
                       Vocabulary.from_dict(sidecar["source_vocab"]),
                       Vocabulary.from_dict(sidecar["target_vocab"]))
