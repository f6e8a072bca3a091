"""SGD training loop minimizing the negative conditional log likelihood."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Corpus, TrainingExample
from .model import ModelConfig, ModelParams, init_params, nll_graph
from .numeric import NumericError


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1.0
    lr_decay: float = 0.5
    epochs: int = 100
    batch_size: int = 1
    clip_norm: float = 5.0
    seed: int = 0
    early_stop_patience: int = 10
    per_token_loss: bool = True   # False keeps the raw NLL sum per example

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")


@dataclass
class TrainReport:
    train_nll: list[float] = field(default_factory=list)
    validation_nll: list[float] = field(default_factory=list)
    learning_rates: list[float] = field(default_factory=list)
    best_epoch: int = -1

    def to_jsonl(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for i, (tr, va, lr) in enumerate(zip(
                    self.train_nll, self.validation_nll, self.learning_rates)):
                fh.write(json.dumps({
                    "best": i == self.best_epoch, "epoch": i, "lr": lr,
                    "train_nll": tr, "validation_nll": va}, sort_keys=True) + "\n")


def _example_loss_and_grads(params: ModelParams, example: TrainingExample,
                            per_token: bool):
    pt = params.as_tensors(requires_grad=True)
    loss = nll_graph(example.source_ids, example.target_ids, pt, params.config)
    n_tokens = len(example.target_ids) - 1
    loss.backward()
    scale = 1.0 / n_tokens if per_token else 1.0
    grads = {k: (t.grad if t.grad is not None else np.zeros_like(t.data)) * scale
             for k, t in pt.items()}
    return loss.item() * scale, grads


def batch_nll(params: ModelParams, examples: list[TrainingExample],
              per_token: bool = True) -> float:
    """Mean NLL over examples, per scored target token by default."""
    if not examples:
        raise ValueError("batch_nll over an empty batch")
    total = 0.0
    for ex in examples:
        pt = params.as_tensors(requires_grad=False)
        loss = nll_graph(ex.source_ids, ex.target_ids, pt, params.config).item()
        total += loss / (len(ex.target_ids) - 1) if per_token else loss
    return total / len(examples)


def sgd_step(params: ModelParams, grads: dict[str, np.ndarray],
             lr: float, clip_norm: float) -> None:
    """Clip gradients to a global L2 norm, then update params in place."""
    sq = 0.0
    for g in grads.values():
        if not np.all(np.isfinite(g)):
            raise NumericError("non-finite gradient")
        sq += float(np.sum(g * g))
    norm = float(np.sqrt(sq))
    factor = clip_norm / norm if (clip_norm > 0 and norm > clip_norm) else 1.0
    for name, g in grads.items():
        params.arrays[name] -= lr * factor * g


def train(corpus: Corpus, model_config: ModelConfig,
          train_config: TrainConfig) -> tuple[ModelParams, TrainReport]:
    """Train on the corpus; retains the best-validation parameters."""
    if not corpus.train or not corpus.validate:
        raise ValueError("corpus needs non-empty train and validate splits")
    params = init_params(model_config, corpus.source_vocab, corpus.target_vocab)
    report = TrainReport()
    rng = random.Random(train_config.seed)
    lr = train_config.learning_rate
    best_val = float("inf")
    best_params = params.copy()
    bad_epochs = 0
    initial_nll = None

    order = list(range(len(corpus.train)))
    for epoch in range(train_config.epochs):
        rng.shuffle(order)
        epoch_loss = 0.0
        for start in range(0, len(order), train_config.batch_size):
            batch = [corpus.train[i] for i in order[start:start + train_config.batch_size]]
            summed: dict[str, np.ndarray] = {}
            for ex in batch:
                loss, grads = _example_loss_and_grads(
                    params, ex, train_config.per_token_loss)
                epoch_loss += loss
                for k, g in grads.items():
                    if k in summed:
                        summed[k] += g
                    else:
                        summed[k] = g
            mean_grads = {k: g / len(batch) for k, g in summed.items()}
            sgd_step(params, mean_grads, lr, train_config.clip_norm)
        train_nll = epoch_loss / len(order)
        val_nll = batch_nll(params, corpus.validate, train_config.per_token_loss)
        report.train_nll.append(train_nll)
        report.validation_nll.append(val_nll)
        report.learning_rates.append(lr)

        if initial_nll is None:
            initial_nll = train_nll
        if not np.isfinite(train_nll) or train_nll > 1e3 * max(initial_nll, 1.0):
            raise NumericError(
                f"training diverged at epoch {epoch}: NLL {train_nll:.3g}")

        if val_nll < best_val:
            best_val = val_nll
            best_params = params.copy()
            report.best_epoch = epoch
            bad_epochs = 0
        else:
            lr *= train_config.lr_decay
            bad_epochs += 1
            if bad_epochs >= train_config.early_stop_patience:
                break
    return best_params, report
