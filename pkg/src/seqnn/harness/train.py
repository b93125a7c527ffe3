"""Trainers for the desk-scale tasks. Each returns per-epoch metric rows."""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..nn import (
    CAddTable, ClassNLLCriterion, ConcatTable, Linear, LogSoftMax, LookupTable, Module,
    SelectTable, Sequential, SequencerCriterion, Sigmoid, Tanh,
)
from ..rnn import LSTM, Recurrence, Recurrent
from ..sequencers import GlimpseCrop, RecurrentAttention, ReinforceNormal, RewardCriterion, Sequencer
from ..tensor import make_rng, split_rng
from .config import TrainConfig
from .data import (
    CharCorpus, gen_attention_toy, gen_copy_task, gen_majority_task, perplexity, stream_windows,
)
from .gradcheck import srn_step_module

CSV_FIELDS = ("epoch", "split", "loss", "perplexity", "accuracy", "wallclock_ms")
ATTENTION_IMAGE = 8
ATTENTION_PATCH = 4
ATTENTION_CLASSES = 4


@dataclass
class MetricRow:
    epoch: int
    split: str
    loss: float
    accuracy: float
    wallclock_ms: Optional[float] = None

    @property
    def perplexity(self) -> float:
        return perplexity(self.loss) if self.loss < 700 else math.inf


def format_csv(rows: list[MetricRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in rows:
        w.writerow([
            r.epoch, r.split, f"{r.loss:.6f}", f"{r.perplexity:.6f}", f"{r.accuracy:.6f}",
            "" if r.wallclock_ms is None else f"{r.wallclock_ms:.0f}",
        ])
    return buf.getvalue()


@dataclass
class TrainResult:
    model: Module
    rows: list[MetricRow]
    meta: dict

    @property
    def csv(self) -> str:
        return format_csv(self.rows)

    def last(self, split: str) -> MetricRow:
        return [r for r in self.rows if r.split == split][-1]


def _streams(seed: int):
    """Independent generators for (train data, valid data, init, ordering/sampling)."""
    return split_rng(make_rng(seed), 4)


# -- model builders --------------------------------------------------------------------

def build_rnn(cfg: TrainConfig, vocab: int, rng) -> Module:
    """Recurrent layer mapping an index tensor (batch,) to hidden states (batch x hidden)."""
    H = cfg.hidden
    if cfg.model == "srn":
        return Recurrent(H, LookupTable(vocab, H, rng=rng), Linear(H, H, rng=rng), Sigmoid(), rho=cfg.rho)
    if cfg.model == "lstm":
        return Sequential(LookupTable(vocab, H, rng=rng), LSTM(H, H, rho=cfg.rho, rng=rng))
    return Recurrence(srn_step_module(vocab, H, rng), H, 1, rho=cfg.rho)


def build_language_model(cfg: TrainConfig, vocab: int, rng) -> Module:
    return Sequencer(
        Sequential(build_rnn(cfg, vocab, rng), Linear(cfg.hidden, vocab, rng=rng), LogSoftMax()),
        remember="both" if cfg.remember else "neither",
    )


def build_sentiment_model(cfg: TrainConfig, vocab: int, n_classes: int, rng) -> Module:
    return (Sequential()
            .add(Sequencer(build_rnn(cfg, vocab, rng)))
            .add(SelectTable(-1))
            .add(Linear(cfg.hidden, n_classes, rng=rng))
            .add(LogSoftMax()))


def build_attention_model(cfg: TrainConfig, rng, stdev: float = 0.15) -> Module:
    H, P = cfg.hidden, ATTENTION_PATCH
    glimpse = Sequential(
        ConcatTable(
            Sequential(GlimpseCrop(ATTENTION_IMAGE, P), Linear(P * P, H, rng=rng)),
            Sequential(SelectTable(2), Linear(2, H, rng=rng)),
        ),
        CAddTable(),
    )
    rnn = Recurrent(H, glimpse, Linear(H, H, rng=rng), Tanh(), rho=cfg.rho)
    action = Sequential(
        Linear(H, 2, rng=rng), Tanh(), ReinforceNormal(stdev, seed=int(rng.integers(2 ** 32)))
    )
    return (Sequential()
            .add(RecurrentAttention(rnn, action, cfg.n_step, H))
            .add(SelectTable(-1))
            .add(Linear(H, ATTENTION_CLASSES, rng=rng))
            .add(LogSoftMax()))


# -- loops -----------------------------------------------------------------------------------

def _sgd_step(model, criterion, inputs, targets, lr):
    out = model.forward(inputs)
    loss = criterion.forward(out, targets)
    grad = criterion.backward(out, targets)
    model.zero_grad_parameters()
    model.backward(inputs, grad)
    model.update_parameters(lr)
    return out, loss


def _lm_pass(model, windows, lr: Optional[float]):
    """One pass over (inputs, targets) windows; trains when ``lr`` is given."""
    crit = SequencerCriterion(ClassNLLCriterion())
    model.forget()
    model.train(lr is not None)
    nll = correct = tokens = 0.0
    for xs, ys in windows:
        if lr is None:
            out = model.forward(xs)
            loss = crit.forward(out, ys)
        else:
            out, loss = _sgd_step(model, crit, xs, ys, lr)
        batch = len(ys[0])
        nll += loss * batch
        tokens += batch * len(ys)
        correct += sum(int((o.argmax(axis=1) + 1 == y).sum()) for o, y in zip(out, ys))
    model.train()
    return nll / tokens, correct / tokens


def _batches(inputs, targets, batch, order):
    for start in range(0, len(order), batch):
        idx = order[start:start + batch]
        yield inputs[idx], targets[idx]


def _as_steps(x):
    return [x[:, t] for t in range(x.shape[1])]


def _epoch_rows(cfg, epoch, t0, train_stats, valid_stats):
    ms = (time.perf_counter() - t0) * 1000.0 if cfg.timing else None
    return [MetricRow(epoch, "train", *train_stats, ms), MetricRow(epoch, "valid", *valid_stats, ms)]


def train_charlm(cfg: TrainConfig, corpus: Optional[CharCorpus] = None) -> TrainResult:
    corpus = corpus or CharCorpus.from_file(cfg.data_path)
    train, valid = corpus.split(0.9)
    _, _, init_rng, _ = _streams(cfg.seed)
    model = build_language_model(cfg, corpus.vocab_size, init_rng)
    rows = []
    t0 = time.perf_counter()
    for epoch in range(1, cfg.epochs + 1):
        tr = _lm_pass(model, stream_windows(train, cfg.batch_size, cfg.rho), cfg.lr)
        va = _lm_pass(model, stream_windows(valid, cfg.batch_size, cfg.rho), None)
        rows += _epoch_rows(cfg, epoch, t0, tr, va)
    meta = {"task": "charlm", "config": cfg.to_dict(), "vocab": corpus.chars}
    return TrainResult(model, rows, meta)


def evaluate_charlm(model, corpus: CharCorpus, cfg: TrainConfig):
    _, valid = corpus.split(0.9)
    return _lm_pass(model, stream_windows(valid, cfg.batch_size, cfg.rho), None)


def _copy_data(cfg):
    tr_rng, va_rng, _, _ = _streams(cfg.seed)
    return (gen_copy_task(cfg.seq_len, cfg.vocab, cfg.n_train, tr_rng),
            gen_copy_task(cfg.seq_len, cfg.vocab, cfg.n_valid, va_rng))


def _copy_windows(data, batch, order):
    for x, y in _batches(data[0], data[1], batch, order):
        yield _as_steps(x), _as_steps(y)


def train_copy(cfg: TrainConfig) -> TrainResult:
    train, valid = _copy_data(cfg)
    _, _, init_rng, order_rng = _streams(cfg.seed)
    model = build_language_model(cfg, cfg.vocab, init_rng)
    rows = []
    t0 = time.perf_counter()
    for epoch in range(1, cfg.epochs + 1):
        order = order_rng.permutation(cfg.n_train)
        tr = _lm_pass(model, _copy_windows(train, cfg.batch_size, order), cfg.lr)
        va = _lm_pass(model, _copy_windows(valid, cfg.batch_size, np.arange(cfg.n_valid)), None)
        rows += _epoch_rows(cfg, epoch, t0, tr, va)
    return TrainResult(model, rows, {"task": "copy", "config": cfg.to_dict()})


def evaluate_copy(model, cfg: TrainConfig):
    _, valid = _copy_data(cfg)
    return _lm_pass(model, _copy_windows(valid, cfg.batch_size, np.arange(cfg.n_valid)), None)


def _classify_pass(model, criterion, inputs, targets, batch, order, lr, prepare):
    model.train(lr is not None)
    nll = correct = 0.0
    for x, y in _batches(inputs, targets, batch, order):
        xin = prepare(x)
        if lr is None:
            out = model.forward(xin)
            loss = criterion.forward(out, y)
        else:
            out, loss = _sgd_step(model, criterion, xin, y, lr)
        nll += loss * len(y)
        correct += int((out.argmax(axis=1) + 1 == y).sum())
    model.train()
    return nll / len(order), correct / len(order)


def _sentiment_data(cfg):
    tr_rng, va_rng, _, _ = _streams(cfg.seed)
    return (gen_majority_task(cfg.seq_len, cfg.vocab, cfg.n_train, tr_rng),
            gen_majority_task(cfg.seq_len, cfg.vocab, cfg.n_valid, va_rng))


def train_sentiment_style(cfg: TrainConfig) -> TrainResult:
    (xtr, ytr), (xva, yva) = _sentiment_data(cfg)
    _, _, init_rng, order_rng = _streams(cfg.seed)
    model = build_sentiment_model(cfg, cfg.vocab, cfg.vocab, init_rng)
    crit = ClassNLLCriterion()
    rows = []
    t0 = time.perf_counter()
    for epoch in range(1, cfg.epochs + 1):
        order = order_rng.permutation(cfg.n_train)
        tr = _classify_pass(model, crit, xtr, ytr, cfg.batch_size, order, cfg.lr, _as_steps)
        va = _classify_pass(model, crit, xva, yva, cfg.batch_size, np.arange(cfg.n_valid), None, _as_steps)
        rows += _epoch_rows(cfg, epoch, t0, tr, va)
    return TrainResult(model, rows, {"task": "sentiment", "config": cfg.to_dict()})


def evaluate_sentiment(model, cfg: TrainConfig):
    _, (xva, yva) = _sentiment_data(cfg)
    return _classify_pass(model, ClassNLLCriterion(), xva, yva, cfg.batch_size,
                          np.arange(cfg.n_valid), None, _as_steps)


def _attention_data(cfg):
    tr_rng, va_rng, _, _ = _streams(cfg.seed)
    return (gen_attention_toy(cfg.n_train, tr_rng, ATTENTION_IMAGE),
            gen_attention_toy(cfg.n_valid, va_rng, ATTENTION_IMAGE))


def _identity(x):
    return x


def train_attention_toy(cfg: TrainConfig) -> TrainResult:
    (xtr, ytr), (xva, yva) = _attention_data(cfg)
    _, _, init_rng, order_rng = _streams(cfg.seed)
    model = build_attention_model(cfg, init_rng)
    crit = RewardCriterion(model)
    rows = []
    t0 = time.perf_counter()
    for epoch in range(1, cfg.epochs + 1):
        order = order_rng.permutation(cfg.n_train)
        tr = _classify_pass(model, crit, xtr, ytr, cfg.batch_size, order, cfg.lr, _identity)
        va = _classify_pass(model, ClassNLLCriterion(), xva, yva, cfg.batch_size,
                            np.arange(cfg.n_valid), None, _identity)
        rows += _epoch_rows(cfg, epoch, t0, tr, va)
    return TrainResult(model, rows, {"task": "attention-toy", "config": cfg.to_dict()})


def evaluate_attention_toy(model, cfg: TrainConfig):
    _, (xva, yva) = _attention_data(cfg)
    return _classify_pass(model, ClassNLLCriterion(), xva, yva, cfg.batch_size,
                          np.arange(cfg.n_valid), None, _identity)


TRAINERS = {
    "copy": train_copy,
    "charlm": train_charlm,
    "sentiment": train_sentiment_style,
    "attention-toy": train_attention_toy,
}


def run_training(cfg: TrainConfig) -> TrainResult:
    return TRAINERS[cfg.task](cfg)
