"""Command-line entry point: gradcheck, train, eval, serialize-roundtrip.

Exit codes: 0 ok, 1 check failure, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..errors import ConfigError
from ..nn import serialize
from .config import MODELS, TASKS, TrainConfig
from .data import CharCorpus
from .gradcheck import ARCHITECTURES, FAIL_THRESHOLD, run_gradcheck
from .roundtrip import run_roundtrip
from .train import (
    MetricRow, evaluate_attention_toy, evaluate_charlm, evaluate_copy, evaluate_sentiment,
    format_csv, run_training,
)

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    d = TrainConfig(task="copy")
    p.add_argument("--model", choices=MODELS, default=d.model)
    p.add_argument("--hidden", type=int, default=d.hidden)
    p.add_argument("--rho", type=int, default=d.rho)
    p.add_argument("--lr", type=float, default=d.lr)
    p.add_argument("--epochs", type=int, default=d.epochs)
    p.add_argument("--batch-size", type=int, default=d.batch_size)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--task", choices=TASKS, default="charlm")
    p.add_argument("--data", dest="data_path", default=None, help="text corpus for the charlm task")
    p.add_argument("--remember", action="store_true", help="carry hidden state across windows")
    p.add_argument("--seq-len", type=int, default=d.seq_len, help="sequence length (synthetic tasks)")
    p.add_argument("--vocab", type=int, default=d.vocab, help="symbol count (synthetic tasks)")
    p.add_argument("--timing", action="store_true", help="fill the wallclock_ms column")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="seqnn", description="Recurrent network toolkit harness.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gradcheck", help="compare analytic gradients with central differences")
    g.add_argument("--arch", nargs="*", choices=sorted(ARCHITECTURES), help="subset of architectures")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--corrupt", action="store_true", help="perturb one analytic gradient (detector test)")

    t = sub.add_parser("train", help="train a model and emit per-epoch metrics as CSV")
    _add_train_flags(t)
    t.add_argument("--out", help="CSV path (default: stdout)")
    t.add_argument("--save", help="write the trained model to this file")

    e = sub.add_parser("eval", help="evaluate a saved model on its validation split")
    e.add_argument("--load", required=True, help="model file written by train --save")
    e.add_argument("--data", dest="data_path", default=None, help="override the charlm corpus path")
    e.add_argument("--out", help="CSV path (default: stdout)")

    r = sub.add_parser("serialize-roundtrip", help="check save/load reproduces forward outputs bit for bit")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--load", help="also check that re-saving this model file is byte-stable")
    return ap


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _config_from(args) -> TrainConfig:
    keys = ("model", "hidden", "rho", "lr", "epochs", "batch_size", "seed", "task", "data_path",
            "remember", "seq_len", "vocab", "timing")
    return TrainConfig(**{k: getattr(args, k) for k in keys})


def cmd_gradcheck(args) -> int:
    reports = run_gradcheck(args.arch, seed=args.seed, corrupt=args.corrupt)
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name:32s} max_rel_error={r.max_rel_error:.3e}")
    failed = [r.name for r in reports if not r.passed]
    print(f"{len(reports) - len(failed)}/{len(reports)} passed (threshold {FAIL_THRESHOLD:g})")
    return EXIT_CHECK if failed else EXIT_OK


def cmd_train(args) -> int:
    cfg = _config_from(args)
    if cfg.task == "charlm":
        CharCorpus.from_file(cfg.data_path)  # fail fast on unreadable or degenerate corpora
    result = run_training(cfg)
    _emit(result.csv, args.out)
    if args.save:
        serialize.save(result.model, args.save, meta=result.meta)
    return EXIT_OK


def cmd_eval(args) -> int:
    model, meta = serialize.load_with_meta(args.load)
    if "config" not in meta:
        raise ConfigError(f"{args.load} carries no training configuration")
    cfg_dict = dict(meta["config"])
    if args.data_path:
        cfg_dict["data_path"] = args.data_path
    cfg = TrainConfig.from_dict(cfg_dict)
    if cfg.task == "charlm":
        text = Path(cfg.data_path).read_text(encoding="utf-8")
        loss, acc = evaluate_charlm(model, CharCorpus.from_vocab(meta["vocab"], text), cfg)
    else:
        evaluate = {"copy": evaluate_copy, "sentiment": evaluate_sentiment,
                    "attention-toy": evaluate_attention_toy}[cfg.task]
        loss, acc = evaluate(model, cfg)
    _emit(format_csv([MetricRow(cfg.epochs, "valid", loss, acc)]), getattr(args, "out", None))
    return EXIT_OK


def cmd_roundtrip(args) -> int:
    reports = run_roundtrip(seed=args.seed)
    ok = True
    for r in reports:
        train = "n/a" if r.identical_train is None else r.identical_train
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name:32s} eval={r.identical_eval} train={train}")
        ok &= r.passed
    if args.load:
        data = Path(args.load).read_bytes()
        model, meta = serialize.loads_with_meta(data)
        stable = serialize.dumps(model, meta) == data
        print(f"{'PASS' if stable else 'FAIL'} {args.load} re-save byte-identical={stable}")
        ok &= stable
    return EXIT_OK if ok else EXIT_CHECK


COMMANDS = {"gradcheck": cmd_gradcheck, "train": cmd_train, "eval": cmd_eval,
            "serialize-roundtrip": cmd_roundtrip}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, serialize.FormatError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
