"""Train the character LM on the tiny corpus and compare against the uniform baseline."""

import argparse
import time
from pathlib import Path

from seqnn.harness.config import MODELS, TrainConfig
from seqnn.harness.data import CharCorpus
from seqnn.harness.train import train_charlm

DEFAULT_CORPUS = Path(__file__).resolve().parents[1] / "data" / "tiny_corpus.txt"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--data", default=str(DEFAULT_CORPUS))
    ap.add_argument("--model", choices=MODELS, default="lstm")
    ap.add_argument("--epochs", type=int, default=20)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--remember", action="store_true")
    ap.add_argument("--out", help="write the metric CSV here")
    args = ap.parse_args()

    cfg = TrainConfig(model=args.model, task="charlm", data_path=args.data, epochs=args.epochs,
                      seed=args.seed, remember=args.remember)
    corpus = CharCorpus.from_file(args.data)
    t0 = time.perf_counter()
    result = train_charlm(cfg, corpus)
    elapsed = time.perf_counter() - t0
    if args.out:
        Path(args.out).write_text(result.csv)
    for row in result.rows:
        print(f"epoch {row.epoch:3d} {row.split:5s} ppl {row.perplexity:8.3f} acc {row.accuracy:.3f}")
    final = result.last("valid").perplexity
    print(f"uniform perplexity {corpus.vocab_size}, final valid {final:.3f} "
          f"({final / corpus.vocab_size:.1%} of uniform) in {elapsed:.1f}s")


if __name__ == "__main__":
    main()
