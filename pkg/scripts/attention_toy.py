"""Train the recurrent attention model on the bright-quadrant toy task."""

import argparse
import time

from seqnn.harness.config import TrainConfig
from seqnn.harness.train import train_attention_toy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--epochs", type=int, default=50)
    ap.add_argument("--hidden", type=int, default=64)
    ap.add_argument("--n-step", type=int, default=4)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    cfg = TrainConfig(task="attention-toy", epochs=args.epochs, hidden=args.hidden,
                      n_step=args.n_step, seed=args.seed)
    t0 = time.perf_counter()
    result = train_attention_toy(cfg)
    for row in result.rows:
        if row.split == "valid":
            print(f"epoch {row.epoch:3d} valid acc {row.accuracy:.3f} loss {row.loss:.4f}")
    print(f"final valid accuracy {result.last('valid').accuracy:.3f} (chance 0.25) "
          f"in {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
