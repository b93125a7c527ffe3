"""Write the deterministic 10 KiB character corpus used by the charlm task."""

import argparse
from pathlib import Path

from seqnn.harness.data import make_tiny_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "data" / "tiny_corpus.txt"))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--bytes", type=int, default=10 * 1024)
    args = ap.parse_args()
    text = make_tiny_corpus(args.seed, args.bytes)
    Path(args.out).write_text(text, encoding="utf-8")
    print(f"wrote {len(text)} characters ({len(set(text))} symbols) to {args.out}")


if __name__ == "__main__":
    main()
