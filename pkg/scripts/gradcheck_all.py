"""Run the finite-difference gradient check over every registered architecture."""

import argparse
import sys

from seqnn.harness.gradcheck import covered_types, run_gradcheck
from seqnn.nn.module import MODULE_TYPES


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    reports = run_gradcheck(seed=args.seed)
    for r in reports:
        print(f"{r.name:32s} {r.max_rel_error:.3e} {'ok' if r.passed else 'FAIL'}")
    missing = sorted(set(MODULE_TYPES) - covered_types(reports))
    print("uncovered module types:", ", ".join(missing) or "none")
    sys.exit(0 if all(r.passed for r in reports) and not missing else 1)


if __name__ == "__main__":
    main()
