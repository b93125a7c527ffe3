"""Monte-Carlo check of the REINFORCE estimator for a Gaussian policy.

For z ~ N(mu, s^2) and reward r(z) = z, d/dmu E[r] = 1. The node's backward
returns -r (z - mu) / s^2 per sample, so its mean should approach -1.
"""

import argparse

import numpy as np

from seqnn.sequencers import ReinforceNormal


def estimate(n: int, mu: float, stdev: float, seed: int) -> float:
    node = ReinforceNormal(stdev, seed=seed)
    mean = np.full((n, 1), mu)
    z = node.forward(mean)
    node.reinforce(z[:, 0])
    return float(node.backward(mean, None).mean())


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=1_000_000)
    ap.add_argument("--mu", type=float, default=1.5)
    ap.add_argument("--stdev", type=float, default=0.5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    g = estimate(args.samples, args.mu, args.stdev, args.seed)
    print(f"estimate {g:.5f}, analytic -1, relative error {abs(g + 1):.3%}")


if __name__ == "__main__":
    main()
