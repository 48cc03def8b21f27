"""Monte Carlo sanity checks for the spectral samplers.

Draws replicate fields, compares the empirical covariance of representer
evaluations against the analytic node sum, and prints the variance-scaling
exponent recovered from fractional Brownian motion samples.

Run:  python scripts/sampling_check.py [--n 4000] [--seed 7]
"""

import argparse

import numpy as np

from irfk import (
    AngularSpectralMeasure,
    OperatorExponent,
    RadialQuadrature,
    SelfSimilarModel,
    build_frame,
    check_mc_covariance,
    lambda_t,
    monomial_basis,
    sample_irfk,
    sample_nfbm,
)


def demo_model(q=512):
    S = np.array([[1.0, 0.2 + 0.1j], [0.2 - 0.1j, 0.8]])
    return SelfSimilarModel(
        d=1, k=0, m=2,
        exponent=OperatorExponent(np.diag([0.3, 0.7]).astype(complex)),
        sigma=AngularSpectralMeasure(1, 2, [((1.0,), S), ((-1.0,), S.conj())]),
        quad=RadialQuadrature(q=q))


def mc_covariance(n, seed):
    model = demo_model()
    frame = build_frame(monomial_basis(1, 0), nodes=[[0.0]])
    pts = [0.4, 1.0, 1.6]
    grid = np.vstack([frame.nodes, [[p] for p in pts]])
    sample = sample_irfk(model, frame, grid, replicates=n, seed=seed)
    probes = [lambda_t(frame, [p]) for p in pts]
    pairs = [(probes[i], probes[j])
             for i in range(len(pts)) for j in range(i, len(pts))]
    rep = check_mc_covariance(sample, model, pairs)
    print(f"operator model, N = {n}:")
    print(" ", rep.summary_line())
    print(f"  fraction of entries within 3 SE: "
          f"{rep.details['fraction_within_3se']:.3f}")


def nfbm_scaling(n, seed):
    print(f"\nfBm variance doubling, N = {n}:")
    for h in (0.3, 0.5, 0.7):
        out = sample_nfbm(1, h, np.array([[0.5], [1.0]]),
                          replicates=n, seed=seed)
        v = out.values[:, :, 0]
        slope = np.log2(v[:, 1].var() / v[:, 0].var())
        print(f"  H = {h}: log2 Var(Y(2t))/Var(Y(t)) = {slope:.3f}"
              f"  (target {2 * h:.1f})")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    mc_covariance(args.n, args.seed)
    nfbm_scaling(args.n, args.seed)


if __name__ == "__main__":
    main()
