"""Closed-form vs quadrature accuracy sweep for the two-point kernel.

For scalar exponents both evaluation routes are available, so their gap
measures the radial quadrature engine end to end (panel rule, Taylor head,
integration-by-parts tails).  Prints a worst-case table per (d, m, k) cell
and the fBm reduction check at k = 0.

Run:  python scripts/kernel_accuracy.py [--q 512] [--reps 10] [--seed 2024]
"""

import argparse
import time

import numpy as np

from irfk import (
    AngularSpectralMeasure,
    K_closed_form,
    K_quadrature,
    RadialQuadrature,
    ScalarH,
    SelfSimilarModel,
    build_frame,
    convolve_reflect,
    cross_covariance,
    ij_constants,
    lambda_t,
    monomial_basis,
    random_probes,
)


def draw_h(rng, k):
    while True:
        h = rng.uniform(0.05, k + 0.95)
        if abs(2.0 * h - round(2.0 * h)) >= 0.1:
            return h


def random_sigma(rng, d, m):
    atoms = []
    for _ in range(2):
        theta = rng.normal(size=d)
        theta = theta / np.linalg.norm(theta)
        B = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
        S = B @ B.conj().T
        atoms.append((tuple(theta), S))
        atoms.append((tuple(-theta), S.conj()))
    return AngularSpectralMeasure(d, m, atoms)


def sweep(q, reps, seed):
    rng = np.random.default_rng(seed)
    print(f"closed vs quadrature, Q = {q}, {reps} random H per cell")
    print(f"{'d':>2} {'m':>2} {'k':>2} {'pairs':>6} {'worst rel':>12} {'at H':>8}")
    t0 = time.perf_counter()
    overall = 0.0
    for d in (1, 2):
        for m in (1, 2):
            for k in (0, 1):
                frame = build_frame(monomial_basis(d, k), seed=17 * d + k)
                worst, worst_h, pairs = 0.0, float("nan"), 0
                for _ in range(reps):
                    h = draw_h(rng, k)
                    model = SelfSimilarModel(
                        d=d, k=k, m=m, exponent=ScalarH(h),
                        sigma=random_sigma(rng, d, m),
                        quad=RadialQuadrature(q=q))
                    probes = random_probes(frame, 40, rng, low=0.2, high=1.2)
                    for lam, mu in zip(probes[0::2], probes[1::2]):
                        closed = K_closed_form(convolve_reflect(lam, mu), model)
                        quad = K_quadrature(lam, mu, model).C
                        rel = (np.linalg.norm(closed - quad)
                               / max(np.linalg.norm(closed), 1.0e-300))
                        pairs += 1
                        if rel > worst:
                            worst, worst_h = rel, h
                print(f"{d:>2} {m:>2} {k:>2} {pairs:>6} {worst:>12.3e} {worst_h:>8.4f}")
                overall = max(overall, worst)
    print(f"overall worst {overall:.3e}  ({time.perf_counter() - t0:.1f}s)")


def fbm_check():
    print("\nfBm reduction at d = 1, k = 0, symmetric weight w = 0.5:")
    w = 0.5
    frame = build_frame(monomial_basis(1, 0), nodes=[[0.0]])
    for h in (0.3, 0.7):
        model = SelfSimilarModel(
            d=1, k=0, m=1, exponent=ScalarH(h),
            sigma=AngularSpectralMeasure(
                1, 1, [((1.0,), [[w]]), ((-1.0,), [[w]])]))
        amp = 2.0 * w * abs(ij_constants(h, 0).I)
        worst = 0.0
        for s in (0.4, 0.7, 1.0, 1.3, 1.6):
            for t in (0.4, 0.7, 1.0, 1.3, 1.6):
                got = cross_covariance(lambda_t(frame, [s]),
                                       lambda_t(frame, [t]), model)[0, 0].real
                want = amp * (s ** (2 * h) + t ** (2 * h)
                              - abs(s - t) ** (2 * h))
                worst = max(worst, abs(got - want) / abs(want))
        print(f"  H = {h}: worst rel gap to 2w|I(H)| kernel {worst:.3e}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q", type=int, default=512)
    ap.add_argument("--reps", type=int, default=10)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()
    sweep(args.q, args.reps, args.seed)
    fbm_check()


if __name__ == "__main__":
    main()
