#!/usr/bin/env python3
"""Cross-check the quadrature expectations against zero-cell simulation.

For each body, evaluates the expected vertex count by the symmetric
product formula (when applicable) and by the general sphere integral,
then simulates zero cells and compares the Monte Carlo mean. Polytopes
are the sharp cases: square and triangle generators have integer-valued
expectations (4 and 3).
"""
import argparse
import math
import sys

import numpy as np

from khull import (ExperimentConfig, QuadratureSpec, body_from_spec,
                   ef0_general, ef0_symmetric, run_experiment)

BODIES = {
    "disk": {"kind": "ball", "r": 1.0, "center": [0, 0]},
    "ellipse(2,1)": {"kind": "ellipsoid", "axes": [2, 1], "center": [0, 0]},
    "pball(p=4)": {"kind": "pball", "p": 4, "scale": 1.0},
    "square": {"kind": "polytope",
               "vertices": [[-1, -1], [1, -1], [1, 1], [-1, 1]]},
    "triangle": {"kind": "polytope", "vertices": [[-1, -1], [2, -0.5], [0, 1.5]]},
    "ball3": {"kind": "ball", "r": 1.0, "center": [0, 0, 0]},
}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--replicates", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    spec = QuadratureSpec(seed=args.seed)
    for name, body_spec in BODIES.items():
        K = body_from_spec(body_spec)
        sym = "-"
        if K.is_origin_symmetric():
            est = ef0_symmetric(K, spec)
            sym = f"{est.value:.4f}"
        gen = ef0_general(K, spec if K.dim == 2 else
                          QuadratureSpec(sphere_nodes=20_000,
                                         mc_inner_samples=60_000, seed=args.seed))
        cfg = ExperimentConfig(experiment="zerocell-mc", body=body_spec,
                               replicates=args.replicates, seed=args.seed)
        mc = run_experiment(cfg)
        mean, se = mc["mean"]["f0"], mc["SE"]["f0"]
        gap = abs(mean - gen.value)
        lim = 3 * math.hypot(se, gen.standard_error)
        verdict = "ok" if gap <= lim else "OFF"
        print(f"{name:14s} symmetric {sym:>8s}   general {gen.value:8.4f} "
              f"+- {gen.standard_error:.4f}   simulated {mean:8.4f} +- {se:.4f} "
              f"[{verdict}]")
    return 0


if __name__ == "__main__":
    sys.exit(main())
