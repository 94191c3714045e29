#!/usr/bin/env python3
"""Run the desk-scale limit experiments and print the comparison table.

Reproduces the headline numbers: the planar disk K-hull facet limit, the
zero-cell vertex constants in d=2 and d=3, and the agreement between the
scaled intersection-body volumes and the zero-cell volumes. Artifacts
land under --out (default: ./limit_runs). Expect a few minutes single
threaded; set KHULL_THREADS to parallelize replicates.
"""
import argparse
import math
import sys
from pathlib import Path

from khull import load_config, run_experiment

CONFIGS = Path(__file__).parent / "configs"

TARGETS = {
    "disk_fvector": ("f1", math.pi ** 2 / 2),
    "disk_zerocell": ("f0", math.pi ** 2 / 2),
    "ball3_zerocell": ("f0", 4 * math.pi ** 2 / 3),
}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="limit_runs")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--quick", action="store_true",
                    help="1/10 the replicates, for a fast sanity pass")
    args = ap.parse_args()

    summaries = {}
    for name in ("disk_fvector", "disk_zerocell", "ball3_zerocell",
                 "disk_convergence"):
        cfg = load_config(CONFIGS / f"{name}.json", seed=args.seed,
                          out=str(Path(args.out) / name))
        if args.quick:
            cfg = type(cfg)(**{**cfg.__dict__,
                               "replicates": max(50, cfg.replicates // 10)})
        print(f"running {name} (R={cfg.replicates}) ...", flush=True)
        summaries[name] = run_experiment(cfg)

    print()
    for name, (col, target) in TARGETS.items():
        s = summaries[name]
        mean, se = s["mean"][col], s["SE"][col]
        verdict = "ok" if abs(mean - target) <= 3 * se else "OFF"
        print(f"{name:18s} mean {col} = {mean:8.4f} +- {se:.4f}   "
              f"target {target:.4f}   [{verdict}]  ({s['runtime']:.0f}s, "
              f"{s['excluded_replicates']} excluded)")

    conv = summaries["disk_convergence"]
    cell = summaries["disk_zerocell"]
    for j in (1, 2):
        a, sa = conv["mean"][f"V{j}"], conv["SE"][f"V{j}"]
        b, sb = cell["mean"][f"V{j}"], cell["SE"][f"V{j}"]
        gap = abs(a - b)
        lim = 3 * math.hypot(sa, sb)
        verdict = "ok" if gap <= lim else "OFF"
        print(f"V{j}: scaled hulls {a:8.4f} +- {sa:.4f} vs zero cells "
              f"{b:8.4f} +- {sb:.4f}   |diff| {gap:.4f} <= {lim:.4f} [{verdict}]")
    return 0


if __name__ == "__main__":
    sys.exit(main())
