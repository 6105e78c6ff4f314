"""Precompute the long acceptance-suite runs into runs/acceptance/.

The acceptance tests invoke run_experiment with these exact configs; a
completed directory makes that call a fast resume no-op, so running this
script first (or after any interruption) amortizes the Monte Carlo cost.
"""

import sys
import time

from polymerlab.runner import run_experiment

ACCEPTANCE_SEED = 20260816

CONFIGS = {
    "covariance": {
        "mu": 1.0, "master_seed": ACCEPTANCE_SEED, "replicas": 10000,
        "experiment": {"kind": "covariance",
                       "r_list": [8, 16, 32, 64, 128],
                       "n_list": [64, 128, 256, 512, 1024]},
    },
    "shape": {
        "mu": 1.0, "master_seed": ACCEPTANCE_SEED, "replicas": 200,
        "experiment": {"kind": "shape", "n_list": [128, 256, 512]},
    },
    "events": {
        "mu": 1.0, "master_seed": ACCEPTANCE_SEED, "replicas": 5000,
        "experiment": {"kind": "events", "r": 16, "n_list": [256, 512], "K_A": 2},
    },
    "nested": {
        "mu": 1.0, "master_seed": ACCEPTANCE_SEED, "replicas": 200,
        "experiment": {"kind": "nested_cov", "r": 16, "n": 64,
                       "outer": 200, "inner": 50},
    },
}


def main() -> int:
    base = sys.argv[1] if len(sys.argv) > 1 else "runs/acceptance"
    for name, config in CONFIGS.items():
        t0 = time.time()
        result = run_experiment(dict(config), out_dir=f"{base}/{name}", threads=1)
        print(f"{name}: computed {result.computed} new records in "
              f"{time.time() - t0:.1f}s -> {result.out_dir}", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
