"""Small versions of the synthetic experiments, printed as tables.

Run with a larger --trials for smoother curves; the CLI (`mixdag exp ...`) writes the
same tables to CSV.
"""

import argparse

from mixdag.experiments import ExperimentConfig, run_cluster_experiment, run_shd_experiment, run_synthetic_trials, run_varying_experiment

parser = argparse.ArgumentParser()
parser.add_argument("--trials", type=int, default=5)
args = parser.parse_args()

cfg = ExperimentConfig(k=4, n_nodes=10, n_samples=5000, n_trials=args.trials)
rows = run_synthetic_trials(cfg)

print("FCI on mixture data vs FCI on union-MAG data")
for r in run_shd_experiment(cfg, rows).records:
    print(f"  alpha={r['alpha']:<6} normalized SHD {r['normalized_shd']:.3f}")

print("varying-node detection")
for r in run_varying_experiment(cfg, rows).records:
    print(f"  alpha={r['alpha']:<6} tpr {r['tpr']:.2f}  fpr {r['fpr']:.2f}  adjacency tpr {r['adjacency_tpr']:.2f}")

# clustering: k-means on the estimated varying columns versus all columns
for setting in ("no-descendants", "descendants"):
    c = ExperimentConfig(kind="cluster", k=2, n_samples=2000, n_trials=args.trials, setting=setting, k_tilde=(2, 3, 4))
    print(f"clustering, {setting}")
    for r in run_cluster_experiment(c).records:
        print(f"  K~={r['k_tilde']}  v-measure varying {r['v_measure_varying']:.3f}  all {r['v_measure_all']:.3f}")
