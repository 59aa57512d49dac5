"""
Running a benchmark from a config file
======================================

Loads ``04_benchmark.toml``, runs it (optionally shrunk from the command
line) and writes ``trials.csv``, ``summary.csv`` and the resolved config.

    python demos/04_run_benchmark.py --trials 2 --out results/demo
"""
import argparse
from pathlib import Path

from buildag.bench import aggregate, load_experiment, run_experiment, write_outputs

parser = argparse.ArgumentParser()
parser.add_argument("--trials", type=int, default=None)
parser.add_argument("--out", default="results/er200")
args = parser.parse_args()

spec = load_experiment(Path(__file__).with_name("04_benchmark.toml"), {"trials": args.trials})
records = run_experiment(spec)
write_outputs(spec, records, args.out)

for row in aggregate(records):
    print(f"{row['method']:<12} m={row['m']:<5} SHD {row['shd_mean']:7.1f} ± {row['shd_std']:5.1f}  "
          f"FDR {row['fdr_mean']:.3f}  TPR {row['tpr_mean']:.3f}  time {row['runtime_s_mean']:.2f}s")
