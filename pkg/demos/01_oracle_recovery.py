"""
Exact DAG recovery from the population precision matrix
=========================================================

With the true precision matrix in hand, BUILD peels leaves off one at a
time and returns the weighted adjacency matrix up to rounding.
"""
import numpy as np

from buildag import BuildConfig, ensemble_precision, leaves, resolution_gap, run_build, sample_er_dag
from buildag.metrics import evaluate

# A 50-node Erdős–Rényi DAG, expected degree 4, weights in ±(0.5, 2)
dag = sample_er_dag(50, 4, 0.5, 2.0, seed=0)
sigma2 = 1.0
theta = ensemble_precision(dag, sigma2)
print(f"{dag.n} nodes, {dag.n_edges} edges")

# Leaves sit exactly at 1/sigma2 on the diagonal; everything else is at
# least one resolution gap above.
diag = np.diagonal(theta.values)
gap = resolution_gap(dag, sigma2)
is_leaf = np.zeros(dag.n, dtype=bool)
is_leaf[list(leaves(dag))] = True
print(f"leaf diagonals:     {diag[is_leaf].min():.6f} .. {diag[is_leaf].max():.6f}")
print(f"non-leaf diagonals: {diag[~is_leaf].min():.6f} .. (gap bound {1 / sigma2 + gap:.6f})")

# Run the bottom-up recursion on the exact matrix
result = run_build(None, BuildConfig(sigma2=sigma2), theta0=theta)
report = evaluate(result.a_hat, dag.weights)
print(f"SHD={report.shd}  FDR={report.fdr}  TPR={report.tpr}  NMSE={report.nmse:.2e}")
print("first five eliminated nodes:", result.elimination_order[:5])
