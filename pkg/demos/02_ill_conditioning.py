"""
Why precision estimation is hard: conditioning of chain SEMs
============================================================

For a chain with edge weight k > 1 the condition number of Theta grows
geometrically, about k**2 per extra node.
"""
from buildag import chain_dag, condition_number, ensemble_precision

k = 1.5
previous = None
for n in range(4, 25, 2):
    cond = condition_number(ensemble_precision(chain_dag(n, k)))
    growth = "" if previous is None else f"   per-node growth {(cond / previous) ** 0.5:.3f}"
    print(f"n={n:2d}  cond={cond:12.4e}{growth}")
    previous = cond
print(f"reference k**2 = {k ** 2}")
