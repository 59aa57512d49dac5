"""File formats: tab-separated edge lists and dense matrix dumps."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .dag import WeightedDag
from .exceptions import InvalidParameterError


def write_edge_list(dag: WeightedDag, path) -> None:
    """One ``child<TAB>parent<TAB>weight`` line per edge, weights at 17 significant digits.

    A ``# n=<count>`` comment records the node count so isolated nodes survive
    a round trip.
    """
    lines = ["# child\tparent\tweight", f"# n={dag.n}"]
    lines += [f"{i}\t{j}\t{w:.17g}" for i, j, w in dag.edges()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_edge_list(path, n=None) -> WeightedDag:
    """Parse an edge list; ``n`` defaults to the ``# n=`` header or the largest id + 1."""
    edges = []
    header_n = None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            tag = line[1:].strip()
            if tag.startswith("n="):
                header_n = int(tag[2:])
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise InvalidParameterError(f"{path}:{lineno}: expected 3 tab-separated fields")
        edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
    if n is None:
        n = header_n
    if n is None:
        n = 1 + max((max(i, j) for i, j, _ in edges), default=0)
    w = np.zeros((n, n))
    for i, j, val in edges:
        if not (0 <= i < n and 0 <= j < n):
            raise InvalidParameterError(f"edge ({i}, {j}) out of range for n={n}")
        w[i, j] = val
    return WeightedDag(w)


def write_matrix(path, values) -> None:
    """``.npy`` writes numpy binary; anything else writes CSV (one matrix row per line)."""
    path = Path(path)
    values = np.asarray(values, dtype=float)
    if path.suffix == ".npy":
        np.save(path, values)
    else:
        np.savetxt(path, np.atleast_2d(values), delimiter=",", fmt="%.17g")


def read_matrix(path) -> np.ndarray:
    path = Path(path)
    if path.suffix == ".npy":
        return np.load(path)
    return np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=float))
