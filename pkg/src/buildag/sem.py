"""Population quantities and sampling for the equal-variance linear Gaussian SEM.

The model is ``x = A x + z`` with ``z ~ N(0, sigma2 * I)``, so

    Sigma = sigma2 (I - A)^-1 (I - A)^-T,     Theta = (I - A)^T (I - A) / sigma2.

Sampling uses a Philox4x64 bit generator keyed on ``(seed, 1)`` and numpy's
``standard_normal`` (ziggurat) transform, so data are reproducible bit for
bit on a given platform and numpy version.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.linalg import solve_triangular

from ._rng import make_rng
from .dag import WeightedDag, _check_index, topological_order, validate
from .exceptions import InvalidParameterError, NoEdgesError, NotPositiveDefiniteError

SYMMETRY_RTOL = 1e-12


@dataclass(frozen=True)
class NoiseModel:
    sigma2: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.sigma2) and self.sigma2 > 0):
            raise InvalidParameterError("sigma2 must be positive and finite")


def as_noise(noise: Union[NoiseModel, float]) -> NoiseModel:
    return noise if isinstance(noise, NoiseModel) else NoiseModel(float(noise))


@dataclass(eq=False)
class PrecisionMatrix:
    """Symmetric precision matrix over a fixed index set with a live-node mask.

    Rows and columns of inactive nodes are held at exactly zero.
    """

    values: np.ndarray
    active: Optional[np.ndarray] = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise InvalidParameterError("precision matrix must be square")
        scale = max(np.abs(v).max(initial=0.0), 1.0)
        if np.abs(v - v.T).max(initial=0.0) > SYMMETRY_RTOL * scale:
            raise InvalidParameterError("precision matrix is not symmetric")
        if self.active is None:
            active = np.ones(v.shape[0], dtype=bool)
        else:
            active = np.array(self.active, dtype=bool, copy=True)
            if active.shape != (v.shape[0],):
                raise InvalidParameterError("active mask has the wrong length")
        v[~active, :] = 0.0
        v[:, ~active] = 0.0
        self.values = v
        self.active = active

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def active_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.active)

    def block(self) -> np.ndarray:
        """Dense submatrix over the active nodes."""
        idx = self.active_nodes
        return self.values[np.ix_(idx, idx)]


@dataclass(eq=False)
class DataMatrix:
    """``n x m`` observations, one row per variable.

    ``nodes`` maps each row to its global node id; ``restrict`` keeps it in
    sync so estimates on a subset can be scattered back.
    """

    values: np.ndarray
    nodes: Optional[np.ndarray] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise InvalidParameterError("data matrix must be 2-D (variables x samples)")
        if not np.all(np.isfinite(v)):
            raise InvalidParameterError("data matrix has non-finite entries")
        self.values = v
        if self.nodes is None:
            self.nodes = np.arange(v.shape[0])
        else:
            self.nodes = np.asarray(self.nodes, dtype=np.int64)
            if self.nodes.shape != (v.shape[0],):
                raise InvalidParameterError("node map length must equal the number of rows")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]


def _unit_lower_factor(dag: WeightedDag):
    order = np.asarray(topological_order(dag))
    lower = np.eye(dag.n) - dag.weights[np.ix_(order, order)]
    return order, lower


def ensemble_covariance(dag: WeightedDag, noise=1.0) -> np.ndarray:
    """Population covariance ``sigma2 (I-A)^-1 (I-A)^-T``.

    Computed with two unit-triangular solves in topological order.
    """
    noise = as_noise(noise)
    order, lower = _unit_lower_factor(dag)
    inv_lower = solve_triangular(lower, np.eye(dag.n), lower=True, unit_diagonal=True)
    cov_p = noise.sigma2 * solve_triangular(lower, inv_lower.T, lower=True, unit_diagonal=True)
    cov_p = 0.5 * (cov_p + cov_p.T)
    cov = np.empty_like(cov_p)
    cov[np.ix_(order, order)] = cov_p
    return cov


def ensemble_precision(dag: WeightedDag, noise=1.0) -> PrecisionMatrix:
    """Population precision ``(I - A)^T (I - A) / sigma2``, all nodes active."""
    noise = as_noise(noise)
    validate(dag)
    resid = np.eye(dag.n) - dag.weights
    theta = (resid.T @ resid) / noise.sigma2
    return PrecisionMatrix(0.5 * (theta + theta.T))


def theta_entry(dag: WeightedDag, noise, i: int, j: int) -> float:
    """Single precision entry from the children-based closed form.

    Diagonal: ``(1 + sum_{k in CH_i} A_ki^2) / sigma2``.
    Off-diagonal: ``(-A_ij - A_ji + sum_{k in CH_i & CH_j} A_ki A_kj) / sigma2``;
    at most one of ``A_ij``, ``A_ji`` is nonzero in a DAG.
    """
    noise = as_noise(noise)
    _check_index(dag, i)
    _check_index(dag, j)
    w = dag.weights
    ch_i = np.flatnonzero(w[:, i])
    if i == j:
        return float((1.0 + sum(w[k, i] ** 2 for k in ch_i)) / noise.sigma2)
    if i < j:
        i, j = j, i
    common = np.intersect1d(ch_i, np.flatnonzero(w[:, j]))
    val = -w[i, j] - w[j, i] + sum(w[k, i] * w[k, j] for k in common)
    return float(val / noise.sigma2)


def resolution_gap(dag: WeightedDag, noise=1.0) -> float:
    """Smallest squared edge weight divided by ``sigma2``.

    Lower bound on how far any non-leaf diagonal of Theta sits above ``1/sigma2``.
    """
    noise = as_noise(noise)
    nz = dag.weights[dag.weights != 0]
    if nz.size == 0:
        raise NoEdgesError("resolution gap is undefined for a graph without edges")
    return float(np.min(nz ** 2) / noise.sigma2)


def sample_data(dag: WeightedDag, noise, m: int, seed: int) -> DataMatrix:
    """Draw ``m`` i.i.d. samples by forward substitution ``X = (I - A)^-1 Z``."""
    noise = as_noise(noise)
    if m < 1:
        raise InvalidParameterError("m must be at least 1")
    rng = make_rng(seed, stream=1)
    z = np.sqrt(noise.sigma2) * rng.standard_normal((dag.n, m))
    order, lower = _unit_lower_factor(dag)
    x = np.empty_like(z)
    x[order] = solve_triangular(lower, z[order], lower=True, unit_diagonal=True)
    return DataMatrix(x)


def condition_number(theta) -> float:
    """Ratio of extreme eigenvalues of the active block."""
    block = theta.block() if isinstance(theta, PrecisionMatrix) else np.asarray(theta, dtype=float)
    if block.size == 0:
        raise NotPositiveDefiniteError("no active nodes")
    eig = np.linalg.eigvalsh(block)
    if eig[0] <= 0:
        raise NotPositiveDefiniteError(f"smallest eigenvalue {eig[0]:.3e} is not positive")
    return float(eig[-1] / eig[0])
