"""Precision-matrix estimators behind a small pluggable spec.

BUILD consumes an estimate of Theta at the start and at every refresh
checkpoint. ``EstimatorSpec`` names the estimator; new estimators (a
GreedyPrune port, graphical lasso, ...) can be registered in ``ESTIMATORS``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .dag import WeightedDag
from .exceptions import (
    EmptySelectionError,
    InvalidParameterError,
    SingularCovarianceError,
    TooFewSamplesError,
)
from .sem import DataMatrix, NoiseModel, PrecisionMatrix, as_noise, ensemble_precision

ORACLE = "oracle"
SAMPLE_INVERSE = "sample_inverse"
RIDGE = "ridge"

# accepted spellings, mapped to canonical names
_KIND_ALIASES = {
    "oracle": ORACLE,
    "sample_inverse": SAMPLE_INVERSE,
    "sampleinverse": SAMPLE_INVERSE,
    "ridge": RIDGE,
    "ridge_inverse": RIDGE,
    "ridgeinverse": RIDGE,
}


@dataclass(frozen=True)
class EstimatorSpec:
    """Which estimator to use and its parameters.

    ``ridge_lambda=None`` selects the scale-aware default
    ``1e-3 * trace(S) / n`` for the ridge estimator. ``oracle_source`` is a
    ``(dag, noise)`` pair and is required for the oracle.
    """

    kind: str = SAMPLE_INVERSE
    ridge_lambda: Optional[float] = None
    oracle_source: Optional[tuple] = None
    center: bool = False

    def __post_init__(self):
        kind = _KIND_ALIASES.get(str(self.kind).lower())
        if kind is None and self.kind not in ESTIMATORS:
            raise InvalidParameterError(f"unknown estimator kind {self.kind!r}")
        object.__setattr__(self, "kind", kind or self.kind)
        if self.ridge_lambda is not None and not self.ridge_lambda >= 0:
            raise InvalidParameterError("ridge_lambda must be non-negative")
        if self.kind == ORACLE:
            if self.oracle_source is None:
                raise InvalidParameterError("oracle estimator requires oracle_source=(dag, noise)")
            dag, noise = self.oracle_source
            if not isinstance(dag, WeightedDag):
                raise InvalidParameterError("oracle_source[0] must be a WeightedDag")
            object.__setattr__(self, "oracle_source", (dag, as_noise(noise)))


def sample_covariance(x: DataMatrix, center: bool = False) -> np.ndarray:
    """``X X^T / m``; the SEM is zero mean so no centering unless asked."""
    if x.m < 2:
        raise TooFewSamplesError(f"need at least 2 samples, got {x.m}")
    v = x.values
    if center:
        v = v - v.mean(axis=1, keepdims=True)
    cov = (v @ v.T) / x.m
    return 0.5 * (cov + cov.T)


def restrict(x: DataMatrix, nodes) -> DataMatrix:
    """Rows ``nodes`` of ``x`` (positions within ``x``), in the given order."""
    idx = np.asarray(list(nodes), dtype=np.int64)
    if idx.size == 0:
        raise EmptySelectionError("cannot restrict to an empty node list")
    if idx.min() < 0 or idx.max() >= x.n:
        raise IndexError(f"node index out of range for {x.n} variables")
    if np.unique(idx).size != idx.size:
        raise InvalidParameterError("node list has duplicates")
    return DataMatrix(x.values[idx], nodes=x.nodes[idx])


def _spd_inverse(cov: np.ndarray) -> np.ndarray:
    try:
        factor = cho_factor(cov, lower=True)
    except LinAlgError as exc:
        raise SingularCovarianceError(str(exc)) from None
    if np.min(np.abs(np.diag(factor[0]))) <= np.finfo(float).eps * np.sqrt(np.max(np.diag(cov))):
        raise SingularCovarianceError("covariance is numerically singular")
    return cho_solve(factor, np.eye(cov.shape[0]))


def _oracle(x: DataMatrix, spec: EstimatorSpec) -> np.ndarray:
    dag, noise = spec.oracle_source
    # precision of the induced sub-DAG; equals the marginal precision only
    # when the dropped nodes are descendant closed (BUILD guarantees this)
    return ensemble_precision(dag.subgraph(x.nodes), noise).values


def _sample_inverse(x: DataMatrix, spec: EstimatorSpec) -> np.ndarray:
    if x.m < x.n:
        raise TooFewSamplesError(f"sample inverse needs m >= n, got m={x.m}, n={x.n}")
    return _spd_inverse(sample_covariance(x, center=spec.center))


def _ridge(x: DataMatrix, spec: EstimatorSpec) -> np.ndarray:
    cov = sample_covariance(x, center=spec.center)
    lam = spec.ridge_lambda
    if lam is None:
        lam = 1e-3 * np.trace(cov) / x.n
    if lam == 0 and x.m < x.n:
        raise TooFewSamplesError("ridge_lambda must be positive when m < n")
    return _spd_inverse(cov + lam * np.eye(x.n))


ESTIMATORS: dict[str, Callable[[DataMatrix, EstimatorSpec], np.ndarray]] = {
    ORACLE: _oracle,
    SAMPLE_INVERSE: _sample_inverse,
    RIDGE: _ridge,
}


def estimate_precision(x: DataMatrix, spec: EstimatorSpec) -> PrecisionMatrix:
    """Estimate Theta over the variables of ``x`` (local indexing, all active).

    The result is exactly symmetric. Use ``x.nodes`` to map rows back to
    global node ids.
    """
    theta = ESTIMATORS[spec.kind](x, spec)
    return PrecisionMatrix(0.5 * (theta + theta.T))
