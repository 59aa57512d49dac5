"""BUILD: bottom-up inference of linear DAGs from a precision matrix.

Each iteration picks the live node with the smallest diagonal entry of Theta
(a leaf has ``Theta_ii = 1/sigma2``), reads its parent weights off row ``i``
as ``-sigma2 * Theta_i,:``, and removes it with the rank-one Schur update

    Theta_RR <- Theta_RR - Theta_Ri Theta_iR / Theta_ii = Theta_RR - a a^T / sigma2.

At scheduled checkpoints the live block of Theta is re-estimated from the
data restricted to the surviving variables, which discards accumulated error.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dag import WeightedDag, is_topological_order
from .estimation import ORACLE, EstimatorSpec, estimate_precision, restrict
from .exceptions import BuildDagError, ConfigError
from .sem import DataMatrix, PrecisionMatrix

logger = logging.getLogger(__name__)

TIE_RTOL = 1e-12


@dataclass(frozen=True)
class BuildConfig:
    """Parameters of a BUILD run.

    ``eps_leaf`` is the diagonal floor below which a node is treated as
    pruned residue (default ``0.5 / sigma2``); ``eps_edge`` is the magnitude
    below which a recovered weight is dropped.
    """

    sigma2: float = 1.0
    eps_leaf: Optional[float] = None
    eps_edge: float = 0.25
    rho: float = 0.0
    estimator: EstimatorSpec = field(default_factory=EstimatorSpec)
    max_parent_check: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.sigma2) and self.sigma2 > 0):
            raise ConfigError("sigma2 must be positive")
        if self.eps_leaf is None:
            object.__setattr__(self, "eps_leaf", 0.5 / self.sigma2)
        if not (0 < self.eps_leaf < 1.0 / self.sigma2):
            raise ConfigError("eps_leaf must lie in (0, 1/sigma2), otherwise true leaves are skipped")
        if not self.eps_edge > 0:
            raise ConfigError("eps_edge must be positive")
        if not (0.0 <= self.rho <= 1.0):
            raise ConfigError("rho must lie in [0, 1]")
        if not isinstance(self.estimator, EstimatorSpec):
            raise ConfigError("estimator must be an EstimatorSpec")


@dataclass
class StepDiagnostic:
    node: int
    diag: float
    n_parents: int
    runner_up: Optional[float] = None
    suspect: bool = False


@dataclass
class BuildState:
    theta: np.ndarray
    sigma2: float
    pruned: list = field(default_factory=list)
    pruned_mask: np.ndarray = None
    adjacency: np.ndarray = None
    checkpoints: frozenset = frozenset()
    refresh_count: int = 0

    def __post_init__(self):
        n = self.theta.shape[0]
        if self.pruned_mask is None:
            self.pruned_mask = np.zeros(n, dtype=bool)
        if self.adjacency is None:
            self.adjacency = np.zeros((n, n))

    @property
    def n(self) -> int:
        return self.theta.shape[0]

    @property
    def tau(self) -> int:
        return len(self.pruned)

    @property
    def remaining(self) -> np.ndarray:
        return np.flatnonzero(~self.pruned_mask)


@dataclass
class BuildResult:
    a_hat: np.ndarray
    elimination_order: list
    refresh_count: int
    incomplete: bool
    steps: list = field(default_factory=list)

    def to_dag(self) -> WeightedDag:
        return WeightedDag(self.a_hat)


class BuildFailedError(BuildDagError):
    """A run aborted (e.g. the estimator failed at a refresh); ``partial`` keeps what was recovered."""

    def __init__(self, message, partial: BuildResult):
        super().__init__(message)
        self.partial = partial


def refresh_checkpoints(n: int, rho: float) -> frozenset:
    """Values of the pruned-node counter at which Theta is re-estimated.

    ``{floor(t * rho * n) : t = 1..n-1}`` clipped to ``[1, n-1]``. So
    ``rho = 1/n`` refreshes after every node and ``rho = 0`` never refreshes.
    """
    if n < 1:
        raise ConfigError("n must be positive")
    if not (0.0 <= rho <= 1.0):
        raise ConfigError("rho must lie in [0, 1]")
    # the epsilon keeps e.g. 29 * 0.02 * 200 = 115.99999999999999 on 116
    points = {math.floor(t * rho * n + 1e-9) for t in range(1, n)}
    return frozenset(p for p in points if 1 <= p <= n - 1)


def find_leaf(state: BuildState, eps_leaf: float) -> Optional[int]:
    """Live node with the smallest diagonal that is still ``>= eps_leaf``; lowest index on ties."""
    diag = np.diagonal(state.theta)
    candidates = ~state.pruned_mask & (diag >= eps_leaf)
    if not candidates.any():
        return None
    masked = np.where(candidates, diag, np.inf)
    lowest = masked.min()
    # diagonals equal up to rounding count as tied, so the lowest index wins
    tied = masked <= lowest + TIE_RTOL * abs(lowest)
    return int(np.argmax(tied))


def recover_row(state: BuildState, i: int, sigma2: float, eps_edge: float) -> np.ndarray:
    """Parent weights of leaf ``i``: ``-sigma2 * Theta_i,:`` with small entries zeroed."""
    a = -sigma2 * state.theta[i]
    a[i] = 0.0
    a[np.abs(a) < eps_edge] = 0.0
    a[state.pruned_mask] = 0.0
    return a


def prune_leaf(state: BuildState, i: int, a: np.ndarray, sigma2: float) -> BuildState:
    """Remove leaf ``i`` from Theta in place and record its adjacency row.

    Only rows and columns of recovered parents change; the update is
    ``Theta[P, P] -= a_P a_P^T / sigma2`` which is exactly symmetric.
    """
    par = np.flatnonzero(a)
    if par.size:
        a_p = a[par]
        state.theta[np.ix_(par, par)] -= np.outer(a_p, a_p) / sigma2
    state.theta[i, :] = 0.0
    state.theta[:, i] = 0.0
    state.adjacency[i] = a
    state.pruned.append(int(i))
    state.pruned_mask[i] = True
    return state


def maybe_refresh(state: BuildState, x: Optional[DataMatrix], spec: EstimatorSpec) -> BuildState:
    """Re-estimate the live block of Theta if the counter hits a checkpoint.

    ``x`` must hold one row per global node (row ``k`` is node ``k``).
    """
    if state.tau not in state.checkpoints:
        return state
    live = state.remaining
    est = estimate_precision(restrict(x, live), spec)
    state.theta[np.ix_(live, live)] = est.values
    state.refresh_count += 1
    logger.debug("refreshed Theta over %d live nodes at tau=%d", live.size, state.tau)
    return state


def _snapshot(state: BuildState, incomplete: bool, steps) -> BuildResult:
    return BuildResult(
        a_hat=state.adjacency.copy(),
        elimination_order=list(state.pruned),
        refresh_count=state.refresh_count,
        incomplete=incomplete,
        steps=list(steps),
    )


def run_build(x: Optional[DataMatrix] = None, config: Optional[BuildConfig] = None,
              theta0=None) -> BuildResult:
    """Recover a weighted DAG from data and/or an initial precision matrix.

    Parameters
    ----------
    x : DataMatrix, optional
        Observations (``n x m``). Used for the initial estimate when
        ``theta0`` is absent, and for every refresh.
    config : BuildConfig
    theta0 : PrecisionMatrix or array, optional
        Initial precision matrix. Without ``x`` refreshing is only possible
        with the oracle estimator, otherwise ``rho`` must be 0.

    Raises
    ------
    ConfigError
        Inconsistent inputs.
    BuildFailedError
        The estimator failed mid-run; the partial result is attached.
    """
    config = config or BuildConfig()
    if x is None and theta0 is None:
        raise ConfigError("need data, an initial precision matrix, or both")
    if x is None and config.rho > 0 and config.estimator.kind != ORACLE:
        raise ConfigError("refreshing (rho > 0) needs data unless the estimator is the oracle")

    if theta0 is None:
        theta = estimate_precision(x, config.estimator).values.copy()
    else:
        theta = np.array(theta0.values if isinstance(theta0, PrecisionMatrix) else theta0,
                         dtype=float, copy=True)
    n = theta.shape[0]
    if x is None:
        # the oracle only needs the node map
        x = DataMatrix(np.zeros((n, 0)))
    if x.n != n:
        raise ConfigError(f"data has {x.n} variables but Theta is {n} x {n}")

    sigma2 = config.sigma2
    state = BuildState(theta=theta, sigma2=sigma2, checkpoints=refresh_checkpoints(n, config.rho))
    steps = []
    incomplete = False
    while state.tau < n:
        try:
            maybe_refresh(state, x, config.estimator)
        except BuildDagError as exc:
            raise BuildFailedError(f"refresh failed at tau={state.tau}: {exc}",
                                   _snapshot(state, True, steps)) from exc
        i = find_leaf(state, config.eps_leaf)
        if i is None:
            incomplete = True
            break
        diag = float(state.theta[i, i])
        a = recover_row(state, i, sigma2, config.eps_edge)
        step = StepDiagnostic(node=i, diag=diag, n_parents=int(np.count_nonzero(a)))
        if config.max_parent_check:
            _check_leaf(state, i, step, sigma2, config.eps_leaf)
        prune_leaf(state, i, a, sigma2)
        steps.append(step)

    result = _snapshot(state, incomplete, steps)
    if not incomplete and not is_topological_order(WeightedDag(result.a_hat), result.elimination_order[::-1]):
        raise AssertionError("recovered support is not consistent with the elimination order")
    return result


def _check_leaf(state: BuildState, i: int, step: StepDiagnostic, sigma2: float, eps_leaf: float) -> None:
    # a clean leaf call has its diagonal closer to 1/sigma2 than to the runner-up
    diag = np.diagonal(state.theta)
    others = ~state.pruned_mask & (diag >= eps_leaf)
    others[i] = False
    if others.any():
        step.runner_up = float(diag[others].min())
        step.suspect = abs(step.diag - 1.0 / sigma2) > step.runner_up - step.diag
        if step.suspect:
            logger.warning("leaf call for node %d is ambiguous: diag %.4g, runner-up %.4g",
                           i, step.diag, step.runner_up)
