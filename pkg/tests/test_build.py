import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from buildag.build import (
    BuildConfig,
    BuildFailedError,
    BuildState,
    find_leaf,
    maybe_refresh,
    prune_leaf,
    recover_row,
    refresh_checkpoints,
    run_build,
)
from buildag.dag import WeightedDag, is_topological_order, leaves, sample_er_dag
from buildag.estimation import EstimatorSpec
from buildag.exceptions import ConfigError
from buildag.metrics import nmse, shd
from buildag.sem import DataMatrix, PrecisionMatrix, ensemble_covariance, ensemble_precision, sample_data

from conftest import random_lower_dag


def _state(theta, sigma2=1.0, rho=0.0):
    theta = np.array(theta.values if isinstance(theta, PrecisionMatrix) else theta, dtype=float)
    return BuildState(theta=theta, sigma2=sigma2, checkpoints=refresh_checkpoints(theta.shape[0], rho))


def _oracle(dag, sigma2=1.0):
    return EstimatorSpec("oracle", oracle_source=(dag, sigma2))


def test_refresh_checkpoints_examples():
    assert refresh_checkpoints(200, 0.005) == frozenset(range(1, 200))
    assert refresh_checkpoints(200, 0.02) == frozenset(range(4, 200, 4))
    assert refresh_checkpoints(10, 0.0) == frozenset()
    assert refresh_checkpoints(10, 1.0) == frozenset()
    assert refresh_checkpoints(1, 0.5) == frozenset()
    assert refresh_checkpoints(200, 0.1) == frozenset(range(20, 200, 20))


@settings(max_examples=100, deadline=None)
@given(n=st.integers(1, 400), rho=st.floats(0, 1))
def test_refresh_checkpoints_bounds(n, rho):
    pts = refresh_checkpoints(n, rho)
    assert all(1 <= p <= n - 1 for p in pts)


def test_find_leaf_examples(d1):
    assert find_leaf(_state(ensemble_precision(d1)), 0.5) == 2
    assert find_leaf(_state(np.eye(4)), 0.5) == 0
    assert find_leaf(_state(0.1 * np.eye(3)), 0.5) is None


def test_find_leaf_skips_pruned():
    st_ = _state(np.diag([1.0, 2.0, 1.5]))
    st_.pruned_mask[0] = True
    assert find_leaf(st_, 0.5) == 2


def test_recover_row_examples(d1):
    a = recover_row(_state(ensemble_precision(d1)), 2, 1.0, 0.25)
    np.testing.assert_allclose(a, [0.8, -1.5, 0.0], atol=1e-15)
    assert not np.any(recover_row(_state(np.eye(3)), 1, 1.0, 0.25))
    theta = np.eye(3)
    theta[0, 2] = theta[2, 0] = -0.1
    theta[1, 2] = theta[2, 1] = -0.5
    np.testing.assert_array_equal(recover_row(_state(theta), 2, 1.0, 0.25), [0.0, 0.5, 0.0])


def test_recover_row_scales_with_sigma2(d1):
    a = recover_row(_state(ensemble_precision(d1, 2.0), sigma2=2.0), 2, 2.0, 0.25)
    np.testing.assert_allclose(a, [0.8, -1.5, 0.0], atol=1e-15)


def test_prune_leaf_example(d1):
    st_ = _state(ensemble_precision(d1))
    a = recover_row(st_, 2, 1.0, 0.25)
    prune_leaf(st_, 2, a, 1.0)
    np.testing.assert_allclose(st_.theta[:2, :2], np.eye(2), atol=1e-15)
    assert not st_.theta[2].any() and not st_.theta[:, 2].any()
    assert st_.pruned == [2] and st_.tau == 1
    np.testing.assert_array_equal(st_.adjacency[2], a)


def test_prune_orphan_leaf():
    theta = ensemble_precision(sample_er_dag(6, 2, 0.5, 2.0, seed=0)).values
    st_ = _state(theta)
    prune_leaf(st_, 3, np.zeros(6), 1.0)
    expected = theta.copy()
    expected[3, :] = expected[:, 3] = 0.0
    np.testing.assert_array_equal(st_.theta, expected)


def test_prune_keeps_symmetry():
    dag = sample_er_dag(30, 4, 0.5, 2.0, seed=4)
    st_ = _state(ensemble_precision(dag))
    for _ in range(10):
        i = find_leaf(st_, 0.5)
        prune_leaf(st_, i, recover_row(st_, i, 1.0, 0.25), 1.0)
        assert np.array_equal(st_.theta, st_.theta.T)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 10), seed=st.integers(0, 2**32 - 1), sigma2=st.sampled_from([0.5, 1.0, 2.0]))
def test_schur_consistency(n, seed, sigma2):
    dag = random_lower_dag(np.random.default_rng(seed), n, p=0.5)
    cov = ensemble_covariance(dag, sigma2)
    for leaf in leaves(dag):
        st_ = _state(ensemble_precision(dag, sigma2), sigma2)
        prune_leaf(st_, leaf, recover_row(st_, leaf, sigma2, 1e-9), sigma2)
        rest = [k for k in range(n) if k != leaf]
        block = st_.theta[np.ix_(rest, rest)]
        deleted = ensemble_precision(dag.remove_node(leaf), sigma2).values[np.ix_(rest, rest)]
        np.testing.assert_allclose(block, deleted, atol=1e-10, rtol=0)
        brute = np.linalg.inv(cov[np.ix_(rest, rest)])
        np.testing.assert_allclose(block, brute, atol=1e-8 * max(1.0, np.abs(brute).max()), rtol=0)


def test_maybe_refresh_noop_and_rho_zero(d1):
    st_ = _state(ensemble_precision(d1), rho=0.0)
    before = st_.theta.copy()
    maybe_refresh(st_, None, EstimatorSpec())
    assert np.array_equal(st_.theta, before) and st_.refresh_count == 0


def test_maybe_refresh_replaces_live_block():
    dag = sample_er_dag(8, 2, 0.5, 1.0, seed=1)
    x = sample_data(dag, 1.0, 2000, seed=1)
    st_ = _state(ensemble_precision(dag), rho=1 / 8)
    i = find_leaf(st_, 0.5)
    prune_leaf(st_, i, recover_row(st_, i, 1.0, 0.25), 1.0)
    maybe_refresh(st_, x, EstimatorSpec())
    assert st_.refresh_count == 1
    live = [k for k in range(8) if k != i]
    x_live = x.values[live]
    expected = np.linalg.inv(x_live @ x_live.T / x.m)
    np.testing.assert_allclose(st_.theta[np.ix_(live, live)], expected, rtol=1e-10)
    assert not st_.theta[i].any()


def test_run_build_d1(d1):
    res = run_build(None, BuildConfig(sigma2=1.0, eps_edge=0.25), theta0=ensemble_precision(d1))
    np.testing.assert_allclose(res.a_hat, d1.weights, atol=1e-15)
    assert res.elimination_order == [2, 0, 1]
    assert not res.incomplete and res.refresh_count == 0
    assert [s.n_parents for s in res.steps] == [2, 0, 0]


def test_run_build_empty():
    res = run_build(None, BuildConfig(), theta0=np.eye(5))
    assert not res.a_hat.any()
    assert res.elimination_order == [0, 1, 2, 3, 4]


@pytest.mark.parametrize("seed", range(5))
def test_run_build_exact_er50(seed):
    dag = sample_er_dag(50, 4, 0.5, 2.0, seed)
    res = run_build(None, BuildConfig(), theta0=ensemble_precision(dag))
    assert shd(res.a_hat, dag.weights) == 0
    assert np.abs(res.a_hat - dag.weights).max() <= 1e-6


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 25), seed=st.integers(0, 2**32 - 1), sigma2=st.sampled_from([0.5, 1.0, 2.0]))
def test_oracle_selects_true_leaves(n, seed, sigma2):
    dag = random_lower_dag(np.random.default_rng(seed), n, p=0.3)
    res = run_build(None, BuildConfig(sigma2=sigma2), theta0=ensemble_precision(dag, sigma2))
    residual = dag.weights.copy()
    for i in res.elimination_order:
        assert i in leaves(WeightedDag(residual)) - set(res.elimination_order[:res.elimination_order.index(i)])
        residual[i, :] = 0.0
        residual[:, i] = 0.0
    assert nmse(res.a_hat, dag.weights) <= 1e-10 if dag.n_edges else not res.a_hat.any()


def test_noisy_run_is_acyclic_and_monotone():
    dag = sample_er_dag(30, 4, 0.5, 2.0, seed=3)
    x = sample_data(dag, 1.0, 300, seed=3)
    res = run_build(x, BuildConfig(rho=0.1))
    assert len(set(res.elimination_order)) == len(res.elimination_order)
    if not res.incomplete:
        assert sorted(res.elimination_order) == list(range(30))
        assert is_topological_order(WeightedDag(res.a_hat), res.elimination_order[::-1])


def test_incomplete_flag_when_no_candidate():
    theta = np.diag([1.0, 0.1, 1.0])
    res = run_build(None, BuildConfig(), theta0=theta)
    assert res.incomplete
    assert res.elimination_order == [0, 2]


def test_refresh_count_every_node():
    dag = sample_er_dag(40, 2, 0.5, 2.0, seed=0)
    res = run_build(None, BuildConfig(rho=1 / 40, estimator=_oracle(dag)), theta0=ensemble_precision(dag))
    assert res.refresh_count == 39


@pytest.mark.parametrize("rho", [0.02, 0.1, 0.5])
def test_refresh_neutral_under_oracle(rho):
    dag = sample_er_dag(60, 4, 0.5, 2.0, seed=7)
    base = run_build(None, BuildConfig(), theta0=ensemble_precision(dag))
    res = run_build(None, BuildConfig(rho=rho, estimator=_oracle(dag)), theta0=ensemble_precision(dag))
    assert res.refresh_count > 0
    assert res.elimination_order == base.elimination_order
    assert np.array_equal(res.a_hat != 0, base.a_hat != 0)
    # same values up to rounding in the pruning recursion
    assert np.abs(res.a_hat - base.a_hat).max() <= 1e-12


def test_run_from_data_only():
    dag = sample_er_dag(10, 2, 0.5, 1.0, seed=5)
    x = sample_data(dag, 1.0, 20000, seed=5)
    res = run_build(x, BuildConfig())
    assert shd(res.a_hat, dag.weights) == 0


def test_refresh_failure_aborts_with_partial():
    dag = sample_er_dag(10, 2, 0.5, 1.0, seed=5)
    x = sample_data(dag, 1.0, 5, seed=5)  # too few samples to re-estimate
    with pytest.raises(BuildFailedError) as exc:
        run_build(x, BuildConfig(rho=0.1), theta0=ensemble_precision(dag))
    partial = exc.value.partial
    assert partial.incomplete and len(partial.elimination_order) == 1
    others = [k for k in range(10) if k not in partial.elimination_order]
    assert not partial.a_hat[others].any()


def test_config_errors():
    with pytest.raises(ConfigError):
        BuildConfig(sigma2=1.0, eps_leaf=1.0)
    with pytest.raises(ConfigError):
        BuildConfig(eps_edge=0.0)
    with pytest.raises(ConfigError):
        BuildConfig(rho=1.5)
    with pytest.raises(ConfigError):
        BuildConfig(sigma2=-1.0)
    assert BuildConfig(sigma2=2.0).eps_leaf == 0.25
    with pytest.raises(ConfigError):
        run_build(None, BuildConfig())
    with pytest.raises(ConfigError):
        run_build(None, BuildConfig(rho=0.5), theta0=np.eye(3))
    with pytest.raises(ConfigError):
        run_build(DataMatrix(np.zeros((2, 5))), BuildConfig(), theta0=np.eye(3))


def test_max_parent_check_flags_ambiguous_leaf(caplog):
    # two live nodes whose diagonals straddle 1/sigma2 ambiguously
    theta = np.diag([1.6, 1.7])
    with caplog.at_level(logging.WARNING, logger="buildag.build"):
        res = run_build(None, BuildConfig(max_parent_check=True), theta0=theta)
    assert res.steps[0].suspect and res.steps[0].runner_up == 1.7
    assert "ambiguous" in caplog.text
    clean = run_build(None, BuildConfig(max_parent_check=True), theta0=np.diag([1.0, 2.0]))
    assert not clean.steps[0].suspect
