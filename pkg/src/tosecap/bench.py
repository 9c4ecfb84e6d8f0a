"""Experiment harness: accuracy, runtime scaling and density convergence.

Timed regions
    ``cholesky_<form>``: factorization of the prebuilt ``I + A A*`` plus the
    log-diagonal sum.
    ``tose_core``: the spike arithmetic given ``tr(B)``.
    ``tose_with_trace``: ``tr(B)`` from ``(T, G)`` plus the spike arithmetic.
Scenario generation, fading draws and forming ``I + A A*`` are never timed.
"""

import math
import statistics
import time
import timeit
from dataclasses import replace

import numpy as np
from threadpoolctl import threadpool_limits

from tosecap._seeding import derive_rng
from tosecap.capacity_exact import (
    CapacityResult,
    Method,
    cholesky_logdet,
    exact_capacity_hadamard,
    exact_capacity_matrixprod,
    gram_matrix,
)
from tosecap.channel import (
    ClusterChannel,
    FadingParams,
    cluster_channel,
    interference_diag,
    large_scale_fading,
    pairwise_distances,
    sample_G,
)
from tosecap.config import RedrawMode, ScenarioConfig
from tosecap.errors import DegenerateSpectrumError, InvalidParameterError
from tosecap.geometry import build_scenario, place_uniform_square
from tosecap.reports import BenchmarkRecord
from tosecap.tose import build_T, spike_count, spike_estimate, tose_capacity, trace_B

_FADING_STREAM = 202
_REDRAW_STREAM = 303
_SCALING_STREAM = 404

BS_PER_CLUSTER = 100


def fading_seed(config: ScenarioConfig, *key):
    return np.random.SeedSequence(config.seed, spawn_key=(_FADING_STREAM,) + key)


def select_cluster(scenario, which="central"):
    """``'central'`` or an explicit cluster index."""
    if which in (None, "central"):
        return scenario.central_cluster()
    return scenario.cluster(int(which)).index


def _channel_draws(config, which):
    """``(channel, fading seed, trials)`` groups.

    Fading-only mode gives one group holding every trial; full redraw gives
    one single-trial group per experiment, each on a freshly drawn layout.
    """
    params = FadingParams.from_config(config)
    if config.redraw_mode is RedrawMode.FADING_ONLY:
        scenario = build_scenario(config)
        ch = cluster_channel(scenario, select_cluster(scenario, which), params)
        return [(ch, fading_seed(config), config.trials)]
    groups = []
    for i in range(config.trials):
        scenario = build_scenario(
            config, seed=np.random.SeedSequence(config.seed, spawn_key=(_REDRAW_STREAM, i)))
        ch = cluster_channel(scenario, select_cluster(scenario, which), params)
        groups.append((ch, fading_seed(config, i), 1))
    return groups


def _timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


def _tose_pooled(groups, spike_ratio):
    """TOSE over all groups; degenerate trials are collected across groups
    and reported with their global trial index."""
    values, failed, offset = [], [], 0
    for ch, fs, n in groups:
        try:
            values.append(tose_capacity(ch, spike_ratio, n, fs).values)
        except DegenerateSpectrumError as exc:
            failed.extend(offset + i for i in exc.trials)
        offset += n
    if failed:
        raise DegenerateSpectrumError(
            f"{len(failed)} of {offset} trials hit a degenerate spike spectrum "
            f"(trials {failed[:10]}{'...' if len(failed) > 10 else ''})", trials=failed)
    return CapacityResult.from_values(np.concatenate(values), Method.TOSE)


def _pooled(results, method):
    return CapacityResult.from_values(np.concatenate([r.values for r in results]), method)


def _dims(groups):
    j = int(round(np.mean([ch.J_m for ch, _, _ in groups])))
    k = int(round(np.mean([ch.K_m for ch, _, _ in groups])))
    return j, k


def _record(method, groups, result, elapsed, seed, rel_error=None):
    j, k = _dims(groups)
    return BenchmarkRecord(str(getattr(method, "value", method)), j, k, k / j, result.mean,
                           result.stddev, rel_error, max(elapsed, 1e-9), result.trials, seed)


def relative_gap(estimate, reference):
    return abs(estimate - reference) / abs(reference)


def run_accuracy(config: ScenarioConfig, cluster="central", form="full"):
    """Exact matrix-product capacity vs TOSE on the same channel and fading
    streams. The TOSE record carries the relative error."""
    config.validate()
    groups = _channel_draws(config, cluster)
    exact, t_exact = _timed(lambda: _pooled(
        [exact_capacity_matrixprod(build_T(ch.Q), ch.J_m, ch.K_m, n, fs, form)
         for ch, fs, n in groups], Method.EXACT_MATRIXPROD))
    est, t_est = _timed(lambda: _tose_pooled(groups, config.spike_ratio))
    return [
        _record(Method.EXACT_MATRIXPROD, groups, exact, t_exact, config.seed),
        _record(Method.TOSE, groups, est, t_est, config.seed, relative_gap(est.mean, exact.mean)),
    ]


def run_convergence(config: ScenarioConfig, m_grid, cluster="central", form="full"):
    """True entrywise capacity vs TOSE while the cluster count grows at a
    fixed ``BS_PER_CLUSTER`` BSs per cluster in the same area."""
    m_grid = list(m_grid)
    if m_grid != sorted(m_grid) or not m_grid:
        raise InvalidParameterError("m_grid must be non-empty and ascending")
    records = []
    for m in m_grid:
        cfg = replace(config, M=int(m), J=BS_PER_CLUSTER * int(m)).validate()
        groups = _channel_draws(cfg, cluster)
        exact, t_exact = _timed(lambda: _pooled(
            [exact_capacity_hadamard(ch.Q, n, fs, form) for ch, fs, n in groups],
            Method.EXACT_HADAMARD))
        est, t_est = _timed(lambda: _tose_pooled(groups, cfg.spike_ratio))
        records.append(_record(Method.EXACT_HADAMARD, groups, exact, t_exact, cfg.seed))
        records.append(_record(Method.TOSE, groups, est, t_est, cfg.seed,
                               relative_gap(est.mean, exact.mean)))
    return records


def scaling_channel(config: ScenarioConfig, j_m, seed) -> ClusterChannel:
    """A cluster of exactly ``j_m`` BSs and ``round(beta * j_m)`` users.

    The cluster occupies a central square cell of side ``D / sqrt(M)``; the
    other ``M - 1`` clusters' users are spread uniformly over the rest of the
    area at the same user density and act as interferers.
    """
    k_m = max(1, int(round(config.beta * j_m)))
    side = config.D / math.sqrt(config.M)
    lo = (config.D - side) / 2.0
    bs = place_uniform_square(j_m, side, derive_rng(seed, 0)) + lo
    users = place_uniform_square(k_m, side, derive_rng(seed, 1)) + lo
    n_out = k_m * (config.M - 1)
    rng = derive_rng(seed, 2)
    out = np.empty((0, 2))
    while len(out) < n_out:
        cand = rng.uniform(0.0, config.D, size=(2 * (n_out - len(out)) + 16, 2))
        inside = np.all((cand >= lo) & (cand <= lo + side), axis=1)
        out = np.vstack([out, cand[~inside]])
    params = FadingParams.from_config(config)
    L = large_scale_fading(pairwise_distances(bs, users), params)
    xi = interference_diag(bs, out[:n_out], params)
    return ClusterChannel.from_gains(L, xi, params.P)


def _per_call_seconds(fn, target=0.02):
    """Mean seconds per call over enough back-to-back calls to fill ``target``."""
    timer = timeit.Timer(fn)
    number = 1
    while True:
        elapsed = timer.timeit(number)
        if elapsed >= target:
            return elapsed / number
        number *= 2


def run_scaling(config: ScenarioConfig, jm_grid, repeats=5, include_trace=False, form="full"):
    """Per-size median call time of the Cholesky baseline and of TOSE.

    All timing runs with BLAS/OpenMP pools limited to one thread.
    """
    jm_grid = [int(j) for j in jm_grid]
    if not jm_grid or jm_grid != sorted(jm_grid) or jm_grid[0] < 16:
        raise InvalidParameterError("jm_grid must be ascending with every entry >= 16")
    if repeats < 1:
        raise InvalidParameterError("repeats must be >= 1")
    config.validate()
    tose_method = "tose_with_trace" if include_trace else "tose_core"
    records = []
    with threadpool_limits(limits=1):
        for j_m in jm_grid:
            ch = scaling_channel(config, j_m, np.random.SeedSequence(
                config.seed, spawn_key=(_SCALING_STREAM, j_m)))
            t = build_T(ch.Q)
            k_m, beta = ch.K_m, ch.beta
            n = spike_count(config.spike_ratio, j_m, k_m)
            fs = fading_seed(config, j_m)
            chol_t, chol_v, tose_t, tose_v = [], [], [], []
            for r in range(repeats):
                g = sample_G(j_m, k_m, derive_rng(fs, r))
                s = gram_matrix(t[:, None] * g, form)
                chol_v.append(cholesky_logdet(s) / j_m)
                chol_t.append(_per_call_seconds(lambda: cholesky_logdet(s)))
                tr = trace_B(t, g)
                tose_v.append(spike_estimate(tr, n, beta, j_m).capacity)
                if include_trace:
                    fn = lambda: spike_estimate(trace_B(t, g), n, beta, j_m)
                else:
                    fn = lambda: spike_estimate(tr, n, beta, j_m)
                tose_t.append(_per_call_seconds(fn))
            for method, times, vals in ((f"cholesky_{form}", chol_t, chol_v),
                                        (tose_method, tose_t, tose_v)):
                std = float(np.std(vals, ddof=1)) if repeats > 1 else 0.0
                records.append(BenchmarkRecord(method, j_m, k_m, beta, float(np.mean(vals)), std,
                                               None, statistics.median(times), repeats,
                                               config.seed))
    return records


def loglog_slope(x, y):
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


def to_bits(records):
    ln2 = math.log(2.0)
    return [replace(r, capacity_mean=r.capacity_mean / ln2, capacity_std=r.capacity_std / ln2)
            for r in records]
