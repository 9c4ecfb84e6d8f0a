"""Top-N simulated estimations (TOSE).

The entrywise channel ``Q o G`` is replaced by ``T G`` where ``T`` is the
diagonal of row means of ``Q``; this choice minimizes the expected squared
Frobenius gap between the two. The log-determinant of ``I + T G G* T*`` is then
estimated from ``N`` evenly spaced spike eigenvalues sitting above the
Marchenko-Pastur edge and constrained by ``tr(T G G* T*)``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from tosecap._seeding import derive_rng
from tosecap.capacity_exact import CapacityResult, Method
from tosecap.channel import sample_G
from tosecap.errors import DegenerateSpectrumError, InvalidParameterError


def build_T(q):
    """Diagonal of the optimal ``T`` (row means of ``Q``), as a vector."""
    q = np.asarray(q, dtype=float)
    if q.ndim != 2 or q.shape[1] < 1:
        raise InvalidParameterError(f"Q must be a matrix with >= 1 column, got {q.shape}")
    return q.mean(axis=1)


def frobenius_gap_min(q):
    """Minimum of ``E||Q o G - T G||_F^2`` over all ``T``.

    Equals the total within-row sum of squared deviations of ``Q``.
    """
    q = np.asarray(q, dtype=float)
    k = q.shape[1]
    row_sums = q.sum(axis=1)
    gap = float(np.sum(q * q) - np.sum(row_sums * row_sums) / k)
    return max(gap, 0.0)


def frobenius_gap(q, t_tilde):
    """``E||Q o G - T~ G||_F^2`` for an arbitrary square ``T~`` (J_m x J_m)."""
    q = np.asarray(q, dtype=float)
    t_tilde = np.asarray(t_tilde, dtype=float)
    j, k = q.shape
    if t_tilde.shape != (j, j):
        raise InvalidParameterError(f"T~ must be {j}x{j}, got {t_tilde.shape}")
    return float(np.sum(q * q) + k * np.sum(t_tilde * t_tilde)
                 - 2.0 * np.dot(np.diagonal(t_tilde), q.sum(axis=1)))


def trace_B(t, g):
    """``tr(T G G* T*) = sum_j t_j^2 sum_k |g_jk|^2`` without forming B."""
    t = np.asarray(t, dtype=float)
    g = np.asarray(g)
    if g.shape[0] != t.shape[0]:
        raise InvalidParameterError(f"t has {t.shape[0]} rows, G has {g.shape[0]}")
    row_power = np.einsum("ij,ij->i", g.real, g.real) + np.einsum("ij,ij->i", g.imag, g.imag)
    return float(np.dot(t * t, row_power))


def mp_edge(beta):
    """Upper Marchenko-Pastur bulk edge ``(1 + 1/sqrt(beta))^2``."""
    return (1.0 + 1.0 / math.sqrt(beta)) ** 2


def spike_count(spike_ratio, j_m, k_m):
    """``N = ceil(spike_ratio * min(J_m, K_m))``; B has that rank almost surely."""
    if not 0 < spike_ratio <= 1:
        raise InvalidParameterError(f"spike_ratio must lie in (0, 1], got {spike_ratio}")
    # rounding guards 0.7 * 10 = 7.000000000000001
    return max(1, math.ceil(round(spike_ratio * min(j_m, k_m), 9)))


@dataclass(frozen=True)
class SpikeEstimate:
    theta1: float
    delta_sigma: float
    spikes: np.ndarray = field(repr=False)
    capacity: float

    @property
    def n_spikes(self) -> int:
        return len(self.spikes)


def spike_estimate(trace_b, n, beta, j_m) -> SpikeEstimate:
    """Evenly spaced spike approximation and its capacity.

    Runs in O(n) scalar operations; plain Python arithmetic is used on purpose
    so the cost scales with ``n`` rather than with array-call overhead.
    """
    if n < 1 or beta <= 0 or j_m < 1 or trace_b < 0:
        raise InvalidParameterError(
            f"need n >= 1, beta > 0, j_m >= 1, trace_b >= 0 (got {n}, {beta}, {j_m}, {trace_b})")
    theta1 = (1.0 + 1.0 / math.sqrt(beta)) ** 2
    delta = 2.0 * (trace_b + n - n * theta1) / (n * (n + 1))
    if delta <= 0:
        raise DegenerateSpectrumError(
            f"spike spacing {delta:.6g} <= 0: trace {trace_b:.6g} is below n*(theta1-1) = "
            f"{n * (theta1 - 1):.6g}")
    # smallest spike is theta1 + delta > theta1 >= 1, so every log is positive
    spikes = [theta1 + (n - i) * delta for i in range(n)]
    log_sum = math.fsum([math.log(s) for s in spikes])
    return SpikeEstimate(theta1, delta, np.array(spikes), log_sum / j_m)


def tose_capacity(channel, spike_ratio, trials, seed) -> CapacityResult:
    """Monte-Carlo TOSE estimate over fresh fading draws.

    Trial ``i`` uses the same fading stream as trial ``i`` of the exact
    baselines under the same ``seed``. Every failing trial is collected and
    reported together.
    """
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")
    q = np.asarray(getattr(channel, "Q", channel), dtype=float)
    j_m, k_m = q.shape
    t = build_T(q)
    n = spike_count(spike_ratio, j_m, k_m)
    beta = k_m / j_m
    values, failed = [], []
    for i in range(trials):
        g = sample_G(j_m, k_m, derive_rng(seed, i))
        try:
            values.append(spike_estimate(trace_B(t, g), n, beta, j_m).capacity)
        except DegenerateSpectrumError:
            failed.append(i)
    if failed:
        raise DegenerateSpectrumError(
            f"{len(failed)} of {trials} trials hit a degenerate spike spectrum", trials=failed)
    return CapacityResult.from_values(values, Method.TOSE)
