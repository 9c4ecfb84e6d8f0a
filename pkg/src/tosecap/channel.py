"""Per-cluster channel matrices.

For a cluster with ``J_m`` BSs and ``K_m`` users this builds the large-scale
gains ``L`` (J_m x K_m), the diagonal noise-plus-interference ``xi`` (J_m), the
normalized gains ``Q = sqrt(P) * L / sqrt(xi)[:, None]``, and draws the
small-scale fading ``G``.
"""

from dataclasses import dataclass

import numpy as np

from tosecap._seeding import derive_rng
from tosecap.errors import InvalidParameterError

# rows of BSs processed at a time when summing interference
_CHUNK_ROWS = 256


@dataclass(frozen=True)
class FadingParams:
    d0: float = 10.0
    d1: float = 50.0
    P: float = 1.0
    N0: float = 1e-12

    def __post_init__(self):
        if not 0 < self.d0 < self.d1:
            raise InvalidParameterError(f"need 0 < d0 < d1, got d0={self.d0}, d1={self.d1}")
        if self.P <= 0 or self.N0 <= 0:
            raise InvalidParameterError("P and N0 must be positive")

    @classmethod
    def from_config(cls, config):
        return cls(config.d0, config.d1, config.P, config.N0)


def large_scale_fading(d, params: FadingParams):
    """Piecewise power-law gain: ``d^-1.75`` beyond ``d1``, ``d1^-0.75 / d``
    between ``d0`` and ``d1``, and saturated at ``d1^-0.75 / d0`` below ``d0``.

    Accepts a scalar or an array of distances.
    """
    d0, d1 = params.d0, params.d1
    arr = np.asarray(d, dtype=float)
    # clip keeps the unused branches finite at d = 0
    safe = np.maximum(arr, d0)
    out = np.where(arr > d1, safe ** -1.75, d1 ** -0.75 / safe)
    if out.ndim == 0:
        return float(out)
    return out


def pairwise_distances(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.hypot(a[:, None, 0] - b[None, :, 0], a[:, None, 1] - b[None, :, 1])


def build_L(cluster, scenario, params: FadingParams):
    if cluster.J_m == 0 or cluster.K_m == 0:
        raise InvalidParameterError(
            f"cluster {cluster.index} is empty (J_m={cluster.J_m}, K_m={cluster.K_m})")
    bs = scenario.bs_positions[cluster.bs_indices]
    users = scenario.user_positions[cluster.user_indices]
    return large_scale_fading(pairwise_distances(bs, users), params)


def sample_G(j, k, seed):
    """``j x k`` i.i.d. CN(0, 1): real and imaginary parts each N(0, 1/2)."""
    if j < 1 or k < 1:
        raise InvalidParameterError(f"need j, k >= 1, got {j}, {k}")
    rng = derive_rng(seed)
    z = rng.standard_normal((j, 2 * k))
    g = np.empty((j, k), dtype=complex)
    g.real = z[:, :k]
    g.imag = z[:, k:]
    g *= np.sqrt(0.5)
    return g


def interference_diag(bs, interferers, params: FadingParams):
    """``N0 + P * sum_u l(|bs_j - u|)^2`` for every BS row."""
    bs = np.asarray(bs, dtype=float)
    interferers = np.asarray(interferers, dtype=float).reshape(-1, 2)
    xi = np.full(len(bs), params.N0)
    if len(interferers) == 0:
        return xi
    for start in range(0, len(bs), _CHUNK_ROWS):
        block = bs[start:start + _CHUNK_ROWS]
        gains = large_scale_fading(pairwise_distances(block, interferers), params)
        xi[start:start + len(block)] += params.P * np.einsum("ij,ij->i", gains, gains)
    return xi


def build_Xi(cluster, scenario, params: FadingParams):
    """Diagonal of the noise-plus-interference matrix; users outside the
    cluster are the interferers."""
    bs = scenario.bs_positions[cluster.bs_indices]
    outside = scenario.user_positions[scenario.cluster_of_user != cluster.index]
    return interference_diag(bs, outside, params)


def build_Q(L, xi, P):
    L = np.asarray(L, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if L.ndim != 2 or xi.shape != (L.shape[0],):
        raise InvalidParameterError(f"shape mismatch: L {L.shape}, xi {xi.shape}")
    if np.any(xi <= 0):
        raise InvalidParameterError("xi entries must be positive")
    return np.sqrt(P) * L / np.sqrt(xi)[:, None]


@dataclass(frozen=True)
class ClusterChannel:
    """Deterministic part of one cluster's channel. ``G`` is drawn per trial."""

    L: np.ndarray
    xi: np.ndarray
    Q: np.ndarray
    P: float

    def __post_init__(self):
        for name in ("L", "xi", "Q"):
            getattr(self, name).setflags(write=False)

    @classmethod
    def from_gains(cls, L, xi, P):
        L = np.array(L, dtype=float)
        xi = np.array(xi, dtype=float)
        return cls(L, xi, build_Q(L, xi, P), float(P))

    @property
    def J_m(self) -> int:
        return self.Q.shape[0]

    @property
    def K_m(self) -> int:
        return self.Q.shape[1]

    @property
    def beta(self) -> float:
        return self.K_m / self.J_m


def cluster_channel(scenario, m, params: FadingParams) -> ClusterChannel:
    cluster = scenario.cluster(m)
    return ClusterChannel.from_gains(
        build_L(cluster, scenario, params), build_Xi(cluster, scenario, params), params.P)
