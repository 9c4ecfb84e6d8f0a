"""Node placement, k-means clustering and clustered network scenarios.

Positions are carried as ``(n, 2)`` float arrays of ``(x, y)`` in meters.
"""

from dataclasses import dataclass, field

import numpy as np

from tosecap._seeding import derive_rng
from tosecap.config import AreaShape, ScenarioConfig
from tosecap.errors import GenerationError, InvalidParameterError

# stream tags under the master seed
_GEOMETRY_STREAM = 101


def place_uniform_square(n, side, seed):
    """``n`` i.i.d. uniform positions on ``[0, side]^2``."""
    if side <= 0:
        raise InvalidParameterError(f"side must be positive, got {side}")
    if n < 0:
        raise InvalidParameterError(f"n must be >= 0, got {n}")
    rng = derive_rng(seed)
    return rng.uniform(0.0, side, size=(int(n), 2))


def place_truncated_normal_disk(n, diameter, sigma, seed, center=None):
    """Isotropic normal around the disk center, rejected outside the disk.

    ``center`` defaults to ``(diameter/2, diameter/2)`` so coordinates stay in
    the same bounding box as the square layout.
    """
    if diameter <= 0:
        raise InvalidParameterError(f"diameter must be positive, got {diameter}")
    if sigma <= 0:
        raise InvalidParameterError(f"sigma must be positive, got {sigma}")
    if n < 0:
        raise InvalidParameterError(f"n must be >= 0, got {n}")
    rng = derive_rng(seed)
    radius = diameter / 2.0
    c = np.full(2, radius) if center is None else np.asarray(center, dtype=float)
    out = np.empty((int(n), 2))
    filled = 0
    while filled < n:
        # oversample by the (worst case) acceptance rate
        batch = rng.normal(0.0, sigma, size=(max(2 * (n - filled), 16), 2))
        keep = batch[np.einsum("ij,ij->i", batch, batch) <= radius * radius]
        take = min(len(keep), n - filled)
        out[filled:filled + take] = keep[:take]
        filled += take
    return out + c


def _sq_dists(points, centers):
    d = points[:, None, :] - centers[None, :, :]
    return np.einsum("ijk,ijk->ij", d, d)


def _kmeanspp_init(points, m, rng):
    n = len(points)
    chosen = [int(rng.integers(n))]
    closest = _sq_dists(points, points[chosen]).ravel()
    for _ in range(1, m):
        total = closest.sum()
        if total > 0:
            idx = int(rng.choice(n, p=closest / total))
        else:
            # duplicates only: fall back to any point not already chosen
            rest = np.setdiff1d(np.arange(n), chosen)
            idx = int(rng.choice(rest))
        chosen.append(idx)
        closest = np.minimum(closest, _sq_dists(points, points[[idx]]).ravel())
    return points[chosen].copy()


def lloyd(points, m, seed, max_iters=100):
    """Lloyd iterations from k-means++ seeding.

    Returns ``(labels, centers, inertia)`` where ``inertia`` lists the
    within-cluster sum of squares after every assignment step.
    """
    points = np.asarray(points, dtype=float)
    n = len(points)
    if n == 0:
        raise InvalidParameterError("positions must be non-empty")
    if not 1 <= m <= n:
        raise InvalidParameterError(f"need 1 <= m <= {n}, got m={m}")
    if max_iters < 1:
        raise InvalidParameterError("max_iters must be >= 1")
    rng = derive_rng(seed)
    centers = _kmeanspp_init(points, m, rng)
    labels = None
    inertia = []
    for _ in range(max_iters):
        d2 = _sq_dists(points, centers)
        new = np.argmin(d2, axis=1)
        counts = np.bincount(new, minlength=m)
        # reseed empty clusters with the point farthest from its center,
        # never stealing the sole member of another cluster
        for empty in np.flatnonzero(counts == 0):
            cost = d2[np.arange(n), new]
            cost[counts[new] <= 1] = -1.0
            far = int(np.argmax(cost))
            counts[new[far]] -= 1
            new[far] = empty
            counts[empty] = 1
            centers[empty] = points[far]
            d2[:, empty] = _sq_dists(points, centers[[empty]]).ravel()
        inertia.append(float(d2[np.arange(n), new].sum()))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        sums = np.zeros_like(centers)
        np.add.at(sums, labels, points)
        centers = sums / np.bincount(labels, minlength=m)[:, None]
    return labels, centers, inertia


def kmeans_cluster(positions, m, seed, max_iters=100):
    """Cluster index in ``[0, m)`` for every position; all clusters non-empty."""
    labels, _, _ = lloyd(positions, m, seed, max_iters)
    return labels


@dataclass(frozen=True)
class Cluster:
    index: int
    bs_indices: np.ndarray
    user_indices: np.ndarray

    @property
    def J_m(self) -> int:
        return len(self.bs_indices)

    @property
    def K_m(self) -> int:
        return len(self.user_indices)


@dataclass(frozen=True)
class NetworkScenario:
    """A clustered layout. Arrays are marked read-only on construction."""

    bs_positions: np.ndarray
    user_positions: np.ndarray
    area_shape: AreaShape
    D: float
    cluster_of_bs: np.ndarray
    cluster_of_user: np.ndarray
    num_clusters: int
    config: ScenarioConfig | None = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("bs_positions", "user_positions", "cluster_of_bs", "cluster_of_user"):
            arr = np.array(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "area_shape", AreaShape(self.area_shape))

    @property
    def J(self) -> int:
        return len(self.bs_positions)

    @property
    def K(self) -> int:
        return len(self.user_positions)

    @property
    def center(self) -> np.ndarray:
        return np.array([self.D / 2.0, self.D / 2.0])

    def cluster(self, m) -> Cluster:
        if not 0 <= m < self.num_clusters:
            raise InvalidParameterError(f"cluster index {m} out of range [0, {self.num_clusters})")
        return Cluster(
            int(m),
            np.flatnonzero(self.cluster_of_bs == m),
            np.flatnonzero(self.cluster_of_user == m),
        )

    def clusters(self) -> list[Cluster]:
        return [self.cluster(m) for m in range(self.num_clusters)]

    def centroids(self) -> np.ndarray:
        pts = np.vstack([self.bs_positions, self.user_positions])
        labels = np.concatenate([self.cluster_of_bs, self.cluster_of_user])
        sums = np.zeros((self.num_clusters, 2))
        np.add.at(sums, labels, pts)
        return sums / np.bincount(labels, minlength=self.num_clusters)[:, None]

    def central_cluster(self) -> int:
        """Index of the cluster whose centroid lies nearest the area center."""
        d = np.linalg.norm(self.centroids() - self.center, axis=1)
        return int(np.argmin(d))


def build_scenario(config: ScenarioConfig, seed=None) -> NetworkScenario:
    """Place BSs and users, then cluster them jointly.

    A draw whose clustering leaves some cluster without a BS or without a user
    is discarded and re-drawn from the next derived seed. ``seed`` overrides
    ``config.seed``.
    """
    config.validate()
    master = config.seed if seed is None else seed
    J, K, M = config.J, config.K, config.M
    problem = ""
    for attempt in range(config.max_retries):
        key = (_GEOMETRY_STREAM, attempt)
        if config.area_shape is AreaShape.SQUARE:
            bs = place_uniform_square(J, config.D, derive_rng(master, *key, 0))
            users = place_uniform_square(K, config.D, derive_rng(master, *key, 1))
        else:
            sigma = config.disk_sigma
            bs = place_truncated_normal_disk(J, config.D, sigma, derive_rng(master, *key, 0))
            users = place_truncated_normal_disk(K, config.D, sigma, derive_rng(master, *key, 1))
        labels = kmeans_cluster(np.vstack([bs, users]), M, derive_rng(master, *key, 2),
                                config.kmeans_iters)
        c_bs, c_user = labels[:J], labels[J:]
        no_bs = np.flatnonzero(np.bincount(c_bs, minlength=M) == 0)
        no_user = np.flatnonzero(np.bincount(c_user, minlength=M) == 0)
        if len(no_bs) == 0 and len(no_user) == 0:
            return NetworkScenario(bs, users, config.area_shape, config.D, c_bs, c_user, M, config)
        problem = (f"clusters {no_bs.tolist()} have no BS" if len(no_bs)
                   else f"clusters {no_user.tolist()} have no user")
    raise GenerationError(
        f"every cluster must hold >=1 BS and >=1 user; after {config.max_retries} "
        f"attempts the last draw failed: {problem}"
    )
