import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tosecap.channel import (
    ClusterChannel,
    FadingParams,
    build_L,
    build_Q,
    build_Xi,
    cluster_channel,
    large_scale_fading,
    sample_G,
)
from tosecap.config import ScenarioConfig
from tosecap.errors import InvalidParameterError
from tosecap.geometry import Cluster, NetworkScenario, build_scenario

PARAMS = FadingParams(d0=10, d1=50, P=1.0, N0=1e-12)


def _scenario(bs, users, cluster_of_user, M=2):
    bs = np.asarray(bs, float)
    return NetworkScenario(bs, np.asarray(users, float), "square", 800.0,
                           np.zeros(len(bs), int), np.asarray(cluster_of_user), M)


def _l_scalar(d, d0=10.0, d1=50.0):
    if d > d1:
        return d ** -1.75
    if d > d0:
        return d1 ** -0.75 / d
    return d1 ** -0.75 / d0


@pytest.mark.parametrize("d, expected", [
    (100, 3.1623e-4),
    (5, 5.3183e-3),
    (50, 1.06366e-3),  # 50^-1.75, equal on both sides of d1
])
def test_large_scale_fading_examples(d, expected):
    assert large_scale_fading(d, PARAMS) == pytest.approx(expected, rel=1e-4)


def test_large_scale_fading_zero_distance_saturates():
    assert large_scale_fading(0.0, PARAMS) == pytest.approx(50 ** -0.75 / 10)


def test_large_scale_fading_vectorized_matches_scalar(rng):
    d = rng.uniform(0, 300, size=200)
    assert np.allclose(large_scale_fading(d, PARAMS), [_l_scalar(x) for x in d], rtol=1e-14)


@given(st.floats(0, 1e4), st.floats(0, 1e4))
def test_large_scale_fading_monotone(a, b):
    lo, hi = sorted((a, b))
    assert large_scale_fading(hi, PARAMS) <= large_scale_fading(lo, PARAMS)


def test_fading_params_validation():
    with pytest.raises(InvalidParameterError):
        FadingParams(d0=50, d1=10)
    with pytest.raises(InvalidParameterError):
        FadingParams(N0=0)


def test_build_L_single_pair():
    sc = _scenario([[0, 0]], [[0, 100]], [0])
    L = build_L(sc.cluster(0), sc, PARAMS)
    assert L.shape == (1, 1)
    assert L[0, 0] == pytest.approx(3.1623e-4, rel=1e-4)


def test_build_L_colocated():
    sc = _scenario([[3, 4]], [[3, 4]], [0])
    assert build_L(sc.cluster(0), sc, PARAMS)[0, 0] == pytest.approx(50 ** -0.75 / 10)


def test_build_L_matches_loop_oracle():
    bs = [[0, 0], [120, 35]]
    users = [[7, 3], [60, 80], [300, 10]]
    sc = _scenario(bs, users, [0, 0, 0])
    L = build_L(sc.cluster(0), sc, PARAMS)
    for j, b in enumerate(bs):
        for k, u in enumerate(users):
            assert L[j, k] == pytest.approx(_l_scalar(math.dist(b, u)), rel=1e-14)


def test_build_L_empty_cluster():
    with pytest.raises(InvalidParameterError):
        build_L(Cluster(0, np.array([0]), np.array([], int)), _scenario([[0, 0]], [[1, 1]], [1]),
                PARAMS)


def test_sample_G_moments():
    g = sample_G(1000, 1000, seed=1)
    assert g.dtype == complex
    assert abs(np.mean(np.abs(g) ** 2) - 1) < 0.01
    assert abs(np.mean(g.real)) < 0.003
    assert np.var(g.real) == pytest.approx(0.5, abs=0.005)


def test_sample_G_deterministic():
    assert np.array_equal(sample_G(2, 2, seed=5), sample_G(2, 2, seed=5))


def test_build_Xi_no_interferers_is_noise():
    sc = _scenario([[0, 0], [10, 10]], [[5, 5]], [0], M=1)
    assert np.array_equal(build_Xi(sc.cluster(0), sc, PARAMS), [1e-12, 1e-12])


def test_build_Xi_single_interferer():
    sc = _scenario([[0, 0]], [[1, 1], [0, 100]], [0, 1])
    xi = build_Xi(sc.cluster(0), sc, PARAMS)
    assert xi[0] == pytest.approx(1e-12 + (100 ** -1.75) ** 2, rel=1e-12)
    assert xi[0] == pytest.approx(1.00001e-7, rel=1e-5)


def test_build_Xi_matches_loop_oracle():
    sc = build_scenario(ScenarioConfig(J=120, beta=1, M=4, seed=4))
    params = FadingParams(P=2.0, N0=1e-9)
    for c in sc.clusters():
        xi = build_Xi(c, sc, params)
        for row, j in enumerate(c.bs_indices):
            acc = params.N0
            for k in range(sc.K):
                if sc.cluster_of_user[k] != c.index:
                    d = math.dist(sc.bs_positions[j], sc.user_positions[k])
                    acc += params.P * _l_scalar(d) ** 2
            assert xi[row] == pytest.approx(acc, rel=1e-12)


def test_interference_locality():
    near = _scenario([[0, 0], [20, 0]], [[1, 0], [100, 0]], [0, 1])
    far = _scenario([[0, 0], [20, 0]], [[1, 0], [400, 0]], [0, 1])
    assert np.all(build_Xi(far.cluster(0), far, PARAMS) <= build_Xi(near.cluster(0), near, PARAMS))


@pytest.mark.parametrize("xi, P", [(np.ones(3), 1.0), (np.full(3, 4.0), 4.0)])
def test_build_Q_identity_scalings(rng, xi, P):
    L = rng.uniform(size=(3, 5))
    assert np.allclose(build_Q(L, xi, P), L, rtol=1e-15)


def test_build_Q_scalar():
    assert build_Q([[2.0]], [16.0], 1.0)[0, 0] == 0.5


def test_build_Q_rejects_nonpositive_xi():
    with pytest.raises(InvalidParameterError):
        build_Q(np.ones((2, 2)), [1.0, 0.0], 1.0)


def test_cluster_channel_invariants():
    sc = build_scenario(ScenarioConfig(J=300, beta=2, M=3, seed=8))
    for m in range(3):
        ch = cluster_channel(sc, m, PARAMS)
        assert isinstance(ch, ClusterChannel)
        assert np.all(ch.L > 0) and np.all(ch.Q > 0)
        assert ch.xi.min() >= PARAMS.N0
        recon = np.sqrt(PARAMS.P) * ch.L / np.sqrt(ch.xi)[:, None]
        assert np.allclose(ch.Q, recon, rtol=1e-12, atol=0)
        assert ch.beta == ch.K_m / ch.J_m
