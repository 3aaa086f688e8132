import math
import warnings

import numpy as np
import pytest

from slingloiter.errors import DegenerateGeometry, DegenerateGeometryWarning
from slingloiter.grasp import (
    GraspSystem, LoadModel, all_pairs, anchors_collinear, build_grasp, count_hamiltonian_cycles,
    default_pairs, hamiltonian_pairs, matrix_rank, nullspace_orthonormal, pairwise_nullspace,
    pseudo_inverse,
)

from .conftest import REF_ANCHORS, random_load, random_rotation


def wrench_by_hand(load, R, f):
    f = f.reshape(load.n, 3)
    force = f.sum(axis=0)
    torque = sum(np.cross(b, R.T @ fi) for b, fi in zip(load.anchors, f))
    return np.concatenate([force, torque])


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_grasp_matches_direct_wrench(rng, n):
    load = random_load(rng, n)
    R = random_rotation(rng)
    f = rng.normal(size=3 * n)
    np.testing.assert_allclose(build_grasp(load, R) @ f, wrench_by_hand(load, R, f), atol=1e-12)


@pytest.mark.parametrize("n,rank", [(1, 3), (2, 5), (3, 6), (4, 6), (6, 6)])
def test_rank_generic(rng, n, rank):
    load = random_load(rng, n)
    assert matrix_rank(build_grasp(load, random_rotation(rng))) == rank


def test_pseudo_inverse_properties(rng):
    G = build_grasp(random_load(rng, 4), random_rotation(rng))
    P = pseudo_inverse(G)
    np.testing.assert_allclose(G @ P @ G, G, atol=1e-12)
    np.testing.assert_allclose(P @ G @ P, P, atol=1e-12)
    np.testing.assert_allclose(P, np.linalg.pinv(G), atol=1e-10)


def test_orthonormal_nullspace(rng):
    G = build_grasp(random_load(rng, 5), random_rotation(rng))
    N, m = nullspace_orthonormal(G)
    assert m == 9 and N.shape == (15, 9)
    np.testing.assert_allclose(N.T @ N, np.eye(9), atol=1e-12)
    assert np.abs(G @ N).max() < 1e-12


def test_pairwise_column_structure():
    load = LoadModel(1.0, [0.01] * 3, REF_ANCHORS)
    N = pairwise_nullspace(load, np.eye(3), [(0, 1)])
    u = (REF_ANCHORS[0] - REF_ANCHORS[1]) / np.linalg.norm(REF_ANCHORS[0] - REF_ANCHORS[1])
    np.testing.assert_allclose(N[:3, 0], u)
    np.testing.assert_allclose(N[3:6, 0], -u)
    np.testing.assert_array_equal(N[6:, 0], 0.0)


def test_pair_orders():
    assert all_pairs(4) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    assert hamiltonian_pairs(3) == [(0, 1), (1, 2), (0, 2)]
    assert default_pairs(1) == [] and default_pairs(2) == [(0, 1)]


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_hamiltonian_cycle_is_cycle(n):
    for seed in range(5):
        pairs = hamiltonian_pairs(n, seed)
        assert len(pairs) == n == len(set(pairs))
        deg = np.zeros(n, int)
        for i, j in pairs:
            deg[i] += 1
            deg[j] += 1
        assert np.all(deg == 2)


def test_cycle_count():
    assert [count_hamiltonian_cycles(n) for n in (3, 4, 5, 6)] == [1, 3, 12, 60]
    assert count_hamiltonian_cycles(7) == math.factorial(6) // 2


def test_equilibrium_system(rng):
    load = random_load(rng, 4)
    gs = GraspSystem.at_equilibrium(load, random_rotation(rng))
    assert (gs.rank, gs.nullity, gs.pair_rank) == (6, 6, 4)
    assert np.abs(gs.G @ gs.N_pair).max() < 1e-12
    assert len(gs.planes()) == 4


def test_collinear_warning_and_planes():
    load = LoadModel(1.0, [0.01] * 3, [[0, 0, 0], [1, 0, 0], [2, 0, 0]])
    assert anchors_collinear(load.anchors)
    with pytest.warns(DegenerateGeometryWarning):
        gs = GraspSystem.at_equilibrium(load)
    assert gs.pair_rank == 2


def test_planes_need_two_pairs_per_cable():
    load = LoadModel(1.0, [0.01] * 3, REF_ANCHORS)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        gs = GraspSystem.at_equilibrium(load, pairs=[(0, 1)])
    with pytest.raises(DegenerateGeometry):
        gs.planes()


@pytest.mark.parametrize("bad", [
    dict(mass=0.0), dict(inertia=[1, 1, -1]), dict(anchors=[[0, 0, 0], [0, 0, 0]]),
    dict(linear_friction=-1.0),
])
def test_load_validation(bad):
    kw = dict(mass=1.0, inertia=[1, 1, 1], anchors=REF_ANCHORS)
    kw.update(bad)
    with pytest.raises(ValueError):
        LoadModel(**kw)


def test_invalid_pairs():
    load = LoadModel(1.0, [1, 1, 1], REF_ANCHORS)
    for pairs in ([(0, 3)], [(1, 0)], [(0, 1), (0, 1)]):
        with pytest.raises(ValueError):
            GraspSystem.at_equilibrium(load, pairs=pairs)
