import numpy as np
import pytest

from shapereg.dtw import WarpingPath, accumulated_cost, apply_path, dtw_path
from shapereg.errors import BandTooNarrow, IndexOutOfRange

from .conftest import random_cloud
from .oracles import exhaustive_dtw


def test_hand_example():
    # x1=[0,1,2], x2=[0,2]: skipping 1 on the left branch costs |1-0|^2=1,
    # everything else matches exactly
    path, cost = dtw_path(np.array([0, 1, 2], dtype=complex), np.array([0, 2], dtype=complex))
    assert cost == 1.0
    assert path.pairs.tolist() == [[0, 0], [1, 0], [2, 1]]


def test_matches_exhaustive_enumeration(rng):
    for _ in range(60):
        n1 = int(rng.integers(2, 8))
        n2 = int(rng.integers(2, 8))
        x1 = random_cloud(rng, n1, sigma=5.0)
        x2 = random_cloud(rng, n2, sigma=5.0)
        best, argbest = exhaustive_dtw(x1, x2)
        path, cost = dtw_path(x1, x2)
        assert cost == best
        assert [tuple(p) for p in path.pairs.tolist()] in argbest


def test_path_structure_on_random_instances(rng):
    for _ in range(20):
        x1 = random_cloud(rng, int(rng.integers(2, 40)))
        x2 = random_cloud(rng, int(rng.integers(2, 40)))
        path, _ = dtw_path(x1, x2)
        p = path.pairs
        assert tuple(p[0]) == (0, 0)
        assert tuple(p[-1]) == (len(x1) - 1, len(x2) - 1)
        steps = np.diff(p, axis=0)
        assert set(map(tuple, steps.tolist())) <= {(1, 0), (0, 1), (1, 1)}
        path.validate(len(x1), len(x2))


def test_cost_is_symmetric(rng):
    for _ in range(10):
        x1 = random_cloud(rng, int(rng.integers(2, 30)))
        x2 = random_cloud(rng, int(rng.integers(2, 30)))
        _, c12 = dtw_path(x1, x2)
        _, c21 = dtw_path(x2, x1)
        assert c12 == c21


def test_band_too_narrow():
    with pytest.raises(BandTooNarrow):
        dtw_path(np.arange(5, dtype=complex), np.arange(2, dtype=complex), band=2)


def test_wide_band_matches_unbanded(rng):
    x1 = random_cloud(rng, 25)
    x2 = random_cloud(rng, 31)
    path, cost = dtw_path(x1, x2)
    path_b, cost_b = dtw_path(x1, x2, band=max(len(x1), len(x2)))
    assert cost_b == cost
    assert np.array_equal(path_b.pairs, path.pairs)


def test_band_restricts_cost(rng):
    # constraining the corridor can only keep or worsen the optimum
    for _ in range(10):
        x1 = random_cloud(rng, 20)
        x2 = random_cloud(rng, 24)
        _, free = dtw_path(x1, x2)
        _, banded = dtw_path(x1, x2, band=4)
        assert banded >= free


def test_accumulated_cost_layout(rng):
    x1 = random_cloud(rng, 6)
    x2 = random_cloud(rng, 9)
    acc = accumulated_cost(x1, x2)
    assert acc.shape == (7, 10)
    assert acc[0, 0] == 0.0
    assert np.all(np.isinf(acc[0, 1:]))
    assert np.all(np.isinf(acc[1:, 0]))
    _, cost = dtw_path(x1, x2)
    assert acc[-1, -1] == cost


def test_apply_path_duplicates():
    x1 = np.array([0, 1, 2], dtype=complex)
    x2 = np.array([5, 6], dtype=complex)
    path = WarpingPath(np.array([[0, 0], [1, 0], [2, 1]], dtype=np.int64))
    pair = apply_path(x1, x2, path)
    assert np.array_equal(pair.a, [0, 1, 2])
    assert np.array_equal(pair.b, [5, 5, 6])
    assert pair.path is path


def test_apply_path_bounds_checked():
    path = WarpingPath(np.array([[0, 0], [5, 1]], dtype=np.int64))
    with pytest.raises(IndexOutOfRange):
        apply_path(np.zeros(3, complex), np.zeros(2, complex), path)


def test_json_pairs_are_one_based():
    path = WarpingPath(np.array([[0, 0], [1, 1]], dtype=np.int64))
    assert path.to_json_pairs() == [[1, 1], [2, 2]]
    back = WarpingPath.from_json_pairs([[1, 1], [2, 2]])
    assert np.array_equal(back.pairs, path.pairs)


def test_validate_rejects_bad_paths():
    with pytest.raises(ValueError):
        WarpingPath(np.array([[0, 0], [2, 1]], dtype=np.int64)).validate(3, 2)
    with pytest.raises(ValueError):
        WarpingPath(np.array([[0, 0], [1, 1]], dtype=np.int64)).validate(3, 2)


def test_deterministic_across_calls(rng):
    x1 = random_cloud(rng, 40)
    x2 = random_cloud(rng, 37)
    p1, c1 = dtw_path(x1, x2)
    p2, c2 = dtw_path(x1, x2)
    assert c1 == c2
    assert np.array_equal(p1.pairs, p2.pairs)
