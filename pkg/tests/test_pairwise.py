import numpy as np
import pytest

from shapereg.contour import Pose, transform
from shapereg.errors import EmptySet
from shapereg.pairwise import RegistrationResult, StopCriteria, default_stop, register_pair

from .conftest import random_cloud
from .oracles import brute_d_test


def test_stop_criteria_validation():
    s = StopCriteria()
    assert s.i_max == 100
    assert s.c_min == 0.0
    with pytest.raises(ValueError):
        StopCriteria(i_max=0)
    with pytest.raises(ValueError):
        StopCriteria(c_min=-1.0)
    with pytest.raises(ValueError):
        StopCriteria(c_min=float("nan"))
    with pytest.raises(ValueError):
        StopCriteria(c_min=float("inf"))


def test_default_stop_scales_to_smallest_norm():
    # norm of [3, 4j] is 5, so the tolerance lands at 5e-4
    s = default_stop([np.array([3 + 0j, 4j])])
    assert s.i_max == 100
    assert s.c_min == pytest.approx(5e-4)

    both = default_stop([np.array([3 + 0j, 4j]), np.array([30 + 0j, 40j])])
    assert both.c_min == pytest.approx(5e-4)

    with pytest.raises(EmptySet):
        default_stop([])


def test_self_registration_is_exact():
    c = random_cloud(np.random.default_rng(7), 50)
    res = register_pair(c, c)
    assert res.converged
    assert res.iterations == 1
    assert res.final_movement == 0.0
    assert res.pose.r == 1.0 + 0.0j
    assert res.pose.t == 0.0 + 0.0j
    assert np.array_equal(res.registered, c)
    assert np.array_equal(res.path.pairs, np.column_stack([np.arange(50)] * 2))


def test_recovers_random_similarity(rng):
    for _ in range(15):
        c = random_cloud(rng)
        angle = rng.uniform(-np.pi / 4, np.pi / 4)
        scale = rng.uniform(0.7, 1.4)
        true = Pose(scale * np.exp(1j * angle), complex(*rng.uniform(-60, 60, 2)))
        target = transform(c, true.inverse())
        res = register_pair(c, target)
        assert res.converged
        assert brute_d_test(c, res.registered) < 1e-6
        # recovered pose undoes the synthetic one
        assert abs(res.pose.compose(true.inverse()).r - 1) < 1e-6


def test_registered_matches_pose_applied_to_target(rng):
    c = random_cloud(rng, 45)
    target = transform(c, Pose(0.9 * np.exp(0.3j), 5 - 2j))
    res = register_pair(c, target)
    replay = transform(target, res.pose)
    assert np.allclose(replay, res.registered, rtol=0, atol=1e-9 * np.linalg.norm(c))


def test_unweighted_variant_runs(rng):
    c = random_cloud(rng, 30)
    target = transform(c, Pose(1.1 * np.exp(0.2j), 3 + 4j))
    res = register_pair(c, target, weighted=False)
    assert res.converged
    assert np.all(res.weights == 1.0)
    assert brute_d_test(c, res.registered) < 1e-6


def test_wide_band_matches_unbanded(rng):
    c = random_cloud(rng, 25)
    target = transform(c, Pose(np.exp(0.1j), 1 + 1j))
    free = register_pair(c, target)
    banded = register_pair(c, target, band=25)
    assert free.pose.r == banded.pose.r
    assert free.pose.t == banded.pose.t
    assert np.array_equal(free.path.pairs, banded.path.pairs)


def test_cost_trace_bookkeeping(rng):
    c = random_cloud(rng, 35)
    target = transform(c, Pose(1.2 * np.exp(0.4j), -8 + 3j))
    res = register_pair(c, target)
    assert len(res.cost_trace) == res.iterations
    assert all(np.isfinite(v) and v >= 0 for v in res.cost_trace)
    assert res.cost_trace[-1] <= res.cost_trace[0]


def test_iteration_budget_respected(rng):
    c = random_cloud(rng, 30)
    target = transform(c, Pose(1.3 * np.exp(0.5j), 10 - 10j))
    res = register_pair(c, target, StopCriteria(i_max=2, c_min=0.0))
    assert res.iterations <= 2
    assert not res.converged


def test_registration_is_deterministic(rng):
    c = random_cloud(rng, 40)
    target = transform(c, Pose(0.8 * np.exp(-0.3j), 7 + 2j))
    a = register_pair(c, target)
    b = register_pair(c, target)
    assert a.pose.r == b.pose.r and a.pose.t == b.pose.t
    assert np.array_equal(a.registered, b.registered)
    assert a.cost_trace == b.cost_trace


def test_reregistering_converged_result_is_stable(rng):
    c = random_cloud(rng, 30)
    target = transform(c, Pose(1.1 * np.exp(0.2j), 4 - 1j))
    first = register_pair(c, target)
    again = register_pair(c, first.registered)
    assert again.converged
    assert abs(again.pose.r - 1) < 1e-3
    assert abs(again.pose.t) < 1e-2 * np.linalg.norm(c)


def test_different_lengths_register(template600):
    # a 2:1 subsample of the same outline must land well inside one
    # target-side point spacing
    target = transform(template600[::2], Pose(np.exp(0.15j), 2 + 2j))
    spacing = float(np.mean(np.abs(np.diff(template600[::2]))))
    before = brute_d_test(template600, target)
    res = register_pair(template600, target)
    assert res.converged
    after = brute_d_test(template600, res.registered)
    assert after < 0.5 * spacing
    assert after < 0.05 * before


def test_result_to_dict_round_trip_fields(rng):
    c = random_cloud(rng, 20)
    res = register_pair(c, transform(c, Pose(1.05 * np.exp(0.1j), 1 + 0j)))
    d = res.to_dict()
    assert set(d) == {
        "pose",
        "path",
        "weights",
        "iterations",
        "final_movement",
        "converged",
        "cost_trace",
    }
    assert d["iterations"] == res.iterations
    assert d["path"][0] == [1, 1]
    assert isinstance(res, RegistrationResult)
