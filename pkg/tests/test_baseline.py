import numpy as np
import pytest

from shapereg.baseline import IcpResult, register_icp
from shapereg.contour import Pose, transform
from shapereg.errors import SingularSystem
from shapereg.metrics import d_test
from shapereg.pairwise import StopCriteria


def rotated(c, degrees):
    return transform(c, Pose(np.exp(1j * np.deg2rad(degrees)), 0j))


def test_identity_input_is_exact(template600):
    res = register_icp(template600, template600.copy())
    assert res.converged
    assert res.iterations == 1
    assert res.pose.r == 1.0 + 0.0j
    assert res.pose.t == 0.0 + 0.0j
    assert res.final_mse == 0.0
    assert np.array_equal(res.registered, template600)


def test_small_rotation_recovered(template600):
    res = register_icp(template600, rotated(template600, 5.0), StopCriteria(i_max=200, c_min=1e-10))
    assert res.converged
    err = np.rad2deg(abs(np.angle(res.pose.r) + np.deg2rad(5.0)))
    assert err < 0.1
    # the fit is rigid: no scale leakage even far from convergence
    assert abs(abs(res.pose.r) - 1.0) < 1e-12


def test_centered_small_rotation_recovers_exactly(template600):
    ctr = template600.mean()
    target = np.exp(1j * np.deg2rad(5.0)) * (template600 - ctr) + ctr
    res = register_icp(template600, target, StopCriteria(i_max=200, c_min=1e-10))
    assert np.rad2deg(abs(np.angle(res.pose.r) + np.deg2rad(5.0))) < 1e-6
    assert d_test(template600, res.registered) < 1e-4


def test_large_rotation_stuck_in_local_minimum(template600):
    stop = StopCriteria(i_max=200, c_min=1e-10)
    small = register_icp(template600, rotated(template600, 5.0), stop)
    large = register_icp(template600, rotated(template600, 120.0), stop)
    err = np.rad2deg(abs(np.angle(large.pose.r) + np.deg2rad(120.0)))
    assert err > 10.0
    assert d_test(template600, large.registered) > 5.0 * d_test(template600, small.registered)


def test_mse_trace_is_monotone(template600):
    for deg in (5.0, 120.0):
        res = register_icp(template600, rotated(template600, deg), StopCriteria(i_max=200, c_min=1e-10))
        trace = np.array(res.mse_trace)
        assert len(trace) == res.iterations
        assert res.final_mse == trace[-1]
        assert np.all(np.diff(trace) <= 1e-9)


def test_budget_exhaustion_reports_unconverged(template600):
    res = register_icp(template600, rotated(template600, 120.0), StopCriteria(i_max=3, c_min=1e-12))
    assert res.iterations == 3
    assert not res.converged


def test_unequal_lengths(template600):
    target = rotated(template600, 3.0)[::3]
    res = register_icp(template600, target, StopCriteria(i_max=200, c_min=1e-10))
    assert res.converged
    spacing = float(np.mean(np.abs(np.diff(template600))))
    assert d_test(template600, res.registered) < spacing


def test_degenerate_target_raises():
    ref = np.array([0 + 0j, 1 + 0j, 1 + 1j])
    blob = np.array([5 + 5j, 5 + 5j, 5 + 5j])
    with pytest.raises(SingularSystem):
        register_icp(ref, blob)


def test_result_to_dict(template600):
    res = register_icp(template600, rotated(template600, 2.0), StopCriteria(i_max=50, c_min=1e-10))
    d = res.to_dict()
    assert set(d) == {"pose", "iterations", "converged", "final_mse", "mse_trace"}
    assert d["iterations"] == res.iterations
    assert isinstance(res, IcpResult)
