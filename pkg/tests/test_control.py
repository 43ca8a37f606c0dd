import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dualpih.control import (
    COMPLIANT_D_F,
    K_F_STIFF,
    MASTER,
    SLAVE,
    TOOLTIP,
    WRIST,
    ControllerState,
    StiffnessSpec,
    clamp_commanded_wrench,
    coc_offset,
    coc_pose,
    critical_damping,
    feedforward_step,
    impedance_wrench,
)
from dualpih.frames import Pose6, Twist, UnitDir, Wrench, rot_y


def test_from_masks_zeroes_compliant_axes():
    s = StiffnessSpec.from_masks((True, False, False), (False, True, False))
    assert np.allclose(np.diag(s.K_f), [0.0, K_F_STIFF, K_F_STIFF])
    assert s.K_theta[1, 1] == 0.0
    assert s.D_f[0, 0] == COMPLIANT_D_F
    assert math.isclose(s.D_f[1, 1], critical_damping(K_F_STIFF, 2.0))
    assert s.compliant_mask() == ((True, False, False), (False, True, False))
    assert not s.is_fully_stiff()
    assert StiffnessSpec.stiff().is_fully_stiff()


def test_from_axes_matches_from_masks_on_coordinate_axes():
    a = StiffnessSpec.from_axes([[1, 0, 0]], [[0, 1, 0]])
    b = StiffnessSpec.from_masks((True, False, False), (False, True, False))
    for name in ("K_f", "K_theta", "D_f", "D_theta"):
        assert np.allclose(getattr(a, name), getattr(b, name))


@given(st.floats(-math.pi, math.pi))
def test_from_axes_oblique_axis_is_exactly_compliant(phi):
    ax = np.array([math.cos(phi), 0.0, math.sin(phi)])
    s = StiffnessSpec.from_axes([ax])
    assert np.allclose(s.K_f @ ax, 0.0, atol=1e-9)
    perp = np.cross(ax, [0.0, 1.0, 0.0])
    assert np.allclose(s.K_f @ perp, K_F_STIFF * perp)


def test_from_axes_rejects_non_orthonormal():
    with pytest.raises(ValueError):
        StiffnessSpec.from_axes([[1, 0, 0], [1, 1, 0]])


def test_spec_validation():
    with pytest.raises(ValueError):
        StiffnessSpec(np.diag([-1.0, 1, 1]), np.eye(3), np.eye(3), np.eye(3))
    with pytest.raises(ValueError):
        StiffnessSpec(np.eye(3), np.eye(3), np.zeros((3, 3)), np.eye(3))
    with pytest.raises(ValueError):
        StiffnessSpec(np.array([[1, 1, 0], [0, 1, 0], [0, 0, 1.0]]), np.eye(3), np.eye(3), np.eye(3))


def test_impedance_oracle_rotated_frame():
    """Hand-computed: CoC rotated 90 deg about y, compliant along its own x."""
    s = StiffnessSpec.from_masks((True, False, False))
    cur = Pose6([0, 0, 0], [math.cos(math.pi / 4), 0, math.sin(math.pi / 4), 0])
    # CoC x axis points along world -z after +90 deg about y
    assert np.allclose(cur.rotation @ [1, 0, 0], [0, 0, -1])
    st_ = ControllerState(Pose6([0.001, 0.0, 0.002], cur.quat), UnitDir([0, 0, 1]), 0.0, 1e-3)
    w = impedance_wrench(st_, s, cur, Twist())
    # world z is the compliant CoC x axis: no force; world x is stiff
    assert np.allclose(w.force, [1.0, 0.0, 0.0])
    assert np.allclose(w.torque, 0.0)


def test_impedance_damping_opposes_velocity():
    s = StiffnessSpec.stiff()
    st_ = ControllerState(Pose6(), UnitDir([0, 0, 1]), 0.0, 1e-3)
    w = impedance_wrench(st_, s, Pose6(), Twist([0.01, 0, 0], [0, 0.1, 0]))
    assert w.force[0] < 0 and w.torque[1] < 0


def test_impedance_rotation_error():
    s = StiffnessSpec.stiff()
    st_ = ControllerState(Pose6.from_planar(0, 0, 0.1), UnitDir([0, 0, 1]), 0.0, 1e-3)
    w = impedance_wrench(st_, s, Pose6(), Twist())
    assert np.allclose(w.torque, [0.0, 30.0 * 0.1, 0.0])


def test_feedforward_advances_target():
    st_ = ControllerState(Pose6(), UnitDir([0, 0, 1]), 0.005, 1e-3)
    for _ in range(1000):
        st_ = feedforward_step(st_)
    assert np.allclose(st_.target.position, [0, 0, 0.005])
    with pytest.raises(ValueError):
        feedforward_step(ControllerState(Pose6(), UnitDir([0, 0, 1]), 0.0, 1e-3, SLAVE))


def test_controller_state_validation():
    with pytest.raises(ValueError):
        ControllerState(Pose6(), UnitDir([0, 0, 1]), 0.01, 1e-3, SLAVE)
    with pytest.raises(ValueError):
        ControllerState(Pose6(), UnitDir([0, 0, 1]), -1.0, 1e-3, MASTER)
    with pytest.raises(ValueError):
        ControllerState(Pose6(), UnitDir([0, 0, 1]), 0.0, 0.0)


@given(st.floats(0, 100).filter(lambda v: v == 0 or v > 1e-9), st.floats(0, 10))
def test_clamp_respects_limits_and_direction(fs, ts):
    w = Wrench([fs, 0, -fs], [0, ts, 0])
    c = clamp_commanded_wrench(w, 30.0, 3.0)
    assert np.linalg.norm(c.force) <= 30.0 + 1e-9
    assert np.linalg.norm(c.torque) <= 3.0 + 1e-9
    if fs > 0:
        assert np.allclose(c.force / np.linalg.norm(c.force), w.force / np.linalg.norm(w.force))


def test_coc_choices():
    off = Pose6.translation(z=0.08)
    assert coc_offset(WRIST, off).allclose(Pose6())
    assert coc_offset(TOOLTIP, off).allclose(off)
    wrist = Pose6.from_matrix(rot_y(0.2), [0.1, 0, 0.0])
    assert np.allclose(coc_pose(wrist, TOOLTIP, off).position, [0.1 + 0.08 * math.sin(0.2), 0, 0.08 * math.cos(0.2)])
    with pytest.raises(ValueError):
        coc_offset("elbow", off)


def test_feedforward_spec_examples():
    s = ControllerState(Pose6(), UnitDir([0, 0, 1]), 0.0, 1e-3)
    assert feedforward_step(s).target.allclose(Pose6())
    s = ControllerState(Pose6(), UnitDir([0, 0, 1]), 0.01, 1e-3)
    assert np.allclose(feedforward_step(s).target.position, [0, 0, 1e-5])


def test_impedance_spec_examples():
    spec = StiffnessSpec(np.diag([500.0] * 3), np.diag([30.0] * 3), np.eye(3), np.eye(3))
    s = ControllerState(Pose6([0.01, 0, 0]), UnitDir([0, 0, 1]), 0.0, 1e-3)
    assert np.allclose(impedance_wrench(s, spec, Pose6(), Twist()).force, [5.0, 0, 0])
    at = ControllerState(Pose6(), UnitDir([0, 0, 1]), 0.0, 1e-3)
    assert np.allclose(impedance_wrench(at, spec, Pose6(), Twist()).as_vector(), 0.0)
    comp = StiffnessSpec.from_masks((True, False, False))
    assert np.allclose(impedance_wrench(s, comp, Pose6(), Twist()).as_vector(), 0.0)


def test_clamp_spec_examples():
    w = Wrench([1.0, 0, 0], [0, 0.1, 0])
    assert np.allclose(clamp_commanded_wrench(w, 50.0, 5.0).as_vector(), w.as_vector())
    assert np.allclose(clamp_commanded_wrench(Wrench([100.0, 0, 0], [0, 0, 0]), 50.0, 5.0).force, [50.0, 0, 0])
