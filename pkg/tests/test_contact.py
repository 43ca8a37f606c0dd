import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dualpih.contact import (
    HOLE,
    PEG,
    ContactBlowUp,
    ContactParams,
    ContactPoint,
    HoleGeometry,
    PegGeometry,
    PlanarContactModel,
    clearance,
    contact_wrench,
    detect_contacts,
)
from dualpih.frames import Pose6, Twist

MODEL = PlanarContactModel(PegGeometry(), HoleGeometry())


def test_default_clearance_is_quarter_millimetre_diametral():
    assert math.isclose(2 * clearance(PegGeometry(), HoleGeometry()), 0.0005, rel_tol=1e-9)


def test_mouth_corner_oracle():
    # Peg shifted onto the left block with its tip 0.1 mm below the mouth plane:
    # only the inner mouth corner is inside the peg, 0.1 mm deep, pushing the peg back.
    out = MODEL.contacts((-0.030, 1e-4, 0.0), (0.0, 0.0, 0.0))
    assert len(out) == 1
    x, z, nx, nz, pen, kind = out[0]
    assert kind == HOLE
    assert (x, z) == pytest.approx((-0.01675, 0.0))
    assert (nx, nz) == pytest.approx((0.0, -1.0))
    assert pen == pytest.approx(1e-4)


def test_bottom_contact_oracle():
    # Peg tip 0.5 mm past the hole bottom: both tip vertices hit it.
    out = MODEL.contacts((0.0, 0.0705, 0.0), (0.0, 0.0, 0.0))
    assert sorted(round(c[0], 6) for c in out) == [-0.0145, 0.0145]
    for _, z, nx, nz, pen, kind in out:
        assert kind == PEG
        assert (nx, nz, pen) == pytest.approx((0.0, -1.0, 5e-4))


@given(st.floats(-0.0002, 0.0002), st.floats(-0.02, 0.06))
def test_centred_upright_peg_inside_clearance_is_contact_free(x, z):
    assert MODEL.contacts((x, z, 0.0), (0.0, 0.0, 0.0)) == []


def test_contacts_move_with_the_hole():
    a = MODEL.contacts((-0.030, 1e-4, 0.0), (0.0, 0.0, 0.0))
    b = MODEL.contacts((-0.030 + 0.01, 1e-4 - 0.02, 0.0), (0.01, -0.02, 0.0))
    assert np.allclose(np.array(a[0][:5]) + [0.01, -0.02, 0, 0, 0], b[0][:5])


def test_blowup_raises():
    model = PlanarContactModel(PegGeometry(), HoleGeometry())
    model.blowup = 5e-5
    with pytest.raises(ContactBlowUp):
        model.contacts((-0.030, 1e-4, 0.0), (0.0, 0.0, 0.0))


def test_detect_contacts_normal_points_into_peg_body_direction():
    pts = detect_contacts(Pose6.from_planar(-0.030, 1e-4, 0.0), Pose6(), PegGeometry(), HoleGeometry())
    assert len(pts) == 1
    # HOLE kind: the corner penetrates the peg, so the normal is the peg's outward normal
    assert pts[0].penetrating == HOLE
    assert np.allclose(pts[0].normal, [0.0, 0.0, 1.0])


def test_detect_contacts_rejects_out_of_plane_pose():
    with pytest.raises(ValueError):
        detect_contacts(Pose6.translation(y=0.01), Pose6(), PegGeometry(), HoleGeometry())


def test_relative_velocity_uses_point_velocity():
    peg = Pose6.from_planar(0.0, 0.0705, 0.0)
    pts = detect_contacts(peg, Pose6(), PegGeometry(), HoleGeometry(), peg_twist=Twist([0.0, 0.0, 0.001], [0.0, 0.1, 0.0]))
    for c in pts:
        r = c.location - peg.position
        assert np.allclose(c.relative_velocity, np.array([0.0, 0.0, 0.001]) + np.cross([0.0, 0.1, 0.0], r))


def test_contact_wrench_static_penalty():
    c = ContactPoint([0, 0, 0], [0, 0, -1], 1e-4)
    w = contact_wrench(c, ContactParams())
    assert np.allclose(w.force, [0.0, 0.0, -50.0])


@given(st.floats(1e-6, 1e-3), st.floats(-0.05, 0.05).filter(lambda v: v == 0 or abs(v) > 1e-9), st.floats(-0.01, 0.01))
def test_contact_wrench_stays_in_friction_cone_and_never_pulls(pen, vt, vn):
    p = ContactParams()
    c = ContactPoint([0, 0, 0], [0, 0, 1], pen, relative_velocity=[vt, 0.0, vn])
    f = contact_wrench(c, p).force
    assert f[2] >= 0.0
    assert abs(f[0]) <= p.friction_mu * f[2] + 1e-12
    if vt != 0.0 and f[2] > 0:
        assert np.sign(f[0]) == -np.sign(vt)


def test_invalid_geometry_rejected():
    with pytest.raises(ValueError):
        PegGeometry(tip_chamfer=0.02)
    with pytest.raises(ValueError):
        HoleGeometry(block_extent=0.01)
    with pytest.raises(ValueError):
        ContactParams(friction_mu=-1)
    with pytest.raises(ValueError):
        ContactPoint([0, 0, 0], [0, 0, 1], -1.0)


def test_peg_kind_constant():
    assert PEG != HOLE


def test_contact_wrench_spec_examples():
    assert np.allclose(contact_wrench(ContactPoint([0, 0, 0], [0, 0, 1], 0.0), ContactParams()).as_vector(), 0.0)
    c = ContactPoint([0, 0, 0], [0, 0, 1], 1e-4, relative_velocity=[0.01, 0.0, 0.0])
    f0 = contact_wrench(c, ContactParams(friction_mu=0.0)).force
    assert np.allclose(f0[:2], 0.0)
    p = ContactParams(stiffness=1e5, friction_mu=0.3)
    c = ContactPoint([0, 0, 0], [0, 0, 1], 1e-4, relative_velocity=[10 * p.friction_vel_eps, 0.0, 0.0])
    f = contact_wrench(c, p).force
    assert f[2] == pytest.approx(10.0)
    assert abs(f[0]) == pytest.approx(0.3 * 10.0 * math.tanh(10.0))


def test_separated_and_centred_pegs():
    # tip 1 mm above the block surface
    assert MODEL.contacts((-0.03, -0.001, 0.0), (0.0, 0.0, 0.0)) == []
    # aligned, centred, half inserted: no contact inside the clearance
    assert MODEL.contacts((0.0, 0.035, 0.0), (0.0, 0.0, 0.0)) == []
