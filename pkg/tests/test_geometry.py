"""Unit-level geometry: curvature measures, width, rotation, ring closure."""

import math

import pytest

from scissorlab.errors import DomainError, NoClosureError
from scissorlab.geometry import (
    UnitGeometry,
    UnitState,
    closure_actuation,
    curvature_report,
    effective_curvature,
    face_normals,
    osculating_curvature,
    turning_curvature,
    unit_rotation_angle,
    unit_width,
)

U = UnitGeometry(alpha=0.6, l=1.0)
S = UnitState(phi=math.pi / 2)


def test_validation_rejects_out_of_range():
    with pytest.raises(DomainError):
        UnitGeometry(alpha=0.0, l=1.0)
    with pytest.raises(DomainError):
        UnitGeometry(alpha=1.0, l=1.0)
    with pytest.raises(DomainError):
        UnitGeometry(alpha=0.5, l=0.0)
    with pytest.raises(DomainError):
        UnitState(phi=0.0)
    with pytest.raises(DomainError):
        UnitState(phi=math.pi)


def test_effective_curvature_frozen_value():
    # (2a-1) / (2 a (1-a) l sin(phi/2)) at a=0.6, phi=pi/2, l=1
    assert effective_curvature(U, S) == pytest.approx(
        0.5892556509887897, abs=1e-13)


def test_effective_curvature_matches_circumcircle_of_chain_centers():
    # the inverse circumradius of three consecutive centers of a uniform
    # chain is an independent reading of the same curvature
    from oracles import circumcircle_curvature
    from scissorlab.kinematics import ChainSpec, assemble_chain

    for a, psi in [(0.62, 1.3), (0.4, 2.0), (0.55, 0.7), (0.8, 2.4)]:
        cfg = assemble_chain(ChainSpec(alphas=(a,) * 3), psi)
        k_fit = circumcircle_curvature(*cfg.centers)
        k_eff = effective_curvature(UnitGeometry(alpha=a, l=1.0),
                                    UnitState(phi=psi))
        assert k_fit == pytest.approx(k_eff, rel=1e-10)


def test_symmetric_unit_is_straight():
    sym = UnitGeometry(alpha=0.5, l=1.0)
    assert effective_curvature(sym, S) == 0.0
    assert turning_curvature(sym, S) == pytest.approx(0.0, abs=1e-15)
    assert unit_rotation_angle(sym, S) == pytest.approx(0.0, abs=1e-15)
    # the osculating measure deliberately does not vanish at symmetry
    assert osculating_curvature(sym, S) == pytest.approx(
        2.0 * math.tan(math.pi / 4), abs=1e-13)


def test_curvature_signs_follow_pin_offset():
    left = UnitGeometry(alpha=0.7, l=1.0)
    right = UnitGeometry(alpha=0.3, l=1.0)
    assert effective_curvature(left, S) > 0 > effective_curvature(right, S)
    assert turning_curvature(left, S) > 0 > turning_curvature(right, S)
    assert unit_rotation_angle(left, S) > 0 > unit_rotation_angle(right, S)


def test_mirror_antisymmetry():
    # swapping alpha -> 1 - alpha mirrors the unit: curvatures negate
    for a in (0.52, 0.61, 0.85):
        u1 = UnitGeometry(alpha=a, l=1.0)
        u2 = UnitGeometry(alpha=1.0 - a, l=1.0)
        assert effective_curvature(u1, S) == pytest.approx(
            -effective_curvature(u2, S), rel=1e-13)
        assert unit_width(u1, S) == pytest.approx(unit_width(u2, S),
                                                  rel=1e-13)


def test_length_scaling():
    # curvature scales as 1/l, width as l
    u1 = UnitGeometry(alpha=0.6, l=1.0)
    u2 = UnitGeometry(alpha=0.6, l=2.5)
    assert effective_curvature(u1, S) == pytest.approx(
        2.5 * effective_curvature(u2, S), rel=1e-13)
    assert unit_width(u2, S) == pytest.approx(2.5 * unit_width(u1, S),
                                              rel=1e-13)


def test_width_frozen_value_and_phi_limits():
    assert unit_width(U, S) == pytest.approx(0.6788225099390857, abs=1e-13)
    # width shrinks monotonically as the unit folds toward phi = pi
    widths = [unit_width(U, UnitState(phi=p)) for p in (0.5, 1.5, 2.5, 3.1)]
    assert all(a > b for a, b in zip(widths, widths[1:]))


def test_rotation_angle_frozen_value():
    # algebraically 2 arctan((2a-1) tan((pi-phi)/2)) at a=0.6, phi=pi/2
    assert unit_rotation_angle(U, S) == pytest.approx(
        2.0 * math.atan(0.2), abs=1e-12)


def test_turning_and_effective_agree_to_second_order_near_symmetry():
    # both measure bend per length; they coincide as alpha -> 0.5
    phi = 1.2
    for eps in (1e-3, 1e-4):
        u = UnitGeometry(alpha=0.5 + eps, l=1.0)
        kt = turning_curvature(u, UnitState(phi=phi))
        ke = effective_curvature(u, UnitState(phi=phi))
        assert kt == pytest.approx(ke, rel=1e-5)


def test_turning_curvature_frozen_value():
    assert turning_curvature(U, S) == pytest.approx(0.5930998438230545,
                                                    abs=1e-13)


def test_osculating_curvature_frozen_value():
    # tan(phi/2) / ((1-a) l) at a=0.6, phi=pi/2
    assert osculating_curvature(U, S) == pytest.approx(2.5, rel=1e-13)


def test_face_normals_symmetric_unit_are_mirror_images():
    n_e, n_w = face_normals(UnitGeometry(alpha=0.5, l=1.0), S, beta=0.0)
    assert n_e[0] == pytest.approx(n_w[0], abs=1e-15)
    assert n_e[1] == pytest.approx(n_w[1], abs=1e-15)


def test_face_normals_length():
    # |N|^2 = l^2 (a^2 + (1-a)^2 - 2 a (1-a) cos phi) for head-to-tail
    # tangents separated by pi - phi
    a, l, phi = 0.6, 1.3, 1.1
    n_e, n_w = face_normals(UnitGeometry(alpha=a, l=l), UnitState(phi=phi),
                            beta=0.4)
    expect = l * math.sqrt(a * a + (1 - a) ** 2 - 2 * a * (1 - a)
                           * math.cos(phi))
    assert math.hypot(*n_e) == pytest.approx(expect, rel=1e-12)
    assert math.hypot(*n_w) == pytest.approx(expect, rel=1e-12)


def test_report_bundles_the_measures():
    rep = curvature_report(U, S)
    assert rep.kappa_o == effective_curvature(U, S)
    assert rep.kappa_t == turning_curvature(U, S)
    assert rep.kappa_osc == osculating_curvature(U, S)
    assert rep.width == unit_width(U, S)


def test_closure_actuation_frozen_value():
    assert closure_actuation(0.6, 10) == pytest.approx(1.1035305814657737,
                                                       abs=1e-12)


def test_closure_rejects_non_closing_chains():
    with pytest.raises(NoClosureError):
        closure_actuation(0.5, 10)
    with pytest.raises(NoClosureError):
        closure_actuation(0.4, 10)
    with pytest.raises(DomainError):
        closure_actuation(0.6, 2)


def test_closure_angle_grows_with_chain_size():
    angles = [closure_actuation(0.7, n) for n in (4, 8, 16, 64)]
    assert all(a < b for a, b in zip(angles, angles[1:]))
    # psi* = 2 arctan((2a-1)/tan(pi/N)) approaches pi from below
    assert angles[-1] < math.pi
