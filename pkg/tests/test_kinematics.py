"""Chain assembly, closed-form sectioned tips, sweeps, perturbative route."""

import math

import numpy as np
import pytest

from oracles import pin_chain
from scissorlab.errors import DomainError, InfeasibleAssemblyError
from scissorlab.kinematics import (
    ChainSpec,
    SectionedSpec,
    assemble_chain,
    center_shift,
    perturbative_config,
    propagate_angles,
    sweep_tip,
    tip_segmented,
)


def _dist(p, q):
    return math.hypot(p[0] - q[0], p[1] - q[1])


# ===== validation =====


def test_spec_validation():
    with pytest.raises(DomainError):
        ChainSpec(alphas=())
    with pytest.raises(DomainError):
        ChainSpec(alphas=(0.5, 1.2))
    with pytest.raises(DomainError):
        ChainSpec(alphas=(0.5,), l=-1.0)
    with pytest.raises(DomainError):
        assemble_chain(ChainSpec(alphas=(0.6,)), psi=0.0)
    with pytest.raises(DomainError):
        assemble_chain(ChainSpec(alphas=(0.6,)), psi=math.pi)


def test_sectioned_spec_expands_to_chain():
    spec = SectionedSpec(sections=((2, 0.6), (3, 0.45)), l=1.2)
    assert spec.n_units == 5
    chain = spec.as_chain_spec()
    assert chain.alphas == (0.6, 0.6, 0.45, 0.45, 0.45)
    assert chain.l == 1.2


# ===== angle propagation =====


def test_first_angle_is_the_actuation_angle():
    phis = propagate_angles((0.6, 0.5, 0.4), 1.3)
    assert phis[0] == 1.3


def test_propagation_preserves_shared_diagonal():
    # h_j cos^2(phi_j / 2) is one constant along the chain
    alphas = (0.6, 0.55, 0.48, 0.52, 0.7, 0.5)
    phis = propagate_angles(alphas, 1.1)
    const = [a * (1 - a) * math.cos(p / 2) ** 2
             for a, p in zip(alphas, phis)]
    assert max(const) - min(const) < 1e-15


def test_uniform_chain_keeps_its_angle():
    phis = propagate_angles((0.62,) * 8, 0.9)
    assert all(p == pytest.approx(0.9, abs=1e-14) for p in phis)


def test_propagation_raises_when_a_unit_cannot_span_the_diagonal():
    # moving from a centered pin to a far-off-center one shrinks h fivefold;
    # at a small angle the second unit cannot open wide enough
    with pytest.raises(InfeasibleAssemblyError):
        propagate_angles((0.5, 0.9), 0.5)


# ===== exact assembly versus the pin oracle =====


def test_assembly_matches_pin_construction_on_random_chains():
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 50:
        n = int(rng.integers(2, 25))
        alphas = tuple(rng.uniform(0.2, 0.8, n))
        psi = float(rng.uniform(0.3, 2.8))
        l = float(rng.uniform(0.3, 2.0))
        base_angle = float(rng.uniform(-3, 3))
        base_position = tuple(rng.uniform(-2, 2, 2))
        try:
            cfg = assemble_chain(
                ChainSpec(alphas=alphas, l=l, base_position=base_position,
                          base_angle=base_angle), psi)
        except InfeasibleAssemblyError:
            continue
        oracle = pin_chain(alphas, psi, l=l, base_position=base_position,
                           base_angle=base_angle)
        assert max(_dist(a, b) for a, b in zip(cfg.centers, oracle)) < 1e-12
        checked += 1


def test_assembly_frozen_tip():
    # value from the complex pin-construction oracle (tests/oracles.py)
    cfg = assemble_chain(
        ChainSpec(alphas=(0.6, 0.55, 0.48, 0.52, 0.7, 0.5), l=0.8), 1.1)
    assert cfg.centers[-1][0] == pytest.approx(2.074174976944783, abs=1e-12)
    assert cfg.centers[-1][1] == pytest.approx(1.977168010016639, abs=1e-12)


def test_orientation_gap_equals_internal_angle():
    cfg = assemble_chain(
        ChainSpec(alphas=(0.6, 0.55, 0.48, 0.52, 0.7, 0.5)), 1.1)
    for (lo, hi), phi in zip(cfg.orientations, cfg.phis):
        assert hi - lo == pytest.approx(phi, abs=1e-14)


def test_uniform_chain_centers_lie_on_one_circle():
    a, psi = 0.64, 1.2
    cfg = assemble_chain(ChainSpec(alphas=(a,) * 12), psi)
    # fit the circle through the first three centers, check the rest
    from oracles import circumcircle_curvature

    k = circumcircle_curvature(*cfg.centers[:3])
    r = 1.0 / abs(k)
    p0, p1 = cfg.centers[0], cfg.centers[1]
    # circle center: perpendicular from the first chord midpoint
    mx, my = (p0[0] + p1[0]) / 2, (p0[1] + p1[1]) / 2
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    d = math.hypot(dx, dy)
    off = math.sqrt(r * r - (d / 2) ** 2) * math.copysign(1.0, k)
    cx, cy = mx - off * dy / d, my + off * dx / d
    for p in cfg.centers:
        assert _dist(p, (cx, cy)) == pytest.approx(r, rel=1e-10)


def test_rigid_equivariance_of_base_pose():
    alphas = (0.6, 0.45, 0.52)
    psi = 1.0
    plain = assemble_chain(ChainSpec(alphas=alphas), psi)
    rot, tx, ty = 0.7, 1.5, -0.3
    moved = assemble_chain(
        ChainSpec(alphas=alphas, base_position=(tx, ty), base_angle=rot),
        psi)
    c, s = math.cos(rot), math.sin(rot)
    for p, q in zip(plain.centers, moved.centers):
        ex = tx + c * p[0] - s * p[1]
        ey = ty + s * p[0] + c * p[1]
        assert q[0] == pytest.approx(ex, abs=1e-12)
        assert q[1] == pytest.approx(ey, abs=1e-12)


# ===== center shift across an interface =====


def test_center_shift_frozen_value():
    assert center_shift(0.6, 0.4, math.pi / 2) == pytest.approx(
        -3.6055512754639896, abs=1e-12)


def test_center_shift_rejects_straight_sections():
    with pytest.raises(DomainError):
        center_shift(0.5, 0.6, 1.0)
    with pytest.raises(DomainError):
        center_shift(0.6, 0.5, 1.0)


def test_center_shift_antisymmetric_under_section_swap():
    a, b, phi_a = 0.6, 0.7, 1.3
    # downstream angle from the shared-diagonal constraint
    phi_b = propagate_angles((a, b), phi_a)[1]
    z_ab = center_shift(a, b, phi_a)
    z_ba = center_shift(b, a, phi_b)
    assert z_ab == pytest.approx(-z_ba, rel=1e-12)


def test_center_shift_measures_actual_arc_center_jump():
    # assemble a two-section chain and compare the fitted circle centers
    from oracles import circumcircle_curvature

    a, b, psi, l = 0.62, 0.7, 1.2, 1.0
    spec = SectionedSpec(sections=((4, a), (4, b)), l=l)
    cfg = assemble_chain(spec.as_chain_spec(), psi)

    def circle_center(p0, p1, p2):
        k = circumcircle_curvature(p0, p1, p2)
        r = 1.0 / abs(k)
        mx, my = (p0[0] + p1[0]) / 2, (p0[1] + p1[1]) / 2
        dx, dy = p1[0] - p0[0], p1[1] - p0[1]
        d = math.hypot(dx, dy)
        off = math.sqrt(r * r - (d / 2) ** 2) * math.copysign(1.0, k)
        return (mx - off * dy / d, my + off * dx / d)

    c1 = circle_center(*cfg.centers[:3])
    c2 = circle_center(*cfg.centers[-3:])
    phi_a = cfg.phis[3]
    assert _dist(c1, c2) == pytest.approx(
        abs(center_shift(a, b, phi_a, l=l)), rel=1e-9)


# ===== closed-form sectioned tip =====


def test_segmented_tip_matches_full_assembly():
    rng = np.random.default_rng(11)
    checked = 0
    while checked < 40:
        n_sections = int(rng.integers(1, 5))
        sections = tuple((int(rng.integers(1, 9)),
                          float(rng.uniform(0.25, 0.75)))
                         for _ in range(n_sections))
        if sum(n for n, _ in sections) < 2:
            continue
        l = float(rng.uniform(0.4, 1.6))
        psi = float(rng.uniform(0.3, 2.8))
        spec = SectionedSpec(sections=sections, l=l)
        try:
            tip = tip_segmented(spec, psi)
        except InfeasibleAssemblyError:
            continue
        cfg = assemble_chain(spec.as_chain_spec(), psi)
        assert _dist(tip, cfg.centers[-1]) < 1e-9 * l
        checked += 1


def test_segmented_tip_straight_section_degenerates_smoothly():
    # alpha exactly 0.5: the geometric sum becomes a straight translation
    spec = SectionedSpec(sections=((6, 0.5),), l=1.0)
    tip = tip_segmented(spec, 1.0)
    cfg = assemble_chain(spec.as_chain_spec(), 1.0)
    assert _dist(tip, cfg.centers[-1]) < 1e-12


def test_segmented_tip_names_the_infeasible_section():
    spec = SectionedSpec(sections=((2, 0.5), (2, 0.9)), l=1.0)
    with pytest.raises(InfeasibleAssemblyError, match="section 1"):
        tip_segmented(spec, 0.5)


# ===== actuation sweeps =====


def test_sweep_grid_is_uniform_and_descending():
    spec = SectionedSpec(sections=((3, 0.55),), l=1.0)
    traj = sweep_tip(spec, 2.5, 0.5, 21)
    grid = traj.psi_grid
    assert grid[0] == 2.5 and grid[-1] == 0.5
    steps = [a - b for a, b in zip(grid, grid[1:])]
    assert all(s == pytest.approx(steps[0], abs=1e-12) for s in steps)


def test_sweep_points_match_pointwise_tips():
    spec = SectionedSpec(sections=((2, 0.6), (3, 0.5)), l=0.9)
    traj = sweep_tip(spec, 2.0, 0.8, 7)
    for psi, p in zip(traj.psi_grid, traj.points):
        assert _dist(p, tip_segmented(spec, psi)) < 1e-12


def test_sweep_validation():
    spec = SectionedSpec(sections=((2, 0.6),), l=1.0)
    with pytest.raises(DomainError):
        sweep_tip(spec, 2.0, 0.8, 1)
    with pytest.raises(DomainError):
        sweep_tip(spec, 0.8, 2.0, 5)


# ===== perturbative configuration =====


def test_perturbative_exact_at_zero_increment():
    exact = assemble_chain(ChainSpec(alphas=(0.52,) * 10), 1.0)
    approx = perturbative_config(0.52, 0.0, 10, 1.0)
    err = max(_dist(a, b)
              for a, b in zip(exact.centers, approx.centers))
    assert err < 1e-12


@pytest.mark.parametrize("psi", [math.pi / 4, 3 * math.pi / 4])
def test_perturbative_error_is_second_order(psi):
    def maxerr(eps):
        alphas = tuple(0.52 + eps * j for j in range(12))
        exact = assemble_chain(ChainSpec(alphas=alphas), psi)
        approx = perturbative_config(0.52, eps, 12, psi)
        return max(_dist(a, b)
                   for a, b in zip(exact.centers, approx.centers))

    e1, e2, e4 = maxerr(1e-4), maxerr(2e-4), maxerr(4e-4)
    assert e2 / e1 == pytest.approx(4.0, rel=0.1)
    assert e4 / e2 == pytest.approx(4.0, rel=0.1)
