"""Inverse design: transforms, losses, Adam runs, grid search, alignment."""

import dataclasses
import math

import numpy as np
import pytest

from scissorlab.errors import DomainError
from scissorlab.kinematics import SectionedSpec, propagate_angles, tip_segmented
from scissorlab.optimize import (
    GridSearchResult,
    MorphProblem,
    OptimizerConfig,
    RunResult,
    WriteProblem,
    align_rigid,
    grid_search,
    morph_loss,
    solve_morph,
    solve_write,
    trajectory_stations,
    transform_params,
    write_loss,
)
from scissorlab.autodiff import ParamVector
from scissorlab.targets import ArcLengthProfile, analytic_targets, \
    arclength_parameterize


def _logit(u):
    return math.log(u / (1.0 - u))


def circle_profile(m, r=1.0):
    """Exact unit-arc-length circle profile (no resampling error)."""
    s = np.linspace(0.0, 2.0 * math.pi * r, m + 1)
    th = s / r
    return ArcLengthProfile(
        s_grid=tuple(s), kappa=(1.0 / r,) * (m + 1),
        nodes=tuple(zip(r * np.cos(th), r * np.sin(th))),
        total_length=2.0 * math.pi * r, initial_tangent=math.pi / 2,
        closed=True)


def line_profile(m, length=1.0):
    s = np.linspace(0.0, length, m + 1)
    return ArcLengthProfile(
        s_grid=tuple(s), kappa=(0.0,) * (m + 1),
        nodes=tuple(zip(s, np.zeros(m + 1))),
        total_length=length, initial_tangent=0.0)


def arc_profile(m, r=1.0, span=0.5 * math.pi):
    """Open circular arc: unlike a full circle, the tip target is away
    from the base, so the loss has an exact interior optimum."""
    s = np.linspace(0.0, span * r, m + 1)
    th = s / r
    return ArcLengthProfile(
        s_grid=tuple(s), kappa=(1.0 / r,) * (m + 1),
        nodes=tuple(zip(r * np.cos(th), r * np.sin(th))),
        total_length=span * r, initial_tangent=math.pi / 2)


# ===== Parameter transform =====


def test_transform_trivial_points():
    pv = ParamVector(("alpha_0", "l", "psi", "beta0"), (0.0, 0.0, 0.0, 0.7))
    out = transform_params(pv, (0.1, 0.9))
    assert out["alpha_0"] == pytest.approx(0.5, abs=1e-15)
    assert out["l"] == pytest.approx(1.0, abs=1e-15)
    assert out["psi"] == pytest.approx(math.pi / 2, abs=1e-12)
    assert out["beta0"] == 0.7


def test_transform_psi_range_decodes_jointly():
    pv = ParamVector(("psi_max", "psi_min"), (0.0, 0.0))
    out = transform_params(pv, (0.1, 0.9))
    assert out["psi_max"] == pytest.approx(0.2 + (math.pi - 0.3) / 2)
    assert out["psi_min"] == pytest.approx(0.5 * out["psi_max"])
    with pytest.raises(DomainError):
        transform_params(ParamVector(("psi_min",), (0.0,)), (0.1, 0.9))


def test_transform_respects_bounds_at_extremes():
    names = ("alpha_0", "alpha_1", "l", "psi", "psi_max", "psi_min")
    for raw in (-40.0, -3.0, 0.0, 3.0, 40.0):
        out = transform_params(ParamVector(names, (raw,) * len(names)),
                               (0.2, 0.8))
        assert 0.2 <= out["alpha_0"] <= 0.8
        assert out["l"] > 0.0
        assert 0.0 < out["psi"] < math.pi
        assert math.pi > out["psi_max"] > out["psi_min"] > 0.0


# ===== Loss functions =====


def test_morph_loss_zero_at_exact_straight_design():
    n = 8
    prob = MorphProblem(target=line_profile(n), n_units=n)
    psi = math.pi / 2
    l = 1.0 / ((n - 1) * math.cos(0.5 * psi))
    raw = ParamVector(prob.param_names,
                      (math.log(l), 0.0, 0.0) + (0.0,) * n)
    assert morph_loss(raw, prob) < 1e-12


def test_morph_curvature_term_zero_at_exact_circle_design():
    # alpha chosen so the uniform chain's curvature equals the target's
    n, psi, l = 10, math.pi / 2, 0.3
    u = (math.sqrt(1.0 + (l * math.sin(0.5 * psi)) ** 2) - 1.0) \
        / (l * math.sin(0.5 * psi))
    a = 0.5 * (1.0 + u)
    prob = MorphProblem(target=circle_profile(n), n_units=n,
                        weights=(1.0, 0.0, 0.0))
    raw = ParamVector(prob.param_names,
                      (math.log(l), _logit((psi - 0.1) / (math.pi - 0.2)),
                       math.pi / 2) + (_logit((a - 0.1) / 0.8),) * n)
    assert morph_loss(raw, prob) < 1e-24


def test_morph_loss_checks_param_names():
    prob = MorphProblem(target=line_profile(4), n_units=4)
    with pytest.raises(DomainError):
        morph_loss(ParamVector(("l", "psi"), (0.0, 0.0)), prob)


def test_write_loss_reduces_to_plain_curvature_mismatch():
    # with all three regularizer weights zero the loss must equal the
    # mismatch rebuilt from public pieces: sweep tips, nonuniform
    # three-point stencils, pinned linear interpolation, length rescale
    prob = WriteProblem(target=arclength_parameterize(
        analytic_targets("circle"), 20), sections=3, units_per_section=2,
        weights=(0.0, 0.0, 0.0), n_psi_samples=24, psi_range=(3.0, 0.8))
    raw = ParamVector(prob.param_names, (0.3, -0.4, 0.6, -0.2))
    got = write_loss(raw, prob)
    assert got < 1e6  # feasible everywhere along this sweep

    t = transform_params(raw, prob.bounds)
    spec = SectionedSpec(sections=tuple(
        (2, t[f"alpha_{j}"]) for j in range(3)), l=t["l"])
    hi, lo = prob.psi_range
    psis = [hi - k * (hi - lo) / 23 for k in range(24)]
    pts = np.array([tip_segmented(spec, p) for p in psis])
    ds = np.sqrt(np.maximum(np.sum(np.diff(pts, axis=0) ** 2, axis=1),
                            1e-24))
    s = np.concatenate([[0.0], np.cumsum(ds)])

    def lagrange_derivs(f, i):
        j = min(max(i, 1), len(s) - 2)
        s0, s1, s2 = s[j - 1], s[j], s[j + 1]
        x = s[i]
        d1 = (f[j - 1] * (2 * x - s1 - s2) / ((s0 - s1) * (s0 - s2))
              + f[j] * (2 * x - s0 - s2) / ((s1 - s0) * (s1 - s2))
              + f[j + 1] * (2 * x - s0 - s1) / ((s2 - s0) * (s2 - s1)))
        d2 = 2.0 * (f[j - 1] / ((s0 - s1) * (s0 - s2))
                    + f[j] / ((s1 - s0) * (s1 - s2))
                    + f[j + 1] / ((s2 - s0) * (s2 - s1)))
        return d1, d2

    kap = []
    for i in range(24):
        x1, x2 = lagrange_derivs(pts[:, 0], i)
        y1, y2 = lagrange_derivs(pts[:, 1], i)
        sp2 = x1 * x1 + y1 * y1 + 1e-24
        kap.append((x1 * y2 - y1 * x2) / sp2 ** 1.5)
    length = s[-1]
    scale = length / prob.target.total_length
    tilde = np.interp(np.linspace(0.0, 1.0, 21), s / length, kap) * scale
    expected = float(np.sum((tilde - np.asarray(prob.target.kappa)) ** 2))
    assert got == pytest.approx(expected, rel=1e-12)


def test_write_steric_hinge_activates():
    target = arclength_parameterize(analytic_targets("circle"), 20)
    kw = dict(target=target, sections=2, units_per_section=1,
              n_psi_samples=16, psi_range=(3.0, 0.5), phi_min=1.0)
    base = WriteProblem(weights=(0.0, 0.0, 0.0), **kw)
    hinged = WriteProblem(weights=(0.0, 0.0, 1.0), **kw)
    raw = ParamVector(base.param_names, (0.2, -0.3, 0.1))
    t = transform_params(raw, base.bounds)
    alphas = (t["alpha_0"], t["alpha_1"])
    steric = 0.0
    for k in range(16):
        psi_k = 3.0 - k * 2.5 / 15
        for phi in propagate_angles(alphas, psi_k):
            steric += max(0.0, 1.0 - phi) ** 2
    assert steric > 0.0
    assert write_loss(raw, hinged) == pytest.approx(
        write_loss(raw, base) + steric, rel=1e-12)


def test_write_loss_penalizes_infeasible_sweep():
    # ratios far apart make the small-psi end of the sweep unreachable
    prob = WriteProblem(target=arclength_parameterize(
        analytic_targets("circle"), 20), sections=2, units_per_section=1,
        n_psi_samples=16, psi_range=(3.0, 0.3))
    raw = ParamVector(prob.param_names, (0.0, -30.0, 0.0))
    assert write_loss(raw, prob) >= 1e6


# ===== Problem validation =====


def test_problem_validation():
    prof = line_profile(6)
    with pytest.raises(DomainError):
        MorphProblem(target=prof, n_units=4)  # station count mismatch
    with pytest.raises(DomainError):
        MorphProblem(target=line_profile(4), n_units=4, weights=(1.0, 1.0))
    with pytest.raises(DomainError):
        MorphProblem(target=line_profile(4), n_units=4, bounds=(0.6, 0.9))
    with pytest.raises(DomainError):
        WriteProblem(target=prof, sections=1, units_per_section=1)
    with pytest.raises(DomainError):
        WriteProblem(target=prof, sections=2, psi_range=(0.3, 3.0))
    with pytest.raises(DomainError):
        WriteProblem(target=prof, sections=2, n_psi_samples=4)
    with pytest.raises(DomainError):
        WriteProblem(target=prof, sections=2, phi_min=0.0)


def test_optimizer_config_validation():
    with pytest.raises(DomainError):
        OptimizerConfig(learning_rate=0.0)
    with pytest.raises(DomainError):
        OptimizerConfig(beta1=1.0)
    with pytest.raises(DomainError):
        OptimizerConfig(max_iterations=0)
    with pytest.raises(DomainError):
        OptimizerConfig(patience=0)


# ===== Solver behavior =====


def test_solve_morph_is_deterministic():
    prob = MorphProblem(target=circle_profile(6), n_units=6)
    cfg = OptimizerConfig(max_iterations=300, seed=3)
    a = solve_morph(prob, cfg)
    b = solve_morph(prob, cfg)
    assert a.loss == b.loss
    assert a.iterations == b.iterations
    assert tuple(a.raw.values) == tuple(b.raw.values)


def test_solve_morph_decodes_within_bounds():
    prob = MorphProblem(target=circle_profile(6), n_units=6,
                        bounds=(0.2, 0.8))
    res = solve_morph(prob, OptimizerConfig(max_iterations=120, seed=1))
    assert math.isfinite(res.loss)
    assert res.trace
    for j in range(6):
        assert 0.2 <= res.params[f"alpha_{j}"] <= 0.8
    assert 0.0 < res.params["psi"] < math.pi
    assert res.params["l"] > 0.0
    # params are exactly the decoded raw vector
    dec = transform_params(res.raw, prob.bounds)
    assert tuple(dec.values) == tuple(res.params.values)


def test_solve_checks_init_names():
    prob = MorphProblem(target=circle_profile(4), n_units=4)
    with pytest.raises(DomainError):
        solve_morph(prob, init=ParamVector(("l",), (0.0,)))


def test_solve_morph_reaches_stationary_point():
    # directional derivatives at the returned iterate must not descend;
    # a second solve at a reduced learning rate settles any Adam
    # oscillation around the optimum
    prob = MorphProblem(target=arc_profile(6), n_units=6)
    res = solve_morph(prob, OptimizerConfig(max_iterations=20000,
                                            patience=2000,
                                            learning_rate=0.02, seed=0))
    res = solve_morph(prob, OptimizerConfig(max_iterations=20000,
                                            patience=2000,
                                            learning_rate=2e-3, seed=0),
                      init=res.raw)
    assert res.loss < 1e-8
    x = np.asarray(res.raw.as_array(), dtype=float)
    rng = np.random.default_rng(11)
    h = 1e-5
    for _ in range(10):
        u = rng.normal(size=x.size)
        u /= np.linalg.norm(u)
        fp = morph_loss(res.raw.with_values(tuple(x + h * u)), prob)
        fm = morph_loss(res.raw.with_values(tuple(x - h * u)), prob)
        assert (fp - fm) / (2.0 * h) >= -1e-4


def test_solver_flags_max_iterations():
    prob = MorphProblem(target=circle_profile(5), n_units=5)
    res = solve_morph(prob, OptimizerConfig(max_iterations=3))
    assert "stopped at max iterations without converging" in res.flags


def test_solver_stops_on_patience():
    prob = MorphProblem(target=circle_profile(5), n_units=5)
    res = solve_morph(prob, OptimizerConfig(max_iterations=5000,
                                            tolerance=1e6, patience=12))
    assert res.iterations <= 13


def test_solver_survives_nonfinite_start():
    # exp of a huge raw length overflows the tip distance to infinity;
    # the run must flag the failure instead of raising
    prob = MorphProblem(target=circle_profile(4), n_units=4)
    bad = ParamVector(prob.param_names, (400.0, 0.0, 0.0, 0.0, 0.0, 0.0,
                                         0.0))
    res = solve_morph(prob, OptimizerConfig(max_iterations=80,
                                            patience=200), init=bad)
    assert math.isinf(res.loss)
    assert "no feasible iterate found" in res.flags
    assert "aborted: repeated non-finite evaluations" in res.flags


def test_solve_write_flags_strictly_infeasible_best():
    prob = WriteProblem(target=arclength_parameterize(
        analytic_targets("circle"), 20), sections=2, units_per_section=1,
        n_psi_samples=16, psi_range=(3.0, 0.3))
    bad = ParamVector(prob.param_names, (0.0, -30.0, 0.0))
    res = solve_write(prob, OptimizerConfig(max_iterations=1, patience=1),
                      init=bad)
    assert res.loss >= 1e6
    assert "best iterate infeasible on the strict path" in res.flags


# ===== Grid search =====


def test_grid_search_table_and_best_agree():
    prob = WriteProblem(target=arclength_parameterize(
        analytic_targets("circle"), 20), sections=2, units_per_section=2,
        n_psi_samples=16)
    cfg = OptimizerConfig(max_iterations=40, seed=5)
    res = grid_search(prob, [2, 3], restarts=2, config=cfg)
    assert len(res.table) == 4
    assert len(res.runs) == 4
    assert [row[0] for row in res.table] == [4, 4, 6, 6]
    assert [row[1] for row in res.table] == [5, 6, 5, 6]
    losses = [row[2] for row in res.table]
    assert res.best.loss == min(losses)
    best_row = res.table[losses.index(min(losses))]
    assert res.best_n * prob.units_per_section == best_row[0]
    for row, run in zip(res.table, res.runs):
        assert row[1] == run.seed
        assert row[2] == run.loss


def test_grid_search_is_deterministic_and_streams_progress():
    prob = WriteProblem(target=arclength_parameterize(
        analytic_targets("circle"), 20), sections=2, units_per_section=1,
        n_psi_samples=16)
    cfg = OptimizerConfig(max_iterations=30)
    seen = []
    a = grid_search(prob, [2], restarts=2, config=cfg,
                    progress=seen.append)
    b = grid_search(prob, [2], restarts=2, config=cfg)
    assert a.table == b.table
    assert seen == list(a.table)


def test_grid_search_validation():
    prob = WriteProblem(target=arclength_parameterize(
        analytic_targets("circle"), 20), sections=2, units_per_section=1)
    with pytest.raises(DomainError):
        grid_search(prob, [], restarts=1)
    with pytest.raises(DomainError):
        grid_search(prob, [2], restarts=0)


# ===== Trajectory helpers =====


def test_trajectory_stations_resamples_uniformly():
    pts = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)]
    out = trajectory_stations(pts, 4)
    assert out.shape == (5, 2)
    assert out[0] == pytest.approx([0.0, 0.0])
    assert out[-1] == pytest.approx([1.0, 1.0])
    assert out[1] == pytest.approx([0.5, 0.0])
    assert out[2] == pytest.approx([1.0, 0.0])
    with pytest.raises(DomainError):
        trajectory_stations([(0.0, 0.0)], 4)
    with pytest.raises(DomainError):
        trajectory_stations([(1.0, 1.0), (1.0, 1.0)], 4)


def test_align_rigid_recovers_rigid_motion():
    rng = np.random.default_rng(2)
    ref = rng.normal(size=(14, 2))
    c, s = math.cos(1.1), math.sin(1.1)
    moved = ref @ np.array([[c, s], [-s, c]]).T + [4.0, -7.0]
    aligned, rms = align_rigid(moved, ref)
    assert rms < 1e-12
    assert np.max(np.abs(aligned - ref)) < 1e-12


def test_align_rigid_never_reflects():
    rng = np.random.default_rng(4)
    ref = rng.normal(size=(10, 2))
    mirrored = ref * [1.0, -1.0]
    _, rms = align_rigid(mirrored, ref)
    assert rms > 0.1  # a reflection is not a rigid motion here
    with pytest.raises(DomainError):
        align_rigid(ref[:4], ref)
