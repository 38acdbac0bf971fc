"""Inverse design: shape morphing and trajectory writing by gradient descent.

Two problems over unit aspect ratios:

* Morphing (``solve_morph``): choose per-unit ratios, member length, one
  actuation angle and a base rotation so the deployed chain matches a
  target curvature profile, endpoint and orientation.
* Writing (``solve_write``): choose per-section ratios and member length so
  the chain tip traces a target curve during an actuation sweep; the loss
  compares curvature profiles in normalized arc length, so it is invariant
  under rigid motions of the trajectory.

Both losses are recorded once onto a gradient tape and replayed with Adam;
decision variables live in an unconstrained space and are mapped to
physical parameters by ``transform_params`` (sigmoid-bounded ratios,
log-parameterized length), so every iterate is bound-feasible by
construction. Assembly infeasibility is handled asymmetrically: the float
path returns a large finite penalty, the recorded path stays smooth through
clamped primitives and instead grows steeply as the clamp saturates.
"""

from __future__ import annotations

import contextlib
import dataclasses
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import smath
from .autodiff import ParamVector, record
from .errors import DomainError, InfeasibleAssemblyError, NaNPoisonError
from .geometry import UnitGeometry, UnitState, effective_curvature
from .kinematics import (ChainSpec, SectionedSpec, assemble_chain,
                         propagate_angles, tip_segmented)
from .targets import ArcLengthProfile

__all__ = [
    "MorphProblem",
    "WriteProblem",
    "OptimizerConfig",
    "RunResult",
    "GridSearchResult",
    "transform_params",
    "morph_loss",
    "write_loss",
    "solve_morph",
    "solve_write",
    "grid_search",
    "align_rigid",
    "trajectory_stations",
]

# Actuation angle decode range: strictly inside (0, pi) to keep the
# assembly away from the aligned and collapsed singularities.
PSI_BOUNDS = (0.1, math.pi - 0.1)

# Penalty floor returned by the float path for infeasible assemblies.
INFEASIBLE_PENALTY = 1e6


def _set(obj, field, value):
    object.__setattr__(obj, field, value)


def _check_weights(w, n, what):
    w = tuple(float(v) for v in w)
    if len(w) != n:
        raise DomainError(f"{what} needs {n} weights, got {len(w)}")
    if any(v < 0.0 for v in w):
        raise DomainError(f"{what} weights must be nonnegative, got {w}")
    return w


def _check_bounds(b):
    lo, hi = (float(v) for v in b)
    if not 0.0 < lo < 0.5 < hi < 1.0:
        raise DomainError(
            f"bounds must satisfy 0 < lo < 0.5 < hi < 1, got ({lo}, {hi})")
    return (lo, hi)


# ===== Problem and run types =====


@dataclass(frozen=True)
class MorphProblem:
    """Match the deployed chain to a target curvature profile.

    The target must carry exactly ``n_units + 1`` nodes (its stations are
    the unit boundaries): unit j is scored against the curvature at its far
    boundary, the chain base sits at the first node and the chain tip is
    pulled to the last one. ``weights`` holds the (curvature, tip, rotation)
    loss weights.
    """

    target: ArcLengthProfile
    n_units: int
    weights: tuple = (1.0, 1.0, 0.1)
    bounds: tuple = (0.1, 0.9)

    def __post_init__(self):
        if not isinstance(self.n_units, int) or self.n_units < 2:
            raise DomainError(f"n_units must be an integer >= 2, "
                              f"got {self.n_units}")
        if len(self.target.s_grid) != self.n_units + 1:
            raise DomainError(
                f"target has {len(self.target.s_grid)} stations; a chain of "
                f"{self.n_units} units needs {self.n_units + 1} (one per "
                "unit boundary)")
        _set(self, "weights", _check_weights(self.weights, 3, "morph"))
        _set(self, "bounds", _check_bounds(self.bounds))

    @property
    def param_names(self) -> tuple:
        return ("l", "psi", "beta0") + tuple(
            f"alpha_{j}" for j in range(self.n_units))


@dataclass(frozen=True)
class WriteProblem:
    """Make the chain tip trace a target curve during an actuation sweep.

    The chain is ``sections`` constant-ratio sections of
    ``units_per_section`` units each; the decision variables are one ratio
    per section plus the member length (plus the sweep endpoints when
    ``optimize_range`` is set). ``weights`` holds the (smoothness, length,
    steric) weights; the curvature-mismatch term has weight 1. The steric
    term hinges each unit's internal angle against ``phi_min`` at every one
    of the ``n_psi_samples`` sweep samples.
    """

    target: ArcLengthProfile
    sections: int
    units_per_section: int = 1
    weights: tuple = (1e-2, 1.0, 10.0)
    phi_min: float = 0.1
    psi_range: tuple = (3.0, 0.3)
    n_psi_samples: int = 400
    bounds: tuple = (0.1, 0.9)
    optimize_range: bool = False

    def __post_init__(self):
        if not isinstance(self.sections, int) or self.sections < 1:
            raise DomainError(f"sections must be a positive integer, "
                              f"got {self.sections}")
        if not isinstance(self.units_per_section, int) \
                or self.units_per_section < 1:
            raise DomainError(f"units_per_section must be a positive "
                              f"integer, got {self.units_per_section}")
        if self.sections * self.units_per_section < 2:
            raise DomainError("chain needs at least two units in total")
        _set(self, "weights", _check_weights(self.weights, 3, "write"))
        _set(self, "bounds", _check_bounds(self.bounds))
        if not self.phi_min > 0.0:
            raise DomainError(f"phi_min must be positive, got {self.phi_min}")
        hi, lo = (float(v) for v in self.psi_range)
        if not math.pi > hi > lo > 0.0:
            raise DomainError(
                f"psi_range must satisfy pi > max > min > 0, got ({hi}, {lo})")
        _set(self, "psi_range", (hi, lo))
        if not isinstance(self.n_psi_samples, int) or self.n_psi_samples < 5:
            raise DomainError(f"n_psi_samples must be an integer >= 5, "
                              f"got {self.n_psi_samples}")

    @property
    def n_units(self) -> int:
        return self.sections * self.units_per_section

    @property
    def param_names(self) -> tuple:
        names = tuple(f"alpha_{j}" for j in range(self.sections)) + ("l",)
        if self.optimize_range:
            names = names + ("psi_max", "psi_min")
        return names


@dataclass(frozen=True)
class OptimizerConfig:
    """Adam hyperparameters and the restart seed. Deterministic given seed."""

    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    max_iterations: int = 5000
    tolerance: float = 1e-10
    patience: int = 100
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0.0:
            raise DomainError("learning_rate must be positive")
        if not 0.0 <= self.beta1 < 1.0 or not 0.0 <= self.beta2 < 1.0:
            raise DomainError("beta1 and beta2 must lie in [0, 1)")
        if not isinstance(self.max_iterations, int) or self.max_iterations < 1:
            raise DomainError("max_iterations must be a positive integer")
        if not isinstance(self.patience, int) or self.patience < 1:
            raise DomainError("patience must be a positive integer")


@dataclass(frozen=True)
class RunResult:
    """One optimization run: best iterate and its diagnostics.

    ``params`` holds the decoded physical parameters, ``raw`` the
    unconstrained vector they decode from (the replay key). ``loss`` is the
    loss re-evaluated at the returned parameters (not the running minimum
    of a momentum trajectory). ``flags`` collects feasibility/convergence
    notes; an empty tuple means a clean run.
    """

    params: ParamVector
    raw: ParamVector
    loss: float
    trace: tuple
    seed: int
    iterations: int
    flags: tuple = ()


@dataclass(frozen=True)
class GridSearchResult:
    """Best run over a (chain size x restart seed) grid plus the full table.

    ``table`` rows are (n_units_total, seed, loss), in grid order; failed
    cells carry infinite loss. ``runs`` holds the full RunResult behind
    each table row, in the same order.
    """

    best_n: int
    best: RunResult
    table: tuple
    runs: tuple = ()


# ===== Parameter transform =====


def _logit(u: float) -> float:
    return math.log(u / (1.0 - u))


def transform_params(unconstrained: ParamVector, bounds) -> ParamVector:
    """Map unconstrained parameters to their physical ranges, by name.

    ``alpha*`` entries pass through a logistic sigmoid scaled into
    ``bounds`` (so ratios stay strictly inside them), ``l`` through exp
    (positive length), ``psi`` through a sigmoid into (0.1, pi - 0.1).
    The pair ``psi_max``/``psi_min`` decodes jointly so that
    pi > psi_max > psi_min > 0 always holds; anything else (``beta0``)
    passes through unchanged. Returns a ParamVector with the same names.
    """
    lo, hi = bounds
    plo, phi_ = PSI_BOUNDS
    values = dict(zip(unconstrained.names, unconstrained.values))
    out = {}
    for name, v in values.items():
        if name.startswith("alpha"):
            out[name] = lo + (hi - lo) * smath.sigmoid(v)
        elif name == "l":
            out[name] = smath.exp(v)
        elif name == "psi":
            out[name] = plo + (phi_ - plo) * smath.sigmoid(v)
        elif name == "psi_max":
            out[name] = 0.2 + (math.pi - 0.3) * smath.sigmoid(v)
        elif name == "psi_min":
            pass  # decoded below, after psi_max
        else:
            out[name] = v
    if "psi_min" in values:
        if "psi_max" not in out:
            raise DomainError("psi_min requires a psi_max parameter")
        out["psi_min"] = out["psi_max"] * (
            0.05 + 0.9 * smath.sigmoid(values["psi_min"]))
    return ParamVector(unconstrained.names,
                       tuple(out[n] for n in unconstrained.names))


def _label(params: ParamVector, text: str):
    """Tape label context when recording, no-op on the float path."""
    for v in params.values:
        tape = getattr(v, "tape", None)
        if tape is not None:
            return tape.label(text)
    return contextlib.nullcontext()


# ===== Morph loss =====


def _feasibility_excess(alphas, psi) -> float:
    """How far the angle recursion leaves cos^2(phi/2) <= 1 (floats only)."""
    c2 = math.cos(0.5 * psi) ** 2
    h_prev = alphas[0] * (1.0 - alphas[0])
    excess = 0.0
    for a in alphas[1:]:
        h = a * (1.0 - a)
        c2 = c2 * h_prev / h
        excess += max(0.0, c2 - 1.0)
        c2 = min(c2, 1.0)
        h_prev = h
    return excess


def morph_loss(params: ParamVector, problem: MorphProblem):
    """Weighted shape error of the deployed chain against the target.

    Per-unit curvature residuals against the target profile at the unit's
    far boundary, the squared tip-to-endpoint distance, and a squared base
    rotation anchor. On the float path an infeasible assembly returns the
    finite penalty 1e6 plus the constraint excess instead of raising, so a
    descent step can retreat.
    """
    if tuple(params.names) != problem.param_names:
        raise DomainError(f"expected parameters {problem.param_names}, "
                          f"got {tuple(params.names)}")
    t = transform_params(params, problem.bounds)
    l = t["l"]
    psi = t["psi"]
    beta0 = t["beta0"]
    alphas = tuple(t[f"alpha_{j}"] for j in range(problem.n_units))

    target = problem.target
    lam_k, lam_tip, lam_rot = problem.weights
    spec = ChainSpec(alphas=alphas, l=l, base_position=target.nodes[0],
                     base_angle=beta0)
    try:
        with _label(params, "chain assembly"):
            cfg = assemble_chain(spec, psi)
        kappas = [effective_curvature(UnitGeometry(alphas[j], l),
                                      UnitState(cfg.phis[j]))
                  for j in range(problem.n_units)]
    except (InfeasibleAssemblyError, DomainError):
        # float path only: an assembly that cannot reach this actuation
        # (or degenerates to a fully extended unit) costs a finite penalty
        return INFEASIBLE_PENALTY + _feasibility_excess(
            [float(a) for a in alphas], float(psi))

    kap = 0.0
    for j in range(problem.n_units):
        r = kappas[j] - target.kappa[j + 1]
        kap = kap + r * r

    tip = cfg.centers[-1]
    p_end = target.nodes[-1]
    dx = tip[0] - p_end[0]
    dy = tip[1] - p_end[1]
    rot = beta0 - target.initial_tangent
    return lam_k * kap + lam_tip * (dx * dx + dy * dy) + lam_rot * rot * rot


# ===== Write loss =====


def _divided_derivatives(f, s, i):
    """First and second derivatives at s[i] from the three nearest samples.

    Nonuniform three-point divided differences; at the ends the stencil is
    one-sided (same three points, evaluated at the boundary sample).
    """
    j = min(max(i, 1), len(s) - 2)
    h1 = s[j] - s[j - 1]
    h2 = s[j + 1] - s[j]
    f0, f1, f2 = f[j - 1], f[j], f[j + 1]
    d2 = 2.0 * (f0 / (h1 * (h1 + h2)) - f1 / (h1 * h2)
                + f2 / (h2 * (h1 + h2)))
    if i == j:
        d1 = (-f0 * h2 / (h1 * (h1 + h2)) + f1 * (h2 - h1) / (h1 * h2)
              + f2 * h1 / (h2 * (h1 + h2)))
    else:
        # quadratic through the three points, differentiated at the end
        if i < j:
            d1 = (-f0 * (2.0 * h1 + h2) / (h1 * (h1 + h2))
                  + f1 * (h1 + h2) / (h1 * h2)
                  - f2 * h1 / (h2 * (h1 + h2)))
        else:
            d1 = (f0 * h2 / (h1 * (h1 + h2))
                  - f1 * (h1 + h2) / (h1 * h2)
                  + f2 * (h1 + 2.0 * h2) / (h2 * (h1 + h2)))
    return d1, d2


def write_loss(params: ParamVector, problem: WriteProblem):
    """Curvature mismatch of the swept tip trajectory plus regularizers.

    The tip is swept over the actuation range, its path reduced to signed
    curvature as a function of normalized cumulative arc length, and that
    profile is linearly interpolated onto the target's stations; the
    mismatch is the squared Euclidean distance between the two curvature
    vectors. Regularizers: squared differences of adjacent section ratios
    (smoothness), squared relative error of the trajectory length against
    the target length, and a hinge keeping every unit's internal angle
    above ``phi_min`` throughout the sweep.
    """
    if tuple(params.names) != problem.param_names:
        raise DomainError(f"expected parameters {problem.param_names}, "
                          f"got {tuple(params.names)}")
    t = transform_params(params, problem.bounds)
    alphas = tuple(t[f"alpha_{j}"] for j in range(problem.sections))
    l = t["l"]
    if problem.optimize_range:
        psi_max, psi_min = t["psi_max"], t["psi_min"]
    else:
        psi_max, psi_min = problem.psi_range

    lam_sm, lam_len, lam_phi = problem.weights
    spec = SectionedSpec(
        sections=tuple((problem.units_per_section, a) for a in alphas), l=l)

    # actuation sweep: tip positions and the steric hinge
    n = problem.n_psi_samples
    step = (psi_max - psi_min) / (n - 1)
    pts = []
    steric = 0.0
    try:
        for k in range(n):
            psi_k = psi_max - k * step
            with _label(params, f"sweep sample {k}"):
                pts.append(tip_segmented(spec, psi_k))
                if lam_phi != 0.0:
                    for j, phi_jk in enumerate(propagate_angles(alphas,
                                                                psi_k)):
                        with _label(params, f"sweep sample {k}, section {j}"):
                            gap = smath.relu(problem.phi_min - phi_jk)
                            steric = steric + gap * gap
    except InfeasibleAssemblyError:
        # float path only: some sweep sample cannot be assembled
        af = [float(a) for a in alphas]
        excess = sum(
            _feasibility_excess(af, float(psi_max) - k * float(step))
            for k in range(n))
        return INFEASIBLE_PENALTY + excess

    # cumulative arc length along the trajectory
    s = [0.0]
    for k in range(1, n):
        ds = smath.hypot(pts[k][0] - pts[k - 1][0], pts[k][1] - pts[k - 1][1])
        s.append(s[k - 1] + ds)
    length = s[-1]

    # signed curvature of the trajectory at every sample
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    kappa = []
    for k in range(n):
        with _label(params, f"curvature at sample {k}"):
            x1, x2 = _divided_derivatives(xs, s, k)
            y1, y2 = _divided_derivatives(ys, s, k)
            sp2 = x1 * x1 + y1 * y1 + 1e-24
            kappa.append((x1 * y2 - y1 * x2) / (sp2 * smath.sqrt(sp2)))

    # interpolate onto the target's normalized stations and compare; the
    # trajectory curvature is rescaled as if the trajectory had the
    # target's length, so the comparison is commensurate (otherwise a
    # short trajectory could match the profile pointwise while silently
    # dropping part of the arc)
    inv_len = 1.0 / length
    s_hat = [v * inv_len for v in s]
    scale = length / problem.target.total_length
    m = len(problem.target.s_grid) - 1
    mismatch = 0.0
    for i, k_t in enumerate(problem.target.kappa):
        with _label(params, f"target station {i}"):
            r = smath.interp(i / m, s_hat, kappa) * scale - k_t
            mismatch = mismatch + r * r

    smooth = 0.0
    for j in range(problem.sections - 1):
        d = alphas[j + 1] - alphas[j]
        smooth = smooth + d * d

    rel = (length - problem.target.total_length) / problem.target.total_length
    steric = steric * problem.units_per_section
    return (mismatch + lam_sm * smooth + lam_len * rel * rel
            + lam_phi * steric)


# ===== Initialization =====


def _initial_raw(problem, seed: int) -> ParamVector:
    """Seeded unconstrained starting point.

    Seed 0 starts near the straight chain (ratios in (0.45, 0.55)); other
    seeds draw ratios across the full bounds and jitter the scale
    parameters, giving genuinely different basins per restart.
    """
    rng = np.random.default_rng(seed)
    lo, hi = problem.bounds
    narrow = (seed == 0)
    span = hi - lo
    margin = 0.02 * span

    def draw_alpha():
        if narrow:
            a = rng.uniform(0.45, 0.55)
        else:
            a = rng.uniform(lo + margin, hi - margin)
        return _logit((a - lo) / span)

    values = {}
    if isinstance(problem, MorphProblem):
        psi = math.pi / 2 if narrow else rng.uniform(0.5, 2.6)
        p_lo, p_hi = PSI_BOUNDS
        values["psi"] = _logit((psi - p_lo) / (p_hi - p_lo))
        # member length so the chain's straight span covers the target
        l0 = problem.target.total_length / (problem.n_units
                                            * math.cos(0.5 * psi))
        values["l"] = math.log(l0) + (0.0 if narrow
                                      else rng.uniform(-0.3, 0.3))
        values["beta0"] = problem.target.initial_tangent + (
            0.0 if narrow else rng.uniform(-0.3, 0.3))
    else:
        l0 = problem.target.total_length / max(problem.n_units, 2)
        values["l"] = math.log(l0) + (0.0 if narrow
                                      else rng.uniform(-0.5, 0.5))
        if problem.optimize_range:
            values["psi_max"] = 0.0 if narrow else rng.uniform(-1.0, 1.0)
            values["psi_min"] = 0.0 if narrow else rng.uniform(-1.0, 1.0)
    names = problem.param_names
    raw = [values[n] if n in values else draw_alpha() for n in names]
    return ParamVector(names, raw)


# ===== Adam core =====


def _adam(fn, config: OptimizerConfig, x0: np.ndarray):
    """Adam with best-iterate tracking and poison backtracking.

    Replays the recorded loss; a non-finite value or a NaN-poisoned
    gradient rolls back to the previous iterate and halves the step size
    (flagged), so one bad region never kills the run. Stops when the best
    loss has not improved by more than the tolerance for ``patience``
    iterations.
    """
    lr = config.learning_rate
    b1, b2, eps = config.beta1, config.beta2, config.eps
    x = np.array(x0, dtype=float)
    m = np.zeros_like(x)
    v = np.zeros_like(x)
    best_x = x.copy()
    best_loss = math.inf
    best_iter = 0
    trace = []
    flags = []
    prev_x = x.copy()
    bad = 0
    it = 0
    for it in range(1, config.max_iterations + 1):
        try:
            val, g = fn.value_and_grad(x)
            ok = math.isfinite(val) and bool(np.all(np.isfinite(g)))
        except NaNPoisonError:
            ok = False
        if not ok:
            bad += 1
            if "non-finite loss encountered" not in flags:
                flags.append("non-finite loss encountered")
            if bad > 50:
                flags.append("aborted: repeated non-finite evaluations")
                break
            x = prev_x.copy()
            lr *= 0.5
            continue
        trace.append(val)
        if val < best_loss - config.tolerance:
            best_iter = it
        if val < best_loss:
            best_loss = val
            best_x = x.copy()
        if it - best_iter >= config.patience:
            break
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        mh = m / (1.0 - b1 ** it)
        vh = v / (1.0 - b2 ** it)
        prev_x = x
        x = x - lr * mh / (np.sqrt(vh) + eps)
    else:
        flags.append("stopped at max iterations without converging")
    if not math.isfinite(best_loss):
        flags.append("no feasible iterate found")
    return best_x, best_loss, tuple(trace), it, tuple(flags)


def _solve(problem, loss_fn, config: OptimizerConfig, init, recorded=None):
    if init is None:
        init = _initial_raw(problem, config.seed)
    elif tuple(init.names) != problem.param_names:
        raise DomainError(f"init names must be {problem.param_names}")
    if recorded is None:
        recorded, _ = record(lambda pv: loss_fn(pv, problem), init)
    x, loss, trace, iters, flags = _adam(recorded, config, init.as_array())
    raw = init.with_values(tuple(float(v) for v in x))
    params = transform_params(raw, problem.bounds)
    # re-evaluate on the strict float path: the tape's clamped primitives
    # can hide a design that the exact assembly cannot actually reach
    final = float(loss_fn(raw, problem))
    if final >= INFEASIBLE_PENALTY:
        flags = flags + ("best iterate infeasible on the strict path",)
    return RunResult(params=params, raw=raw, loss=final, trace=trace,
                     seed=config.seed, iterations=iters, flags=flags)


def solve_morph(problem: MorphProblem, config: OptimizerConfig | None = None,
                init: ParamVector | None = None) -> RunResult:
    """One seeded morphing run; returns the best iterate found.

    Non-convergence is reported through ``flags``, never raised.
    """
    return _solve(problem, morph_loss, config or OptimizerConfig(), init)


def solve_write(problem: WriteProblem, config: OptimizerConfig | None = None,
                init: ParamVector | None = None, *, _recorded=None) -> RunResult:
    """One seeded writing run; returns the best iterate found."""
    return _solve(problem, write_loss, config or OptimizerConfig(), init,
                  recorded=_recorded)


# ===== Grid search over chain size =====


def _thread_count() -> int:
    raw = os.environ.get("SCISSOR_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def grid_search(problem: WriteProblem, n_candidates, restarts: int,
                config: OptimizerConfig | None = None,
                progress=None) -> GridSearchResult:
    """Seeded restarts of ``solve_write`` for each candidate section count.

    Runs ``restarts`` solves (seeds ``config.seed``, ``config.seed + 1``,
    ...) for every entry of ``n_candidates`` and returns the global best
    plus the full (total units, seed, loss) table. Failed runs enter the
    table with infinite loss. Cells are independent; with SCISSOR_THREADS
    set they run in a thread pool, and results are assembled in grid order
    so determinism never depends on scheduling. ``progress``, if given, is
    called with each finished (n_units, seed, loss) row.
    """
    config = config or OptimizerConfig()
    n_candidates = [int(n) for n in n_candidates]
    if not n_candidates:
        raise DomainError("n_candidates must be non-empty")
    if not isinstance(restarts, int) or restarts < 1:
        raise DomainError(f"restarts must be a positive integer, "
                          f"got {restarts}")

    jobs = []
    for n in n_candidates:
        prob_n = dataclasses.replace(problem, sections=n)
        recorded, _ = record(
            lambda pv, p=prob_n: write_loss(pv, p),
            _initial_raw(prob_n, config.seed))
        for r in range(restarts):
            cfg = dataclasses.replace(config, seed=config.seed + r)
            jobs.append((prob_n, cfg, recorded))

    def run(job):
        prob_n, cfg, recorded = job
        try:
            return solve_write(prob_n, cfg, _recorded=recorded)
        except Exception as exc:  # never lose the table to one bad cell
            return RunResult(
                params=_initial_raw(prob_n, cfg.seed),
                raw=_initial_raw(prob_n, cfg.seed), loss=math.inf,
                trace=(), seed=cfg.seed, iterations=0,
                flags=(f"failed: {type(exc).__name__}: {exc}",))

    table = []
    runs = []
    best = None
    best_n = 0

    def collect(prob_n, res):
        nonlocal best, best_n
        row = (prob_n.n_units, res.seed, res.loss)
        table.append(row)
        runs.append(res)
        if progress is not None:
            progress(row)
        if best is None or res.loss < best.loss:
            best = res
            best_n = prob_n.sections

    workers = _thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))
        for (prob_n, _, _), res in zip(jobs, results):
            collect(prob_n, res)
    else:
        # sequential: report each row as it finishes so a long search can
        # stream a partial table before being interrupted
        for job in jobs:
            collect(job[0], run(job))
    return GridSearchResult(best_n=best_n, best=best, table=tuple(table),
                            runs=tuple(runs))


# ===== Trajectory evaluation helpers =====


def trajectory_stations(points, m: int) -> np.ndarray:
    """Resample a polyline at m+1 uniform stations of cumulative chord length."""
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        raise DomainError("need at least two points to resample")
    s = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(pts, axis=0).T))])
    if s[-1] <= 0.0:
        raise DomainError("degenerate trajectory: zero length")
    grid = np.linspace(0.0, s[-1], m + 1)
    return np.column_stack([np.interp(grid, s, pts[:, 0]),
                            np.interp(grid, s, pts[:, 1])])


def align_rigid(points, reference):
    """Best rigid alignment (rotation + translation, no scaling) of paired points.

    Returns (aligned, rms): the points after the least-squares rigid motion
    onto the reference pairing row i with row i, and the residual
    root-mean-square distance.
    """
    p = np.asarray(points, dtype=float)
    q = np.asarray(reference, dtype=float)
    if p.shape != q.shape or p.ndim != 2 or p.shape[1] != 2:
        raise DomainError("point sets must be equal (n, 2) arrays")
    pc = p - p.mean(axis=0)
    qc = q - q.mean(axis=0)
    u, _, vt = np.linalg.svd(pc.T @ qc)
    d = np.sign(np.linalg.det(u @ vt))
    rot = (u @ np.diag([1.0, d]) @ vt).T
    aligned = pc @ rot.T + q.mean(axis=0)
    rms = float(np.sqrt(np.mean(np.sum((aligned - q) ** 2, axis=1))))
    return aligned, rms
