"""Validation studies: closure angles, perturbative accuracy, tip sensitivity.

Three numerical experiments cross-checking the kinematics against its
closed-form predictions:

* ``closure_experiment``: the critical actuation angle at which a uniform
  chain closes into a ring, predicted in closed form versus measured by
  root-finding on the fully assembled chain.
* ``perturbation_validation``: node-wise distance between the first-order
  configuration of a slowly varying chain and the exact assembly.
* ``sensitivity_profile``: variance of the tip displacement under small
  perturbations of a single unit's aspect ratio, unit by unit; profiles
  for different chain sizes collapse once variances are normalized by the
  squared chain span.

Everything here is plain float/numpy work (no gradients) and deterministic
under a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, NoClosureError
from .geometry import closure_actuation
from .kinematics import ChainSpec, assemble_chain, perturbative_config

__all__ = [
    "SensitivityProfile",
    "ClosureRow",
    "PerturbationRow",
    "sensitivity_profile",
    "closure_experiment",
    "perturbation_validation",
]


def _set(obj, field, value):
    object.__setattr__(obj, field, value)


# ===== Tip sensitivity =====


@dataclass(frozen=True)
class SensitivityProfile:
    """Per-unit tip-displacement variance of a straight-deployment chain.

    ``sigma[j]`` is the variance of the tip displacement norm when only
    unit j's aspect ratio is perturbed by delta ~ U[-epsilon, epsilon]
    around the straight baseline 0.5 (member length 1), estimated from
    ``n_samples`` draws at actuation angle ``psi``.
    """

    n_units: int
    epsilon: float
    psi: float
    n_samples: int
    sigma: tuple

    def __post_init__(self):
        _set(self, "sigma", tuple(float(v) for v in self.sigma))
        if len(self.sigma) != self.n_units:
            raise DomainError("need one variance per unit")
        if any(v < 0.0 for v in self.sigma):
            raise DomainError("variances must be nonnegative")

    @property
    def stations(self) -> tuple:
        """Unit positions as fractions of the chain, j / N."""
        return tuple(j / self.n_units for j in range(self.n_units))

    @property
    def span(self) -> float:
        """Straight-chain tip-to-base distance (baseline alpha = 0.5, l = 1)."""
        return (self.n_units - 1) * math.cos(0.5 * self.psi)

    def normalized(self) -> tuple:
        """Variances divided by the squared chain span.

        In these units the profiles of chains of different sizes collapse
        onto a single curve of the station j / N.
        """
        s2 = self.span ** 2
        return tuple(v / s2 for v in self.sigma)


def _batch_tips(alphas: np.ndarray, psi: float, l: float = 1.0) -> np.ndarray:
    """Tip positions of many chains at once; rows are per-chain ratio lists.

    A vectorized transcription of ``assemble_chain`` (the shared-diagonal
    angle recursion has the closed form cos(phi_j/2) =
    cos(psi/2) sqrt(h_0/h_j)); agrees with it to roundoff, which is how it
    is tested. Base pose is the origin pointing along +x.
    """
    a = np.asarray(alphas, dtype=float)
    if a.ndim != 2:
        raise DomainError("alphas must be a (chains, units) array")
    h = a * (1.0 - a)
    c = math.cos(0.5 * psi) * np.sqrt(h[:, :1] / h)
    if np.any(c > 1.0 + 0.5e-9):
        raise DomainError("infeasible chain in batch: cos(phi/2) > 1")
    half = np.arccos(np.minimum(c, 1.0))
    star = math.pi - 2.0 * np.arctan2(np.sin(half),
                                      (2.0 * a - 1.0) * np.cos(half))
    chi = np.zeros_like(a)
    chi[:, 1:] = np.cumsum(0.5 * (star[:, :-1] + star[:, 1:]), axis=1)
    t1 = chi - half
    t2 = chi + half
    dx = a[:, :-1] * np.cos(t1[:, :-1]) + a[:, 1:] * np.cos(t2[:, 1:])
    dy = a[:, :-1] * np.sin(t1[:, :-1]) + a[:, 1:] * np.sin(t2[:, 1:])
    return l * np.column_stack([dx.sum(axis=1), dy.sum(axis=1)])


def sensitivity_profile(n_units: int, epsilon: float = 0.01,
                        n_samples: int = 1000, psi: float = math.pi / 2,
                        seed: int = 0) -> SensitivityProfile:
    """Tip-displacement variance per perturbed unit of a straight chain.

    For each unit index j, ``n_samples`` chains are built with
    ``alpha_j = 0.5 + delta`` (delta uniform in [-epsilon, epsilon], all
    other ratios 0.5) and the variance of the tip displacement norm is
    recorded. Each unit draws from its own seeded substream, so the result
    is independent of evaluation order; variances are reduced by numpy's
    pairwise summation in a fixed order.
    """
    if not isinstance(n_units, int) or n_units < 2:
        raise DomainError(f"n_units must be an integer >= 2, got {n_units}")
    if not 0.0 < epsilon < 0.5:
        raise DomainError(f"epsilon must be in (0, 0.5), got {epsilon}")
    if not isinstance(n_samples, int) or n_samples < 2:
        raise DomainError(f"n_samples must be an integer >= 2, "
                          f"got {n_samples}")
    if not 0.0 < psi < math.pi:
        raise DomainError(f"psi must be in (0, pi), got {psi}")

    base = _batch_tips(np.full((1, n_units), 0.5), psi)[0]
    sigma = []
    for j in range(n_units):
        rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence((seed, n_units, j))))
        delta = rng.uniform(-epsilon, epsilon, n_samples)
        a = np.full((n_samples, n_units), 0.5)
        a[:, j] += delta
        tips = _batch_tips(a, psi)
        moved = np.hypot(tips[:, 0] - base[0], tips[:, 1] - base[1])
        sigma.append(float(np.var(moved)))
    return SensitivityProfile(n_units=n_units, epsilon=epsilon, psi=psi,
                              n_samples=n_samples, sigma=tuple(sigma))


# ===== Closure of uniform chains =====


@dataclass(frozen=True)
class ClosureRow:
    """One (alpha, N) closure comparison; ``closes=False`` rows carry NaNs."""

    alpha: float
    n_units: int
    theory: float
    measured: float
    closes: bool


def _measured_closure(alpha: float, n_units: int) -> float:
    """Critical actuation angle from the fully assembled chain.

    Root-finds N * dchi(psi) = 2 pi, where dchi is the per-unit bisector
    rotation read off ``assemble_chain`` — an independent path from the
    closed-form prediction, which inverts the rotation formula directly.
    """
    spec = ChainSpec(alphas=(alpha,) * n_units)

    def gap(psi: float) -> float:
        cfg = assemble_chain(spec, psi)
        dchi = (cfg.orientations[-1][0] + cfg.orientations[-1][1]
                - cfg.orientations[0][0] - cfg.orientations[0][1]) \
            / (2.0 * (n_units - 1))
        return n_units * dchi - 2.0 * math.pi

    lo, hi = 1e-9, math.pi - 1e-9
    g_lo, g_hi = gap(lo), gap(hi)
    if not g_lo * g_hi < 0.0:
        raise NoClosureError(
            f"no actuation angle closes alpha={alpha}, N={n_units}")
    return float(brentq(gap, lo, hi, xtol=1e-13, rtol=8.9e-16))


def closure_experiment(alphas, n_units_list) -> tuple:
    """Theory-versus-measured closure angles over a parameter grid.

    Rows cover the cross product of ``alphas`` and ``n_units_list``. The
    theory column is the closed-form prediction; the measured column
    root-finds the assembled chain's turning angle. Pairs admitting no
    closure (straight chains, or turning too weak to reach a full ring)
    are flagged instead of raising.
    """
    rows = []
    for alpha in alphas:
        for n in n_units_list:
            try:
                theory = closure_actuation(alpha, n)
                measured = _measured_closure(alpha, n)
                rows.append(ClosureRow(alpha=float(alpha), n_units=int(n),
                                       theory=theory, measured=measured,
                                       closes=True))
            except NoClosureError:
                rows.append(ClosureRow(alpha=float(alpha), n_units=int(n),
                                       theory=math.nan, measured=math.nan,
                                       closes=False))
    return tuple(rows)


# ===== Perturbative accuracy =====


@dataclass(frozen=True)
class PerturbationRow:
    """Per-unit center comparison of perturbative versus exact assembly."""

    index: int
    exact: tuple
    approximate: tuple
    error: float


def perturbation_validation(alpha0: float, epsilon: float, n_units: int,
                            psi: float, l: float = 1.0):
    """Node-wise error of the first-order configuration against the exact one.

    Builds the linear ratio profile alpha_j = alpha0 + epsilon j both ways
    and returns (max node error, per-node table).
    """
    alphas = tuple(alpha0 + epsilon * j for j in range(n_units))
    exact = assemble_chain(ChainSpec(alphas=alphas, l=l), psi)
    approx = perturbative_config(alpha0, epsilon, n_units, psi, l=l)
    rows = []
    worst = 0.0
    for j, (pe, pa) in enumerate(zip(exact.centers, approx.centers)):
        err = math.hypot(pe[0] - pa[0], pe[1] - pa[1])
        worst = max(worst, err)
        rows.append(PerturbationRow(index=j, exact=(pe[0], pe[1]),
                                    approximate=(pa[0], pa[1]), error=err))
    return worst, tuple(rows)
