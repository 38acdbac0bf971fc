"""Chain forward kinematics: exact, closed-form segmented, and perturbative.

Three routes to the same geometry, used to cross-check each other:

* ``assemble_chain``: exact unit-by-unit assembly. Internal angles follow a
  law-of-cosines recursion, member orientations accumulate the alternating
  rotation structure, and centers chain through the shared pin joints.
* ``tip_segmented`` / ``sweep_tip``: closed-form tip position for a chain of
  constant-ratio sections. Each section is traversed with one geometric-sum
  step (cost O(sections), not O(units)), which is what makes dense actuation
  sweeps cheap inside gradient loops.
* ``perturbative_config``: first-order configuration for a slowly varying
  aspect-ratio profile ``alpha_j = alpha0 + epsilon j``.

Conventions (shared with ``scissorlab.geometry``): unit j carries a bisector
angle ``chi_j``; its members point along ``chi_j - phi_j/2`` (first member,
``t1``) and ``chi_j + phi_j/2`` (second member, ``t2``). The first unit is
symmetric about the base direction. Consecutive units share two pin joints:

    r_{j+1} = r_j + l (alpha_j t1_j + alpha_{j+1} t2_{j+1})
    chi_{j+1} = chi_j + (phistar_j + phistar_{j+1}) / 2

where ``phistar`` is the relative rotation from ``geometry``. The chain tip
is the center of the last unit. All functions accept DiffScalar inputs so
the same code records gradient tapes; domain errors are raised on the float
path only (recorded tapes stay smooth via clamped primitives and report
saturation through diagnostics instead).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import smath
from .errors import DomainError, InfeasibleAssemblyError

__all__ = [
    "ChainSpec",
    "ChainConfig",
    "SectionedSpec",
    "TipTrajectory",
    "propagate_angles",
    "assemble_chain",
    "center_shift",
    "tip_segmented",
    "sweep_tip",
    "perturbative_config",
]

# Tolerance on the law-of-cosines argument: overshoots of cos(phi) beyond
# [-1, 1] by at most this much are clamped; larger ones mean the assembly
# physically cannot reach the actuation state.
COS_OVERSHOOT_TOL = 1e-9


def _is_number(x) -> bool:
    return isinstance(x, (int, float))


def _set(obj, field, value):
    object.__setattr__(obj, field, value)


# ===== Domain types =====


@dataclass(frozen=True)
class ChainSpec:
    """A chain of N units: per-unit aspect ratios, member length, base pose.

    ``base_position`` is the center of the first unit and ``base_angle`` the
    bisector direction of the first unit (the whole assembly rotates rigidly
    with it).
    """

    alphas: tuple
    l: float = 1.0
    base_position: tuple = (0.0, 0.0)
    base_angle: float = 0.0

    def __post_init__(self):
        _set(self, "alphas", tuple(self.alphas))
        _set(self, "base_position", tuple(self.base_position))
        if len(self.alphas) < 1:
            raise DomainError("chain needs at least one unit")
        for j, a in enumerate(self.alphas):
            if _is_number(a) and not 0.0 < a < 1.0:
                raise DomainError(f"alpha[{j}] must be in (0, 1), got {a}")
        if _is_number(self.l) and not self.l > 0.0:
            raise DomainError(f"member length must be positive, got {self.l}")


@dataclass(frozen=True)
class ChainConfig:
    """Assembled configuration at one actuation angle.

    ``orientations[j]`` holds the two member direction angles of unit j,
    ``(chi_j - phi_j/2, chi_j + phi_j/2)``. ``phis[0]`` equals the actuation
    angle. The chain tip is ``centers[-1]``.
    """

    psi: float
    phis: tuple
    centers: tuple
    orientations: tuple

    def __post_init__(self):
        _set(self, "phis", tuple(self.phis))
        _set(self, "centers", tuple(self.centers))
        _set(self, "orientations", tuple(self.orientations))


@dataclass(frozen=True)
class SectionedSpec:
    """A chain of J constant-ratio sections: ``sections[j] = (n_units, alpha)``.

    ``base_position`` is the center of the first unit; ``base_direction`` is
    a 2-vector giving the first unit's bisector direction (normalized on
    construction when numeric). Equivalent to the ``ChainSpec`` obtained by
    repeating each section's alpha, which is how it is tested.
    """

    sections: tuple
    l: float = 1.0
    base_position: tuple = (0.0, 0.0)
    base_direction: tuple = (1.0, 0.0)

    def __post_init__(self):
        _set(self, "sections", tuple((n, a) for n, a in self.sections))
        _set(self, "base_position", tuple(self.base_position))
        _set(self, "base_direction", tuple(self.base_direction))
        if len(self.sections) < 1:
            raise DomainError("need at least one section")
        total = 0
        for s, (n, a) in enumerate(self.sections):
            if not isinstance(n, int) or n < 1:
                raise DomainError(f"section {s}: unit count must be a positive "
                                  f"integer, got {n}")
            if _is_number(a) and not 0.0 < a < 1.0:
                raise DomainError(f"section {s}: alpha must be in (0, 1), got {a}")
            total += n
        if total < 2:
            raise DomainError("sectioned chain needs at least two units in total")
        if _is_number(self.l) and not self.l > 0.0:
            raise DomainError(f"member length must be positive, got {self.l}")
        dx, dy = self.base_direction
        if _is_number(dx) and _is_number(dy):
            norm = math.hypot(dx, dy)
            if norm <= 0.0:
                raise DomainError("base_direction must be a nonzero 2-vector")
            _set(self, "base_direction", (dx / norm, dy / norm))

    @property
    def n_units(self) -> int:
        return sum(n for n, _ in self.sections)

    def as_chain_spec(self) -> ChainSpec:
        """Equivalent per-unit chain (used as the exact oracle)."""
        alphas = []
        for n, a in self.sections:
            alphas.extend([a] * n)
        dx, dy = self.base_direction
        return ChainSpec(alphas=tuple(alphas), l=self.l,
                         base_position=self.base_position,
                         base_angle=smath.atan2(dy, dx))


@dataclass(frozen=True)
class TipTrajectory:
    """Tip positions sampled over a strictly decreasing actuation grid."""

    psi_grid: tuple
    points: tuple

    def __post_init__(self):
        _set(self, "psi_grid", tuple(self.psi_grid))
        _set(self, "points", tuple(self.points))
        if len(self.psi_grid) != len(self.points):
            raise DomainError("psi_grid and points must have equal length")


# ===== Angle propagation =====


def _rotation_angle(alpha, half_phi):
    """Relative unit rotation from alpha and the half internal angle."""
    return math.pi - 2.0 * smath.atan2(
        smath.sin(half_phi), (2.0 * alpha - 1.0) * smath.cos(half_phi))


def _advance_cos_half(c, h_prev, h_next, where: str):
    """Next unit's cos(phi/2) from the shared-diagonal constraint.

    The squared diagonal of a unit is ``1 - 4 h cos^2(phi/2)`` (in units of
    l) with ``h = alpha (1 - alpha)``; consecutive units share it, giving
    ``c' = c sqrt(h_prev / h_next)``. Floats are validated (the clamp
    tolerance corresponds to a cos(phi) overshoot of COS_OVERSHOOT_TOL);
    DiffScalar values pass through and rely on the clamped arccos downstream.
    """
    if smath.is_diff(c) or smath.is_diff(h_prev) or smath.is_diff(h_next):
        return c * smath.sqrt(h_prev / h_next)
    c2 = c * c * h_prev / h_next
    if c2 > 1.0 + 0.5 * COS_OVERSHOOT_TOL:
        raise InfeasibleAssemblyError(
            f"{where}: needs cos^2(phi/2) = {c2:.12g} > 1; the assembly "
            "cannot reach this actuation state")
    return math.sqrt(min(c2, 1.0))


def _half_from_cos(c):
    """phi/2 from its cosine; assumes c already validated/clamped on floats."""
    if smath.is_diff(c):
        return smath.acos(c)
    return math.acos(min(max(c, -1.0), 1.0))


def propagate_angles(alphas, psi):
    """Internal angles of every unit given the first unit's angle.

    The first angle is the actuation angle itself; each next angle comes
    from the shared-diagonal (law of cosines) constraint between adjacent
    units. Raises InfeasibleAssemblyError (float path) when a unit cannot
    open wide enough to span the shared diagonal.
    """
    if _is_number(psi) and not 0.0 < psi < math.pi:
        raise DomainError(f"psi must be in (0, pi), got {psi}")
    phis = [psi]
    c = smath.cos(psi * 0.5)
    a_prev = alphas[0]
    h_prev = a_prev * (1.0 - a_prev)
    for j, a in enumerate(alphas[1:], start=1):
        h = a * (1.0 - a)
        c = _advance_cos_half(c, h_prev, h, f"unit {j}")
        phis.append(2.0 * _half_from_cos(c))
        h_prev = h
    return tuple(phis)


# ===== Exact assembly =====


def assemble_chain(spec: ChainSpec, psi) -> ChainConfig:
    """Exact configuration of the full chain at one actuation angle.

    Bisector angles accumulate half the relative rotation of each adjacent
    unit pair; centers chain through the shared pin joints. Rigid-motion
    equivariant in the base pose by construction.
    """
    phis = propagate_angles(spec.alphas, psi)
    n = len(spec.alphas)
    l = spec.l
    halves = [p * 0.5 for p in phis]
    stars = [_rotation_angle(a, h) for a, h in zip(spec.alphas, halves)]

    chis = [spec.base_angle]
    for j in range(1, n):
        chis.append(chis[j - 1] + 0.5 * (stars[j - 1] + stars[j]))

    orientations = tuple((chis[j] - halves[j], chis[j] + halves[j])
                         for j in range(n))

    x, y = spec.base_position
    centers = [(x, y)]
    for j in range(1, n):
        a_prev = spec.alphas[j - 1]
        a = spec.alphas[j]
        t1_prev = orientations[j - 1][0]
        t2 = orientations[j][1]
        x = x + l * (a_prev * smath.cos(t1_prev) + a * smath.cos(t2))
        y = y + l * (a_prev * smath.sin(t1_prev) + a * smath.sin(t2))
        centers.append((x, y))

    return ChainConfig(psi=psi, phis=phis, centers=tuple(centers),
                       orientations=orientations)


# ===== Sectioned closed form =====


def center_shift(alpha_a, alpha_b, phi_a, l=1.0):
    """Signed jump of the center of curvature across a section interface.

    For sections of ratios ``alpha_a`` (upstream, internal angle ``phi_a``
    at this actuation) and ``alpha_b`` (downstream), the two circular arcs'
    centers differ by

        zeta = l D (alpha_b / (2 alpha_b - 1) - alpha_a / (2 alpha_a - 1))

    measured along the left normal of the interface tangent, where
    ``D = sqrt(1 - 4 h_a cos^2(phi_a/2))`` is the shared unit diagonal (a
    constant along the chain, so either section's angle gives the same D).
    Antisymmetric under swapping the sections (with the downstream angle
    from the shared-diagonal constraint). Undefined for straight sections
    (alpha = 0.5), whose arc center sits at infinity.
    """
    for name, a in (("alpha_a", alpha_a), ("alpha_b", alpha_b)):
        if _is_number(a):
            if not 0.0 < a < 1.0:
                raise DomainError(f"{name} must be in (0, 1), got {a}")
            if a == 0.5:
                raise DomainError(
                    f"{name} = 0.5: a straight section has no finite center "
                    "of curvature")
    h_a = alpha_a * (1.0 - alpha_a)
    c = smath.cos(phi_a * 0.5)
    diag = smath.sqrt(1.0 - 4.0 * h_a * c * c)
    return l * diag * (alpha_b / (2.0 * alpha_b - 1.0)
                       - alpha_a / (2.0 * alpha_a - 1.0))


def tip_segmented(spec: SectionedSpec, psi):
    """Closed-form tip position (center of the last unit) at one actuation.

    Walks the sections once: within a section of n units the n-1 center
    steps form a circular arc and collapse to a single chord via the
    sine-ratio geometric sum (which degenerates smoothly to a straight
    translation at alpha = 0.5); interfaces take one exact pin-joint step.
    Agrees with assemble_chain on the equivalent per-unit chain to roundoff.

    Returns (x, y). Raises InfeasibleAssemblyError (float path) naming the
    section that cannot reach the actuation state.
    """
    if _is_number(psi) and not 0.0 < psi < math.pi:
        raise DomainError(f"psi must be in (0, pi), got {psi}")
    l = spec.l
    dx, dy = spec.base_direction
    chi = smath.atan2(dy, dx)
    x, y = spec.base_position

    c = smath.cos(psi * 0.5)
    half = psi * 0.5
    prev_a = prev_half = prev_star = None
    h_prev = None
    for s, (n, a) in enumerate(spec.sections):
        h = a * (1.0 - a)
        if s > 0:
            c = _advance_cos_half(c, h_prev, h, f"section {s}")
            half = _half_from_cos(c)
        star = _rotation_angle(a, half)
        if s > 0:
            chi_new = chi + 0.5 * (prev_star + star)
            x = x + l * (prev_a * smath.cos(chi - prev_half)
                         + a * smath.cos(chi_new + half))
            y = y + l * (prev_a * smath.sin(chi - prev_half)
                         + a * smath.sin(chi_new + half))
            chi = chi_new
        if n > 1:
            chord = 2.0 * a * l * smath.cos(half + star * 0.5)
            adv = chord * smath.sinratio(n - 1, star * 0.5)
            ang = chi + (n - 1) * star * 0.5
            x = x + adv * smath.cos(ang)
            y = y + adv * smath.sin(ang)
            chi = chi + (n - 1) * star
        prev_a, prev_half, prev_star = a, half, star
        h_prev = h
    return (x, y)


def sweep_tip(spec: SectionedSpec, psi_max, psi_min, n_samples: int) -> TipTrajectory:
    """Tip positions over a uniform actuation sweep from psi_max down to psi_min."""
    if not isinstance(n_samples, int) or n_samples < 2:
        raise DomainError(f"n_samples must be an integer >= 2, got {n_samples}")
    if _is_number(psi_max) and _is_number(psi_min):
        if not math.pi > psi_max > psi_min > 0.0:
            raise DomainError(
                f"need pi > psi_max > psi_min > 0, got ({psi_max}, {psi_min})")
    step = (psi_max - psi_min) / (n_samples - 1)
    grid = [psi_max - k * step for k in range(n_samples)]
    points = []
    for k, psi in enumerate(grid):
        try:
            points.append(tip_segmented(spec, psi))
        except InfeasibleAssemblyError as exc:
            raise InfeasibleAssemblyError(
                f"sweep sample {k} (psi = {psi if _is_number(psi) else '?'}): "
                f"{exc}") from exc
    return TipTrajectory(psi_grid=tuple(grid), points=tuple(points))


# ===== Perturbative configuration =====


def perturbative_config(alpha0, epsilon, n_units: int, psi, l: float = 1.0,
                        base_position=(0.0, 0.0),
                        base_angle: float = 0.0) -> ChainConfig:
    """First-order configuration for the linear profile alpha_j = alpha0 + epsilon j.

    Unit j (zero-based; the first unit is exactly alpha0) gets

        phi_j  = psi + epsilon j Lambda
        chi_j  = beta0 + j phistar0 + epsilon (mu/2) j^2

    where Lambda is the linearized angle-propagation rate and mu the
    linearized per-unit rotation rate; the quadratic bisector term is exact
    at first order because consecutive half-rotations telescope. Centers
    accumulate the pin-joint steps using these first-order orientations.
    Accurate to O(epsilon^2 N^2); intended for |epsilon| N <~ 0.1.
    """
    if not isinstance(n_units, int) or n_units < 1:
        raise DomainError(f"n_units must be a positive integer, got {n_units}")
    if not 0.0 < alpha0 < 1.0:
        raise DomainError(f"alpha0 must be in (0, 1), got {alpha0}")
    if not 0.0 < psi < math.pi:
        raise DomainError(f"psi must be in (0, pi), got {psi}")
    last = alpha0 + epsilon * (n_units - 1)
    if not 0.0 < last < 1.0:
        raise DomainError(
            f"profile leaves (0, 1): alpha of last unit would be {last}")

    h0 = alpha0 * (1.0 - alpha0)
    t = 1.0 / math.tan(psi * 0.5)
    lam = (1.0 - 2.0 * alpha0) / h0 * t
    k0 = 2.0 * alpha0 - 1.0
    den = 1.0 + (k0 * t) ** 2
    mu = (4.0 * t - k0 * (1.0 + t * t) * lam) / den
    star0 = math.pi - 2.0 * math.atan2(math.sin(psi * 0.5),
                                       k0 * math.cos(psi * 0.5))

    phis = []
    chis = []
    orientations = []
    for j in range(n_units):
        phi = psi + epsilon * j * lam
        chi = base_angle + j * star0 + 0.5 * epsilon * mu * j * j
        phis.append(phi)
        chis.append(chi)
        orientations.append((chi - 0.5 * phi, chi + 0.5 * phi))

    x, y = base_position
    centers = [(x, y)]
    for j in range(1, n_units):
        a_prev = alpha0 + epsilon * (j - 1)
        a = alpha0 + epsilon * j
        t1_prev = orientations[j - 1][0]
        t2 = orientations[j][1]
        x += l * (a_prev * math.cos(t1_prev) + a * math.cos(t2))
        y += l * (a_prev * math.sin(t1_prev) + a * math.sin(t2))
        centers.append((x, y))

    return ChainConfig(psi=psi, phis=tuple(phis), centers=tuple(centers),
                       orientations=tuple(orientations))
