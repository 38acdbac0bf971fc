"""Single scissor-unit geometry.

A unit is two rigid members of length ``l`` crossed at a pin joint placed a
fraction ``alpha`` along each member, opening to an internal angle ``phi``.
This module gives the unit-level quantities that the chain modules build on:
three discrete curvature measures, the unit's face width, its face normals,
the rotation angle between adjacent identical units, and the actuation angle
at which a uniform chain closes into a ring.

Sign convention used throughout the package: positive curvature bends the
assembly counterclockwise, and ``sign(curvature) = sign(2 alpha - 1)``, so
units with ``alpha > 0.5`` curve left.

All functions are generic over the scalar type: they accept plain floats or
``DiffScalar`` values (via ``scissorlab.smath``), so the same formulas serve
direct evaluation and gradient recording. Validation and domain errors apply
on the float path only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import smath
from .errors import DomainError, NoClosureError

__all__ = [
    "UnitGeometry",
    "UnitState",
    "CurvatureReport",
    "effective_curvature",
    "unit_width",
    "face_normals",
    "turning_curvature",
    "osculating_curvature",
    "unit_rotation_angle",
    "curvature_report",
    "closure_actuation",
    "PHI_MIN",
]

# Internal angles are clamped to this distance from the fold/open limits in
# pure geometry queries; optimizers keep angles away from the limits with
# their own penalties instead.
PHI_MIN = 1e-6


def _is_number(x) -> bool:
    return isinstance(x, (int, float))


@dataclass(frozen=True)
class UnitGeometry:
    """Intrinsic unit parameters: aspect ratio alpha in (0, 1), member length l > 0.

    ``alpha = 0.5`` is the symmetric unit (straight deployment); moving the
    pin off-center makes the unit turn. Fields may be DiffScalar during
    gradient recording, in which case no validation is performed.
    """

    alpha: float
    l: float

    def __post_init__(self):
        if _is_number(self.alpha) and not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must be in (0, 1), got {self.alpha}")
        if _is_number(self.l) and not self.l > 0.0:
            raise DomainError(f"member length must be positive, got {self.l}")


@dataclass(frozen=True)
class UnitState:
    """Configuration of one unit: internal angle phi in (0, pi) radians.

    ``phi -> 0`` aligns the two member directions (maximal extension, where
    all curvature measures diverge); ``phi -> pi`` anti-aligns them and the
    face width collapses to zero. Actuation sweeps that deploy a chain move
    phi from near pi toward 0.
    """

    phi: float

    def __post_init__(self):
        if _is_number(self.phi) and not 0.0 < self.phi < math.pi:
            raise DomainError(f"phi must be in (0, pi), got {self.phi}")


@dataclass(frozen=True)
class CurvatureReport:
    """The three curvature measures of one unit plus its face width.

    ``kappa_o`` (effective, from face-tangent rotation across the width) and
    ``kappa_t`` (turning, chord bend angle per chord length) both vanish for
    the symmetric unit and agree in sign with ``2 alpha - 1``. The
    osculating measure ``kappa_osc`` is implemented in its standard printed
    form and deliberately does NOT vanish at ``alpha = 0.5`` (it equals
    ``2 tan(phi/2) / l`` there); see ``osculating_curvature``.
    """

    kappa_o: float
    kappa_t: float
    kappa_osc: float
    width: float


def _clamp_phi(phi):
    if smath.is_diff(phi):
        return smath.smin(smath.smax(phi, PHI_MIN), math.pi - PHI_MIN)
    return min(max(phi, PHI_MIN), math.pi - PHI_MIN)


def effective_curvature(u: UnitGeometry, s: UnitState):
    """Signed curvature from the rotation of the unit's face tangents.

    Returns ``(2a - 1) / (2 a (1 - a) l sin(phi/2))``: the angle between the
    east and west face tangents divided by the unit width. This is the
    curvature measure the inverse-design losses use.
    """
    phi = _clamp_phi(s.phi)
    a = u.alpha
    return (2.0 * a - 1.0) / (2.0 * a * (1.0 - a) * u.l * smath.sin(phi * 0.5))


def unit_width(u: UnitGeometry, s: UnitState):
    """Width of the unit across its faces: ``4 a (1 - a) l cos(phi/2)``."""
    phi = _clamp_phi(s.phi)
    a = u.alpha
    return 4.0 * a * (1.0 - a) * u.l * smath.cos(phi * 0.5)


def face_normals(u: UnitGeometry, s: UnitState, beta: float):
    """East and west face normals of a unit whose first member points at beta.

    With member tangents ``t1`` at angle ``beta`` and ``t2`` at angle
    ``beta + pi - phi`` (head-to-tail orientation), the normals are the
    linear combinations ``N_e = a l t1 + (1 - a) l t2`` and ``N_w`` with the
    coefficients swapped. Returned as two (x, y) tuples, not normalized.
    """
    phi = _clamp_phi(s.phi)
    a = u.alpha
    t1x = smath.cos(beta)
    t1y = smath.sin(beta)
    gamma = beta + (math.pi - phi)
    t2x = smath.cos(gamma)
    t2y = smath.sin(gamma)
    w1 = a * u.l
    w2 = (1.0 - a) * u.l
    n_e = (w1 * t1x + w2 * t2x, w1 * t1y + w2 * t2y)
    n_w = (w2 * t1x + w1 * t2x, w2 * t1y + w1 * t2y)
    return n_e, n_w


def unit_rotation_angle(u: UnitGeometry, s: UnitState):
    """Relative rotation between adjacent identical units.

    Computed as ``pi - 2 atan2(sin(phi/2), (2a - 1) cos(phi/2))``, which is
    algebraically ``2 arctan((2a - 1) tan((pi - phi)/2))`` but well defined
    for every alpha in (0, 1). Zero for the symmetric unit, positive for
    alpha > 0.5 (counterclockwise deployment), in (-pi, pi).
    """
    phi = _clamp_phi(s.phi)
    half = phi * 0.5
    return math.pi - 2.0 * smath.atan2(smath.sin(half),
                                       (2.0 * u.alpha - 1.0) * smath.cos(half))


def turning_curvature(u: UnitGeometry, s: UnitState):
    """Signed turning curvature: chord bend angle per chord length.

    Three consecutive identical units have center-to-center chords of length
    ``2 a l sin(eta/2)`` meeting at exterior angle ``phi*``, where
    ``eta = pi - (phi + phi*)`` and ``sin(eta/2) = cos((phi + phi*)/2)``.
    The ratio ``phi* / chord`` vanishes for the symmetric unit, diverges as
    ``phi -> 0``, and shares its sign with ``2 alpha - 1``.
    """
    phi = _clamp_phi(s.phi)
    phi_star = unit_rotation_angle(u, s)
    chord = 2.0 * u.alpha * u.l * smath.cos((phi + phi_star) * 0.5)
    return phi_star / chord


def osculating_curvature(u: UnitGeometry, s: UnitState):
    """Curvature of the circle osculating one member pair: ``tan(phi/2) / ((1-a) l)``.

    Implemented in its standard printed form. Note the deliberate asymmetry
    with the other two measures: this one does not vanish for the symmetric
    unit (``alpha = 0.5`` gives ``2 tan(phi/2) / l``), so only ``kappa_o``
    and ``kappa_t`` satisfy the vanishes-at-symmetry property.
    """
    phi = _clamp_phi(s.phi)
    return smath.tan(phi * 0.5) / ((1.0 - u.alpha) * u.l)


def curvature_report(u: UnitGeometry, s: UnitState) -> CurvatureReport:
    """All three curvature measures plus the face width for one unit."""
    return CurvatureReport(
        kappa_o=effective_curvature(u, s),
        kappa_t=turning_curvature(u, s),
        kappa_osc=osculating_curvature(u, s),
        width=unit_width(u, s),
    )


def closure_actuation(alpha: float, n_units: int) -> float:
    """Actuation angle at which a uniform N-unit chain closes into a ring.

    Solves ``N phi*(alpha, psi) = 2 pi`` in closed form:
    ``psi* = 2 arctan((2 alpha - 1) / tan(pi / N))``. Requires alpha > 0.5
    (with alpha < 0.5 the chain turns the other way and ``phi*`` < 0, so no
    counterclockwise closure exists; the symmetric chain is straight and
    never closes).
    """
    if not isinstance(n_units, int) or n_units < 3:
        raise DomainError(f"n_units must be an integer >= 3, got {n_units}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must be in (0, 1), got {alpha}")
    arg = (2.0 * alpha - 1.0) / math.tan(math.pi / n_units)
    if arg <= 0.0:
        raise NoClosureError(
            f"no closed configuration for alpha={alpha}, N={n_units}: "
            "closure requires alpha > 0.5")
    return 2.0 * math.atan(arg)
