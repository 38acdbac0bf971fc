"""Scalar math generic over plain floats and DiffScalar.

Every kinematic and loss formula in this package is written against these
functions, so a single code path serves ordinary evaluation and gradient
recording. On floats they defer to ``math`` (with the same clamping and
branch rules as the tape kernels); on DiffScalar they record the matching
tape op.
"""

from __future__ import annotations

import math
from bisect import bisect_right

from .autodiff import _pykernel
from .autodiff.engine import (
    DiffScalar,
    OP_ACOS_CLAMP,
    OP_ATAN,
    OP_ATAN2,
    OP_COS,
    OP_EXP,
    OP_LOG,
    OP_MAX2,
    OP_MIN2,
    OP_RELU,
    OP_SIGMOID,
    OP_SIN,
    OP_SINRATIO,
    OP_SQRT,
    OP_STEP,
    OP_TAN,
)

__all__ = [
    "is_diff", "sin", "cos", "tan", "atan", "atan2", "acos", "sqrt", "exp",
    "log", "relu", "step", "smin", "smax", "sigmoid", "sinratio", "hypot",
    "interp",
]


def is_diff(x) -> bool:
    """True when x is a recording scalar rather than a plain number."""
    return isinstance(x, DiffScalar)


def sin(x):
    if isinstance(x, DiffScalar):
        return x._u(OP_SIN, math.sin(x.value))
    return math.sin(x)


def cos(x):
    if isinstance(x, DiffScalar):
        return x._u(OP_COS, math.cos(x.value))
    return math.cos(x)


def tan(x):
    if isinstance(x, DiffScalar):
        return x._u(OP_TAN, math.tan(x.value))
    return math.tan(x)


def atan(x):
    if isinstance(x, DiffScalar):
        return x._u(OP_ATAN, math.atan(x.value))
    return math.atan(x)


def atan2(y, x):
    if isinstance(y, DiffScalar) or isinstance(x, DiffScalar):
        tape = y.tape if isinstance(y, DiffScalar) else x.tape
        yd = tape.lift(y)
        xd = tape.lift(x)
        return yd._bin(OP_ATAN2, xd, math.atan2(yd.value, xd.value))
    return math.atan2(y, x)


def acos(x):
    """arccos with a smooth clamp: arguments beyond |x| = 1 - 1e-9 saturate.

    The clamp is C1 and monotone, so gradients stay finite when an angle
    recursion grazes the edge of feasibility; feasibility itself is policed
    separately (exceptions on the float path, penalties in optimizers).
    """
    if isinstance(x, DiffScalar):
        return x._u(OP_ACOS_CLAMP, _pykernel.acos_clamp_value(x.value))
    return _pykernel.acos_clamp_value(x)


def sqrt(x):
    if isinstance(x, DiffScalar):
        return x._u(OP_SQRT, math.sqrt(x.value) if x.value >= 0.0 else math.nan)
    return math.sqrt(x)


def exp(x):
    if isinstance(x, DiffScalar):
        return x._u(OP_EXP, math.exp(x.value))
    return math.exp(x)


def log(x):
    if isinstance(x, DiffScalar):
        return x._u(OP_LOG, math.log(x.value) if x.value > 0.0 else math.nan)
    return math.log(x)


def relu(x):
    """max(x, 0) with subgradient 0 at the kink."""
    if isinstance(x, DiffScalar):
        return x._u(OP_RELU, x.value if x.value > 0.0 else 0.0)
    return x if x > 0.0 else 0.0


def step(x):
    """Heaviside step (1 for x > 0); derivative defined as 0 everywhere."""
    if isinstance(x, DiffScalar):
        return x._u(OP_STEP, 1.0 if x.value > 0.0 else 0.0)
    return 1.0 if x > 0.0 else 0.0


def smin(x, y):
    """min with the adjoint routed to the smaller argument (ties: first)."""
    if isinstance(x, DiffScalar) or isinstance(y, DiffScalar):
        tape = x.tape if isinstance(x, DiffScalar) else y.tape
        xd = tape.lift(x)
        yd = tape.lift(y)
        return xd._bin(OP_MIN2, yd,
                       xd.value if xd.value <= yd.value else yd.value)
    return x if x <= y else y


def smax(x, y):
    """max with the adjoint routed to the larger argument (ties: first)."""
    if isinstance(x, DiffScalar) or isinstance(y, DiffScalar):
        tape = x.tape if isinstance(x, DiffScalar) else y.tape
        xd = tape.lift(x)
        yd = tape.lift(y)
        return xd._bin(OP_MAX2, yd,
                       xd.value if xd.value >= yd.value else yd.value)
    return x if x >= y else y


def sigmoid(x):
    if isinstance(x, DiffScalar):
        return x._u(OP_SIGMOID, _pykernel.sigmoid_value(x.value))
    return _pykernel.sigmoid_value(x)


def sinratio(k: int, x):
    """sin(k x)/sin(x) for integer k, smooth through x = 0.

    Equals the length ratio of a k-step circular-arc chord to its unit step;
    at x = 0 it degenerates to k (straight chain limit) without a branch in
    the recorded graph.
    """
    k = int(k)
    if isinstance(x, DiffScalar):
        return x._u(OP_SINRATIO, _pykernel.sinratio_value(k, x.value), d=k)
    return _pykernel.sinratio_value(k, x)


def hypot(dx, dy):
    """Euclidean norm with a floor that keeps the gradient finite at 0."""
    return sqrt(smax(dx * dx + dy * dy, 1e-24))


def interp(query, knots, values):
    """Piecewise-linear interpolation, differentiable in all three slots.

    On floats this mirrors the tape op exactly: the bracket is clamped to
    the knot range (linear extrapolation outside) and intervals narrower
    than 1e-12 return the left value.
    """
    tape = None
    for v in (query, *knots, *values):
        if isinstance(v, DiffScalar):
            tape = v.tape
            break
    if tape is not None:
        return tape.interp(query, list(knots), list(values))
    kf = [float(k) for k in knots]
    i = min(max(bisect_right(kf, query) - 1, 0), len(kf) - 2)
    dk = kf[i + 1] - kf[i]
    w = (query - kf[i]) / dk if dk > _pykernel.INTERP_DKMIN else 0.0
    return values[i] + w * (values[i + 1] - values[i])
