"""Reverse-mode automatic differentiation on a scalar tape.

The engine records a computation once, through operator overloading on
DiffScalar, into a flat single-assignment program (one output slot per op).
The frozen program is then replayed, forward and backward, by one of two
interchangeable kernels: a Cython extension (``_kernel``) or a pure-Python
twin (``_pykernel``). Recording is Python-speed and happens once per problem
structure; optimizers replay the same program thousands of times with new
input values.

Every primitive is branchless with respect to the inputs (saturating acos,
Taylor-switched sin ratios, subgradient min/max/abs/relu, execute-time
interpolation brackets), so a program recorded at one point remains valid on
the whole parameter domain. DiffScalar deliberately refuses comparisons and
float conversion: any data-dependent branch during recording would freeze
that branch into the tape, which is exactly the bug class this forbids.

Design notes:

- Gradients are exact for the recorded graph; finite_diff_check provides an
  independent numerical cross-check and flags coordinates sitting on a
  subgradient boundary (saturated clamp, interpolation knot) instead of
  failing them.
- A NaN anywhere in a forward replay aborts with the offending op named
  (NaN poisoning), including the recording label active when the op was
  emitted.
- CompiledFunction is immutable and safe to share across threads; every
  evaluation allocates its own scratch buffers.
"""

from __future__ import annotations

import contextlib
import math
import os
from array import array
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from ..errors import NaNPoisonError, UnsupportedPrimitiveError
from . import _pykernel

__all__ = [
    "DiffScalar",
    "Tape",
    "CompiledFunction",
    "ParamVector",
    "FiniteDiffEntry",
    "FiniteDiffReport",
    "record",
    "grad",
    "finite_diff_check",
    "active_backend",
    "backend_name",
]

# ===== Opcodes (documented in _pykernel) =====

OP_INPUT = 0
OP_CONST = 1
OP_IDENT = 2
OP_ADD = 3
OP_SUB = 4
OP_MUL = 5
OP_DIV = 6
OP_NEG = 7
OP_ADDC = 8
OP_SCALE = 9
OP_POWI = 10
OP_SIN = 11
OP_COS = 12
OP_TAN = 13
OP_ATAN = 14
OP_ATAN2 = 15
OP_ACOS_CLAMP = 16
OP_SQRT = 17
OP_EXP = 18
OP_LOG = 19
OP_ABS = 20
OP_RELU = 21
OP_STEP = 22
OP_MIN2 = 23
OP_MAX2 = 24
OP_SIGMOID = 25
OP_SINRATIO = 26
OP_INTERP = 27

OP_NAMES = (
    "input", "const", "ident", "add", "sub", "mul", "div", "neg", "addc",
    "scale", "powi", "sin", "cos", "tan", "atan", "atan2", "acos_clamp",
    "sqrt", "exp", "log", "abs", "relu", "step", "min2", "max2", "sigmoid",
    "sinratio", "interp",
)

_SUPPORTED = ("+, -, *, /, sin, cos, tan, atan, atan2, acos (clamped), "
              "sqrt, exp, log, abs, relu, step, min, max, sigmoid, "
              "integer powers, sin-ratio, linear interpolation")


# ===== Backend selection =====

_cached_backend = None


def active_backend():
    """The kernel module used by default: compiled if available, else pure.

    ``SCISSOR_PURE_PYTHON=1`` forces the pure-Python kernel.
    """
    global _cached_backend
    if _cached_backend is None:
        if os.environ.get("SCISSOR_PURE_PYTHON", "") == "1":
            _cached_backend = _pykernel
        else:
            try:
                from . import _kernel
                _cached_backend = _kernel
            except ImportError:
                _cached_backend = _pykernel
    return _cached_backend


def backend_name() -> str:
    return active_backend().NAME


# ===== Recording =====

class Tape:
    """Mutable op recorder. Not thread-safe during recording.

    Use ``tape.input`` to create differentiable leaves, build the output with
    DiffScalar arithmetic and smath functions, then freeze everything with
    ``tape.compile(output)``.
    """

    def __init__(self) -> None:
        self._opc = array("i")
        self._a = array("i")
        self._b = array("i")
        self._d = array("i")
        self._c = array("d")
        self._values: list[float] = []  # record-time value per slot
        self._label_marks: list[tuple[int, str]] = []
        self._label = ""
        self.input_names: list[str] = []

    def __len__(self) -> int:
        return len(self._opc)

    @contextlib.contextmanager
    def label(self, text: str):
        """Tag ops recorded inside the block, for NaN diagnostics."""
        prev = self._label
        self._set_label(text)
        try:
            yield
        finally:
            self._set_label(prev)

    def _set_label(self, text: str) -> None:
        self._label = text
        marks = self._label_marks
        pos = len(self._opc)
        if marks and marks[-1][0] == pos:
            marks[-1] = (pos, text)
        else:
            marks.append((pos, text))

    def _push(self, opcode: int, a: int, b: int, d: int, c: float,
              value: float) -> "DiffScalar":
        slot = len(self._opc)
        self._opc.append(opcode)
        self._a.append(a)
        self._b.append(b)
        self._d.append(d)
        self._c.append(c)
        self._values.append(value)
        return DiffScalar(self, slot, value)

    def input(self, value: float, name: str | None = None) -> "DiffScalar":
        """Create a differentiable leaf; its order defines the input index."""
        idx = len(self.input_names)
        self.input_names.append(name if name is not None else f"x{idx}")
        return self._push(OP_INPUT, -1, -1, idx, 0.0, float(value))

    def const(self, value: float) -> "DiffScalar":
        """A constant occupying a slot (needed inside interpolation tables)."""
        value = float(value)
        return self._push(OP_CONST, -1, -1, 0, value, value)

    def lift(self, x) -> "DiffScalar":
        """Return x as a DiffScalar on this tape (constants get a slot)."""
        if isinstance(x, DiffScalar):
            if x.tape is not self:
                raise UnsupportedPrimitiveError(
                    "cannot mix scalars from different tapes")
            return x
        return self.const(x)

    def interp(self, query, knots, values) -> "DiffScalar":
        """Differentiable piecewise-linear interpolation.

        Gradients flow to the query, the knot positions, and the table
        values. Knots must be sorted ascending at evaluation time; the
        bracket is located at every replay, so a single recording covers
        moving knots. Queries outside the knot range extrapolate linearly
        from the end intervals. Intervals narrower than 1e-12 fall back to
        the left value with a zero derivative (subgradient choice).
        """
        if len(knots) != len(values):
            raise ValueError("knots and values must have equal length")
        if len(knots) < 2:
            raise ValueError("interpolation needs at least 2 knots")
        q = self.lift(query)
        # lift everything first: lifting a constant pushes a CONST op, and
        # the kernels need the IDENT table block to be contiguous
        knots = [self.lift(kx) for kx in knots]
        values = [self.lift(vx) for vx in values]
        base = len(self._opc)
        for kx in knots:
            self._push(OP_IDENT, kx.slot, -1, 0, 0.0, kx.value)
        for vx in values:
            self._push(OP_IDENT, vx.slot, -1, 0, 0.0, vx.value)
        count = len(knots)
        # record-time value via the same bracket rule as the kernels
        kf = self._values[base:base + count]
        qi = min(max(bisect_right(kf, q.value) - 1, 0), count - 2)
        dk = kf[qi + 1] - kf[qi]
        w = (q.value - kf[qi]) / dk if dk > _pykernel.INTERP_DKMIN else 0.0
        vi = self._values[base + count + qi]
        vi1 = self._values[base + count + qi + 1]
        return self._push(OP_INTERP, q.slot, base, count, 0.0,
                          vi + w * (vi1 - vi))

    def compile(self, output: "DiffScalar") -> "CompiledFunction":
        """Freeze the tape into an immutable, replayable function."""
        if not isinstance(output, DiffScalar) or output.tape is not self:
            raise ValueError("output must be a DiffScalar recorded on this tape")
        if output.slot != len(self._opc) - 1:
            self._push(OP_IDENT, output.slot, -1, 0, 0.0, output.value)
        return CompiledFunction(
            opcode=np.frombuffer(self._opc, dtype=np.int32).copy(),
            a=np.frombuffer(self._a, dtype=np.int32).copy(),
            b=np.frombuffer(self._b, dtype=np.int32).copy(),
            d=np.frombuffer(self._d, dtype=np.int32).copy(),
            c=np.frombuffer(self._c, dtype=np.float64).copy(),
            input_names=tuple(self.input_names),
            label_marks=tuple(self._label_marks),
        )


class DiffScalar:
    """A scalar bound to a tape; arithmetic on it records ops.

    Supports +, -, *, / (with floats or other DiffScalars on the same tape),
    unary minus, abs, and integer powers. Transcendental functions live in
    ``scissorlab.smath`` so the same kinematics code runs on plain floats and
    DiffScalars alike. Comparisons and float() raise: they would silently
    freeze a data-dependent branch or detach the gradient.
    """

    __slots__ = ("tape", "slot", "value")

    def __init__(self, tape: Tape, slot: int, value: float):
        self.tape = tape
        self.slot = slot
        self.value = value

    # ----- recording helpers -----

    def _u(self, opcode: int, value: float, d: int = 0) -> "DiffScalar":
        return self.tape._push(opcode, self.slot, -1, d, 0.0, value)

    def _uc(self, opcode: int, c: float, value: float) -> "DiffScalar":
        return self.tape._push(opcode, self.slot, -1, 0, c, value)

    def _bin(self, opcode: int, other: "DiffScalar", value: float) -> "DiffScalar":
        if other.tape is not self.tape:
            raise UnsupportedPrimitiveError("cannot mix scalars from different tapes")
        return self.tape._push(opcode, self.slot, other.slot, 0, 0.0, value)

    # ----- arithmetic -----

    def __add__(self, other):
        if isinstance(other, DiffScalar):
            return self._bin(OP_ADD, other, self.value + other.value)
        other = float(other)
        return self._uc(OP_ADDC, other, self.value + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, DiffScalar):
            return self._bin(OP_SUB, other, self.value - other.value)
        other = float(other)
        return self._uc(OP_ADDC, -other, self.value - other)

    def __rsub__(self, other):
        neg = self._u(OP_NEG, -self.value)
        other = float(other)
        return neg._uc(OP_ADDC, other, other - self.value)

    def __mul__(self, other):
        if isinstance(other, DiffScalar):
            return self._bin(OP_MUL, other, self.value * other.value)
        other = float(other)
        return self._uc(OP_SCALE, other, self.value * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, DiffScalar):
            return self._bin(OP_DIV, other, self.value / other.value)
        other = float(other)
        return self._uc(OP_SCALE, 1.0 / other, self.value * (1.0 / other))

    def __rtruediv__(self, other):
        inv = self._u(OP_POWI, _pykernel.powi_value(self.value, -1), d=-1)
        other = float(other)
        return inv._uc(OP_SCALE, other, other * inv.value)

    def __neg__(self):
        return self._u(OP_NEG, -self.value)

    def __abs__(self):
        return self._u(OP_ABS, abs(self.value))

    def __pow__(self, k):
        if isinstance(k, int) and not isinstance(k, bool):
            return self._u(OP_POWI, _pykernel.powi_value(self.value, k), d=k)
        raise UnsupportedPrimitiveError(
            f"only integer powers are differentiable; supported primitives: {_SUPPORTED}")

    # ----- forbidden conversions -----

    def _refuse(self, what: str):
        raise UnsupportedPrimitiveError(
            f"{what} on a DiffScalar is not recordable; supported primitives: "
            + _SUPPORTED)

    def __float__(self):
        self._refuse("float() conversion (it would detach the gradient)")

    def __bool__(self):
        self._refuse("truth testing (data-dependent branching)")

    def __lt__(self, other):
        self._refuse("comparison (data-dependent branching)")

    __le__ = __gt__ = __ge__ = __lt__

    def __repr__(self) -> str:
        return f"DiffScalar(slot={self.slot}, value={self.value!r})"


# ===== Frozen programs =====

@dataclass(frozen=True)
class EvalDiagnostics:
    """Result of a diagnostic forward pass."""
    value: float
    nan_op: int                      # -1 when the pass was NaN-free
    saturated_acos: tuple[int, ...]  # op indices running in the clamp branch
    interp_brackets: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class CompiledFunction:
    """An immutable recorded program; thread-safe to evaluate and share."""

    opcode: np.ndarray
    a: np.ndarray
    b: np.ndarray
    d: np.ndarray
    c: np.ndarray
    input_names: tuple[str, ...]
    label_marks: tuple[tuple[int, str], ...]

    def __post_init__(self):
        object.__setattr__(self, "_programs", {})

    @property
    def n_ops(self) -> int:
        return len(self.opcode)

    @property
    def n_inputs(self) -> int:
        return len(self.input_names)

    def _program(self, backend):
        progs = self._programs
        key = id(backend)
        prog = progs.get(key)
        if prog is None:
            prog = backend.prepare(self.opcode, self.a, self.b, self.d, self.c)
            progs[key] = prog
        return prog

    def _describe(self, op_index: int) -> tuple[str, str | None]:
        name = OP_NAMES[self.opcode[op_index]]
        label = None
        for pos, text in self.label_marks:
            if pos <= op_index:
                label = text or None
            else:
                break
        return name, label

    def _x(self, x) -> list[float]:
        xs = [float(v) for v in x]
        if len(xs) != self.n_inputs:
            raise ValueError(f"expected {self.n_inputs} inputs, got {len(xs)}")
        return xs

    def value(self, x, backend=None) -> float:
        """Replay the forward pass at input vector x."""
        backend = backend or active_backend()
        v, nan_at = backend.run_value(self._program(backend), self.n_inputs,
                                      self._x(x))
        if nan_at >= 0:
            name, label = self._describe(nan_at)
            raise NaNPoisonError(nan_at, name, label)
        return v

    def value_and_grad(self, x, backend=None) -> tuple[float, np.ndarray]:
        """Replay forward and reverse sweeps; gradient w.r.t. all inputs."""
        backend = backend or active_backend()
        v, g, nan_at = backend.run_grad(self._program(backend), self.n_inputs,
                                        self._x(x))
        if nan_at >= 0:
            name, label = self._describe(nan_at)
            raise NaNPoisonError(nan_at, name, label)
        return v, np.asarray(g, dtype=float)

    def diagnostics(self, x, backend=None) -> EvalDiagnostics:
        """Forward pass that reports NaN and subgradient-boundary activity."""
        backend = backend or active_backend()
        v, nan_at, sat, br = backend.run_probe(self._program(backend),
                                               self.n_inputs, self._x(x))
        return EvalDiagnostics(v, nan_at, tuple(sat), tuple(br))


# ===== Parameter vectors =====

class ParamVector:
    """Ordered, named scalar parameters.

    The ordering is the gradient ordering. Values are floats in ordinary
    use; during recording the engine substitutes DiffScalars, so functions
    of a ParamVector must stick to smath/operator arithmetic.
    """

    __slots__ = ("names", "values")

    def __init__(self, names, values):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError("parameter names must be unique")
        values = tuple(values)
        if len(values) != len(names):
            raise ValueError("names and values must have equal length")
        self.names = names
        self.values = values

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, key):
        if isinstance(key, str):
            return self.values[self.names.index(key)]
        return self.values[key]

    def with_values(self, values) -> "ParamVector":
        return ParamVector(self.names, values)

    def as_array(self) -> np.ndarray:
        return np.asarray([float(v) for v in self.values], dtype=float)

    def __repr__(self) -> str:
        inner = ", ".join(f"{n}={v!r}" for n, v in zip(self.names, self.values))
        return f"ParamVector({inner})"


# ===== High-level API =====

def record(f, at: ParamVector) -> tuple[CompiledFunction, float]:
    """Record f once at the given point; returns (program, recorded value)."""
    tape = Tape()
    leaves = tuple(tape.input(float(v), name=n)
                   for n, v in zip(at.names, at.values))
    out = f(at.with_values(leaves))
    if not isinstance(out, DiffScalar):
        out = tape.const(float(out))
    return tape.compile(out), out.value


def grad(f, at: ParamVector, backend=None) -> tuple[float, np.ndarray]:
    """Value and exact gradient of a scalar function of a ParamVector."""
    fn, _ = record(f, at)
    return fn.value_and_grad(at.as_array(), backend=backend)


@dataclass(frozen=True)
class FiniteDiffEntry:
    name: str
    analytic: float
    numeric: float
    rel_error: float
    boundary: bool


@dataclass(frozen=True)
class FiniteDiffReport:
    """Central-difference cross-check of a recorded gradient.

    Coordinates whose perturbation toggles a clamp branch or an
    interpolation bracket sit on a subgradient boundary; they are reported
    (``boundary_names``) but excluded from the pass/fail verdict, since a
    two-sided difference is not a valid derivative estimate there.
    """
    value: float
    max_rel_error: float
    passed: bool
    entries: tuple[FiniteDiffEntry, ...]
    boundary_names: tuple[str, ...]


def finite_diff_check(f, at: ParamVector, step: float = 1e-6,
                      tolerance: float = 1e-5, backend=None) -> FiniteDiffReport:
    """Compare the recorded gradient of f with central finite differences."""
    if step <= 0.0:
        raise ValueError("step must be positive")
    fn, _ = record(f, at)
    backend = backend or active_backend()
    x0 = at.as_array()
    value, g = fn.value_and_grad(x0, backend=backend)
    base = fn.diagnostics(x0, backend=backend)
    entries = []
    boundary_names = []
    max_rel = 0.0
    for i, name in enumerate(at.names):
        h = step * max(1.0, abs(x0[i]))
        xp = x0.copy()
        xp[i] += h
        xm = x0.copy()
        xm[i] -= h
        dp = fn.diagnostics(xp, backend=backend)
        dm = fn.diagnostics(xm, backend=backend)
        boundary = (dp.saturated_acos != base.saturated_acos
                    or dm.saturated_acos != base.saturated_acos
                    or dp.interp_brackets != base.interp_brackets
                    or dm.interp_brackets != base.interp_brackets)
        numeric = (dp.value - dm.value) / (2.0 * h)
        denom = max(abs(g[i]), abs(numeric), 1e-8)
        rel = abs(g[i] - numeric) / denom
        if boundary:
            boundary_names.append(name)
        else:
            max_rel = max(max_rel, rel)
        entries.append(FiniteDiffEntry(name, float(g[i]), numeric, rel, boundary))
    return FiniteDiffReport(value, max_rel, max_rel < tolerance,
                            tuple(entries), tuple(boundary_names))
