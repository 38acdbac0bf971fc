"""Reverse-mode automatic differentiation engine.

Public surface re-exported from ``engine``; the replay kernels live in
``_kernel`` (Cython, optional) and ``_pykernel`` (pure Python fallback).
"""

from .engine import (
    CompiledFunction,
    DiffScalar,
    FiniteDiffEntry,
    FiniteDiffReport,
    ParamVector,
    Tape,
    active_backend,
    backend_name,
    finite_diff_check,
    grad,
    record,
)

__all__ = [
    "CompiledFunction",
    "DiffScalar",
    "FiniteDiffEntry",
    "FiniteDiffReport",
    "ParamVector",
    "Tape",
    "active_backend",
    "backend_name",
    "finite_diff_check",
    "grad",
    "record",
]
