"""Replay benchmark: compiled kernel versus pure-Python fallback.

Run as ``python3 -m scissorlab.benchmark``. Records the two production
tapes (shape-morph and trajectory-write losses), replays value-and-gradient
on every available backend, and prints a timing table. Also checks that the
backends agree bitwise on the replayed value, which is the property the
test suite relies on when it treats them as interchangeable.
"""

from __future__ import annotations

import math
import time

from .autodiff import record
from .autodiff import _pykernel
from .optimize import (
    MorphProblem,
    WriteProblem,
    _initial_raw,
    morph_loss,
    write_loss,
)
from .targets import analytic_targets, arclength_parameterize


def _backends():
    out = []
    try:
        from .autodiff import _kernel
        out.append(("cython", _kernel))
    except ImportError:
        pass
    out.append(("python", _pykernel))
    return out


def _time_call(fn, budget_s: float = 1.0) -> float:
    """Median seconds per call, measured within a fixed time budget."""
    fn()  # warm up
    t0 = time.perf_counter()
    fn()
    probe = time.perf_counter() - t0
    reps = max(3, min(200, int(budget_s / max(probe, 1e-6))))
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    times.sort()
    return times[len(times) // 2]


def _tapes():
    circle = analytic_targets("circle", {"r": 1.0})
    morph_target = arclength_parameterize(circle, 20)
    morph = MorphProblem(target=morph_target, n_units=20)
    morph_fn, _ = record(lambda pv: morph_loss(pv, morph),
                         _initial_raw(morph, seed=0))

    write_target = arclength_parameterize(circle, 100)
    write = WriteProblem(target=write_target, sections=8)
    write_fn, _ = record(lambda pv: write_loss(pv, write),
                         _initial_raw(write, seed=0))
    return [("morph N=20", morph_fn, _initial_raw(morph, seed=0)),
            ("write 8x400", write_fn, _initial_raw(write, seed=0))]


def main() -> int:
    backends = _backends()
    print(f"backends: {', '.join(name for name, _ in backends)}")
    header = f"{'tape':<14}{'ops':>9}  " + "".join(
        f"{name + ' (ms)':>14}" for name, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    agree = True
    for label, fn, x0 in _tapes():
        xs = x0.as_array()
        cells = []
        values = []
        for _, backend in backends:
            t = _time_call(lambda b=backend: fn.value_and_grad(xs, backend=b))
            cells.append(t * 1e3)
            values.append(fn.value(xs, backend=backend))
        row = f"{label:<14}{len(fn.opcode):>9}  " + "".join(
            f"{c:>14.3f}" for c in cells)
        if len(cells) == 2:
            row += f"{cells[1] / cells[0]:>9.1f}x"
        print(row)
        first = values[0]
        agree &= all(v == first or (math.isnan(v) and math.isnan(first))
                     for v in values)
    print(f"replayed values bitwise equal across backends: {agree}")
    return 0 if agree else 1


if __name__ == "__main__":
    raise SystemExit(main())
