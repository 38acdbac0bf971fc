"""Pure-Python tape interpreter.

Fallback twin of the compiled kernel in ``_kernel.pyx``: identical opcode
semantics and identical special-case arithmetic, so both backends produce
bit-identical values and gradients. Roughly two orders of magnitude slower;
selected automatically when the extension is missing or when
``SCISSOR_PURE_PYTHON=1``.

Opcode reference (shared by both backends; ``a``/``b`` are operand slots,
``c`` a float immediate, ``d`` an integer immediate):

====  ===========  =========================================================
code  name         semantics
====  ===========  =========================================================
0     INPUT        value = x[d]
1     CONST        value = c
2     IDENT        value = v[a] (used to pack interpolation tables)
3     ADD          v[a] + v[b]
4     SUB          v[a] - v[b]
5     MUL          v[a] * v[b]
6     DIV          v[a] / v[b]
7     NEG          -v[a]
8     ADDC         v[a] + c
9     SCALE        c * v[a]
10    POWI         v[a] ** d (integer exponent)
11    SIN          sin v[a]
12    COS          cos v[a]
13    TAN          tan v[a]
14    ATAN         atan v[a]
15    ATAN2        atan2(v[a], v[b])
16    ACOS_CLAMP   acos with a C1 rational saturation outside |x| <= 1-1e-9
17    SQRT         sqrt v[a]
18    EXP          exp v[a]
19    LOG          log v[a]
20    ABS          |v[a]| (subgradient 0 at 0)
21    RELU         max(v[a], 0) (subgradient 0 at 0)
22    STEP         1 if v[a] > 0 else 0 (zero derivative)
23    MIN2         min(v[a], v[b]) (ties route the adjoint to a)
24    MAX2         max(v[a], v[b]) (ties route the adjoint to a)
25    SIGMOID      logistic 1 / (1 + exp(-v[a]))
26    SINRATIO     sin(d * v[a]) / sin(v[a]), Taylor branch near v[a] = 0
27    INTERP       piecewise-linear table lookup; a = query slot, knots at
                   slots b..b+d-1, table values at slots b+d..b+2d-1
====  ===========  =========================================================

The forward pass reports the index of the first op producing NaN (or -1),
which the engine turns into a NaNPoisonError with the op name and recording
label. ``iscratch`` stores per-op integers: the saturation flag of
ACOS_CLAMP and the bracket index of INTERP.

Edge semantics are pinned so both backends agree bit-for-bit (C never
raises, so the Python fallback must not either):

* DIV (and POWI with a negative exponent) at an exactly-zero denominator
  yields NaN, reported as poisoning at that op.
* EXP and POWI overflow to +/-inf; trig of an infinite operand is NaN.
* Reverse-mode rules at measure-zero boundary points (ABS/RELU at 0, ATAN2
  at the origin, SQRT at 0, fully saturated ACOS_CLAMP) use the finite
  one-sided subgradient 0 rather than an infinite limit.
"""

from __future__ import annotations

import math

NAME = "pure-python"

ACOS_DELTA = 1e-9
SINRATIO_XTOL = 1e-4
INTERP_DKMIN = 1e-12


def sigmoid_value(x: float) -> float:
    """Overflow-safe logistic function, shared with record-time evaluation."""
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def acos_clamp_value(x: float) -> float:
    """acos of x softly clamped into (-1, 1); see ACOS_CLAMP above."""
    t = x if x >= 0.0 else -x
    if t <= 1.0 - ACOS_DELTA:
        return math.acos(x)
    u = t - 1.0 + 2.0 * ACOS_DELTA
    tc = 1.0 - ACOS_DELTA * ACOS_DELTA / u
    return math.acos(tc if x >= 0.0 else -tc)


def sinratio_value(k: int, x: float) -> float:
    """sin(k x)/sin(x) with a Taylor branch that is smooth through x = 0."""
    kf = float(k)
    if -SINRATIO_XTOL < x < SINRATIO_XTOL:
        x2 = x * x
        km1 = kf * kf - 1.0
        return kf * (1.0 - km1 * x2 / 6.0
                     + km1 * (3.0 * kf * kf - 7.0) * x2 * x2 / 360.0)
    arg = kf * x
    if math.isinf(x) or math.isinf(arg):
        return math.nan
    return math.sin(arg) / math.sin(x)


def powi_value(x: float, k: int) -> float:
    """Integer power with explicit small cases for cross-backend bit parity."""
    if k == 2:
        return x * x
    if k == 1:
        return x
    if k == 3:
        return x * x * x
    if k == -1:
        return 1.0 / x if x != 0.0 else math.nan
    if k == 0:
        return 1.0
    if x == 0.0 and k < 0:
        return math.nan
    try:
        return x ** k
    except OverflowError:
        return -math.inf if (x < 0.0 and k % 2 != 0) else math.inf


def interp_bracket(vals, base: int, count: int, q: float) -> int:
    """Index i of the knot interval containing q, clamped to [0, count-2]."""
    lo = 0
    hi = count - 1
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if vals[base + mid] <= q:
            lo = mid
        else:
            hi = mid
    return lo


def prepare(opcode, a, b, d, c):
    """Convert the frozen numpy program to plain lists for fast indexing."""
    return (opcode.tolist(), a.tolist(), b.tolist(), d.tolist(), c.tolist())


def _forward(prog, x, vals, iscr) -> int:
    opc, aa, bb, dd, cc = prog
    for i in range(len(opc)):
        op = opc[i]
        a = aa[i]
        if op == 0:
            v = x[dd[i]]
        elif op == 1:
            v = cc[i]
        elif op == 2:
            v = vals[a]
        elif op == 3:
            v = vals[a] + vals[bb[i]]
        elif op == 4:
            v = vals[a] - vals[bb[i]]
        elif op == 5:
            v = vals[a] * vals[bb[i]]
        elif op == 6:
            yv = vals[bb[i]]
            v = vals[a] / yv if yv != 0.0 else math.nan
        elif op == 7:
            v = -vals[a]
        elif op == 8:
            v = vals[a] + cc[i]
        elif op == 9:
            v = cc[i] * vals[a]
        elif op == 10:
            v = powi_value(vals[a], dd[i])
        elif op == 11:
            xv = vals[a]
            v = math.sin(xv) if not math.isinf(xv) else math.nan
        elif op == 12:
            xv = vals[a]
            v = math.cos(xv) if not math.isinf(xv) else math.nan
        elif op == 13:
            xv = vals[a]
            v = math.tan(xv) if not math.isinf(xv) else math.nan
        elif op == 14:
            v = math.atan(vals[a])
        elif op == 15:
            v = math.atan2(vals[a], vals[bb[i]])
        elif op == 16:
            xv = vals[a]
            t = xv if xv >= 0.0 else -xv
            if t <= 1.0 - ACOS_DELTA:
                v = math.acos(xv)
                iscr[i] = 0
            else:
                u = t - 1.0 + 2.0 * ACOS_DELTA
                tc = 1.0 - ACOS_DELTA * ACOS_DELTA / u
                v = math.acos(tc if xv >= 0.0 else -tc)
                iscr[i] = 1
        elif op == 17:
            xv = vals[a]
            v = math.sqrt(xv) if xv >= 0.0 else math.nan
        elif op == 18:
            try:
                v = math.exp(vals[a])
            except OverflowError:
                v = math.inf
        elif op == 19:
            xv = vals[a]
            v = math.log(xv) if xv > 0.0 else math.nan
        elif op == 20:
            xv = vals[a]
            v = xv if xv >= 0.0 else -xv
        elif op == 21:
            xv = vals[a]
            v = xv if xv > 0.0 else 0.0
        elif op == 22:
            v = 1.0 if vals[a] > 0.0 else 0.0
        elif op == 23:
            xv = vals[a]
            yv = vals[bb[i]]
            v = xv if xv <= yv else yv
        elif op == 24:
            xv = vals[a]
            yv = vals[bb[i]]
            v = xv if xv >= yv else yv
        elif op == 25:
            v = sigmoid_value(vals[a])
        elif op == 26:
            v = sinratio_value(dd[i], vals[a])
        elif op == 27:
            q = vals[a]
            base = bb[i]
            cnt = dd[i]
            ii = interp_bracket(vals, base, cnt, q)
            ki = vals[base + ii]
            dk = vals[base + ii + 1] - ki
            w = (q - ki) / dk if dk > INTERP_DKMIN else 0.0
            vi = vals[base + cnt + ii]
            v = vi + w * (vals[base + cnt + ii + 1] - vi)
            iscr[i] = ii
        else:
            raise AssertionError(f"unknown opcode {op}")
        vals[i] = v
        if v != v:
            return i
    return -1


def _backward(prog, vals, iscr, adj, grad) -> None:
    opc, aa, bb, dd, cc = prog
    for i in range(len(opc) - 1, -1, -1):
        ad = adj[i]
        if ad == 0.0:
            continue
        op = opc[i]
        a = aa[i]
        if op == 0:
            grad[dd[i]] += ad
        elif op == 1:
            pass
        elif op == 2:
            adj[a] += ad
        elif op == 3:
            adj[a] += ad
            adj[bb[i]] += ad
        elif op == 4:
            adj[a] += ad
            adj[bb[i]] -= ad
        elif op == 5:
            adj[a] += ad * vals[bb[i]]
            adj[bb[i]] += ad * vals[a]
        elif op == 6:
            yv = vals[bb[i]]
            adj[a] += ad / yv
            adj[bb[i]] -= ad * vals[i] / yv
        elif op == 7:
            adj[a] -= ad
        elif op == 8:
            adj[a] += ad
        elif op == 9:
            adj[a] += ad * cc[i]
        elif op == 10:
            k = dd[i]
            if k == 2:
                adj[a] += ad * 2.0 * vals[a]
            elif k == 1:
                adj[a] += ad
            elif k == 0:
                pass
            else:
                adj[a] += ad * k * powi_value(vals[a], k - 1)
        elif op == 11:
            adj[a] += ad * math.cos(vals[a])
        elif op == 12:
            adj[a] -= ad * math.sin(vals[a])
        elif op == 13:
            tv = vals[i]
            adj[a] += ad * (1.0 + tv * tv)
        elif op == 14:
            xv = vals[a]
            adj[a] += ad / (1.0 + xv * xv)
        elif op == 15:
            yv = vals[a]
            xv = vals[bb[i]]
            den = xv * xv + yv * yv
            if den > 0.0:
                adj[a] += ad * xv / den
                adj[bb[i]] -= ad * yv / den
        elif op == 16:
            xv = vals[a]
            if iscr[i] == 0:
                adj[a] -= ad / math.sqrt(1.0 - xv * xv)
            else:
                t = xv if xv >= 0.0 else -xv
                u = t - 1.0 + 2.0 * ACOS_DELTA
                tc = 1.0 - ACOS_DELTA * ACOS_DELTA / u
                dtc = ACOS_DELTA * ACOS_DELTA / (u * u)
                sq = math.sqrt(1.0 - tc * tc)
                if sq > 0.0:
                    adj[a] -= ad * dtc / sq
        elif op == 17:
            sv = vals[i]
            if sv > 0.0:
                adj[a] += ad * 0.5 / sv
        elif op == 18:
            adj[a] += ad * vals[i]
        elif op == 19:
            adj[a] += ad / vals[a]
        elif op == 20:
            xv = vals[a]
            if xv > 0.0:
                adj[a] += ad
            elif xv < 0.0:
                adj[a] -= ad
        elif op == 21:
            if vals[a] > 0.0:
                adj[a] += ad
        elif op == 22:
            pass
        elif op == 23:
            if vals[a] <= vals[bb[i]]:
                adj[a] += ad
            else:
                adj[bb[i]] += ad
        elif op == 24:
            if vals[a] >= vals[bb[i]]:
                adj[a] += ad
            else:
                adj[bb[i]] += ad
        elif op == 25:
            sv = vals[i]
            adj[a] += ad * sv * (1.0 - sv)
        elif op == 26:
            xv = vals[a]
            kf = float(dd[i])
            if -SINRATIO_XTOL < xv < SINRATIO_XTOL:
                km1 = kf * kf - 1.0
                der = kf * (-km1 * xv / 3.0
                            + km1 * (3.0 * kf * kf - 7.0) * xv * xv * xv / 90.0)
            else:
                s = math.sin(xv)
                der = (kf * math.cos(kf * xv) * s
                       - math.sin(kf * xv) * math.cos(xv)) / (s * s)
            adj[a] += ad * der
        elif op == 27:
            q = vals[a]
            base = bb[i]
            cnt = dd[i]
            ii = iscr[i]
            ki = vals[base + ii]
            ki1 = vals[base + ii + 1]
            dk = ki1 - ki
            dv = vals[base + cnt + ii + 1] - vals[base + cnt + ii]
            if dk > INTERP_DKMIN:
                w = (q - ki) / dk
                adj[base + cnt + ii] += ad * (1.0 - w)
                adj[base + cnt + ii + 1] += ad * w
                adj[a] += ad * dv / dk
                r = ad * dv / (dk * dk)
                adj[base + ii] += r * (q - ki1)
                adj[base + ii + 1] += r * (ki - q)
            else:
                adj[base + cnt + ii] += ad


def run_value(prog, n_inputs: int, x) -> tuple[float, int]:
    """Forward pass; returns (value, first_nan_index_or_minus_1)."""
    n = len(prog[0])
    vals = [0.0] * n
    iscr = [0] * n
    nan_at = _forward(prog, x, vals, iscr)
    return vals[n - 1], nan_at


def run_grad(prog, n_inputs: int, x):
    """Forward + reverse sweep; returns (value, gradient list, nan index)."""
    n = len(prog[0])
    vals = [0.0] * n
    iscr = [0] * n
    nan_at = _forward(prog, x, vals, iscr)
    grad = [0.0] * n_inputs
    if nan_at >= 0:
        return vals[nan_at], grad, nan_at
    adj = [0.0] * n
    adj[n - 1] = 1.0
    _backward(prog, vals, iscr, adj, grad)
    return vals[n - 1], grad, -1


def run_probe(prog, n_inputs: int, x):
    """Forward pass with diagnostics.

    Returns (value, nan_index, saturated_acos_ops, interp_brackets) where
    interp_brackets is a tuple of (op_index, bracket_index) pairs.
    """
    opc = prog[0]
    n = len(opc)
    vals = [0.0] * n
    iscr = [0] * n
    nan_at = _forward(prog, x, vals, iscr)
    saturated = tuple(i for i in range(n) if opc[i] == 16 and iscr[i] == 1)
    brackets = tuple((i, iscr[i]) for i in range(n) if opc[i] == 27)
    return vals[n - 1], nan_at, saturated, brackets
