"""Prior-recursion baselines, each realizing every sub-result immediately.

Families:
  r2006     range DP g[s..e] = g[s..s+2L-1] OR (AND(t_s, t_{s+2}, ..) AND g[s+2L..e])
  hs2017    range DP g[s..e] = g[s..s+2L] AND (OR(t_{s+1}, t_{s+3}, ..) OR g*[s+2L+1..e])
  immediate the main table's split families, but both operands of every
            combination are realized to fan-in-2 form on the spot

Each cell stores one realized circuit (its delay and size); the best split is
chosen per cell by delay, then size. Circuits are reconstructed on demand.
"""

from __future__ import annotations

import time

from .core import (
    AND,
    OR,
    AopInstance,
    Gate,
    InvariantViolation,
    Leaf,
    Signal,
    ValidationError,
    ceil_log2_int,
    circuit_delay,
    circuit_size,
    dualize,
    to_circuit,
)
from .huffman import huffman_combine, huffman_delay
from .optimizer import OptimizationResult, _structure

R2006 = "r2006"
HS2017 = "hs2017"
IMMEDIATE = "immediate"
FAMILIES = (R2006, HS2017, IMMEDIATE)

_EXACT_SPREAD_LIMIT = 4096


class _Ctx:
    def __init__(self, inst: AopInstance):
        self.inst = inst
        self.m = inst.m
        self.integral = inst.is_integral and inst.spread <= _EXACT_SPREAD_LIMIT
        if self.integral:
            self.shift = int(min(inst.arrivals))
            self.arrs = tuple(int(a) - self.shift for a in inst.arrivals)
            self.pw = tuple(1 << a for a in self.arrs)
            # prefix sums of input weights by index parity, for O(1) range sums
            psum = [[0] * (self.m + 1), [0] * (self.m + 1)]
            for i in range(self.m):
                for par in (0, 1):
                    psum[par][i + 1] = psum[par][i] + (self.pw[i] if i % 2 == par else 0)
            self.psum = psum
        else:
            self.shift = 0
            self.arrs = tuple(float(a) for a in inst.arrivals)

    def huff_ranged(self, lo, hi, parity, child_delay):
        """Delay of combining inputs in [lo, hi) of one parity plus a child signal."""
        if self.integral:
            p = self.psum[parity]
            return ceil_log2_int(p[hi] - p[lo] + (1 << child_delay))
        return huffman_delay(
            [self.arrs[p] for p in range(lo + ((parity - lo) % 2), hi, 2)] + [child_delay]
        )


# ---------------------------------------------------------------------------
# r2006


def _r2006_tables(ctx: _Ctx):
    m = ctx.m
    arrs = ctx.arrs
    delay = [[None] * m for _ in range(m)]
    size = [[0] * m for _ in range(m)]
    lam = [[None] * m for _ in range(m)]
    for length in range(1, m + 1):
        for s in range(0, m - length + 1):
            e = s + length - 1
            if length == 1:
                delay[s][e] = arrs[s]
                continue
            if length == 2:
                delay[s][e] = 1 + max(arrs[s], arrs[e])
                size[s][e] = 1
                continue
            best = None
            for l in range(1, (e - s) // 2 + 1):
                mid = s + 2 * l
                hf = ctx.huff_ranged(s, mid - 1, s % 2, delay[mid][e])
                d = 1 + max(delay[s][mid - 1], hf)
                sz = size[s][mid - 1] + size[mid][e] + l + 1
                if best is None or (d, sz) < (best[0], best[1]):
                    best = (d, sz, l)
            delay[s][e], size[s][e], lam[s][e] = best
    return delay, size, lam


def _r2006_signal(ctx: _Ctx, lam, leaves, s: int, e: int) -> Signal:
    arrs = ctx.inst.arrivals
    if s == e:
        return Signal(leaves[s], arrs[s])
    if e == s + 1:
        return Signal(Gate(AND, leaves[s], leaves[e]), 1 + max(arrs[s], arrs[e]))
    l = lam[s][e]
    mid = s + 2 * l
    first = _r2006_signal(ctx, lam, leaves, s, mid - 1)
    rest = _r2006_signal(ctx, lam, leaves, mid, e)
    sigs = [Signal(leaves[p], arrs[p]) for p in range(s, mid - 1, 2)] + [rest]
    and_part = huffman_combine(sigs, AND)
    return Signal(
        Gate(OR, first.source, and_part.source), 1 + max(first.arrival, and_part.arrival)
    )


# ---------------------------------------------------------------------------
# hs2017 (delay/size tables are orientation-independent; kinds fixed on rebuild)


def _hs2017_tables(ctx: _Ctx):
    m = ctx.m
    arrs = ctx.arrs
    delay = [[None] * m for _ in range(m)]
    size = [[0] * m for _ in range(m)]
    lam = [[None] * m for _ in range(m)]
    for length in range(1, m + 1):
        for s in range(0, m - length + 1):
            e = s + length - 1
            if length == 1:
                delay[s][e] = arrs[s]
                continue
            best = None
            for l in range(0, (e - s - 1) // 2 + 1):
                mid = s + 2 * l
                hf = ctx.huff_ranged(s + 1, mid + 1, (s + 1) % 2, delay[mid + 1][e])
                d = 1 + max(delay[s][mid], hf)
                sz = size[s][mid] + size[mid + 1][e] + l + 1
                if best is None or (d, sz) < (best[0], best[1]):
                    best = (d, sz, l)
            delay[s][e], size[s][e], lam[s][e] = best
    return delay, size, lam


def _hs2017_signal(ctx: _Ctx, lam, leaves, s: int, e: int, dual: bool) -> Signal:
    arrs = ctx.inst.arrivals
    if s == e:
        return Signal(leaves[s], arrs[s])
    outer = OR if dual else AND
    inner = AND if dual else OR
    l = lam[s][e]
    mid = s + 2 * l
    first = _hs2017_signal(ctx, lam, leaves, s, mid, dual)
    rest = _hs2017_signal(ctx, lam, leaves, mid + 1, e, not dual)
    sigs = [Signal(leaves[p], arrs[p]) for p in range(s + 1, mid + 1, 2)] + [rest]
    or_part = huffman_combine(sigs, inner)
    return Signal(
        Gate(outer, first.source, or_part.source),
        1 + max(first.arrival, or_part.arrival),
    )


# ---------------------------------------------------------------------------
# immediate realization over the full extended-path split families


def _immediate_tables(ctx: _Ctx):
    cells, index, splits_all = _structure(ctx.m)
    arrs = ctx.arrs
    n = len(cells)
    delay = [None] * n
    size = [0] * n
    prov = [None] * n
    for ci in range(n):
        sp = splits_all[ci]
        if sp is None:
            i, j, k = cells[ci]
            idx = tuple(range(i, j, 2)) + tuple(range(j, k + 1))
            if ctx.integral:
                delay[ci] = ceil_log2_int(sum(ctx.pw[p] for p in idx))
            else:
                delay[ci] = huffman_delay([arrs[p] for p in idx])
            size[ci] = len(idx) - 1
            continue
        best = None
        for t in sp:
            c1, c2 = t[1], t[4]
            d = 1 + max(delay[c1], delay[c2])
            sz = size[c1] + size[c2] + 1
            if best is None or (d, sz) < (best[0], best[1]):
                best = (d, sz, t)
        delay[ci], size[ci], prov[ci] = best
    return cells, index, delay, size, prov


def _immediate_signal(ctx, cells, prov, leaves, ci: int, dual: bool, memo) -> Signal:
    key = (ci, dual)
    got = memo.get(key)
    if got is not None:
        return got
    arrs = ctx.inst.arrivals
    t = prov[ci]
    if t is None:
        i, j, k = cells[ci]
        idx = tuple(range(i, j, 2)) + tuple(range(j, k + 1))
        sig = huffman_combine(
            [Signal(leaves[p], arrs[p]) for p in idx], OR if dual else AND
        )
    else:
        kia, c1, _, d1, c2, _, d2 = t
        kind = AND if kia != dual else OR
        s1 = _immediate_signal(ctx, cells, prov, leaves, c1, dual ^ d1, memo)
        s2 = _immediate_signal(ctx, cells, prov, leaves, c2, dual ^ d2, memo)
        sig = Signal(Gate(kind, s1.source, s2.source), 1 + max(s1.arrival, s2.arrival))
    memo[key] = sig
    return sig


# ---------------------------------------------------------------------------
# public surface


def baseline_stats(inst: AopInstance, family: str) -> tuple[float, int]:
    """(delay, size) of the family's solution without building the circuit."""
    ctx = _Ctx(inst)
    if family == R2006:
        delay, size, _ = _r2006_tables(ctx)
        return float(delay[0][ctx.m - 1] + ctx.shift), size[0][ctx.m - 1]
    if family == HS2017:
        delay, size, _ = _hs2017_tables(ctx)
        return float(delay[0][ctx.m - 1] + ctx.shift), size[0][ctx.m - 1]
    if family == IMMEDIATE:
        _, index, delay, size, _ = _immediate_tables(ctx)
        root = index[(0, 0, ctx.m - 1)]
        return float(delay[root] + ctx.shift), size[root]
    raise ValidationError(f"unknown baseline family {family!r}")


def optimize_baseline(inst: AopInstance, family: str) -> OptimizationResult:
    """Run one reconstructed prior algorithm and build its circuit."""
    t0 = time.perf_counter()
    ctx = _Ctx(inst)
    leaves = tuple(Leaf(i, a) for i, a in enumerate(inst.arrivals))
    if family == R2006:
        dtab, stab, lam = _r2006_tables(ctx)
        sig = _r2006_signal(ctx, lam, leaves, 0, ctx.m - 1)
        want = float(dtab[0][ctx.m - 1] + ctx.shift), stab[0][ctx.m - 1]
    elif family == HS2017:
        dtab, stab, lam = _hs2017_tables(ctx)
        sig = _hs2017_signal(ctx, lam, leaves, 0, ctx.m - 1, False)
        want = float(dtab[0][ctx.m - 1] + ctx.shift), stab[0][ctx.m - 1]
    elif family == IMMEDIATE:
        cells, index, dtab, stab, prov = _immediate_tables(ctx)
        root = index[(0, 0, ctx.m - 1)]
        sig = _immediate_signal(ctx, cells, prov, leaves, root, False, {})
        want = float(dtab[root] + ctx.shift), stab[root]
    else:
        raise ValidationError(f"unknown baseline family {family!r}")
    circuit = to_circuit(sig.source)
    if inst.variant == "g_star":
        circuit = dualize(circuit)
    delay = circuit_delay(circuit)
    size = circuit_size(circuit)
    if abs(delay - want[0]) > 1e-9 or size != want[1]:
        raise InvariantViolation(
            f"{family}: rebuilt circuit ({delay}, {size}) != table stats {want}"
        )
    return OptimizationResult(
        circuit, delay, size, "delay", {"family": family, "elapsed_s": time.perf_counter() - t0}
    )
