"""Dynamic program over extended And-Or paths with deferred output gates.

The table holds, per index triple (i, j, k) with j - i even, undetermined
circuits realizing the extended And-Or path, one best candidate per output
gate kind ("delay" mode) or a Pareto front over (weight, size) ("delay-size"
mode). Candidates are combined by two split families:

    OR  split: (i, j, k) = (i, j, j+2L-1)  OR  (i, j+2L, k)        1 <= L <= (k-j)/2
    AND split: (i, j, k) = (i, j, j+2L)    AND dual(j+1, j+2L+1, k) 0 <= L <= (k-j-1)/2

Merging flattens an operand whose output kind matches the combining gate and
realizes (Huffman-codes) it otherwise, always by minimum weight contribution.
Only the final circuit is materialized; table cells carry scalar stats plus a
provenance chain, which keeps the table build allocation-light.

Weights are exact shifted integers for integral arrival times and log2-domain
floats otherwise (compared with absolute tolerance 1e-9).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from functools import lru_cache
from operator import itemgetter

from .core import (
    AND,
    OR,
    AopInstance,
    Circuit,
    ExtAopRef,
    InvariantViolation,
    Leaf,
    Signal,
    UndeterminedCircuit,
    ValidationError,
    circuit_delay,
    circuit_size,
    dual_expr,
    dual_kind,
    dualize,
    log2_add,
    to_circuit,
    weight_log2,
)
from .huffman import huffman_combine, huffman_delay

MODE_DELAY = "delay"
MODE_DELAY_SIZE = "delay-size"
MODES = (MODE_DELAY, MODE_DELAY_SIZE)

PARETO_CAP = 32
WEIGHT_TOL = 1e-9

# integral instances switch to exact integer weights up to this arrival spread
_EXACT_SPREAD_LIMIT = 4096


@dataclass(frozen=True)
class SplitDescriptor:
    kind: str  # combining gate of the split
    lam: int
    left: ExtAopRef
    right: ExtAopRef


def enumerate_splits(i: int, j: int, k: int) -> list[SplitDescriptor]:
    """All decompositions of (i, j, k) into strictly smaller operand pairs."""
    if k <= j + 1:
        raise ValidationError(f"({i},{j},{k}) is a base cell and has no splits")
    out = []
    for lam in range(1, (k - j) // 2 + 1):
        out.append(
            SplitDescriptor(
                OR, lam, ExtAopRef(i, j, j + 2 * lam - 1), ExtAopRef(i, j + 2 * lam, k)
            )
        )
    for lam in range(0, (k - j - 1) // 2 + 1):
        out.append(
            SplitDescriptor(
                AND,
                lam,
                ExtAopRef(i, j, j + 2 * lam),
                ExtAopRef(j + 1, j + 2 * lam + 1, k, dual=True),
            )
        )
    return out


def base_candidate(i: int, j: int, k: int, inst: AopInstance) -> UndeterminedCircuit:
    """Base cell (k <= j+1): a plain conjunction of the referenced inputs."""
    if k > j + 1:
        raise ValidationError(f"({i},{j},{k}) is not a base cell")
    ref = ExtAopRef(i, j, k)
    if k >= inst.m:
        raise ValidationError(f"({i},{j},{k}) does not fit instance with m={inst.m}")
    sigs = tuple(
        Signal(Leaf(p, inst.arrivals[p]), inst.arrivals[p]) for p in ref.input_indices()
    )
    kind = AND if len(sigs) > 1 else None
    return UndeterminedCircuit(kind, sigs, weight_log2(s.arrival for s in sigs), 0)


def merge(kind: str, operands) -> UndeterminedCircuit:
    """Combine operand candidates under one `kind` gate, deferring realization.

    Each operand is a sequence of interchangeable candidate options. Per
    operand and option the contribution is the option's own signals (flatten,
    legal when its output kind matches `kind` or is undecided) or one signal
    combined by Huffman coding (realize, otherwise); the option with the
    smallest contribution weight wins, ties broken by smaller realized size,
    then in favor of flattening.
    """
    option_lists = [tuple(ops) for ops in operands]
    if len(option_lists) < 2:
        raise ValidationError("merge needs at least two operands")
    chosen = []
    for options in option_lists:
        if not options:
            raise InvariantViolation("missing operand candidate in merge")
        best = None
        for u in options:
            if u.out_kind == kind or u.out_kind is None:
                entry = (u.log2_weight, u.internal_gates + len(u.preds), False, u)
            else:
                d = huffman_delay([s.arrival for s in u.preds])
                entry = (d, u.internal_gates + len(u.preds), True, u)
            if best is None or entry[0] < best[0] - WEIGHT_TOL:
                best = entry
            elif entry[0] <= best[0] + WEIGHT_TOL and (
                entry[1] < best[1] or (entry[1] == best[1] and best[2] and not entry[2])
            ):
                best = entry
        chosen.append(best)
    sigs: list[Signal] = []
    gates = 0
    for _, _, realize_it, u in chosen:
        preds = u.preds
        if u.dualized:
            preds = tuple(Signal(dual_expr(s.source), s.arrival) for s in preds)
        if realize_it:
            sigs.append(huffman_combine(preds, u.out_kind))
            gates += u.internal_gates + len(preds) - 1
        else:
            sigs.extend(preds)
            gates += u.internal_gates
    return UndeterminedCircuit(
        kind, tuple(sigs), weight_log2(s.arrival for s in sigs), gates
    )


def realize(u: UndeterminedCircuit) -> Circuit:
    """Fix the output gate by Huffman coding over the pending signals."""
    preds = u.preds
    if u.dualized:
        preds = tuple(Signal(dual_expr(s.source), s.arrival) for s in preds)
    if u.out_kind is None:
        return to_circuit(preds[0].source)
    return to_circuit(huffman_combine(preds, u.out_kind).source)


# ---------------------------------------------------------------------------
# Table internals


class Cand:
    """One stored table candidate; scalar stats plus a provenance chain.

    `w` is the exact scaled integer weight (integral instances) or the log2
    weight (otherwise). `sz` is internal_gates + pending signal count, so the
    realized size is sz - 1. `rw`/`rdelay` cache the weight contribution and
    arrival this candidate has when realized. `preds` keeps the pending
    arrival multiset in float mode only (None for integral instances).
    """

    __slots__ = ("kind", "w", "sz", "ig", "rw", "rdelay", "preds", "prov")

    def __init__(self, kind, w, sz, ig, rw, rdelay, preds, prov):
        self.kind = kind
        self.w = w
        self.sz = sz
        self.ig = ig
        self.rw = rw
        self.rdelay = rdelay
        self.preds = preds
        self.prov = prov

    @property
    def realized_size(self) -> int:
        return self.sz - 1


@lru_cache(maxsize=128)
def _structure(m: int, max_lambda: int | None = None):
    """Static DP skeleton for m inputs: cell order, index, encoded splits.

    Split tuples are (kind_is_and, c1, matchA1, dual1, c2, matchA2, dual2)
    where matchA says whether the operand option that matches the combining
    kind sits in the cell's AND slot.
    """
    triples = []
    for j in range(m):
        for i in range(j, -1, -2):
            for k in range(j, m):
                triples.append((i, j, k))
    triples.sort(key=lambda t: ((t[1] - t[0]) // 2 + t[2] - t[1] + 1, t))
    index = {t: ci for ci, t in enumerate(triples)}
    splits: list[tuple | None] = []
    for i, j, k in triples:
        if k <= j + 1:
            splits.append(None)
            continue
        sp = []
        for d in enumerate_splits(i, j, k):
            if max_lambda is not None and d.lam > max_lambda:
                continue
            kia = d.kind == AND
            c1 = index[(d.left.i, d.left.j, d.left.k)]
            c2 = index[(d.right.i, d.right.j, d.right.k)]
            ma1 = kia == (not d.left.dual)
            ma2 = kia == (not d.right.dual)
            sp.append((kia, c1, ma1, d.left.dual, c2, ma2, d.right.dual))
        splits.append(tuple(sp))
    return tuple(triples), index, tuple(splits)


class DpTable:
    """Filled DP table plus the context needed to materialize candidates."""

    def __init__(self, instance, mode, integral, shift, cells, index, and_e, or_e, stats):
        self.instance = instance
        self.mode = mode
        self.integral = integral
        self.shift = shift
        self.cells = cells
        self.index = index
        self._and = and_e
        self._or = or_e
        self.stats = stats
        self._leaves = tuple(Leaf(i, a) for i, a in enumerate(instance.arrivals))

    def candidates(self, i: int, j: int, k: int) -> dict[str, tuple[Cand, ...]]:
        ci = self.index[(i, j, k)]
        out = {}
        for key, slot in ((AND, self._and[ci]), (OR, self._or[ci])):
            if slot is None or slot == ():
                out[key] = ()
            elif isinstance(slot, list):
                out[key] = tuple(e[3] for e in slot)
            else:
                out[key] = (slot[3],)
        return out

    def log2_weight(self, cand: Cand) -> float:
        if self.integral:
            return math.log2(cand.w) + self.shift
        return cand.w

    def realized_delay(self, cand: Cand) -> float:
        if self.integral:
            return float(cand.rdelay + self.shift)
        return cand.rdelay

    def undetermined(self, cand: Cand, dual: bool = False) -> UndeterminedCircuit:
        """Materialize a stored candidate into a full undetermined circuit."""
        memo: dict[tuple[int, bool], UndeterminedCircuit] = {}
        leaves = self._leaves

        def rec(c: Cand, d: bool) -> UndeterminedCircuit:
            key = (id(c), d)
            got = memo.get(key)
            if got is not None:
                return got
            prov = c.prov
            if prov[0] == "base":
                sigs = tuple(Signal(leaves[p], leaves[p].arrival) for p in prov[1])
                kind = c.kind if not d or c.kind is None else dual_kind(c.kind)
                u = UndeterminedCircuit(
                    kind, sigs, weight_log2(s.arrival for s in sigs), 0
                )
            else:
                _, kind, c1, d1, a1, c2, d2, a2 = prov
                if d:
                    kind = dual_kind(kind)
                sigs = []
                gates = 0
                for cc, dd, realize_it in ((c1, d1, a1), (c2, d2, a2)):
                    child = rec(cc, d ^ dd)
                    if realize_it:
                        sigs.append(huffman_combine(child.preds, child.out_kind or AND))
                        gates += child.internal_gates + len(child.preds) - 1
                    else:
                        sigs.extend(child.preds)
                        gates += child.internal_gates
                u = UndeterminedCircuit(
                    kind, tuple(sigs), weight_log2(s.arrival for s in sigs), gates
                )
            memo[key] = u
            return u

        return rec(cand, dual)


def _entry(kind, w, sz, ig, preds, prov, integral):
    if integral:
        rdelay = (w - 1).bit_length()
        rw = 1 << rdelay
    else:
        rdelay = huffman_delay(preds)
        rw = rdelay
    return (w, sz, rw, Cand(kind, w, sz, ig, rw, rdelay, preds, prov))


def _base_entry(i, j, k, arrs, integral):
    idx = tuple(range(i, j, 2)) + tuple(range(j, k + 1))
    if integral:
        w = sum(1 << arrs[p] for p in idx)
        preds = None
    else:
        preds = tuple(arrs[p] for p in idx)
        w = weight_log2(preds)
    kind = AND if len(idx) > 1 else None
    return _entry(kind, w, len(idx), 0, preds, ("base", idx), integral)


def _merged_entry(kind_is_and, w, sz, parts, integral):
    (c1, d1, a1), (c2, d2, a2) = parts
    gates = 0
    chunks = []
    for cc, _, realize_it in parts:
        if realize_it:
            chunks.append((cc.rdelay,))
            gates += cc.sz - 1  # its gates plus |preds| - 1 new ones
        else:
            chunks.append(cc.preds)
            gates += cc.ig
    kind = AND if kind_is_and else OR
    preds = None if integral else chunks[0] + chunks[1]
    prov = ("m", kind, c1, d1, a1, c2, d2, a2)
    return _entry(kind, w, sz, gates, preds, prov, integral)


def _fill_delay(cells, splits_all, arrs, integral, tol, stats):
    n = len(cells)
    and_e: list = [None] * n
    or_e: list = [None] * n
    merges = 0
    for ci in range(n):
        sp = splits_all[ci]
        if sp is None:
            i, j, k = cells[ci]
            e = _base_entry(i, j, k, arrs, integral)
            and_e[ci] = e
            if e[3].kind is None:
                or_e[ci] = e
            continue
        best_a = best_o = None
        merges += len(sp)
        for kia, c1, ma1, d1, c2, ma2, d2 in sp:
            em = and_e[c1] if ma1 else or_e[c1]
            eo = or_e[c1] if ma1 else and_e[c1]
            if eo is None:
                w1, s1, cc1, act1 = em[0], em[1], em[3], False
            elif em is None:
                w1, s1, cc1, act1 = eo[2], eo[1], eo[3], True
            else:
                wf = em[0]
                wr = eo[2]
                if wr < wf - tol or (wr <= wf + tol and eo[1] < em[1]):
                    w1, s1, cc1, act1 = wr, eo[1], eo[3], True
                else:
                    w1, s1, cc1, act1 = wf, em[1], em[3], False
            em = and_e[c2] if ma2 else or_e[c2]
            eo = or_e[c2] if ma2 else and_e[c2]
            if eo is None:
                w2, s2, cc2, act2 = em[0], em[1], em[3], False
            elif em is None:
                w2, s2, cc2, act2 = eo[2], eo[1], eo[3], True
            else:
                wf = em[0]
                wr = eo[2]
                if wr < wf - tol or (wr <= wf + tol and eo[1] < em[1]):
                    w2, s2, cc2, act2 = wr, eo[1], eo[3], True
                else:
                    w2, s2, cc2, act2 = wf, em[1], em[3], False
            w = w1 + w2 if integral else log2_add(w1, w2)
            sz = s1 + s2
            if kia:
                if (
                    best_a is None
                    or w < best_a[0] - tol
                    or (w <= best_a[0] + tol and sz < best_a[1])
                ):
                    best_a = (w, sz, ((cc1, d1, act1), (cc2, d2, act2)))
            else:
                if (
                    best_o is None
                    or w < best_o[0] - tol
                    or (w <= best_o[0] + tol and sz < best_o[1])
                ):
                    best_o = (w, sz, ((cc1, d1, act1), (cc2, d2, act2)))
        if best_a is not None:
            and_e[ci] = _merged_entry(True, best_a[0], best_a[1], best_a[2], integral)
        if best_o is not None:
            or_e[ci] = _merged_entry(False, best_o[0], best_o[1], best_o[2], integral)
    stats["merges"] = merges
    return and_e, or_e


_BY_WEIGHT_SIZE = itemgetter(0, 1)


def _front(options):
    """Non-dominated (weight, size) sweep; sort order breaks exact ties."""
    options.sort(key=_BY_WEIGHT_SIZE)
    out = []
    min_sz = None
    for e in options:
        if min_sz is None or e[1] < min_sz:
            out.append(e)
            min_sz = e[1]
    return out


def _contribution_front(match_list, other_list):
    """Non-dominated contribution options for an operand cell.

    Candidates in the matching slot flatten (contribute their own weight);
    candidates in the other slot realize (contribute their realized weight).
    """
    opts = [(e[0], e[1], e[3], False) for e in match_list]
    opts.extend((e[2], e[1], e[3], True) for e in other_list)
    return _front(opts)


def _fill_pareto(cells, splits_all, arrs, integral, tol, stats):
    n = len(cells)
    and_e: list = [()] * n
    or_e: list = [()] * n
    # per-cell contribution fronts, keyed by which slot matches the merge kind
    cf_a: list = [()] * n
    cf_o: list = [()] * n
    merges = 0
    cap_hits = 0
    max_front = 1
    for ci in range(n):
        sp = splits_all[ci]
        if sp is None:
            i, j, k = cells[ci]
            e = _base_entry(i, j, k, arrs, integral)
            and_e[ci] = [e]
            or_e[ci] = [e] if e[3].kind is None else ()
        else:
            raw_a: list = []
            raw_o: list = []
            merges += len(sp)
            for kia, c1, ma1, d1, c2, ma2, d2 in sp:
                f1 = cf_a[c1] if ma1 else cf_o[c1]
                f2 = cf_a[c2] if ma2 else cf_o[c2]
                sink = raw_a if kia else raw_o
                if integral:
                    for w1, s1, cc1, a1 in f1:
                        for w2, s2, cc2, a2 in f2:
                            sink.append((w1 + w2, s1 + s2, cc1, d1, a1, cc2, d2, a2))
                else:
                    for w1, s1, cc1, a1 in f1:
                        for w2, s2, cc2, a2 in f2:
                            sink.append(
                                (log2_add(w1, w2), s1 + s2, cc1, d1, a1, cc2, d2, a2)
                            )
            for kia, raw, slot in ((True, raw_a, and_e), (False, raw_o, or_e)):
                front = _front(raw)
                if len(front) > PARETO_CAP:
                    cap_hits += 1
                    front = front[:PARETO_CAP]
                max_front = max(max_front, len(front))
                slot[ci] = [
                    _merged_entry(kia, e[0], e[1], (e[2:5], e[5:8]), integral)
                    for e in front
                ]
        cf_a[ci] = _contribution_front(and_e[ci], or_e[ci])
        cf_o[ci] = _contribution_front(or_e[ci], and_e[ci])
    stats["merges"] = merges
    stats["pareto_cap_hits"] = cap_hits
    stats["max_front"] = max_front
    return and_e, or_e


def build_table(
    inst: AopInstance, mode: str = MODE_DELAY, _max_lambda: int | None = None
) -> DpTable:
    """Fill the table for all valid (i, j, k) in order of increasing input count."""
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {MODES}, got {mode!r}")
    m = inst.m
    integral = inst.is_integral and inst.spread <= _EXACT_SPREAD_LIMIT
    cells, index, splits_all = _structure(m, _max_lambda)
    if integral:
        shift = int(min(inst.arrivals))
        arrs = tuple(int(a) - shift for a in inst.arrivals)
        tol = 0
    else:
        shift = 0
        arrs = tuple(float(a) for a in inst.arrivals)
        tol = WEIGHT_TOL
    stats: dict = {"cells": len(cells)}
    if mode == MODE_DELAY:
        and_e, or_e = _fill_delay(cells, splits_all, arrs, integral, tol, stats)
    else:
        and_e, or_e = _fill_pareto(cells, splits_all, arrs, integral, tol, stats)
    stored = 0
    for slot in (and_e, or_e):
        for e in slot:
            if isinstance(e, list):
                stored += len(e)
            elif e is not None and e != ():
                stored += 1
    stats["stored_candidates"] = stored
    return DpTable(inst, mode, integral, shift, cells, index, and_e, or_e, stats)


@dataclass(frozen=True)
class OptimizationResult:
    circuit: Circuit
    delay: float
    size: int
    mode: str
    stats: dict


def _root_pick(table: DpTable):
    m = table.instance.m
    ci = table.index[(0, 0, m - 1)]
    pools = []
    for slot in (table._and[ci], table._or[ci]):
        if slot is None or slot == ():
            continue
        pools.extend(slot if isinstance(slot, list) else [slot])
    if not pools:
        raise InvariantViolation("empty root cell")
    tol = 0 if table.integral else WEIGHT_TOL
    best = None
    for e in pools:
        if best is None or e[0] < best[0] - tol:
            best = e
        elif e[0] <= best[0] + tol and e[1] < best[1]:
            best = e
    return best[3]


def optimize(inst: AopInstance, mode: str = MODE_DELAY) -> OptimizationResult:
    """Best-known-delay fan-in-2 circuit for the instance's And-Or path."""
    t0 = time.perf_counter()
    table = build_table(inst, mode)
    cand = _root_pick(table)
    und = table.undetermined(cand)
    circuit = realize(und)
    if inst.variant == "g_star":
        circuit = dualize(circuit)
    delay = circuit_delay(circuit)
    size = circuit_size(circuit)
    predicted = table.realized_delay(cand)
    if abs(delay - predicted) > 1e-9:
        raise InvariantViolation(
            f"realized delay {delay} differs from table prediction {predicted}"
        )
    if size != cand.realized_size:
        raise InvariantViolation(
            f"realized size {size} differs from table prediction {cand.realized_size}"
        )
    stats = dict(table.stats)
    stats["elapsed_s"] = time.perf_counter() - t0
    return OptimizationResult(circuit, delay, size, mode, stats)
