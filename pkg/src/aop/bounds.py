"""Delay lower bounds and an exact optimum oracle for tiny instances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    AopInstance,
    ExtAopRef,
    InstanceTooLargeError,
    InvariantViolation,
    ValidationError,
    ceil_log2_int,
    phi_truth_table,
    weight_log2,
    weight_scaled_int,
)

ORACLE_MAX_INPUTS = 5
ORACLE_MAX_SPREAD = 16
ORACLE_STATE_CAP = 2_000_000


@dataclass(frozen=True)
class LowerBoundReport:
    kraft: float
    input_depth: float
    combined: float
    details: tuple  # per input: (index, arrival, min_gates, arrival + min_gates)


def kraft_lb(inst: AopInstance) -> float:
    """ceil(log2 W) for integral arrivals, plain log2 W otherwise."""
    if inst.is_integral:
        w, s = weight_scaled_int(inst.arrivals)
        return float(s + ceil_log2_int(w))
    return weight_log2(inst.arrivals)


def _min_gates(index: int, m: int) -> int:
    """Gates any circuit must put between input `index` and the output.

    t_0 can sit directly under the output gate; with three or more inputs no
    other input can (neither f => t_i nor t_i => f holds), so those need two.
    """
    if m == 1:
        return 0
    if index == 0 or m == 2:
        return 1
    return 2


def input_depth_lb(inst: AopInstance) -> float:
    return max(a + _min_gates(i, inst.m) for i, a in enumerate(inst.arrivals))


def lower_bound(inst: AopInstance) -> LowerBoundReport:
    kraft = kraft_lb(inst)
    details = tuple(
        (i, a, _min_gates(i, inst.m), a + _min_gates(i, inst.m))
        for i, a in enumerate(inst.arrivals)
    )
    depth = max(d[3] for d in details)
    return LowerBoundReport(kraft, depth, max(kraft, depth), details)


def exact_optimum(inst: AopInstance) -> float:
    """Exact minimum delay, by forward closure over reachable truth tables.

    Starting from the input functions at their arrival times, repeatedly closes
    the reachable set under AND/OR of two functions available strictly earlier,
    keeping the earliest arrival per function; the first time the target
    function appears is its exact optimum delay under the unit-delay model.
    Only AND/OR-reachable (hence monotone) functions ever enter the set.
    """
    m = inst.m
    if m > ORACLE_MAX_INPUTS:
        raise InstanceTooLargeError(f"oracle limited to {ORACLE_MAX_INPUTS} inputs")
    if not inst.is_integral:
        raise ValidationError("oracle requires integral arrival times")
    if inst.spread > ORACLE_MAX_SPREAD:
        raise InstanceTooLargeError(
            f"oracle limited to arrival spread {ORACLE_MAX_SPREAD}"
        )
    shift = int(min(inst.arrivals))
    arrivals = [int(a) - shift for a in inst.arrivals]
    target = phi_truth_table(ExtAopRef(0, 0, m - 1), m)

    buckets: dict[int, list[np.ndarray]] = {}
    known = np.empty(0, dtype=np.uint32)
    for i, a in enumerate(arrivals):
        mask = np.uint32(phi_truth_table(ExtAopRef(i, i, i), m))
        if mask == target:
            return float(a + shift)
        if mask not in known:
            buckets.setdefault(a, []).append(np.array([mask], dtype=np.uint32))
            known = np.union1d(known, np.array([mask], dtype=np.uint32))

    settled = np.empty(0, dtype=np.uint32)
    t = min(buckets)
    while buckets:
        if t not in buckets:
            t += 1
            continue
        wave = np.concatenate(buckets.pop(t))
        pool = np.concatenate([settled, wave])
        fresh_parts = []
        for lo in range(0, len(wave), 256):
            chunk = wave[lo : lo + 256, None]
            cands = np.unique(
                np.concatenate([(chunk & pool).ravel(), (chunk | pool).ravel()])
            )
            fresh_parts.append(cands[~np.isin(cands, known, assume_unique=True)])
        settled = pool
        if fresh_parts:
            fresh = np.unique(np.concatenate(fresh_parts))
            fresh = fresh[~np.isin(fresh, known, assume_unique=True)]
            if len(fresh):
                if np.any(fresh == target):
                    return float(t + 1 + shift)
                known = np.union1d(known, fresh)
                if len(known) > ORACLE_STATE_CAP:
                    raise InstanceTooLargeError("oracle state cap exceeded")
                buckets.setdefault(t + 1, []).append(fresh)
        t += 1
    raise InvariantViolation("oracle closure exhausted without reaching the target")
