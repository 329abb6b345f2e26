"""Structural and functional verification of produced circuits."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import (
    AND,
    OR,
    AopInstance,
    Circuit,
    CycleError,
    ExtAopRef,
    GateNode,
    InputNode,
    InstanceTooLargeError,
    TT_MAX_INPUTS,
    ValidationError,
    _input_mask,
    circuit_delay,
    circuit_size,
    phi_truth_table,
)


@dataclass(frozen=True)
class VerificationReport:
    structural_ok: bool
    equivalent: bool | None  # None when equivalence was not evaluated
    delay: float | None
    size: int | None
    violations: tuple[str, ...]


def check_structure(c: Circuit) -> VerificationReport:
    """Well-formedness: acyclic, fan-in 2, one sink, everything feeds the output."""
    violations: list[str] = []
    n = len(c.nodes)
    if not 0 <= c.output < n:
        return VerificationReport(False, None, None, None, ("output id out of range",))
    has_successor = [False] * n
    for nid, node in enumerate(c.nodes):
        if isinstance(node, GateNode):
            if node.kind not in (AND, OR):
                violations.append(f"node {nid}: unknown gate kind {node.kind!r}")
            if len(node.preds) != 2:
                violations.append(f"node {nid}: fan-in {len(node.preds)}, expected 2")
            for p in node.preds:
                if not 0 <= p < n:
                    violations.append(f"node {nid}: dangling predecessor {p}")
                else:
                    has_successor[p] = True
        elif isinstance(node, InputNode):
            if not math.isfinite(node.arrival):
                violations.append(f"node {nid}: non-finite arrival")
            if node.index < 0:
                violations.append(f"node {nid}: negative input index")
        else:
            violations.append(f"node {nid}: unknown node type")
    sinks = [nid for nid in range(n) if not has_successor[nid]]
    if sinks != [c.output]:
        violations.append(f"expected single sink {c.output}, found sinks {sinks}")
    # reachability from the output over reverse edges
    if not violations:
        seen = set()
        stack = [c.output]
        while stack:
            nid = stack.pop()
            if nid in seen:
                continue
            seen.add(nid)
            node = c.nodes[nid]
            if isinstance(node, GateNode):
                stack.extend(node.preds)
        if len(seen) != n:
            unreachable = sorted(set(range(n)) - seen)
            violations.append(f"nodes not on any path to output: {unreachable}")
    delay = size = None
    if not violations:
        try:
            delay = circuit_delay(c)
        except CycleError:
            violations.append("circuit contains a cycle")
        else:
            size = circuit_size(c)
    return VerificationReport(not violations, None, delay, size, tuple(violations))


def _topo_order(c: Circuit) -> list[int]:
    order: list[int] = []
    state: dict[int, int] = {}
    stack = [c.output]
    while stack:
        nid = stack[-1]
        st = state.get(nid)
        if st == 2:
            stack.pop()
            continue
        node = c.nodes[nid]
        if isinstance(node, InputNode) or st == 1:
            state[nid] = 2
            order.append(nid)
            stack.pop()
            continue
        state[nid] = 1
        for p in node.preds:
            if state.get(p) == 1:
                raise CycleError("circuit contains a cycle")
            if state.get(p) != 2:
                stack.append(p)
    return order


def _block_var(index: int, width: int, lo: int) -> int:
    if index < width:
        return _input_mask(index, width)
    return (1 << (1 << width)) - 1 if (lo >> index) & 1 else 0


def eval_circuit(c: Circuit, m: int, block_bits: int | None = None) -> int:
    """Truth table of the circuit over all 2**m assignments (bit b = value on b).

    Evaluation is word-parallel over blocks of 2**block_bits assignments; the
    result is independent of the block size.
    """
    if m > TT_MAX_INPUTS:
        raise InstanceTooLargeError(f"truth tables limited to {TT_MAX_INPUTS} inputs")
    width = m if block_bits is None else min(block_bits, m)
    order = _topo_order(c)
    result = 0
    blockful = (1 << (1 << width)) - 1
    for lo in range(0, 1 << m, 1 << width):
        values: dict[int, int] = {}
        for nid in order:
            node = c.nodes[nid]
            if isinstance(node, InputNode):
                if node.index >= m:
                    raise ValidationError(
                        f"circuit uses input t_{node.index} but m={m}"
                    )
                values[nid] = _block_var(node.index, width, lo)
            else:
                a, b = node.preds
                values[nid] = (
                    values[a] & values[b] if node.kind == AND else values[a] | values[b]
                )
        result |= (values[c.output] & blockful) << lo
    return result


def equivalent(
    c: Circuit, ref: ExtAopRef, m: int, block_bits: int | None = None
) -> bool:
    """Exact comparison of the circuit against the reference extended path."""
    return eval_circuit(c, m, block_bits) == phi_truth_table(ref, m)


def verify_against_instance(c: Circuit, inst: AopInstance) -> VerificationReport:
    """Full report: structure plus equivalence against the instance's path."""
    report = check_structure(c)
    if not report.structural_ok:
        return report
    ref = ExtAopRef(0, 0, inst.m - 1, dual=inst.variant == "g_star")
    eq = equivalent(c, ref, inst.m)
    return VerificationReport(True, eq, report.delay, report.size, report.violations)
