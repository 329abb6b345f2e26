"""Shared test helpers: independent oracles and input generators.

Everything here recomputes expectations from first principles (per-assignment
recursion, exhaustive enumeration) so library results are checked against
logic that shares no code with the implementation under test.
"""

from __future__ import annotations

import random
from functools import lru_cache
from itertools import product

import pytest

from aop.core import AND, OR, Circuit, GateNode, InputNode
from aop.normalize import CELL_TYPES, Cell, Netlist, PathInput


# ---------------------------------------------------------------------------
# reference semantics, evaluated one assignment at a time


def naive_aop(values, dual=False):
    """Alternating path over a value list, folded right to left."""
    res = bool(values[-1])
    for pos in range(len(values) - 2, -1, -1):
        use_and = (pos % 2 == 0) != dual
        res = (bool(values[pos]) and res) if use_and else (bool(values[pos]) or res)
    return res


def naive_phi(i, j, k, dual, assign):
    """Extended path value on one assignment (list of 0/1 per input index)."""
    prefix = [bool(assign[p]) for p in range(i, j, 2)]
    tail = naive_aop(assign[j : k + 1], dual)
    if dual:
        return any(prefix) or tail
    return all(prefix) and tail


def naive_phi_table(i, j, k, dual, m) -> int:
    mask = 0
    for b in range(1 << m):
        assign = [(b >> p) & 1 for p in range(m)]
        if naive_phi(i, j, k, dual, assign):
            mask |= 1 << b
    return mask


def naive_eval_circuit(c: Circuit, assign) -> bool:
    vals = {}

    def rec(nid):
        if nid in vals:
            return vals[nid]
        node = c.nodes[nid]
        if isinstance(node, InputNode):
            vals[nid] = bool(assign[node.index])
        else:
            a, b = (rec(p) for p in node.preds)
            vals[nid] = (a and b) if node.kind == AND else (a or b)
        return vals[nid]

    return rec(c.output)


# ---------------------------------------------------------------------------
# exhaustive delay optimum over all binary combining trees


@lru_cache(maxsize=None)
def best_tree_delay(arrivals: tuple) -> float:
    if len(arrivals) == 1:
        return arrivals[0]
    best = None
    for i in range(len(arrivals)):
        for j in range(i + 1, len(arrivals)):
            rest = tuple(
                sorted(
                    arrivals[:i]
                    + arrivals[i + 1 : j]
                    + arrivals[j + 1 :]
                    + (max(arrivals[i], arrivals[j]) + 1,)
                )
            )
            d = best_tree_delay(rest)
            if best is None or d < best:
                best = d
    return best


# ---------------------------------------------------------------------------
# random circuits (expression shaped, hence structurally well formed)


def random_expr_circuit(rng: random.Random, m: int, max_depth: int = 5) -> Circuit:
    from aop.core import Gate, Leaf, to_circuit

    leaves = [Leaf(i, 0.0) for i in range(m)]

    def build(depth):
        if depth >= max_depth or rng.random() < 0.3:
            return leaves[rng.randrange(m)]
        return Gate(rng.choice((AND, OR)), build(depth + 1), build(depth + 1))

    root = Gate(rng.choice((AND, OR)), build(1), build(1))
    return to_circuit(root)


# ---------------------------------------------------------------------------
# toy netlists: generation and reference evaluation

CELL_FN = {
    "AND2": lambda a, b: a & b,
    "OR2": lambda a, b: a | b,
    "NAND2": lambda a, b: 1 - (a & b),
    "NOR2": lambda a, b: 1 - (a | b),
    "INV": lambda a: 1 - a,
    "BUF": lambda a: a,
    "AOI21": lambda a, b, c: 1 - ((a & b) | c),
    "OAI21": lambda a, b, c: 1 - ((a | b) & c),
}


def eval_netlist(n: Netlist, assign: dict) -> dict:
    vals = dict(assign)
    remaining = {c.id: c for c in n.cells}
    while remaining:
        progressed = False
        for cid, c in list(remaining.items()):
            if all(d in vals for d in c.ins):
                vals[cid] = CELL_FN[c.type](*[vals[d] for d in c.ins])
                del remaining[cid]
                progressed = True
        assert progressed, "netlist evaluation stuck"
    return vals


def eval_decomposed(dec, assign: dict) -> dict:
    vals = dict(assign)

    def rec(sig):
        if sig in vals:
            return vals[sig]
        node = dec.nodes[sig]
        vs = [rec(d) for d in node.ins]
        vals[sig] = (vs[0] & vs[1]) if node.kind == "and" else 1 - vs[0]
        return vals[sig]

    for sig in dec.nodes:
        rec(sig)
    return vals


def eval_mapped(entry, dec_vals: dict) -> int:
    from aop.normalize import MappedSignal

    if isinstance(entry, MappedSignal):
        v = dec_vals[entry.signal]
        return 1 - v if entry.inverted else v
    left = eval_mapped(entry.left, dec_vals)
    right = eval_mapped(entry.right, dec_vals)
    return (left & right) if entry.kind == "and" else (left | right)


def random_netlist(rng: random.Random, max_path_inputs: int = 12) -> Netlist:
    """A chain of random cells from input x to the output, fresh side inputs."""
    inputs = [
        PathInput("x", rng.uniform(0, 200), rng.uniform(0, 50), rng.uniform(0, 50))
    ]
    cells = []
    cur = "x"
    for ci in range(rng.randint(1, 8)):
        ctype = rng.choice(list(CELL_TYPES))
        need = CELL_TYPES[ctype] - 1
        if len(inputs) + need > max_path_inputs:
            break
        pins = []
        for _ in range(need):
            sid = f"s{len(inputs)}"
            inputs.append(
                PathInput(sid, rng.uniform(0, 200), rng.uniform(0, 50), rng.uniform(0, 50))
            )
            pins.append(sid)
        pins.append(cur)
        rng.shuffle(pins)
        cid = f"c{ci}"
        cells.append(
            Cell(cid, ctype, tuple(pins), rng.uniform(0, 50), rng.uniform(0, 50))
        )
        cur = cid
    if not cells:
        cells.append(Cell("c0", "AND2", ("x", "x"), 0.0, 0.0))
    return Netlist(tuple(inputs), tuple(cells), cells[-1].id)


def roundtrip_ok(netlist: Netlist, x: str, model) -> bool:
    """Original path function == instance composed with the recorded mapping."""
    from aop.core import ExtAopRef, phi_truth_table
    from aop.normalize import decompose_to_and_inv, normalize

    res = normalize(netlist, x, model)
    dec = decompose_to_and_inv(netlist)
    names = [i.id for i in netlist.inputs]
    ref = ExtAopRef(0, 0, res.instance.m - 1, dual=res.instance.variant == "g_star")
    phi = phi_truth_table(ref, res.instance.m)
    for bits in product((0, 1), repeat=len(names)):
        assign = dict(zip(names, bits))
        orig = eval_netlist(netlist, assign)[netlist.output]
        dec_vals = eval_decomposed(dec, assign)
        idx = sum(eval_mapped(e, dec_vals) << i for i, e in enumerate(res.input_map))
        if ((phi >> idx) & 1) != orig:
            return False
    return True


@pytest.fixture
def rng():
    return random.Random(0xA0B1)
