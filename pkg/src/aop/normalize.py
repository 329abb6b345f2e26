"""Turn a placed critical path of arbitrary gates into an And-Or path instance.

Pipeline: rewrite every cell over {AND2, INV}, recover the critical path by
following the chosen input's signal flow, push inverters off the path spine
(they survive only as inversion flags on side inputs, plus one output-polarity
flag folded into the instance), convert arrival times into location-modified
gate-delay units, and collapse same-kind gate runs by Huffman coding so the
spine strictly alternates. The result maps each instance input back to a
netlist signal (or a small synthetic side tree) with an inversion flag.

Toy delay model: an AND2 stage costs d_gate picoseconds, wires cost d_dist per
micron of L1 distance, and inverters are free bookkeeping (De Morgan absorbs
them). Rewritten gates inherit their cell's placement.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import (
    AND,
    OR,
    AopInstance,
    Gate,
    InvariantViolation,
    Signal,
    ValidationError,
    dual_kind,
    validate_instance,
)
from .huffman import huffman_combine

CELL_TYPES = {
    "AND2": 2,
    "OR2": 2,
    "NAND2": 2,
    "NOR2": 2,
    "INV": 1,
    "BUF": 1,
    "AOI21": 3,
    "OAI21": 3,
}


@dataclass(frozen=True)
class PathInput:
    id: str
    arrival: float  # picoseconds
    x: float
    y: float


@dataclass(frozen=True)
class Cell:
    id: str
    type: str
    ins: tuple[str, ...]
    x: float
    y: float


@dataclass(frozen=True)
class Netlist:
    inputs: tuple[PathInput, ...]
    cells: tuple[Cell, ...]
    output: str  # id of the designated path output cell


@dataclass(frozen=True)
class DelayModel:
    d_gate: float  # ps per gate stage
    d_dist: float  # ps per micron of L1 distance

    def __post_init__(self):
        if not self.d_gate > 0:
            raise ValidationError("d_gate must be positive")
        if not self.d_dist >= 0:
            raise ValidationError("d_dist must be non-negative")


def validate_netlist(n: Netlist) -> Netlist:
    ids = set()
    for inp in n.inputs:
        if inp.id in ids:
            raise ValidationError(f"duplicate id {inp.id!r}")
        ids.add(inp.id)
    cell_ids = set()
    for c in n.cells:
        if c.id in ids or c.id in cell_ids:
            raise ValidationError(f"duplicate id {c.id!r}")
        cell_ids.add(c.id)
        if c.type not in CELL_TYPES:
            raise ValidationError(f"cell {c.id!r}: unsupported type {c.type!r}")
        if len(c.ins) != CELL_TYPES[c.type]:
            raise ValidationError(
                f"cell {c.id!r}: {c.type} needs {CELL_TYPES[c.type]} inputs, got {len(c.ins)}"
            )
    known = ids | cell_ids
    for c in n.cells:
        for d in c.ins:
            if d not in known:
                raise ValidationError(f"cell {c.id!r}: unknown driver {d!r}")
    if n.output not in cell_ids:
        raise ValidationError(f"output {n.output!r} is not a cell")
    if len(_cell_topo_order(n)) != len(n.cells):
        raise ValidationError("netlist contains a cycle")
    return n


def _cell_topo_order(n: Netlist) -> list[str]:
    cells = {c.id: c for c in n.cells}
    indeg = {cid: sum(1 for d in c.ins if d in cells) for cid, c in cells.items()}
    consumers: dict[str, list[str]] = {}
    for cid, c in cells.items():
        for d in c.ins:
            if d in cells:
                consumers.setdefault(d, []).append(cid)
    ready = sorted(cid for cid, deg in indeg.items() if deg == 0)
    order = []
    while ready:
        cid = ready.pop()
        order.append(cid)
        for succ in consumers.get(cid, ()):
            indeg[succ] -= 1
            if indeg[succ] == 0:
                ready.append(succ)
    return order


# ---------------------------------------------------------------------------
# AND/INV decomposition


@dataclass(frozen=True)
class DNode:
    id: str
    kind: str  # "and" or "inv"
    ins: tuple[str, ...]
    x: float
    y: float


@dataclass(frozen=True)
class DecomposedNetlist:
    inputs: dict
    nodes: dict
    output: str  # output signal id (after alias resolution)
    alias: dict  # original signal id -> decomposed signal id


def decompose_to_and_inv(n: Netlist) -> DecomposedNetlist:
    """Rewrite every cell over {AND2, INV}; buffers collapse to wires."""
    validate_netlist(n)
    inputs = {i.id: i for i in n.inputs}
    alias = {i.id: i.id for i in n.inputs}
    nodes: dict[str, DNode] = {}
    cells = {c.id: c for c in n.cells}

    for cid in _cell_topo_order(n):
        c = cells[cid]
        ins = tuple(alias[d] for d in c.ins)
        fresh = [0]

        def new(kind, *args):
            nid = f"{cid}.n{fresh[0]}"
            fresh[0] += 1
            nodes[nid] = DNode(nid, kind, tuple(args), c.x, c.y)
            return nid

        t = c.type
        if t == "AND2":
            out = new("and", *ins)
        elif t == "OR2":
            out = new("inv", new("and", new("inv", ins[0]), new("inv", ins[1])))
        elif t == "NAND2":
            out = new("inv", new("and", *ins))
        elif t == "NOR2":
            out = new("and", new("inv", ins[0]), new("inv", ins[1]))
        elif t == "INV":
            out = new("inv", ins[0])
        elif t == "BUF":
            out = ins[0]
        elif t == "AOI21":  # not((a and b) or c)
            out = new("and", new("inv", new("and", ins[0], ins[1])), new("inv", ins[2]))
        elif t == "OAI21":  # not((a or b) and c)
            a_or_b = new("inv", new("and", new("inv", ins[0]), new("inv", ins[1])))
            out = new("inv", new("and", a_or_b, ins[2]))
        else:  # pragma: no cover - guarded by validate_netlist
            raise ValidationError(f"unsupported cell type {t!r}")
        alias[cid] = out
    return DecomposedNetlist(inputs, nodes, alias[n.output], alias)


# ---------------------------------------------------------------------------
# path extraction


def extract_path(dec: DecomposedNetlist, x: str) -> tuple[list[str], bool]:
    """Node sequence from input x to the output; flags multi-path reachability.

    At a fan-out the lexicographically smallest successor that still reaches
    the output is taken and the result is flagged.
    """
    if x not in dec.inputs:
        raise ValidationError(f"critical input {x!r} is not a path input")
    consumers: dict[str, list[str]] = {}
    for nid, node in dec.nodes.items():
        for d in node.ins:
            consumers.setdefault(d, []).append(nid)
    for lst in consumers.values():
        lst.sort()
    # signals from which the output is reachable
    reaches = {dec.output}
    changed = True
    while changed:
        changed = False
        for nid, node in dec.nodes.items():
            if nid in reaches:
                for d in node.ins:
                    if d not in reaches:
                        reaches.add(d)
                        changed = True
    if x not in reaches:
        raise ValidationError(f"input {x!r} does not reach the output")
    path = []
    cur = x
    multipath = False
    while cur != dec.output:
        nexts = [nid for nid in consumers.get(cur, ()) if nid in reaches]
        if not nexts:
            raise InvariantViolation(f"dead end following {cur!r}")
        if len(nexts) > 1:
            multipath = True
        cur = nexts[0]
        path.append(cur)
    return path, multipath


# ---------------------------------------------------------------------------
# De Morgan normalization of the spine


@dataclass(frozen=True)
class Stage:
    kind: str  # "and" or "or"
    side: str  # side signal id after absorbing its inverter chain
    inverted: bool


def demorgan_normalize(
    dec: DecomposedNetlist, path: list[str], x: str
) -> tuple[list[Stage], bool]:
    """Push inverters off the spine; returns stages plus the output polarity.

    The returned stages compute the original path function XOR the polarity
    flag; inverters survive only as `inverted` marks on side signals.
    """
    stages: list[Stage] = []
    neg = False
    prev = x
    for nid in path:
        node = dec.nodes[nid]
        if node.kind == "inv":
            neg = not neg
            prev = nid
            continue
        a, b = node.ins
        if a == prev and b == prev:
            prev = nid  # and(s, s) == s: degenerate stage, a plain wire
            continue
        if a == prev:
            side = b
        elif b == prev:
            side = a
        else:
            raise InvariantViolation(f"path node {nid!r} does not consume {prev!r}")
        inv = False
        while side in dec.nodes and dec.nodes[side].kind == "inv":
            inv = not inv
            side = dec.nodes[side].ins[0]
        stages.append(Stage(OR if neg else AND, side, inv != neg))
        prev = nid
    return stages, neg


# ---------------------------------------------------------------------------
# arrival times


def signal_arrivals(dec: DecomposedNetlist, model: DelayModel) -> dict:
    """Picosecond arrival of every decomposed signal under the toy model."""
    arr: dict[str, float] = {i: inp.arrival for i, inp in dec.inputs.items()}
    loc = signal_locations(dec)

    def rec(sig: str) -> float:
        if sig in arr:
            return arr[sig]
        node = dec.nodes[sig]
        lx, ly = loc[sig]
        worst = max(
            rec(d) + model.d_dist * (abs(loc[d][0] - lx) + abs(loc[d][1] - ly))
            for d in node.ins
        )
        a = worst + (model.d_gate if node.kind == "and" else 0.0)
        arr[sig] = a
        return a

    for sig in dec.nodes:
        rec(sig)
    return arr


def signal_locations(dec: DecomposedNetlist) -> dict:
    loc = {i: (inp.x, inp.y) for i, inp in dec.inputs.items()}
    loc.update({nid: (n.x, n.y) for nid, n in dec.nodes.items()})
    return loc


def modified_arrivals(inputs, l_out, model: DelayModel) -> list[float]:
    """Unitless arrivals (a + d_dist * L1(l, l_out)) / d_gate per (a, (x, y))."""
    ox, oy = l_out
    return [
        (a + model.d_dist * (abs(x - ox) + abs(y - oy))) / model.d_gate
        for a, (x, y) in inputs
    ]


# ---------------------------------------------------------------------------
# chain compression


@dataclass(frozen=True)
class MappedSignal:
    signal: str
    inverted: bool


@dataclass(frozen=True)
class MappedTree:
    kind: str
    left: object  # MappedSignal or MappedTree
    right: object


@dataclass(frozen=True)
class CompressedStage:
    kind: str
    side: object  # MappedSignal or MappedTree
    arrival: float  # unitless


def chain_compress(stages: list[Stage], side_arrivals: list[float]) -> list[CompressedStage]:
    """Collapse same-kind runs: run sides are Huffman-combined into one side."""
    if len(stages) != len(side_arrivals):
        raise ValidationError("one arrival per stage required")
    out: list[CompressedStage] = []
    pos = 0
    while pos < len(stages):
        kind = stages[pos].kind
        end = pos
        while end + 1 < len(stages) and stages[end + 1].kind == kind:
            end += 1
        group = [
            Signal(MappedSignal(st.side, st.inverted), a)
            for st, a in zip(stages[pos : end + 1], side_arrivals[pos : end + 1])
        ]
        combined = huffman_combine(group, kind)
        out.append(CompressedStage(kind, _as_mapped(combined.source), combined.arrival))
        pos = end + 1
    return out


def _as_mapped(source):
    if isinstance(source, MappedSignal):
        return source
    if isinstance(source, Gate):
        return MappedTree(source.kind, _as_mapped(source.left), _as_mapped(source.right))
    raise InvariantViolation(f"unexpected side tree node {source!r}")


# ---------------------------------------------------------------------------
# full pipeline


@dataclass(frozen=True)
class NormalizationResult:
    instance: AopInstance
    input_map: tuple  # per instance input: MappedSignal or MappedTree
    output_inverted: bool
    output_location: tuple[float, float]
    multipath: bool


def normalize(n: Netlist, x: str, model: DelayModel) -> NormalizationResult:
    """Full front-end: instance with location-modified arrivals plus back-map.

    When the spine carries a net inversion, the instance realizes the
    complemented path function directly (dual variant, all input inversion
    flags toggled), so the optimized circuit splices in without an inverter;
    `output_inverted` records that this folding happened.
    """
    dec = decompose_to_and_inv(n)
    path, multipath = extract_path(dec, x)
    stages, polarity = demorgan_normalize(dec, path, x)
    out_cell = next(c for c in n.cells if c.id == n.output)
    l_out = (out_cell.x, out_cell.y)
    arr_ps = signal_arrivals(dec, model)
    loc = signal_locations(dec)
    side_a = modified_arrivals(
        [(arr_ps[st.side], loc[st.side]) for st in stages], l_out, model
    )
    x_arrival = modified_arrivals([(arr_ps[x], loc[x])], l_out, model)[0]
    if polarity:
        stages = [Stage(dual_kind(st.kind), st.side, not st.inverted) for st in stages]
    compressed = chain_compress(stages, side_a)
    # t_0 sits at the output gate, outer stages first; t_{m-1} is the
    # critical input at the innermost position
    arrivals = [cs.arrival for cs in reversed(compressed)] + [x_arrival]
    mapping = [cs.side for cs in reversed(compressed)] + [MappedSignal(x, polarity)]
    variant = "g" if not compressed or compressed[-1].kind == AND else "g_star"
    inst = validate_instance(len(arrivals), arrivals, variant)
    return NormalizationResult(inst, tuple(mapping), polarity, l_out, multipath)
