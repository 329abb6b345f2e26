"""Core domain types: instances, circuits, weights, duality, reference semantics.

An And-Or path over inputs t_0..t_{m-1} is the alternating formula
t_0 AND (t_1 OR (t_2 AND (... t_{m-1}))); its dual swaps AND and OR.
Everything here is immutable and side-effect free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

AND = "and"
OR = "or"

_DUAL = {AND: OR, OR: AND}


def dual_kind(kind: str) -> str:
    return _DUAL[kind]


class AopError(Exception):
    """Base class for library errors."""


class ValidationError(AopError, ValueError):
    """Bad user-supplied data (instances, circuits, netlists). CLI exit code 1."""


class EmptyInstanceError(ValidationError):
    pass


class NonFiniteArrivalError(ValidationError):
    pass


class InstanceTooLargeError(ValidationError):
    pass


class CycleError(ValidationError):
    pass


class InvariantViolation(AopError, RuntimeError):
    """Internal consistency break; never expected on valid input. CLI exit code 2."""


# ---------------------------------------------------------------------------
# Instances


@dataclass(frozen=True)
class AopInstance:
    arrivals: tuple[float, ...]
    variant: str = "g"  # "g" (primal) or "g_star" (dual)

    @property
    def m(self) -> int:
        return len(self.arrivals)

    @property
    def is_integral(self) -> bool:
        return all(float(a).is_integer() for a in self.arrivals)

    @property
    def spread(self) -> float:
        return max(self.arrivals) - min(self.arrivals)


VARIANTS = ("g", "g_star")


def validate_instance(m: int, arrivals, variant: str = "g") -> AopInstance:
    """Check raw instance data and return a frozen AopInstance."""
    if m == 0 or len(arrivals) == 0:
        raise EmptyInstanceError("instance must have at least one input")
    if m != len(arrivals):
        raise ValidationError(f"m={m} but {len(arrivals)} arrival times given")
    arr = []
    for a in arrivals:
        a = float(a)
        if not math.isfinite(a):
            raise NonFiniteArrivalError(f"non-finite arrival time {a!r}")
        arr.append(a)
    if variant not in VARIANTS:
        raise ValidationError(f"variant must be one of {VARIANTS}, got {variant!r}")
    return AopInstance(tuple(arr), variant)


# ---------------------------------------------------------------------------
# Extended And-Or path references


@dataclass(frozen=True)
class ExtAopRef:
    """Reference to the function AND(t_i, t_{i+2}, .., t_{j-2}) AND aop(t_j..t_k).

    The prefix walks indices of i's parity strictly below j; `dual` selects the
    dual form (OR prefix over the dual path). Requires i <= j <= k and j - i even.
    """

    i: int
    j: int
    k: int
    dual: bool = False

    def __post_init__(self):
        if not (0 <= self.i <= self.j <= self.k):
            raise ValidationError(f"bad index triple ({self.i},{self.j},{self.k})")
        if (self.j - self.i) % 2 != 0:
            raise ValidationError(f"j - i must be even in ({self.i},{self.j},{self.k})")

    @property
    def n(self) -> int:
        """Number of inputs the function depends on."""
        return (self.j - self.i) // 2 + (self.k - self.j + 1)

    def input_indices(self) -> tuple[int, ...]:
        return tuple(range(self.i, self.j, 2)) + tuple(range(self.j, self.k + 1))


# ---------------------------------------------------------------------------
# Weights


def weight_log2(arrivals) -> float:
    """log2 of sum of 2**a over the arrival times, computed stably."""
    arrivals = list(arrivals)
    if not arrivals:
        raise ValidationError("weight of an empty signal set is undefined")
    top = max(arrivals)
    acc = 0.0
    for a in arrivals:
        acc += 2.0 ** (a - top)
    return top + math.log2(acc)


def log2_add(x: float, y: float) -> float:
    """log2(2**x + 2**y) without leaving the log domain."""
    if x < y:
        x, y = y, x
    d = x - y
    if d > 64.0:
        return x
    return x + math.log2(1.0 + 2.0 ** (-d))


def weight_scaled_int(arrivals) -> tuple[int, int]:
    """Exact weight of integral arrivals as (W, s) with sum 2**a == W * 2**s."""
    ints = []
    for a in arrivals:
        f = float(a)
        if not f.is_integer():
            raise ValidationError(f"arrival {a!r} is not integral")
        ints.append(int(f))
    if not ints:
        raise ValidationError("weight of an empty signal set is undefined")
    s = min(ints)
    return sum(1 << (a - s) for a in ints), s


def ceil_log2_int(w: int) -> int:
    if w < 1:
        raise ValidationError("ceil_log2_int needs a positive integer")
    return (w - 1).bit_length()


# ---------------------------------------------------------------------------
# Expression nodes (shared, immutable gate trees used by the builders)


class Leaf:
    """An instance input used inside an expression DAG."""

    __slots__ = ("index", "arrival")

    def __init__(self, index: int, arrival: float):
        self.index = index
        self.arrival = arrival

    def __repr__(self):
        return f"t{self.index}@{self.arrival}"


class Gate:
    """Fan-in-2 gate node; children are Leaf or Gate, shared by reference."""

    __slots__ = ("kind", "left", "right")

    def __init__(self, kind: str, left, right):
        self.kind = kind
        self.left = left
        self.right = right

    def __repr__(self):
        return f"{self.kind}({self.left!r},{self.right!r})"


def dual_expr(root):
    """Expression computing the Boolean dual: every gate kind swapped, leaves kept."""
    memo: dict[int, object] = {}

    def _walk(node):
        stack = [node]
        order = []
        seen = set()
        while stack:
            e = stack.pop()
            if id(e) in seen or isinstance(e, Leaf):
                continue
            seen.add(id(e))
            order.append(e)
            stack.append(e.left)
            stack.append(e.right)
        for e in reversed(order):
            left = e.left if isinstance(e.left, Leaf) else memo[id(e.left)]
            right = e.right if isinstance(e.right, Leaf) else memo[id(e.right)]
            memo[id(e)] = Gate(_DUAL[e.kind], left, right)

    if isinstance(root, Leaf):
        return root
    _walk(root)
    return memo[id(root)]


# ---------------------------------------------------------------------------
# Circuits (flat, serializable form)


@dataclass(frozen=True)
class InputNode:
    index: int
    arrival: float


@dataclass(frozen=True)
class GateNode:
    kind: str
    preds: tuple[int, ...]


@dataclass(frozen=True)
class Circuit:
    """Single-output DAG of fan-in-2 AND/OR gates over indexed inputs."""

    nodes: tuple
    output: int


def to_circuit(root) -> Circuit:
    """Flatten an expression DAG into a topologically ordered Circuit."""
    ids: dict[int, int] = {}
    nodes: list = []
    stack = [(root, False)]
    while stack:
        e, expanded = stack.pop()
        if id(e) in ids:
            continue
        if isinstance(e, Leaf):
            ids[id(e)] = len(nodes)
            nodes.append(InputNode(e.index, e.arrival))
        elif expanded:
            ids[id(e)] = len(nodes)
            nodes.append(GateNode(e.kind, (ids[id(e.left)], ids[id(e.right)])))
        else:
            stack.append((e, True))
            stack.append((e.right, False))
            stack.append((e.left, False))
    return Circuit(tuple(nodes), ids[id(root)])


def node_arrivals(c: Circuit) -> dict[int, float]:
    """Arrival time of every node on a path to the output (gates add 1)."""
    arr: dict[int, float] = {}
    state: dict[int, int] = {}  # 1 = on stack, 2 = done
    stack = [c.output]
    while stack:
        nid = stack[-1]
        if state.get(nid) == 2:
            stack.pop()
            continue
        node = c.nodes[nid]
        if isinstance(node, InputNode):
            arr[nid] = node.arrival
            state[nid] = 2
            stack.pop()
            continue
        if state.get(nid) == 1:
            arr[nid] = 1.0 + max(arr[p] for p in node.preds)
            state[nid] = 2
            stack.pop()
            continue
        state[nid] = 1
        for p in node.preds:
            if state.get(p) == 1:
                raise CycleError("circuit contains a cycle")
            if state.get(p) != 2:
                stack.append(p)
    return arr


def circuit_delay(c: Circuit) -> float:
    """Arrival time at the output: gates add 1 to the latest predecessor."""
    return node_arrivals(c)[c.output]


def circuit_size(c: Circuit) -> int:
    return sum(1 for n in c.nodes if isinstance(n, GateNode))


def dualize(c: Circuit) -> Circuit:
    """Swap every AND/OR gate; computes the Boolean dual at equal delay and size."""
    nodes = tuple(
        GateNode(_DUAL[n.kind], n.preds) if isinstance(n, GateNode) else n
        for n in c.nodes
    )
    return Circuit(nodes, c.output)


# ---------------------------------------------------------------------------
# Reference truth tables
#
# Assignment b (0 <= b < 2**m) sets input t_i to bit i of b (LSB is t_0).
# A truth table is an int whose bit b is the function value on assignment b.

TT_MAX_INPUTS = 24


def input_mask(i: int, m: int) -> int:
    """Truth table of the bare input t_i over all 2**m assignments."""
    if not 0 <= i < m:
        raise ValidationError(f"input index {i} out of range for m={m}")
    if m > TT_MAX_INPUTS:
        raise InstanceTooLargeError(f"truth tables limited to {TT_MAX_INPUTS} inputs")
    return _input_mask(i, m)


@lru_cache(maxsize=1024)
def _input_mask(i: int, m: int) -> int:
    half = 1 << i
    pattern = ((1 << half) - 1) << half
    reps = ((1 << (1 << m)) - 1) // ((1 << (half << 1)) - 1)
    return pattern * reps


def full_mask(m: int) -> int:
    return (1 << (1 << m)) - 1


def aop_truth_table(indices, m: int, dual: bool = False) -> int:
    """Truth table of the alternating path over the given input indices."""
    idx = list(indices)
    if not idx:
        raise ValidationError("empty And-Or path")
    res = input_mask(idx[-1], m)
    for pos in range(len(idx) - 2, -1, -1):
        v = input_mask(idx[pos], m)
        want_and = pos % 2 == 0
        if dual:
            want_and = not want_and
        res = (v & res) if want_and else (v | res)
    return res


def phi_truth_table(ref: ExtAopRef, m: int) -> int:
    """Reference semantics of an extended And-Or path, straight from its formula."""
    if m > TT_MAX_INPUTS:
        raise InstanceTooLargeError(f"truth tables limited to {TT_MAX_INPUTS} inputs")
    if ref.k >= m:
        raise ValidationError(f"ref {ref} does not fit into m={m} inputs")
    res = aop_truth_table(range(ref.j, ref.k + 1), m, dual=ref.dual)
    for p in range(ref.i, ref.j, 2):
        v = input_mask(p, m)
        res = (v | res) if ref.dual else (v & res)
    return res


# ---------------------------------------------------------------------------
# Undetermined circuits


@dataclass(frozen=True)
class Signal:
    """A realized sub-circuit (or bare input) plus its arrival time."""

    source: object  # Leaf or Gate
    arrival: float


@dataclass(frozen=True)
class UndeterminedCircuit:
    """Circuit whose output gate still has unbounded fan-in.

    `preds` are the output gate's predecessors. `out_kind` is None exactly for a
    single pending signal. When `dualized` is set, `out_kind` is already the
    effective kind but the pred sources are stored in primal orientation and must
    be passed through dual_expr on realization.
    """

    out_kind: str | None
    preds: tuple[Signal, ...]
    log2_weight: float
    internal_gates: int
    dualized: bool = False

    def __post_init__(self):
        if (self.out_kind is None) != (len(self.preds) == 1):
            raise InvariantViolation("out_kind None iff exactly one pending signal")
        w = weight_log2([s.arrival for s in self.preds])
        if abs(w - self.log2_weight) > 1e-9:
            raise InvariantViolation(
                f"stored log2 weight {self.log2_weight} != computed {w}"
            )

    @property
    def realized_size(self) -> int:
        return self.internal_gates + max(0, len(self.preds) - 1)

    def dual_view(self) -> "UndeterminedCircuit":
        kind = None if self.out_kind is None else _DUAL[self.out_kind]
        return UndeterminedCircuit(
            kind, self.preds, self.log2_weight, self.internal_gates, not self.dualized
        )
