"""Pydantic models: the service wire formats double as the on-disk file formats.

Instance file:  {"m": 3, "arrivals": [0, 20, 0], "variant": "g"}
Circuit file:   {"nodes": [{"id": 0, "kind": "input", "input": 0, "arrival": 0.0},
                           {"id": 2, "kind": "and", "preds": [0, 1]}, ...],
                 "output": 2}
Netlist file:   {"inputs": [{"id": "x", "arrival": 100.0, "x": 0, "y": 0}, ...],
                 "cells":  [{"id": "c1", "type": "NOR2", "ins": ["x", "s1"],
                             "x": 20, "y": 20}, ...],
                 "output": "c1"}
"""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, Field

from . import normalize as nz
from .core import (
    AopInstance,
    Circuit,
    GateNode,
    InputNode,
    ValidationError,
    validate_instance,
)


class InstanceModel(BaseModel):
    m: int
    arrivals: list[float]
    variant: Literal["g", "g_star"] = "g"

    def to_instance(self) -> AopInstance:
        return validate_instance(self.m, self.arrivals, self.variant)

    @classmethod
    def from_instance(cls, inst: AopInstance) -> "InstanceModel":
        return cls(m=inst.m, arrivals=list(inst.arrivals), variant=inst.variant)


class CircuitNodeModel(BaseModel):
    id: int
    kind: Literal["input", "and", "or"]
    input: Optional[int] = None  # input nodes only
    arrival: Optional[float] = None  # input nodes only
    preds: Optional[list[int]] = None  # gate nodes only


class CircuitModel(BaseModel):
    nodes: list[CircuitNodeModel]
    output: int

    def to_circuit(self) -> Circuit:
        ids = {}
        for pos, node in enumerate(self.nodes):
            if node.id in ids:
                raise ValidationError(f"duplicate node id {node.id}")
            ids[node.id] = pos
        nodes = []
        for node in self.nodes:
            if node.kind == "input":
                if node.input is None or node.arrival is None:
                    raise ValidationError(
                        f"input node {node.id} needs `input` and `arrival`"
                    )
                nodes.append(InputNode(node.input, node.arrival))
            else:
                if not node.preds:
                    raise ValidationError(f"gate node {node.id} needs `preds`")
                try:
                    preds = tuple(ids[p] for p in node.preds)
                except KeyError as exc:
                    raise ValidationError(
                        f"gate node {node.id} references unknown node {exc.args[0]}"
                    ) from None
                nodes.append(GateNode(node.kind, preds))
        if self.output not in ids:
            raise ValidationError(f"output id {self.output} not among the nodes")
        return Circuit(tuple(nodes), ids[self.output])

    @classmethod
    def from_circuit(cls, c: Circuit) -> "CircuitModel":
        nodes = []
        for nid, node in enumerate(c.nodes):
            if isinstance(node, InputNode):
                nodes.append(
                    CircuitNodeModel(
                        id=nid, kind="input", input=node.index, arrival=node.arrival
                    )
                )
            else:
                nodes.append(
                    CircuitNodeModel(id=nid, kind=node.kind, preds=list(node.preds))
                )
        return cls(nodes=nodes, output=c.output)


class PathInputModel(BaseModel):
    id: str
    arrival: float
    x: float
    y: float


class CellModel(BaseModel):
    id: str
    type: str
    ins: list[str]
    x: float
    y: float


class NetlistModel(BaseModel):
    inputs: list[PathInputModel]
    cells: list[CellModel]
    output: str

    def to_netlist(self) -> nz.Netlist:
        n = nz.Netlist(
            tuple(nz.PathInput(i.id, i.arrival, i.x, i.y) for i in self.inputs),
            tuple(nz.Cell(c.id, c.type, tuple(c.ins), c.x, c.y) for c in self.cells),
            self.output,
        )
        return nz.validate_netlist(n)

    @classmethod
    def from_netlist(cls, n: nz.Netlist) -> "NetlistModel":
        return cls(
            inputs=[
                PathInputModel(id=i.id, arrival=i.arrival, x=i.x, y=i.y)
                for i in n.inputs
            ],
            cells=[
                CellModel(id=c.id, type=c.type, ins=list(c.ins), x=c.x, y=c.y)
                for c in n.cells
            ],
            output=n.output,
        )


class MappedEntryModel(BaseModel):
    """Instance input back-mapping: a netlist signal or a small side tree."""

    signal: Optional[str] = None
    inverted: Optional[bool] = None
    gate: Optional[Literal["and", "or"]] = None
    left: Optional["MappedEntryModel"] = None
    right: Optional["MappedEntryModel"] = None

    @classmethod
    def from_entry(cls, entry) -> "MappedEntryModel":
        if isinstance(entry, nz.MappedSignal):
            return cls(signal=entry.signal, inverted=entry.inverted)
        return cls(
            gate=entry.kind,
            left=cls.from_entry(entry.left),
            right=cls.from_entry(entry.right),
        )

    def to_entry(self):
        if self.signal is not None:
            return nz.MappedSignal(self.signal, bool(self.inverted))
        if self.gate is None or self.left is None or self.right is None:
            raise ValidationError("mapped entry needs either a signal or a gate")
        return nz.MappedTree(self.gate, self.left.to_entry(), self.right.to_entry())


MappedEntryModel.model_rebuild()


class NormalizationResultModel(BaseModel):
    instance: InstanceModel
    input_map: list[MappedEntryModel]
    output_inverted: bool
    output_location: tuple[float, float]
    multipath: bool

    @classmethod
    def from_result(cls, res: nz.NormalizationResult) -> "NormalizationResultModel":
        return cls(
            instance=InstanceModel.from_instance(res.instance),
            input_map=[MappedEntryModel.from_entry(e) for e in res.input_map],
            output_inverted=res.output_inverted,
            output_location=res.output_location,
            multipath=res.multipath,
        )


# ---------------------------------------------------------------------------
# service request/response payloads


class OptimizeRequest(BaseModel):
    instance: InstanceModel
    mode: Literal["delay", "delay-size"] = "delay"


class OptimizeResponse(BaseModel):
    delay: float
    size: int
    mode: str
    circuit: CircuitModel
    stats: dict


class LowerBoundRequest(BaseModel):
    instance: InstanceModel


class InputBoundDetail(BaseModel):
    input: int
    arrival: float
    min_gates: int
    bound: float


class LowerBoundResponse(BaseModel):
    kraft: float
    input_depth: float
    combined: float
    details: list[InputBoundDetail]


class VerifyRequest(BaseModel):
    circuit: CircuitModel
    instance: InstanceModel


class VerifyResponse(BaseModel):
    structural_ok: bool
    equivalent: Optional[bool]
    delay: Optional[float]
    size: Optional[int]
    violations: list[str]


class NormalizeRequest(BaseModel):
    netlist: NetlistModel
    critical_input: str
    d_gate: float = Field(gt=0)
    d_dist: float = Field(ge=0)


# ---------------------------------------------------------------------------
# file helpers


def load_instance(path) -> AopInstance:
    return _load(path, InstanceModel).to_instance()


def save_instance(inst: AopInstance, path) -> None:
    _save(path, InstanceModel.from_instance(inst))


def load_circuit(path) -> Circuit:
    return _load(path, CircuitModel).to_circuit()


def save_circuit(c: Circuit, path) -> None:
    _save(path, CircuitModel.from_circuit(c))


def load_netlist(path) -> nz.Netlist:
    return _load(path, NetlistModel).to_netlist()


def _load(path, model):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None
    try:
        return model.model_validate_json(text)
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def _save(path, model) -> None:
    with open(path, "w") as fh:
        fh.write(model.model_dump_json(indent=2, exclude_none=True))
        fh.write("\n")
