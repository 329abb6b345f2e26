"""HTTP service exposing the optimizer, bounds, verifier and normalizer."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__
from .bounds import lower_bound
from .core import InvariantViolation, ValidationError
from .normalize import DelayModel, normalize
from .optimizer import optimize
from .schemas import (
    InputBoundDetail,
    InstanceModel,
    LowerBoundRequest,
    LowerBoundResponse,
    NormalizationResultModel,
    NormalizeRequest,
    OptimizeRequest,
    OptimizeResponse,
    CircuitModel,
    VerifyRequest,
    VerifyResponse,
)
from .verify import verify_against_instance

app = FastAPI(
    title="aop",
    version=__version__,
    description="Delay optimization of And-Or paths with prescribed arrival times",
)


@app.exception_handler(ValidationError)
async def _validation_handler(request: Request, exc: ValidationError):
    return JSONResponse(
        status_code=400, content={"detail": str(exc), "kind": "validation"}
    )


@app.exception_handler(InvariantViolation)
async def _invariant_handler(request: Request, exc: InvariantViolation):
    return JSONResponse(
        status_code=500, content={"detail": str(exc), "kind": "invariant"}
    )


@app.get("/healthz")
def healthz():
    return {"status": "ok", "version": __version__}


@app.post("/optimize", response_model=OptimizeResponse, response_model_exclude_none=True)
def optimize_endpoint(req: OptimizeRequest) -> OptimizeResponse:
    inst = req.instance.to_instance()
    result = optimize(inst, req.mode)
    return OptimizeResponse(
        delay=result.delay,
        size=result.size,
        mode=result.mode,
        circuit=CircuitModel.from_circuit(result.circuit),
        stats=result.stats,
    )


@app.post("/lower-bound", response_model=LowerBoundResponse)
def lower_bound_endpoint(req: LowerBoundRequest) -> LowerBoundResponse:
    report = lower_bound(req.instance.to_instance())
    return LowerBoundResponse(
        kraft=report.kraft,
        input_depth=report.input_depth,
        combined=report.combined,
        details=[
            InputBoundDetail(input=i, arrival=a, min_gates=g, bound=b)
            for i, a, g, b in report.details
        ],
    )


@app.post("/verify", response_model=VerifyResponse)
def verify_endpoint(req: VerifyRequest) -> VerifyResponse:
    circuit = req.circuit.to_circuit()
    inst = req.instance.to_instance()
    report = verify_against_instance(circuit, inst)
    return VerifyResponse(
        structural_ok=report.structural_ok,
        equivalent=report.equivalent,
        delay=report.delay,
        size=report.size,
        violations=list(report.violations),
    )


@app.post(
    "/normalize", response_model=NormalizationResultModel, response_model_exclude_none=True
)
def normalize_endpoint(req: NormalizeRequest) -> NormalizationResultModel:
    netlist = req.netlist.to_netlist()
    model = DelayModel(req.d_gate, req.d_dist)
    result = normalize(netlist, req.critical_input, model)
    return NormalizationResultModel.from_result(result)
