"""HTTP front end: one POST endpoint per command, JSON in and out."""
from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import handlers
from .errors import BlowUpError, ConvergenceError, DomainError
from .schemas import (ConvergenceRequest, ConvergenceResponse, PriceRequest, PriceResponse, RadiusRequest,
                      RadiusResponse, SkewRequest, SkewResponse, SolveRequest, SolveResponse, TripletRequest,
                      TripletResponse)

app = FastAPI(title="frac-riccati", version="0.1.0")

# status codes the thin client maps back to exit codes
STATUS = {"domain": 400, "blowup": 409, "convergence": 409}


def _error(kind: str, exc: Exception, **extra) -> JSONResponse:
    return JSONResponse(status_code=STATUS[kind], content={"kind": kind, "detail": str(exc), **extra})


@app.exception_handler(DomainError)
def _domain(_: Request, exc: DomainError):
    return _error("domain", exc)


@app.exception_handler(BlowUpError)
def _blowup(_: Request, exc: BlowUpError):
    freq = None if exc.frequency is None else [exc.frequency.real, exc.frequency.imag]
    return _error("blowup", exc, time=exc.time, frequency=freq)


@app.exception_handler(ConvergenceError)
def _convergence(_: Request, exc: ConvergenceError):
    return _error("convergence", exc)


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/solve", response_model=SolveResponse)
def solve(req: SolveRequest):
    return handlers.solve(req)


@app.post("/radius", response_model=RadiusResponse)
def radius(req: RadiusRequest):
    return handlers.radius(req)


@app.post("/triplet", response_model=TripletResponse)
def triplet(req: TripletRequest):
    return handlers.triplet(req)


@app.post("/price", response_model=PriceResponse)
def price(req: PriceRequest):
    return handlers.price(req)


@app.post("/skew", response_model=SkewResponse)
def skew(req: SkewRequest):
    return handlers.skew(req)


@app.post("/convergence", response_model=ConvergenceResponse)
def convergence(req: ConvergenceRequest):
    return handlers.convergence(req)
