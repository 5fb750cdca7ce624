"""Request and response models shared by the HTTP service and the CLI."""
from __future__ import annotations

import math
from typing import Annotated, Literal, Optional

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, WithJsonSchema

from .heston import HestonParams
from .pricing import BOOK_MATURITIES


def _to_complex(v):
    if isinstance(v, complex):
        return v
    if isinstance(v, bool):
        raise ValueError("expected a number")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, str):
        try:
            return complex(v.strip().replace(" ", "").replace("i", "j"))
        except ValueError as exc:
            raise ValueError(f"cannot parse {v!r} as a complex number") from exc
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise ValueError("expected a number, a string like '1+2j' or a [re, im] pair")


def _to_real(v):
    if isinstance(v, str):
        s = v.strip().lower()
        if s in ("+inf", "inf", "infinity"):
            return math.inf
        if s in ("-inf", "-infinity"):
            return -math.inf
    return v


def _dump_real(x: float):
    if math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    return x


# complex numbers travel as [re, im]
Complex = Annotated[
    complex,
    BeforeValidator(_to_complex),
    PlainSerializer(lambda z: [z.real, z.imag], return_type=list),
    WithJsonSchema({"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}),
]

# reals that may be infinite travel as "+inf" / "-inf"
ExtReal = Annotated[
    float,
    BeforeValidator(_to_real),
    PlainSerializer(_dump_real),
    WithJsonSchema({"anyOf": [{"type": "number"}, {"enum": ["+inf", "-inf"]}]}),
]

Solver = Literal["series", "hybrid", "adams"]
Scheme = Literal["plain", "rr2", "rr3"]


class HestonFields(BaseModel):
    alpha: float = Field(0.62, gt=0, le=1)
    eta: float = Field(0.1, gt=0)
    m: float = Field(0.3156, gt=0)
    zeta: float = Field(0.331, gt=0)
    rho: float = Field(-0.681, gt=-1, lt=1)
    v0: float = Field(0.0392, ge=0)
    s0: float = Field(100.0, gt=0)

    def params(self, alpha: float | None = None) -> HestonParams:
        a = self.alpha if alpha is None else alpha
        return HestonParams(a, self.eta, self.m, self.zeta, self.rho, self.v0, self.s0)


class SolveRequest(BaseModel):
    lam: Complex
    mu: Complex
    nu: Complex
    alpha: float = Field(gt=0, le=2)
    t: float = Field(ge=0)
    method: Solver = "hybrid"
    scheme: Scheme = "rr3"
    n: int = Field(128, ge=1)
    r0: Optional[int] = Field(None, ge=1)
    r_max: int = Field(250, ge=2)


class TripletOut(BaseModel):
    psi: Complex
    i1_psi: Complex
    i1ma_psi: Complex


class SolveResponse(TripletOut):
    method: str
    steps: int
    radius: ExtReal


class RadiusRequest(HestonFields):
    alpha: float = Field(0.62, gt=0, le=2)
    lam: Optional[Complex] = None
    mu: Optional[Complex] = None
    nu: Optional[Complex] = None
    u1: Optional[list[Complex]] = None
    r_max: int = Field(250, ge=2)
    n: Optional[int] = Field(None, ge=1)


class RadiusRow(BaseModel):
    u1: Optional[Complex]
    lam: Complex
    mu: Complex
    nu: Complex
    alpha: float
    tau_star: ExtReal
    n: int
    radius_n: Optional[ExtReal]
    radius_hat: ExtReal
    upper_bound: Optional[ExtReal]
    sandwich: Literal["PASS", "FAIL", "N/A"]


class RadiusResponse(BaseModel):
    rows: list[RadiusRow]


class TripletRequest(HestonFields):
    u1: Complex
    u2: Complex = 0j
    t: float = Field(gt=0)
    solver: Solver = "hybrid"
    scheme: Scheme = "rr3"
    n: int = Field(128, ge=1)
    adams_steps: int = Field(128, ge=1)


class TripletResponse(TripletOut):
    lam: Complex
    mu: Complex
    nu: Complex
    cf: Complex
    solver: str


class PriceRequest(HestonFields):
    maturities_days: list[float] = Field(default_factory=lambda: [round(T * 252) for T in BOOK_MATURITIES])
    strikes_pct: list[float] = Field(default_factory=lambda: [80.0, 85.0, 90.0, 95.0, 100.0,
                                                              105.0, 110.0, 115.0, 120.0])
    solvers: list[Literal["hybrid", "adams"]] = Field(default_factory=lambda: ["hybrid", "adams"])
    step_search: bool = True
    n: int = Field(128, ge=4)
    alpha_cm: float = Field(1.1, gt=0)
    v_max: float = Field(250.0, gt=0)
    dv: float = Field(0.1, gt=0)
    threads: Optional[int] = Field(None, ge=1)


class PriceRow(BaseModel):
    maturity_days: float
    strike_pct: float
    method: str
    steps: int
    price: float
    implied_vol: Optional[float]
    cpu_ms: float
    flags: str


class PriceResponse(BaseModel):
    rows: list[PriceRow]


class SkewRequest(HestonFields):
    alphas: list[float] = Field(default_factory=lambda: [0.62, 1.0])
    maturities_days: list[float] = Field(default_factory=lambda: [1.0, 5.0, 21.0, 126.0, 252.0])
    dk: float = Field(1e-3, gt=0)
    n: int = Field(128, ge=4)
    threads: Optional[int] = Field(None, ge=1)


class SkewRow(BaseModel):
    maturity_days: float
    alpha: float
    skew: float


class SkewResponse(BaseModel):
    rows: list[SkewRow]


class ConvergenceRequest(BaseModel):
    lam: Complex = 0.045
    mu: Complex = -64.938
    nu: Complex = 44850.0
    alpha: float = Field(0.64, gt=0, le=1)
    t: float = Field(1.0 / 252.0, gt=0)
    ns: list[int] = Field(default_factory=lambda: [2 ** j for j in range(3, 14)])
    n_ref: int = Field(2 ** 15, ge=4)
    switch_factor: float = Field(1.0, gt=0, le=1)


class ConvergenceRow(BaseModel):
    n: int
    cbar1: float
    err_plain: float
    err_rr2: Optional[float]
    err_rr3: Optional[float]


class ConvergenceResponse(BaseModel):
    reference: Complex
    n_ref: int
    rows: list[ConvergenceRow]


class ErrorBody(BaseModel):
    model_config = ConfigDict(extra="allow")
    kind: Literal["domain", "blowup", "convergence"]
    detail: str
