"""Pure request handlers behind both the HTTP service and the local CLI."""
from __future__ import annotations

import math
from dataclasses import replace

from .adams import adams_solve
from .errors import DomainError, UndefinedRadiusError
from .heston import cf_from_triplet, riccati_from_heston, triplet_batch
from .hybrid import HybridConfig, hybrid_grid_batch, solve_triplet
from .nonhomog import build_double_coefficients, eval_double_triplet
from .pricing import DAY, FourierGrid, OptionSpec, atm_skew, price_book
from .schemas import (ConvergenceRequest, ConvergenceResponse, ConvergenceRow, PriceRequest, PriceResponse,
                      PriceRow, RadiusRequest, RadiusResponse, RadiusRow, SkewRequest, SkewResponse, SkewRow,
                      SolveRequest, SolveResponse, TripletRequest, TripletResponse)
from .series import (RiccatiCoeffs, batch_from_solution, build_coefficients, eval_triplet_series, radius_empirical,
                     radius_upper_bound)


def solve(req: SolveRequest) -> SolveResponse:
    c = RiccatiCoeffs(req.lam, req.mu, req.nu, req.alpha)
    s = build_coefficients(c, req.r_max)
    radius = s.radius_conservative
    if req.method == "series":
        if req.t >= radius:
            raise DomainError(f"t={req.t:.6g} lies outside the series radius {radius:.6g}")
        trip = eval_triplet_series(s, req.t, min(req.r0 or req.r_max, req.r_max))
        steps = min(req.r0 or req.r_max, req.r_max)
    elif req.t == 0:
        trip, steps = eval_triplet_series(s, 0.0), 0
    elif req.method == "hybrid":
        trip = solve_triplet(s, req.t, HybridConfig(n=req.n, r_max=req.r_max), req.scheme)
        steps = req.n
    else:
        trip, steps = adams_solve(c, req.t, req.n), req.n
    return SolveResponse(psi=trip.psi, i1_psi=trip.i1_psi, i1ma_psi=trip.i1ma_psi,
                         method=req.method if req.method != "hybrid" else f"hybrid-{req.scheme}",
                         steps=steps, radius=radius)


def _radius_row(c: RiccatiCoeffs, u1, r_max: int, n: int | None) -> RadiusRow:
    s = build_coefficients(c, r_max)
    n = r_max if n is None else min(n, r_max)
    try:
        r_n = radius_empirical(s, n)
    except UndefinedRadiusError:
        r_n = None
    upper = radius_upper_bound(c)
    if upper is None or r_n is None:
        verdict = "N/A"
    else:
        verdict = "PASS" if s.tau_star <= r_n <= upper else "FAIL"
    return RadiusRow(u1=u1, lam=c.lam, mu=c.mu, nu=c.nu, alpha=c.alpha, tau_star=s.tau_star, n=n,
                     radius_n=r_n, radius_hat=s.radius_conservative, upper_bound=upper, sandwich=verdict)


def radius(req: RadiusRequest) -> RadiusResponse:
    if req.u1:
        p = req.params()
        rows = [_radius_row(riccati_from_heston(p, u), u, req.r_max, req.n) for u in req.u1]
    else:
        if req.lam is None or req.mu is None or req.nu is None:
            raise DomainError("radius needs either u1 or all of lam, mu, nu")
        rows = [_radius_row(RiccatiCoeffs(req.lam, req.mu, req.nu, req.alpha), None, req.r_max, req.n)]
    return RadiusResponse(rows=rows)


def triplet(req: TripletRequest) -> TripletResponse:
    p = req.params()
    c = riccati_from_heston(p, req.u1)
    if req.u2 != 0:
        if req.u2.real > 0:
            raise DomainError("u2 must have a non-positive real part")
        ds = build_double_coefficients(c, req.u2, 0j, L_max=20, k_cap=80)
        trip, _ = eval_double_triplet(ds, req.t, 1e-12)
        psi, i1, i1ma, solver = trip.psi, trip.i1_psi, trip.i1ma_psi, "double-series"
    elif c.nu == 0:
        psi = i1 = i1ma = 0j
        solver = req.solver
    else:
        cfg = HybridConfig(n=req.n)
        out = triplet_batch(p, [req.u1], req.t, req.solver, cfg=cfg, method=req.scheme,
                            adams_steps=req.adams_steps)
        psi, i1, i1ma = (complex(x[0]) for x in out)
        solver = req.solver
    cf = complex(cf_from_triplet(p, i1, i1ma))
    return TripletResponse(lam=c.lam, mu=c.mu, nu=c.nu, psi=psi, i1_psi=i1, i1ma_psi=i1ma, cf=cf, solver=solver)


def price(req: PriceRequest) -> PriceResponse:
    p = req.params()
    book = [OptionSpec(k, d * DAY) for k in req.strikes_pct for d in req.maturities_days]
    table = price_book(p, book, solvers=tuple(req.solvers), adams_step_search=req.step_search,
                       alpha_cm=req.alpha_cm, grid=FourierGrid(req.v_max, req.dv), cfg=HybridConfig(n=req.n),
                       threads=req.threads)
    rows = [PriceRow(maturity_days=r[0], strike_pct=r[1], method=r[2], steps=r[3], price=r[4],
                     implied_vol=r[5], cpu_ms=r[6], flags=r[7])
            for r in table.rows() if r[2] in req.solvers]
    return PriceResponse(rows=rows)


def skew(req: SkewRequest) -> SkewResponse:
    rows = []
    mats = [d * DAY for d in req.maturities_days]
    for a in req.alphas:
        for d, (_, value) in zip(req.maturities_days, atm_skew(req.params(a), mats, req.dk,
                                                               cfg=HybridConfig(n=req.n), threads=req.threads)):
            rows.append(SkewRow(maturity_days=d, alpha=a, skew=value))
    return SkewResponse(rows=rows)


def convergence(req: ConvergenceRequest) -> ConvergenceResponse:
    """First-order constant and plain / RR2 / RR3 errors of psi(t) against an RR3 reference."""
    if any(n < 4 for n in req.ns):
        raise DomainError("every n must be >= 4")
    if req.n_ref % 4:
        raise DomainError("n_ref must be divisible by 4")
    c = RiccatiCoeffs(req.lam, req.mu, req.nu, req.alpha)
    b = batch_from_solution(build_coefficients(c))
    base = HybridConfig(switch_factor=req.switch_factor)
    cache: dict[int, complex] = {}

    def plain(n: int) -> complex:
        if n not in cache:
            cache[n] = complex(hybrid_grid_batch(b, req.t, n, replace(base, n=n))[0][0])
        return cache[n]

    ref = plain(req.n_ref // 4) / 3.0 - 2.0 * plain(req.n_ref // 2) + 8.0 / 3.0 * plain(req.n_ref)
    rows = []
    for n in sorted(set(req.ns)):
        p_n = plain(n)
        cbar = 2.0 * n * (p_n - plain(2 * n))
        e2 = abs(2.0 * p_n - plain(n // 2) - ref) if n % 2 == 0 else None
        e3 = abs(plain(n // 4) / 3.0 - 2.0 * plain(n // 2) + 8.0 / 3.0 * p_n - ref) if n % 4 == 0 else None
        rows.append(ConvergenceRow(n=n, cbar1=cbar.real if c.is_real else abs(cbar),
                                   err_plain=abs(p_n - ref), err_rr2=e2, err_rr3=e3))
    if not all(math.isfinite(r.err_plain) for r in rows):
        raise DomainError("non-finite errors; the reference solve failed")
    return ConvergenceResponse(reference=ref, n_ref=req.n_ref, rows=rows)


HANDLERS = {
    "solve": (SolveRequest, solve),
    "radius": (RadiusRequest, radius),
    "triplet": (TripletRequest, triplet),
    "price": (PriceRequest, price),
    "skew": (SkewRequest, skew),
    "convergence": (ConvergenceRequest, convergence),
}
