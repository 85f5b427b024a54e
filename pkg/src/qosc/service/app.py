"""FastAPI application wrapping the experiment drivers.

Validation errors surface as 422 (pydantic) or 400 (domain rules raised by
the library). Numerical failures are not HTTP errors: the response carries
partial rows plus a failure_count so the client can decide how to exit.
"""
from __future__ import annotations

import math
import time

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..core import Level, OscillatorState
from ..experiments import SweepConfig, lifetime_stats, occupancy_sweep, uncertainty_scan
from ..franck_hertz import fh_curve
from ..integrator import (IntegratorConfig, extract_transitions,
                          integrate_partial, segment_plateaus)
from . import schemas as S


def create_app() -> FastAPI:
    app = FastAPI(title="qosc", version=__version__)

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=S.HealthResponse)
    def health() -> S.HealthResponse:
        return S.HealthResponse(status="ok", version=__version__)

    @app.post("/simulate", response_model=S.SimulateResponse)
    def simulate(req: S.SimulateRequest) -> S.SimulateResponse:
        t0 = time.perf_counter()
        cfg = IntegratorConfig(dt=req.dt, t_max=req.t_max, sample_stride=req.sample_stride)
        traj, t_fail = integrate_partial(
            OscillatorState(t=0.0, q=req.q0, v=req.v0), cfg, req.model.to_params())
        return S.SimulateResponse(
            t=traj.t.tolist(), q=traj.q.tolist(), v=traj.v.tolist(), e=traj.e.tolist(),
            t_fail=t_fail, failure_count=0 if t_fail is None else 1,
            duration_s=time.perf_counter() - t0)

    @app.post("/sweep", response_model=S.SweepResponse)
    def sweep(req: S.SweepRequest) -> S.SweepResponse:
        t0 = time.perf_counter()
        cfg = SweepConfig(
            v0_grid=tuple(req.v0_grid),
            observation_times=tuple(req.observation_times),
            params=req.model.to_params(),
            integrator=IntegratorConfig(dt=req.dt, t_max=0.0, sample_stride=req.sample_stride),
            band=req.band, window=req.window, mean_tol=req.mean_tol)
        rows = occupancy_sweep(cfg, jobs=req.jobs)
        out = [S.SweepRow(v0=r.v0, t_obs=r.t_obs,
                          energy=S.none_if_nan(r.energy_at_t),
                          level=None if r.settled_level is None else r.settled_level.n,
                          settled_energy=r.settled_energy, failed=r.failed)
               for r in rows]
        return S.SweepResponse(rows=out, failure_count=sum(r.failed for r in rows),
                               duration_s=time.perf_counter() - t0)

    @app.post("/staircase", response_model=S.StaircaseResponse)
    def staircase_ep(req: S.StaircaseRequest) -> S.StaircaseResponse:
        t0 = time.perf_counter()
        if (req.v0 is None) == (req.e0 is None):
            raise ValueError("exactly one of v0, e0 must be given")
        v0 = req.v0 if req.v0 is not None else math.sqrt(2.0 * req.e0)
        cfg = IntegratorConfig(dt=req.dt, t_max=req.t_max, sample_stride=req.sample_stride)
        traj, t_fail = integrate_partial(
            OscillatorState(t=0.0, q=0.0, v=v0), cfg, req.model.to_params())
        plats = segment_plateaus(traj)
        evs = extract_transitions(traj)
        return S.StaircaseResponse(
            transitions=[S.TransitionRow(from_level=e.from_level.n, to_level=e.to_level.n,
                                         t_leave=e.t_leave, t_arrive=e.t_arrive,
                                         duration=e.duration) for e in evs],
            plateaus=[S.PlateauRow(level=p.level.n, t_first=p.t_first, t_settle=p.t_settle,
                                   t_last=p.t_last, settled_energy=p.settled_energy)
                      for p in plats],
            final_level=plats[-1].level.n if plats else None,
            trajectory=(S.TrajectoryColumns(t=traj.t.tolist(), q=traj.q.tolist(),
                                            v=traj.v.tolist(), e=traj.e.tolist())
                        if req.include_trajectory else None),
            t_fail=t_fail, failure_count=0 if t_fail is None else 1,
            duration_s=time.perf_counter() - t0)

    @app.post("/lifetimes", response_model=S.LifetimesResponse)
    def lifetimes(req: S.LifetimesRequest) -> S.LifetimesResponse:
        t0 = time.perf_counter()
        stats = lifetime_stats(
            [Level(n) for n in req.levels], req.ensemble_size, req.seed,
            req.model.to_params(),
            IntegratorConfig(dt=req.dt, t_max=req.t_max, sample_stride=1),
            exit_threshold=req.exit_threshold, confirm_depth=req.confirm_depth,
            jobs=req.jobs)
        rows = [S.LifetimeRow(level=s.level.n, mean=S.none_if_nan(s.mean_lifetime),
                              std=S.none_if_nan(s.std_lifetime),
                              count=s.sample_count, censored=s.censored_count)
                for s in stats]
        return S.LifetimesResponse(rows=rows, failure_count=0,
                                   duration_s=time.perf_counter() - t0)

    @app.post("/uncertainty", response_model=S.UncertaintyResponse)
    def uncertainty(req: S.UncertaintyRequest) -> S.UncertaintyResponse:
        t0 = time.perf_counter()
        records = uncertainty_scan(
            Level(req.level), req.delta_e, req.model.to_params(),
            IntegratorConfig(dt=req.dt, t_max=0.0, sample_stride=1),
            escape_depth=req.escape_depth, t_budget=req.t_budget)
        rows = [S.UncertaintyRow(n=r.level.n, delta_e=r.delta_e, delta_t=r.delta_t,
                                 product=r.product, predicted=r.predicted)
                for r in records]
        return S.UncertaintyResponse(rows=rows, failure_count=0,
                                     duration_s=time.perf_counter() - t0)

    @app.post("/franck-hertz", response_model=S.FranckHertzResponse)
    def franck_hertz_ep(req: S.FranckHertzRequest) -> S.FranckHertzResponse:
        t0 = time.perf_counter()
        points = fh_curve(req.t0_grid, req.collision.to_config(),
                          req.model.to_params(), jobs=req.jobs)
        rows = [S.FHCurveRow(t0=p.t0,
                             mean_final_energy=S.none_if_nan(p.mean_final_energy),
                             mean_final_speed=S.none_if_nan(p.mean_final_speed),
                             n_phases=p.n_phases, non_settled_count=p.non_settled_count)
                for p in points]
        return S.FranckHertzResponse(rows=rows,
                                     non_settled_total=sum(p.non_settled_count for p in points),
                                     failure_count=0,
                                     duration_s=time.perf_counter() - t0)

    return app


app = create_app()


def main() -> None:
    """Run the service under uvicorn (qosc-serve entry point)."""
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(prog="qosc-serve")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    args = parser.parse_args()
    uvicorn.run("qosc.service.app:app", host=args.host, port=args.port)


if __name__ == "__main__":
    main()
