"""Command-line front end.

The CLI is a thin client over the HTTP service: it resolves configuration
(defaults, then an optional --profile preset, then an optional flat
key=value config file, then explicit flags, later layers winning), posts
one request to the service, and writes the response as CSV plus a flat
key=value manifest next to it. By default the service runs in-process
through an ASGI transport, so no server or network is involved; --server
switches to a remote instance with identical behavior and byte-identical
CSV.

Exit codes: 0 success, 2 configuration error, 3 numerical failure during
the run (partial output is still written).
"""
from __future__ import annotations

import argparse
import asyncio
import os
import sys
import time
from typing import Any, Callable, Optional

import httpx

from . import __version__

DEFAULT_OUT = {
    "simulate": "trajectory.csv",
    "sweep": "occupancy.csv",
    "staircase": "staircase.csv",
    "lifetimes": "lifetimes.csv",
    "uncertainty": "uncertainty.csv",
    "franck-hertz": "franck_hertz.csv",
}

_MODEL_KEYS = {"k": float, "a0": float, "omega_d": float, "phi_d": float,
               "eps_den": float}
_COMMON_KEYS = {"out": str, "server": str, "jobs": int, "seed": int}


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


#: subcommand -> {key: converter}; also the whitelist for config files.
KEYS: dict[str, dict[str, Callable[[str], Any]]] = {
    "simulate": {"v0": float, "q0": float, "t_max": float, "dt": float,
                 "sample_stride": int},
    "sweep": {"v0_grid": str, "v0_min": float, "v0_max": float, "v0_step": float,
              "observation_times": str, "dt": float, "sample_stride": int,
              "band": float, "window": float, "mean_tol": float},
    "staircase": {"v0": float, "e0": float, "t_max": float, "dt": float,
                  "sample_stride": int, "trajectory_out": str},
    "lifetimes": {"levels": str, "ensemble_size": int, "t_max": float,
                  "dt": float, "exit_threshold": float, "confirm_depth": float},
    "uncertainty": {"level": int, "delta_e": str, "escape_depth": float,
                    "t_budget": float, "dt": float},
    "franck-hertz": {"t0_grid": str, "t0_min": float, "t0_max": float,
                     "t0_steps": int, "n_phases": int, "mass_ratio": float,
                     "relax_t_max": float, "settle_tol": float,
                     "settle_eps_below": float, "settle_window": float,
                     "pump_from_electron": _bool, "dt": float},
}
for _sub in KEYS:
    KEYS[_sub].update(_MODEL_KEYS)
    KEYS[_sub].update(_COMMON_KEYS)

#: model defaults; the scattering and escape-time experiments are undriven.
_DRIVEN = {"k": 0.2, "a0": 0.05, "omega_d": 2.0, "phi_d": 0.0, "eps_den": 1e-6}
_UNDRIVEN = {**_DRIVEN, "a0": 0.0}

DEFAULTS: dict[str, dict[str, Any]] = {
    "simulate": {"q0": 0.0, "t_max": 100.0, "dt": 1e-3, "sample_stride": 10,
                 **_DRIVEN},
    "sweep": {"v0_min": 0.5, "v0_max": 5.0, "v0_step": 0.1,
              "observation_times": "10,100,1000,10000", "dt": 1e-3,
              "sample_stride": 100, "band": 0.25, "window": 5.0,
              "mean_tol": 0.05, **_DRIVEN},
    "staircase": {"e0": 3.2, "t_max": 1e5, "dt": 1e-3, "sample_stride": 100,
                  **_DRIVEN},
    "lifetimes": {"levels": "1,2,3", "ensemble_size": 32, "t_max": 2e4,
                  "dt": 1e-3, "exit_threshold": 0.1, "confirm_depth": 0.4,
                  **_DRIVEN},
    "uncertainty": {"level": 2, "delta_e": "0.05,0.1,0.2",
                    "escape_depth": 0.4, "t_budget": 1e4, "dt": 1e-3,
                    **_UNDRIVEN},
    "franck-hertz": {"t0_min": 0.1, "t0_max": 2.0, "t0_steps": 39,
                     "n_phases": 64, "mass_ratio": 1.0, "relax_t_max": 1e4,
                     "settle_tol": 0.05, "settle_eps_below": 1e-3,
                     "settle_window": 50.0, "pump_from_electron": True,
                     "dt": 1e-3, **_UNDRIVEN},
}

#: figure presets pinning the acceptance grids.
PROFILES: dict[str, tuple[str, dict[str, Any]]] = {
    "fig1": ("sweep", {"v0_min": 0.5, "v0_max": 5.0, "v0_step": 0.1,
                       "observation_times": "10,100,1000,10000",
                       "sample_stride": 100}),
    "fig2": ("staircase", {"e0": 3.2, "t_max": 1e5, "sample_stride": 100}),
    "fig3": ("franck-hertz", {"t0_min": 0.1, "t0_max": 2.0, "t0_steps": 39,
                              "n_phases": 64, "mass_ratio": 1.0}),
}


class ConfigError(Exception):
    """Invalid configuration; maps to exit code 2."""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qosc",
        description="Quantum-like oscillator experiments: simulate, sweep, "
                    "staircase, lifetimes, uncertainty, franck-hertz.")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--profile", choices=sorted(PROFILES),
                       help="preset pinning a figure's exact grid")
        p.add_argument("--out", help="output CSV path")
        p.add_argument("--server", help="base URL of a running service "
                                        "(default: run in-process)")
        p.add_argument("--jobs", type=int, help="worker threads "
                                                "(default: available parallelism)")
        p.add_argument("--seed", type=int, help="RNG seed (default 0)")
        for key in _MODEL_KEYS:
            p.add_argument(f"--{key.replace('_', '-')}", type=float, dest=key)

    def add(name: str, **kwargs: Any) -> argparse.ArgumentParser:
        p = subs.add_parser(name, **kwargs)
        add_common(p)
        return p

    p = add("simulate", help="integrate one initial condition, write t,q,v,E")
    p.add_argument("--v0", type=float)
    p.add_argument("--q0", type=float)
    p.add_argument("--t-max", type=float, dest="t_max")
    p.add_argument("--dt", type=float)
    p.add_argument("--sample-stride", type=int, dest="sample_stride")

    p = add("sweep", help="occupancy over a grid of initial velocities")
    p.add_argument("--v0-grid", dest="v0_grid", help="comma-separated V0 list")
    p.add_argument("--v0-min", type=float, dest="v0_min")
    p.add_argument("--v0-max", type=float, dest="v0_max")
    p.add_argument("--v0-step", type=float, dest="v0_step")
    p.add_argument("--observation-times", dest="observation_times",
                   help="comma-separated times")
    p.add_argument("--dt", type=float)
    p.add_argument("--sample-stride", type=int, dest="sample_stride")
    p.add_argument("--band", type=float)
    p.add_argument("--window", type=float)
    p.add_argument("--mean-tol", type=float, dest="mean_tol")

    p = add("staircase", help="energy staircase and its transitions")
    p.add_argument("--v0", type=float)
    p.add_argument("--e0", type=float, help="initial energy (alternative to --v0)")
    p.add_argument("--t-max", type=float, dest="t_max")
    p.add_argument("--dt", type=float)
    p.add_argument("--sample-stride", type=int, dest="sample_stride")
    p.add_argument("--trajectory-out", dest="trajectory_out",
                   help="also write the full trajectory CSV here")

    p = add("lifetimes", help="plateau lifetime statistics per level")
    p.add_argument("--levels", help="comma-separated level indices")
    p.add_argument("--ensemble-size", type=int, dest="ensemble_size")
    p.add_argument("--t-max", type=float, dest="t_max")
    p.add_argument("--dt", type=float)
    p.add_argument("--exit-threshold", type=float, dest="exit_threshold")
    p.add_argument("--confirm-depth", type=float, dest="confirm_depth")

    p = add("uncertainty", help="energy-time uncertainty products")
    p.add_argument("--level", type=int)
    p.add_argument("--delta-e", dest="delta_e", help="comma-separated disturbances")
    p.add_argument("--escape-depth", type=float, dest="escape_depth")
    p.add_argument("--t-budget", type=float, dest="t_budget")
    p.add_argument("--dt", type=float)

    p = add("franck-hertz", help="electron scattering curve")
    p.add_argument("--t0-grid", dest="t0_grid", help="comma-separated energies")
    p.add_argument("--t0-min", type=float, dest="t0_min")
    p.add_argument("--t0-max", type=float, dest="t0_max")
    p.add_argument("--t0-steps", type=int, dest="t0_steps")
    p.add_argument("--n-phases", type=int, dest="n_phases")
    p.add_argument("--mass-ratio", type=float, dest="mass_ratio")
    p.add_argument("--relax-t-max", type=float, dest="relax_t_max")
    p.add_argument("--settle-tol", type=float, dest="settle_tol")
    p.add_argument("--settle-eps-below", type=float, dest="settle_eps_below")
    p.add_argument("--settle-window", type=float, dest="settle_window")
    p.add_argument("--pump-from-electron", dest="pump_from_electron",
                   choices=("true", "false"))
    p.add_argument("--dt", type=float)

    return parser


def load_config_file(path: str) -> dict[str, str]:
    """Parse a flat key=value file; # starts a comment."""
    entries: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
                key, value = line.split("=", 1)
                entries[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return entries


def resolve_config(args: argparse.Namespace) -> dict[str, Any]:
    """Merge defaults, profile, config file and flags for one subcommand."""
    sub = args.subcommand
    allowed = KEYS[sub]
    cfg: dict[str, Any] = dict(DEFAULTS[sub])
    cfg.update({"out": DEFAULT_OUT[sub], "server": None, "jobs": None, "seed": 0})

    profile = getattr(args, "profile", None)
    if profile:
        want_sub, preset = PROFILES[profile]
        if want_sub != sub:
            raise ConfigError(f"profile {profile} belongs to subcommand {want_sub!r}, "
                              f"not {sub!r}")
        cfg.update(preset)

    if getattr(args, "config", None):
        for key, raw in load_config_file(args.config).items():
            if key not in allowed:
                raise ConfigError(f"unknown config key {key!r} for {sub}")
            try:
                cfg[key] = allowed[key](raw)
            except ValueError as exc:
                raise ConfigError(f"config key {key!r}: {exc}") from exc

    for key in allowed:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = _bool(val) if allowed[key] is _bool and isinstance(val, str) else val
    return cfg


def _comma_floats(text: str, what: str) -> list[float]:
    try:
        values = [float(tok) for tok in str(text).split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad {what}: {exc}") from exc
    if not values:
        raise ConfigError(f"{what} must be a nonempty comma-separated list")
    return values


def _comma_ints(text: str, what: str) -> list[int]:
    try:
        values = [int(tok) for tok in str(text).split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad {what}: {exc}") from exc
    if not values:
        raise ConfigError(f"{what} must be a nonempty comma-separated list")
    return values


def _grid(lo: float, hi: float, step: float, what: str) -> list[float]:
    if step <= 0 or hi < lo:
        raise ConfigError(f"bad {what} grid: [{lo}, {hi}] step {step}")
    count = int(round((hi - lo) / step)) + 1
    return [round(lo + i * step, 10) for i in range(count)]


def _linspace(lo: float, hi: float, steps: int) -> list[float]:
    if steps < 1:
        raise ConfigError(f"t0_steps must be >= 1, got {steps}")
    if steps == 1:
        return [lo]
    h = (hi - lo) / (steps - 1)
    return [round(lo + i * h, 10) for i in range(steps)]


def _model_block(cfg: dict[str, Any]) -> dict[str, Any]:
    return {key: cfg[key] for key in _MODEL_KEYS}


def build_request(sub: str, cfg: dict[str, Any]) -> tuple[str, dict[str, Any]]:
    """Endpoint path and JSON payload for a resolved configuration."""
    jobs = cfg.get("jobs")
    if jobs is None:
        jobs = os.cpu_count() or 1
    if sub == "simulate":
        if cfg.get("v0") is None:
            raise ConfigError("simulate requires --v0")
        return "/simulate", {"v0": cfg["v0"], "q0": cfg["q0"], "t_max": cfg["t_max"],
                             "dt": cfg["dt"], "sample_stride": cfg["sample_stride"],
                             "model": _model_block(cfg)}
    if sub == "sweep":
        if cfg.get("v0_grid"):
            grid = _comma_floats(cfg["v0_grid"], "v0_grid")
        else:
            grid = _grid(cfg["v0_min"], cfg["v0_max"], cfg["v0_step"], "v0")
        return "/sweep", {"v0_grid": grid,
                          "observation_times": _comma_floats(cfg["observation_times"],
                                                             "observation_times"),
                          "dt": cfg["dt"], "sample_stride": cfg["sample_stride"],
                          "band": cfg["band"], "window": cfg["window"],
                          "mean_tol": cfg["mean_tol"],
                          "model": _model_block(cfg), "jobs": jobs}
    if sub == "staircase":
        payload: dict[str, Any] = {"t_max": cfg["t_max"], "dt": cfg["dt"],
                                   "sample_stride": cfg["sample_stride"],
                                   "model": _model_block(cfg),
                                   "include_trajectory": bool(cfg.get("trajectory_out"))}
        if cfg.get("v0") is not None:
            payload["v0"] = cfg["v0"]
        else:
            payload["e0"] = cfg["e0"]
        return "/staircase", payload
    if sub == "lifetimes":
        return "/lifetimes", {"levels": _comma_ints(cfg["levels"], "levels"),
                              "ensemble_size": cfg["ensemble_size"],
                              "seed": cfg["seed"], "t_max": cfg["t_max"],
                              "dt": cfg["dt"],
                              "exit_threshold": cfg["exit_threshold"],
                              "confirm_depth": cfg["confirm_depth"],
                              "model": _model_block(cfg), "jobs": jobs}
    if sub == "uncertainty":
        return "/uncertainty", {"level": cfg["level"],
                                "delta_e": _comma_floats(cfg["delta_e"], "delta_e"),
                                "escape_depth": cfg["escape_depth"],
                                "t_budget": cfg["t_budget"], "dt": cfg["dt"],
                                "model": _model_block(cfg)}
    if sub == "franck-hertz":
        if cfg.get("t0_grid"):
            grid = _comma_floats(cfg["t0_grid"], "t0_grid")
        else:
            grid = _linspace(cfg["t0_min"], cfg["t0_max"], cfg["t0_steps"])
        collision = {"mass_ratio": cfg["mass_ratio"], "n_phases": cfg["n_phases"],
                     "relax_t_max": cfg["relax_t_max"], "settle_tol": cfg["settle_tol"],
                     "settle_eps_below": cfg["settle_eps_below"],
                     "settle_window": cfg["settle_window"],
                     "pump_from_electron": cfg["pump_from_electron"],
                     "dt": cfg["dt"]}
        return "/franck-hertz", {"t0_grid": grid, "collision": collision,
                                 "model": _model_block(cfg),
                                 "jobs": jobs}
    raise ConfigError(f"unknown subcommand {sub!r}")


async def _asgi_post(path: str, payload: dict[str, Any]) -> httpx.Response:
    from .service.app import create_app

    transport = httpx.ASGITransport(app=create_app())
    async with httpx.AsyncClient(transport=transport,
                                 base_url="http://qosc.internal",
                                 timeout=None) as client:
        return await client.post(path, json=payload)


def call_service(path: str, payload: dict[str, Any],
                 server: Optional[str]) -> dict[str, Any]:
    if server:
        try:
            with httpx.Client(base_url=server, timeout=None) as client:
                resp = client.post(path, json=payload)
        except httpx.HTTPError as exc:
            raise ConfigError(f"cannot reach server {server}: {exc}") from exc
    else:
        resp = asyncio.run(_asgi_post(path, payload))
    if resp.status_code in (400, 422):
        raise ConfigError(f"invalid configuration: {resp.text}")
    resp.raise_for_status()
    return resp.json()


def _fnum(x: Any) -> str:
    """Full-precision decimal rendering; None becomes nan."""
    if x is None:
        return "nan"
    return repr(float(x))


def _write_rows(path: str, header: str, lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for line in lines:
            fh.write(line + "\n")


def write_output(sub: str, cfg: dict[str, Any], data: dict[str, Any]) -> tuple[int, dict[str, int]]:
    """Write CSV output(s); returns (rows_written, counters)."""
    out = cfg["out"]
    counters = {"failure_count": int(data.get("failure_count", 0))}
    if sub == "simulate":
        lines = ["%.17g,%.17g,%.17g,%.17g" % (t, q, v, e)
                 for t, q, v, e in zip(data["t"], data["q"], data["v"], data["e"])]
        _write_rows(out, "t,q,v,E", lines)
        return len(lines), counters
    if sub == "sweep":
        lines = []
        for r in data["rows"]:
            level = "" if r["level"] is None else str(r["level"])
            lines.append(f'{_fnum(r["v0"])},{_fnum(r["t_obs"])},{_fnum(r["energy"])},{level}')
        _write_rows(out, "v0,t_obs,energy,level", lines)
        return len(lines), counters
    if sub == "staircase":
        lines = [f'{r["from_level"]},{r["to_level"]},{_fnum(r["t_leave"])},'
                 f'{_fnum(r["t_arrive"])},{_fnum(r["duration"])}'
                 for r in data["transitions"]]
        _write_rows(out, "from_level,to_level,t_leave,t_arrive,duration", lines)
        if cfg.get("trajectory_out") and data.get("trajectory"):
            tr = data["trajectory"]
            traj_lines = ["%.17g,%.17g,%.17g,%.17g" % (t, q, v, e)
                          for t, q, v, e in zip(tr["t"], tr["q"], tr["v"], tr["e"])]
            _write_rows(cfg["trajectory_out"], "t,q,v,E", traj_lines)
        return len(lines), counters
    if sub == "lifetimes":
        lines = [f'{r["level"]},{_fnum(r["mean"])},{_fnum(r["std"])},'
                 f'{r["count"]},{r["censored"]}' for r in data["rows"]]
        _write_rows(out, "level,mean,std,count,censored", lines)
        return len(lines), counters
    if sub == "uncertainty":
        lines = [f'{r["n"]},{_fnum(r["delta_e"])},{_fnum(r["delta_t"])},'
                 f'{_fnum(r["product"])},{_fnum(r["predicted"])}'
                 for r in data["rows"]]
        _write_rows(out, "n,delta_e,delta_t,product,predicted", lines)
        return len(lines), counters
    if sub == "franck-hertz":
        lines = [f'{_fnum(r["t0"])},{_fnum(r["mean_final_energy"])},'
                 f'{_fnum(r["mean_final_speed"])},{r["n_phases"]},{r["non_settled_count"]}'
                 for r in data["rows"]]
        _write_rows(out, "t0,mean_final_energy,mean_final_speed,n_phases,non_settled_count",
                    lines)
        counters["non_settled_total"] = int(data.get("non_settled_total", 0))
        return len(lines), counters
    raise ConfigError(f"unknown subcommand {sub!r}")


def write_manifest(sub: str, cfg: dict[str, Any], rows: int,
                   counters: dict[str, int], wall_s: float) -> None:
    path = cfg["out"] + ".manifest"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"subcommand = {sub}\n")
        fh.write(f"artifact_version = {__version__}\n")
        for key in sorted(k for k in cfg if cfg[k] is not None and k != "server"):
            fh.write(f"{key} = {cfg[key]}\n")
        fh.write(f"rows_written = {rows}\n")
        for key in sorted(counters):
            fh.write(f"{key} = {counters[key]}\n")
        fh.write(f"wall_clock_s = {wall_s:.3f}\n")


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        cfg = resolve_config(args)
        path, payload = build_request(args.subcommand, cfg)
        data = call_service(path, payload, cfg.get("server"))
        rows, counters = write_output(args.subcommand, cfg, data)
        if rows >= 1:
            write_manifest(args.subcommand, cfg, rows, counters,
                           time.perf_counter() - started)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if counters.get("failure_count", 0) > 0:
        print(f"warning: {counters['failure_count']} numerical failure(s); "
              f"partial output written to {cfg['out']}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
