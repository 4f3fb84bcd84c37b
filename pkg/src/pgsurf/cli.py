"""Command-line front end.

    pg-surf <curvature|verify|reconstruct|probe|mesh> --config cfg.json [--set key=value ...]

Configuration is a JSON object; `--set` overrides individual (dotted)
keys and wins over file values.  Outputs are deterministic: identical
configurations produce byte-identical CSV/JSON/OBJ files (floats printed
with 17 significant digits, fixed row order).

Exit codes: 0 success, 1 verification/tolerance failure, 2 configuration
error, 3 empty or all-lightlike grid, 4 ODE branch violation.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Optional

import numpy as np

from . import families as fam
from . import reconstruct as rec
from .core import Motion
from .errors import (
    BranchViolation,
    ConfigError,
    DomainError,
    GridRejected,
    InvalidParams,
    PGSurfError,
)
from .factorable import (
    FactorableSurface,
    GridSpec,
    cross_check,
    default_grid,
    pipeline_grid,
    specialized_grid,
)
from .surface import gaussian_curvature, mean_curvature, transform_jet

__all__ = ["main", "entry"]

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_EMPTY_GRID = 3
EXIT_BRANCH = 4


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _sanitize(obj):
    """Make a report JSON-safe: numpy scalars to python, non-finite to None."""
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


def _write_text(path: Optional[str], text: str) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_report(path: Optional[str], report: dict) -> None:
    _write_text(path, json.dumps(_sanitize(report), sort_keys=True, indent=2) + "\n")


def _parse_set(pairs: list[str]) -> dict:
    """Turn --set a.b=1 overrides into a nested dict."""
    out: dict = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, raw = pair.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"--set key {key!r} collides with a scalar")
        node[parts[-1]] = value
    return out


def _deep_update(base: dict, extra: dict) -> dict:
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _deep_update(base[key], value)
        else:
            base[key] = value
    return base


def _load_config(path: Optional[str], overrides: list[str]) -> dict:
    cfg: dict = {}
    if path:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config root must be a JSON object")
    return _deep_update(cfg, _parse_set(overrides))


def _build_surface(cfg: dict) -> tuple[str, FactorableSurface]:
    section = cfg.get("family")
    if not isinstance(section, dict) or "name" not in section:
        raise ConfigError("config needs family.name")
    name = section["name"]
    params = {k: v for k, v in section.items() if k != "name"}
    try:
        return name, fam.family_surface(name, params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for family {name!r}: {exc}") from exc


def _build_grid(cfg: dict, surface: FactorableSurface) -> GridSpec:
    section = cfg.get("grid") or {}
    n1 = int(section.get("n1", 20))
    n2 = int(section.get("n2", 20))
    base = default_grid(surface, n1=n1, n2=n2)
    u1 = tuple(section.get("u1", base.u1))
    u2 = tuple(section.get("u2", base.u2))
    return GridSpec((float(u1[0]), float(u1[1])), (float(u2[0]), float(u2[1])), n1, n2)


def _tolerances(cfg: dict) -> dict:
    tol = {"constancy": 1e-7, "cross_check": 1e-8, "motion": 1e-8, "ode": 1e-6}
    tol.update(cfg.get("tolerances") or {})
    for key, value in tol.items():
        if not (isinstance(value, (int, float)) and value > 0):
            raise ConfigError(f"tolerance {key} must be positive, got {value!r}")
    return tol


# ---------------------------------------------------------------------------
# curvature
# ---------------------------------------------------------------------------

CSV_HEADER = "u1,u2,x,y,z,K,H,epsilon,W,excluded"


def _sweep(surface: FactorableSurface, grid: GridSpec, route: str, fd_step: float) -> dict:
    pipe = pipeline_grid(surface, grid, mode="fd" if route == "pipeline-fd" else "analytic",
                         fd_step=fd_step)
    if route == "specialized":
        closed = specialized_grid(surface, grid)
        return {**pipe, "K": closed["K"], "H": closed["H"], "excluded": closed["excluded"]}
    return pipe


def run_curvature(cfg: dict) -> int:
    _, surface = _build_surface(cfg)
    grid = _build_grid(cfg, surface)
    route = cfg.get("formulas", "pipeline")
    if route not in ("pipeline", "pipeline-fd", "specialized"):
        raise ConfigError(f"formulas must be pipeline, pipeline-fd or specialized, got {route!r}")
    fd_step = float(cfg.get("fd_step", 1e-4))
    data = _sweep(surface, grid, route, fd_step)
    excluded = data["excluded"]

    rows = [CSV_HEADER]
    for i in range(grid.n1):
        for j in range(grid.n2):
            cells = [_fmt(data["U1"][i, j]), _fmt(data["U2"][i, j]),
                     _fmt(data["x"][i, j]), _fmt(data["y"][i, j]), _fmt(data["z"][i, j])]
            if excluded[i, j]:
                cells += ["", "", "", "", "1"]
            else:
                cells += [_fmt(data["K"][i, j]), _fmt(data["H"][i, j]),
                          _fmt(data["eps"][i, j]), _fmt(data["W"][i, j]), "0"]
            rows.append(",".join(cells))
    out = cfg.get("output") or {}
    _write_text(out.get("csv"), "\n".join(rows) + "\n")

    included = ~excluded
    n_inc = int(np.count_nonzero(included))
    summary = {
        "family": cfg.get("family"),
        "grid": {"u1": list(grid.u1), "u2": list(grid.u2), "n1": grid.n1, "n2": grid.n2},
        "formulas": route,
        "rows": int(excluded.size),
        "included": n_inc,
        "excluded": int(excluded.size) - n_inc,
    }
    for name in ("K", "H"):
        values = data[name][included]
        if values.size:
            mean = float(np.mean(values))
            summary[name] = {"mean": mean,
                             "max_deviation": float(np.max(np.abs(values - mean))),
                             "std": float(np.std(values))}
    _json_report(out.get("json"), summary)
    if n_inc == 0:
        return EXIT_EMPTY_GRID
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

_EXPECTED_FIELD = {"thm31": "K", "thm32": "absH", "thm42": "absH"}


def _expected_constant(name: str, params: dict) -> float:
    if name == "thm31":
        return -abs(float(params["k0"]))
    return abs(float(params["h0"]))


def _random_motions(rng: np.random.Generator, count: int) -> list[Motion]:
    return [Motion(*(float(v) for v in rng.uniform(-1.0, 1.0, size=6))) for _ in range(count)]


def run_verify(cfg: dict) -> int:
    section = cfg.get("family") or {}
    name = section.get("name")
    if name not in ("thm31", "thm32", "thm42"):
        raise ConfigError("verify needs family.name in {thm31, thm32, thm42}")
    params = {k: v for k, v in section.items() if k != "name"}
    _, surface = _build_surface(cfg)
    perturb = cfg.get("perturb") or {}
    if "exponent_scale" in perturb:
        try:
            surface = fam.perturb_exponent(surface, float(perturb["exponent_scale"]))
        except DomainError as exc:
            raise ConfigError(f"perturbation invalid for this family: {exc}") from exc
    grid = _build_grid(cfg, surface)
    tol = _tolerances(cfg)

    suites: dict = {}

    closed = specialized_grid(surface, grid)
    field = _EXPECTED_FIELD[name]
    values = np.abs(closed["H"]) if field == "absH" else closed["K"]
    values = values[~closed["excluded"]]
    expected = _expected_constant(name, params)
    if values.size == 0:
        raise GridRejected("no admissible points for the constancy suite")
    mean = float(np.mean(values))
    maxdev = float(np.max(np.abs(values - mean)))
    suites["constancy"] = {
        "passed": maxdev < tol["constancy"] and abs(mean - expected) < tol["constancy"],
        "field": field,
        "mean": mean,
        "expected": expected,
        "max_deviation": maxdev,
        "tolerance": tol["constancy"],
    }

    try:
        xrep = cross_check(surface, grid)
        suites["cross_check"] = {
            "passed": xrep.consistent and xrep.max_discrepancy < tol["cross_check"],
            "max_discrepancy": xrep.max_discrepancy,
            "sigma": xrep.sigma,
            "sigma_consistent": xrep.consistent,
            "tolerance": tol["cross_check"],
        }
    except GridRejected as exc:
        suites["cross_check"] = {"passed": False, "error": str(exc)}

    rng = np.random.default_rng(int(cfg.get("seed", 0)))
    motions = _random_motions(rng, int(cfg.get("motions", 10)))
    a1, a2 = grid.axes()
    pts = [(float(u), float(v)) for u in a1[:: max(1, grid.n1 // 6)]
           for v in a2[:: max(1, grid.n2 // 6)]]
    worst = 0.0
    for u1, u2 in pts:
        jet = surface.jet(u1, u2)
        k_ref, h_ref = gaussian_curvature(jet), mean_curvature(jet)
        for m in motions:
            moved = transform_jet(m, jet)
            worst = max(worst, abs(gaussian_curvature(moved) - k_ref),
                        abs(mean_curvature(moved) - h_ref))
    suites["motion_invariance"] = {
        "passed": worst < tol["motion"],
        "max_difference": worst,
        "motions": len(motions),
        "tolerance": tol["motion"],
    }

    failed = [key for key, suite in suites.items() if not suite["passed"]]
    report = {"family": section, "passed": not failed, "failed": failed, "suites": suites}
    out = cfg.get("output") or {}
    _json_report(out.get("json"), report)
    return EXIT_OK if not failed else EXIT_FAIL


# ---------------------------------------------------------------------------
# reconstruct
# ---------------------------------------------------------------------------

def run_reconstruct(cfg: dict) -> int:
    theorem = str(cfg.get("theorem", ""))
    h = float(cfg.get("h", 1e-3))
    tol = _tolerances(cfg)["ode"]
    if theorem == "3.1":
        result = rec.reconstruct_thm31(
            k0=float(cfg.get("k0", 1.0)), g0=float(cfg.get("g0", 1.0)),
            lam1=float(cfg.get("lam1", 0.0)), sign=int(cfg.get("sign", 1)),
            span=tuple(cfg.get("span", (0.0, 2.0))), h=h)
        error = result.max_error
    elif theorem == "3.2":
        result = rec.reconstruct_thm32(
            h0=float(cfg.get("h0", 0.5)), f0=float(cfg.get("f0", 1.0)),
            lam=None if cfg.get("lam") is None else float(cfg["lam"]),
            causal=str(cfg.get("causal", "spacelike")),
            y0=float(cfg.get("y0", 0.0)), length=float(cfg.get("length", 1.0)),
            h=h, u0=None if cfg.get("u0") is None else float(cfg["u0"]))
        error = result.max_error
    elif theorem == "4.2":
        result = rec.reconstruct_thm42(
            h0=float(cfg.get("h0", 0.5)), lam1=float(cfg.get("lam1", 1.0)),
            lam2=float(cfg.get("lam2", 0.0)), z0=float(cfg.get("z0", 1.2)),
            length=float(cfg.get("length", 0.8)), h=h)
        error = result.max_rel_error
    else:
        raise ConfigError("reconstruct needs theorem in {3.1, 3.2, 4.2}")

    passed = error < tol
    report = {
        "theorem": theorem,
        "h": result.h,
        "corridor": [float(result.ts[0]), float(result.ts[-1])],
        "steps": int(result.ts.size - 1),
        "max_error": result.max_error,
        "max_rel_error": result.max_rel_error,
        "tolerance": tol,
        "passed": passed,
        "meta": result.meta,
    }
    out = cfg.get("output") or {}
    _json_report(out.get("json"), report)
    return EXIT_OK if passed else EXIT_FAIL


# ---------------------------------------------------------------------------
# probe
# ---------------------------------------------------------------------------

def run_probe(cfg: dict) -> int:
    space = rec.FamilySpace(
        degree_f=int(cfg.get("degree_f", 2)),
        degree_g=int(cfg.get("degree_g", 2)),
        exponential=bool(cfg.get("exponential", True)),
    )
    section = cfg.get("grid") or {}
    grid = GridSpec(
        tuple(section.get("u1", (-0.5, 0.5))),
        tuple(section.get("u2", (-0.5, 0.5))),
        int(section.get("n1", 9)),
        int(section.get("n2", 9)),
    )
    workers = max(1, int(os.environ.get("PG_SURF_THREADS", "1")))
    report = rec.nonexistence_probe(
        k0=float(cfg.get("k0", 1.0)),
        space=space,
        budget=int(cfg.get("budget", 10_000)),
        grid=grid,
        seed=int(cfg.get("seed", 0)),
        restarts=int(cfg.get("restarts", 6)),
        workers=workers,
    )
    floor = cfg.get("floor")
    payload = {
        "header": report.header,
        "k0": report.k0,
        "best_residual": report.best_residual,
        "best_theta": list(report.best_theta),
        "evaluations": report.evaluations,
        "budget": report.budget,
        "restarts": report.restarts,
    }
    passed = True
    if floor is not None and report.k0 != 0.0:
        passed = report.best_residual > float(floor)
        payload["floor"] = float(floor)
        payload["floor_passed"] = passed
    out = cfg.get("output") or {}
    _json_report(out.get("json"), payload)
    return EXIT_OK if passed else EXIT_FAIL


# ---------------------------------------------------------------------------
# mesh
# ---------------------------------------------------------------------------

def run_mesh(cfg: dict) -> int:
    _, surface = _build_surface(cfg)
    grid = _build_grid(cfg, surface)
    route = cfg.get("formulas", "pipeline")
    data = _sweep(surface, grid, route, float(cfg.get("fd_step", 1e-4)))
    excluded = data["excluded"]
    n1, n2 = grid.n1, grid.n2

    lines = [f"# pg-surf mesh {n1}x{n2}"]
    for i in range(n1):
        for j in range(n2):
            lines.append(f"v {_fmt(data['x'][i, j])} {_fmt(data['y'][i, j])} {_fmt(data['z'][i, j])}")
    faces = []
    for i in range(n1 - 1):
        for j in range(n2 - 1):
            corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
            if any(excluded[a, b] for a, b in corners):
                continue
            ids = [a * n2 + b + 1 for a, b in corners]
            faces.append("f " + " ".join(str(k) for k in ids))
    lines.extend(faces)

    out = cfg.get("output") or {}
    if int(np.count_nonzero(~excluded)) == 0 or not faces:
        return EXIT_EMPTY_GRID
    _write_text(out.get("obj"), "\n".join(lines) + "\n")

    side = ["vertex,u1,u2,K,H,excluded"]
    for i in range(n1):
        for j in range(n2):
            idx = i * n2 + j + 1
            if excluded[i, j]:
                side.append(f"{idx},{_fmt(data['U1'][i, j])},{_fmt(data['U2'][i, j])},,,1")
            else:
                side.append(f"{idx},{_fmt(data['U1'][i, j])},{_fmt(data['U2'][i, j])},"
                            f"{_fmt(data['K'][i, j])},{_fmt(data['H'][i, j])},0")
    _write_text(out.get("sidecar"), "\n".join(side) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

_COMMANDS = {
    "curvature": run_curvature,
    "verify": run_verify,
    "reconstruct": run_reconstruct,
    "probe": run_probe,
    "mesh": run_mesh,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="pg-surf",
        description="Curvature data and verification runs for surfaces in the pseudo-Galilean 3-space.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} command")
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a (dotted) config key; wins over file values")
    args = parser.parse_args(argv)

    try:
        cfg = _load_config(args.config, args.set)
        return _COMMANDS[args.command](cfg)
    except (ConfigError, InvalidParams) as exc:
        print(f"pg-surf: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BranchViolation, DomainError) as exc:
        print(f"pg-surf: branch violation: {exc}", file=sys.stderr)
        return EXIT_BRANCH
    except GridRejected as exc:
        print(f"pg-surf: grid rejected: {exc}", file=sys.stderr)
        return EXIT_EMPTY_GRID
    except PGSurfError as exc:
        print(f"pg-surf: {exc}", file=sys.stderr)
        return EXIT_FAIL


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
