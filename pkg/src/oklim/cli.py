"""Command-line surface: evaluate Green's functions, local energies, limit and
finite-scale energies, the eta-sweep expansion table, and particle placement.

Exit codes: 0 success, 1 usage/schema, 2 singularity, 3 physical validation,
4 admissibility.  All numeric output carries 17 significant digits; CSV
columns are append-only across versions.  The environment variable
OKLIM_EWALD_ALPHA overrides the default splitting parameter.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
import time

import numpy as np

from . import __version__, green, limits, local, optimize, sharp
from .errors import (CoincidentPoints, DiameterTooLarge, InadmissibleConfiguration,
                     NoConvergence, OklimError, OverlappingBalls, SingularPoint,
                     UnequalMasses2D)

EXIT_USAGE = 1
EXIT_SINGULAR = 2
EXIT_PHYSICAL = 3
EXIT_ADMISSIBILITY = 4


# ---------------------------------------------------------------------------
# serialization: JSON / CSV with 17 significant digits
# ---------------------------------------------------------------------------

def fmt17(x) -> str:
    return format(float(x), ".17g")


def dumps17(obj, indent=0) -> str:
    """JSON text with floats at 17 significant digits."""
    pad = " " * indent
    if isinstance(obj, dict):
        items = ",\n".join(
            f"{pad}  {json.dumps(str(k))}: {dumps17(v, indent + 2).lstrip()}"
            for k, v in obj.items())
        return f"{pad}{{\n{items}\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        items = ", ".join(dumps17(v).lstrip() for v in obj)
        return f"{pad}[{items}]"
    if isinstance(obj, bool) or obj is None:
        return pad + json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return pad + str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return pad + fmt17(obj)
    return pad + json.dumps(obj)


def make_manifest(command: str, parameters: dict, params: green.EwaldParameters,
                  wall_time_s: float) -> dict:
    return {
        "command": command,
        "parameters": parameters,
        "version": __version__,
        "ewald": {"alpha": params.alpha, "real_cutoff": params.real_cutoff,
                  "fourier_cutoff": params.fourier_cutoff},
        "wall_time_s": wall_time_s,
    }


def write_csv(stream, manifest: dict, header: list, rows: list):
    stream.write("# manifest: " + dumps17(manifest).replace("\n", " ") + "\n")
    stream.write(",".join(header) + "\n")
    for row in rows:
        cells = []
        for v in row:
            if v is None:
                cells.append("")
            elif isinstance(v, str):
                cells.append(v)
            else:
                cells.append(fmt17(v))
        stream.write(",".join(cells) + "\n")


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# configuration files
# ---------------------------------------------------------------------------

def validate_config(data) -> list:
    """Schema check; returns (json-pointer, message) pairs for every violation."""
    errs = []
    if not isinstance(data, dict):
        return [("", "configuration must be a JSON object")]
    dim = data.get("dim")
    if dim not in (2, 3):
        errs.append(("/dim", "must be 2 or 3"))
    parts = data.get("particles")
    if not isinstance(parts, list) or not parts:
        errs.append(("/particles", "must be a non-empty array"))
        parts = []
    for i, p in enumerate(parts):
        ptr = f"/particles/{i}"
        if not isinstance(p, dict):
            errs.append((ptr, "must be an object"))
            continue
        m = p.get("mass")
        if not isinstance(m, (int, float)) or isinstance(m, bool) or not m > 0:
            errs.append((ptr + "/mass", "must be a positive number"))
        pos = p.get("position")
        if not isinstance(pos, list) or (dim in (2, 3) and len(pos) != dim) or \
                any(not isinstance(v, (int, float)) or isinstance(v, bool) for v in (pos or [])):
            errs.append((ptr + "/position", f"must be an array of {dim} numbers"))
    eta = data.get("eta")
    if eta is not None and (not isinstance(eta, (int, float)) or isinstance(eta, bool)
                            or not 0 < eta <= 0.25):
        errs.append(("/eta", "must be a number in (0, 0.25]"))
    return errs


def load_point_configuration(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    errs = validate_config(data)
    if errs:
        for ptr, msg in errs:
            sys.stderr.write(f"schema violation at {ptr or '/'}: {msg}\n")
        raise SystemExit(EXIT_USAGE)
    cfg = limits.PointConfiguration(
        data["dim"], [(p["mass"], p["position"]) for p in data["particles"]])
    return cfg, data.get("eta")


def default_params() -> green.EwaldParameters:
    env = os.environ.get("OKLIM_EWALD_ALPHA")
    if env:
        return green.EwaldParameters.for_alpha(float(env))
    return green.EwaldParameters.default()


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_green(args) -> int:
    params = default_params()
    x = [float(v) for v in args.x.split(",")]
    if len(x) != args.dim:
        raise ValueError(f"--x needs {args.dim} comma-separated coordinates")
    g = green.green_eval(args.dim, x, params)
    if not (args.grad or args.regular):
        sys.stdout.write(fmt17(g) + "\n")
        return 0
    payload = {"G": g}
    if args.grad:
        payload["grad"] = list(green.green_grad(args.dim, x, params))
    if args.regular:
        payload["g"] = green.regular_part(args.dim, x, params)
    sys.stdout.write(dumps17(payload) + "\n")
    return 0


def cmd_local(args) -> int:
    if args.mass is None or args.mass <= 0:
        raise ValueError("--mass must be a positive number")
    m = args.mass
    payload = {}
    if args.dim == 2:
        payload["e2d"] = local.e2d(m)
        if args.partition:
            part = local.envelope_2d(m)
            payload["partition"] = {"n": part.n, "per_mass": part.per_mass,
                                    "envelope_value": part.envelope_value}
    else:
        b = local.e3d_ball(m)
        payload["e3d_ball"] = {
            "perimeter_term": b.perimeter_term, "self_h1_term": b.self_h1_term,
            "total": b.total, "reference": "ball ansatz (upper bound)"}
        if args.concavity:
            payload["concavity_coefficient"] = local.concavity_coefficient(m)
        if args.splitting or args.threshold:
            payload["splitting_threshold"] = local.splitting_threshold_3d()
    sys.stdout.write(dumps17(payload) + "\n")
    return 0


_CSV_HEADER = ["kind", "eta", "gamma", "perimeter_term", "self_h1_term",
               "regular_self_term", "cross_term", "total", "tail_bound"]


def _breakdown_row(kind, bd) -> list:
    return [kind, bd.eta, bd.gamma, bd.perimeter_term, bd.self_h1_term,
            bd.regular_self_term, bd.cross_term, bd.total, bd.tail_bound]


def cmd_energy(args) -> int:
    t0 = time.perf_counter()
    params = default_params()
    cfg, inline_eta = load_point_configuration(args.config)
    eta = args.eta if args.eta is not None else inline_eta
    rows = []
    if eta is not None:
        ball = sharp.BallConfiguration(cfg.dim, eta, cfg.particles)
        bd = sharp.sharp_energy(ball)
        rows.append(_breakdown_row("sharp", bd))
    else:
        e0_val = limits.e0(cfg)
        f0_bd = limits.f0_energy(cfg, params, args.pair_convention)
        rows.append(["E0", None, None, None, None, None, None, e0_val, 0.0])
        rows.append(_breakdown_row("F0", f0_bd))
    manifest = make_manifest("energy", {
        "config": args.config, "eta": eta, "pair_convention": args.pair_convention},
        params, time.perf_counter() - t0)
    buf = io.StringIO()
    write_csv(buf, manifest, _CSV_HEADER, rows)
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_expand(args) -> int:
    t0 = time.perf_counter()
    params = default_params()
    cfg, _ = load_point_configuration(args.config)
    etas = [float(v) for v in args.etas.split(",") if v.strip()]
    if not etas:
        raise ValueError("--etas must list at least one value")
    table = sharp.second_order_quotient(cfg, etas)
    rows = [["sweep", r.eta, r.energy, r.quotient, None] for r in table.rows]
    if args.richardson:
        if cfg.dim != 3:
            raise ValueError("--richardson applies to 3D sweeps")
        f0_hat, slope = sharp.richardson_extrapolate(table.etas, table.quotients)
        f0_pred = limits.f0_energy(cfg, params, "ordered").total
        gap = abs(f0_hat - f0_pred) / abs(f0_pred)
        rows.append(["richardson_f0", None, None, None, f0_hat])
        rows.append(["richardson_slope", None, None, None, slope])
        rows.append(["limit_f0_ordered", None, None, None, f0_pred])
        rows.append(["relative_gap", None, None, None, gap])
    manifest = make_manifest("expand", {
        "config": args.config, "etas": etas, "richardson": bool(args.richardson),
        "reference": table.reference, "reference_kind": table.reference_kind},
        params, time.perf_counter() - t0)
    buf = io.StringIO()
    write_csv(buf, manifest, ["kind", "eta", "E_eta", "F_eta", "value"], rows)
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_place(args) -> int:
    t0 = time.perf_counter()
    params = default_params()
    initial = None
    if args.config:
        cfg, _ = load_point_configuration(args.config)
        masses = cfg.masses
        dim = cfg.dim
        if args.from_config:
            initial = cfg.positions
    else:
        if args.n is None or args.mass is None:
            raise ValueError("--n and --mass are required without --config")
        masses = np.full(args.n, args.mass)
        dim = args.dim
    converged = True
    try:
        result = optimize.place(dim, masses, restarts=args.restarts, seed=args.seed,
                                tol=args.tol, params=params, initial_positions=initial)
    except NoConvergence as exc:
        result = exc.result
        converged = False
    payload = {
        "converged": converged,
        "energy": result.energy,
        "grad_norm": result.grad_norm,
        "iterations": result.iterations,
        "restarts_used": result.restarts_used,
        "pairwise_distances": list(result.pairwise_distances),
        "config": {
            "dim": dim,
            "particles": [{"mass": m, "position": list(p.coords)}
                          for m, p in result.config.particles],
        },
    }
    if args.lattice_compare:
        candidates = []
        for lattice in ("square", "triangular-sheared"):
            try:
                e = optimize.lattice_candidate_energy(dim, len(masses), float(masses[0]),
                                                      lattice, params)
                candidates.append({"lattice": lattice, "energy": e})
            except OklimError as exc:
                candidates.append({"lattice": lattice, "skipped": str(exc)})
        payload["lattice_candidates"] = candidates
    payload["manifest"] = make_manifest("place", {
        "dim": dim, "n": len(masses), "mass": float(masses[0]),
        "restarts": args.restarts, "seed": args.seed, "tol": args.tol},
        params, time.perf_counter() - t0)
    _emit(dumps17(payload) + "\n", args.out)
    return 0


# ---------------------------------------------------------------------------
# parser / dispatch
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> _Parser:
    p = _Parser(prog="oklim", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("green", help="evaluate the periodic Green's function")
    g.add_argument("--dim", type=int, choices=(2, 3), required=True)
    g.add_argument("--x", required=True, help="comma-separated coordinates")
    g.add_argument("--grad", action="store_true")
    g.add_argument("--regular", action="store_true")
    g.set_defaults(func=cmd_green)

    l = sub.add_parser("local", help="per-particle local energies")
    l.add_argument("--dim", type=int, choices=(2, 3), required=True)
    l.add_argument("--mass", type=float, required=True)
    l.add_argument("--partition", action="store_true")
    l.add_argument("--concavity", action="store_true")
    l.add_argument("--splitting", action="store_true")
    l.add_argument("--threshold", action="store_true")
    l.set_defaults(func=cmd_local)

    e = sub.add_parser("energy", help="limit or finite-scale energies of a configuration")
    e.add_argument("--config", required=True)
    e.add_argument("--eta", type=float)
    e.add_argument("--pair-convention", choices=("ordered", "halved"), default="ordered")
    e.add_argument("--out")
    e.set_defaults(func=cmd_energy)

    x = sub.add_parser("expand", help="eta-sweep of second-order quotients")
    x.add_argument("--config", required=True)
    x.add_argument("--etas", required=True)
    x.add_argument("--richardson", action="store_true")
    x.add_argument("--out")
    x.set_defaults(func=cmd_expand)

    pl = sub.add_parser("place", help="optimize particle positions")
    pl.add_argument("--dim", type=int, choices=(2, 3), default=2)
    pl.add_argument("--n", type=int)
    pl.add_argument("--mass", type=float)
    pl.add_argument("--restarts", type=int, default=10)
    pl.add_argument("--seed", type=int, default=0)
    pl.add_argument("--tol", type=float, default=1e-8)
    pl.add_argument("--config")
    pl.add_argument("--from-config", action="store_true")
    pl.add_argument("--lattice-compare", action="store_true")
    pl.add_argument("--out")
    pl.set_defaults(func=cmd_place)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SingularPoint as exc:
        sys.stderr.write(f"singular point: {exc}\n")
        return EXIT_SINGULAR
    except (CoincidentPoints, OverlappingBalls, DiameterTooLarge) as exc:
        sys.stderr.write(f"physical validation: {exc}\n")
        return EXIT_PHYSICAL
    except (UnequalMasses2D, InadmissibleConfiguration) as exc:
        sys.stderr.write(f"not an admissible limit configuration: {exc}\n")
        return EXIT_ADMISSIBILITY
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
