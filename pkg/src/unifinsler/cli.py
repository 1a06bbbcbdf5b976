"""``unifinsler <subcommand> [--seed N] [--out DIR] [--config FILE.json]``.

Subcommands: scan, center, rigidity, flow, experiment. Without ``--config``
each subcommand runs a seeded random instance, so every command is usable
as a demo. Scans report their verdict but always exit 0 when they run.
Other exit statuses: 1 when an experiment fails, the solver stalls, no
rigidity certificate exists or a module error is raised; 2 for bad input.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .center import CenterProblem, select_radius, solve_center
from .convexity import (counterexample_flow, scan_dinf_convexity, scan_dp_convexity,
                        scan_strong_convexity_d2, scan_theta_extremes)
from .errors import ConfigError, MatrixFormatError, RadiusTooLarge, UnifinslerError
from .experiments import EXPERIMENT_IDS, RunConfig, run_experiment
from .io import dump_json, flow_csv, load_json, matrix_from_json, matrix_to_json
from .linalg import as_convention
from .metric import Geodesic, default_grid, geodesic_between, spectral_flow
from .rigidity import (FiniteGroupAction, find_fixed_point, find_intertwiner,
                       find_invariant_projection, orbit)
from .sampling import random_in_ball, random_skew, random_unitary, rng_from
from .subspaces import FullGroup, subspace_from_config

log = logging.getLogger("unifinsler")


def _matrix(cfg, key, default=None):
    if key not in cfg:
        if default is None:
            raise ConfigError(f"config needs {key!r}")
        return default
    return matrix_from_json(cfg[key])


def _grid(cfg, start=0.0, stop=1.0, num=201):
    g = cfg.get("grid", {})
    if isinstance(g, list):
        return np.asarray(g, dtype=float)
    return default_grid(int(g.get("num", num)), float(g.get("start", start)),
                        float(g.get("stop", stop)))


def _write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


# --- subcommands ---------------------------------------------------------------------

def cmd_scan(cfg: dict, rng, out: Path) -> int:
    kind = cfg.get("kind", "dinf")
    n = int(cfg.get("n", 3))
    force = bool(cfg.get("force", False))
    conv = as_convention(cfg.get("conv", "standard"))
    if kind == "counterexample":
        rep = counterexample_flow(float(cfg.get("theta", 1.0)), _grid(cfg, -0.5, 0.5))
        report, extra = rep.report, {"fpp0_estimate": rep.fpp0_estimate, "cot_theta": rep.cot_theta,
                                     "max_abs_diff": rep.max_abs_diff}
    elif kind == "dinf":
        w = _matrix(cfg, "w", random_unitary(n, rng))
        r = float(cfg.get("radius", 1.4))
        u = _matrix(cfg, "u", random_in_ball(w, r, rng))
        v = _matrix(cfg, "v", random_in_ball(w, r, rng))
        report = scan_dinf_convexity(w, u, v, _grid(cfg), force=force, seed=rng)
        extra = {}
    elif kind in ("dp", "strong"):
        w = _matrix(cfg, "w", random_unitary(n, rng))
        r = float(cfg.get("radius", 1.0))
        if "x" in cfg:
            beta = Geodesic(_matrix(cfg, "u"), _matrix(cfg, "x"))
        else:
            beta = geodesic_between(random_in_ball(w, r, rng), random_in_ball(w, r, rng))
        if kind == "dp":
            report = scan_dp_convexity(w, beta, int(cfg.get("p", 2)), conv, _grid(cfg), force=force)
        else:
            report = scan_strong_convexity_d2(w, beta, r, conv, _grid(cfg), force=force)
        extra = {}
    elif kind == "theta":
        u = _matrix(cfg, "u", random_in_ball(np.eye(n, dtype=complex), 0.7, rng))
        x = _matrix(cfg, "x", random_skew(n, rng, norm=0.7))
        rmax, rmin = scan_theta_extremes(u, x, grid=_grid(cfg), force=force, seed=rng)
        _write_text(out / "scan_theta_min.csv", rmin.to_csv())
        report, extra = rmax, {"theta_min": rmin.to_json()}
    else:
        raise ConfigError(f"unknown scan kind {kind!r}")
    _write_text(out / "scan.csv", report.to_csv())
    dump_json({**report.to_json(), **extra, "kind": kind}, out / "scan.json")
    verdicts = [report.passed] + ([extra["theta_min"]["verdict"] == "pass"] if kind == "theta" else [])
    print(f"scan {kind}: {'pass' if all(verdicts) else 'fail'} "
          f"(min d2f {report.min_second_difference:.6g}, floor {report.floor:.6g})")
    return 0


def cmd_center(cfg: dict, rng, out: Path) -> int:
    conv = as_convention(cfg.get("conv", "standard"))
    space = subspace_from_config(cfg["subspace"]) if "subspace" in cfg else FullGroup()
    if "sites" in cfg:
        sites = [matrix_from_json(m) for m in cfg["sites"]]
    else:
        n = int(cfg.get("n", 3))
        w = random_unitary(n, rng)
        sites = [random_in_ball(w, 0.5, rng) for _ in range(int(cfg.get("k", 4)))]
    if "radius" in cfg:
        radius = float(cfg["radius"])
        start = _matrix(cfg, "start", sites[0])
    else:
        sel = select_radius(sites, space, conv)
        radius, start = sel.radius, _matrix(cfg, "start", sel.witness)
    problem = CenterProblem(sites, space, radius, conv, start,
                            int(cfg.get("max_iters", 100_000)), cfg.get("step_rule", "tangent_ball"),
                            float(cfg.get("stop_tol", 1e-9)))
    res = solve_center(problem)
    dump_json({**res.to_json(), "radius": radius, "subspace": space.to_config()}, out / "center.json")
    _write_text(out / "trace.csv", res.trace_csv())
    print(f"center: f_A = {res.value:.12g} after {res.iterations} steps, "
          f"gap bound {res.gap_bound if res.gap_bound is not None else 'n/a'}")
    return 1 if res.stalled else 0


def _action_from_config(cfg: dict) -> FiniteGroupAction:
    if "table" in cfg:
        return FiniteGroupAction(cfg.get("elements", [str(i) for i in range(len(cfg["table"]))]),
                                 cfg["table"], [matrix_from_json(m) for m in cfg["left"]],
                                 [matrix_from_json(m) for m in cfg["right"]])
    gens = cfg.get("generators")
    if not gens:
        raise ConfigError("action needs 'table' + 'left'/'right' or 'generators'")
    left = [matrix_from_json(m) for m in gens["left"]]
    right = [matrix_from_json(m) for m in gens["right"]] if "right" in gens else None
    return FiniteGroupAction.from_generators(left, right)


def _demo_rigidity(rng) -> dict:
    from .experiments import conjugated_action, cyclic_shift
    from .linalg import exp_skew
    action = conjugated_action([cyclic_shift(3)], exp_skew(random_skew(3, rng, norm=0.3)))
    return {"mode": "intertwiner", "table": action.table,
            "left": [matrix_to_json(m) for m in action.left],
            "right": [matrix_to_json(m) for m in action.right]}


def cmd_rigidity(cfg: dict, rng, out: Path) -> int:
    if not cfg:
        cfg = _demo_rigidity(rng)
    mode = cfg.get("mode", "intertwiner")
    result: dict = {"mode": mode}
    try:
        if mode == "intertwiner":
            action = _action_from_config(cfg)
            space = subspace_from_config(cfg["subspace"]) if "subspace" in cfg else None
            u0 = matrix_from_json(cfg["u0"]) if "u0" in cfg else None
            res = find_intertwiner(action, u0, space)
            result.update(g=matrix_to_json(res.g), residual=res.residual,
                          radius_bound=res.radius_bound, certificates=res.solve.to_json()["certificates"])
        elif mode == "fixed-point":
            action = _action_from_config(cfg)
            space = subspace_from_config(cfg["subspace"]) if "subspace" in cfg else None
            v = _matrix(cfg, "v")
            orb = orbit(action, v, space)
            res = find_fixed_point(action, v, space, cfg.get("radius"))
            result.update(point=matrix_to_json(res.point), displacement=res.displacement,
                          radius_bound=res.radius_bound, radius=res.radius, orbit_size=len(orb.points),
                          certificates=res.solve.to_json()["certificates"])
        elif mode == "invariant-subspace":
            gens = [matrix_from_json(m) for m in cfg["generators"]]
            res = find_invariant_projection(gens, int(cfg["rank"]), _matrix(cfg, "p0"))
            result.update(q=matrix_to_json(res.q), commutator=res.commutator,
                          radius_bound=res.radius_bound, orbit_size=res.orbit_size,
                          certificates=res.solve.to_json()["certificates"])
        else:
            raise ConfigError(f"unknown rigidity mode {mode!r}")
    except RadiusTooLarge as exc:
        result.update(status="radius_too_large", bound=exc.bound, cap=exc.cap,
                      witness=matrix_to_json(exc.witness))
        dump_json(result, out / "rigidity.json")
        print(f"rigidity {mode}: no certificate, radius bound {exc.bound:.6g} >= {exc.cap:.6g}")
        return 1
    except KeyError as exc:
        raise ConfigError(f"rigidity config is missing {exc}") from None
    result["status"] = "ok"
    dump_json(result, out / "rigidity.json")
    print(f"rigidity {mode}: ok")
    return 0


def cmd_flow(cfg: dict, rng, out: Path) -> int:
    if "u" in cfg or "x" in cfg:
        u, x = _matrix(cfg, "u"), _matrix(cfg, "x")
    else:
        n = int(cfg.get("n", 3))
        u, x = random_unitary(n, rng), random_skew(n, rng, norm=1.0)
    samples = spectral_flow(u, x, _grid(cfg))
    _write_text(out / "flow.csv", flow_csv(samples))
    print(f"flow: {len(samples)} samples, {sum(not s.branch_ok for s in samples)} branch-ambiguous")
    return 0


def cmd_experiment(args, cfg: dict) -> int:
    if args.id and cfg.get("experiment") not in (None, args.id):
        raise ConfigError("experiment id given twice with different values")
    rc = RunConfig.from_dict({**cfg, "experiment": args.id or cfg.get("experiment")},
                             seed=args.seed, out=args.out)
    return run_experiment(rc)


COMMANDS = {"scan": cmd_scan, "center": cmd_center, "rigidity": cmd_rigidity, "flow": cmd_flow}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="seed for every random draw (default 0)")
    common.add_argument("--out", type=Path, default=None, help="output directory (default ./results)")
    common.add_argument("--config", type=Path, default=None, help="JSON config file")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="unifinsler",
                                     description="Finsler geometry of unitary groups: scans, "
                                                 "circumcenters and rigidity solvers.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("scan", parents=[common], help="convexity scans along geodesics")
    sub.add_parser("center", parents=[common], help="circumcenter solve with certificates")
    sub.add_parser("rigidity", parents=[common], help="intertwiners, fixed points, invariant projections")
    sub.add_parser("flow", parents=[common], help="eigen-angle flow of u exp(t x) as CSV")
    exp = sub.add_parser("experiment", parents=[common], help="run one acceptance experiment")
    exp.add_argument("id", nargs="?", choices=EXPERIMENT_IDS, help="experiment id")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_json(args.config) if args.config else {}
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        if args.command == "experiment":
            return cmd_experiment(args, cfg)
        seed = args.seed if args.seed is not None else int(cfg.pop("seed", 0))
        out = args.out if args.out is not None else Path(cfg.pop("out", "results"))
        return COMMANDS[args.command](cfg, rng_from(seed), out)
    except (ConfigError, MatrixFormatError, OSError, json.JSONDecodeError) as exc:
        print(f"unifinsler: error: {exc}", file=sys.stderr)
        return 2
    except UnifinslerError as exc:
        print(f"unifinsler: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
