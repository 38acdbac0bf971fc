"""Command-line interface: target ingestion, solvers, analyses, artifacts.

Three subcommands:

* ``morph``: fit a chain's deployed shape to a target curve; writes
  design.json, shape.csv, overlay.svg.
* ``write``: fit the tip trajectory of an actuation sweep to a target
  curve, optionally grid-searching the section count; writes design.json,
  trajectory.csv, gridsearch.csv, collage.svg.
* ``analyze``: closure, sensitivity and perturbation studies; writes CSV
  tables and SVG plots.

Conventions shared by all commands: targets come from a file (CSV/JSON
point list) or an analytic family spec ``name:key=val,...``; every output
directory receives exactly one manifest.json describing the run; all
randomness flows from ``--seed``; JSON/CSV payloads are written atomically
(temp file + rename) and reproduce byte-identically when rerun with the
same manifest. The one exception is gridsearch.csv, which streams row by
row so an interrupted search still leaves a usable partial table.

Exit codes: 0 success, 2 invalid input, 3 solver returned an infeasible or
failed design, 130 interrupted.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import math
import os
import sys
import tempfile

from . import __version__, analysis, optimize, targets
from .autodiff import backend_name
from .errors import DomainError, InfeasibleAssemblyError
from .kinematics import ChainSpec, SectionedSpec, assemble_chain, sweep_tip
from .svg import Curve, Panel, render_svg

ANALYTIC_FAMILIES = ("line", "circle", "spiral", "sine", "flower3")


# ===== Small IO helpers =====


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _write_atomic(path: str, text: str) -> None:
    """Write a file atomically: full content appears or nothing does."""
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".",
                               prefix=os.path.basename(path) + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _csv_text(header, rows) -> str:
    out = [",".join(header)]
    for row in rows:
        out.append(",".join(repr(v) if isinstance(v, float) else str(v)
                            for v in row))
    return "\n".join(out) + "\n"


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        dt = datetime.datetime.fromtimestamp(int(epoch),
                                             datetime.timezone.utc)
    else:
        dt = datetime.datetime.now(datetime.timezone.utc)
    return dt.isoformat(timespec="seconds")


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(outdir: str, command: str, args_echo: dict,
                    inputs: dict, seed: int) -> None:
    manifest = {
        "command": command,
        "config": args_echo,
        "inputs": inputs,
        "seed": seed,
        "version": __version__,
        "backend": backend_name(),
        "timestamp": _timestamp(),
    }
    _write_atomic(os.path.join(outdir, "manifest.json"),
                  _json_text(manifest))


# ===== Flag parsing helpers =====


def _parse_floats(text: str, n: int, what: str) -> tuple:
    parts = text.split(",")
    if len(parts) != n:
        raise DomainError(f"{what} needs {n} comma-separated values, "
                          f"got {text!r}")
    return tuple(float(p) for p in parts)


def _parse_pair(text: str, what: str) -> tuple:
    parts = text.split(":")
    if len(parts) != 2:
        raise DomainError(f"{what} must look like max:min, got {text!r}")
    return float(parts[0]), float(parts[1])


def _parse_grid(text: str) -> list:
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise DomainError(f"--grid must look like lo:hi or lo:hi:step, "
                          f"got {text!r}")
    lo, hi = int(parts[0]), int(parts[1])
    step = int(parts[2]) if len(parts) == 3 else 1
    if step < 1 or hi < lo:
        raise DomainError(f"bad grid range {text!r}")
    return list(range(lo, hi + 1, step))


def _parse_int_list(text: str) -> list:
    if ":" in text:
        return _parse_grid(text)
    return [int(p) for p in text.split(",")]


def _parse_target_spec(spec: str) -> tuple:
    """Target curve plus manifest metadata from a file path or family spec."""
    if os.path.exists(spec):
        curve = targets.load_points(spec)
        return curve, {"file": spec, "sha256": _sha256(spec)}
    name, _, rest = spec.partition(":")
    if name in ANALYTIC_FAMILIES:
        params = {}
        if rest:
            for item in rest.split(","):
                key, eq, val = item.partition("=")
                if not eq:
                    raise DomainError(
                        f"bad target parameter {item!r} in {spec!r}")
                params[key.strip().lower()] = float(val)
        return targets.analytic_targets(name, params), {"analytic": spec}
    raise DomainError(
        f"target {spec!r} is neither a readable file nor one of the "
        f"analytic families {ANALYTIC_FAMILIES}")


def _profile_for(args, m: int) -> tuple:
    curve, meta = _parse_target_spec(args.target)
    if not args.no_normalize:
        curve = targets.normalize_bbox(curve)
    return targets.arclength_parameterize(curve, m), meta


def _optimizer_config(args, seed: int) -> optimize.OptimizerConfig:
    return optimize.OptimizerConfig(
        learning_rate=args.lr, max_iterations=args.iterations,
        tolerance=args.tolerance, patience=args.patience, seed=seed)


def _apply_config_file(args: argparse.Namespace) -> None:
    """Fill unset flags from the JSON config file; explicit flags win."""
    if not args.config:
        return
    with open(args.config, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise DomainError(f"config file {args.config} must hold an object")
    for key, value in data.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise DomainError(f"config file sets unknown option {key!r}")
        if getattr(args, attr) is None:
            setattr(args, attr, value)


def _resolve_defaults(args: argparse.Namespace, defaults: dict) -> None:
    for key, value in defaults.items():
        if getattr(args, key) is None:
            setattr(args, key, value)


# ===== morph =====


MORPH_DEFAULTS = {
    "units": 20, "restarts": 1, "seed": 0, "weights": "1.0,1.0,0.1",
    "bounds": "0.1,0.9", "iterations": 5000, "lr": 0.01,
    "tolerance": 1e-10, "patience": 100, "out": "scissor-morph",
}


def cmd_morph(args) -> int:
    _resolve_defaults(args, MORPH_DEFAULTS)
    n_units = int(args.units)
    if n_units < 2:
        raise DomainError(f"--units must be >= 2, got {args.units}")
    restarts = int(args.restarts)
    if restarts < 1:
        raise DomainError(f"--restarts must be >= 1, got {args.restarts}")
    weights = _parse_floats(str(args.weights), 3, "--weights")
    bounds = _parse_floats(str(args.bounds), 2, "--bounds")
    profile, target_meta = _profile_for(args, n_units)
    problem = optimize.MorphProblem(target=profile, n_units=n_units,
                                    weights=weights, bounds=bounds)

    outdir = args.out
    os.makedirs(outdir, exist_ok=True)
    echo = {"target": args.target, "units": n_units, "restarts": restarts,
            "weights": list(weights), "bounds": list(bounds),
            "iterations": int(args.iterations), "lr": float(args.lr),
            "tolerance": float(args.tolerance),
            "patience": int(args.patience),
            "normalize": not args.no_normalize}
    _write_manifest(outdir, "morph", echo, target_meta, int(args.seed))

    best = None
    for r in range(restarts):
        res = optimize.solve_morph(problem,
                                   _optimizer_config(args, int(args.seed) + r))
        if best is None or res.loss < best.loss:
            best = res

    design = {
        "kind": "morph",
        "alphas": [float(best.params[f"alpha_{j}"]) for j in range(n_units)],
        "l": float(best.params["l"]),
        "psi": float(best.params["psi"]),
        "beta0": float(best.params["beta0"]),
        "base_position": [profile.nodes[0][0], profile.nodes[0][1]],
        "loss": best.loss,
        "seed": best.seed,
        "iterations": best.iterations,
        "flags": list(best.flags),
    }
    _write_atomic(os.path.join(outdir, "design.json"), _json_text(design))

    # re-simulate from the serialized design so the CSV is exactly what a
    # reader of design.json would reproduce
    with open(os.path.join(outdir, "design.json"), encoding="utf-8") as fh:
        loaded = json.load(fh)
    infeasible = loaded["loss"] >= optimize.INFEASIBLE_PENALTY \
        or "no feasible iterate found" in best.flags
    if not infeasible:
        spec = ChainSpec(alphas=tuple(loaded["alphas"]), l=loaded["l"],
                         base_position=tuple(loaded["base_position"]),
                         base_angle=loaded["beta0"])
        cfg = assemble_chain(spec, loaded["psi"])
        rows = [(j, c[0], c[1]) for j, c in enumerate(cfg.centers)]
        _write_atomic(os.path.join(outdir, "shape.csv"),
                      _csv_text(("index", "x", "y"), rows))
        panel = Panel(title=f"morph: {args.target} (loss {best.loss:.4g})",
                      curves=(
                          Curve("target", profile.nodes,
                                closed=profile.closed),
                          Curve("deployed chain", tuple(cfg.centers)),
                      ))
        _write_atomic(os.path.join(outdir, "overlay.svg"),
                      render_svg([panel]))
    if infeasible:
        _err("morph solver returned an infeasible design; see design.json")
        return 3
    print(f"morph: loss {best.loss:.6g} (seed {best.seed}, "
          f"{best.iterations} iterations) -> {outdir}")
    return 0


# ===== write =====


WRITE_DEFAULTS = {
    "units": 8, "per_section": 1, "restarts": 1, "seed": 0,
    "weights": "0.01,1.0,10.0", "bounds": "0.1,0.9", "phi_min": 0.1,
    "psi_range": "3.0:0.3", "samples": 400, "stations": 100,
    "iterations": 5000, "lr": 0.01, "tolerance": 1e-10, "patience": 100,
    "out": "scissor-write",
}


def _write_problem(args, profile, sections: int) -> optimize.WriteProblem:
    weights = _parse_floats(str(args.weights), 3, "--weights")
    bounds = _parse_floats(str(args.bounds), 2, "--bounds")
    psi_max, psi_min = _parse_pair(str(args.psi_range), "--psi-range")
    return optimize.WriteProblem(
        target=profile, sections=sections,
        units_per_section=int(args.per_section), weights=weights,
        phi_min=float(args.phi_min), psi_range=(psi_max, psi_min),
        n_psi_samples=int(args.samples), bounds=bounds)


def _simulate_write(design: dict):
    spec = SectionedSpec(
        sections=tuple((design["units_per_section"], a)
                       for a in design["alphas"]),
        l=design["l"])
    return sweep_tip(spec, design["psi_max"], design["psi_min"],
                     design["n_psi_samples"])


def cmd_write(args) -> int:
    _resolve_defaults(args, WRITE_DEFAULTS)
    restarts = int(args.restarts)
    if restarts < 1:
        raise DomainError(f"--restarts must be >= 1, got {args.restarts}")
    m = int(args.stations)
    profile, target_meta = _profile_for(args, m)
    candidates = _parse_grid(args.grid) if args.grid else [int(args.units)]
    problem = _write_problem(args, profile, candidates[0])

    outdir = args.out
    os.makedirs(outdir, exist_ok=True)
    echo = {"target": args.target, "candidates": candidates,
            "per_section": int(args.per_section), "restarts": restarts,
            "weights": list(problem.weights),
            "bounds": list(problem.bounds),
            "phi_min": problem.phi_min,
            "psi_range": list(problem.psi_range),
            "samples": problem.n_psi_samples, "stations": m,
            "iterations": int(args.iterations), "lr": float(args.lr),
            "tolerance": float(args.tolerance),
            "patience": int(args.patience),
            "normalize": not args.no_normalize}
    _write_manifest(outdir, "write", echo, target_meta, int(args.seed))

    # gridsearch.csv streams: an interrupted search keeps its partial table
    grid_path = os.path.join(outdir, "gridsearch.csv")
    config = _optimizer_config(args, int(args.seed))
    with open(grid_path, "w", encoding="utf-8", newline="") as grid_fh:
        grid_fh.write("n_units,seed,loss\n")
        grid_fh.flush()

        def progress(row):
            n, seed, loss = row
            grid_fh.write(f"{n},{seed},{loss!r}\n")
            grid_fh.flush()

        result = optimize.grid_search(problem, candidates, restarts,
                                      config, progress=progress)

    best = result.best
    design = {
        "kind": "write",
        "alphas": [float(best.params[f"alpha_{j}"])
                   for j in range(result.best_n)],
        "l": float(best.params["l"]),
        "sections": result.best_n,
        "units_per_section": int(args.per_section),
        "psi_max": problem.psi_range[0],
        "psi_min": problem.psi_range[1],
        "n_psi_samples": problem.n_psi_samples,
        "loss": best.loss,
        "seed": best.seed,
        "iterations": best.iterations,
        "flags": list(best.flags),
    }
    if problem.optimize_range:
        design["psi_max"] = float(best.params["psi_max"])
        design["psi_min"] = float(best.params["psi_min"])
    _write_atomic(os.path.join(outdir, "design.json"), _json_text(design))

    infeasible = not math.isfinite(best.loss) \
        or best.loss >= optimize.INFEASIBLE_PENALTY
    if not infeasible:
        with open(os.path.join(outdir, "design.json"),
                  encoding="utf-8") as fh:
            loaded = json.load(fh)
        traj = _simulate_write(loaded)
        rows = [(psi, p[0], p[1])
                for psi, p in zip(traj.psi_grid, traj.points)]
        _write_atomic(os.path.join(outdir, "trajectory.csv"),
                      _csv_text(("psi", "x", "y"), rows))
        _write_collage(outdir, args, profile, result, restarts)
    if infeasible:
        _err("write solver found no feasible design; see gridsearch.csv")
        return 3
    print(f"write: best loss {best.loss:.6g} at {result.best_n} sections "
          f"(seed {best.seed}) -> {outdir}")
    return 0


def _write_collage(outdir, args, profile, result, restarts: int) -> None:
    """One panel per restart of the winning section count."""
    psi_max, psi_min = _parse_pair(str(args.psi_range), "--psi-range")
    best_total = result.best_n * int(args.per_section)
    panels = []
    for (n, seed, loss), run in zip(result.table, result.runs):
        if n != best_total:
            continue
        curves = [Curve("target", profile.nodes, closed=profile.closed,
                        dashed=True)]
        title = f"seed {seed}: loss {loss:.4g}"
        if math.isfinite(loss) and loss < optimize.INFEASIBLE_PENALTY:
            names = run.params.names
            design = {
                "alphas": [float(run.params[f"alpha_{j}"])
                           for j in range(result.best_n)],
                "l": float(run.params["l"]),
                "units_per_section": int(args.per_section),
                "psi_max": float(run.params["psi_max"])
                if "psi_max" in names else psi_max,
                "psi_min": float(run.params["psi_min"])
                if "psi_min" in names else psi_min,
                "n_psi_samples": int(args.samples),
            }
            try:
                traj = _simulate_write(design)
                pts = optimize.trajectory_stations(
                    traj.points, len(profile.nodes) - 1)
                aligned, _ = optimize.align_rigid(pts, profile.nodes)
                curves.append(Curve("trajectory (aligned)",
                                    tuple(map(tuple, aligned))))
            except (InfeasibleAssemblyError, DomainError):
                title += " (infeasible)"
        else:
            title += " (failed)"
        panels.append(Panel(title=title, curves=tuple(curves)))
        if len(panels) >= restarts:
            break
    _write_atomic(os.path.join(outdir, "collage.svg"),
                  render_svg(panels, ncols=5 if len(panels) > 4 else 0))


# ===== analyze =====


ANALYZE_DEFAULTS = {
    "seed": 0, "out": "scissor-analyze", "alpha": "0.6", "units": None,
    "epsilon": None, "samples": 1000, "psi": math.pi / 2,
    "alpha0": 0.52, "eps": 0.001,
}


def cmd_analyze(args) -> int:
    _resolve_defaults(args, ANALYZE_DEFAULTS)
    outdir = args.out
    os.makedirs(outdir, exist_ok=True)
    sub = args.study

    if sub == "closure":
        alphas = [float(a) for a in str(args.alpha).split(",")]
        units = _parse_int_list(args.units or "5:12")
        echo = {"study": sub, "alpha": alphas, "units": units}
        _write_manifest(outdir, "analyze", echo, {}, int(args.seed))
        rows = analysis.closure_experiment(alphas, units)
        table = [(r.alpha, r.n_units, r.theory, r.measured, r.closes)
                 for r in rows]
        _write_atomic(os.path.join(outdir, "closure.csv"),
                      _csv_text(("alpha", "n_units", "theory", "measured",
                                 "closes"), table))
        curves = []
        for a in alphas:
            pts = [(r.n_units, r.theory) for r in rows
                   if r.alpha == a and r.closes]
            if len(pts) >= 2:
                curves.append(Curve(f"theory a={a:g}", pts))
                curves.append(Curve(
                    f"measured a={a:g}",
                    [(r.n_units, r.measured) for r in rows
                     if r.alpha == a and r.closes], dashed=True))
        if curves:
            panel = Panel(title="closure actuation angle vs chain size",
                          curves=tuple(curves), equal_axes=False)
            _write_atomic(os.path.join(outdir, "closure.svg"),
                          render_svg([panel]))
        n_ok = sum(1 for r in rows if r.closes)
        print(f"analyze closure: {len(rows)} rows ({n_ok} close) -> {outdir}")
        return 0

    if sub == "sensitivity":
        units = _parse_int_list(args.units or "100,200,300")
        eps = float(args.epsilon if args.epsilon is not None else 0.01)
        echo = {"study": sub, "units": units, "epsilon": eps,
                "samples": int(args.samples), "psi": float(args.psi)}
        _write_manifest(outdir, "analyze", echo, {}, int(args.seed))
        profiles = [analysis.sensitivity_profile(
            n, eps, int(args.samples), float(args.psi), int(args.seed))
            for n in units]
        table = []
        curves = []
        for p in profiles:
            norm = p.normalized()
            for j, (st, sig) in enumerate(zip(p.stations, p.sigma)):
                table.append((p.n_units, j, st, sig, norm[j]))
            curves.append(Curve(
                f"N={p.n_units}",
                [(st, math.log10(nv)) for st, nv in zip(p.stations, norm)
                 if nv > 0.0]))
        _write_atomic(os.path.join(outdir, "sensitivity.csv"),
                      _csv_text(("n_units", "unit", "station", "sigma",
                                 "normalized_sigma"), table))
        panel = Panel(
            title="log10 normalized tip variance vs station j/N",
            curves=tuple(curves), equal_axes=False)
        _write_atomic(os.path.join(outdir, "sensitivity.svg"),
                      render_svg([panel]))
        print(f"analyze sensitivity: N in {units} -> {outdir}")
        return 0

    if sub == "perturbation":
        n = int(args.units or 30)
        echo = {"study": sub, "alpha0": float(args.alpha0),
                "eps": float(args.eps), "units": n, "psi": float(args.psi)}
        _write_manifest(outdir, "analyze", echo, {}, int(args.seed))
        worst, rows = analysis.perturbation_validation(
            float(args.alpha0), float(args.eps), n, float(args.psi))
        table = [(r.index, r.exact[0], r.exact[1], r.approximate[0],
                  r.approximate[1], r.error) for r in rows]
        _write_atomic(os.path.join(outdir, "perturbation.csv"),
                      _csv_text(("index", "exact_x", "exact_y", "approx_x",
                                 "approx_y", "error"), table))
        panel = Panel(
            title=f"perturbative vs exact (max error {worst:.3g})",
            curves=(Curve("exact", [r.exact for r in rows]),
                    Curve("perturbative", [r.approximate for r in rows],
                          dashed=True)))
        _write_atomic(os.path.join(outdir, "perturbation.svg"),
                      render_svg([panel]))
        print(f"analyze perturbation: max node error {worst:.6g} -> {outdir}")
        return 0

    raise DomainError(f"unknown analyze study {sub!r}")


# ===== Argument parser and entry point =====


def _add_common(p: argparse.ArgumentParser, with_target: bool) -> None:
    if with_target:
        p.add_argument("--target", required=True,
                       help="target file (CSV/JSON points) or analytic "
                            "spec name:key=val,... "
                            f"(families: {', '.join(ANALYTIC_FAMILIES)})")
        p.add_argument("--no-normalize", action="store_true",
                       help="keep target coordinates as given instead of "
                            "fitting them into the unit box")
    p.add_argument("--seed", type=int, default=None,
                   help="base seed; restart r uses seed + r (default 0)")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--config", default=None,
                   help="JSON file supplying defaults for any flag "
                        "(explicit flags win)")


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--weights", default=None,
                   help="three comma-separated loss weights")
    p.add_argument("--bounds", default=None,
                   help="aspect ratio bounds lo,hi (default 0.1,0.9)")
    p.add_argument("--iterations", type=int, default=None,
                   help="Adam iteration cap (default 5000)")
    p.add_argument("--lr", type=float, default=None,
                   help="Adam learning rate (default 0.01)")
    p.add_argument("--tolerance", type=float, default=None,
                   help="loss-improvement convergence tolerance")
    p.add_argument("--patience", type=int, default=None,
                   help="iterations without improvement before stopping")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scissor",
        description="Design and analyze planar scissor-linkage chains.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_morph = sub.add_parser(
        "morph", help="fit the deployed chain shape to a target curve")
    _add_common(p_morph, with_target=True)
    _add_solver_flags(p_morph)
    p_morph.add_argument("--units", type=int, default=None,
                         help="number of scissor units (default 20)")
    p_morph.add_argument("--restarts", type=int, default=None,
                         help="independent seeded runs, best kept")
    p_morph.set_defaults(func=cmd_morph)

    p_write = sub.add_parser(
        "write", help="fit the tip trajectory of an actuation sweep")
    _add_common(p_write, with_target=True)
    _add_solver_flags(p_write)
    p_write.add_argument("--units", type=int, default=None,
                         help="section count when --grid is absent "
                              "(default 8)")
    p_write.add_argument("--grid", default=None,
                         help="section-count grid lo:hi:step to search")
    p_write.add_argument("--per-section", dest="per_section", type=int,
                         default=None, help="units per section (default 1)")
    p_write.add_argument("--restarts", type=int, default=None,
                         help="seeded runs per grid cell (default 1)")
    p_write.add_argument("--psi-range", dest="psi_range", default=None,
                         help="actuation sweep max:min (default 3.0:0.3)")
    p_write.add_argument("--samples", type=int, default=None,
                         help="sweep sample count (default 400)")
    p_write.add_argument("--stations", type=int, default=None,
                         help="target resampling stations (default 100)")
    p_write.add_argument("--phi-min", dest="phi_min", type=float,
                         default=None,
                         help="steric minimum internal angle (default 0.1)")
    p_write.set_defaults(func=cmd_write)

    p_an = sub.add_parser("analyze", help="run a validation study")
    p_an.add_argument("study", choices=("closure", "sensitivity",
                                        "perturbation"))
    _add_common(p_an, with_target=False)
    p_an.add_argument("--alpha", default=None,
                      help="closure: comma-separated aspect ratios")
    p_an.add_argument("--units", default=None,
                      help="chain sizes: list 100,200,300 or range 5:12")
    p_an.add_argument("--epsilon", type=float, default=None,
                      help="sensitivity: perturbation half-width")
    p_an.add_argument("--samples", type=int, default=None,
                      help="sensitivity: samples per unit (default 1000)")
    p_an.add_argument("--psi", type=float, default=None,
                      help="actuation angle (default pi/2)")
    p_an.add_argument("--alpha0", type=float, default=None,
                      help="perturbation: base aspect ratio")
    p_an.add_argument("--eps", type=float, default=None,
                      help="perturbation: per-unit ratio increment")
    p_an.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags and 0 on --help; normalize the rest
        return 0 if not exc.code else 2
    try:
        _apply_config_file(args)
        return args.func(args)
    except KeyboardInterrupt:
        _err("interrupted")
        return 130
    except (DomainError, InfeasibleAssemblyError, OSError,
            ValueError, json.JSONDecodeError) as exc:
        _err(str(exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())
