"""Command-line entry point.

Every subcommand takes ``--config PATH``, ``--out DIR`` and repeatable
``--override key.path=value``.  Exit status is 0 on success, 1 on a
validation error and 2 on a runtime or solver failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, initial_field, load_config, transform_element
from .convergence import fit_to_ground_state, sequential_convergence_experiment
from .diagnostics import DiagnosticRecord, virial_check
from .errors import ConfigurationError, NLSError, SnapshotError
from .evolve import Termination, estimate_blowup, run_evolution
from .groundstate import pohozaev_report, solve_ground_state
from .io import KIND_GROUND_STATE, read_diagnostics, write_diagnostics, write_snapshot
from .morawetz import build_weights, derivative_check
from .symmetry import apply_group, galilean_boost, inverse, pseudoconformal

log = logging.getLogger("nlslab")

COMMANDS = ("ground-state", "evolve", "transform", "morawetz-check", "virial-check", "fit",
            "converge-demo")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="nlslab", description="Mass-critical NLS experiments")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, default=None)
        p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
        if name == "evolve":
            p.add_argument("--resume", action="store_true",
                           help="continue from the last snapshot in the output directory")
        if name == "morawetz-check":
            p.add_argument("--delta", type=float, default=0.01)
            p.add_argument("--levels", type=int, default=3)
    return ap


def _json(path: Path, data: dict):
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _ground_state(cfg: RunConfig):
    return solve_ground_state(cfg.grid, tol=cfg.gs_tol, seed=cfg.gs_seed)


def _needs_q(cfg: RunConfig) -> bool:
    return cfg.preset_file is None and cfg.preset != "gaussian"


def cmd_ground_state(cfg: RunConfig, out: Path, args) -> int:
    q = _ground_state(cfg)
    write_snapshot(q.field, out / "ground_state.nls", kind=KIND_GROUND_STATE)
    rep = pohozaev_report(q)
    _json(out / "ground_state.json", {
        "dimension": cfg.dimension, "n": cfg.n, "L": cfg.L,
        "residual": q.residual, "mass": q.mass, "grad_sq": q.grad_sq, "energy": q.energy,
        "grad_ratio": rep.grad_ratio, "peak": q.peak,
    })
    print(f"ground state: mass={q.mass:.12g} residual={q.residual:.3e} "
          f"grad_ratio={rep.grad_ratio:.12g}")
    return 0


def _snapshot_name(i: int) -> str:
    return f"snap_{i:05d}.nls"


def cmd_evolve(cfg: RunConfig, out: Path, args) -> int:
    from .io import read_snapshot

    q = _ground_state(cfg) if _needs_q(cfg) else None
    csv_path = out / "diagnostics.csv"
    first = 0
    if args.resume:
        snaps = sorted(out.glob("snap_*.nls"))
        if not snaps or not csv_path.exists():
            raise ConfigurationError(f"--resume: no previous run in {out}")
        u0 = read_snapshot(snaps[-1])
        first = len(snaps)
        prior = read_diagnostics(csv_path)
        if prior and prior[-1].t > u0.t:
            raise ConfigurationError("--resume: diagnostics extend beyond the last snapshot")
    else:
        u0 = initial_field(cfg, q)
    traj = run_evolution(u0, cfg.evolution, q=q)
    # on resume the first record duplicates the splice point
    skip = 1 if args.resume else 0
    for i, s in enumerate(traj.snapshots[skip:]):
        write_snapshot(s, out / _snapshot_name(first + i))
    write_diagnostics(traj.records[skip:], csv_path, d=cfg.dimension, append=args.resume)
    summary = {"termination": traj.termination.value, "steps": traj.steps,
               "t_final": traj.times[-1], "records": len(traj.records)}
    if traj.termination is Termination.BLOWUP and len(traj.records) >= 20:
        rep = estimate_blowup(traj, cfg.dimension)
        summary["blowup"] = {k: float(v) for k, v in rep._asdict().items()}
    _json(out / "evolve.json", summary)
    print(f"evolve: {traj.termination.value} at t={traj.times[-1]:.6g} after {traj.steps} steps")
    return 0


def cmd_transform(cfg: RunConfig, out: Path, args) -> int:
    f = initial_field(cfg)
    tr = cfg.transform
    kind = tr["kind"]
    if kind == "group":
        g = apply_group(transform_element(cfg), f)
    elif kind == "inverse_group":
        g = apply_group(inverse(transform_element(cfg)), f)
    elif kind == "boost":
        g = galilean_boost(f, tr["boost"], f.t)
    else:
        g = pseudoconformal(f, tr["t"])
    write_snapshot(g, out / "transformed.nls")
    print(f"transform: {kind} written")
    return 0


def cmd_morawetz_check(cfg: RunConfig, out: Path, args) -> int:
    q = _ground_state(cfg) if _needs_q(cfg) else None
    u0 = initial_field(cfg, q)
    R = cfg.morawetz_R if cfg.morawetz_R is not None else cfg.L / 8
    w = build_weights(R, cfg.grid)
    rows = []
    delta = args.delta
    for _ in range(args.levels):
        c = derivative_check(u0, w, cfg.mu, delta)
        rows.append([delta, c.finite_difference, c.rhs.total, c.rhs.gradient, c.rhs.momentum,
                     c.rhs.mass, c.rhs.nonlinear, c.rhs.angular, c.relative_error])
        delta /= 2
    header = ["delta", "finite_difference", "rhs", "gradient", "momentum", "mass",
              "nonlinear", "angular", "relative_error"]
    with (out / "morawetz_terms.csv").open("w") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join("%.17g" % v for v in r) + "\n")
    for r in rows:
        print(f"delta={r[0]:.4g} relative error {r[-1]:.3e}")
    return 0


def cmd_virial_check(cfg: RunConfig, out: Path, args) -> int:
    q = _ground_state(cfg) if _needs_q(cfg) else None
    u0 = initial_field(cfg, q)
    ev = cfg.evolution
    if ev.record_dt is None:
        ev.record_dt = (ev.t_end - u0.t) / 10
    traj = run_evolution(u0, ev)
    write_diagnostics(traj.records, out / "diagnostics.csv", d=cfg.dimension)
    rep = virial_check(traj)
    _json(out / "virial.json", {"max_rel_error": rep.max_rel_error, "target": rep.target,
                                "second_differences": rep.second_differences.tolist()})
    print(f"virial: max relative error {rep.max_rel_error:.3e} against 16E = {rep.target:.6g}")
    return 0


def _fit_record(f, fit, mu) -> DiagnosticRecord:
    from .diagnostics import conserved_quantities, grad_sq, variance
    from .grid import lp_norm

    cq = conserved_quantities(f, mu)
    g = fit.g
    return DiagnosticRecord(t=f.t, mass=cq.mass, energy=cq.energy, momentum=tuple(cq.momentum),
                            variance=variance(f, tail_tol=np.inf), grad_sq=grad_sq(f),
                            linf=lp_norm(f, np.inf), lam=g.lam, x_center=g.x0, xi=g.xi0,
                            gamma=g.gamma0, fit_distance=fit.distance)


def cmd_fit(cfg: RunConfig, out: Path, args) -> int:
    q = _ground_state(cfg)
    f = initial_field(cfg, q)
    fit = fit_to_ground_state(f, q)
    write_diagnostics([_fit_record(f, fit, cfg.mu)], out / "diagnostics.csv", d=cfg.dimension)
    _json(out / "fit.json", {"distance": fit.distance, "iterations": fit.iterations,
                             "converged": fit.converged, "g": fit.g.as_array().tolist()})
    print(f"fit: distance {fit.distance:.6e} ({'converged' if fit.converged else 'not converged'})")
    return 0


def cmd_converge_demo(cfg: RunConfig, out: Path, args) -> int:
    q = _ground_state(cfg)
    u0 = initial_field(cfg, q)
    times = cfg.sample_times or tuple(np.linspace(0.0, cfg.evolution.t_end, 6))
    prof = sequential_convergence_experiment(u0, cfg.evolution, q, times)
    d = cfg.dimension
    header = (["t", "distance", "running_infimum", "lam"] + [f"x0_{a}" for a in range(d)]
              + [f"xi0_{a}" for a in range(d)] + ["gamma0", "iterations", "converged"])
    with (out / "convergence.csv").open("w") as fh:
        fh.write(",".join(header) + "\n")
        for t, fit, inf in zip(prof.times, prof.fits, prof.running_infimum):
            cells = [t, fit.distance, inf] + list(fit.g.as_array())
            fh.write(",".join("%.17g" % v for v in cells)
                     + f",{fit.iterations},{int(fit.converged)}\n")
    print(f"converge-demo: {len(prof.fits)} fits, final running infimum "
          f"{prof.running_infimum[-1]:.6e}" if prof.fits else "converge-demo: no samples")
    return 0


HANDLERS = {
    "ground-state": cmd_ground_state,
    "evolve": cmd_evolve,
    "transform": cmd_transform,
    "morawetz-check": cmd_morawetz_check,
    "virial-check": cmd_virial_check,
    "fit": cmd_fit,
    "converge-demo": cmd_converge_demo,
}


def dispatch(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        ap.print_usage(sys.stderr)
        return 1
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.override)
        out = args.out if args.out is not None else cfg.output_dir
        out.mkdir(parents=True, exist_ok=True)
    except (ConfigurationError, OSError) as exc:
        print(f"nlslab: configuration error: {exc}", file=sys.stderr)
        return 1
    try:
        return HANDLERS[args.command](cfg, out, args)
    except (ConfigurationError, ValueError) as exc:
        print(f"nlslab: validation error: {exc}", file=sys.stderr)
        return 1
    except (NLSError, SnapshotError, OSError, RuntimeError) as exc:
        print(f"nlslab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
