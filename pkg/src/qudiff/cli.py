"""Command-line interface.

Commands:
    qudiff validate  --scenario fig1 | --config run.toml
    qudiff simulate  --scenario fig1 [--zero-offdiag-D] [--sweep p=v1,v2]
    qudiff tunnel    --scenario fig10 [--sweep lambda_22=0.6,5.0] [--grid 101]
    qudiff scenarios list

Outputs are UTF-8 CSV files with a header row plus one JSON summary
per run. Every float is written with repr, so parsing a file and
re-emitting it reproduces it byte for byte, and re-running a command
with the same inputs is bit-identical (no randomness anywhere).
Exit codes: 0 success, 1 input/IO error, 2 validation failure,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .config import ScenarioConfig, load_config, sweep_members
from .dynamics import (drift_matrix, propagate_covariance, propagate_mean,
                       stability, steady_covariance, trajectory, MomentState)
from .errors import ConfigError, NumericalError, ValidationFailure
from .gaussian import (correlation_coefficient, gibbs_targets, penetration_probability,
                       position_density, uncertainty_products)
from .model import (CheckResult, DissipationParams, SystemParams, ValidationReport,
                    validate_dissipation, validate_hamiltonian)
from .scenarios import get_scenario, list_scenarios
from .transport import algebraic_residuals, diffusion_matrix, einstein_deviation, \
    fundamental_constraints
from .units import unit_convert

__all__ = ["main", "run_validate", "run_simulate", "run_tunnel"]

_RESIDUAL_TOL = 1e-10


def _fmt(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise NumericalError("non-finite value reached the output layer")
    return repr(x)


def _state_labels(n: int) -> list[str]:
    out = []
    for k in range(n):
        out += [f"q{k + 1}", f"p{k + 1}"]
    return out


def trajectory_columns(n: int) -> list[str]:
    """CSV schema: time, means, covariance upper triangle, derived columns."""
    labels = _state_labels(n)
    cols = ["t_seconds"]
    cols += [f"mean_{s}" for s in labels]
    for i in range(2 * n):
        for j in range(i, 2 * n):
            cols.append(f"sigma_{labels[i]}{labels[j]}")
    cols += [f"uncert_{k + 1}" for k in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            cols.append(f"chi_{i + 1}{j + 1}")
    return cols


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    print(f"wrote {path}")


def _write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2, allow_nan=False)
        fh.write("\n")
    print(f"wrote {path}")


def _full_report(system: SystemParams, d: DissipationParams) -> ValidationReport:
    """The validation gate: parameter checks, constraints, stability, residuals."""
    report = validate_hamiltonian(system).merged(validate_dissipation(system, d))
    diff = diffusion_matrix(system, d)
    report = report.merged(fundamental_constraints(diff, d))

    stab = stability(drift_matrix(system, d))
    max_re = float(np.max(stab.spectrum.real))
    if stab.is_stable:
        row = CheckResult("drift_stable", True, max_re, 0.0)
    elif system.barrier_modes:
        row = CheckResult("drift_stable", True, max_re, 0.0,
                          "unstable as expected: barrier modes present")
    else:
        row = CheckResult("drift_stable", False, max_re, 0.0)
    residuals = algebraic_residuals(system, d, diff)
    rows = (row, CheckResult("stationarity_residuals",
                             residuals.max_scaled <= _RESIDUAL_TOL,
                             residuals.max_scaled, _RESIDUAL_TOL))
    return report.merged(ValidationReport(rows))


def run_validate(cfg: ScenarioConfig) -> int:
    """Validate every member the config describes; 0 iff all pass."""
    ok = True
    for tag, system, d in sweep_members(cfg):
        if tag is not None:
            print(f"# member {tag}")
        report = _full_report(system, d)
        for line in report.lines():
            print(line)
        ok = ok and report.verdict
    print(f"VERDICT: {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 2


def _gate(system: SystemParams, d: DissipationParams, force: bool, tag) -> None:
    report = _full_report(system, d)
    if report.verdict:
        return
    if force:
        print("validation failed; continuing because --force was given")
        return
    for line in report.lines():
        print(line)
    member = "" if tag is None else f" (member {tag})"
    raise ValidationFailure(f"validation failed{member}; rerun with --force to override")


def _member_base(cfg: ScenarioConfig, tag) -> str:
    return cfg.name if tag is None else f"{cfg.name}_{tag}"


def _trajectory_rows(traj, n: int):
    hbar_t = [unit_convert(t, "seconds", to="physical") for t in traj.times]
    for i in range(len(traj)):
        row = [hbar_t[i]]
        row += list(traj.means[i])
        cov = traj.covs[i]
        for a in range(2 * n):
            for b in range(a, 2 * n):
                row.append(cov[a, b])
        state = traj.state(i)
        row += list(uncertainty_products(state))
        for a in range(n):
            for b in range(a + 1, n):
                row.append(correlation_coefficient(state, a, b))
        yield row


def _summary(cfg: ScenarioConfig, system, d, traj, tag, extra=None) -> dict:
    n = system.n_modes
    stable = bool(traj.meta["stable"])
    out = {
        "scenario": cfg.name,
        "member": tag,
        "sweep_param": cfg.sweep_param,
        "n_modes": n,
        "params_hash": traj.meta["params_hash"],
        "off_diagonal_d": traj.meta["off_diagonal_d"],
        "method": traj.meta["method"],
        "stable": stable,
        "spectrum": traj.meta["spectrum"],
        "t_end_seconds": cfg.t_end_seconds,
        "grid_points": cfg.grid_points,
    }
    if stable:
        m = drift_matrix(system, d)
        dmat = diffusion_matrix(system, d).matrix
        if traj.meta["off_diagonal_d"] == "zeroed":
            dmat = np.diag(np.diag(dmat))
        sigma_tilde = steady_covariance(m, dmat)
        out["sigma_tilde"] = [[float(v) for v in row] for row in sigma_tilde]
    else:
        out["sigma_tilde"] = None
    if system.barrier_modes:
        out["gibbs"] = None
    else:
        g_qq, g_pp = gibbs_targets(system, d)
        gibbs = {}
        for k in range(n):
            gibbs[f"sigma_q{k + 1}q{k + 1}"] = float(g_qq[k])
            gibbs[f"sigma_p{k + 1}p{k + 1}"] = float(g_pp[k])
        out["gibbs"] = gibbs
    viol = 0.0
    for i in range(len(traj)):
        u = uncertainty_products(traj.state(i))
        viol = max(viol, float(np.max(0.25 - u)))
    out["max_uncertainty_violation"] = max(0.0, viol)
    ein = einstein_deviation(system, d)
    out["einstein"] = {"mode": list(ein.mode),
                       "pair": [list(row) for row in ein.pair]}
    if extra:
        out.update(extra)
    return out


def run_simulate(cfg: ScenarioConfig, out_dir: str, *, zero_offdiag: bool = False,
                 force: bool = False) -> int:
    """Propagate each member and write trajectory CSV plus summary JSON."""
    os.makedirs(out_dir, exist_ok=True)
    n = cfg.system.n_modes
    grid = cfg.time_grid_internal()
    mode = "zeroed" if zero_offdiag else "full"
    for tag, system, d in sweep_members(cfg):
        _gate(system, d, force, tag)
        traj = trajectory(system, d, cfg.initial, grid, off_diagonal_d=mode)
        base = _member_base(cfg, tag)
        csv_path = os.path.join(out_dir, base + ".csv")
        _write_csv(csv_path, trajectory_columns(n), _trajectory_rows(traj, n))
        summary = _summary(cfg, system, d, traj, tag,
                           extra={"command": "simulate", "csv": base + ".csv"})
        _write_json(os.path.join(out_dir, base + "_summary.json"), summary)
    return 0


def _density_frames(cfg: ScenarioConfig, system, d, base: str, out_dir: str,
                    density_points: int) -> tuple[list[str], list[float]]:
    """Exact-state density grids at the requested times, one CSV per frame."""
    if not cfg.density_times_seconds:
        return [], []
    m = drift_matrix(system, d)
    dmat = diffusion_matrix(system, d)
    frames = []
    for t_s in cfg.density_times_seconds:
        t = unit_convert(t_s, "seconds")
        mean = propagate_mean(m, cfg.initial.mean, t)
        cov = propagate_covariance(m, dmat, cfg.initial.cov, t)
        frames.append(MomentState(mean=mean, cov=cov))
    # One common window covering every frame at 4.5 sigma.
    lo = [math.inf, math.inf]
    hi = [-math.inf, -math.inf]
    for st in frames:
        for ax, qi in enumerate((0, 2)):
            half = 4.5 * math.sqrt(st.cov[qi, qi])
            lo[ax] = min(lo[ax], st.mean[qi] - half)
            hi[ax] = max(hi[ax], st.mean[qi] + half)
    q1 = np.linspace(lo[0], hi[0], density_points)
    q2 = np.linspace(lo[1], hi[1], density_points)
    pts = np.empty((density_points, density_points, 2))
    pts[:, :, 0] = q1[:, None]
    pts[:, :, 1] = q2[None, :]
    files = []
    for idx, st in enumerate(frames):
        rho = position_density(st, (0, 1), pts)
        name = f"{base}_density_f{idx}.csv"
        rows = ([q1[i], q2[j], rho[i, j]]
                for i in range(density_points) for j in range(density_points))
        _write_csv(os.path.join(out_dir, name), ["q1", "q2", "rho"], rows)
        files.append(name)
    return files, list(cfg.density_times_seconds)


def run_tunnel(cfg: ScenarioConfig, out_dir: str, *, zero_offdiag: bool = False,
               force: bool = False, density_points: int | None = None) -> int:
    """Penetration probability of the first barrier mode, plus density frames."""
    if not cfg.system.barrier_modes:
        raise ValidationFailure(
            "tunnel requires at least one inverted barrier mode")
    os.makedirs(out_dir, exist_ok=True)
    barrier_mode = cfg.system.barrier_modes[0]
    npts = density_points if density_points is not None else cfg.density_points
    grid = cfg.time_grid_internal()
    mode = "zeroed" if zero_offdiag else "full"
    for tag, system, d in sweep_members(cfg):
        _gate(system, d, force, tag)
        traj = trajectory(system, d, cfg.initial, grid, off_diagonal_d=mode)
        base = _member_base(cfg, tag)
        p_of_t = [penetration_probability(traj.state(i), barrier_mode)
                  for i in range(len(traj))]
        rows = ([unit_convert(t, "seconds", to="physical"), p]
                for t, p in zip(traj.times, p_of_t))
        _write_csv(os.path.join(out_dir, base + ".csv"), ["t_seconds", "P"], rows)
        files, times_s = _density_frames(cfg, system, d, base, out_dir, npts)
        summary = _summary(cfg, system, d, traj, tag, extra={
            "command": "tunnel",
            "csv": base + ".csv",
            "barrier_mode": barrier_mode + 1,
            "P0": p_of_t[0],
            "P_final": p_of_t[-1],
            "density_frames": files,
            "frame_times_seconds": times_s,
        })
        _write_json(os.path.join(out_dir, base + "_summary.json"), summary)
    return 0


def _resolve_config(args) -> ScenarioConfig:
    if getattr(args, "scenario", None) and getattr(args, "config", None):
        raise ConfigError("give either --scenario or --config, not both")
    if getattr(args, "scenario", None):
        cfg = get_scenario(args.scenario)
    elif getattr(args, "config", None):
        cfg = load_config(args.config)
    else:
        raise ConfigError("one of --scenario or --config is required")
    if getattr(args, "sweep", None):
        spec = args.sweep
        if "=" not in spec:
            raise ConfigError("--sweep expects param=v1,v2,...")
        param, _, rest = spec.partition("=")
        try:
            values = tuple(float(v) for v in rest.split(","))
        except ValueError:
            raise ConfigError(f"--sweep values must be numbers, got {rest!r}") from None
        if not values:
            raise ConfigError("--sweep needs at least one value")
        cfg = ScenarioConfig(
            name=cfg.name, system=cfg.system, dissipation=cfg.dissipation,
            initial=cfg.initial, t_end_seconds=cfg.t_end_seconds,
            grid_points=cfg.grid_points, sweep_param=param.strip(),
            sweep_values=values,
            density_times_seconds=cfg.density_times_seconds,
            density_points=cfg.density_points, description=cfg.description)
    return cfg


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qudiff",
        description="Gaussian moment dynamics of coupled dissipative oscillators")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, output=True):
        p.add_argument("--config", help="TOML scenario file")
        p.add_argument("--scenario", help="built-in scenario name")
        p.add_argument("--sweep", metavar="PARAM=V1,V2,...",
                       help="override the sweep with explicit values")
        if output:
            p.add_argument("--out", default="out", help="output directory")
            p.add_argument("--zero-offdiag-D", action="store_true",
                           dest="zero_offdiag",
                           help="suppress off-diagonal diffusion entries")
            p.add_argument("--force", action="store_true",
                           help="run even if validation fails")
            p.add_argument("--grid", type=int, default=None,
                           help="density grid points per axis")

    add_common(sub.add_parser("validate", help="run the validation gate"),
               output=False)
    add_common(sub.add_parser("simulate", help="propagate moments, write CSV"))
    add_common(sub.add_parser("tunnel", help="penetration probability run"))
    scen = sub.add_parser("scenarios", help="inspect built-in scenarios")
    scen.add_argument("action", choices=["list"])
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help; remap usage errors onto input errors.
        return 0 if exc.code == 0 else 1
    try:
        if args.command == "scenarios":
            for name, desc in list_scenarios():
                print(f"{name}: {desc}")
            return 0
        cfg = _resolve_config(args)
        if args.command == "validate":
            return run_validate(cfg)
        if args.command == "simulate":
            return run_simulate(cfg, args.out, zero_offdiag=args.zero_offdiag,
                                force=args.force)
        return run_tunnel(cfg, args.out, zero_offdiag=args.zero_offdiag,
                          force=args.force, density_points=args.grid)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValidationFailure as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
