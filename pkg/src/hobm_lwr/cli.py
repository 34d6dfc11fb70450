"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 dimension error, 4 infeasible
path, 5 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from hobm_lwr import io
from hobm_lwr.config import load_config
from hobm_lwr.coupling import CoupledSample, check_path_feasible, path_states, simulate_coupled
from hobm_lwr.doe import acceleration_limit_surface, fit_quadratic, ringdown_responder, run_experiments
from hobm_lwr.dynamics import JointState, Wrench, inverse_dynamics
from hobm_lwr.errors import (
    ConfigError,
    DimensionError,
    IntegrationError,
    RankDeficientError,
    SingularHOBMError,
    SingularLWRError,
    UnreachableError,
)
from hobm_lwr.kinematics import forward_kinematics
from hobm_lwr.oscillation import peak_force, settling_time, simulate_ringdown

EXIT_OK, EXIT_CONFIG, EXIT_DIMENSION, EXIT_INFEASIBLE, EXIT_NUMERIC = 0, 2, 3, 4, 5


class Infeasible(Exception):
    pass


def _parse_q(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise DimensionError(f"malformed joint list {text!r}; expected comma-separated numbers") from None


def _config(args, overrides=None):
    return load_config(getattr(args, "config", None), overrides)


def _fmt_vec(v) -> str:
    return " ".join(f"{x: .6f}" for x in v)


# --- fk -------------------------------------------------------------------------


def cmd_fk(args) -> int:
    cfg = _config(args, {"lwr": {"preset": args.preset}} if args.preset else None)
    model = cfg.lwr
    q = _parse_q(args.q)
    if q.size != model.dof:
        raise DimensionError(f"--q has {q.size} values, chain has {model.dof} joints")
    qr = np.array([math.radians(v) if r.revolute else v for v, r in zip(q, model.chain.rows)])
    frames = forward_kinematics(model.chain, qr)
    ee = frames[-1]
    rpy = _rpy(ee.rotation)
    print(f"position_m: {_fmt_vec(ee.translation)}")
    print(f"rpy_deg:    {_fmt_vec(np.degrees(rpy))}")
    print("rotation:")
    for row in ee.rotation:
        print(f"  {_fmt_vec(row)}")
    if args.frames:
        header = ["frame", "x_m", "y_m", "z_m"] + [f"r{i}{j}" for i in range(3) for j in range(3)]
        rows = [[str(i + 1), *T.translation, *T.rotation.ravel()] for i, T in enumerate(frames)]
        io.write_rows(args.frames, header, rows)
    return EXIT_OK


def _rpy(R: np.ndarray) -> np.ndarray:
    """Z-Y-X roll/pitch/yaw of a rotation matrix."""
    pitch = math.atan2(-R[2, 0], math.hypot(R[0, 0], R[1, 0]))
    roll = math.atan2(R[2, 1], R[2, 2])
    yaw = math.atan2(R[1, 0], R[0, 0])
    return np.array([roll, pitch, yaw])


# --- torques ----------------------------------------------------------------------


def _lwr_only(sysm, profile, fixed, dt, joint):
    out = []
    for t in profile.sample_times(dt):
        th, thd, thdd = path_states(profile, fixed, t, joint)
        tau = inverse_dynamics(sysm.lwr, JointState(th, thd, thdd))
        out.append(CoupledSample(float(t), JointState(th, thd, thdd), JointState.at_rest([0.0]), Wrench(), tau, tau.copy()))
    return out


def cmd_torques(args) -> int:
    overrides = {"trajectory": {"dt_s": args.dt}} if args.dt is not None else None
    cfg = _config(args, overrides)
    sysm = cfg.system()
    profile = cfg.profile()
    fixed = cfg.fixed_joints()
    dt = cfg.dt
    joint = cfg.joint_index
    if args.no_hobm:
        samples = _lwr_only(sysm, profile, fixed, dt, joint)
    else:
        report = check_path_feasible(sysm, profile, fixed, dt, joint)
        if not report.feasible:
            for v in report.violations[: args.max_report]:
                print(f"infeasible: t={v.t:.6g} s {v.robot} {v.kind} measure={v.measure:.3e}", file=sys.stderr)
            if len(report.violations) > args.max_report:
                print(f"... {len(report.violations) - args.max_report} more", file=sys.stderr)
            raise Infeasible(f"{len(report.violations)} infeasible samples")
        samples = simulate_coupled(sysm, profile, fixed, dt, joint)
    io.write_torques(args.out, samples, joint)
    lm = np.array([s.tau_lm for s in samples])
    tot = np.array([s.tau_total for s in samples])
    peak_lm = np.max(np.abs(lm), axis=0)
    peak_tot = np.max(np.abs(tot), axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(peak_lm > 0, peak_tot / peak_lm, np.where(peak_tot > 0, np.inf, 1.0))
    print(f"samples: {len(samples)}  output: {args.out}")
    print("peak_tau_lm_Nm:    " + " ".join(f"{v:.4f}" for v in peak_lm))
    print("peak_tau_total_Nm: " + " ".join(f"{v:.4f}" for v in peak_tot))
    print("peak_ratio:        " + " ".join(f"{v:.4f}" for v in ratio))
    return EXIT_OK


# --- ringdown ----------------------------------------------------------------------


def cmd_ringdown(args) -> int:
    r = {}
    if args.viscous is not None:
        r["viscous_friction_Nms_rad"] = args.viscous
    if args.coulomb is not None:
        r["coulomb_friction_Nm"] = args.coulomb
    if args.deceleration is not None:
        r["deceleration_m_s2"] = args.deceleration
    if args.duration is not None:
        r["duration_s"] = args.duration
    if args.dt is not None:
        r["dt_s"] = args.dt
    cfg = _config(args, {"ringdown": r} if r else None)
    scenario = cfg.ringdown_scenario()
    try:
        rcfg = scenario.config()
    except (SingularHOBMError, UnreachableError) as exc:
        raise ConfigError(f"ringdown stop point: {exc}") from exc
    series = simulate_ringdown(rcfg)
    io.write_ringdown(args.out, series)
    band = cfg.settling_band
    print(f"samples: {len(series)}  output: {args.out}")
    print(f"settling_time_s: {settling_time(series, band):.6f}  (band {math.degrees(band):.4g} deg)")
    print(f"peak_force_N: {peak_force(series):.6f}")
    e = series.energy
    drift = 0.0 if e[0] == 0 else float(np.max(np.abs(e - e[0])) / e[0])
    print(f"energy_J: initial {e[0]:.6f} final {e[-1]:.6f} max_rel_deviation {drift:.3e}")
    return EXIT_OK


# --- doe ---------------------------------------------------------------------------


def cmd_doe_run(args) -> int:
    cfg = _config(args)
    design = cfg.design()
    scenario = cfg.ringdown_scenario(duration=cfg.doe_duration)
    responses = run_experiments(design, ringdown_responder(design, scenario), args.workers)
    io.write_design(args.out, design, responses)
    print(f"design points: {len(design.points)}  axial distance: {design.axial_distance:.6f}  output: {args.out}")
    return EXIT_OK


def cmd_doe_fit(args) -> int:
    design, responses = io.read_design(args.input)
    model = fit_quadratic(design, responses)
    io.write_model(args.out, model)
    for name, c in model.table():
        print(f"{name:>28s} {c: .10g}")
    print(f"R2: {model.r_squared:.12f}  max_residual: {model.max_residual:.3e}  output: {args.out}")
    return EXIT_OK


def cmd_doe_limit(args) -> int:
    cfg = _config(args)
    model = io.read_model(args.model)
    limit = cfg.effort_limit if args.force is None else args.force
    surface = acceleration_limit_surface(model, limit, cfg.grid("friction_grid"), cfg.grid("mass_grid"))
    io.write_limit(args.out, surface)
    counts = {s: int(np.sum(surface.status == s)) for s in ("bounded", "unbounded", "infeasible")}
    print(
        f"effort_limit_N: {limit:g}  grid: {surface.values.shape[0]}x{surface.values.shape[1]}  "
        + "  ".join(f"{k}: {v}" for k, v in counts.items())
        + f"  output: {args.out}"
    )
    return EXIT_OK


# --- entry point -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hobm-lwr", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(sp):
        sp.add_argument("--config", "-c", help="YAML project config (defaults used when omitted)")
        return sp

    fk = with_config(sub.add_parser("fk", help="forward kinematics of the LWR (or a preset)"))
    fk.add_argument("--preset", help="preset name overriding the config's lwr model")
    fk.add_argument("--q", required=True, help="comma-separated joint values, degrees (metres for prismatic)")
    fk.add_argument("--frames", help="write all link frames to this CSV")
    fk.set_defaults(func=cmd_fk)

    tq = with_config(sub.add_parser("torques", help="LWR torques with and without HOBM inertia"))
    tq.add_argument("--dt", type=float, help="sample step, s")
    tq.add_argument("--out", default="torques.csv")
    tq.add_argument("--no-hobm", action="store_true", help="skip the HOBM; tau_total equals tau_lm")
    tq.add_argument("--max-report", type=int, default=20, help=argparse.SUPPRESS)
    tq.set_defaults(func=cmd_torques)

    rd = with_config(sub.add_parser("ringdown", help="HOBM oscillation after the LWR stops"))
    rd.add_argument("--viscous", type=float, help="viscous joint friction, N m s/rad")
    rd.add_argument("--coulomb", type=float, help="Coulomb joint friction, N m")
    rd.add_argument("--deceleration", type=float, help="LWR deceleration before the stop, m/s^2")
    rd.add_argument("--duration", type=float, help="simulated time, s")
    rd.add_argument("--dt", type=float, help="integration step, s")
    rd.add_argument("--out", default="ringdown.csv")
    rd.set_defaults(func=cmd_ringdown)

    doe = sub.add_parser("doe", help="central-composite study of the peak effort")
    dsub = doe.add_subparsers(dest="doe_command", required=True)
    run = with_config(dsub.add_parser("run", help="generate the design and evaluate the ringdown at each point"))
    run.add_argument("--out", default="design.csv")
    run.add_argument("--workers", type=int, default=None)
    run.set_defaults(func=cmd_doe_run)
    fit = dsub.add_parser("fit", help="fit the quadratic meta-model to a design CSV")
    fit.add_argument("--input", default="design.csv")
    fit.add_argument("--out", default="model.csv")
    fit.set_defaults(func=cmd_doe_fit)
    lim = with_config(dsub.add_parser("limit", help="max admissible acceleration per friction x mass cell"))
    lim.add_argument("--model", default="model.csv")
    lim.add_argument("--force", type=float, help="effort limit, N (default from config)")
    lim.add_argument("--out", default="limit.csv")
    lim.set_defaults(func=cmd_doe_limit)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "dt", None) is not None and not args.dt > 0:
            raise ConfigError("--dt must be positive")
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DimensionError as exc:
        print(f"dimension error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except (Infeasible, SingularHOBMError, SingularLWRError, UnreachableError) as exc:
        print(f"infeasible path: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (RankDeficientError, IntegrationError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
