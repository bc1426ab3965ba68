"""Command-line entry point: ``qgem-screen <subcommand> [options]``.

Every run writes its outputs plus a ``manifest.json`` into ``--out``. Files
contain no timestamps, so the same arguments reproduce them byte for byte.
Exit status: 0 on success, 2 for usage or configuration problems, 3 when the
physics fails (collision with the plate, invalid geometry).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from qgem_screen.core import ConfigError, ExperimentConfig, ImbalanceSpec
from qgem_screen.dynamics import DEFAULT_DT, CollisionError, gradient_for_width, propagate, split_acceleration
from qgem_screen.forces import GeometryError
from qgem_screen.phase import evaluate, phase_timeseries
from qgem_screen.plate import (
    clamped_plate_frequency,
    deflection_profile,
    net_imbalance_force,
    static_deflection_dephasing,
    thermal_dephasing_budget,
)
from qgem_screen.sensitivity import AXES, monte_carlo, sweep
from qgem_screen.witness import witness_report

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS = 0, 2, 3

SUBCOMMANDS = ("trajectory", "phase", "sweep", "witness", "plate", "montecarlo", "table1")

DEFAULT_SWEEP_MAX = {"delta_d1": 1e-6, "delta_d2": 1e-6, "delta_dB": 1e5, "delta_theta": math.pi / 2}

# (mass kg, 2d + W in m, dx_max in m)
TABLE1_ROWS = ((1e-14, 83e-6, 29e-6), (1e-13, 53e-6, 1.4e-6), (1e-12, 35e-6, 0.08e-6))


@dataclass(frozen=True)
class Preset:
    subcommand: str
    options: dict = field(default_factory=dict)
    description: str = ""


PRESETS: dict[str, Preset] = {
    "fig4": Preset("trajectory", {"z0_um": [20.0, 13.0, 10.0], "no_dipole": True},
                   "Casimir-only trajectories from 20, 13 and 10 um"),
    "fig5": Preset("trajectory", {"z0_um": [100.0, 50.0, 41.0]},
                   "Casimir plus dipole trajectories from 100, 50 and 41 um"),
    "fig6": Preset("phase", {"runs": [(1e-16, 5e3, 101e-6), (1e-15, 5e4, 64e-6), (1e-14, 5e5, 41e-6)]},
                   "cumulative phase for three masses at about 30 um width"),
    "fig8": Preset("sweep", {"axes": ["delta_d1", "delta_d2"], "points": 41},
                   "phase band against delta_d1 and delta_d2"),
    "fig9": Preset("plate", {"delta_d1": 0.48e-6}, "plate deflection from the delta_d1 = 0.48 um imbalance"),
    "fig10": Preset("sweep", {"axes": ["delta_dB"], "points": 41}, "phase band against the gradient offset"),
    "fig11": Preset("sweep", {"axes": ["delta_d2"], "points": 21, "distances": [41e-6, 50e-6], "refine": False},
                    "dephasing against delta_d2 from 41 and 50 um"),
    "table1": Preset("table1", {}, "Table I rows"),
    "table2": Preset("sweep", {"axes": list(AXES), "points": 21}, "tolerance bound on every axis"),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="key = value configuration file")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: ./out)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--dt", type=float, default=None, help=f"time step in s (default {DEFAULT_DT})")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--preset", choices=sorted(PRESETS), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qgem-screen", description="Screened gravitational-entanglement simulator")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("trajectory", help="propagate arm trajectories")
    _common(p)
    p.add_argument("--z0-um", type=float, action="append", dest="z0_um", help="initial distance in um (repeatable)")
    p.add_argument("--no-casimir", action="store_true")
    p.add_argument("--no-dipole", action="store_true")
    p.add_argument("--stride", type=int, default=100, help="write every n-th sample")

    p = sub.add_parser("phase", help="accumulated phase and dephasing")
    _common(p)
    p.add_argument("--stride", type=int, default=100)

    p = sub.add_parser("sweep", help="imbalance sweep with tolerance bound")
    _common(p)
    p.add_argument("--axis", choices=list(AXES) + ["all"], default=None)
    p.add_argument("--max", type=float, default=None, dest="max_value", help="largest imbalance (SI)")
    p.add_argument("--points", type=int, default=None)
    p.add_argument("--threshold", type=float, default=0.12)

    p = sub.add_parser("witness", help="PPT witness of the final spin state")
    _common(p)
    p.add_argument("--delta-phi", type=float, default=None, help="rad; default half the computed effective phase")
    p.add_argument("--phi-d", type=float, default=0.0)
    p.add_argument("--gamma", type=float, default=None, help="Hz; default from config")
    p.add_argument("--time", type=float, default=None, help="s; default the protocol time")

    p = sub.add_parser("plate", help="plate deflection and thermal budget")
    _common(p)
    p.add_argument("--delta-d1", type=float, default=None, help="m")
    p.add_argument("--delta-theta", type=float, default=None, help="rad")
    p.add_argument("--omega", type=float, default=None, help="override omega_12 in rad/s")

    p = sub.add_parser("montecarlo", help="Gaussian imbalance sampling")
    _common(p)
    p.add_argument("--samples", type=int, default=1000)
    for axis in AXES:
        p.add_argument(f"--sigma-{axis[6:]}", type=float, default=0.0, dest=f"sigma_{axis}")

    p = sub.add_parser("table1", help="the three free-fall parameter rows")
    _common(p)
    return parser


# ---------------------------------------------------------------------------


def _write_rows(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, float) else x for x in row])


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _emit_table(out: Path, stem: str, fmt: str, header: list[str], rows: list[list]) -> str:
    if fmt == "csv":
        _write_rows(out / f"{stem}.csv", header, rows)
        return f"{stem}.csv"
    _write_json(out / f"{stem}.json", [dict(zip(header, r)) for r in rows])
    return f"{stem}.json"


def _cmd_trajectory(cfg, args, opts, out, dt):
    z0s = opts.get("z0_um") or args.z0_um or [cfg.schedule.initial_distance_d * 1e6]
    no_cas = opts.get("no_casimir", args.no_casimir)
    no_dip = opts.get("no_dipole", args.no_dipole)
    outputs, summary = [], []
    for z0 in z0s:
        traj = propagate(cfg, dt, not no_cas, not no_dip, initial_distance=z0 * 1e-6)
        if traj.collided:
            raise CollisionError(f"trajectory from {z0} um hits the plate at t = {traj.impact_time:.6g} s",
                                 traj.impact_time)
        stem = f"trajectory_z0_{z0:g}um"
        if args.format == "csv":
            traj.to_csv(out / f"{stem}.csv", args.stride)
            outputs.append(f"{stem}.csv")
        summary.append({"z0_m": z0 * 1e-6, "final_z_m": traj.final_z, "closest_approach_m": traj.closest_approach_z})
    _write_json(out / "trajectory_summary.json", summary)
    return outputs + ["trajectory_summary.json"]


def _cmd_phase(cfg, args, opts, out, dt):
    runs = opts.get("runs") or [(cfg.mass.mass, cfg.schedule.dB_dz, cfg.schedule.initial_distance_d)]
    outputs, summary = [], []
    for m, dB, d in runs:
        c = cfg.with_mass(mass=m).with_schedule(dB_dz=dB, initial_distance_d=d)
        res = evaluate(c, dt)
        series = phase_timeseries(c, dt)
        stem = f"phase_m{m:g}"
        idx = list(range(0, len(series["t_s"]), args.stride))
        if idx[-1] != len(series["t_s"]) - 1:
            idx.append(len(series["t_s"]) - 1)
        keys = ["t_s", "phi_rad", "dephase_C_rad", "dephase_D_rad"]
        rows = [[float(series[k][i]) for k in keys] for i in idx]
        outputs.append(_emit_table(out, stem, args.format, keys, rows))
        summary.append({
            "mass_kg": m, "dB_dz_T_per_m": dB, "initial_distance_m": d,
            "phi_eff_rad": res.phi_eff_accumulated, "global_phase_rad": res.global_phase,
            "dephasing_casimir_rad": res.dephasing_casimir, "dephasing_dipole_rad": res.dephasing_dipole,
            "closest_approach_m": res.closest_approach_z, "final_z_m": res.final_z,
        })
    _write_json(out / "phase_summary.json", summary)
    return outputs + ["phase_summary.json"]


def _cmd_sweep(cfg, args, opts, out, dt):
    axes = opts.get("axes") or ([args.axis] if args.axis and args.axis != "all" else list(AXES) if args.axis else None)
    if not axes:
        raise UsageError("sweep needs --axis or a sweep preset")
    distances = opts.get("distances") or [cfg.schedule.initial_distance_d]
    n_points = args.points or opts.get("points", 21)
    refine = opts.get("refine", True)
    outputs, summary = [], []
    for d in distances:
        c = cfg.with_schedule(initial_distance_d=d)
        for axis in axes:
            mx = args.max_value if args.max_value is not None else DEFAULT_SWEEP_MAX[axis]
            res = sweep(c, axis, mx, n_points, args.threshold, dt, refine=refine)
            stem = f"sweep_{axis}" + (f"_d{d * 1e6:g}um" if len(distances) > 1 else "")
            header = ["imbalance", "phi_low_rad", "phi_high_rad", "dephase_C_rad", "dephase_D_rad", "collided"]
            rows = [[p.value, p.phi_low, p.phi_high, p.dephase_casimir, p.dephase_dipole, int(p.collided)]
                    for p in res.points]
            if args.format == "csv":
                res.to_csv(out / f"{stem}.csv")
                outputs.append(f"{stem}.csv")
            else:
                outputs.append(_emit_table(out, stem, "json", header, rows))
            summary.append({**res.summary(), "initial_distance_m": d})
    _write_json(out / "sweep_summary.json", summary)
    return outputs + ["sweep_summary.json"]


def _cmd_witness(cfg, args, opts, out, dt):
    gamma = cfg.schedule.decoherence_rate_gamma if args.gamma is None else args.gamma
    t = cfg.schedule.total_time if args.time is None else args.time
    if args.delta_phi is None:
        delta_phi = evaluate(cfg, dt).phi_eff_accumulated / 2
    else:
        delta_phi = args.delta_phi
    report = witness_report(delta_phi, args.phi_d, gamma, t)
    if args.format == "csv":
        flat = {**{f"input_{k}": v for k, v in report["inputs"].items()},
                **{k: v for k, v in report.items() if k != "inputs"}}
        _write_rows(out / "witness.csv", ["quantity", "value"],
                    [[k, float(v) if not isinstance(v, bool) else int(v)] for k, v in flat.items()])
        return ["witness.csv"]
    _write_json(out / "witness.json", report)
    return ["witness.json"]


def _cmd_plate(cfg, args, opts, out, dt):
    d1 = opts.get("delta_d1", args.delta_d1)
    dth = args.delta_theta
    if d1 is None and dth is None:
        d1 = 0.48e-6
    imb = ImbalanceSpec(delta_d1=d1 or 0.0, delta_theta=dth or 0.0)
    force = net_imbalance_force(cfg, imb, dt)
    profile = deflection_profile(force, cfg.plate)
    outputs = []
    if args.format == "csv":
        profile.to_csv(out / "deflection_profile.csv")
        outputs.append("deflection_profile.csv")
    thermal = thermal_dephasing_budget(cfg, omega=args.omega, dt=dt)
    static_c, static_d = static_deflection_dephasing(cfg, force, dt=dt)
    summary = {
        "imbalance": {"delta_d1_m": imb.delta_d1, "delta_theta_rad": imb.delta_theta},
        "net_force_N": force,
        "max_deflection_m": profile.max_deflection,
        "static_dephasing_casimir_rad": static_c,
        "static_dephasing_dipole_rad": static_d,
        "omega_12_rad_per_s": clamped_plate_frequency(1, 2, cfg.plate),
        "thermal": asdict(thermal),
    }
    _write_json(out / "plate_summary.json", summary)
    return outputs + ["plate_summary.json"]


def _cmd_montecarlo(cfg, args, opts, out, dt):
    seed = 0 if args.seed is None else args.seed
    sigmas = {a: getattr(args, f"sigma_{a}") for a in AXES}
    res = monte_carlo(cfg, sigmas, args.samples, seed, dt)
    outputs = []
    if args.format == "csv":
        res.to_csv(out / "mc_samples.csv")
        outputs.append("mc_samples.csv")
    else:
        _write_json(out / "mc_samples.json", [float(x) for x in res.phase_samples])
        outputs.append("mc_samples.json")
    _write_json(out / "mc_summary.json", res.summary())
    return outputs + ["mc_summary.json"]


def table1_rows(cfg: ExperimentConfig, dt: float = DEFAULT_DT) -> list[list[float]]:
    rows = []
    W = cfg.plate.thickness_W
    for m, sep, dx in TABLE1_ROWS:
        d = (sep - W) / 2
        dB = gradient_for_width(dx, cfg.schedule, m)
        c = cfg.with_mass(mass=m).with_schedule(initial_distance_d=d, dB_dz=dB)
        res = evaluate(c, dt)
        dx_max = split_acceleration(c.schedule, m) * c.schedule.tau_a**2
        rows.append([m, sep, res.magnitude, dx_max, res.final_z, dB])
    return rows


def _cmd_table1(cfg, args, opts, out, dt):
    header = ["mass_kg", "separation_2d_plus_W_m", "phi_eff_abs_rad", "dx_max_m", "final_z_m", "dB_dz_T_per_m"]
    return [_emit_table(out, "table1", args.format, header, table1_rows(cfg, dt))]


_HANDLERS = {
    "trajectory": _cmd_trajectory,
    "phase": _cmd_phase,
    "sweep": _cmd_sweep,
    "witness": _cmd_witness,
    "plate": _cmd_plate,
    "montecarlo": _cmd_montecarlo,
    "table1": _cmd_table1,
}


def run(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        opts = {}
        if args.preset:
            preset = PRESETS[args.preset]
            if preset.subcommand != args.subcommand:
                raise UsageError(f"preset {args.preset!r} belongs to the {preset.subcommand!r} subcommand")
            opts = preset.options
        cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
        dt = DEFAULT_DT if args.dt is None else args.dt
        if not dt > 0:
            raise UsageError("--dt must be positive")
        args.out.mkdir(parents=True, exist_ok=True)
        outputs = _HANDLERS[args.subcommand](cfg, args, opts, args.out, dt)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CollisionError, GeometryError, ArithmeticError, ValueError) as exc:
        print(f"physics error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    manifest = {
        "subcommand": args.subcommand,
        "preset": args.preset,
        "config_path": str(args.config) if args.config else None,
        "config": cfg.to_text().splitlines(),
        "output_dir": str(args.out),
        "seed": args.seed,
        "dt_override": args.dt,
        "format": args.format,
        "outputs": outputs,
    }
    _write_json(args.out / "manifest.json", manifest)
    return EXIT_OK


def main() -> None:
    sys.exit(run())
