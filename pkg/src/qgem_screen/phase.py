"""Gravitational entanglement phase and plate-induced dephasing along trajectories."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from qgem_screen.core import CONSTANTS, ExperimentConfig, PhysicalConstants, TestMassSpec
from qgem_screen.dynamics import DEFAULT_DT, CollisionError, TrajectoryRecord, propagate


@dataclass(frozen=True)
class PhaseResult:
    phi_eff_accumulated: float
    global_phase: float
    dephasing_casimir: float = 0.0
    dephasing_dipole: float = 0.0
    closest_approach_z: float = math.nan
    final_z: float = math.nan

    @property
    def magnitude(self) -> float:
        return abs(self.phi_eff_accumulated)

    @property
    def dephasing_total(self) -> float:
        return self.dephasing_casimir + self.dephasing_dipole


def static_effective_phase(
    mass: float,
    d: float,
    dx: float,
    tau: float,
    configuration: str = "parallel",
    constants: PhysicalConstants = CONSTANTS,
) -> float:
    """Entanglement phase for fixed geometry held for ``tau``.

    ``d`` is the distance between the two ``|0>`` branches. Parallel results are
    non-positive; linear results are non-negative.
    """
    k = constants.G * mass**2 * tau / constants.hbar
    if configuration == "parallel":
        if not d > 0:
            raise ValueError("d must be positive")
        return 2 * k * (1 / math.hypot(d, dx) - 1 / d)
    if configuration == "linear":
        if not d > dx:
            raise ValueError(f"linear configuration needs d > dx (got d={d}, dx={dx})")
        return k * (1 / (d + dx) + 1 / (d - dx) - 2 / d)
    raise ValueError(f"unknown configuration {configuration!r}")


def _window_mask(t: np.ndarray, window: tuple[float, float] | None) -> slice | np.ndarray:
    # left-endpoint rule: sample i stands for [t_i, t_i + dt)
    if window is None:
        return slice(0, len(t) - 1)
    lo, hi = window
    eps = 1e-9 * (t[1] - t[0])
    mask = (t >= lo - eps) & (t < hi - eps)
    mask[-1] = False
    return mask


def four_arm_rates(z1_0, z1_1, z2_0, z2_1, dx, plate_W, mass, constants=CONSTANTS):
    """Instantaneous d(Phi)/dt and d(phi_global)/dt for arbitrary arm distances.

    Mass 1 has arms at plate distances ``z1_0``/``z1_1`` and mass 2 at
    ``z2_0``/``z2_1``; branches ``|0>`` sit at x = 0 and ``|1>`` at x = dx on
    both sides. The effective phase is phi_01 + phi_10 - phi_00 - phi_11.
    """
    k = constants.G * mass**2 / constants.hbar
    s00 = z1_0 + z2_0 + plate_W
    s11 = z1_1 + z2_1 + plate_W
    s01 = z1_0 + z2_1 + plate_W
    s10 = z1_1 + z2_0 + plate_W
    cross = 1 / np.sqrt(s01**2 + dx**2) + 1 / np.sqrt(s10**2 + dx**2)
    straight = 1 / s00 + 1 / s11
    return k * (cross - straight), k / s00


def four_arm_phase(z1_0, z1_1, z2_0, z2_1, dx, t, dt, plate_W, mass, window=None, constants=CONSTANTS):
    """Left-endpoint sum of :func:`four_arm_rates`; returns (Phi_eff, global phase)."""
    sel = _window_mask(t, window)
    rate, glob = four_arm_rates(z1_0[sel], z1_1[sel], z2_0[sel], z2_1[sel], dx[sel], plate_W, mass, constants)
    return float(np.sum(rate) * dt), float(np.sum(glob) * dt)


def _require_valid(traj: TrajectoryRecord) -> None:
    if traj.collided:
        raise CollisionError(f"trajectory collided with the plate at t = {traj.impact_time}", traj.impact_time)


def accumulated_phase(
    traj: TrajectoryRecord,
    plate_W: float,
    mass: float,
    window: tuple[float, float] | None = None,
    constants: PhysicalConstants = CONSTANTS,
) -> PhaseResult:
    """Phi_acc for two mirror-image masses sharing the trajectory ``traj``.

    Separation between the masses is ``2 z(t) + W`` and the branch offset is
    the instantaneous ``dx(t)``; the sum runs over the whole protocol unless
    ``window = (t_start, t_end)`` is given.
    """
    _require_valid(traj)
    z = traj.z
    phi, glob = four_arm_phase(z, z, z, z, traj.dx, traj.t, traj.dt, plate_W, mass, window, constants)
    return PhaseResult(phi, glob, 0.0, 0.0, traj.closest_approach_z, traj.final_z)


def dephasing_coefficients(spec: TestMassSpec, constants: PhysicalConstants = CONSTANTS) -> tuple[float, float]:
    """Prefactors of the Casimir (z^-4) and dipole (z^-3) dephasing rates."""
    cas = 3 * constants.c * spec.radius**3 / (8 * math.pi) * spec.clausius_mossotti
    dip = spec.dipole_moment**2 / (16 * math.pi * constants.eps0 * constants.hbar)
    return cas, dip


def dephasing_rates(z_near, z_far, spec: TestMassSpec, constants: PhysicalConstants = CONSTANTS):
    """(gamma_C, gamma_D) arrays; differences are formed without cancellation."""
    cas, dip = dephasing_coefficients(spec, constants)
    gap = z_far - z_near
    z0, z1 = z_near, z_far
    inv4 = gap * (z0 + z1) * (z0 * z0 + z1 * z1) / (z0**4 * z1**4)
    inv3 = gap * (z0 * z0 + z0 * z1 + z1 * z1) / (z0**3 * z1**3)
    return cas * inv4, dip * inv3


def dephasing_accumulation(
    arm_near: TrajectoryRecord,
    arm_far: TrajectoryRecord,
    spec: TestMassSpec,
    window: tuple[float, float] | None = None,
    constants: PhysicalConstants = CONSTANTS,
) -> tuple[float, float]:
    """Integrated which-path phase (Casimir, dipole) between two arms of one mass."""
    if arm_near.dt != arm_far.dt or len(arm_near) != len(arm_far):
        raise ValueError("arms must share the same time grid")
    _require_valid(arm_near)
    _require_valid(arm_far)
    sel = _window_mask(arm_near.t, window)
    gc, gd = dephasing_rates(arm_near.z[sel], arm_far.z[sel], spec, constants)
    return float(np.sum(gc) * arm_near.dt), float(np.sum(gd) * arm_near.dt)


def fold_angle(theta: float) -> float:
    """Map an angle into [0, pi] keeping cos^2 unchanged."""
    theta = abs(math.remainder(theta, 2 * math.pi))
    return min(theta, math.pi)


@dataclass(frozen=True)
class ArmSet:
    """The four arm trajectories entering the phase, plus the perturbed config."""

    config: ExperimentConfig
    z1_0: TrajectoryRecord
    z1_1: TrajectoryRecord
    z2_0: TrajectoryRecord
    z2_1: TrajectoryRecord

    @property
    def arms(self) -> tuple[TrajectoryRecord, ...]:
        return (self.z1_0, self.z1_1, self.z2_0, self.z2_1)


def perturbed_config(config: ExperimentConfig) -> ExperimentConfig:
    """Fold the d1, dB and theta imbalances into the nominal blocks (d2 stays)."""
    imb = config.imbalance
    out = config.with_schedule(
        initial_distance_d=config.schedule.initial_distance_d + imb.delta_d1,
        dB_dz=config.schedule.dB_dz + imb.delta_dB,
    )
    return out.with_mass(dipole_angle_theta=fold_angle(config.mass.dipole_angle_theta + imb.delta_theta))


def build_arms(
    config: ExperimentConfig,
    dt: float = DEFAULT_DT,
    include_casimir: bool = True,
    include_dipole: bool = True,
    constants: PhysicalConstants = CONSTANTS,
) -> ArmSet:
    """Propagate every distinct arm of the (imbalanced) configuration.

    ``delta_d1`` moves both masses, ``delta_dB`` and ``delta_theta`` act on both
    masses alike. ``delta_d2`` places mass 1's ``|0>`` arm at ``d - delta_d2``
    and its ``|1>`` arm at ``d + delta_d2``; mass 2 mirrors this for the
    asymmetric tilt and is reversed for the symmetric (still parallel) tilt.
    """
    cfg = perturbed_config(config)
    d = cfg.schedule.initial_distance_d
    d2 = config.imbalance.delta_d2
    kw = dict(include_casimir=include_casimir, include_dipole=include_dipole, constants=constants)
    if d2 == 0:
        arm = propagate(cfg, dt, **kw)
        return ArmSet(cfg, arm, arm, arm, arm)
    near = propagate(cfg, dt, initial_distance=d - d2, **kw)
    far = propagate(cfg, dt, initial_distance=d + d2, **kw)
    if config.imbalance.tilt_mode == "asymmetric":
        return ArmSet(cfg, near, far, near, far)
    return ArmSet(cfg, near, far, far, near)


def evaluate(
    config: ExperimentConfig,
    dt: float = DEFAULT_DT,
    include_casimir: bool = True,
    include_dipole: bool = True,
    constants: PhysicalConstants = CONSTANTS,
) -> PhaseResult:
    """Full pipeline: propagate all arms, accumulate Phi_eff and mass 1's dephasing."""
    arms = build_arms(config, dt, include_casimir, include_dipole, constants)
    for arm in arms.arms:
        _require_valid(arm)
    a = arms.z1_0
    phi, glob = four_arm_phase(
        arms.z1_0.z, arms.z1_1.z, arms.z2_0.z, arms.z2_1.z, a.dx, a.t, dt,
        config.plate.thickness_W, config.mass.mass, None, constants,
    )
    if config.imbalance.delta_d2:
        dc, dd = dephasing_accumulation(arms.z1_0, arms.z1_1, arms.config.mass, constants=constants)
    else:
        dc = dd = 0.0
    closest = min(arm.closest_approach_z for arm in arms.arms)
    final = min(arm.final_z for arm in arms.arms)
    return PhaseResult(phi, glob, dc, dd, closest, final)


def phase_timeseries(
    config: ExperimentConfig,
    dt: float = DEFAULT_DT,
    constants: PhysicalConstants = CONSTANTS,
) -> dict[str, np.ndarray]:
    """Cumulative Phi_eff and dephasing at each sample time."""
    arms = build_arms(config, dt, constants=constants)
    for arm in arms.arms:
        _require_valid(arm)
    a = arms.z1_0
    rate, _ = four_arm_rates(arms.z1_0.z, arms.z1_1.z, arms.z2_0.z, arms.z2_1.z, a.dx,
                             config.plate.thickness_W, config.mass.mass, constants)
    gc, gd = dephasing_rates(arms.z1_0.z, arms.z1_1.z, arms.config.mass, constants)

    def cumulative(r):
        out = np.zeros_like(r)
        out[1:] = np.cumsum(r[:-1]) * dt
        return out

    return {
        "t_s": a.t,
        "phi_rad": cumulative(rate),
        "dephase_C_rad": cumulative(gc),
        "dephase_D_rad": cumulative(gd),
    }


def write_timeseries_csv(series: dict[str, np.ndarray], path: str | Path, stride: int = 1) -> None:
    keys = ["t_s", "phi_rad", "dephase_C_rad", "dephase_D_rad"]
    n = len(series["t_s"])
    idx = list(range(0, n, stride))
    if idx[-1] != n - 1:
        idx.append(n - 1)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(keys)
        for i in idx:
            writer.writerow([repr(float(series[k][i])) for k in keys])
