"""Arm trajectories toward the plate and the superposition-width schedule.

Motion toward the plate and the Stern-Gerlach splitting are treated as two
orthogonal 1D problems: the plate forces move ``z`` while the magnetic
gradient only opens and closes ``dx``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from qgem_screen.core import CONSTANTS, ExperimentConfig, GeometryState, PhysicalConstants, ProtocolSchedule
from qgem_screen.forces import casimir_plate_coefficient, dipole_plate_coefficient

DEFAULT_DT = 1e-5


class CollisionError(RuntimeError):
    def __init__(self, message: str, impact_time: float | None = None):
        super().__init__(message)
        self.impact_time = impact_time


def split_acceleration(schedule: ProtocolSchedule, mass: float, constants: PhysicalConstants = CONSTANTS) -> float:
    """Half the Stern-Gerlach acceleration, g mu_B dB/dz / (2m): dx = k t^2 while opening."""
    return constants.g_factor * constants.mu_B * schedule.dB_dz / (2 * mass)


def gradient_for_width(dx_max: float, schedule: ProtocolSchedule, mass: float, constants: PhysicalConstants = CONSTANTS) -> float:
    """Field gradient that opens the superposition to ``dx_max`` after ``tau_a``."""
    if dx_max < 0 or not schedule.tau_a > 0:
        raise ValueError("need dx_max >= 0 and tau_a > 0")
    return 2 * mass * dx_max / (constants.g_factor * constants.mu_B * schedule.tau_a**2)


def superposition_width(t: float, schedule: ProtocolSchedule, mass: float, constants: PhysicalConstants = CONSTANTS) -> float:
    T = schedule.total_time
    if not 0 <= t <= T * (1 + 1e-12):
        raise ValueError(f"t = {t} outside the protocol window [0, {T}]")
    k = split_acceleration(schedule, mass, constants)
    ta, tau = schedule.tau_a, schedule.tau
    if t <= ta:
        return k * t * t
    dx_max = k * ta * ta
    if t <= ta + tau:
        return dx_max
    if t >= T:
        return 0.0
    s = t - ta - tau
    return max(dx_max - k * s * s, 0.0)


def width_profile(t: np.ndarray, schedule: ProtocolSchedule, mass: float, constants: PhysicalConstants = CONSTANTS) -> np.ndarray:
    """Vectorised :func:`superposition_width`; exact zero at the schedule end."""
    k = split_acceleration(schedule, mass, constants)
    ta, tau, T = schedule.tau_a, schedule.tau, schedule.total_time
    dx_max = k * ta * ta
    s = t - ta - tau
    dx = np.where(t <= ta, k * t * t, np.where(t <= ta + tau, dx_max, np.maximum(dx_max - k * s * s, 0.0)))
    dx[t >= T] = 0.0
    return dx


def step(state: GeometryState, accel_toward_plate: float, dt: float) -> GeometryState:
    """Advance one step at constant acceleration; ``v > 0`` means approaching."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    z = state.z - 0.5 * accel_toward_plate * dt * dt - state.v * dt
    if z <= 0:
        raise CollisionError(f"arm reached the plate at t = {state.t + dt}", state.t + dt)
    return GeometryState(t=state.t + dt, z=z, v=state.v + accel_toward_plate * dt, dx=state.dx)


@njit(cache=True, nogil=True)
def _integrate(z0, c_cas, c_dip, mass, dt, n, z_contact):
    z = np.empty(n + 1)
    v = np.empty(n + 1)
    z[0] = z0
    v[0] = 0.0
    for i in range(n):
        zi = z[i]
        a = (c_cas / zi**5 + c_dip / zi**4) / mass
        z[i + 1] = zi - 0.5 * a * dt * dt - v[i] * dt
        v[i + 1] = v[i] + a * dt
        if z[i + 1] <= z_contact:
            return z[: i + 2], v[: i + 2], i + 1
    return z, v, -1


def n_steps(total_time: float, dt: float) -> int:
    if not dt > 0:
        raise ValueError("dt must be positive")
    n = int(round(total_time / dt))
    if abs(n * dt - total_time) > 1e-9 * max(total_time, dt):
        raise ValueError(f"dt = {dt} does not divide the protocol time {total_time}")
    return n


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    """Sampled arm trajectory; ``samples[i]`` is the state at ``t = i * dt``."""

    t: np.ndarray
    z: np.ndarray
    v: np.ndarray
    dx: np.ndarray
    dt: float
    collided: bool = False
    impact_time: float | None = None

    def __post_init__(self):
        for arr in (self.t, self.z, self.v, self.dx):
            arr.setflags(write=False)

    @property
    def closest_approach_z(self) -> float:
        return float(self.z.min())

    @property
    def final_z(self) -> float:
        return float(self.z[-1])

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, i: int) -> GeometryState:
        return GeometryState(float(self.t[i]), float(self.z[i]), float(self.v[i]), float(self.dx[i]))

    @property
    def samples(self) -> list[GeometryState]:
        return [self[i] for i in range(len(self))]

    def to_csv(self, path: str | Path, stride: int = 1) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t_s", "z_m", "v_mps", "dx_m"])
            idx = list(range(0, len(self), stride))
            if idx[-1] != len(self) - 1:
                idx.append(len(self) - 1)
            for i in idx:
                writer.writerow([repr(float(x)) for x in (self.t[i], self.z[i], self.v[i], self.dx[i])])


def propagate(
    config: ExperimentConfig,
    dt: float = DEFAULT_DT,
    include_casimir: bool = True,
    include_dipole: bool = True,
    *,
    initial_distance: float | None = None,
    theta: float | None = None,
    constants: PhysicalConstants = CONSTANTS,
) -> TrajectoryRecord:
    """Integrate one arm from rest at ``z(0) = d`` over the full protocol.

    The imbalance block of ``config`` is not applied here; ``initial_distance``
    and ``theta`` override the nominal values for perturbed arms. A run that
    brings the sphere surface to the plate (``z <= R``) is returned truncated
    with ``collided`` set.
    """
    spec = config.mass
    schedule = config.schedule
    z0 = schedule.initial_distance_d if initial_distance is None else initial_distance
    theta = spec.dipole_angle_theta if theta is None else theta
    n = n_steps(schedule.total_time, dt)
    c_cas = casimir_plate_coefficient(spec, constants) if include_casimir else 0.0
    c_dip = dipole_plate_coefficient(spec.dipole_moment, theta, constants) if include_dipole else 0.0
    R = spec.radius
    if z0 <= R:
        raise CollisionError(f"initial distance {z0} is inside the sphere radius {R}", 0.0)
    z, v, hit = _integrate(float(z0), c_cas, c_dip, spec.mass, float(dt), n, R)
    t = np.arange(len(z)) * dt
    dx = width_profile(t, schedule, spec.mass, constants)
    if hit >= 0:
        return TrajectoryRecord(t, z, v, dx, dt, collided=True, impact_time=float(t[-1]))
    return TrajectoryRecord(t, z, v, dx, dt)


def convergence_check(config: ExperimentConfig, dt: float = DEFAULT_DT, **kwargs) -> float:
    """Relative change in the final z when the step is halved."""
    coarse = propagate(config, dt, **kwargs)
    fine = propagate(config, dt / 2, **kwargs)
    if coarse.collided or fine.collided:
        raise CollisionError("trajectory collides; convergence undefined")
    return abs(fine.final_z - coarse.final_z) / coarse.final_z


def pure_python_trajectory(config: ExperimentConfig, dt: float, n: int, constants: PhysicalConstants = CONSTANTS) -> list[GeometryState]:
    """Reference stepping with :func:`step` for the first ``n`` steps (slow; for checks)."""
    spec = config.mass
    c_cas = casimir_plate_coefficient(spec, constants)
    c_dip = dipole_plate_coefficient(spec.dipole_moment, spec.dipole_angle_theta, constants)
    state = GeometryState(0.0, config.schedule.initial_distance_d, 0.0, 0.0)
    out = [state]
    for _ in range(n):
        a = (c_cas / state.z**5 + c_dip / state.z**4) / spec.mass
        state = step(state, a, dt)
        out.append(state)
    return out


__all__ = [
    "CollisionError",
    "DEFAULT_DT",
    "TrajectoryRecord",
    "convergence_check",
    "gradient_for_width",
    "propagate",
    "step",
    "superposition_width",
    "width_profile",
]
