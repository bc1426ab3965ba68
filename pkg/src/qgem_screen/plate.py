"""Mechanical response of the clamped screening plate.

Point-force deflection from imbalance forces, bending and membrane mode
frequencies, and the thermal-noise dephasing budget of the first odd mode.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from qgem_screen.core import CONSTANTS, ExperimentConfig, ImbalanceSpec, PhysicalConstants, PlateSpec
from qgem_screen.dynamics import DEFAULT_DT, CollisionError, propagate, split_acceleration
from qgem_screen.forces import casimir_plate_force, dipole_plate_force
from qgem_screen.phase import dephasing_accumulation, dephasing_rates, fold_angle


def area_moment(plate: PlateSpec) -> float:
    return plate.thickness_W**3 * plate.side_length_L / 12


def deflection(F: float, a: float, plate: PlateSpec) -> float:
    """Static deflection at distance ``a`` from the midpoint under a central point force."""
    L = plate.side_length_L
    if abs(a) > L / 2 * (1 + 1e-12):
        raise ValueError(f"|a| = {abs(a)} exceeds half the plate length {L / 2}")
    if F < 0:
        raise ValueError("F must be non-negative")
    a = abs(a)
    return F * (L - 2 * a) ** 2 * (L + 4 * a) / (192 * plate.youngs_modulus_E * area_moment(plate))


def deflection_thickness_form(F: float, a: float, plate: PlateSpec) -> float:
    """Same deflection with the area moment substituted: F (L-2a)^2 (1 + 4a/L) / (16 W^3 E)."""
    L, W = plate.side_length_L, plate.thickness_W
    a = abs(a)
    return F * (L - 2 * a) ** 2 * (1 + 4 * a / L) / (16 * W**3 * plate.youngs_modulus_E)


@dataclass(frozen=True, eq=False)
class DeflectionProfile:
    a_values: np.ndarray
    deflection: np.ndarray
    f_max: float
    max_deflection: float

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["a_m", "deflection_m"])
            for a, dz in zip(self.a_values, self.deflection):
                writer.writerow([repr(float(a)), repr(float(dz))])


def deflection_profile(F: float, plate: PlateSpec, n_points: int = 201) -> DeflectionProfile:
    L = plate.side_length_L
    a = np.linspace(-L / 2, L / 2, n_points)
    dz = np.array([deflection(F, x, plate) for x in a])
    dz[0] = dz[-1] = 0.0
    return DeflectionProfile(a, dz, F, deflection(F, 0.0, plate))


def _total_force(config: ExperimentConfig, z: float, theta: float) -> float:
    spec = config.mass
    return casimir_plate_force(spec, z) + dipole_plate_force(spec.dipole_moment, theta, z)


def net_imbalance_force(config: ExperimentConfig, imbalance: ImbalanceSpec, dt: float = DEFAULT_DT) -> float:
    """Net force on the plate at the end of the run from a d1 or theta imbalance.

    For ``delta_d1`` the two masses start at ``d + delta_d1`` and ``d - delta_d1``;
    for ``delta_theta`` mass 1 keeps the nominal angle and mass 2 is rotated by
    ``delta_theta``. Forces are evaluated at each mass's closest approach.
    """
    if imbalance.delta_d1 and imbalance.delta_theta:
        raise ValueError("set exactly one of delta_d1 and delta_theta")
    if imbalance.delta_d2 or imbalance.delta_dB:
        raise ValueError("only delta_d1 or delta_theta load the plate")
    d = config.schedule.initial_distance_d
    theta0 = config.mass.dipole_angle_theta
    if imbalance.delta_d1:
        runs = [(d + imbalance.delta_d1, theta0), (d - imbalance.delta_d1, theta0)]
    elif imbalance.delta_theta:
        runs = [(d, theta0), (d, fold_angle(theta0 + imbalance.delta_theta))]
    else:
        return 0.0
    forces = []
    for z0, theta in runs:
        traj = propagate(config, dt, initial_distance=z0, theta=theta)
        if traj.collided:
            raise CollisionError(f"imbalanced run from z(0) = {z0} collides", traj.impact_time)
        forces.append(_total_force(config, traj.closest_approach_z, theta))
    return abs(forces[0] - forces[1])


def clamped_plate_frequency(n: int, m: int, plate: PlateSpec, mode_coefficient: float | None = None) -> float:
    """Angular frequency of bending mode (n, m) of a clamped square plate."""
    if mode_coefficient is None:
        if {n, m} != {1, 2}:
            raise ValueError(f"no mode coefficient known for mode ({n}, {m}); pass mode_coefficient")
        mode_coefficient = plate.mode_coefficient_K12
    E, W, mu, rho, L = plate.youngs_modulus_E, plate.thickness_W, plate.poisson_mu, plate.density, plate.side_length_L
    return mode_coefficient / L**2 * math.sqrt(E * W**2 / (12 * (1 - mu**2) * rho))


def membrane_frequency(n: int, m: int, plate: PlateSpec, sigma: float | None = None) -> float:
    """Stress-dominated (membrane) angular frequency; independent of thickness."""
    sigma = plate.biaxial_stress_sigma if sigma is None else sigma
    if sigma is None:
        raise ValueError("membrane frequency needs a biaxial stress")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    L = plate.side_length_L
    return 0.5 * math.sqrt(sigma / plate.density * ((n / L) ** 2 + (m / L) ** 2))


def thermal_rms(plate: PlateSpec, omega: float, constants: PhysicalConstants = CONSTANTS) -> float:
    """Equipartition amplitude sqrt(k_B T / (M omega^2)) with M the plate mass."""
    if not omega > 0:
        raise ValueError("omega must be positive")
    return math.sqrt(constants.k_B * plate.temperature_T / (plate.mass * omega**2))


@dataclass(frozen=True)
class ThermalPlateReport:
    omega_12: float
    rms_amplitude: float
    geometric_factor: float
    time_suppression: float
    effective_delta_d2: float
    dephasing_casimir: float
    dephasing_dipole: float


def dephasing_per_offset(config: ExperimentConfig, dt: float = DEFAULT_DT, probe: float = 1e-15) -> tuple[float, float]:
    """Linear response d(phi_d)/d(delta_d2) for (Casimir, dipole), in rad/m."""
    d = config.schedule.initial_distance_d
    near = propagate(config, dt, initial_distance=d - probe)
    far = propagate(config, dt, initial_distance=d + probe)
    c, dd = dephasing_accumulation(near, far, config.mass)
    return c / probe, dd / probe


def thermal_dephasing_budget(
    config: ExperimentConfig,
    plate: PlateSpec | None = None,
    omega: float | None = None,
    dt: float = DEFAULT_DT,
    constants: PhysicalConstants = CONSTANTS,
) -> ThermalPlateReport:
    """Effective arm offset and dephasing from thermal motion of the (1, 2) mode.

    The RMS amplitude is reduced by dx_max / L (only odd modes tilt the plate
    under a centred superposition) and by 2 pi / (omega T), T being the whole
    protocol time over which the oscillating offset averages out.
    """
    plate = config.plate if plate is None else plate
    omega = clamped_plate_frequency(1, 2, plate) if omega is None else omega
    rms = thermal_rms(plate, omega, constants)
    k = split_acceleration(config.schedule, config.mass.mass, constants)
    dx_max = k * config.schedule.tau_a**2
    geometric = dx_max / plate.side_length_L
    suppression = 2 * math.pi / (omega * config.schedule.total_time)
    effective = rms * geometric * suppression
    sc, sd = dephasing_per_offset(config, dt)
    return ThermalPlateReport(omega, rms, geometric, suppression, effective, sc * effective, sd * effective)


def static_deflection_dephasing(
    config: ExperimentConfig,
    force: float,
    plate: PlateSpec | None = None,
    dt: float = DEFAULT_DT,
) -> tuple[float, float]:
    """Extra (Casimir, dipole) dephasing from a static plate bend, held for the whole run.

    Branch ``|0>`` sits over the midpoint and ``|1>`` at ``a = dx_max``; their
    plate distances differ by the difference in deflection at those points.
    """
    plate = config.plate if plate is None else plate
    k = split_acceleration(config.schedule, config.mass.mass)
    dx_max = k * config.schedule.tau_a**2
    offset = deflection(force, 0.0, plate) - deflection(force, min(dx_max, plate.side_length_L / 2), plate)
    traj = propagate(config, dt)
    if traj.collided:
        raise CollisionError("nominal trajectory collides", traj.impact_time)
    z = traj.z[:-1]
    gc, gd = dephasing_rates(z, z + offset, config.mass)
    return float(np.sum(gc) * dt), float(np.sum(gd) * dt)
