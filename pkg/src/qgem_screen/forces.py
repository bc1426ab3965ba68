"""Closed-form Casimir-Polder and image-dipole laws.

Forces are returned as positive magnitudes pointing toward the plate. The
static dielectric response (frequency-independent epsilon) and the
retarded (z >> wavelength) Casimir-Polder limit are assumed throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from qgem_screen.core import CONSTANTS, PhysicalConstants, TestMassSpec


class GeometryError(ValueError):
    """Separation below the contact distance."""


def casimir_sphere_sphere_potential(
    spec: TestMassSpec, separation: float, constants: PhysicalConstants = CONSTANTS
) -> float:
    """Casimir-Polder energy of two identical dielectric spheres (J, negative)."""
    R = spec.radius
    if separation <= 2 * R:
        raise GeometryError(f"spheres overlap: separation {separation} <= 2R = {2 * R}")
    return -(23 * constants.hbar * constants.c / (4 * math.pi)) * R**6 / separation**7 * spec.clausius_mossotti**2


def minimal_distance(density: float, epsilon: float, constants: PhysicalConstants = CONSTANTS) -> float:
    """Separation at which gravity exceeds the sphere-sphere Casimir energy tenfold."""
    if not density > 0:
        raise ValueError("density must be positive")
    if not epsilon > 1:
        raise ValueError("epsilon must exceed 1")
    cm = (epsilon - 1) / (epsilon + 2)
    inner = (230 / (4 * math.pi)) * (constants.hbar * constants.c / constants.G) * (3 / (4 * math.pi * density) * cm) ** 2
    return inner ** (1 / 6)


def casimir_plate_coefficient(spec: TestMassSpec, constants: PhysicalConstants = CONSTANTS) -> float:
    """C such that F_casimir = C / z**5."""
    return (3 * constants.hbar * constants.c / (2 * math.pi)) * spec.clausius_mossotti * 3 * spec.mass / (4 * math.pi * spec.density)


def casimir_plate_potential(spec: TestMassSpec, z: float, constants: PhysicalConstants = CONSTANTS) -> float:
    if z <= spec.radius:
        raise GeometryError(f"sphere touches the plate: z = {z} <= R = {spec.radius}")
    return -3 * constants.hbar * constants.c * spec.polarizability_volume / (8 * math.pi * z**4)


def casimir_plate_force(spec: TestMassSpec, z: float, constants: PhysicalConstants = CONSTANTS) -> float:
    if z <= spec.radius:
        raise GeometryError(f"sphere touches the plate: z = {z} <= R = {spec.radius}")
    return casimir_plate_coefficient(spec, constants) / z**5


def dipole_plate_coefficient(p: float, theta: float, constants: PhysicalConstants = CONSTANTS) -> float:
    """D such that F_dipole = D / z**4."""
    return 3 * p**2 * (1 + math.cos(theta) ** 2) / (16 * 4 * math.pi * constants.eps0)


def dipole_plate_force(p: float, theta: float, z: float, constants: PhysicalConstants = CONSTANTS) -> float:
    if z <= 0:
        raise GeometryError(f"z must be positive, got {z}")
    return dipole_plate_coefficient(p, theta, constants) / z**4


def dipole_image_potential(p: float, theta: float, z: float, constants: PhysicalConstants = CONSTANTS) -> float:
    """Interaction energy of a point dipole with its image in a grounded plane.

    Evaluates -p1 . E2 for the mirror dipole at distance 2z. The value is the
    full dipole-image energy; the energy of the physical configuration is half
    of it, and its negative z-gradient reproduces :func:`dipole_plate_force`.
    """
    if z <= 0:
        raise GeometryError(f"z must be positive, got {z}")
    r = 2 * z
    # dipole p1 = p (sin t, 0, cos t); image p2 = p (-sin t, 0, cos t); r along z
    p1 = (p * math.sin(theta), 0.0, p * math.cos(theta))
    p2 = (-p * math.sin(theta), 0.0, p * math.cos(theta))
    rz = r
    E2 = tuple((3 * p2[2] * rz * (rz if i == 2 else 0.0)) / r**5 - p2[i] / r**3 for i in range(3))
    return -sum(a * b for a, b in zip(p1, E2)) / (4 * math.pi * constants.eps0)


def dipole_plate_potential(p: float, theta: float, z: float, constants: PhysicalConstants = CONSTANTS) -> float:
    """Energy whose negative derivative is the image force (half the image pair energy)."""
    return 0.5 * dipole_image_potential(p, theta, z, constants)


def induced_dipole(spec: TestMassSpec, E0: float, constants: PhysicalConstants = CONSTANTS) -> float:
    if E0 < 0:
        raise ValueError("E0 must be non-negative")
    return 4 * math.pi * constants.eps0 * spec.polarizability_volume * E0


@dataclass(frozen=True)
class ForceEvaluation:
    casimir_N: float
    dipole_N: float
    z_at: float
    total_N: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "total_N", self.casimir_N + self.dipole_N)


def evaluate_forces(spec: TestMassSpec, z: float, theta: float | None = None, constants: PhysicalConstants = CONSTANTS) -> ForceEvaluation:
    theta = spec.dipole_angle_theta if theta is None else theta
    return ForceEvaluation(
        casimir_N=casimir_plate_force(spec, z, constants),
        dipole_N=dipole_plate_force(spec.dipole_moment, theta, z, constants),
        z_at=z,
    )
