"""Acceptance criteria 1-10, one PASS/FAIL line each.

Lines are printed as they are produced and repeated in the pytest terminal
summary. Run ``python3 tests/test_acceptance.py`` to get only the report.
Expected misses are left failing; the analysis lives in the decisions ledger.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from qgem_screen.core import DEFAULT_DIPOLE, ExperimentConfig, ImbalanceSpec, PlateSpec, TestMassSpec
from qgem_screen.dynamics import convergence_check, gradient_for_width, propagate
from qgem_screen.forces import casimir_plate_force, casimir_plate_potential, dipole_plate_force, dipole_plate_potential, minimal_distance
from qgem_screen.phase import evaluate
from qgem_screen.plate import (
    clamped_plate_frequency,
    deflection,
    deflection_thickness_form,
    net_imbalance_force,
    thermal_dephasing_budget,
    thermal_rms,
)
from qgem_screen.sensitivity import monte_carlo, sweep
from qgem_screen.witness import (
    build_density_matrix,
    closed_form_witness,
    detection_threshold,
    entanglement_condition,
    first_order_witness,
    pauli_witness_expectation,
    ppt_witness,
)

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # standalone run outside pytest
    ACCEPTANCE_LINES = []

CFG = ExperimentConfig()
OMEGA12_REFERENCE = 2 * math.pi * 35.6e3


def record(cid: str, label: str, ok: bool, detail: str) -> bool:
    line = f"[{'PASS' if ok else 'FAIL'}] C{cid:<4} {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def within_rel(cid, label, value, target, tol, scale=1.0, unit=""):
    dev = abs(value - target) / abs(target)
    ok = dev <= tol
    detail = f"{value / scale:.4g} {unit} vs {target / scale:.4g} {unit} (dev {dev:.2%}, tol {tol:.0%})"
    assert record(cid, label, ok, detail), detail


# --- 1 --------------------------------------------------------------------


def test_c1_minimal_distance():
    within_rel("1", "minimal_distance(3500, 5.1)", minimal_distance(3500, 5.1), 157e-6, 0.01, 1e-6, "um")


# --- 2, 3 -----------------------------------------------------------------


@pytest.mark.parametrize("z0, target", [(20e-6, 20e-6), (13e-6, 12e-6), (10e-6, 5e-6)])
def test_c2_casimir_trajectories(z0, target):
    tr = propagate(CFG.with_schedule(initial_distance_d=z0), include_dipole=False)
    assert not tr.collided
    within_rel("2", f"Casimir-only z(1 s) from {z0 * 1e6:g} um", tr.final_z, target, 0.10, 1e-6, "um")


@pytest.mark.parametrize("z0, target", [(100e-6, 100e-6), (50e-6, 42e-6), (41e-6, 16e-6)])
def test_c3_dipole_trajectories(z0, target):
    tr = propagate(CFG.with_schedule(initial_distance_d=z0))
    assert not tr.collided
    within_rel("3", f"Casimir+dipole z(1 s) from {z0 * 1e6:g} um", tr.final_z, target, 0.10, 1e-6, "um")


# --- 4 --------------------------------------------------------------------

TABLE1 = [(1e-14, 83e-6, 29e-6, 16e-6), (1e-13, 53e-6, 1.4e-6, 11e-6), (1e-12, 35e-6, 0.08e-6, 9e-6)]


@pytest.mark.parametrize("mass, sep, dx, z_final", TABLE1)
def test_c4_table1(mass, sep, dx, z_final):
    W = CFG.plate.thickness_W
    sched = CFG.schedule
    cfg = CFG.with_mass(mass=mass).with_schedule(
        initial_distance_d=(sep - W) / 2, dB_dz=gradient_for_width(dx, sched, mass)
    )
    res = evaluate(cfg)
    phi_ok = abs(res.magnitude - 0.10) / 0.10 <= 0.15
    z_ok = abs(res.final_z - z_final) / z_final <= 0.20
    detail = (f"|Phi| = {res.magnitude:.4f} rad vs 0.10 (tol 15%), "
              f"z(1 s) = {res.final_z * 1e6:.2f} um vs {z_final * 1e6:g} um (tol 20%)")
    assert record("4", f"Table I row m = {mass:g} kg", phi_ok and z_ok, detail), detail


# --- 5 --------------------------------------------------------------------


@pytest.mark.parametrize(
    "axis, max_value, target, scale, unit",
    [
        ("delta_d1", 1e-6, 0.48e-6, 1e-6, "um"),
        ("delta_d2", 1e-6, 0.46e-6, 1e-6, "um"),
        ("delta_dB", 1e5, 3.43e4, 1.0, "T/m"),
        ("delta_theta", math.pi / 2, 0.17 * math.pi, math.pi, "pi rad"),
    ],
)
def test_c5_sensitivity_bounds(axis, max_value, target, scale, unit):
    res = sweep(CFG, axis, max_value, 11, threshold=0.12)
    assert res.tolerance_bound is not None, f"{axis}: threshold never reached"
    within_rel("5", f"12% tolerance bound on {axis}", res.tolerance_bound, target, 0.10, scale, unit)


# --- 6 --------------------------------------------------------------------


def test_c6_casimir_dephasing():
    res = evaluate(CFG.with_imbalance(delta_d2=2.8e-15))
    within_rel("6", "phi_d Casimir at delta_d2 = 2.8 fm", res.dephasing_casimir, 0.1, 0.30, 1.0, "rad")


def test_c6_dipole_dephasing():
    res = evaluate(CFG.with_imbalance(delta_d2=1e-17))
    within_rel("6", "phi_d dipole at delta_d2 = 0.01 fm", res.dephasing_dipole, 0.1, 0.30, 1.0, "rad")


# --- 7 --------------------------------------------------------------------


def test_c7_mode_frequency():
    w = clamped_plate_frequency(1, 2, CFG.plate)
    within_rel("7", "omega_12 / 2 pi", w / (2 * math.pi), 35.6e3, 0.15, 1e3, "kHz")


def test_c7_thermal_rms():
    within_rel("7", "thermal rms at reference omega_12", thermal_rms(CFG.plate, OMEGA12_REFERENCE), 298e-15,
               0.02, 1e-15, "fm")


def test_c7_effective_thermal_offset():
    rep = thermal_dephasing_budget(CFG, omega=OMEGA12_REFERENCE)
    own = thermal_dephasing_budget(CFG)
    print(f"       (with the computed omega_12 the offset is {own.effective_delta_d2:.3g} m)")
    within_rel("7", "effective thermal delta_d2", rep.effective_delta_d2, 2.5e-19, 0.20, 1e-19, "e-19 m")


@pytest.mark.parametrize(
    "imbalance, target, label",
    [
        (ImbalanceSpec(delta_d1=0.48e-6), 0.012e-15, "delta_d1 = 0.48 um"),
        (ImbalanceSpec(delta_theta=0.17 * math.pi), 0.002e-15, "delta_theta = 0.17 pi"),
    ],
)
def test_c7_static_deflection(imbalance, target, label):
    F = net_imbalance_force(CFG, imbalance)
    dz = deflection(F, 0.0, CFG.plate)
    ratio = dz / target
    ok = 0.5 <= ratio <= 2.0
    detail = f"{dz * 1e15:.4g} fm vs {target * 1e15:g} fm (ratio {ratio:.2f}, band x0.5-x2); F = {F:.3g} N"
    assert record("7", f"midpoint deflection from {label}", ok, detail), detail


# --- 8 --------------------------------------------------------------------


def test_c8_detection_arithmetic():
    thr = detection_threshold(10000)
    cases = [
        (0.10, 0.05, 0.5, True),
        (0.10, 0.05, 1.0, False),  # boundary: 0.10 is not > 0.10
        (0.0, 0.05, 0.5, False),
        (-0.2, 0.05, 1.0, True),
        (0.1000001, 0.05, 1.0, True),
    ]
    cond_ok = all(entanglement_condition(p, g, t) is want for p, g, t, want in cases)
    ok = thr == 0.05 and cond_ok
    detail = f"detection_threshold(10000) = {thr!r}; |Phi| > 2 gamma t on {len(cases)} cases: {cond_ok}"
    assert record("8", "detection arithmetic", ok, detail), detail


# --- 9 --------------------------------------------------------------------


def test_c9_force_potential_consistency():
    spec = TestMassSpec()
    worst = 0.0
    for z in np.geomspace(5e-6, 500e-6, 40):
        h = z * 1e-6
        for F, V in (
            (casimir_plate_force(spec, z), lambda x: casimir_plate_potential(spec, x)),
            (dipole_plate_force(DEFAULT_DIPOLE, 0.7, z), lambda x: dipole_plate_potential(DEFAULT_DIPOLE, 0.7, x)),
        ):
            fd = (V(z + h) - V(z - h)) / (2 * h)
            worst = max(worst, abs(F - fd) / F)
    assert record("9", "force = -dV/dz (finite difference)", worst < 1e-6, f"max rel err {worst:.2e} (< 1e-6)")


def test_c9_dt_halving():
    worst = max(
        convergence_check(CFG.with_schedule(initial_distance_d=z0), include_dipole=dip)
        for z0, dip in ((13e-6, False), (41e-6, True), (100e-6, True))
    )
    assert record("9", "integrator dt halving", worst < 1e-3, f"max rel change {worst:.2e} (< 1e-3)")


def test_c9_separable_states():
    rng = np.random.default_rng(7)

    def qubit():
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)
        return np.outer(v, v.conj())

    worst = math.inf
    for _ in range(1000):
        w = rng.dirichlet(np.ones(3))
        rho = sum(wi * np.kron(qubit(), qubit()) for wi in w)
        worst = min(worst, ppt_witness(rho).expectation)
    assert record("9", "PPT witness on 1000 separable states", worst >= -1e-10, f"min Tr(W rho) = {worst:.2e}")


def test_c9_bell_state():
    psi = np.array([1, 0, 0, 1]) / math.sqrt(2)
    out = ppt_witness(np.outer(psi, psi))
    ok = abs(out.expectation + 0.5) < 1e-12 and abs(out.min_ppt_eigenvalue + 0.5) < 1e-12
    assert record("9", "Bell-state witness", ok, f"Tr(W rho) = {out.expectation:.15f}")


def test_c9_density_matrix_validity():
    rng = np.random.default_rng(3)
    worst_h = worst_t = 0.0
    worst_psd = math.inf
    for _ in range(500):
        rho = build_density_matrix(*rng.uniform(-math.pi, math.pi, 2), rng.uniform(0, 1), rng.uniform(0, 2)).entries
        worst_h = max(worst_h, np.abs(rho - rho.conj().T).max())
        worst_t = max(worst_t, abs(np.trace(rho) - 1))
        worst_psd = min(worst_psd, np.linalg.eigvalsh(rho).min())
    ok = worst_h <= 1e-12 and worst_t <= 1e-12 and worst_psd >= -1e-10
    detail = f"hermiticity {worst_h:.1e}, trace {worst_t:.1e}, min eigenvalue {worst_psd:.1e}"
    assert record("9", "density matrix Hermitian / unit trace / PSD", ok, detail)


def test_c9_deflection_dual_form():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(1000):
        L = rng.uniform(1e-4, 1e-2)
        plate = PlateSpec(thickness_W=L * rng.uniform(1e-4, 0.1), side_length_L=L, youngs_modulus_E=rng.uniform(1e9, 1e12))
        F, a = rng.uniform(1e-20, 1e-10), rng.uniform(-L / 2, L / 2)
        d1, d2 = deflection(F, a, plate), deflection_thickness_form(F, a, plate)
        if d1 > 0:
            worst = max(worst, abs(d1 - d2) / d1)
    assert record("9", "deflection dual-form identity", worst < 1e-12, f"max rel diff {worst:.1e}")


def test_c9_monte_carlo_reproducibility():
    sig = {"delta_d1": 0.1e-6, "delta_dB": 1e4}
    a = monte_carlo(CFG, sig, 40, seed=2024, dt=1e-4)
    b = monte_carlo(CFG, sig, 40, seed=2024, dt=1e-4)
    ok = np.array_equal(a.phase_samples, b.phase_samples) and a.mean == b.mean
    assert record("9", "Monte-Carlo seed reproducibility", ok, f"40 samples bit-identical: {ok}")


# --- 10 -------------------------------------------------------------------


def test_c10_first_order_witness():
    # small angles along a ray: residual of the linearisation must shrink quadratically
    residuals = []
    for eps in (1e-2, 5e-3, 2.5e-3):
        dphi, gt = -eps, 0.5 * eps
        rho = build_density_matrix(dphi, 0.0, gt, 1.0)
        numeric = pauli_witness_expectation(rho)
        assert numeric == pytest.approx(4 * ppt_witness(rho).expectation, abs=1e-14)
        residuals.append(abs(numeric - first_order_witness(dphi, gt, 1.0)))
    ratios = [residuals[i] / residuals[i + 1] for i in range(2)]
    quadratic = all(3.5 < r < 4.5 for r in ratios)
    eps = 1e-3
    numeric = pauli_witness_expectation(build_density_matrix(-eps, 0.0, 0.5 * eps, 1.0))
    printed = -eps + 0.5 * eps
    expanded = 2 * (-eps) + 2 * 0.5 * eps
    close = abs(numeric - expanded) < 1e-5
    detail = (f"Tr(W rho) = {numeric:.6e} vs 2 gamma t + 2 dphi = {expanded:.6e}; residual ratios "
              f"{ratios[0]:.2f}, {ratios[1]:.2f} (quadratic)")
    assert record("10", "first-order witness expansion", quadratic and close, detail), detail
    info = f"[INFO] C10   printed gamma t + dphi = {printed:.3e} is off by a factor {expanded / printed:.3f}"
    ACCEPTANCE_LINES.append(info)
    print(info)


def test_c10_closed_form_agrees_with_numeric():
    # The fixed Pauli-basis witness is four times the optimal projector witness wherever it
    # detects entanglement (dphi < 0); elsewhere the adaptive witness differs but the verdicts agree.
    worst = 0.0
    verdicts_agree = True
    for dphi in np.linspace(-0.3, 0.0, 13):
        for gt in (0.0, 0.025, 0.1, 0.5):
            rho = build_density_matrix(dphi, 0.0, gt, 1.0)
            numeric = ppt_witness(rho).expectation
            closed = closed_form_witness(dphi, 0.0, gt, 1.0)
            verdicts_agree &= (numeric < -1e-15) == (closed < -1e-15)
            if closed < 0:
                worst = max(worst, abs(4 * numeric - closed))
    ok = worst < 1e-12 and verdicts_agree
    detail = f"max |4 Tr(W rho) - closed form| where detected {worst:.1e}; verdicts agree: {verdicts_agree}"
    assert record("10", "PPT witness vs closed form", ok, detail), detail


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
