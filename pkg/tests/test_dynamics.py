import csv

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qgem_screen.core import ExperimentConfig, GeometryState
from qgem_screen.dynamics import (
    CollisionError,
    convergence_check,
    gradient_for_width,
    n_steps,
    propagate,
    pure_python_trajectory,
    step,
    superposition_width,
    width_profile,
)

CFG = ExperimentConfig()
SCHED = CFG.schedule

# (g mu_B dB / 2m) tau_a^2 at m = 1e-14 kg, dB = 5e5 T/m, tau_a = 0.25 s
DX_MAX_ORACLE = 2.89812814946875e-05


def test_width_examples():
    assert superposition_width(0.0, SCHED, 1e-14) == 0.0
    assert superposition_width(0.25, SCHED, 1e-14) == pytest.approx(DX_MAX_ORACLE, rel=1e-13)
    assert superposition_width(1.0, SCHED, 1e-14) == 0.0
    with pytest.raises(ValueError):
        superposition_width(1.1, SCHED, 1e-14)
    with pytest.raises(ValueError):
        superposition_width(-0.1, SCHED, 1e-14)


@given(st.floats(0, 1))
def test_width_profile_matches_scalar(t):
    arr = width_profile(np.array([t]), SCHED, 1e-14)
    assert arr[0] == pytest.approx(superposition_width(t, SCHED, 1e-14), abs=1e-20)


def test_width_continuous_at_phase_boundaries():
    eps = 1e-12
    for edge in (0.25, 0.75):
        below = superposition_width(edge - eps, SCHED, 1e-14)
        above = superposition_width(edge + eps, SCHED, 1e-14)
        assert above == pytest.approx(below, rel=1e-9)


@given(st.floats(0, 1))
def test_width_bounded_by_maximum(t):
    assert 0 <= superposition_width(t, SCHED, 1e-14) <= DX_MAX_ORACLE * (1 + 1e-12)


def test_gradient_for_width_inverts_schedule():
    dB = gradient_for_width(DX_MAX_ORACLE, SCHED, 1e-14)
    assert dB == pytest.approx(5e5, rel=1e-13)


def test_step_examples():
    s = GeometryState(0.0, 1e-5, 0.0, 0.0)
    assert step(s, 0.0, 1e-3).z == 1e-5
    drift = step(GeometryState(0.0, 1e-5, 1e-6, 0.0), 0.0, 0.1)
    assert 1e-5 - drift.z == pytest.approx(1e-7, rel=1e-9)
    kick = step(s, 2e-5, 1e-3)
    assert 1e-5 - kick.z == pytest.approx(1e-11, rel=1e-6)
    assert kick.v == pytest.approx(2e-8) and kick.t == pytest.approx(1e-3)
    with pytest.raises(CollisionError):
        step(GeometryState(0.0, 1e-9, 1.0, 0.0), 0.0, 1.0)
    with pytest.raises(ValueError):
        step(s, 0.0, 0.0)


def test_kernel_matches_reference_stepper():
    ref = pure_python_trajectory(CFG, 1e-5, 2000)
    fast = propagate(CFG, 1e-5)
    assert fast.z[2000] == pytest.approx(ref[-1].z, rel=1e-14)
    assert fast.v[2000] == pytest.approx(ref[-1].v, rel=1e-12)


def test_record_structure():
    tr = propagate(CFG)
    first = tr[0]
    assert (first.t, first.z, first.v, first.dx) == (0.0, 41e-6, 0.0, 0.0)
    assert len(tr) == n_steps(1.0, 1e-5) + 1
    assert np.all(np.diff(tr.t) > 0)
    assert np.allclose(np.diff(tr.t), 1e-5, rtol=1e-9)
    assert tr.closest_approach_z == tr.z.min()
    with pytest.raises(ValueError):
        tr.z[0] = 1.0


def test_monotonic_approach():
    tr = propagate(CFG)
    assert np.all(np.diff(tr.z) <= 0)
    assert np.all(tr.v >= 0)


@pytest.mark.parametrize("z0, dipole", [(13e-6, False), (10e-6, False), (41e-6, True), (100e-6, True)])
def test_dt_halving_stability(z0, dipole):
    cfg = CFG.with_schedule(initial_distance_d=z0)
    assert convergence_check(cfg, 1e-5, include_dipole=dipole) < 1e-3
    coarse = propagate(cfg, 1e-5, include_dipole=dipole)
    fine = propagate(cfg, 5e-6, include_dipole=dipole)
    assert abs(fine.closest_approach_z - coarse.closest_approach_z) / coarse.closest_approach_z < 1e-3


def test_casimir_only_mass_independence():
    a = propagate(CFG.with_schedule(initial_distance_d=13e-6), include_dipole=False)
    b = propagate(CFG.with_schedule(initial_distance_d=13e-6).with_mass(mass=1e-15), include_dipole=False)
    assert np.max(np.abs(a.z - b.z) / a.z) < 1e-4


def test_determinism():
    a, b = propagate(CFG), propagate(CFG)
    assert np.array_equal(a.z, b.z) and np.array_equal(a.v, b.v)


def test_forces_disabled_keeps_z_fixed():
    tr = propagate(CFG, include_casimir=False, include_dipole=False)
    assert np.all(tr.z == 41e-6)


def test_collision_truncates():
    tr = propagate(CFG.with_schedule(initial_distance_d=5e-6))
    assert tr.collided and tr.impact_time < 1.0
    assert tr.z[-1] <= CFG.mass.radius
    with pytest.raises(CollisionError):
        propagate(CFG.with_schedule(initial_distance_d=0.5e-6))


def test_dt_must_divide_protocol():
    with pytest.raises(ValueError):
        propagate(CFG, 3e-5)


def test_csv_export(tmp_path):
    tr = propagate(CFG, 1e-4)
    path = tmp_path / "traj.csv"
    tr.to_csv(path, stride=1000)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["t_s", "z_m", "v_mps", "dx_m"]
    assert float(rows[-1][0]) == pytest.approx(1.0)
    assert float(rows[-1][1]) == tr.final_z
