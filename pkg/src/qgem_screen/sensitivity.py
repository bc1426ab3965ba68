"""Imbalance sweeps with bisected tolerance bounds, and Monte-Carlo sampling.

Random offsets come from numpy's Philox counter-based generator: for each
sample a row of four uniforms (axis order d1, d2, dB, theta) is drawn and
mapped to standard normals through the inverse normal CDF. Fixing the seed
fixes the whole stream, independent of thread count or completion order.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from statistics import NormalDist

import numpy as np

from qgem_screen.core import ExperimentConfig
from qgem_screen.dynamics import DEFAULT_DT, CollisionError
from qgem_screen.phase import PhaseResult, evaluate

AXES = ("delta_d1", "delta_d2", "delta_dB", "delta_theta")
DEFAULT_THRESHOLD = 0.12
_BISECT_RTOL = 5e-4
_UNIFORM_SHIFT = 2.0**-54


def worker_count() -> int:
    """Thread cap from ``QGEM_THREADS`` (default: CPU count, at least 1)."""
    raw = os.environ.get("QGEM_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"QGEM_THREADS must be an integer, got {raw!r}") from None
    return max(1, os.cpu_count() or 1)


def _ordered_map(fn, items):
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))  # map preserves input order


@dataclass(frozen=True)
class SweepPoint:
    value: float
    phi_low: float
    phi_high: float
    dephase_casimir: float = 0.0
    dephase_dipole: float = 0.0
    collided: bool = False

    def deviation(self, phi0: float) -> float:
        if self.collided:
            return math.inf
        return max(abs(self.phi_low - phi0), abs(self.phi_high - phi0)) / phi0


@dataclass(frozen=True)
class SweepResult:
    """Phase band per imbalance value; ``tolerance_bound`` is None if never reached in range."""

    axis: str
    points: tuple[SweepPoint, ...]
    tolerance_bound: float | None
    threshold: float = DEFAULT_THRESHOLD
    nominal_phase: float = math.nan
    upper_deviation: tuple[float, ...] = field(default=())
    lower_deviation: tuple[float, ...] = field(default=())

    @property
    def collided_values(self) -> list[float]:
        return [p.value for p in self.points if p.collided]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            unit = "rad" if self.axis == "delta_theta" else ("T_per_m" if self.axis == "delta_dB" else "m")
            w.writerow([f"imbalance_{unit}", "phi_low_rad", "phi_high_rad", "dephase_C_rad", "dephase_D_rad", "collided"])
            for p in self.points:
                w.writerow([repr(p.value), repr(p.phi_low), repr(p.phi_high),
                            repr(p.dephase_casimir), repr(p.dephase_dipole), int(p.collided)])

    def summary(self) -> dict:
        return {
            "axis": self.axis,
            "threshold": self.threshold,
            "nominal_phase_rad": self.nominal_phase,
            "tolerance_bound": self.tolerance_bound,
            "n_points": len(self.points),
            "n_collided": len(self.collided_values),
        }


def _variants(config: ExperimentConfig, axis: str, value: float) -> list[ExperimentConfig]:
    """The perturbed configurations whose phases form the band at ``value``."""
    if axis == "delta_d2":
        return [config.with_imbalance(delta_d2=value, tilt_mode=m) for m in ("symmetric", "asymmetric")]
    if axis in ("delta_d1", "delta_dB", "delta_theta"):
        return [config.with_imbalance(**{axis: value}), config.with_imbalance(**{axis: -value})]
    raise ValueError(f"unknown axis {axis!r}; expected one of {AXES}")


def _evaluate_point(config: ExperimentConfig, axis: str, value: float, dt: float) -> SweepPoint:
    try:
        results: list[PhaseResult] = [evaluate(c, dt) for c in _variants(config, axis, value)]
    except CollisionError:
        return SweepPoint(value, math.nan, math.nan, math.nan, math.nan, collided=True)
    mags = [r.magnitude for r in results]
    dc = max(abs(r.dephasing_casimir) for r in results)
    dd = max(abs(r.dephasing_dipole) for r in results)
    return SweepPoint(value, min(mags), max(mags), dc, dd)


def sweep(
    config: ExperimentConfig,
    axis: str,
    max_value: float,
    n_points: int = 21,
    threshold: float = DEFAULT_THRESHOLD,
    dt: float = DEFAULT_DT,
    refine: bool = True,
) -> SweepResult:
    """Scan ``axis`` over [0, max_value] and bisect the ``threshold`` crossing.

    At each value the band is formed from +value and -value (for delta_d2: the
    symmetric and asymmetric tilts). The relative deviation is the larger band
    edge distance from the unperturbed |Phi|. Collided points are kept in the
    output, flagged, and cut the bisection domain at the first one.
    """
    if axis not in AXES:
        raise ValueError(f"unknown axis {axis!r}; expected one of {AXES}")
    if n_points < 2 or not max_value > 0:
        raise ValueError("need n_points >= 2 and a positive max_value")
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    base = config.with_imbalance(delta_d1=0.0, delta_d2=0.0, delta_dB=0.0, delta_theta=0.0)
    phi0 = evaluate(base, dt).magnitude
    values = np.linspace(0.0, max_value, n_points)
    points = _ordered_map(lambda v: _evaluate_point(base, axis, float(v), dt), values)

    bound = None
    if refine:
        lo = 0.0
        for p in points:
            dev = p.deviation(phi0)
            if p.collided:
                break
            if dev >= threshold:
                bound = _bisect(base, axis, lo, p.value, phi0, threshold, dt)
                break
            lo = p.value
    return SweepResult(
        axis=axis,
        points=tuple(points),
        tolerance_bound=bound,
        threshold=threshold,
        nominal_phase=phi0,
        upper_deviation=tuple((p.phi_high - phi0) / phi0 for p in points),
        lower_deviation=tuple((phi0 - p.phi_low) / phi0 for p in points),
    )


def _bisect(config, axis, lo, hi, phi0, threshold, dt) -> float:
    while hi - lo > _BISECT_RTOL * hi:
        mid = 0.5 * (lo + hi)
        if _evaluate_point(config, axis, mid, dt).deviation(phi0) >= threshold:
            hi = mid
        else:
            lo = mid
    return float(f"{0.5 * (lo + hi):.3g}")


@dataclass(frozen=True, eq=False)
class MonteCarloResult:
    """|Phi_acc| samples under independent Gaussian imbalances (failed samples excluded)."""

    seed: int
    n_samples: int
    phase_samples: np.ndarray
    mean: float
    std: float
    std_of_mean: float
    n_failed: int = 0
    sigmas: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "seed": self.seed,
            "n_samples": self.n_samples,
            "n_ok": int(len(self.phase_samples)),
            "n_failed": self.n_failed,
            "sigmas": dict(self.sigmas),
            "mean_rad": self.mean,
            "std_rad": self.std,
            "std_of_mean_rad": self.std_of_mean,
        }

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["sample", "phi_abs_rad"])
            for i, x in enumerate(self.phase_samples):
                w.writerow([i, repr(float(x))])


def gaussian_offsets(seed: int, n_samples: int) -> np.ndarray:
    """(n_samples, 4) standard normals from Philox(seed) via the inverse normal CDF."""
    u = np.random.Generator(np.random.Philox(seed)).random((n_samples, len(AXES)))
    inv = NormalDist().inv_cdf
    # random() lies in [0, 1); the half-ulp shift keeps inv_cdf away from 0
    return np.vectorize(inv, otypes=[float])(u + _UNIFORM_SHIFT)


def monte_carlo(
    config: ExperimentConfig,
    sigmas: dict[str, float],
    n_samples: int,
    seed: int,
    dt: float = DEFAULT_DT,
) -> MonteCarloResult:
    """Propagate ``n_samples`` runs with independent normal offsets on each axis."""
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    unknown = set(sigmas) - set(AXES)
    if unknown:
        raise ValueError(f"unknown sigma axes: {sorted(unknown)}")
    if any(s < 0 for s in sigmas.values()):
        raise ValueError("sigmas must be non-negative")
    scale = np.array([sigmas.get(a, 0.0) for a in AXES])
    offsets = gaussian_offsets(seed, n_samples) * scale
    base = config.with_imbalance(delta_d1=0.0, delta_d2=0.0, delta_dB=0.0, delta_theta=0.0)

    def run(row) -> float:
        cfg = base.with_imbalance(**{a: float(x) for a, x in zip(AXES, row)})
        try:
            return evaluate(cfg, dt).magnitude
        except (CollisionError, ValueError):
            return math.nan

    values = np.array(_ordered_map(run, offsets))
    ok = values[~np.isnan(values)]
    if len(ok) < 2:
        raise CollisionError(f"only {len(ok)} of {n_samples} samples completed")
    std = float(np.std(ok, ddof=1))
    return MonteCarloResult(
        seed=seed,
        n_samples=n_samples,
        phase_samples=ok,
        mean=float(np.mean(ok)),
        std=std,
        std_of_mean=std / math.sqrt(len(ok)),
        n_failed=int(n_samples - len(ok)),
        sigmas={a: float(sigmas.get(a, 0.0)) for a in AXES},
    )


def write_summary_json(summary: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
