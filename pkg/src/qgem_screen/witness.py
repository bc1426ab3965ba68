"""Two-qubit spin state under decoherence/dephasing and the PPT entanglement witness.

Basis order is |00>, |01>, |10>, |11>. The witness is built numerically from
the partially transposed state; the Pauli-basis operator and the closed-form
expectation are kept as reference evaluators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_SLACK = 1e-10
JACOBI_TOL = 1e-14


def jacobi_eigh(matrix: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a small Hermitian matrix by cyclic complex Jacobi rotations.

    Returns eigenvalues in ascending order and the matching unit eigenvectors
    as columns. Iterates until the off-diagonal Frobenius norm drops below
    ``tol`` (relative to the matrix norm when that exceeds one).
    """
    A = np.array(matrix, dtype=complex)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    if not np.allclose(A, A.conj().T, atol=HERMITIAN_TOL, rtol=0):
        raise ValueError("matrix is not Hermitian")
    A = 0.5 * (A + A.conj().T)
    V = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(A)))
    off_mask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        if math.sqrt(float(np.sum(np.abs(A[off_mask]) ** 2))) < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                b = abs(apq)
                if b < 1e-300:
                    continue
                phase = apq / b
                theta = (A[q, q].real - A[p, p].real) / (2 * b)
                if abs(theta) > 1e150:
                    t = 0.5 / theta  # theta^2 would overflow
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                # U = diag(1, conj(phase)) on (p, q) followed by the real rotation
                U = np.eye(n, dtype=complex)
                U[p, p] = c
                U[p, q] = s
                U[q, p] = -s * phase.conjugate()
                U[q, q] = c * phase.conjugate()
                A = U.conj().T @ A @ U
                A[p, q] = A[q, p] = 0.0
                V = V @ U
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    w = np.real(np.diag(A))
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def _canonical_phase(vec: np.ndarray) -> np.ndarray:
    for x in vec:
        if abs(x) > 1e-12:
            return vec * (abs(x) / x)
    return vec


def min_eigenpair(matrix: np.ndarray, degeneracy_tol: float = 1e-12) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue and a deterministic eigenvector for it.

    Among (near-)degenerate minimal eigenvectors the one with the
    lexicographically largest (real, imag) components after phase fixing wins.
    """
    w, V = jacobi_eigh(matrix)
    lam = w[0]
    candidates = [_canonical_phase(V[:, i]) for i in range(len(w)) if w[i] - lam <= degeneracy_tol]
    best = max(candidates, key=lambda v: tuple(np.round(np.column_stack([v.real, v.imag]).ravel(), 12)))
    return float(lam), best


@dataclass(frozen=True, eq=False)
class DensityMatrix4:
    entries: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.entries, dtype=complex)
        if rho.shape != (4, 4):
            raise ValueError("density matrix must be 4x4")
        if not np.allclose(rho, rho.conj().T, atol=HERMITIAN_TOL, rtol=0):
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1) > TRACE_TOL:
            raise ValueError(f"density matrix trace {np.trace(rho).real} != 1")
        w, _ = jacobi_eigh(rho)
        if w[0] < -PSD_SLACK:
            raise ValueError(f"density matrix is not positive semidefinite (min eigenvalue {w[0]})")
        rho = rho.copy()
        rho.setflags(write=False)
        object.__setattr__(self, "entries", rho)

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.entries @ self.entries)))


def build_density_matrix(delta_phi: float, phi_d: float, gamma: float, t: float) -> DensityMatrix4:
    """Spin state after the protocol with entanglement phase, dephasing and decoherence.

    Single-index coherences decay as exp(-gamma t), double-index ones (|00><11|,
    |01><10|) as exp(-2 gamma t).
    """
    if gamma < 0 or t < 0:
        raise ValueError("gamma and t must be non-negative")
    g1 = math.exp(-gamma * t)
    g2 = g1 * g1
    e = lambda x: complex(math.cos(x), math.sin(x))  # noqa: E731
    dp, pd = delta_phi, phi_d
    rho = np.array(
        [
            [1, e(-dp + pd) * g1, e(-dp) * g1, e(pd) * g2],
            [e(dp - pd) * g1, 1, e(-pd) * g2, e(dp) * g1],
            [e(dp) * g1, e(pd) * g2, 1, e(dp + pd) * g1],
            [e(-pd) * g2, e(-dp) * g1, e(-dp - pd) * g1, 1],
        ],
        dtype=complex,
    ) / 4
    return DensityMatrix4(rho)


def partial_transpose(rho: np.ndarray, qubit: int = 1) -> np.ndarray:
    """Transpose the given qubit (0 = first, 1 = second) of a 4x4 operator."""
    r = np.asarray(rho).reshape(2, 2, 2, 2)  # (a, b, a', b')
    if qubit == 1:
        r = r.transpose(0, 3, 2, 1)
    elif qubit == 0:
        r = r.transpose(2, 1, 0, 3)
    else:
        raise ValueError("qubit must be 0 or 1")
    return r.reshape(4, 4)


@dataclass(frozen=True, eq=False)
class WitnessOutcome:
    expectation: float
    min_ppt_eigenvalue: float
    entangled: bool
    witness_matrix: np.ndarray


def ppt_witness(rho: DensityMatrix4 | np.ndarray, qubit: int = 1) -> WitnessOutcome:
    """W = (|l><l|)^T for the minimal eigenvector of rho^T; Tr(W rho) < 0 certifies entanglement."""
    if not isinstance(rho, DensityMatrix4):
        rho = DensityMatrix4(np.asarray(rho, dtype=complex))
    m = rho.entries
    lam, vec = min_eigenpair(partial_transpose(m, qubit))
    W = partial_transpose(np.outer(vec, vec.conj()), qubit)
    value = np.trace(W @ m)
    if abs(value.imag) > 1e-10:
        raise ArithmeticError(f"witness expectation has imaginary part {value.imag}")
    expectation = float(value.real)
    return WitnessOutcome(expectation, lam, expectation < 0, W)


_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)

PAULI_WITNESS = np.kron(_I, _I) - np.kron(_X, _X) + np.kron(_Z, _Y) + np.kron(_Y, _Z)


def pauli_witness_expectation(rho: DensityMatrix4 | np.ndarray) -> float:
    """Tr(W rho) with W = II - XX + ZY + YZ (no normalisation; four times the projector form)."""
    m = rho.entries if isinstance(rho, DensityMatrix4) else np.asarray(rho)
    return float(np.real(np.trace(PAULI_WITNESS @ m)))


def closed_form_witness(delta_phi: float, phi_d: float, gamma: float, t: float) -> float:
    if gamma < 0 or t < 0:
        raise ValueError("gamma and t must be non-negative")
    g = math.exp(-gamma * t)
    return 1 - g * (-math.sin(delta_phi) * (1 + math.cos(phi_d)) + math.cos(phi_d) * g)


def first_order_witness(delta_phi: float, gamma: float, t: float) -> float:
    """Linearisation of :func:`closed_form_witness` at small angle and gamma t (phi_d = 0)."""
    return 2 * gamma * t + 2 * delta_phi


def detection_threshold(n_trials: int, sigma_multiplier: float = 5.0) -> float:
    """Smallest detectable phase: sigma_multiplier shot-noise widths 1/sqrt(N)."""
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    return sigma_multiplier / math.sqrt(n_trials)


def entanglement_condition(phi_eff: float, gamma: float, t: float) -> bool:
    if gamma < 0 or t < 0:
        raise ValueError("gamma and t must be non-negative")
    return abs(phi_eff) > 2 * gamma * t


def witness_report(delta_phi: float, phi_d: float, gamma: float, t: float) -> dict:
    """JSON-ready record of one witness evaluation."""
    rho = build_density_matrix(delta_phi, phi_d, gamma, t)
    out = ppt_witness(rho)
    return {
        "inputs": {"delta_phi_rad": delta_phi, "phi_d_rad": phi_d, "gamma_hz": gamma, "t_s": t},
        "expectation": out.expectation,
        "min_ppt_eigenvalue": out.min_ppt_eigenvalue,
        "entangled": out.entangled,
        "pauli_expectation": pauli_witness_expectation(rho),
        "closed_form_expectation": closed_form_witness(delta_phi, phi_d, gamma, t),
        "entanglement_condition": entanglement_condition(2 * delta_phi, gamma, t),
    }
