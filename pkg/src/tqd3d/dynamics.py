"""Fixed-step RK4 evolution for pure states and density matrices, plus observables.

Pure-state runs live on the 8-dim invariant subspace; open-system runs use the
full 80-dim space because spontaneous emission leaves the subspace.  The
dissipator is precomputed once as a sparse superoperator acting on the
row-major vectorization of rho, so each right-hand side costs two dense
matrix products plus one sparse matvec.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from . import hilbert
from .hilbert import HilbertSpace


class IntegratorInstabilityError(RuntimeError):
    """Norm or trace drift beyond tolerance; reduce dt."""


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 0.002
    record_every: int = 50

    def __post_init__(self):
        if self.dt <= 0 or self.record_every < 1:
            raise ValueError("dt must be positive and record_every >= 1")


@dataclass
class SimResult:
    """Recorded time series from one evolution."""

    times: np.ndarray
    populations: np.ndarray  # (n_times, n_tracked + 1); last column = leaked
    fidelity: np.ndarray
    final_state: np.ndarray  # vector (pure) or matrix (density)
    metadata: dict = field(default_factory=dict)

    @property
    def final_fidelity(self) -> float:
        return float(self.fidelity[-1])


def target_state(space: HilbertSpace) -> np.ndarray:
    """Equal superposition of |g0,g0,vac>, |gL,gL,vac>, |gR,gR,vac>."""
    sub = hilbert.build_subspace()
    vec = np.zeros(sub.dim, dtype=complex)
    vec[[0, 6, 7]] = 1.0 / np.sqrt(3.0)
    if space.dim == sub.dim:
        return vec
    return hilbert.embed(vec, sub, space)


def fidelity(state: np.ndarray, target: np.ndarray) -> float:
    """|<target|psi>|^2 for vectors, <target|rho|target> for matrices."""
    target = np.asarray(target)
    state = np.asarray(state)
    if state.shape[-1] != target.shape[0]:
        raise ValueError(
            f"dimension mismatch: state {state.shape} vs target {target.shape}"
        )
    if state.ndim == 1:
        return float(np.abs(np.vdot(target, state)) ** 2)
    if state.ndim == 2:
        return float(np.real(target.conj() @ state @ target))
    raise ValueError("state must be a vector or a square matrix")


def evolve_schrodinger(
    h_of_t: Callable[[float], np.ndarray],
    psi0: np.ndarray,
    t_f: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    tracked: np.ndarray | None = None,
    target: np.ndarray | None = None,
    norm_tol: float = 1e-6,
) -> SimResult:
    """Integrate i d/dt psi = H(t) psi with classic RK4.

    tracked: indices whose |amplitude|^2 is recorded (defaults to all);
    target: state against which the fidelity trace is computed.
    """
    psi = np.array(psi0, dtype=complex)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-9:
        raise ValueError("psi0 must be normalized")
    dim = psi.size
    if tracked is None:
        tracked = np.arange(dim)
    if target is None:
        target = np.zeros(dim, dtype=complex)
        target[0] = 1.0

    n_steps = int(round(t_f / cfg.dt))
    dt = t_f / n_steps  # land exactly on t_f
    rec_idx = list(range(0, n_steps + 1, cfg.record_every))
    if rec_idx[-1] != n_steps:
        rec_idx.append(n_steps)
    times, pops, fids = [], [], []

    def record(step, psi):
        times.append(step * dt)
        p = np.abs(psi[tracked]) ** 2
        total = float(np.sum(np.abs(psi) ** 2))
        pops.append(np.concatenate([p, [max(0.0, total - p.sum())]]))
        fids.append(fidelity(psi, target))

    h_next = h_of_t(0.0)
    max_drift = 0.0
    rec_set = set(rec_idx)
    record(0, psi)
    for step in range(n_steps):
        t = step * dt
        h0 = h_next
        h_half = h_of_t(t + dt / 2)
        h_next = h_of_t(t + dt)
        k1 = -1j * (h0 @ psi)
        k2 = -1j * (h_half @ (psi + 0.5 * dt * k1))
        k3 = -1j * (h_half @ (psi + 0.5 * dt * k2))
        k4 = -1j * (h_next @ (psi + dt * k3))
        psi = psi + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if (step + 1) in rec_set:
            drift = abs(np.linalg.norm(psi) - 1.0)
            max_drift = max(max_drift, drift)
            if drift > norm_tol:
                raise IntegratorInstabilityError(
                    f"norm drift {drift:.2e} > {norm_tol:.0e} at t={t + dt:.4g}; "
                    "reduce dt"
                )
            record(step + 1, psi)

    return SimResult(
        times=np.array(times),
        populations=np.array(pops),
        fidelity=np.array(fids),
        final_state=psi,
        metadata={"max_norm_drift": max_drift, "dt": dt, "n_steps": n_steps},
    )


def dissipator_superoperator(
    channels: list[tuple[np.ndarray, float]], dim: int
) -> sp.csr_matrix:
    """Sparse superoperator D with D vec(rho) = sum_c rate_c (L rho L+ - {L+L, rho}/2).

    Row-major vectorization: vec(A X B) = (A kron B^T) vec(X).
    """
    total = sp.csr_matrix((dim * dim, dim * dim), dtype=complex)
    eye = sp.identity(dim, dtype=complex, format="csr")
    for op, rate in channels:
        if rate == 0.0:
            continue
        lop = sp.csr_matrix(op)
        ldl = (lop.conj().T @ lop).tocsr()
        total = total + rate * (
            sp.kron(lop, lop.conj(), format="csr")
            - 0.5 * sp.kron(ldl, eye, format="csr")
            - 0.5 * sp.kron(eye, ldl.T, format="csr")
        )
    return total.tocsr()


def evolve_lindblad(
    h_of_t: Callable[[float], np.ndarray],
    channels: list[tuple[np.ndarray, float]],
    rho0: np.ndarray,
    t_f: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    tracked: np.ndarray | None = None,
    target: np.ndarray | None = None,
    trace_tol: float = 1e-4,
    positivity_tol: float = 1e-5,
    check_positivity: bool = True,
) -> SimResult:
    """Integrate the master equation with RK4, symmetrizing rho each step.

    Trace drift beyond trace_tol raises; negative eigenvalues beyond
    positivity_tol are recorded as warnings in the metadata, not fixed up.
    """
    rho = np.array(rho0, dtype=complex)
    dim = rho.shape[0]
    if hilbert.max_nonhermiticity(rho) > 1e-9 or abs(np.trace(rho).real - 1.0) > 1e-6:
        raise ValueError("rho0 must be Hermitian with unit trace")
    if tracked is None:
        tracked = np.arange(dim)
    if target is None:
        target = np.zeros(dim, dtype=complex)
        target[0] = 1.0

    dissipator = dissipator_superoperator(channels, dim)
    has_dissipation = dissipator.nnz > 0

    def rhs(h, rho):
        out = -1j * (h @ rho - rho @ h)
        if has_dissipation:
            out += (dissipator @ rho.reshape(-1)).reshape(dim, dim)
        return out

    n_steps = int(round(t_f / cfg.dt))
    dt = t_f / n_steps
    rec_idx = list(range(0, n_steps + 1, cfg.record_every))
    if rec_idx[-1] != n_steps:
        rec_idx.append(n_steps)
    rec_set = set(rec_idx)
    times, pops, fids = [], [], []
    warnings: list[str] = []
    max_trace_drift = 0.0
    min_eigenvalue = 0.0

    def record(step, rho):
        nonlocal min_eigenvalue
        times.append(step * dt)
        diag = np.real(np.diag(rho))
        p = diag[tracked]
        pops.append(np.concatenate([p, [max(0.0, diag.sum() - p.sum())]]))
        fids.append(fidelity(rho, target))
        if check_positivity:
            lam_min = float(np.linalg.eigvalsh(rho)[0])
            min_eigenvalue = min(min_eigenvalue, lam_min)
            if lam_min < -positivity_tol:
                warnings.append(
                    f"eigenvalue {lam_min:.2e} < -{positivity_tol:.0e} at t={step * dt:.4g}"
                )

    h_next = h_of_t(0.0)
    record(0, rho)
    for step in range(n_steps):
        t = step * dt
        h0 = h_next
        h_half = h_of_t(t + dt / 2)
        h_next = h_of_t(t + dt)
        k1 = rhs(h0, rho)
        k2 = rhs(h_half, rho + 0.5 * dt * k1)
        k3 = rhs(h_half, rho + 0.5 * dt * k2)
        k4 = rhs(h_next, rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        rho = 0.5 * (rho + rho.conj().T)
        if (step + 1) in rec_set:
            drift = abs(np.trace(rho).real - 1.0)
            max_trace_drift = max(max_trace_drift, drift)
            if drift > trace_tol:
                raise IntegratorInstabilityError(
                    f"trace drift {drift:.2e} > {trace_tol:.0e} at t={t + dt:.4g}; "
                    "reduce dt"
                )
            record(step + 1, rho)

    return SimResult(
        times=np.array(times),
        populations=np.array(pops),
        fidelity=np.array(fids),
        final_state=rho,
        metadata={
            "max_trace_drift": max_trace_drift,
            "min_eigenvalue": min_eigenvalue,
            "positivity_warnings": warnings,
            "dt": dt,
            "n_steps": n_steps,
        },
    )
