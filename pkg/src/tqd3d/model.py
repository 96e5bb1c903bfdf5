"""Hamiltonians, basis transforms, eigensystem, and collapse channels.

Builds the interaction-picture Hamiltonians of the two-atom bimodal-cavity
system at three levels of description:

* full (8- or 80-dim): laser drives + cavity couplings, resonant or with a
  common detuning on all excited levels;
* effective Lambda (3-dim, basis |phi_1>, |Psi_d>, |psi_3>): after dropping
  the fast +-sqrt(3)g sectors;
* two-level (basis |phi_1>, |psi_3>): after adiabatic elimination of |Psi_d>.

Also provides the counterdiabatic generator i*theta_dot(|phi_1><psi_3| - h.c.)
and its numerical cross-check from the instantaneous-eigenvector formula.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import hilbert, pulses
from .hilbert import HilbertSpace, LevelA, LevelB
from .pulses import SQRT2, PulseKind, PulseSet, StirapParams

SQRT3 = np.sqrt(3.0)


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters in units of the cavity coupling g."""

    g: float = 1.0
    delta: float = 3.6
    t_f: float = 50.0
    kappa: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.g <= 0:
            raise ValueError("g must be positive")
        if self.kappa < 0 or self.gamma < 0:
            raise ValueError("decay rates must be nonnegative")


@dataclass(frozen=True)
class HamiltonianTerms:
    """Lowering-part structure matrices; H(t) is assembled from these.

    drive_a:   |g0><e0| on atom A
    drive_b:   sum_i |g_i><e_i| on atom B
    cavity:    sum_i a_i (|e0><g_i|_A + |e_i><g0|_B), without the g factor
    excited:   projector on all excited levels (detuning term)
    """

    space: HilbertSpace
    drive_a: np.ndarray
    drive_b: np.ndarray
    cavity: np.ndarray
    excited: np.ndarray


def hamiltonian_terms(space: HilbertSpace) -> HamiltonianTerms:
    # Operator products pass through states outside the 8-dim subspace, so the
    # structure matrices are always assembled in the full space and restricted.
    full = hilbert.build_full_space()
    drive_a = hilbert.transition_operator(full, "A", LevelA.e0, LevelA.g0)
    drive_b = hilbert.transition_operator(
        full, "B", LevelB.eL, LevelB.gL
    ) + hilbert.transition_operator(full, "B", LevelB.eR, LevelB.gR)
    cavity = np.zeros((full.dim, full.dim), dtype=complex)
    for lvl_a, lvl_b, mode in ((LevelA.gL, LevelB.eL, "L"), (LevelA.gR, LevelB.eR, "R")):
        a_op = hilbert.annihilation_operator(full, mode)
        cavity += a_op @ hilbert.transition_operator(full, "A", lvl_a, LevelA.e0)
        cavity += a_op @ hilbert.transition_operator(full, "B", LevelB.g0, lvl_b)
    excited = hilbert.excited_projector(full)
    if space.dim != full.dim:
        idx = hilbert.subspace_indices(space, full)
        sel = np.ix_(idx, idx)
        drive_a, drive_b = drive_a[sel], drive_b[sel]
        cavity, excited = cavity[sel], excited[sel]
    return HamiltonianTerms(
        space=space,
        drive_a=drive_a,
        drive_b=drive_b,
        cavity=cavity,
        excited=excited,
    )


def assemble_hamiltonian(
    terms: HamiltonianTerms,
    omega_a: complex,
    omega_b: complex,
    g: float = 1.0,
    delta: float = 0.0,
) -> np.ndarray:
    """H = omega_a*Da + omega_b*Db + g*C + h.c. + delta*P_excited."""
    lower = omega_a * terms.drive_a + omega_b * terms.drive_b + g * terms.cavity
    return lower + lower.conj().T + delta * terms.excited


def h_resonant(
    terms: HamiltonianTerms, params: ModelParams, p: StirapParams, t: float
) -> np.ndarray:
    """Resonant Hamiltonian with the adiabatic Gaussian pulse pair."""
    omega_a, omega_b = pulses.stirap_amplitudes(p, t)
    return assemble_hamiltonian(terms, omega_a, omega_b, g=params.g)


def h_detuned(
    terms: HamiltonianTerms,
    params: ModelParams,
    omega_a_of_t: Callable,
    omega_b_of_t: Callable,
    t: float,
) -> np.ndarray:
    """Detuned alternative-system Hamiltonian with the counterdiabatic drives."""
    return assemble_hamiltonian(
        terms, omega_a_of_t(t), omega_b_of_t(t), g=params.g, delta=params.delta
    )


def make_h_of_t(terms: HamiltonianTerms, params: ModelParams, pulse_set: PulseSet) -> Callable:
    """Callable t -> H(t) for the full model matching the pulse kind.

    STIRAP pulses get the resonant Hamiltonian; TQD pulses get the detuned one.
    """
    detuning = 0.0 if pulse_set.kind is PulseKind.STIRAP else params.delta

    def h_of_t(t):
        omega_a, omega_b = pulse_set.amplitudes(t)
        return assemble_hamiltonian(
            terms, complex(omega_a), complex(omega_b), g=params.g, delta=detuning
        )

    return h_of_t


def symmetric_vectors(sub: HilbertSpace) -> dict[str, np.ndarray]:
    """Even/odd combinations of the degenerate L/R pairs (8-dim vectors)."""
    e = np.eye(8, dtype=complex)
    out = {
        "psi1": (e[2] + e[3]) / SQRT2,
        "psi2": (e[4] + e[5]) / SQRT2,
        "psi3": (e[6] + e[7]) / SQRT2,
        "psi1_minus": (e[2] - e[3]) / SQRT2,
        "psi2_minus": (e[4] - e[5]) / SQRT2,
        "psi3_minus": (e[6] - e[7]) / SQRT2,
    }
    return out


def bright_dark_vectors(sub: HilbertSpace) -> dict[str, np.ndarray]:
    """Dark and bright combinations of |phi_2> and |psi_2> with |psi_1| (8-dim)."""
    e = np.eye(8, dtype=complex)
    sym = symmetric_vectors(sub)
    dark = (e[1] - SQRT2 * sym["psi2"]) / SQRT3
    plus = (SQRT2 * e[1] + SQRT3 * sym["psi1"] + sym["psi2"]) / np.sqrt(6.0)
    minus = (SQRT2 * e[1] - SQRT3 * sym["psi1"] + sym["psi2"]) / np.sqrt(6.0)
    return {"dark": dark, "plus": plus, "minus": minus}


def h_effective_lambda(omega_a: float, omega_b: float) -> np.ndarray:
    """3-dim effective Hamiltonian on (|phi_1>, |Psi_d>, |psi_3>)."""
    h = np.zeros((3, 3), dtype=complex)
    h[0, 1] = omega_a / SQRT3
    h[1, 2] = -SQRT2 * omega_b / SQRT3
    return h + h.conj().T


def h_effective_detuned(
    omega_a_prime: complex, omega_b_prime: complex, delta: float
) -> np.ndarray:
    """3-dim effective Hamiltonian of the detuned system (adds delta on |Psi_d>)."""
    h = np.zeros((3, 3), dtype=complex)
    h[0, 1] = omega_a_prime / SQRT3
    h[1, 2] = -SQRT2 * omega_b_prime / SQRT3
    h = h + h.conj().T
    h[1, 1] = delta
    return h


def h_two_level(
    omega_a_prime: complex, omega_b_prime: complex, delta: float, phase_tol: float = 1e-9
) -> np.ndarray:
    """2-dim Hamiltonian on (|phi_1>, |psi_3>) after eliminating |Psi_d>.

    Requires the phase lock omega_b' = i*omega_a'/sqrt(2), which makes both
    Stark shifts equal (dropped as a global phase) and the coupling
    i*omega_a'^2/(3*delta) purely counterdiabatic.
    """
    expected_b = 1j * omega_a_prime / SQRT2
    scale = max(abs(omega_a_prime), 1.0)
    if abs(omega_b_prime - expected_b) > phase_tol * scale:
        raise ValueError(
            "amplitudes violate the phase lock omega_b' = i*omega_a'/sqrt(2)"
        )
    coupling = 1j * omega_a_prime**2 / (3.0 * delta)
    h = np.zeros((2, 2), dtype=complex)
    h[0, 1] = coupling
    h[1, 0] = np.conj(coupling)
    return h


def h_counterdiabatic(theta_dot: float) -> np.ndarray:
    """3-dim counterdiabatic generator i*theta_dot(|phi_1><psi_3| - |psi_3><phi_1|)."""
    h = np.zeros((3, 3), dtype=complex)
    h[0, 2] = 1j * theta_dot
    h[2, 0] = -1j * theta_dot
    return h


@dataclass(frozen=True)
class Eigensystem:
    """Instantaneous eigensystem of the 3-dim effective Hamiltonian."""

    values: np.ndarray  # (lambda_minus, lambda_0, lambda_plus)
    vectors: np.ndarray  # columns n_minus, n_0, n_plus


def effective_eigensystem(p: StirapParams, t: float) -> Eigensystem:
    """Analytic dark/bright eigensystem parametrized by the mixing angle."""
    theta = float(pulses.mixing_angle(p, t))
    norm = float(pulses.rabi_norm(p, t))
    lam = norm / SQRT3
    # Dark vector (-cos, 0, sin); bright vectors carry the sign assignment that
    # pairs each with its eigenvalue for the branch theta in (-pi/2, pi/2).
    n0 = np.array([-np.cos(theta), 0.0, np.sin(theta)], dtype=complex)
    n_plus = np.array([-np.sin(theta), 1.0, -np.cos(theta)], dtype=complex) / SQRT2
    n_minus = np.array([np.sin(theta), 1.0, np.cos(theta)], dtype=complex) / SQRT2
    values = np.array([-lam, 0.0, lam])
    vectors = np.column_stack([n_minus, n0, n_plus])
    return Eigensystem(values=values, vectors=vectors)


class EigenvectorContinuityError(RuntimeError):
    """Raised when the finite-difference step is too coarse for smooth gauge fixing."""


def berry_counterdiabatic_numeric(
    p: StirapParams | Callable, t: float, h_step: float | None = None
) -> np.ndarray:
    """Counterdiabatic generator from i*sum_k |d_t n_k><n_k| by central differences.

    Eigenvectors come from numerical diagonalization with the smooth gauge fixed
    by a positive overlap between adjacent times.  p is either StirapParams or
    a callable t -> (omega_a, omega_b).
    """
    amplitudes = p if callable(p) else (lambda tt: pulses.stirap_amplitudes(p, tt))
    if h_step is None:
        if callable(p):
            raise ValueError("h_step is required when passing a bare amplitude callable")
        h_step = 1e-5 * p.t_f

    def eig_at(tt):
        omega_a, omega_b = amplitudes(tt)
        vals, vecs = np.linalg.eigh(h_effective_lambda(float(omega_a), float(omega_b)))
        return vecs  # columns sorted by ascending eigenvalue

    center = eig_at(t)
    before = eig_at(t - h_step)
    after = eig_at(t + h_step)
    for mat in (before, after):
        for k in range(3):
            overlap = np.vdot(center[:, k], mat[:, k])
            if abs(overlap) < 0.9:
                raise EigenvectorContinuityError(
                    f"eigenvector overlap {abs(overlap):.3f} < 0.9 at t={t:.6g}; "
                    "reduce h_step"
                )
            mat[:, k] *= np.sign(overlap.real) if overlap.real != 0 else 1.0
    deriv = (after - before) / (2.0 * h_step)
    return 1j * deriv @ center.conj().T


def collapse_channels(
    params: ModelParams, space: HilbertSpace
) -> list[tuple[np.ndarray, float]]:
    """All (operator, rate) dissipation channels: photon leakage + spontaneous emission.

    Two photon channels at rate kappa, and one channel per excited->ground
    branch at rate gamma/2 (3 for atom A, 6 for atom B).
    """
    channels = [
        (hilbert.annihilation_operator(space, "L"), params.kappa),
        (hilbert.annihilation_operator(space, "R"), params.kappa),
    ]
    for g_lvl in hilbert.GROUND_A:
        channels.append(
            (hilbert.transition_operator(space, "A", LevelA.e0, g_lvl), params.gamma / 2)
        )
    for e_lvl in hilbert.EXCITED_B:
        for g_lvl in hilbert.GROUND_B:
            channels.append(
                (hilbert.transition_operator(space, "B", e_lvl, g_lvl), params.gamma / 2)
            )
    return channels
