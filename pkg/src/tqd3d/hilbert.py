"""Labeled Hilbert spaces and elementary operators for the two-atom bimodal cavity.

Atom A has ground levels gL, g0, gR and one excited level e0.  Atom B has the
same ground levels and two excited levels eL, eR.  Each cavity mode (left- and
right-circular polarization) is truncated at one photon, which is exact here:
the drives exchange at most one quantum and dissipation only removes quanta,
so the 4*5*2*2 = 80 dimensional space is closed under the dynamics.

States are plain complex ndarrays and operators are dense complex matrices;
the HilbertSpace object carries the basis labels and index maps.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np


class LevelA(Enum):
    """Levels of atom A. e0 is the only excited level."""

    gL = 0
    g0 = 1
    gR = 2
    e0 = 3


class LevelB(Enum):
    """Levels of atom B. eL and eR are the excited levels."""

    gL = 0
    g0 = 1
    gR = 2
    eL = 3
    eR = 4


EXCITED_A = (LevelA.e0,)
GROUND_A = (LevelA.gL, LevelA.g0, LevelA.gR)
EXCITED_B = (LevelB.eL, LevelB.eR)
GROUND_B = (LevelB.gL, LevelB.g0, LevelB.gR)


class BasisState(NamedTuple):
    a: LevelA
    b: LevelB
    n_left: int
    n_right: int


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered basis of BasisStates with an inverse index map."""

    basis: tuple[BasisState, ...]

    def __post_init__(self):
        if len(set(self.basis)) != len(self.basis):
            raise ValueError("duplicate basis states")
        object.__setattr__(self, "index", {s: i for i, s in enumerate(self.basis)})

    @property
    def dim(self) -> int:
        return len(self.basis)

    def ket(self, state: BasisState) -> np.ndarray:
        """Unit vector for a single basis state."""
        v = np.zeros(self.dim, dtype=complex)
        v[self.index[state]] = 1.0
        return v


def build_full_space() -> HilbertSpace:
    """The 80-dimensional tensor-product space in canonical lexicographic order."""
    basis = tuple(
        BasisState(a, b, nl, nr)
        for a, b, nl, nr in itertools.product(LevelA, LevelB, (0, 1), (0, 1))
    )
    return HilbertSpace(basis)


# The eight states reachable from |g0, g0, vac> under the coherent couplings,
# in the conventional order phi_1 .. phi_8.
_SUBSPACE_LABELS = (
    BasisState(LevelA.g0, LevelB.g0, 0, 0),  # phi_1
    BasisState(LevelA.e0, LevelB.g0, 0, 0),  # phi_2
    BasisState(LevelA.gL, LevelB.g0, 1, 0),  # phi_3
    BasisState(LevelA.gR, LevelB.g0, 0, 1),  # phi_4
    BasisState(LevelA.gL, LevelB.eL, 0, 0),  # phi_5
    BasisState(LevelA.gR, LevelB.eR, 0, 0),  # phi_6
    BasisState(LevelA.gL, LevelB.gL, 0, 0),  # phi_7
    BasisState(LevelA.gR, LevelB.gR, 0, 0),  # phi_8
)


def build_subspace() -> HilbertSpace:
    """The 8-dimensional single-excitation-chain subspace, ordered phi_1..phi_8."""
    return HilbertSpace(_SUBSPACE_LABELS)


def transition_operator(space: HilbertSpace, atom: str, from_level, to_level) -> np.ndarray:
    """|to><from| on one atom, identity on everything else.

    atom is "A" or "B"; levels must belong to that atom.
    """
    if atom == "A":
        enum = LevelA
    elif atom == "B":
        enum = LevelB
    else:
        raise ValueError(f"atom must be 'A' or 'B', got {atom!r}")
    if not isinstance(from_level, enum) or not isinstance(to_level, enum):
        raise ValueError(f"levels {from_level}, {to_level} invalid for atom {atom}")

    op = np.zeros((space.dim, space.dim), dtype=complex)
    for j, s in enumerate(space.basis):
        cur = s.a if atom == "A" else s.b
        if cur is not from_level:
            continue
        dst = s._replace(a=to_level) if atom == "A" else s._replace(b=to_level)
        i = space.index.get(dst)
        if i is not None:
            op[i, j] = 1.0
    return op


def annihilation_operator(space: HilbertSpace, mode: str) -> np.ndarray:
    """Photon annihilation for mode "L" or "R" on the {0,1} truncated Fock space."""
    if mode not in ("L", "R"):
        raise ValueError(f"mode must be 'L' or 'R', got {mode!r}")
    op = np.zeros((space.dim, space.dim), dtype=complex)
    for j, s in enumerate(space.basis):
        n = s.n_left if mode == "L" else s.n_right
        if n != 1:
            continue
        dst = s._replace(n_left=0) if mode == "L" else s._replace(n_right=0)
        i = space.index.get(dst)
        if i is not None:
            op[i, j] = 1.0
    return op


def excited_projector(space: HilbertSpace) -> np.ndarray:
    """Sum of excited-level projectors |e0><e0|_A + |eL><eL|_B + |eR><eR|_B.

    Diagonal counts excited atoms (0, 1 or 2), so this is the detuning term
    and, together with the photon numbers, the total excitation counter.
    """
    diag = np.array(
        [float(s.a in EXCITED_A) + float(s.b in EXCITED_B) for s in space.basis]
    )
    return np.diag(diag).astype(complex)


def embed(vec: np.ndarray, sub: HilbertSpace, full: HilbertSpace) -> np.ndarray:
    """Copy amplitudes of a sub-space vector into the matching full-space slots."""
    out = np.zeros(full.dim, dtype=complex)
    for j, s in enumerate(sub.basis):
        i = full.index.get(s)
        if i is None:
            raise KeyError(f"basis state {s} missing from target space")
        out[i] = vec[j]
    return out


def project(vec: np.ndarray, full: HilbertSpace, sub: HilbertSpace) -> np.ndarray:
    """Restrict a full-space vector to the sub-space amplitudes."""
    return np.array([vec[full.index[s]] for s in sub.basis], dtype=complex)


def subspace_indices(sub: HilbertSpace, full: HilbertSpace) -> np.ndarray:
    """Positions of the sub-space basis states inside the full space."""
    return np.array([full.index[s] for s in sub.basis])


def max_nonhermiticity(op: np.ndarray) -> float:
    return float(np.max(np.abs(op - op.conj().T)))
