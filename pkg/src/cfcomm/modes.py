"""Single-photon state vectors over labeled optical modes, plus the two-mode
unitary constructors (real rotations and exact swaps) embedded into the full
mode space.

Mode convention: channel modes A, B, C sit at indices 0..2, loss modes
L1..LK behind them.  Everything is dense complex; M = K+3 stays tiny at desk
scale, so clarity wins over sparsity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NORM_TOL",
    "ModeBasis",
    "PureState",
    "UnitaryOp",
    "apply",
    "basis_state",
    "exact_cos_sin",
    "mode_probabilities",
    "rotation",
    "swap",
]

NORM_TOL = 1e-12

# cos(pi/2) lands ~6e-17 off zero in doubles.  Matrix entries that are
# mathematically zero must be exactly 0.0 because path enumeration prunes on
# exact zeros; any legitimate protocol angle keeps cos/sin far above this.
_TRIG_SNAP = 1e-15


def exact_cos_sin(angle: float) -> tuple[float, float]:
    """cos/sin of ``angle`` with sub-epsilon values snapped to exactly 0.0."""
    c = math.cos(angle)
    s = math.sin(angle)
    if abs(c) < _TRIG_SNAP:
        c = 0.0
    if abs(s) < _TRIG_SNAP:
        s = 0.0
    return c, s


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class ModeBasis:
    """Ordered mode labels [A, B, C, L1..LK]; ``index(mode)`` is the amplitude slot."""

    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if len(labels) < 4:
            raise ValueError(f"need at least 4 modes (K >= 1), got {len(labels)}")
        if labels[:3] != ("A", "B", "C"):
            raise ValueError(f"modes A, B, C must occupy indices 0..2, got {labels[:3]}")
        expected_loss = tuple(f"L{n}" for n in range(1, len(labels) - 2))
        if labels[3:] != expected_loss:
            raise ValueError(f"loss modes must be L1..L{len(labels) - 3} in order, got {labels[3:]}")

    @classmethod
    def for_cycles(cls, k: int) -> "ModeBasis":
        """Basis for a K-cycle protocol: A, B, C plus loss modes L1..LK."""
        if k < 1:
            raise ValueError(f"cycle count must be >= 1, got {k}")
        return cls(("A", "B", "C") + tuple(f"L{n}" for n in range(1, k + 1)))

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def loss_count(self) -> int:
        return len(self.labels) - 3

    def index(self, mode: str) -> int:
        try:
            return self.labels.index(mode)
        except ValueError:
            raise ValueError(f"unknown mode {mode!r}; basis has {self.labels}") from None


@dataclass(frozen=True)
class PureState:
    """Complex amplitudes over a mode basis; always unit norm."""

    amplitudes: np.ndarray
    basis: ModeBasis

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.basis.size,):
            raise ValueError(f"expected {self.basis.size} amplitudes, got shape {amps.shape}")
        norm_sq = float(np.sum(np.abs(amps) ** 2))
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized: sum |a_i|^2 = {norm_sq!r}")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    def amplitude(self, mode: str) -> complex:
        return complex(self.amplitudes[self.basis.index(mode)])


@dataclass(frozen=True)
class UnitaryOp:
    """A square complex matrix, checked unitary entrywise at 1e-12."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"unitary must be square, got shape {mat.shape}")
        defect = np.abs(mat.conj().T @ mat - np.eye(mat.shape[0])).max()
        if defect > NORM_TOL:
            raise ValueError(f"matrix is not unitary: max |U^dag U - I| = {defect!r}")
        object.__setattr__(self, "matrix", _frozen(mat))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def basis_state(basis: ModeBasis, mode: str) -> PureState:
    """The photon sitting in a single mode."""
    amps = np.zeros(basis.size, dtype=complex)
    amps[basis.index(mode)] = 1.0
    return PureState(amps, basis)


def rotation(basis: ModeBasis, i: str, j: str, angle: float) -> UnitaryOp:
    """Real rotation between modes i and j, identity elsewhere.

    U|i> = cos(angle)|i> + sin(angle)|j>,  U|j> = -sin(angle)|i> + cos(angle)|j>.
    """
    if i == j:
        raise ValueError(f"rotation needs two distinct modes, got {i!r} twice")
    ii, jj = basis.index(i), basis.index(j)
    c, s = exact_cos_sin(angle)
    mat = np.eye(basis.size, dtype=complex)
    mat[ii, ii] = c
    mat[jj, ii] = s
    mat[ii, jj] = -s
    mat[jj, jj] = c
    return UnitaryOp(mat)


def swap(basis: ModeBasis, i: str, j: str) -> UnitaryOp:
    """Exact permutation |i><j| + |j><i| + identity on everything else."""
    if i == j:
        raise ValueError(f"swap needs two distinct modes, got {i!r} twice")
    ii, jj = basis.index(i), basis.index(j)
    mat = np.eye(basis.size, dtype=complex)
    mat[ii, ii] = 0.0
    mat[jj, jj] = 0.0
    mat[ii, jj] = 1.0
    mat[jj, ii] = 1.0
    return UnitaryOp(mat)


def apply(op: UnitaryOp, state: PureState) -> PureState:
    """Matrix-vector product; preserves the norm by construction."""
    if op.dim != state.basis.size:
        raise ValueError(f"dimension mismatch: operator is {op.dim}, state has {state.basis.size} modes")
    return PureState(op.matrix @ state.amplitudes, state.basis)


def mode_probabilities(state: PureState) -> np.ndarray:
    """Born-rule readout: p_i = |a_i|^2."""
    return _frozen(np.abs(state.amplitudes) ** 2)
