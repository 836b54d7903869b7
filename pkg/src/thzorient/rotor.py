"""Truncated |J, M> basis and the operators of the driven linear rotor.

In reduced units the Hamiltonian is ``J^2 - a(tau) cos(theta)``.  At fixed
``M`` the kinetic term is diagonal, ``J(J+1)``, and ``cos(theta)`` only
couples ``J`` to ``J +/- 1``, so everything here is a diagonal plus one
real symmetric off-diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .units import DomainError


@dataclass(frozen=True)
class BasisSpec:
    """Basis ``J = |M| .. Jmax`` at fixed magnetic quantum number ``M``."""

    M: int
    Jmax: int

    def __post_init__(self):
        if self.Jmax < abs(self.M):
            raise DomainError(f"Jmax={self.Jmax} must be >= |M|={abs(self.M)}")

    @property
    def Jmin(self) -> int:
        return abs(self.M)

    @property
    def dim(self) -> int:
        return self.Jmax - abs(self.M) + 1

    @property
    def J(self) -> np.ndarray:
        return np.arange(self.Jmin, self.Jmax + 1)


@dataclass
class RotorState:
    """Complex amplitudes ``a_J`` over a :class:`BasisSpec`."""

    basis: BasisSpec
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (self.basis.dim,):
            raise ValueError(
                f"amplitudes have shape {self.amplitudes.shape}, basis needs ({self.basis.dim},)"
            )

    @classmethod
    def basis_state(cls, J: int, M: int, Jmax: int) -> "RotorState":
        basis = BasisSpec(M, Jmax)
        if not basis.Jmin <= J <= Jmax:
            raise DomainError(f"J={J} outside basis {basis.Jmin}..{Jmax}")
        a = np.zeros(basis.dim, dtype=np.complex128)
        a[J - basis.Jmin] = 1.0
        return cls(basis, a)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def top_population(self, levels: int = 2) -> float:
        """Population in the highest ``levels`` basis states (truncation probe)."""
        return float(np.sum(np.abs(self.amplitudes[-levels:]) ** 2))


def cos_theta_coupling(J: int, M: int) -> float:
    """Matrix element ``<J+1, M| cos(theta) |J, M>``."""
    if abs(M) > J:
        raise DomainError(f"|M|={abs(M)} exceeds J={J}")
    return float(np.sqrt(((J + 1) ** 2 - M**2) / ((2 * J + 1) * (2 * J + 3))))


def coupling_vector(basis: BasisSpec) -> np.ndarray:
    """Off-diagonal of ``cos(theta)`` in ``basis`` (length ``dim - 1``)."""
    J = np.arange(basis.Jmin, basis.Jmax, dtype=np.float64)
    M2 = float(basis.M) ** 2
    return np.sqrt(((J + 1.0) ** 2 - M2) / ((2.0 * J + 1.0) * (2.0 * J + 3.0)))


def kinetic_diagonal(basis: BasisSpec) -> np.ndarray:
    J = basis.J.astype(np.float64)
    return J * (J + 1.0)


def cos_theta_matrix(basis: BasisSpec) -> np.ndarray:
    c = coupling_vector(basis)
    return np.diag(c, 1) + np.diag(c, -1)


def hamiltonian_matrix(basis: BasisSpec, field_value: float) -> np.ndarray:
    """Dense ``J^2 - field_value * cos(theta)``; for tests and small oracles."""
    return np.diag(kinetic_diagonal(basis)) - field_value * cos_theta_matrix(basis)


def apply_hamiltonian(state: RotorState, field_value: float) -> np.ndarray:
    """Tridiagonal product ``(J^2 - field_value cos(theta)) |state>``."""
    a = state.amplitudes
    c = coupling_vector(state.basis)
    out = kinetic_diagonal(state.basis) * a
    out[:-1] -= field_value * c * a[1:]
    out[1:] -= field_value * c * a[:-1]
    return out


def line_coherences(amplitudes: np.ndarray, coupling: np.ndarray) -> np.ndarray:
    """``conj(a_J) a_{J+1} C(J, M)`` for each adjacent pair.

    Works on a single vector or column-wise on a ``(dim, k)`` block.
    """
    a = np.asarray(amplitudes)
    if a.ndim == 1:
        return np.conj(a[:-1]) * a[1:] * coupling
    return np.conj(a[:-1]) * a[1:] * coupling[:, None]


def expectation_cos_theta(state: RotorState) -> float:
    """``<psi| cos(theta) |psi>`` for a single basis-truncated state."""
    q = line_coherences(state.amplitudes, coupling_vector(state.basis))
    return float(2.0 * np.sum(q.real))
