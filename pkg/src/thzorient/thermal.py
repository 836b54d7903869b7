"""Boltzmann ensemble of initial rotor states and thermal averaging.

An ensemble member is an initial basis state ``|J0, M0>``.  Its weight in the
thermal average is ``c_J0 / Z`` with ``c_J = exp(-J(J+1)/T_tilde)`` and
``Z = sum_J (2J+1) c_J``.  Since ``cos(theta)`` does not distinguish ``M0``
from ``-M0``, the pair is folded into a single member of multiplicity 2.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from .units import DomainError

# exp(-x) underflows to zero well before x = 800
_EXP_LIMIT = 800.0


class IncompleteEnsembleError(LookupError):
    """A thermal sum was requested without a value for every member."""


@dataclass(frozen=True)
class Member:
    J0: int
    M0: int
    multiplicity: int = 1


def boltzmann_weights(T_tilde: float, Jmax: int) -> np.ndarray:
    """Unnormalised weights ``c_J`` for ``J = 0..Jmax`` (``c_0 = 1``)."""
    if T_tilde < 0:
        raise DomainError(f"T_tilde must be >= 0, got {T_tilde}")
    J = np.arange(Jmax + 1, dtype=np.float64)
    if T_tilde == 0:
        c = np.zeros(Jmax + 1)
        c[0] = 1.0
        return c
    return np.exp(-J * (J + 1.0) / T_tilde)


def _converged_jmax(T_tilde: float) -> int:
    # J(J+1)/T_tilde > _EXP_LIMIT beyond this J
    return int(math.ceil(math.sqrt(T_tilde * _EXP_LIMIT))) + 2


def partition_function(T_tilde: float) -> float:
    """``Z = sum_J (2J+1) c_J`` summed to machine convergence."""
    if T_tilde == 0:
        return 1.0
    c = boltzmann_weights(T_tilde, _converged_jmax(T_tilde))
    J = np.arange(c.size)
    return float(np.sum((2 * J + 1) * c))


@dataclass(frozen=True)
class ThermalEnsemble:
    """Truncated thermal ensemble.

    ``weights`` holds ``c_J`` for ``J = 0..J0max``; ``Z`` is the full (not
    truncated) partition function; ``tail_mass`` is the relative population
    of the discarded levels ``J > J0max``.
    """

    T_tilde: float
    weights: np.ndarray
    Z: float
    members: tuple[Member, ...]
    tail_mass: float
    cutoff: float

    @property
    def J0max(self) -> int:
        return self.weights.size - 1

    def member_weights(self) -> np.ndarray:
        """``multiplicity * c_J0 / Z`` in member order."""
        return np.array([m.multiplicity * self.weights[m.J0] / self.Z for m in self.members])

    def index(self) -> dict[tuple[int, int], int]:
        return {(m.J0, m.M0): i for i, m in enumerate(self.members)}

    def summary(self) -> dict:
        return {
            "T_tilde": self.T_tilde,
            "J0max": self.J0max,
            "members": len(self.members),
            "tail_mass": self.tail_mass,
            "cutoff": self.cutoff,
            "Z": self.Z,
        }


def build_ensemble(T_tilde: float, cutoff: float = 1e-6, fold_m: bool = True) -> ThermalEnsemble:
    """Enumerate the members needed to capture all but ``cutoff`` of the population.

    With ``fold_m=False`` every ``M0 = -J0..J0`` is listed separately; the
    folded form is what the propagation code uses.
    """
    if T_tilde < 0:
        raise DomainError(f"temperature must be >= 0, got T_tilde={T_tilde}")
    if not 0 < cutoff < 1:
        raise DomainError(f"cutoff must lie in (0, 1), got {cutoff}")
    if T_tilde == 0:
        weights = np.ones(1)
        Z, tail = 1.0, 0.0
    else:
        c = boltzmann_weights(T_tilde, _converged_jmax(T_tilde))
        J = np.arange(c.size)
        pop = (2 * J + 1) * c
        Z = float(np.sum(pop))
        # tail[j] = population strictly above level j
        tail = np.append(np.cumsum(pop[::-1])[::-1][1:], 0.0) / Z
        J0max = int(np.argmax(tail <= cutoff))
        weights = c[: J0max + 1].copy()
        tail = float(tail[J0max])
    members = []
    for J0 in range(weights.size):
        if fold_m:
            members.append(Member(J0, 0, 1))
            members.extend(Member(J0, M0, 2) for M0 in range(1, J0 + 1))
        else:
            members.extend(Member(J0, M0, 1) for M0 in range(-J0, J0 + 1))
    return ThermalEnsemble(
        T_tilde=float(T_tilde),
        weights=weights,
        Z=Z,
        members=tuple(members),
        tail_mass=tail,
        cutoff=cutoff,
    )


def _aligned_values(values, ensemble: ThermalEnsemble) -> np.ndarray:
    """Member values as an array whose first axis follows ``ensemble.members``."""
    if isinstance(values, Mapping):
        missing = [(m.J0, m.M0) for m in ensemble.members if (m.J0, m.M0) not in values]
        if missing:
            raise IncompleteEnsembleError(f"no value for members {missing[:5]}")
        return np.asarray([values[(m.J0, m.M0)] for m in ensemble.members], dtype=np.float64)
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape[0] != len(ensemble.members):
        raise IncompleteEnsembleError(
            f"got {arr.shape[0]} member values for {len(ensemble.members)} members"
        )
    return arr


def _weighted_sum(arr: np.ndarray, w: np.ndarray) -> np.ndarray | float:
    # sequential accumulation in member order keeps results reproducible
    acc = np.zeros(arr.shape[1:])
    for wi, vi in zip(w, arr):
        acc = acc + wi * vi
    return float(acc) if acc.ndim == 0 else acc


def thermal_expectation(values, ensemble: ThermalEnsemble):
    """Thermal average of per-member expectation values.

    ``values`` is either a mapping ``(J0, M0) -> value`` or an array whose
    first axis is aligned with ``ensemble.members``; values may be scalars
    or whole time traces.
    """
    arr = _aligned_values(values, ensemble)
    return _weighted_sum(arr, ensemble.member_weights())


@dataclass(frozen=True)
class OrientationDecomposition:
    total: object
    zero_T: object
    thermal: object


def decompose(values, ensemble: ThermalEnsemble) -> OrientationDecomposition:
    """Split the thermal average into the ``J0 = 0`` part and the rest."""
    arr = _aligned_values(values, ensemble)
    w = ensemble.member_weights()
    ground = np.array([m.J0 == 0 for m in ensemble.members])
    zero_T = _weighted_sum(arr[ground], w[ground])
    if ground.all():
        thermal = 0.0 if arr.ndim == 1 else np.zeros(arr.shape[1:])
    else:
        thermal = _weighted_sum(arr[~ground], w[~ground])
    return OrientationDecomposition(total=zero_T + thermal, zero_T=zero_T, thermal=thermal)
