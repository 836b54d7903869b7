"""Conversion between laboratory units and the dimensionless rotor units.

Time is measured in units of ``1/omega_B`` with ``omega_B = 2 pi c B`` the
rotational angular frequency of a molecule whose rotational constant ``B``
is given in cm^-1.  In those units the field-free Hamiltonian is ``J^2``
and every molecule/pulse combination is described by four numbers:

* ``A = mu0 * E / (hbar omega_B)``  -- field amplitude
* ``F = f / omega_B``               -- carrier frequency (f in Hz)
* ``D = omega_B * delta``           -- pulse duration
* ``T_tilde = k_B T / (hbar omega_B)`` -- temperature

Interface units are cm^-1, debye, MV/cm, ps, THz and kelvin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import constants as C


class DomainError(ValueError):
    """Raised when an input lies outside the physical domain of an operation."""


def _require_positive(name: str, value: float) -> None:
    if not (value > 0.0) or not math.isfinite(value):
        raise DomainError(f"{name} must be positive and finite, got {value!r}")


def _require_nonnegative(name: str, value: float) -> None:
    if not (value >= 0.0) or not math.isfinite(value):
        raise DomainError(f"{name} must be non-negative and finite, got {value!r}")


@dataclass(frozen=True)
class PhysicalMolecule:
    """Linear polar molecule: rotational constant ``B`` [cm^-1], dipole ``mu0`` [D]."""

    name: str
    B: float
    mu0: float

    def __post_init__(self):
        _require_positive("B", self.B)
        _require_nonnegative("mu0", self.mu0)


@dataclass(frozen=True)
class PhysicalField:
    """Pulse amplitude ``E_peak`` [MV/cm], duration ``delta`` [ps], frequency ``f`` [THz]."""

    E_peak: float
    delta: float
    f: float

    def __post_init__(self):
        _require_nonnegative("E_peak", self.E_peak)
        _require_positive("delta", self.delta)
        _require_positive("f", self.f)


@dataclass(frozen=True)
class ReducedParams:
    """Dimensionless pulse/ensemble descriptor."""

    A: float
    F: float
    D: float
    T_tilde: float = 0.0

    def __post_init__(self):
        _require_nonnegative("A", self.A)
        _require_positive("F", self.F)
        _require_positive("D", self.D)
        _require_nonnegative("T_tilde", self.T_tilde)


def rotational_angular_frequency(B: float) -> float:
    """Return ``omega_B = 2 pi c B`` in rad/s for ``B`` in cm^-1."""
    _require_positive("B", B)
    return 2.0 * math.pi * C.SPEED_OF_LIGHT_CM * B


def rotational_energy(B: float) -> float:
    """Energy quantum ``hbar omega_B`` in joule."""
    return C.HBAR * rotational_angular_frequency(B)


def to_reduced(mol: PhysicalMolecule, field: PhysicalField, T: float = 0.0) -> ReducedParams:
    """Reduce a molecule, a pulse and a temperature [K] to ``(A, F, D, T_tilde)``.

    The field value is used as supplied; the built-in table stores the
    2 MV/cm peak amplitude that reproduces the tabulated ``A`` column.
    """
    _require_positive("B", mol.B)
    _require_positive("delta", field.delta)
    _require_positive("f", field.f)
    _require_nonnegative("T", T)
    w = rotational_angular_frequency(mol.B)
    energy = C.HBAR * w
    A = mol.mu0 * C.DEBYE * field.E_peak * C.MV_PER_CM / energy
    F = field.f * C.TERAHERTZ / w
    D = w * field.delta * C.PICOSECOND
    T_tilde = C.BOLTZMANN * T / energy
    return ReducedParams(A=A, F=F, D=D, T_tilde=T_tilde)


def from_reduced_duration(B: float, D: float) -> float:
    """Pulse duration in ps for reduced duration ``D``."""
    _require_positive("B", B)
    _require_positive("D", D)
    return D / rotational_angular_frequency(B) / C.PICOSECOND


def from_reduced_frequency(B: float, F: float) -> float:
    """Carrier frequency in THz for reduced frequency ``F``."""
    _require_positive("B", B)
    _require_positive("F", F)
    return F * rotational_angular_frequency(B) / C.TERAHERTZ


def from_reduced_temperature(B: float, T_tilde: float) -> float:
    """Temperature in kelvin for reduced temperature ``T_tilde``."""
    _require_positive("B", B)
    _require_nonnegative("T_tilde", T_tilde)
    return T_tilde * rotational_energy(B) / C.BOLTZMANN


def from_reduced_amplitude(B: float, mu0: float, A: float) -> float:
    """Field amplitude in MV/cm for reduced amplitude ``A`` and dipole ``mu0`` [D]."""
    _require_positive("B", B)
    _require_positive("mu0", mu0)
    _require_nonnegative("A", A)
    return A * rotational_energy(B) / (mu0 * C.DEBYE) / C.MV_PER_CM


def from_reduced(mol: PhysicalMolecule, params: ReducedParams) -> tuple[PhysicalField, float]:
    """Inverse of :func:`to_reduced`; returns ``(field, T)``."""
    field = PhysicalField(
        E_peak=from_reduced_amplitude(mol.B, mol.mu0, params.A),
        delta=from_reduced_duration(mol.B, params.D),
        f=from_reduced_frequency(mol.B, params.F),
    )
    return field, from_reduced_temperature(mol.B, params.T_tilde)


# Field used for all tabulated molecules and the (B, T) maps:
# 2 MV/cm peak, 5 ps, 0.5 THz.
DEFAULT_FIELD = PhysicalField(E_peak=2.0, delta=5.0, f=0.5)

MOLECULES: dict[str, PhysicalMolecule] = {
    m.name: m
    for m in (
        PhysicalMolecule("OCS", 0.2029, 0.712),
        PhysicalMolecule("HF", 20.956, 1.820),
        PhysicalMolecule("LiH", 7.513, 5.88),
        PhysicalMolecule("CO", 1.931, 0.112),
        PhysicalMolecule("LiCl", 1.345, 6.33),
    )
}


def get_molecule(name: str) -> PhysicalMolecule:
    """Look up a built-in molecule by (case-insensitive) name."""
    for key, mol in MOLECULES.items():
        if key.lower() == name.lower():
            return mol
    raise KeyError(f"unknown molecule {name!r}; available: {', '.join(MOLECULES)}")
