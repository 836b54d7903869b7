"""Zero-area THz pulse: waveform, spectrum and overlap with rotational lines.

The reduced field is ``A f(tau)`` with

    f(tau) = cos^2(pi tau / D) sin(2 pi F tau),   |tau| <= D/2

and zero elsewhere.  ``f`` is odd, so the pulse carries no DC component.
Rotational lines sit at angular frequency ``omega_J = 2(J+1)``; the pulse
spectrum is compared with them on the same angular axis ``omega = 2 pi nu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .thermal import ThermalEnsemble, boltzmann_weights
from .units import DomainError, ReducedParams


class PreconditionError(ValueError):
    """Requested spectral grid is too coarse for the pulse."""


@dataclass(frozen=True)
class PulseShape:
    A: float
    F: float
    D: float

    def __post_init__(self):
        if self.A < 0:
            raise DomainError(f"A must be >= 0, got {self.A}")
        if self.F <= 0 or self.D <= 0:
            raise DomainError(f"F and D must be positive, got F={self.F}, D={self.D}")

    @classmethod
    def from_params(cls, params: ReducedParams) -> "PulseShape":
        return cls(params.A, params.F, params.D)

    @property
    def support(self) -> tuple[float, float]:
        return (-0.5 * self.D, 0.5 * self.D)


def envelope_carrier(pulse: PulseShape, tau):
    """Unit-amplitude shape ``f(tau)`` (vectorised)."""
    tau = np.asarray(tau, dtype=np.float64)
    inside = np.abs(tau) <= 0.5 * pulse.D
    val = np.cos(np.pi * tau / pulse.D) ** 2 * np.sin(2.0 * np.pi * pulse.F * tau)
    return np.where(inside, val, 0.0)


def waveform(pulse: PulseShape, tau):
    """Reduced field ``A f(tau)``; exactly zero outside ``[-D/2, D/2]``."""
    out = pulse.A * envelope_carrier(pulse, tau)
    return float(out) if np.ndim(out) == 0 else out


def pulse_area(pulse: PulseShape, resolution: int = 4096, rectified: bool = False) -> float:
    """Composite-Simpson area of the pulse (or of its absolute value)."""
    if resolution < 1000:
        raise PreconditionError(f"resolution must be >= 1000 samples, got {resolution}")
    n = resolution + (resolution % 2 == 0)  # odd node count for Simpson
    half = np.linspace(0.0, 0.5 * pulse.D, n // 2 + 1)
    tau = np.concatenate([-half[:0:-1], half])  # mirror-symmetric nodes
    y = waveform(pulse, tau)
    if rectified:
        y = np.abs(y)
    h = pulse.D / (n - 1)
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    # pair mirror nodes before summing so an odd integrand cancels exactly
    m = n // 2
    paired = w[m] * y[m] + np.sum(w[m + 1 :] * y[m + 1 :] + w[m - 1 :: -1] * y[m - 1 :: -1])
    return float(paired * h / 3.0)


@dataclass(frozen=True)
class FieldSpectrum:
    """``|FT|`` of the pulse on a uniform grid of ordinary frequency ``nu``."""

    frequencies: np.ndarray
    magnitudes: np.ndarray
    resolution: float

    @property
    def omega(self) -> np.ndarray:
        return 2.0 * np.pi * self.frequencies

    @property
    def peak_frequency(self) -> float:
        return float(self.frequencies[np.argmax(self.magnitudes)])

    def fwhm(self) -> float:
        """Full width at half maximum of the main lobe (linear interpolation)."""
        mag = self.magnitudes
        i = int(np.argmax(mag))
        half = 0.5 * mag[i]
        lo = i
        while lo > 0 and mag[lo] > half:
            lo -= 1
        hi = i
        while hi < mag.size - 1 and mag[hi] > half:
            hi += 1
        nu = self.frequencies

        def cross(a, b):
            return nu[a] + (half - mag[a]) * (nu[b] - nu[a]) / (mag[b] - mag[a])

        return float(cross(hi, hi - 1) - cross(lo, lo + 1))


def _time_grid(pulse: PulseShape, samples_per_period: int):
    dt = min(1.0 / (samples_per_period * pulse.F), pulse.D / 1024)
    n = int(math.ceil(pulse.D / dt))
    tau = -0.5 * pulse.D + pulse.D * np.arange(n + 1) / n
    return tau, pulse.D / n


def fourier_magnitude(pulse: PulseShape, nu, samples_per_period: int = 64) -> np.ndarray:
    """``|int E(tau) exp(-2 pi i nu tau) dtau|`` at arbitrary frequencies ``nu``."""
    tau, dt = _time_grid(pulse, samples_per_period)
    y = waveform(pulse, tau)
    nu = np.atleast_1d(np.asarray(nu, dtype=np.float64))
    ft = np.exp(-2j * np.pi * np.outer(nu, tau)) @ y * dt
    return np.abs(ft)


def spectrum(
    pulse: PulseShape,
    resolution: float | None = None,
    nu_max: float | None = None,
    samples_per_period: int = 64,
) -> FieldSpectrum:
    """Magnitude spectrum from a zero-padded FFT of an oversampled pulse.

    ``resolution`` is the frequency spacing; it defaults to ``1/(40 D)`` and
    may not exceed ``1/(20 D)``.  The grid spans at least ``[0, F + 10/D]``.
    """
    if samples_per_period < 32:
        raise PreconditionError("need at least 32 samples per carrier period")
    limit = 1.0 / (20.0 * pulse.D)
    if resolution is None:
        resolution = 0.5 * limit
    if resolution > limit * (1 + 1e-12):
        raise PreconditionError(
            f"frequency resolution {resolution:g} coarser than 1/(20 D) = {limit:g}"
        )
    nu_top = max(nu_max or 0.0, pulse.F + 10.0 / pulse.D)
    tau, dt = _time_grid(pulse, samples_per_period)
    y = waveform(pulse, tau)
    nfft = int(2 ** math.ceil(math.log2(max(1.0 / (resolution * dt), tau.size))))
    ft = np.fft.rfft(y, nfft) * dt
    nu = np.fft.rfftfreq(nfft, dt)
    keep = nu <= nu_top + 1.0 / (nfft * dt)
    # shift phase reference from tau[0] to tau = 0 does not change |FT|
    return FieldSpectrum(
        frequencies=nu[keep], magnitudes=np.abs(ft[keep]), resolution=1.0 / (nfft * dt)
    )


@dataclass(frozen=True)
class SpectralLine:
    J: int
    omega: float
    P: float
    magnitude: float


@dataclass(frozen=True)
class OverlapReport:
    lines: tuple[SpectralLine, ...]
    score: float


def overlap_report(pulse: PulseShape, ensemble: ThermalEnsemble, Jmax_lines: int) -> OverlapReport:
    """Weight each line ``omega_J = 2(J+1)`` by ``P_J = (c_J + c_{J+1})/2``.

    The score ``sum_J P_J |E(omega_J)|`` is a diagnostic of how much of the
    thermally populated line spectrum the pulse can reach.
    """
    c = boltzmann_weights(ensemble.T_tilde, Jmax_lines + 1)
    J = np.arange(Jmax_lines + 1)
    omega = 2.0 * (J + 1.0)
    P = 0.5 * (c[:-1] + c[1:])
    mag = fourier_magnitude(pulse, omega / (2.0 * np.pi))
    lines = tuple(
        SpectralLine(int(j), float(w), float(p), float(m)) for j, w, p, m in zip(J, omega, P, mag)
    )
    return OverlapReport(lines=lines, score=float(np.sum(P * mag)))
