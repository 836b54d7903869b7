"""Time propagation through the pulse and analytic field-free evolution.

Inside the pulse every member is advanced with a fourth-order Suzuki
composition of a symmetric, exactly unitary split step (see ``_split_py``).
After the pulse the amplitudes only acquire phases ``exp(-i J(J+1) tau)``,
so ``<cos theta>`` is a trigonometric sum over the line coherences

    <cos theta>(tau) = 2 Re sum_J q_J exp(-i omega_J tau),  omega_J = 2(J+1)

which is periodic in ``tau`` with period ``pi``.  Reported times are shifted
so that the pulse switches off at ``tau = 0``.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import kernels
from .field import PulseShape, waveform
from .rotor import (
    BasisSpec,
    RotorState,
    coupling_vector,
    kinetic_diagonal,
    line_coherences,
)
from .thermal import ThermalEnsemble, build_ensemble
from .units import DomainError, ReducedParams

logger = logging.getLogger(__name__)

_P = 1.0 / (4.0 - 4.0 ** (1.0 / 3.0))
#: stage lengths (fractions of a step) of the 4th-order Suzuki composition
SUZUKI4 = np.array([_P, _P, 1.0 - 4.0 * _P, _P, _P])


class IntegrationError(RuntimeError):
    """Norm drift exceeded the configured tolerance."""

    def __init__(self, drift, tolerance):
        super().__init__(f"norm drift {drift:.3e} exceeds tolerance {tolerance:.1e}")
        self.drift = drift


class BasisEscapeError(RuntimeError):
    """Population reached the top of the truncated basis."""

    def __init__(self, population, Jmax):
        super().__init__(f"population {population:.3e} in the top two levels of Jmax={Jmax}")
        self.population = population
        self.Jmax = Jmax


@dataclass(frozen=True)
class PropagationConfig:
    """Step control and tolerances.

    The step is ``min(max_step, 1/(samples_per_period F),
    step_factor / (2 Jmax + A + 2 pi F))``; the last term bounds the phase
    accumulated per step by the fastest coupled gap, the field and the
    carrier.
    """

    step_factor: float = 0.1
    max_step: float | None = None
    samples_per_period: int = 64
    norm_tolerance: float = 1e-8
    escape_tolerance: float = 1e-10
    max_doublings: int = 4
    backend: str | None = None

    def __post_init__(self):
        if self.step_factor <= 0 or self.norm_tolerance <= 0 or self.escape_tolerance <= 0:
            raise DomainError("step_factor and tolerances must be positive")
        if self.samples_per_period < 64:
            raise DomainError("samples_per_period must be >= 64")

    def step_count(self, pulse: PulseShape, Jmax: int) -> int:
        h = min(
            1.0 / (self.samples_per_period * pulse.F),
            self.step_factor / (2.0 * Jmax + pulse.A + 2.0 * math.pi * pulse.F),
        )
        if self.max_step is not None:
            h = min(h, self.max_step)
        return max(1, int(math.ceil(pulse.D / h)))


def stage_schedule(pulse: PulseShape, n_steps: int, start: int = 0, stop: int | None = None):
    """Stage lengths and midpoint field values for steps ``start..stop-1``."""
    stop = n_steps if stop is None else stop
    h = pulse.D / n_steps
    stage_dt = SUZUKI4 * h
    offsets = np.concatenate([[0.0], np.cumsum(SUZUKI4)[:-1]]) + 0.5 * SUZUKI4
    steps = np.arange(start, stop)[:, None]
    tau = -0.5 * pulse.D + h * (steps + offsets[None, :])
    return stage_dt, waveform(pulse, tau).reshape(stop - start, SUZUKI4.size)


def headroom_policy(pulse: PulseShape) -> int:
    """Initial number of levels kept above the highest initial ``J``."""
    return max(
        20,
        int(math.ceil(3.0 * math.sqrt(pulse.A))),
        int(math.ceil(2.0 * math.pi * pulse.F * pulse.D)) + 10,
    )


def propagate_block(psi, basis: BasisSpec, pulse: PulseShape, n_steps: int,
                    cfg: PropagationConfig, sample_every: int | None = None):
    """Advance the columns of ``psi`` (shape ``(dim, k)``) across the pulse in place.

    With ``sample_every`` the per-column ``<cos theta>`` is recorded at the
    start and after every ``sample_every`` steps; the samples are returned
    as an array of shape ``(n_samples, k)`` (otherwise ``None``).
    """
    K = kinetic_diagonal(basis)
    C = coupling_vector(basis)
    if sample_every is None:
        stage_dt, amps = stage_schedule(pulse, n_steps)
        kernels.split_propagate(psi, K, C, stage_dt, amps, backend=cfg.backend)
        return None
    if n_steps % sample_every:
        raise ValueError("n_steps must be a multiple of sample_every")
    samples = [2.0 * line_coherences(psi, C).real.sum(axis=0)]
    for start in range(0, n_steps, sample_every):
        stage_dt, amps = stage_schedule(pulse, n_steps, start, start + sample_every)
        kernels.split_propagate(psi, K, C, stage_dt, amps, backend=cfg.backend)
        samples.append(2.0 * line_coherences(psi, C).real.sum(axis=0))
    return np.array(samples)


def propagate_pulse(initial: RotorState, pulse: PulseShape,
                    cfg: PropagationConfig | None = None, n_steps: int | None = None) -> RotorState:
    """State at ``tau = +D/2`` starting from ``initial`` at ``tau = -D/2``."""
    cfg = cfg or PropagationConfig()
    basis = initial.basis
    n_steps = n_steps or cfg.step_count(pulse, basis.Jmax)
    psi = np.ascontiguousarray(initial.amplitudes.reshape(-1, 1), dtype=np.complex128).copy()
    norm0 = np.linalg.norm(psi)
    propagate_block(psi, basis, pulse, n_steps, cfg)
    drift = abs(np.linalg.norm(psi) - norm0)
    if drift > cfg.norm_tolerance:
        raise IntegrationError(drift, cfg.norm_tolerance)
    final = RotorState(basis, psi[:, 0])
    top = final.top_population()
    if top >= cfg.escape_tolerance:
        raise BasisEscapeError(top, basis.Jmax)
    return final


def free_evolve(state: RotorState, dtau: float) -> RotorState:
    """Exact field-free evolution by ``dtau >= 0``."""
    if dtau < 0:
        raise DomainError(f"dtau must be >= 0, got {dtau}")
    phase = np.exp(-1j * kinetic_diagonal(state.basis) * dtau)
    return RotorState(state.basis, state.amplitudes * phase)


def orientation_from_coherences(q, tau) -> np.ndarray:
    """Evaluate ``2 Re sum_J q_J exp(-2i(J+1) tau)``.

    ``q`` is indexed by the absolute lower level ``J`` of each line and may
    carry extra leading axes (e.g. members).
    """
    q = np.asarray(q)
    tau = np.atleast_1d(np.asarray(tau, dtype=np.float64))
    omega = 2.0 * (np.arange(q.shape[-1]) + 1.0)
    out = np.empty(q.shape[:-1] + tau.shape)
    chunk = max(1, 2**20 // max(q.shape[-1], 1))
    for i in range(0, tau.size, chunk):
        e = np.exp(-1j * np.outer(omega, tau[i : i + chunk]))
        out[..., i : i + chunk] = 2.0 * (q @ e).real
    return out


@dataclass(frozen=True)
class OrientationMax:
    """Extremum of ``|<cos theta>|`` over one revival period after the pulse."""

    value: float
    magnitude: float
    tau: float


def max_post_pulse_orientation(q, n_samples: int | None = None, xtol: float = 1e-8) -> OrientationMax:
    """Locate ``max |<cos theta>(tau)|`` for ``tau`` in ``[0, pi)`` after the pulse.

    Dense FFT sampling (at least 2048 points) followed by bounded Brent
    refinement of the best few sampled peaks.
    """
    q = np.asarray(q, dtype=np.complex128)
    L = q.size
    n = max(2048, 32 * (L + 1))
    if n_samples:
        n = max(n, n_samples)
    if not np.any(q):
        return OrientationMax(0.0, 0.0, 0.0)
    # tau_m = pi m / n  =>  exp(-2i(J+1) tau_m) = exp(-2 pi i (J+1) m / n)
    coeff = np.zeros(n, dtype=np.complex128)
    coeff[1 : L + 1] = q
    v = 2.0 * np.fft.fft(coeff).real
    a = np.abs(v)
    is_peak = (a >= np.roll(a, 1)) & (a >= np.roll(a, -1))
    candidates = np.flatnonzero(is_peak)
    candidates = candidates[np.argsort(a[candidates])[::-1][:4]]
    dt = math.pi / n
    best = OrientationMax(float(v[candidates[0]]), float(a[candidates[0]]), candidates[0] * dt)

    def neg_abs(t):
        return -abs(float(orientation_from_coherences(q, t)[0]))

    for m in candidates:
        t0 = m * dt
        res = minimize_scalar(neg_abs, bounds=(t0 - dt, t0 + dt), method="bounded",
                              options={"xatol": xtol})
        if -res.fun > best.magnitude:
            t = float(res.x) % math.pi
            val = float(orientation_from_coherences(q, t)[0])
            best = OrientationMax(val, abs(val), t)
    return best


@dataclass
class EnsembleRun:
    """Per-member results of propagating a thermal ensemble through one pulse.

    ``coherences[i, J]`` is ``q_J`` of member ``ensemble.members[i]`` at the
    end of the pulse.  If in-pulse sampling was requested,
    ``in_pulse_values[s, i]`` is that member's ``<cos theta>`` at
    ``in_pulse_tau[s]`` (which runs from ``-D`` to ``0``).
    """

    params: ReducedParams
    ensemble: ThermalEnsemble
    Jmax: int
    headroom: int
    n_steps: int
    norm_drift: float
    top_population: float
    coherences: np.ndarray
    weights: np.ndarray
    in_pulse_tau: np.ndarray | None = None
    in_pulse_values: np.ndarray | None = None
    final_states: dict = field(default_factory=dict, repr=False)

    @property
    def ground_index(self) -> int:
        return self.ensemble.index()[(0, 0)]

    def _sum(self, rows) -> np.ndarray:
        acc = np.zeros(self.coherences.shape[1], dtype=np.complex128)
        for i in rows:
            acc = acc + self.weights[i] * self.coherences[i]
        return acc

    def line_sums(self) -> dict[str, np.ndarray]:
        """Weighted coherence sums for the total, zero-T and thermal responses."""
        g = self.ground_index
        n = len(self.weights)
        zero = self._sum([g])
        thermal = self._sum([i for i in range(n) if i != g])
        total = self._sum(range(n))
        return {"total": total, "zero_T": zero, "thermal": thermal}

    def max_orientation(self) -> dict[str, OrientationMax]:
        return {k: max_post_pulse_orientation(q) for k, q in self.line_sums().items()}

    def member_state(self, J0: int, M0: int) -> RotorState:
        J0s, psi, basis = self.final_states[M0]
        return RotorState(basis, psi[:, J0s.index(J0)].copy())


def _run_members(params, ensemble, Jmax, cfg, in_pulse_samples, keep_states):
    pulse = PulseShape.from_params(params)
    n_steps = cfg.step_count(pulse, Jmax)
    sample_every = None
    if in_pulse_samples:
        sample_every = int(math.ceil(n_steps / in_pulse_samples))
        n_steps = sample_every * in_pulse_samples
    index = ensemble.index()
    n_members = len(ensemble.members)
    coh = np.zeros((n_members, Jmax), dtype=np.complex128)
    samples = np.zeros((in_pulse_samples + 1, n_members)) if in_pulse_samples else None
    by_m = defaultdict(list)
    for m in ensemble.members:
        by_m[m.M0].append(m.J0)
    drift = 0.0
    top = 0.0
    states = {}
    for M0 in sorted(by_m):
        J0s = sorted(by_m[M0])
        basis = BasisSpec(M0, Jmax)
        psi = np.zeros((basis.dim, len(J0s)), dtype=np.complex128)
        psi[np.array(J0s) - basis.Jmin, np.arange(len(J0s))] = 1.0
        s = propagate_block(psi, basis, pulse, n_steps, cfg, sample_every)
        drift = max(drift, float(np.max(np.abs(np.linalg.norm(psi, axis=0) - 1.0))))
        top = max(top, float(np.max(np.sum(np.abs(psi[-2:]) ** 2, axis=0))))
        q = line_coherences(psi, coupling_vector(basis))
        rows = [index[(J0, M0)] for J0 in J0s]
        coh[rows, basis.Jmin :] = q.T
        if samples is not None:
            samples[:, rows] = s
        if keep_states:
            states[M0] = (J0s, psi, basis)
    return n_steps, drift, top, coh, samples, states


def propagate_ensemble(
    params: ReducedParams,
    cfg: PropagationConfig | None = None,
    cutoff: float = 1e-6,
    ensemble: ThermalEnsemble | None = None,
    in_pulse_samples: int = 0,
    headroom: int | None = None,
    keep_states: bool = False,
) -> EnsembleRun:
    """Propagate every ensemble member through the pulse.

    Members sharing ``M0`` are advanced together as columns of one block.
    The basis is ``J <= J0max + headroom``; if more than
    ``cfg.escape_tolerance`` population reaches the top two levels the
    headroom is doubled and the whole ensemble rerun.
    """
    cfg = cfg or PropagationConfig()
    ensemble = ensemble or build_ensemble(params.T_tilde, cutoff)
    pulse = PulseShape.from_params(params)
    headroom = headroom or headroom_policy(pulse)
    max_abs_m = max(abs(m.M0) for m in ensemble.members)
    for _ in range(cfg.max_doublings + 1):
        Jmax = max(ensemble.J0max, max_abs_m) + headroom
        n_steps, drift, top, coh, samples, states = _run_members(
            params, ensemble, Jmax, cfg, in_pulse_samples, keep_states
        )
        if drift > cfg.norm_tolerance:
            raise IntegrationError(drift, cfg.norm_tolerance)
        if top < cfg.escape_tolerance:
            break
        logger.info("basis escape (%.2e) at Jmax=%d, doubling headroom", top, Jmax)
        headroom *= 2
    else:
        raise BasisEscapeError(top, Jmax)
    tau = None
    if in_pulse_samples:
        tau = params.D * (np.arange(in_pulse_samples + 1) / in_pulse_samples - 1.0)
    return EnsembleRun(
        params=params,
        ensemble=ensemble,
        Jmax=Jmax,
        headroom=headroom,
        n_steps=n_steps,
        norm_drift=drift,
        top_population=top,
        coherences=coh,
        weights=ensemble.member_weights(),
        in_pulse_tau=tau,
        in_pulse_values=samples,
        final_states=states,
    )


@dataclass(frozen=True)
class OrientationTrace:
    """Thermal ``<cos theta>`` and its decomposition on a time grid.

    ``pulse_end`` is the index of the first sample at or after ``tau = 0``.
    """

    times: np.ndarray
    total: np.ndarray
    zero_T: np.ndarray
    thermal: np.ndarray
    pulse_end: int


def orientation_trace(run: EnsembleRun, tau_grid) -> OrientationTrace:
    """Thermal trace: stored in-pulse samples (if any) followed by ``tau_grid``.

    ``tau_grid`` holds post-pulse times (``>= 0``) evaluated analytically.
    """
    tau_post = np.asarray(tau_grid, dtype=np.float64)
    if np.any(tau_post < 0):
        raise DomainError("post-pulse times must be >= 0")
    g = run.ground_index
    others = [i for i in range(len(run.weights)) if i != g]
    sums = run.line_sums()
    zero_post = orientation_from_coherences(sums["zero_T"], tau_post)
    thermal_post = orientation_from_coherences(sums["thermal"], tau_post)
    if run.in_pulse_values is not None:
        vals = run.in_pulse_values
        zero_in = run.weights[g] * vals[:, g]
        thermal_in = np.zeros(vals.shape[0])
        for i in others:
            thermal_in = thermal_in + run.weights[i] * vals[:, i]
        # the last in-pulse sample coincides with tau = 0
        times = np.concatenate([run.in_pulse_tau[:-1], tau_post])
        zero = np.concatenate([zero_in[:-1], zero_post])
        thermal = np.concatenate([thermal_in[:-1], thermal_post])
        end = vals.shape[0] - 1
    else:
        times, zero, thermal, end = tau_post, zero_post, thermal_post, 0
    return OrientationTrace(times=times, total=zero + thermal, zero_T=zero, thermal=thermal,
                            pulse_end=end)
