"""Parameter sweeps: (B, T) and (E0, T) maximum-orientation maps and
per-molecule temperature curves.

Every grid cell is independent: reduce units, build the thermal ensemble,
propagate, and keep the maximum post-pulse orientation of the total,
zero-temperature and thermal responses.  Completed cells are appended to an
NDJSON checkpoint, one record per line, so an interrupted scan resumes
where it stopped.  Records store floats with ``repr`` precision, which makes
resumed and uninterrupted scans bitwise identical.
"""

from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import ndimage

from .propagator import BasisEscapeError, IntegrationError, PropagationConfig, propagate_ensemble
from .units import (
    DEFAULT_FIELD,
    MOLECULES,
    DomainError,
    PhysicalField,
    PhysicalMolecule,
    to_reduced,
)

logger = logging.getLogger(__name__)

COMPONENTS = ("total", "zero_T", "thermal")
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class Axis:
    name: str
    unit: str
    values: tuple[float, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", tuple(float(x) for x in v))
        if v.size < 1:
            raise DomainError(f"axis {self.name} is empty")
        if v.size > 1 and not (np.all(np.diff(v) > 0) or np.all(np.diff(v) < 0)):
            raise DomainError(f"axis {self.name} must be strictly monotone")


@dataclass(frozen=True)
class ScanGrid:
    """Two scanned axes plus the parameters held fixed.

    ``kind`` is ``"B_T"`` (axis1 = B in cm^-1, fixed ``mu0`` and field) or
    ``"E0_T"`` (axis1 = E0 in MV/cm, fixed molecule, ``delta`` and ``f``);
    axis2 is always the temperature in kelvin.
    """

    kind: str
    axis1: Axis
    axis2: Axis
    fixed: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("B_T", "E0_T"):
            raise DomainError(f"unknown scan kind {self.kind!r}")

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.axis1.values), len(self.axis2.values))

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "axis1": asdict(self.axis1),
            "axis2": asdict(self.axis2),
            "fixed": self.fixed,
        }


def cell_params(grid: ScanGrid, v1: float, T: float):
    f = grid.fixed
    if grid.kind == "B_T":
        mol = PhysicalMolecule("fictive", v1, f["mu0"])
        fld = PhysicalField(f["E_peak"], f["delta"], f["f"])
    else:
        mol = PhysicalMolecule(f["molecule"], f["B"], f["mu0"])
        fld = PhysicalField(v1, f["delta"], f["f"])
    return to_reduced(mol, fld, T)


def compute_cell(grid: ScanGrid, i: int, j: int, cfg: PropagationConfig, cutoff: float) -> dict:
    """Run one cell; failures are recorded, never raised."""
    v1 = grid.axis1.values[i]
    T = grid.axis2.values[j]
    rec = {"type": "cell", "i": i, "j": j, "v1": v1, "T": T}
    start = time.perf_counter()
    try:
        params = cell_params(grid, v1, T)
        run = propagate_ensemble(params, cfg, cutoff=cutoff)
    except (IntegrationError, BasisEscapeError) as exc:
        rec.update(status="failed", error=str(exc), norm_drift=getattr(exc, "drift", None))
    else:
        rec.update(
            status="ok",
            A=params.A, F=params.F, D=params.D, T_tilde=params.T_tilde,
            Jmax=run.Jmax, J0max=run.ensemble.J0max, members=len(run.ensemble.members),
            n_steps=run.n_steps, norm_drift=run.norm_drift, tail_mass=run.ensemble.tail_mass,
        )
        for name, m in run.max_orientation().items():
            rec[name] = m.magnitude
            rec[name + "_signed"] = m.value
            rec[name + "_tau"] = m.tau
    rec["runtime"] = time.perf_counter() - start
    return rec


class Checkpoint:
    """Append-only NDJSON log of completed cells.

    The first line identifies the scan; a trailing partial line left by an
    interrupted write is dropped on load.
    """

    def __init__(self, path, scan_id: str):
        self.path = os.fspath(path)
        self.scan_id = scan_id

    def load(self) -> dict[tuple[int, int], dict]:
        if not os.path.exists(self.path):
            return {}
        records = {}
        good_bytes = 0
        with open(self.path, "rb") as fh:
            data = fh.read()
        for raw in data.splitlines(keepends=True):
            try:
                rec = json.loads(raw)
            except ValueError:
                break
            if not raw.endswith(b"\n"):
                break
            good_bytes += len(raw)
            if rec.get("type") == "header":
                if rec.get("scan_id") != self.scan_id:
                    raise ValueError(
                        f"checkpoint {self.path} belongs to a different scan "
                        f"({rec.get('scan_id')} != {self.scan_id})"
                    )
            elif rec.get("type") == "cell":
                records[(rec["i"], rec["j"])] = rec
        if good_bytes < len(data):
            with open(self.path, "r+b") as fh:
                fh.truncate(good_bytes)
        return records

    def _write(self, rec: dict) -> None:
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def start(self) -> None:
        if not os.path.exists(self.path) or os.path.getsize(self.path) == 0:
            self._write({"type": "header", "scan_id": self.scan_id, "version": CHECKPOINT_VERSION})

    def append(self, rec: dict) -> None:
        self._write(rec)


@dataclass
class ScanResult:
    """Maximum-orientation matrices (NaN where a cell failed) and per-cell metadata."""

    grid: ScanGrid
    magnitude: dict[str, np.ndarray]
    signed: dict[str, np.ndarray]
    tau: dict[str, np.ndarray]
    meta: dict[str, np.ndarray]
    ok: np.ndarray
    errors: dict[tuple[int, int], str]
    records: list[dict]

    @property
    def total(self) -> np.ndarray:
        return self.magnitude["total"]

    @property
    def zero_T(self) -> np.ndarray:
        return self.magnitude["zero_T"]

    @property
    def thermal(self) -> np.ndarray:
        return self.magnitude["thermal"]

    @property
    def n_failed(self) -> int:
        return int(np.sum(~self.ok))


META_KEYS = ("Jmax", "J0max", "members", "n_steps", "norm_drift", "runtime")


def _assemble(grid: ScanGrid, records: dict) -> ScanResult:
    shape = grid.shape
    mag = {k: np.full(shape, np.nan) for k in COMPONENTS}
    signed = {k: np.full(shape, np.nan) for k in COMPONENTS}
    tau = {k: np.full(shape, np.nan) for k in COMPONENTS}
    meta = {k: np.full(shape, np.nan) for k in META_KEYS}
    ok = np.zeros(shape, dtype=bool)
    errors = {}
    for (i, j), rec in sorted(records.items()):
        for k in META_KEYS:
            if rec.get(k) is not None:
                meta[k][i, j] = rec[k]
        if rec["status"] != "ok":
            errors[(i, j)] = rec.get("error", "failed")
            continue
        ok[i, j] = True
        for k in COMPONENTS:
            mag[k][i, j] = rec[k]
            signed[k][i, j] = rec[k + "_signed"]
            tau[k][i, j] = rec[k + "_tau"]
    return ScanResult(grid, mag, signed, tau, meta, ok, errors,
                      [records[key] for key in sorted(records)])


def run_scan(
    grid: ScanGrid,
    cfg: PropagationConfig | None = None,
    cutoff: float = 1e-6,
    workers: int = 1,
    checkpoint: Checkpoint | None = None,
    order=None,
) -> ScanResult:
    """Evaluate every cell of ``grid`` not already present in ``checkpoint``.

    ``order`` optionally permutes the execution order of the cells; results
    do not depend on it.
    """
    cfg = cfg or PropagationConfig()
    done = checkpoint.load() if checkpoint else {}
    if checkpoint:
        checkpoint.start()
    cells = [(i, j) for i in range(grid.shape[0]) for j in range(grid.shape[1])]
    if order is not None:
        cells = [cells[k] for k in order]
    pending = [c for c in cells if c not in done]
    if done:
        logger.info("resuming: %d of %d cells already done", len(done), len(cells))

    def finish(rec):
        done[(rec["i"], rec["j"])] = rec
        if checkpoint:
            checkpoint.append(rec)
        logger.info("cell %d,%d %s (%d/%d)", rec["i"], rec["j"], rec["status"], len(done), len(cells))

    if workers <= 1:
        for i, j in pending:
            finish(compute_cell(grid, i, j, cfg, cutoff))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(compute_cell, grid, i, j, cfg, cutoff) for i, j in pending]
            for fut in as_completed(futures):
                finish(fut.result())
    return _assemble(grid, done)


def default_B_values(n: int = 64) -> np.ndarray:
    """Logarithmic B axis over [0.1, 21] cm^-1 (OCS to HF)."""
    return np.geomspace(0.1, 21.0, n)


def default_T_values(n: int = 64) -> np.ndarray:
    return np.linspace(0.0, 300.0, n)


def scan_B_T(B_values, T_values, field: PhysicalField = DEFAULT_FIELD, mu0: float = 1.0,
             **kwargs) -> ScanResult:
    """Maximum orientation over (B, T) for a fictive molecule of dipole ``mu0``."""
    grid = ScanGrid(
        "B_T",
        Axis("B", "cm^-1", tuple(B_values)),
        Axis("T", "K", tuple(T_values)),
        {"mu0": mu0, "E_peak": field.E_peak, "delta": field.delta, "f": field.f},
    )
    return run_scan(grid, **kwargs)


def scan_E0_T(E0_values, T_values, molecule: PhysicalMolecule = MOLECULES["LiCl"],
              delta: float = 5.0, f: float = 0.5, **kwargs) -> ScanResult:
    """Maximum orientation over (E0, T) for a fixed molecule and pulse timing."""
    grid = ScanGrid(
        "E0_T",
        Axis("E0", "MV/cm", tuple(E0_values)),
        Axis("T", "K", tuple(T_values)),
        {"molecule": molecule.name, "B": molecule.B, "mu0": molecule.mu0, "delta": delta, "f": f},
    )
    return run_scan(grid, **kwargs)


@dataclass(frozen=True)
class CurvePoint:
    T: float
    total: float
    zero_T: float
    thermal: float


def temperature_curve(molecule: PhysicalMolecule, T_values, field: PhysicalField = DEFAULT_FIELD,
                      **kwargs) -> list[CurvePoint]:
    """Maximum orientation and its decomposition as a function of temperature."""
    res = scan_E0_T([field.E_peak], T_values, molecule, field.delta, field.f, **kwargs)
    return [
        CurvePoint(T, res.total[0, j], res.zero_T[0, j], res.thermal[0, j])
        for j, T in enumerate(res.grid.axis2.values)
    ]


@dataclass(frozen=True)
class Zone:
    label: int
    cells: np.ndarray
    peak: tuple[int, int]
    peak_value: float


def superlevel_zones(matrix, level: float = 0.5) -> list[Zone]:
    """Connected regions (4-neighbour) where ``matrix >= level * max``.

    Sorted by decreasing peak value; NaN cells never belong to a zone.
    """
    m = np.asarray(matrix, dtype=np.float64)
    thr = level * np.nanmax(m)
    mask = np.nan_to_num(m, nan=-np.inf) >= thr
    labels, n = ndimage.label(mask)
    zones = []
    for lab in range(1, n + 1):
        cells = np.argwhere(labels == lab)
        vals = m[labels == lab]
        k = int(np.argmax(vals))
        zones.append(Zone(lab, cells, tuple(int(x) for x in cells[k]), float(vals[k])))
    return sorted(zones, key=lambda z: -z.peak_value)


def classify_zones(result: ScanResult, level: float = 0.5) -> dict[str, Zone | None]:
    """Find zone (I) and zone (II) of a (B, T) map.

    Zone (I) is a superlevel region peaking in the upper half of the B axis
    and the lower half of the T axis.  Zone (II) is a distinct region
    peaking in the lower half of the B axis at a temperature above the
    lowest grid temperature.  Halves are taken in grid-index space, which is
    logarithmic in B for the default axis.
    """
    if result.grid.kind != "B_T":
        raise DomainError("zone classification needs a (B, T) scan")
    B = np.asarray(result.grid.axis1.values)
    T = np.asarray(result.grid.axis2.values)
    nB, nT = B.size, T.size
    high_B = (lambda i: i >= nB / 2) if B[-1] > B[0] else (lambda i: i < nB / 2)
    low_T = (lambda j: j < nT / 2) if T[-1] > T[0] else (lambda j: j >= nT / 2)
    t_min = T.min()
    zone1 = zone2 = None
    for z in superlevel_zones(result.total, level):
        i, j = z.peak
        if zone1 is None and high_B(i) and low_T(j):
            zone1 = z
        elif zone2 is None and not high_B(i) and T[j] > t_min:
            zone2 = z
    return {"I": zone1, "II": zone2}


def has_two_zones(result: ScanResult, level: float = 0.5) -> bool:
    z = classify_zones(result, level)
    return z["I"] is not None and z["II"] is not None and z["I"].label != z["II"].label


def crossover_index(zero_T, thermal) -> int | None:
    """First index where the thermal maximum exceeds the zero-temperature one."""
    above = np.asarray(thermal) > np.asarray(zero_T)
    idx = np.flatnonzero(above)
    return int(idx[0]) if idx.size else None


def slope_change_index(x, y) -> int:
    """Interior grid index with the largest jump in finite-difference slope."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    slope = np.diff(y) / np.diff(x)
    return int(np.argmax(np.abs(np.diff(slope)))) + 1
