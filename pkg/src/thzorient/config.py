"""Run configuration: TOML file plus command-line overrides, validated together."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .units import (
    DEFAULT_FIELD,
    MOLECULES,
    DomainError,
    PhysicalField,
    PhysicalMolecule,
    ReducedParams,
    get_molecule,
    to_reduced,
)

WORKERS_ENV = "THZORIENT_WORKERS"


class ConfigError(ValueError):
    """Invalid or incomplete configuration (CLI exit code 2)."""


@dataclass
class RunConfig:
    molecule: str | None = None
    B: float | None = None
    mu0: float | None = None
    E_peak: float | None = None
    delta: float | None = None
    f: float | None = None
    A: float | None = None
    F: float | None = None
    D: float | None = None
    T: list[float] | None = None
    Ttilde: list[float] | None = None
    # scans
    kind: str | None = None
    B_range: list[float] | None = None
    B_scale: str | None = None
    T_range: list[float] | None = None
    E0_range: list[float] | None = None
    # numerics
    cutoff: float | None = None
    step_factor: float | None = None
    norm_tolerance: float | None = None
    # output
    jmax_lines: int | None = None
    in_pulse_samples: int | None = None
    post_samples: int | None = None
    periods: float | None = None
    out: str | None = None
    svg: bool | None = None
    workers: int | None = None

    @classmethod
    def keys(cls) -> set[str]:
        return {f.name for f in fields(cls)}

    def echo(self) -> dict:
        """Non-empty settings, enough to reproduce the run."""
        return {k: v for k, v in dataclasses.asdict(self).items() if v is not None}


def _as_list(value):
    if value is None or isinstance(value, list):
        return value
    if isinstance(value, tuple):
        return list(value)
    return [value]


def load_file(path) -> dict:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path}: {exc}") from None
    unknown = sorted(set(data) - RunConfig.keys())
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    return data


def merge(file_values: dict, flag_values: dict) -> RunConfig:
    """Flags (non-``None``) override file values."""
    values = dict(file_values)
    values.update({k: v for k, v in flag_values.items() if v is not None})
    unknown = sorted(set(values) - RunConfig.keys())
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    for key in ("T", "Ttilde"):
        values[key] = _as_list(values.get(key))
    return RunConfig(**values)


PHYSICAL_FIELD_KEYS = ("E_peak", "delta", "f")
REDUCED_FIELD_KEYS = ("A", "F", "D")


def resolve_molecule(cfg: RunConfig, required=True, default: str | None = None) -> PhysicalMolecule | None:
    has_name = cfg.molecule is not None
    has_raw = cfg.B is not None or cfg.mu0 is not None
    if has_name and has_raw:
        raise ConfigError("give either 'molecule' or raw 'B'/'mu0', not both")
    if has_name:
        try:
            return get_molecule(cfg.molecule)
        except KeyError as exc:
            raise ConfigError(f"molecule: {exc.args[0]}") from None
    if has_raw:
        if cfg.B is None:
            raise ConfigError("missing required key 'B' (raw molecule needs B and mu0)")
        try:
            return PhysicalMolecule("custom", float(cfg.B), float(cfg.mu0 if cfg.mu0 is not None else 0.0))
        except DomainError as exc:
            raise ConfigError(f"B/mu0: {exc}") from None
    if default is not None:
        return MOLECULES[default]
    if required:
        raise ConfigError(f"missing required key 'molecule' (one of {', '.join(MOLECULES)}) or 'B'+'mu0'")
    return None


def field_mode(cfg: RunConfig) -> str:
    phys = [k for k in PHYSICAL_FIELD_KEYS if getattr(cfg, k) is not None]
    red = [k for k in REDUCED_FIELD_KEYS if getattr(cfg, k) is not None]
    if phys and red:
        raise ConfigError(
            f"field given both physically ({', '.join(phys)}) and reduced ({', '.join(red)})"
        )
    if red:
        missing = [k for k in REDUCED_FIELD_KEYS if getattr(cfg, k) is None]
        if missing:
            raise ConfigError(f"missing required key(s) for reduced field: {', '.join(missing)}")
        return "reduced"
    return "physical"


def physical_field(cfg: RunConfig) -> PhysicalField:
    try:
        return PhysicalField(
            cfg.E_peak if cfg.E_peak is not None else DEFAULT_FIELD.E_peak,
            cfg.delta if cfg.delta is not None else DEFAULT_FIELD.delta,
            cfg.f if cfg.f is not None else DEFAULT_FIELD.f,
        )
    except DomainError as exc:
        raise ConfigError(f"field: {exc}") from None


def reduced_runs(cfg: RunConfig) -> list[tuple[ReducedParams, dict]]:
    """One ``ReducedParams`` per requested temperature, with a label dict."""
    mode = field_mode(cfg)
    try:
        if mode == "reduced":
            if cfg.T is not None:
                raise ConfigError("reduced field mode takes 'Ttilde', not 'T'")
            if cfg.molecule is not None or cfg.B is not None or cfg.mu0 is not None:
                raise ConfigError("reduced field mode does not take a molecule")
            temps = cfg.Ttilde or [0.0]
            return [
                (ReducedParams(float(cfg.A), float(cfg.F), float(cfg.D), float(t)), {"Ttilde": t})
                for t in temps
            ]
        if cfg.Ttilde is not None:
            raise ConfigError("physical field mode takes 'T' in kelvin, not 'Ttilde'")
        mol = resolve_molecule(cfg)
        fld = physical_field(cfg)
        temps = cfg.T or [0.0]
        return [(to_reduced(mol, fld, float(t)), {"T": t}) for t in temps]
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def worker_count(cfg: RunConfig) -> int:
    if cfg.workers is not None:
        return int(cfg.workers)
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    return 1
