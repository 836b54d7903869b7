"""Command-line interface.

Subcommands: ``molecules``, ``convert``, ``spectrum``, ``trace``, ``scan``.
Exit codes: 0 success, 1 failed cells / integration failure (partial
results kept), 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys

import numpy as np

from . import __version__, kernels, svg
from .config import (
    ConfigError,
    RunConfig,
    field_mode,
    load_file,
    merge,
    physical_field,
    reduced_runs,
    resolve_molecule,
    worker_count,
)
from .field import PulseShape, overlap_report, spectrum
from .propagator import (
    BasisEscapeError,
    IntegrationError,
    PropagationConfig,
    orientation_trace,
    propagate_ensemble,
)
from .resultio import atomic_write, config_hash, write_csv
from .scans import (
    COMPONENTS,
    Axis,
    Checkpoint,
    ScanGrid,
    run_scan,
)
from .thermal import build_ensemble
from .units import DEFAULT_FIELD, MOLECULES, DomainError, to_reduced

logger = logging.getLogger("thzorient")

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="TOML file with run settings; flags override it")
    g = p.add_argument_group("molecule")
    g.add_argument("--molecule", help=f"built-in molecule ({', '.join(MOLECULES)})")
    g.add_argument("--B", type=float, help="rotational constant [cm^-1]")
    g.add_argument("--mu0", type=float, help="permanent dipole [debye]")
    g = p.add_argument_group("field (physical or reduced)")
    g.add_argument("--E-peak", dest="E_peak", type=float, help="amplitude [MV/cm]")
    g.add_argument("--delta", type=float, help="duration [ps]")
    g.add_argument("--f", type=float, help="central frequency [THz]")
    g.add_argument("--A", type=float, help="reduced amplitude")
    g.add_argument("--F", type=float, help="reduced frequency")
    g.add_argument("--D", type=float, help="reduced duration")
    g = p.add_argument_group("temperature")
    g.add_argument("--T", type=float, nargs="+", help="temperature(s) [K]")
    g.add_argument("--Ttilde", type=float, nargs="+", help="reduced temperature(s)")
    g = p.add_argument_group("numerics and output")
    g.add_argument("--cutoff", type=float, help="thermal tail mass cutoff (default 1e-6)")
    g.add_argument("--step-factor", dest="step_factor", type=float)
    g.add_argument("--norm-tolerance", dest="norm_tolerance", type=float)
    g.add_argument("--out", help="output directory (default ./out)")
    g.add_argument("--svg", action="store_const", const=True, help="also write SVG figures")
    g.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thzorient", allow_abbrev=False,
        description="Orientation of linear molecules by zero-area THz pulses.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("molecules", help="list built-in molecules as CSV", allow_abbrev=False)

    p = sub.add_parser("convert", help="print reduced parameters", allow_abbrev=False)
    _common(p)

    p = sub.add_parser("spectrum", help="pulse spectrum and rotational line overlap", allow_abbrev=False)
    _common(p)
    p.add_argument("--jmax-lines", dest="jmax_lines", type=int)

    p = sub.add_parser("trace", help="thermal <cos theta>(tau) traces", allow_abbrev=False)
    _common(p)
    p.add_argument("--in-pulse-samples", dest="in_pulse_samples", type=int)
    p.add_argument("--post-samples", dest="post_samples", type=int)
    p.add_argument("--periods", type=float, help="post-pulse length in revival periods")

    p = sub.add_parser("scan", help="maximum-orientation maps and curves", allow_abbrev=False)
    _common(p)
    p.add_argument("--kind", choices=["BT", "E0T", "curve"])
    p.add_argument("--B-range", dest="B_range", type=float, nargs=3, metavar=("MIN", "MAX", "N"))
    p.add_argument("--B-scale", dest="B_scale", choices=["log", "linear"])
    p.add_argument("--T-range", dest="T_range", type=float, nargs=3, metavar=("MIN", "MAX", "N"))
    p.add_argument("--E0-range", dest="E0_range", type=float, nargs=3, metavar=("MIN", "MAX", "N"))
    p.add_argument("--workers", type=int, help="worker processes (fallback: env THZORIENT_WORKERS)")
    p.add_argument("--fresh", action="store_true", help="discard an existing checkpoint")
    return parser


_NOT_CONFIG = {"command", "config", "verbose", "fresh"}


def _config_from_args(args) -> RunConfig:
    file_values = load_file(args.config) if getattr(args, "config", None) else {}
    flags = {k: v for k, v in vars(args).items() if k not in _NOT_CONFIG}
    return merge(file_values, flags)


def _prop_config(cfg: RunConfig) -> PropagationConfig:
    kw = {}
    if cfg.step_factor is not None:
        kw["step_factor"] = cfg.step_factor
    if cfg.norm_tolerance is not None:
        kw["norm_tolerance"] = cfg.norm_tolerance
    try:
        return PropagationConfig(**kw)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def _cutoff(cfg: RunConfig) -> float:
    c = 1e-6 if cfg.cutoff is None else cfg.cutoff
    if not 0 < c < 1:
        raise ConfigError(f"cutoff must lie in (0, 1), got {c}")
    return c


def _reject(cfg: RunConfig, command: str, keys) -> None:
    bad = [k for k in keys if getattr(cfg, k) is not None]
    if bad:
        raise ConfigError(f"key(s) not used by '{command}': {', '.join(bad)}")


def _stem(command: str, cfg: RunConfig) -> tuple[str, dict]:
    echo = cfg.echo()
    ident = {k: v for k, v in echo.items() if k not in ("out", "svg", "workers")}
    ident["command"] = command
    outdir = cfg.out or "out"
    return os.path.join(outdir, f"{command}-{config_hash(ident)}"), echo


def _meta(command: str, echo: dict, **extra) -> dict:
    meta = {"command": command, "config": echo}
    meta.update(extra)
    return meta


# -- subcommands -------------------------------------------------------------


def cmd_molecules(args) -> int:
    w = sys.stdout
    w.write("name,B_cm-1,mu0_debye,A,F,D\n")
    for mol in MOLECULES.values():
        r = to_reduced(mol, DEFAULT_FIELD)
        w.write(f"{mol.name},{mol.B},{mol.mu0},{r.A:.4f},{r.F:.4f},{r.D:.4f}\n")
    return EXIT_OK


def cmd_convert(cfg: RunConfig) -> int:
    _reject(cfg, "convert", ("kind", "B_range", "T_range", "E0_range", "workers"))
    if field_mode(cfg) == "reduced":
        raise ConfigError("convert takes a physical field (E_peak, delta, f)")
    mol = resolve_molecule(cfg)
    fld = physical_field(cfg)
    print(f"# {mol.name}: B={mol.B} cm^-1 mu0={mol.mu0} D; "
          f"E={fld.E_peak} MV/cm delta={fld.delta} ps f={fld.f} THz")
    print(f"{'T[K]':>10} {'A':>12} {'F':>10} {'D':>10} {'Ttilde':>10}")
    for T in cfg.T or [0.0]:
        try:
            r = to_reduced(mol, fld, float(T))
        except DomainError as exc:
            raise ConfigError(str(exc)) from None
        print(f"{T:>10g} {r.A:>12.4f} {r.F:>10.4f} {r.D:>10.4f} {r.T_tilde:>10.4f}")
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig) -> int:
    _reject(cfg, "spectrum", ("kind", "B_range", "T_range", "E0_range", "workers"))
    runs = reduced_runs(cfg)
    jmax_lines = 30 if cfg.jmax_lines is None else cfg.jmax_lines
    stem, echo = _stem("spectrum", cfg)
    params = runs[0][0]
    pulse = PulseShape.from_params(params)
    spec = spectrum(pulse)
    write_csv(stem + ".csv", _meta("spectrum", echo, pulse=[pulse.A, pulse.F, pulse.D],
                                   axis="omega = 2 pi nu", resolution=spec.resolution),
              ["omega", "magnitude"], zip(spec.omega, spec.magnitudes))
    line_sets = []
    for k, (p, label) in enumerate(runs):
        rep = overlap_report(pulse, build_ensemble(p.T_tilde, _cutoff(cfg)), jmax_lines)
        write_csv(f"{stem}-lines-{k}.csv",
                  _meta("spectrum", echo, temperature=label, T_tilde=p.T_tilde, score=rep.score),
                  ["J", "omega", "P", "magnitude"],
                  [(ln.J, ln.omega, ln.P, ln.magnitude) for ln in rep.lines])
        line_sets.append((label, rep))
    if cfg.svg:
        for k, (label, rep) in enumerate(line_sets):
            doc = svg.spectrum_overlay(
                [{"omega": spec.omega, "magnitude": spec.magnitudes,
                  "label": f"A={pulse.A:.3g} F={pulse.F:.3g} D={pulse.D:.3g}"}],
                [ln.omega for ln in rep.lines], [ln.P for ln in rep.lines],
                title=f"field spectrum and populations, {label}",
                xmax=2.0 * (jmax_lines + 1),
            )
            atomic_write(f"{stem}-{k}.svg", doc)
    print(stem + ".csv")
    return EXIT_OK


def cmd_trace(cfg: RunConfig) -> int:
    _reject(cfg, "trace", ("kind", "B_range", "T_range", "E0_range", "workers"))
    runs = reduced_runs(cfg)
    pcfg = _prop_config(cfg)
    cutoff = _cutoff(cfg)
    n_in = 512 if cfg.in_pulse_samples is None else cfg.in_pulse_samples
    n_post = 2048 if cfg.post_samples is None else cfg.post_samples
    periods = 1.0 if cfg.periods is None else cfg.periods
    if n_in < 2 or n_post < 2 or periods <= 0:
        raise ConfigError("in_pulse_samples and post_samples must be >= 2, periods > 0")
    stem, echo = _stem("trace", cfg)
    tau_post = np.linspace(0.0, periods * math.pi, n_post)
    status = EXIT_OK
    series = []
    for k, (params, label) in enumerate(runs):
        try:
            run = propagate_ensemble(params, pcfg, cutoff=cutoff, in_pulse_samples=n_in)
        except (IntegrationError, BasisEscapeError) as exc:
            logger.error("%s: %s", label, exc)
            status = EXIT_FAILED
            continue
        tr = orientation_trace(run, tau_post)
        maxima = {k2: m.magnitude for k2, m in run.max_orientation().items()}
        meta = _meta(
            "trace", echo, temperature=label,
            reduced={"A": params.A, "F": params.F, "D": params.D, "T_tilde": params.T_tilde},
            ensemble=run.ensemble.summary(),
            numerics={"Jmax": run.Jmax, "n_steps": run.n_steps, "norm_drift": run.norm_drift,
                      "top_population": run.top_population, "kernel": kernels.BACKEND},
            max_orientation=maxima, pulse_end_index=tr.pulse_end,
        )
        write_csv(f"{stem}-{k}.csv", meta, ["tau", "total", "zero_T", "thermal"],
                  zip(tr.times, tr.total, tr.zero_T, tr.thermal))
        print(f"{stem}-{k}.csv")
        name = ", ".join(f"{a}={b:g}" for a, b in label.items())
        series.append({"x": tr.times, "y": tr.total, "label": name, "dashed": k % 2 == 1})
    if cfg.svg and series:
        atomic_write(stem + ".svg", svg.line_plot(
            series, "tau (pulse ends at 0)", "<cos theta>", "thermal orientation", markers=[0.0]))
    return status


def _axis_values(rng, name, scale="linear"):
    lo, hi, n = rng
    n = int(n)
    if n < 1 or n != rng[2]:
        raise ConfigError(f"{name}: point count must be a positive integer")
    if n == 1:
        return np.array([lo])
    if scale == "log":
        if lo <= 0:
            raise ConfigError(f"{name}: log scale needs positive bounds")
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def _scan_grid(cfg: RunConfig) -> ScanGrid:
    kind = cfg.kind or "BT"
    try:
        if cfg.T is not None:
            T_values = np.asarray(cfg.T, dtype=float)
        else:
            T_values = _axis_values(cfg.T_range or [0.0, 300.0, 64], "T_range")
        _reject(cfg, f"scan {kind}", ("Ttilde", "A", "F", "D"))
        if kind == "BT":
            _reject(cfg, "scan BT", ("molecule", "B", "E0_range"))
            B = _axis_values(cfg.B_range or [0.1, 21.0, 64], "B_range", cfg.B_scale or "log")
            fld = physical_field(cfg)
            mu0 = 1.0 if cfg.mu0 is None else cfg.mu0
            return ScanGrid("B_T", Axis("B", "cm^-1", tuple(B)), Axis("T", "K", tuple(T_values)),
                            {"mu0": mu0, "E_peak": fld.E_peak, "delta": fld.delta, "f": fld.f})
        _reject(cfg, f"scan {kind}", ("B_range", "B_scale"))
        mol = resolve_molecule(cfg, default="LiCl" if kind == "E0T" else None)
        fld = physical_field(cfg)
        if kind == "E0T":
            _reject(cfg, "scan E0T", ("E_peak",))
            E0 = _axis_values(cfg.E0_range or [0.0, 2.5, 64], "E0_range")
        else:
            _reject(cfg, "scan curve", ("E0_range",))
            E0 = np.array([fld.E_peak])
        return ScanGrid("E0_T", Axis("E0", "MV/cm", tuple(E0)), Axis("T", "K", tuple(T_values)),
                        {"molecule": mol.name, "B": mol.B, "mu0": mol.mu0,
                         "delta": fld.delta, "f": fld.f})
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def cmd_scan(cfg: RunConfig, fresh: bool = False) -> int:
    grid = _scan_grid(cfg)
    pcfg = _prop_config(cfg)
    cutoff = _cutoff(cfg)
    workers = worker_count(cfg)
    stem, echo = _stem("scan", cfg)
    os.makedirs(os.path.dirname(stem) or ".", exist_ok=True)
    ck_path = stem + ".ndjson"
    if fresh and os.path.exists(ck_path):
        os.unlink(ck_path)
    res = run_scan(grid, pcfg, cutoff, workers, Checkpoint(ck_path, os.path.basename(stem)))
    ok_meta = res.meta
    summary = {
        "cells": int(res.ok.size),
        "failed": res.n_failed,
        "max_Jmax": float(np.nanmax(ok_meta["Jmax"])) if res.ok.any() else None,
        "max_J0max": float(np.nanmax(ok_meta["J0max"])) if res.ok.any() else None,
        "max_members": float(np.nanmax(ok_meta["members"])) if res.ok.any() else None,
        "max_norm_drift": float(np.nanmax(ok_meta["norm_drift"])) if res.ok.any() else None,
    }
    meta = _meta("scan", echo, grid=grid.describe(), cutoff=cutoff,
                 tolerances={"norm": pcfg.norm_tolerance, "escape": pcfg.escape_tolerance,
                             "step_factor": pcfg.step_factor},
                 summary=summary)
    a1, a2 = grid.axis1, grid.axis2
    is_curve = (cfg.kind == "curve")
    if is_curve:
        write_csv(stem + "-curve.csv", meta, ["T", "total", "zero_T", "thermal"],
                  [(T, res.total[0, j], res.zero_T[0, j], res.thermal[0, j])
                   for j, T in enumerate(a2.values)])
    else:
        for comp in COMPONENTS:
            rows = [[v1] + list(res.magnitude[comp][i]) for i, v1 in enumerate(a1.values)]
            write_csv(f"{stem}-{comp}.csv", dict(meta, component=comp),
                      [f"{a1.name}\\{a2.name}"] + [f"{t:.12g}" for t in a2.values], rows)
    cell_rows = [
        (r["i"], r["j"], r["v1"], r["T"], r["status"], r.get("Jmax"), r.get("J0max"),
         r.get("members"), r.get("n_steps"), r.get("norm_drift"))
        for r in res.records
    ]
    write_csv(stem + "-cells.csv", meta,
              ["i", "j", a1.name, "T", "status", "Jmax", "J0max", "members", "n_steps", "norm_drift"],
              cell_rows)
    if cfg.svg:
        if is_curve:
            atomic_write(stem + "-curve.svg", svg.line_plot(
                [{"x": a2.values, "y": res.magnitude[c][0], "label": c} for c in COMPONENTS],
                "T [K]", "max |<cos theta>|", f"{grid.fixed['molecule']}"))
        else:
            for comp in COMPONENTS:
                atomic_write(f"{stem}-{comp}.svg", svg.heatmap(
                    res.magnitude[comp], a1.values, a2.values,
                    f"{a1.name} [{a1.unit}]", "T [K]", f"max orientation ({comp})",
                    logx=(grid.kind == "B_T" and (cfg.B_scale or "log") == "log" and len(a1.values) > 1),
                ))
    print(stem)
    if res.n_failed:
        logger.error("%d cell(s) failed; see %s-cells.csv", res.n_failed, stem)
        return EXIT_FAILED
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "molecules":
        return cmd_molecules(args)
    try:
        cfg = _config_from_args(args)
        if args.command == "convert":
            return cmd_convert(cfg)
        if args.command == "spectrum":
            return cmd_spectrum(cfg)
        if args.command == "trace":
            return cmd_trace(cfg)
        return cmd_scan(cfg, fresh=args.fresh)
    except ConfigError as exc:
        print(f"thzorient {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
