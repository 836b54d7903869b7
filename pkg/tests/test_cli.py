import io
import os
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from thzorient.cli import main
from thzorient.resultio import atomic_write, fmt, read_csv, render_csv, split_result

TRACE = ["trace", "--A", "4", "--F", "2", "--D", "1", "--in-pulse-samples", "16",
         "--post-samples", "64"]


def _files(d):
    return sorted(os.listdir(d)) if os.path.isdir(d) else []


def test_molecules_csv(capsys):
    assert main(["molecules"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "name,B_cm-1,mu0_debye,A,F,D"
    rows = {ln.split(",")[0]: ln.split(",") for ln in lines[1:]}
    assert set(rows) == {"OCS", "HF", "LiH", "CO", "LiCl"}
    assert float(rows["CO"][3]) == pytest.approx(1.9479, abs=1e-3)


def test_convert_prints_reduced_temperature(capsys):
    assert main(["convert", "--B", "2.0", "--mu0", "1.0", "--T", "0", "143.9"]) == 0
    rows = capsys.readouterr().out.strip().splitlines()[2:]
    assert float(rows[1].split()[-1]) == pytest.approx(50.0, abs=0.05)


@pytest.mark.parametrize("argv,needle", [
    (["convert"], "molecule"),
    (["convert", "--molecule", "H2O"], "H2O"),
    (["trace", "--A", "4", "--F", "2"], "D"),
    (["trace", "--A", "4", "--F", "2", "--D", "1", "--E-peak", "1"], "both"),
    (["trace", "--A", "4", "--F", "2", "--D", "1", "--T", "5"], "Ttilde"),
    (["trace", "--molecule", "CO", "--Ttilde", "5"], "kelvin"),
    (["trace", "--molecule", "CO", "--T", "-5"], "T"),
    (["scan", "--kind", "BT", "--B-range", "1", "2", "2.5"], "integer"),
    (["scan", "--kind", "BT", "--molecule", "CO"], "molecule"),
])
def test_usage_errors_exit_2_without_output(tmp_path, capsys, argv, needle):
    out = tmp_path / "out"
    assert main(argv + ["--out", str(out)]) == 2
    assert needle in capsys.readouterr().err
    assert _files(out) == []


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["trace", "--bogus"])
    assert exc.value.code == 2


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text("A = 4\nF = 2\nD = 1\ncolour = 'red'\n")
    assert main(["trace", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "colour" in capsys.readouterr().err


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text("A = 4.0\nF = 2.0\nD = 3.0\nTtilde = [0.0]\nin_pulse_samples = 16\n"
                   "post_samples = 64\n")
    out = tmp_path / "o"
    assert main(["trace", "--config", str(cfg), "--D", "1", "--out", str(out)]) == 0
    path = capsys.readouterr().out.strip()
    meta, header, rows = read_csv(path)
    assert meta["reduced"]["D"] == 1.0
    assert meta["config"]["D"] == 1.0 and meta["config"]["A"] == 4.0
    assert header == ["tau", "total", "zero_T", "thermal"]
    assert len(rows) == 16 + 64


def test_trace_outputs(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(TRACE + ["--Ttilde", "0", "50", "--svg", "--out", str(out)]) == 0
    files = _files(out)
    assert sum(f.endswith(".csv") for f in files) == 2
    svg_file = next(f for f in files if f.endswith(".svg"))
    ET.parse(out / svg_file)
    meta, header, rows = read_csv(out / sorted(f for f in files if f.endswith("-1.csv"))[0])
    data = np.array(rows, dtype=float)
    np.testing.assert_allclose(data[:, 1], data[:, 2] + data[:, 3], atol=1e-11)
    assert meta["ensemble"]["J0max"] > 0
    assert data[meta["pulse_end_index"], 0] == 0.0
    # twelve significant digits in the data section
    assert any(len(c.replace("-", "").replace(".", "").lstrip("0")) >= 11 for c in rows[-1][1:])


def test_trace_is_reproducible(tmp_path, capsys):
    out = tmp_path / "o"
    main(TRACE + ["--out", str(out)])
    path = capsys.readouterr().out.strip()
    first = open(path).read()
    main(TRACE + ["--out", str(out)])
    assert split_result(open(path).read()) == split_result(first)


def test_integration_failure_exits_1(tmp_path, capsys):
    assert main(TRACE + ["--norm-tolerance", "1e-30", "--out", str(tmp_path)]) == 1


def test_spectrum_outputs(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["spectrum", "--A", "4", "--F", "2.5", "--D", "3", "--Ttilde", "1e-6", "50",
                 "--svg", "--out", str(out)]) == 0
    files = _files(out)
    lines = [f for f in files if "-lines-" in f]
    assert len(lines) == 2
    cold = read_csv(out / sorted(lines)[0])[0]["score"]
    warm = read_csv(out / sorted(lines)[1])[0]["score"]
    assert cold / warm < 1e-3
    for f in files:
        if f.endswith(".svg"):
            assert ET.parse(out / f).getroot().tag.endswith("svg")


def test_scan_cli_matches_trace(tmp_path, capsys):
    out = tmp_path / "o"
    argv = ["scan", "--kind", "BT", "--B-range", "20", "20", "1", "--T-range", "10", "10", "1",
            "--out", str(out), "--svg"]
    assert main(argv) == 0
    stem = capsys.readouterr().out.strip()
    meta, header, rows = read_csv(stem + "-total.csv")
    assert meta["summary"]["failed"] == 0
    assert main(["trace", "--B", "20", "--mu0", "1", "--T", "10", "--in-pulse-samples", "8",
                 "--post-samples", "8", "--out", str(out)]) == 0
    tmeta = read_csv(capsys.readouterr().out.strip())[0]
    assert float(rows[0][1]) == pytest.approx(tmeta["max_orientation"]["total"], abs=1e-11)
    for comp in ("total", "zero_T", "thermal"):
        ET.parse(stem + f"-{comp}.svg")


def test_scan_curve_and_failed_cells(tmp_path, capsys):
    out = tmp_path / "o"
    argv = ["scan", "--kind", "curve", "--molecule", "CO", "--T", "0", "5", "--out", str(out)]
    assert main(argv) == 0
    stem = capsys.readouterr().out.strip()
    _, header, rows = read_csv(stem + "-curve.csv")
    assert header == ["T", "total", "zero_T", "thermal"] and len(rows) == 2
    assert main(argv + ["--norm-tolerance", "1e-30"]) == 1
    stem = capsys.readouterr().out.strip()
    _, _, cells = read_csv(stem + "-cells.csv")
    assert {c[4] for c in cells} == {"failed"}


def test_workers_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("THZORIENT_WORKERS", "x")
    assert main(["scan", "--B-range", "20", "20", "1", "--T", "0", "--out", str(tmp_path)]) == 2


def test_console_script_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "thzorient.cli", "molecules"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "LiCl" in r.stdout


def test_atomic_write_replaces_whole_file(tmp_path):
    p = tmp_path / "a" / "f.csv"
    atomic_write(p, "old\n")
    atomic_write(p, "new\n")
    assert p.read_text() == "new\n"
    assert _files(tmp_path / "a") == ["f.csv"]


def test_render_and_split():
    text = render_csv({"k": {"x": 1}}, ["a", "b"], [(1 / 3, None), (2, float("nan"))])
    meta, data = split_result(text)
    assert meta == {"k": {"x": 1}}
    assert data == "a,b\n0.333333333333,\n2,\n"
    assert fmt(1e-20) == "1e-20"
