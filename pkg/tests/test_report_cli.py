import json
import subprocess
import sys

import numpy as np
import pytest

from onebitmimo.bench import BerCurve, SimConfig, run_ber_sim
from onebitmimo.cli import main
from onebitmimo.core import ConfigError
from onebitmimo.report import CSV_HEADER, emit_csv, emit_json, emit_plot


def curves_fixture():
    cfg = SimConfig(nt=8, k=2, modulation="qpsk", snr_grid_db=[0.0, 5.0],
                    slots=120, master_seed=9, precoders=["zf-inf", "lp"])
    return run_ber_sim(cfg)


def test_csv_schema_and_sorting(tmp_path):
    curves = curves_fixture()
    path = tmp_path / "out.csv"
    emit_csv(curves, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == CSV_HEADER
    assert len(lines) == 1 + len(curves)
    keys = [(ln.split(",")[1], float(ln.split(",")[0])) for ln in lines[1:]]
    assert keys == sorted(keys)
    for ln in lines[1:]:
        f = ln.split(",")
        assert float(f[4]) == pytest.approx(int(f[3]) / int(f[2]), rel=1e-12)
        assert f[7] == "0.000"  # deterministic by default


def test_csv_rerun_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    emit_csv(curves_fixture(), a)
    emit_csv(curves_fixture(), b)
    assert a.read_bytes() == b.read_bytes()


def test_csv_timing_opt_in(tmp_path):
    path = tmp_path / "t.csv"
    emit_csv(curves_fixture(), path, include_timing=True)
    walls = [ln.split(",")[7] for ln in path.read_text().strip().split("\n")[1:]]
    assert any(w != "0.000" for w in walls)


def test_empty_curves_rejected(tmp_path):
    with pytest.raises(ConfigError):
        emit_csv([], tmp_path / "x.csv")


def test_json_contents(tmp_path):
    path = tmp_path / "out.json"
    cfg = SimConfig(nt=8, k=2, modulation="qpsk", snr_grid_db=[0.0],
                    slots=50, master_seed=1, precoders=["lp"])
    curves = run_ber_sim(cfg)
    emit_json(curves, path, config=cfg)
    doc = json.loads(path.read_text())
    assert doc["metadata"]["receiver_scaling"] == "genie"
    assert doc["config"]["nt"] == 8
    assert len(doc["points"]) == 1
    p = doc["points"][0]
    assert {"precoder", "snr_db", "bits_sent", "bit_errors", "ber",
            "avg_margin", "avg_mults", "wallclock_ms"} <= set(p)


def test_plot_writes_svg(tmp_path):
    path = tmp_path / "fig.svg"
    emit_plot(curves_fixture(), path)
    head = path.read_bytes()[:200].decode("utf-8", "ignore")
    assert "<svg" in head or "<?xml" in head


def test_cli_run_with_config_file(tmp_path):
    cfgfile = tmp_path / "bench.cfg"
    out = tmp_path / "r.csv"
    cfgfile.write_text(
        "nt = 8\nk = 2\nmod = qpsk\nsnr = 0:5:10\n"
        f"slots = 64\nseed = 3\nprecoders = zf-inf\nout = {out}\n"
    )
    assert main(["run", "--config", str(cfgfile)]) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == CSV_HEADER and len(lines) == 4


def test_cli_flags_override_config(tmp_path):
    cfgfile = tmp_path / "bench.cfg"
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    cfgfile.write_text(
        "nt = 8\nk = 2\nmod = qpsk\nsnr = 0:5:5\nslots = 32\nseed = 3\n"
        f"precoders = zf-inf\nout = {out_a}\n"
    )
    assert main(["run", "--config", str(cfgfile), "--out", str(out_b),
                 "--slots", "16"]) == 0
    assert not out_a.exists()
    assert "16" in out_b.read_text().split("\n")[1].split(",")[2]


def test_cli_outputs_json_and_plot(tmp_path):
    out = tmp_path / "r.csv"
    rc = main(["run", "--nt", "8", "--k", "2", "--mod", "qpsk", "--snr", "0:5:5",
               "--slots", "32", "--seed", "1", "--precoders", "zf-inf,lp",
               "--threads", "1", "--out", str(out),
               "--json", str(tmp_path / "r.json"), "--plot", str(tmp_path / "r.svg")])
    assert rc == 0
    assert (tmp_path / "r.json").exists() and (tmp_path / "r.svg").exists()


def test_cli_config_error_exit_code(tmp_path):
    rc = main(["run", "--nt", "4", "--k", "8", "--mod", "qpsk", "--snr", "0:5:5",
               "--slots", "8", "--out", str(tmp_path / "x.csv")])
    assert rc == 2
    rc = main(["run", "--nt", "4", "--k", "2", "--mod", "qpsk", "--snr", "0:5:5",
               "--slots", "8", "--precoders", "unknown",
               "--out", str(tmp_path / "x.csv")])
    assert rc == 2
    rc = main(["run", "--nt", "4", "--k", "2", "--mod", "qpsk", "--snr", "bad",
               "--slots", "8", "--out", str(tmp_path / "x.csv")])
    assert rc == 2


def test_cli_missing_required_is_config_error(tmp_path):
    assert main(["run", "--nt", "4"]) == 2


def test_cli_unwritable_output(tmp_path):
    rc = main(["run", "--nt", "4", "--k", "2", "--mod", "qpsk", "--snr", "0:5:5",
               "--slots", "8", "--out", "/nonexistent-dir/x.csv"])
    assert rc == 2


def test_cli_opt_parsing(tmp_path):
    out = tmp_path / "r.csv"
    rc = main(["run", "--nt", "6", "--k", "2", "--mod", "qpsk", "--snr", "5",
               "--slots", "16", "--precoders", "pbb", "--opt", "pbb.node_limit=16",
               "--out", str(out)])
    assert rc == 0
    assert main(["run", "--nt", "6", "--k", "2", "--mod", "qpsk", "--snr", "5",
                 "--slots", "16", "--precoders", "pbb", "--opt", "garbage",
                 "--out", str(out)]) == 2


def test_cli_range_check_and_selftest(capsys):
    assert main(["range-check", "--nt", "64", "--trials", "40", "--seed", "2"]) == 0
    out = capsys.readouterr().out
    assert "0.79" in out or "0.80" in out or "ratio" in out
    assert main(["selftest"]) == 0
    assert "[PASS]" in capsys.readouterr().out


def test_console_script_entrypoint():
    proc = subprocess.run([sys.executable, "-m", "onebitmimo.cli", "range-check",
                           "--nt", "64", "--trials", "20"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "sqrt(2/pi)" in proc.stdout
