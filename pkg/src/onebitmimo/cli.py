"""Command-line front end.

Subcommands:
  run          Monte-Carlo BER sweep -> CSV (and optional JSON/figure)
  range-check  one-bit matched-filter dynamic-range probe
  selftest     quick oracle-equivalence and geometry checks

A flat key-value config file (``key = value`` per line, ``#`` comments) can
supply any ``run`` flag; explicit flags override the file.  Exit codes:
0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .core import ConfigError, NumericalError, RngStream
from . import modem
from .bench import SimConfig, dynamic_range_experiment, run_ber_sim
from .precoders import (PRECODERS, PrecoderInput, get_precoder,
                        precode_exhaustive, precode_lp, precode_pbb_full)
from . import ci
from .report import emit_csv, emit_json, emit_plot

_RUN_KEYS = ("nt", "k", "mod", "snr", "slots", "seed", "precoders", "threads",
             "out", "json", "plot", "pt", "timing")


def _parse_snr(text: str):
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"SNR grid must be start:step:stop, got {text!r}")
        start, step, stop = (float(p) for p in parts)
        if step <= 0:
            raise ConfigError("SNR step must be positive")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        if n < 1:
            raise ConfigError(f"empty SNR grid from {text!r}")
        return [start + i * step for i in range(n)]
    return [float(p) for p in text.split(",") if p.strip()]


def _parse_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path) as fh:
            for ln, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" in line:
                    key, val = line.split("=", 1)
                elif " " in line:
                    key, val = line.split(None, 1)
                else:
                    raise ConfigError(f"{path}:{ln}: expected 'key = value'")
                key = key.strip().lower()
                if key not in _RUN_KEYS:
                    raise ConfigError(f"{path}:{ln}: unknown config key {key!r}")
                values[key] = val.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return values


def _parse_opts(pairs) -> dict:
    options = {}
    for pair in pairs or []:
        try:
            target, val = pair.split("=", 1)
            name, key = target.split(".", 1)
        except ValueError:
            raise ConfigError(f"--opt expects precoder.key=value, got {pair!r}") from None
        if name not in PRECODERS:
            raise ConfigError(f"--opt references unknown precoder {name!r}")
        try:
            parsed = int(val)
        except ValueError:
            try:
                parsed = float(val)
            except ValueError:
                parsed = {"true": True, "false": False}.get(val.lower(), val)
        options.setdefault(name, {})[key] = parsed
    return options


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="onebitmimo",
                                description="1-bit massive-MIMO precoding benchmark")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Monte-Carlo BER sweep")
    run.add_argument("--config", help="flat key-value config file; flags override")
    run.add_argument("--nt", type=int)
    run.add_argument("--k", type=int)
    run.add_argument("--mod", choices=modem.CONSTELLATION_NAMES)
    run.add_argument("--snr", help="start:step:stop in dB, or comma-separated values")
    run.add_argument("--slots", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--precoders", help="comma-separated registry names")
    run.add_argument("--threads", type=int)
    run.add_argument("--out", help="CSV output path")
    run.add_argument("--json", help="JSON output path")
    run.add_argument("--plot", help="figure output path (SVG recommended)")
    run.add_argument("--pt", type=float, help="total transmit power (default 1)")
    run.add_argument("--timing", action="store_true",
                     help="write measured wallclock into the CSV (breaks byte determinism)")
    run.add_argument("--opt", action="append", metavar="PRECODER.KEY=VALUE",
                     help="per-precoder option, e.g. pbb.node_limit=64")

    rc = sub.add_parser("range-check", help="dynamic-range probe vs sqrt(2/pi)")
    rc.add_argument("--nt", type=int, default=512)
    rc.add_argument("--trials", type=int, default=200)
    rc.add_argument("--seed", type=int, default=0)

    sub.add_parser("selftest", help="run the built-in oracle-equivalence suite")
    return p


def _merge_run_settings(args) -> dict:
    fromfile = _parse_config_file(args.config) if args.config else {}

    def pick(key, cast, default=None):
        flag = getattr(args, key, None)
        if flag is not None and flag is not False:
            return flag
        if key in fromfile:
            return cast(fromfile[key])
        return default

    settings = {
        "nt": pick("nt", int),
        "k": pick("k", int),
        "mod": pick("mod", str),
        "snr": pick("snr", str),
        "slots": pick("slots", int),
        "seed": pick("seed", int, 0),
        "precoders": pick("precoders", str, "zf-inf,lp"),
        "threads": pick("threads", int, 1),
        "out": pick("out", str),
        "json": pick("json", str),
        "plot": pick("plot", str),
        "pt": pick("pt", float, 1.0),
        "timing": bool(pick("timing", lambda v: v.lower() == "true", False)),
    }
    for key in ("nt", "k", "mod", "snr", "slots", "out"):
        if settings[key] is None:
            raise ConfigError(f"missing required setting --{key}")
    return settings


def _cmd_run(args) -> int:
    s = _merge_run_settings(args)
    snr = _parse_snr(s["snr"]) if isinstance(s["snr"], str) else s["snr"]
    cfg = SimConfig(
        nt=s["nt"], k=s["k"], modulation=s["mod"], snr_grid_db=snr,
        slots=s["slots"], master_seed=s["seed"],
        precoders=[p.strip() for p in s["precoders"].split(",") if p.strip()],
        options=_parse_opts(args.opt), pt=s["pt"], threads=s["threads"],
    )
    cfg.validate()
    curves = run_ber_sim(cfg)
    emit_csv(curves, s["out"], include_timing=s["timing"])
    if s["json"]:
        emit_json(curves, s["json"], config=cfg)
    if s["plot"]:
        emit_plot(curves, s["plot"])
    for c in sorted(curves, key=lambda c: (c.precoder, c.snr_db)):
        print(f"{c.precoder:10s} {c.snr_db:6.1f} dB  ber={c.ber:.3e} "
              f"[{c.wilson_low:.2e}, {c.wilson_high:.2e}]  margin={c.avg_margin:.4f}")
    print(f"wrote {s['out']}")
    return 0


def _cmd_range_check(args) -> int:
    ratio = dynamic_range_experiment(args.nt, args.trials, RngStream(args.seed))
    ref = float(np.sqrt(2.0 / np.pi))
    print(f"one-bit matched-filter amplitude ratio: {ratio:.4f}")
    print(f"large-array reference sqrt(2/pi):       {ref:.4f}")
    print(f"deviation: {abs(ratio - ref):.4f}")
    return 0


def _selftest_checks():
    rng = np.random.default_rng(2024)
    qpsk = modem.build("qpsk")
    c8 = modem.build("8psk")

    worst_gap = 0.0
    worst_domin = 0.0
    for t in range(40):
        k = int(rng.integers(1, 3))
        nt = int(rng.integers(2, 6))
        H = (rng.standard_normal((k, nt)) + 1j * rng.standard_normal((k, nt))) / np.sqrt(2)
        c = qpsk if t % 2 == 0 else c8
        s = c.points[rng.integers(0, c.m, k)]
        m_exh = precode_exhaustive(PrecoderInput(H, s, c)).achieved_margin
        m_bb = precode_pbb_full(PrecoderInput(H, s, c)).achieved_margin
        t_lp = precode_lp(PrecoderInput(H, s, c)).trace["t_relaxed"]
        worst_gap = max(worst_gap, abs(m_exh - m_bb))
        worst_domin = max(worst_domin, m_exh - t_lp)
    yield "full branch-and-bound matches exhaustive search", worst_gap <= 1e-9, f"max gap {worst_gap:.2e}"
    yield "LP relaxation bounds the exhaustive optimum", worst_domin <= 1e-9, f"max excess {worst_domin:.2e}"

    bpsk = modem.build("bpsk")
    verdicts = (
        ci.classify_interference(1.0, -0.5, 1.0, bpsk) == ci.DESTRUCTIVE,
        ci.classify_interference(1.0, +0.5, 1.0, bpsk) == ci.CONSTRUCTIVE,
        ci.classify_interference(1.0, 0.0, 1.0, bpsk) == ci.NEUTRAL,
    )
    yield "two-user toy interference verdicts", all(verdicts), str(verdicts)

    ratio = dynamic_range_experiment(128, 50, RngStream(7))
    yield "dynamic-range probe near sqrt(2/pi)", abs(ratio - np.sqrt(2 / np.pi)) < 0.05, f"ratio {ratio:.4f}"


def _cmd_selftest(_args) -> int:
    ok = True
    for name, passed, detail in _selftest_checks():
        print(f"[{'PASS' if passed else 'FAIL'}] {name} ({detail})")
        ok = ok and passed
    return 0 if ok else 3


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "range-check":
            return _cmd_range_check(args)
        return _cmd_selftest(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
