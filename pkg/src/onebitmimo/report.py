"""CSV/JSON emission and BER-curve figures.

The CSV is the deterministic artifact: identical configuration and seed
yield byte-identical files regardless of worker count, which is why the
wallclock column stays 0.000 unless timing is explicitly requested
(measured times always travel in the JSON report instead).
"""

from __future__ import annotations

import json
from dataclasses import asdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .core import ConfigError

CSV_HEADER = "snr_db,precoder,bits,bit_errors,ber,avg_margin,avg_mults,wallclock_ms"


def _sorted_curves(curves):
    if not curves:
        raise ConfigError("no curve points to emit")
    return sorted(curves, key=lambda c: (c.precoder, c.snr_db))


def emit_csv(curves, path, include_timing: bool = False) -> None:
    rows = [CSV_HEADER]
    for c in _sorted_curves(curves):
        wall = c.wallclock_ms if include_timing else 0.0
        rows.append(
            f"{c.snr_db:g},{c.precoder},{c.bits_sent},{c.bit_errors},"
            f"{c.ber:.12g},{c.avg_margin:.12g},{c.avg_mults:.12g},{wall:.3f}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(rows) + "\n")


def emit_json(curves, path, config=None) -> None:
    payload = {
        "metadata": {
            "receiver_scaling": "genie",
            "csv_schema": CSV_HEADER,
        },
        "points": [asdict(c) for c in _sorted_curves(curves)],
    }
    if config is not None:
        payload["config"] = {k: v for k, v in asdict(config).items()}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def emit_plot(curves, path) -> None:
    """Log-scale BER vs SNR, one polyline per precoder (SVG-friendly)."""
    curves = _sorted_curves(curves)
    names = sorted({c.precoder for c in curves})
    fig, ax = plt.subplots(figsize=(8, 6), dpi=100)
    for name in names:
        pts = [(c.snr_db, c.ber) for c in curves if c.precoder == name]
        pts.sort()
        snr = [p[0] for p in pts]
        ber = [max(p[1], 0.5 / max(curves[0].bits_sent, 1)) for p in pts]
        ax.semilogy(snr, ber, marker="o", label=name)
    ax.set_xlabel("transmit SNR [dB]")
    ax.set_ylabel("uncoded BER")
    ax.grid(True, which="both", alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
