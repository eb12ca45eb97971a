"""Monte-Carlo BER engine, complexity accounting, and the dynamic-range probe.

Every symbol slot draws a fresh channel, fresh bits, and fresh noise from
counter-based streams keyed by (master_seed, slot), so results are exact
functions of the configuration and seed: slots can run on any number of
workers in any order and still reduce to identical outputs.  Slots are
processed in fixed-size chunks (CHUNK_SLOTS) whose partial sums are merged
in slot order, which keeps even the floating-point reductions byte-stable
across worker counts.

All precoders of a run see the same channel, bits, and (scaled) noise per
slot, and a precoder whose transmit vector does not depend on the noise
level is run once per slot and evaluated on the whole SNR grid.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import modem
from .core import (ConfigError, NoiseModel, RngStream, sample_bits,
                   sample_channel, sample_noise, snr_to_sigma2, real_stack)
from .modem import bits_to_indices
from .precoders import (NEEDS_SIGMA2, PRECODERS, PrecoderInput, get_precoder,
                        quantize_1bit)

CHUNK_SLOTS = 256
_STREAMS_PER_SLOT = 4  # 0: channel, 1: bits, 2: noise, 3: reserved


@dataclass
class SimConfig:
    nt: int
    k: int
    modulation: str
    snr_grid_db: list
    slots: int
    master_seed: int
    precoders: list
    options: dict = field(default_factory=dict)
    pt: float = 1.0
    threads: int = 1

    def validate(self) -> None:
        if self.slots < 1:
            raise ConfigError(f"slots must be >= 1, got {self.slots}")
        if self.k < 1 or self.nt < 1 or self.k > self.nt:
            raise ConfigError(f"need 1 <= K <= N_T, got K={self.k}, N_T={self.nt}")
        if not self.snr_grid_db:
            raise ConfigError("empty SNR grid")
        if not self.precoders:
            raise ConfigError("no precoders selected")
        for name in self.precoders:
            if name not in PRECODERS:
                raise ConfigError(f"unknown precoder {name!r}; known: {sorted(PRECODERS)}")
        modem.build(self.modulation)  # raises on unknown name
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        if not self.pt > 0:
            raise ConfigError(f"pt must be positive, got {self.pt}")


@dataclass
class BerCurve:
    """One measured point of a BER curve: a (precoder, snr) cell."""

    precoder: str
    snr_db: float
    bits_sent: int
    bit_errors: int
    ber: float
    avg_margin: float
    avg_mults: float
    wallclock_ms: float
    wilson_low: float
    wilson_high: float


@dataclass
class ComplexityReport:
    precoder: str
    mean_mults: float
    mean_iterations: float
    slots: int


def wilson_interval(errors: int, n: int, z: float = 1.959963984540054):
    """Wilson 95% score interval for a binomial proportion."""
    if n <= 0:
        return 0.0, 1.0
    p = errors / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom
    return max(center - half, 0.0), min(center + half, 1.0)


def complex_matvec_mults(k: int, nt: int) -> int:
    """Counting convention: one complex multiply costs 4 real multiplies."""
    return 4 * k * nt


def slot_stream(master_seed: int, slot: int, purpose: int) -> RngStream:
    return RngStream(master_seed, slot * _STREAMS_PER_SLOT + purpose)


def _errors_by_snr(u, out, c, idx_tx, sigma, n0):
    """Bit errors per SNR point for one precoded slot (vectorized over SNR)."""
    y = u[None, :] + sigma[:, None] * n0[None, :]
    if c.is_qam:
        y = y / max(out.power_scale * out.receiver_scale, 1e-300)
    d = np.abs(y.reshape(-1)[:, None] - c.points[None, :])
    idx_rx = np.argmin(d, axis=1).reshape(len(sigma), -1)
    return c.hamming[idx_tx[None, :], idx_rx].sum(axis=1).astype(np.int64)


def _run_chunk(cfg: SimConfig, start: int, stop: int):
    """Simulate slots [start, stop); returns per-(precoder, snr) partial sums."""
    c = modem.build(cfg.modulation)
    snr = np.asarray(cfg.snr_grid_db, dtype=float)
    sigma = np.sqrt([snr_to_sigma2(s, cfg.pt).sigma2 for s in snr])
    P, S = len(cfg.precoders), len(snr)
    fns = [get_precoder(name) for name in cfg.precoders]
    opts = [cfg.options.get(name, {}) for name in cfg.precoders]
    per_snr = [name in NEEDS_SIGMA2 for name in cfg.precoders]

    errors = np.zeros((P, S), dtype=np.int64)
    margin_sum = np.zeros((P, S))
    mult_sum = np.zeros((P, S), dtype=np.int64)
    elapsed = np.zeros(P)

    unit = NoiseModel(1.0)
    for slot in range(start, stop):
        Hr = sample_channel(slot_stream(cfg.master_seed, slot, 0), cfg.k, cfg.nt)
        H = Hr.H
        bits = sample_bits(slot_stream(cfg.master_seed, slot, 1), cfg.k * c.bits_per_symbol)
        idx_tx = bits_to_indices(bits, c)
        s_vec = c.points[idx_tx]
        n0 = sample_noise(slot_stream(cfg.master_seed, slot, 2), cfg.k, unit)

        for pi in range(P):
            t0 = time.perf_counter()
            if per_snr[pi]:
                for si in range(S):
                    out = fns[pi](PrecoderInput(H, s_vec, c, cfg.pt,
                                                sigma2=float(sigma[si] ** 2), options=opts[pi]))
                    u = H @ out.x
                    errors[pi, si] += _errors_by_snr(u, out, c, idx_tx, sigma[si:si + 1], n0)[0]
                    margin_sum[pi, si] += out.achieved_margin
                    mult_sum[pi, si] += out.mult_count
            else:
                out = fns[pi](PrecoderInput(H, s_vec, c, cfg.pt, options=opts[pi]))
                u = H @ out.x
                errors[pi] += _errors_by_snr(u, out, c, idx_tx, sigma, n0)
                margin_sum[pi] += out.achieved_margin
                mult_sum[pi] += out.mult_count
            elapsed[pi] += time.perf_counter() - t0

    return errors, margin_sum, mult_sum, elapsed


def run_ber_sim(cfg: SimConfig) -> list:
    """Run the Monte-Carlo sweep; returns one BerCurve per (precoder, snr)."""
    cfg.validate()
    chunks = [(a, min(a + CHUNK_SLOTS, cfg.slots)) for a in range(0, cfg.slots, CHUNK_SLOTS)]
    if cfg.threads <= 1 or len(chunks) == 1:
        partials = [_run_chunk(cfg, a, b) for a, b in chunks]
    else:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            futures = [pool.submit(_run_chunk, cfg, a, b) for a, b in chunks]
            partials = [f.result() for f in futures]  # in chunk order

    P, S = len(cfg.precoders), len(cfg.snr_grid_db)
    errors = np.zeros((P, S), dtype=np.int64)
    for p in partials:
        errors += p[0]
    margin_sum = np.sum(np.stack([p[1] for p in partials]), axis=0)
    mult_sum = np.zeros((P, S), dtype=np.int64)
    for p in partials:
        mult_sum += p[2]
    elapsed = np.sum(np.stack([p[3] for p in partials]), axis=0)

    c = modem.build(cfg.modulation)
    bits_point = cfg.slots * cfg.k * c.bits_per_symbol
    curves = []
    for pi, name in enumerate(cfg.precoders):
        for si, snr in enumerate(cfg.snr_grid_db):
            e = int(errors[pi, si])
            lo, hi = wilson_interval(e, bits_point)
            curves.append(BerCurve(
                precoder=name,
                snr_db=float(snr),
                bits_sent=bits_point,
                bit_errors=e,
                ber=e / bits_point,
                avg_margin=float(margin_sum[pi, si]) / cfg.slots,
                avg_mults=float(mult_sum[pi, si]) / cfg.slots,
                wallclock_ms=float(elapsed[pi]) * 1000.0 / S,
                wilson_low=lo,
                wilson_high=hi,
            ))
    return curves


def dynamic_range_experiment(nt: int, trials: int, rng: RngStream,
                             channel_override: np.ndarray | None = None) -> float:
    """Mean amplitude ratio of 1-bit vs infinite-resolution matched filtering.

    Single user: the 1-bit transmitter signs the stacked conjugate channel;
    the reference is the unquantized matched filter at equal total power.
    The large-array limit of the ratio is sqrt(2/pi) ~ 0.7979.
    """
    if nt < 64:
        raise ConfigError(f"dynamic-range probe expects nt >= 64, got {nt}")
    if trials < 10:
        raise ConfigError(f"dynamic-range probe expects trials >= 10, got {trials}")
    total = 0.0
    for t in range(trials):
        if channel_override is not None:
            h = np.asarray(channel_override, dtype=complex).reshape(-1)
            if h.shape[0] != nt:
                raise ConfigError("channel override length mismatch")
        else:
            h = sample_channel(rng.substream(t), 1, nt).H[0]
        q = quantize_1bit(real_stack(np.conj(h)))
        x_pm = q[:nt] + 1j * q[nt:]
        amp_1bit = abs(h @ x_pm) / np.sqrt(2.0 * nt)
        amp_inf = float(np.linalg.norm(h))
        total += amp_1bit / amp_inf
    return total / trials


def count_multiplications(precoder: str, cfg: SimConfig) -> ComplexityReport:
    """Mean analytic real-multiplication count per slot for one precoder."""
    if precoder not in PRECODERS:
        raise ConfigError(f"unknown precoder {precoder!r}")
    cfg.validate()
    c = modem.build(cfg.modulation)
    fn = get_precoder(precoder)
    opts = cfg.options.get(precoder, {})
    sigma2 = snr_to_sigma2(cfg.snr_grid_db[0], cfg.pt).sigma2
    mults = 0.0
    iters = 0.0
    for slot in range(cfg.slots):
        H = sample_channel(slot_stream(cfg.master_seed, slot, 0), cfg.k, cfg.nt).H
        bits = sample_bits(slot_stream(cfg.master_seed, slot, 1), cfg.k * c.bits_per_symbol)
        s_vec = c.points[bits_to_indices(bits, c)]
        out = fn(PrecoderInput(H, s_vec, c, cfg.pt, sigma2=sigma2, options=opts))
        mults += out.mult_count
        iters += out.iterations
    return ComplexityReport(precoder, mults / cfg.slots, iters / cfg.slots, cfg.slots)
