"""Channel model, counter-based random streams, and real-valued stacking.

Everything downstream (precoders, the Monte-Carlo harness) builds on the
primitives here: i.i.d. Rayleigh channel draws, AWGN draws, the transmit-SNR
convention, and the real isomorphism that turns complex linear algebra into
real linear algebra for the LP-based precoders.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


class ConfigError(ValueError):
    """Invalid configuration (dimensions, names, parameter ranges)."""


class NumericalError(RuntimeError):
    """A numerical routine failed: singular system or no convergence."""


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream identified by (master_seed, stream_index).

    The pair is mixed into a 128-bit Philox key, so the same pair yields the
    same sample sequence on any platform and for any number of workers.
    Slot-parallel simulation derives one stream per (slot, purpose) and can
    consume them in any order.
    """

    master_seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        key = (self.master_seed & _MASK64) | ((self.stream_index & _MASK64) << 64)
        return np.random.Generator(np.random.Philox(key=key))

    def substream(self, offset: int) -> "RngStream":
        return RngStream(self.master_seed, self.stream_index + offset)


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """K x N_T downlink channel matrix with i.i.d. CN(0,1) entries."""

    H: np.ndarray
    seed_tag: int = -1

    @property
    def k(self) -> int:
        return self.H.shape[0]

    @property
    def nt(self) -> int:
        return self.H.shape[1]


@dataclass(frozen=True)
class NoiseModel:
    """AWGN with variance ``sigma2`` per complex receive dimension."""

    sigma2: float

    def __post_init__(self) -> None:
        if not self.sigma2 > 0:
            raise ConfigError(f"noise variance must be positive, got {self.sigma2}")


def as_matrix(H) -> np.ndarray:
    """Accept a ChannelRealization or a plain complex matrix."""
    if isinstance(H, ChannelRealization):
        return H.H
    return np.asarray(H)


def sample_channel(rng: RngStream, k: int, nt: int) -> ChannelRealization:
    """Draw a K x N_T matrix of i.i.d. CN(0,1) entries (Rayleigh fading)."""
    if k < 1 or nt < 1:
        raise ConfigError(f"channel dimensions must be >= 1, got {k}x{nt}")
    g = rng.generator()
    re = g.standard_normal((k, nt))
    im = g.standard_normal((k, nt))
    return ChannelRealization(H=(re + 1j * im) / np.sqrt(2.0), seed_tag=rng.stream_index)


def sample_noise(rng: RngStream, k: int, noise: NoiseModel) -> np.ndarray:
    """Draw k i.i.d. CN(0, sigma2) noise samples."""
    g = rng.generator()
    re = g.standard_normal(k)
    im = g.standard_normal(k)
    return np.sqrt(noise.sigma2 / 2.0) * (re + 1j * im)


def sample_bits(rng: RngStream, n: int) -> np.ndarray:
    """Draw n uniform bits as a uint8 array."""
    g = rng.generator()
    return g.integers(0, 2, size=n, dtype=np.uint8)


def snr_to_sigma2(snr_db: float, pt: float = 1.0) -> NoiseModel:
    """Transmit-SNR convention: SNR = P_T / sigma2 with P_T the total power."""
    if not pt > 0:
        raise ConfigError(f"transmit power must be positive, got {pt}")
    return NoiseModel(sigma2=pt * 10.0 ** (-snr_db / 10.0))


def real_stack(z) -> np.ndarray:
    """[Re(z); Im(z)] for a complex vector z of length n (result length 2n)."""
    z = np.asarray(z)
    return np.concatenate([z.real, z.imag]).astype(float)


def real_stack_matrix(H) -> np.ndarray:
    """[[Re H, -Im H], [Im H, Re H]] so real_stack(Hz) = real_stack_matrix(H) @ real_stack(z)."""
    H = as_matrix(H)
    return np.block([[H.real, -H.imag], [H.imag, H.real]])


def real_unstack(v) -> np.ndarray:
    """Inverse of real_stack: first half is the real part, second half the imaginary."""
    v = np.asarray(v, dtype=float)
    n = v.shape[0] // 2
    return v[:n] + 1j * v[n:]
