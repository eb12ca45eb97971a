"""Gray-labelled PSK/QAM constellations and minimum-distance detection.

Supported alphabets: BPSK, QPSK, 8PSK, 16PSK and square 16/64/256-QAM, all
normalized to unit average symbol energy.  PSK points sit at angles
(2i+1)*pi/M so the QPSK decision boundaries are the coordinate axes; any
common rotation is BER-equivalent on a circularly-symmetric channel.  Gray
labels are binary-reflected, applied to the angular index for PSK and
independently per dimension for QAM.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import ConfigError

PSK_SIZES = (2, 4, 8, 16)
QAM_SIZES = (16, 64, 256)

REAL = "real"
IMAG = "imag"
INNER = "inner"
OUTER = "outer"


def _gray(i: int) -> int:
    return i ^ (i >> 1)


def _to_bits(value: int, width: int) -> np.ndarray:
    return np.array([(value >> (width - 1 - b)) & 1 for b in range(width)], dtype=np.uint8)


def _word_int(bits) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


@dataclass(frozen=True, eq=False)
class Constellation:
    """Point set with Gray bit labels and detection metadata.

    points[i] carries the bit word labels[i]; label_lookup maps a label
    (as an integer) back to the point index, and hamming[i, j] is the bit
    distance between the labels of points i and j (used for BER counting).
    """

    name: str
    kind: str  # "psk" | "qam"
    m: int
    points: np.ndarray
    labels: np.ndarray
    bits_per_symbol: int
    levels: np.ndarray | None = None
    level_labels: np.ndarray | None = None
    label_lookup: np.ndarray = field(default=None, repr=False)
    hamming: np.ndarray = field(default=None, repr=False)

    @property
    def is_qam(self) -> bool:
        return self.kind == "qam"

    @property
    def level_spacing(self) -> float:
        if not self.is_qam:
            raise ConfigError("level spacing is only defined for QAM")
        return float(self.levels[1] - self.levels[0])


def _finish(name, kind, m, points, labels, levels=None, level_labels=None) -> Constellation:
    points = np.asarray(points, dtype=complex)
    labels = np.asarray(labels, dtype=np.uint8)
    bits = labels.shape[1]
    lookup = np.zeros(m, dtype=np.int64)
    for i in range(m):
        lookup[_word_int(labels[i])] = i
    ham = np.zeros((m, m), dtype=np.uint8)
    for i in range(m):
        ham[i] = (labels[i][None, :] != labels).sum(axis=1)
    return Constellation(
        name=name,
        kind=kind,
        m=m,
        points=points,
        labels=labels,
        bits_per_symbol=bits,
        levels=None if levels is None else np.asarray(levels, dtype=float),
        level_labels=None if level_labels is None else np.asarray(level_labels, dtype=np.uint8),
        label_lookup=lookup,
        hamming=ham,
    )


def build_psk(m: int) -> Constellation:
    """M-PSK with Gray labels on the angular index; BPSK is {+1, -1}."""
    if m not in PSK_SIZES:
        raise ConfigError(f"unsupported PSK order {m}; supported: {PSK_SIZES}")
    if m == 2:
        return _finish("bpsk", "psk", 2, [1.0 + 0.0j, -1.0 + 0.0j], [[0], [1]])
    bits = int(np.log2(m))
    points = []
    labels = []
    for i in range(m):
        points.append(np.exp(1j * (2 * i + 1) * np.pi / m))
        labels.append(_to_bits(_gray(i), bits))
    name = {4: "qpsk", 8: "8psk", 16: "16psk"}[m]
    return _finish(name, "psk", m, points, labels)


def build_qam(m: int) -> Constellation:
    """Square M-QAM, levels {+-1, +-3, ...}/sqrt(2(M-1)/3), per-dimension Gray labels."""
    if m not in QAM_SIZES:
        raise ConfigError(f"unsupported QAM order {m}; supported: {QAM_SIZES}")
    side = int(np.sqrt(m))
    dim_bits = int(np.log2(side))
    scale = np.sqrt(2.0 * (m - 1) / 3.0)
    levels = np.arange(-(side - 1), side, 2, dtype=float) / scale
    # level index l (ascending amplitude) carries the Gray word of l
    level_labels = np.stack([_to_bits(_gray(l), dim_bits) for l in range(side)])
    points = []
    labels = []
    for lre in range(side):
        for lim in range(side):
            points.append(levels[lre] + 1j * levels[lim])
            labels.append(np.concatenate([level_labels[lre], level_labels[lim]]))
    return _finish(f"{m}qam", "qam", m, points, labels, levels, level_labels)


_BUILDERS = {
    "bpsk": (build_psk, 2),
    "qpsk": (build_psk, 4),
    "8psk": (build_psk, 8),
    "16psk": (build_psk, 16),
    "16qam": (build_qam, 16),
    "64qam": (build_qam, 64),
    "256qam": (build_qam, 256),
}

CONSTELLATION_NAMES = tuple(_BUILDERS)


def build(name: str) -> Constellation:
    """Build a constellation by CLI name (bpsk, qpsk, 8psk, 16psk, 16qam, 64qam, 256qam)."""
    try:
        builder, m = _BUILDERS[name.lower()]
    except KeyError:
        raise ConfigError(f"unknown constellation {name!r}; known: {CONSTELLATION_NAMES}") from None
    return builder(m)


def map_bits(bits, c: Constellation) -> complex:
    """Map a bit word of length log2(M) to its constellation point."""
    bits = np.asarray(bits).ravel()
    if bits.shape[0] != c.bits_per_symbol:
        raise ConfigError(f"expected {c.bits_per_symbol} bits, got {bits.shape[0]}")
    return complex(c.points[c.label_lookup[_word_int(bits)]])


def demap_index(idx: int, c: Constellation) -> np.ndarray:
    """Bit word of constellation point idx."""
    if not 0 <= idx < c.m:
        raise ConfigError(f"symbol index {idx} out of range [0, {c.m})")
    return c.labels[idx].copy()


def bits_to_indices(bits: np.ndarray, c: Constellation) -> np.ndarray:
    """Vectorized map_bits for a (n_sym * bits_per_symbol,) bit array -> point indices."""
    b = np.asarray(bits, dtype=np.int64).reshape(-1, c.bits_per_symbol)
    weights = 1 << np.arange(c.bits_per_symbol - 1, -1, -1)
    return c.label_lookup[b @ weights]


def detect(y: complex, c: Constellation) -> int:
    """Minimum-distance detection; ties resolved to the smallest index."""
    return int(np.argmin(np.abs(c.points - y) ** 2))


def detect_batch(y, c: Constellation) -> np.ndarray:
    y = np.asarray(y, dtype=complex).ravel()
    d = np.abs(y[:, None] - c.points[None, :])
    return np.argmin(d, axis=1)


def coordinate_class(idx: int, dim: str, c: Constellation) -> str:
    """INNER/OUTER class of one real dimension of a QAM point.

    Outer means the coordinate sits at the maximum amplitude level, so the
    corresponding decision region is unbounded on that side.
    """
    if not c.is_qam:
        raise ConfigError("coordinate_class is only defined for QAM constellations")
    if dim not in (REAL, IMAG):
        raise ConfigError(f"dim must be {REAL!r} or {IMAG!r}, got {dim!r}")
    p = c.points[idx]
    level = p.real if dim == REAL else p.imag
    return OUTER if np.isclose(abs(level), c.levels[-1]) else INNER
