import numpy as np
import pytest

from onebitmimo.core import ConfigError
from onebitmimo import modem
from onebitmimo.modem import (CONSTELLATION_NAMES, IMAG, INNER, OUTER, REAL,
                              bits_to_indices, build, build_psk, build_qam,
                              coordinate_class, demap_index, detect,
                              detect_batch, map_bits)

ALL = [build(n) for n in CONSTELLATION_NAMES]


@pytest.mark.parametrize("c", ALL, ids=[c.name for c in ALL])
def test_unit_average_energy(c):
    assert np.mean(np.abs(c.points) ** 2) == pytest.approx(1.0, abs=1e-12)


def test_qpsk_points_and_gray_label():
    c = build_psk(4)
    expected = {(1 + 1j), (1 - 1j), (-1 + 1j), (-1 - 1j)}
    got = {complex(np.round(p * np.sqrt(2), 9)) for p in c.points}
    assert got == expected
    p = (1 + 1j) / np.sqrt(2)
    i = detect(p, c)
    assert np.isclose(c.points[i], p)
    assert np.isclose(map_bits(c.labels[i], c), p)


def test_bpsk_points():
    c = build_psk(2)
    assert np.allclose(c.points, [1.0, -1.0])


def test_8psk_geometry():
    c = build_psk(8)
    assert np.allclose(np.abs(c.points), 1.0)
    ang = np.sort(np.angle(c.points))
    gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
    assert np.allclose(gaps, np.pi / 4)


def test_psk_rejects_unsupported_order():
    with pytest.raises(ConfigError):
        build_psk(3)
    with pytest.raises(ConfigError):
        build_psk(32)


def test_16qam_levels_and_energy():
    c = build_qam(16)
    assert np.allclose(c.levels * np.sqrt(10), [-3, -1, 1, 3])
    assert np.mean(np.abs(c.points) ** 2) == pytest.approx(1.0, abs=1e-12)
    corner = np.max(np.abs(c.points))
    assert corner == pytest.approx(np.sqrt(18 / 10), abs=1e-12)


def test_64qam_levels():
    c = build_qam(64)
    assert len(c.levels) == 8
    assert np.allclose(c.levels * np.sqrt(42), np.arange(-7, 8, 2))


def test_qam_rejects_unsupported_order():
    with pytest.raises(ConfigError):
        build_qam(32)
    with pytest.raises(ConfigError):
        build_qam(1024)


@pytest.mark.parametrize("c", ALL, ids=[c.name for c in ALL])
def test_map_demap_roundtrip(c):
    for i in range(c.m):
        bits = demap_index(i, c)
        assert np.isclose(map_bits(bits, c), c.points[i])
    # labels form a bijection
    words = {tuple(c.labels[i]) for i in range(c.m)}
    assert len(words) == c.m


def test_map_bits_length_check():
    c = build_psk(4)
    with pytest.raises(ConfigError):
        map_bits([0, 1, 0], c)


@pytest.mark.parametrize("m", [4, 8, 16])
def test_psk_gray_adjacency(m):
    c = build_psk(m)
    order = np.argsort(np.angle(c.points))
    for i in range(m):
        a = c.labels[order[i]]
        b = c.labels[order[(i + 1) % m]]
        assert int(np.sum(a != b)) == 1


@pytest.mark.parametrize("m", [16, 64, 256])
def test_qam_per_dimension_gray(m):
    c = build_qam(m)
    side = int(np.sqrt(m))
    for l in range(side - 1):
        assert int(np.sum(c.level_labels[l] != c.level_labels[l + 1])) == 1


def test_16qam_horizontal_neighbors_one_bit():
    c = build_qam(16)
    for p in c.points:
        i = detect(p, c)
        right = p + c.level_spacing
        if np.any(np.isclose(c.points, right)):
            j = detect(complex(right), c)
            assert c.hamming[i, j] == 1


@pytest.mark.parametrize("c", ALL, ids=[c.name for c in ALL])
def test_detect_exact_points(c):
    assert np.array_equal(detect_batch(c.points, c), np.arange(c.m))


def test_detect_qpsk_fourth_quadrant():
    c = build_psk(4)
    i = detect(0.3 - 0.1j, c)
    assert np.isclose(c.points[i], (1 - 1j) / np.sqrt(2))


@pytest.mark.parametrize("m", [2, 4, 8, 16])
def test_psk_detection_scale_invariant(m):
    c = build_psk(m)
    rng = np.random.default_rng(0)
    y = rng.standard_normal(200) + 1j * rng.standard_normal(200)
    assert np.array_equal(detect_batch(y, c), detect_batch(2.7 * y, c))


def test_coordinate_class_examples():
    c16 = build_qam(16)
    i = detect(complex(3 / np.sqrt(10), -1 / np.sqrt(10)), c16)
    assert coordinate_class(i, REAL, c16) == OUTER
    assert coordinate_class(i, IMAG, c16) == INNER
    c256 = build_qam(256)
    j = detect(complex(15 / np.sqrt(170), 1 / np.sqrt(170)), c256)
    assert coordinate_class(j, REAL, c256) == OUTER
    assert coordinate_class(j, IMAG, c256) == INNER


def test_coordinate_class_rejects_psk():
    with pytest.raises(ConfigError):
        coordinate_class(0, REAL, build_psk(4))


def test_registry_names():
    assert set(CONSTELLATION_NAMES) == {"bpsk", "qpsk", "8psk", "16psk",
                                        "16qam", "64qam", "256qam"}
    with pytest.raises(ConfigError):
        build("4096qam")


def test_bits_to_indices_matches_map_bits():
    c = build_qam(64)
    rng = np.random.default_rng(2)
    bits = rng.integers(0, 2, 6 * 50, dtype=np.uint8)
    idx = bits_to_indices(bits, c)
    for n in range(50):
        word = bits[6 * n: 6 * (n + 1)]
        assert np.isclose(c.points[idx[n]], map_bits(word, c))
