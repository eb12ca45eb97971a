import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onebitmimo.core import (ConfigError, NoiseModel, RngStream, real_stack,
                             real_stack_matrix, real_unstack, sample_bits,
                             sample_channel, sample_noise, snr_to_sigma2)


def test_same_stream_same_channel():
    rng = RngStream(1234, 7)
    a = sample_channel(rng, 4, 8).H
    b = sample_channel(rng, 4, 8).H
    assert np.array_equal(a, b)


def test_distinct_streams_differ():
    a = sample_channel(RngStream(1234, 0), 4, 8).H
    b = sample_channel(RngStream(1234, 1), 4, 8).H
    assert not np.allclose(a, b)


def test_channel_entry_statistics():
    # 800 draws of 4x64 -> 2e5+ CN(0,1) entries
    H = np.concatenate([sample_channel(RngStream(5, i), 4, 64).H.ravel()
                        for i in range(800)])
    power = np.abs(H) ** 2
    assert 0.98 <= power.mean() <= 1.02
    assert abs(H.real.mean()) < 0.01 and abs(H.imag.mean()) < 0.01
    assert abs(H.real.var() - 0.5) < 0.01
    assert abs(H.imag.var() - 0.5) < 0.01


def test_real_imag_parts_uncorrelated():
    h = np.concatenate([sample_channel(RngStream(9, i), 1, 1000).H.ravel()
                        for i in range(100)])
    corr = np.corrcoef(h.real, h.imag)[0, 1]
    assert abs(corr) < 0.02


def test_channel_dimension_errors():
    with pytest.raises(ConfigError):
        sample_channel(RngStream(0), 0, 4)
    with pytest.raises(ConfigError):
        sample_channel(RngStream(0), 4, 0)


def test_noise_variance_estimate():
    n = np.concatenate([sample_noise(RngStream(3, i), 1000, NoiseModel(0.1))
                        for i in range(100)])
    assert 0.097 <= np.mean(np.abs(n) ** 2) <= 0.103


def test_noise_reproducible_and_validated():
    assert np.array_equal(sample_noise(RngStream(4, 2), 16, NoiseModel(0.5)),
                          sample_noise(RngStream(4, 2), 16, NoiseModel(0.5)))
    with pytest.raises(ConfigError):
        NoiseModel(0.0)
    with pytest.raises(ConfigError):
        NoiseModel(-1.0)


def test_vanishing_noise_is_negligible():
    n = sample_noise(RngStream(1), 8, NoiseModel(1e-30))
    assert np.max(np.abs(n)) < 1e-14


def test_snr_to_sigma2():
    assert snr_to_sigma2(10.0, 1.0).sigma2 == pytest.approx(0.1)
    assert snr_to_sigma2(0.0, 1.0).sigma2 == pytest.approx(1.0)
    assert snr_to_sigma2(20.0, 2.0).sigma2 == pytest.approx(0.02)
    with pytest.raises(ConfigError):
        snr_to_sigma2(10.0, 0.0)


def test_bits_uniform_and_deterministic():
    b = sample_bits(RngStream(11, 3), 100_000)
    assert set(np.unique(b)) <= {0, 1}
    assert abs(b.mean() - 0.5) < 0.01
    assert np.array_equal(b, sample_bits(RngStream(11, 3), 100_000))


def test_real_stack_examples():
    assert np.allclose(real_stack([1 + 2j]), [1.0, 2.0])
    H = np.array([[1j]])
    z = np.array([1.0 + 0j])
    assert np.allclose(real_stack_matrix(H) @ real_stack(z), real_stack([1j]))


def test_real_unstack_roundtrip():
    z = np.array([1 + 2j, -3 + 0.5j, 0 - 1j])
    assert np.allclose(real_unstack(real_stack(z)), z)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_stacking_isomorphism(seed):
    rng = np.random.default_rng(seed)
    k, n = int(rng.integers(1, 6)), int(rng.integers(1, 8))
    H = rng.uniform(-10, 10, (k, n)) + 1j * rng.uniform(-10, 10, (k, n))
    z = rng.uniform(-10, 10, n) + 1j * rng.uniform(-10, 10, n)
    lhs = real_stack(H @ z)
    rhs = real_stack_matrix(H) @ real_stack(z)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(lhs)))
