import numpy as np
import pytest

from sphereclip.channel import draw_channel, draw_channels, sigma2_for_snr, transmit
from sphereclip.linalg import rotate_received


@pytest.mark.parametrize("snr_db, expected", [(0, 4.0), (10, 0.4), (14, 0.159243)])
def test_sigma2_for_snr(snr_db, expected):
    assert sigma2_for_snr(snr_db, 4).complex_variance == pytest.approx(expected, rel=1e-5)


def test_channel_moments():
    rng = np.random.default_rng(0)
    h, _ = draw_channels(4, 4, 100_000 // 16 + 1, rng)
    entries = h.reshape(-1, 16)
    assert entries.size >= 100_000
    assert abs(np.mean(np.abs(entries) ** 2) - 1.0) <= 0.02
    assert abs(entries.mean().real) <= 0.02 and abs(entries.mean().imag) <= 0.02
    assert abs(np.mean(entries.real**2) - 0.5) <= 0.02
    # distinct entries are uncorrelated
    h = draw_channels(2, 2, 100_000, rng)[0].reshape(-1, 4)
    for a, b in [(0, 1), (0, 3), (1, 2)]:
        assert abs(np.mean(h[:, a] * h[:, b].conj())) <= 0.02


def test_single_draw_has_valid_qr():
    ch = draw_channel(4, 4, np.random.default_rng(1))
    assert np.abs(ch.qr.q @ ch.qr.r - ch.h).max() <= 1e-10
    with pytest.raises(ValueError):
        draw_channel(2, 3, np.random.default_rng(1))


def test_noiseless_limit():
    rng = np.random.default_rng(2)
    ch = draw_channel(4, 4, rng)
    s = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    noise = sigma2_for_snr(10 * np.log10(4 / 1e-12), 4)
    assert noise.complex_variance == pytest.approx(1e-12)
    assert np.abs(transmit(s, ch, noise, rng) - ch.h @ s).max() <= 1e-5


def test_noise_variance_identity_channel():
    rng = np.random.default_rng(3)
    noise = sigma2_for_snr(6.0, 4)
    s = np.array([1 + 1j, -1, 0.5j, 0]) / np.sqrt(2)
    h = np.broadcast_to(np.eye(4, dtype=complex), (100_000, 4, 4))
    y = transmit(np.broadcast_to(s, (100_000, 4)), h, noise, rng)
    var = np.var(y - s, axis=0)
    assert np.all(np.abs(var / noise.complex_variance - 1) <= 0.02)


def test_zero_symbols_give_zero_mean_noise():
    rng = np.random.default_rng(4)
    noise = sigma2_for_snr(0.0, 2)
    h = np.broadcast_to(np.eye(2, dtype=complex), (50_000, 2, 2))
    y = transmit(np.zeros((50_000, 2)), h, noise, rng)
    assert np.abs(y.mean(axis=0)).max() <= 0.02


def test_rotated_noise_keeps_its_variance():
    rng = np.random.default_rng(5)
    noise = sigma2_for_snr(3.0, 4)
    h, f = draw_channels(4, 4, 50_000, rng)
    n = transmit(np.zeros((50_000, 4)), h * 0, noise, rng)
    rotated = rotate_received(f.q, n)
    var = np.mean(np.abs(rotated) ** 2, axis=0)
    assert np.all(np.abs(var / noise.complex_variance - 1) <= 0.02)


def test_reproducible():
    a = draw_channels(4, 4, 10, np.random.default_rng(9))[0]
    b = draw_channels(4, 4, 10, np.random.default_rng(9))[0]
    assert a.tobytes() == b.tobytes()


def test_dimension_mismatch():
    ch = draw_channel(4, 4, np.random.default_rng(0))
    with pytest.raises(ValueError):
        transmit(np.zeros(3), ch, sigma2_for_snr(10, 4), np.random.default_rng(0))
