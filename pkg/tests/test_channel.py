import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dualsiso.channel import (ChannelConfig, ReceivedFrame, add_noise, chip_table, demap,
                              demap_frame, frame_rng, modulate, pam_demap, pam_modulate)
from dualsiso.errors import NonBinaryExtension
from dualsiso.galois import field


class TestModulation:
    def test_gf4_chips(self, gf4):
        np.testing.assert_array_equal(modulate(gf4, [0]), [1, 1])
        np.testing.assert_array_equal(modulate(gf4, [3]), [-1, -1])
        np.testing.assert_array_equal(modulate(gf4, [2]), [-1, 1])
        np.testing.assert_array_equal(modulate(gf4, [[1, 2]]), [[1, -1, -1, 1]])

    def test_non_binary_rejected(self):
        with pytest.raises(NonBinaryExtension):
            chip_table(field(5))

    def test_chip_energy(self):
        F = field(2, 4)
        np.testing.assert_allclose((chip_table(F) ** 2).sum(1), 4)


class TestNoise:
    def test_sigma_zero_is_identity(self):
        x = np.array([1., -1, 1])
        np.testing.assert_array_equal(add_noise(x, 0.0, frame_rng(0, 0)), x)

    def test_variance(self):
        y = add_noise(np.zeros(10**6), 0.7, frame_rng(3, 0))
        assert abs(y.var() / 0.49 - 1) < 0.01

    def test_reproducible_per_frame(self):
        a = add_noise(np.zeros(8), 1.0, frame_rng(5, 17))
        b = add_noise(np.zeros(8), 1.0, frame_rng(5, 17))
        c = add_noise(np.zeros(8), 1.0, frame_rng(5, 18))
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_negative_sigma(self):
        with pytest.raises(ValueError):
            add_noise(np.zeros(2), -1.0, frame_rng(0, 0))


class TestDemap:
    def test_zero_observation_is_uniform(self, gf4):
        np.testing.assert_allclose(demap(gf4, [0.0, 0.0], 1.0), [[.25] * 4])

    def test_hand_computed_likelihoods(self, gf4):
        # y = (+1,+1), sigma = 1: exp(-|y - s|^2 / 2) per symbol
        want = np.array([1, math.exp(-2), math.exp(-2), math.exp(-4)])
        np.testing.assert_allclose(demap(gf4, [1.0, 1.0], 1.0)[0], want / want.sum(), rtol=1e-14)

    def test_noiseless_limit(self, gf4):
        np.testing.assert_array_equal(demap(gf4, modulate(gf4, [3]), 0.0), [[0, 0, 0, 1]])
        np.testing.assert_allclose(demap(gf4, modulate(gf4, [3]), 1e-3), [[0, 0, 0, 1]], atol=1e-300)

    def test_high_snr_no_underflow(self, gf4):
        out = demap(gf4, [5.0, -5.0], 1e-4)
        assert np.isfinite(out).all() and out[0, 1] == 1.0

    @given(st.lists(st.floats(-4, 4), min_size=8, max_size=8), st.floats(0.1, 3))
    def test_normalized_and_min_distance(self, y, sigma):
        F = field(2, 2)
        pmf = demap(F, y, sigma)
        np.testing.assert_allclose(pmf.sum(-1), 1.0)
        chips = chip_table(F)
        d2 = ((np.reshape(y, (-1, 1, 2)) - chips) ** 2).sum(-1)
        best = pmf.argmax(-1)
        np.testing.assert_allclose(d2[np.arange(4), best], d2.min(-1))

    def test_frame_wrapper(self, gf4):
        frame = ReceivedFrame(np.array([1.0, 1.0, -1.0, 1.0]), 0.5, 2)
        assert demap_frame(gf4, frame).shape == (2, 4)
        with pytest.raises(ValueError):
            ReceivedFrame(np.zeros(3), 0.5, 2)

    def test_pam_for_prime_fields(self):
        F = field(5)
        pmf = pam_demap(F, pam_modulate(F, [0, 2, 4]), 0.05)
        np.testing.assert_array_equal(pmf.argmax(-1), [0, 2, 4])


class TestSNR:
    def test_tail_overhead(self):
        cfg = ChannelConfig(3.0, 2, 256, 2)
        assert cfg.rate == pytest.approx(256 / 258)
        assert cfg.sigma == pytest.approx(math.sqrt(1 / (2 * cfg.rate * 10 ** 0.3)))
        assert cfg.ecn0_db == pytest.approx(3.0 + 10 * math.log10(256 / 258))
