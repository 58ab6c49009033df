import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from moiresynth.metrics import (
    DegenerateHistogramError,
    HistogramConfig,
    LossWeights,
    composite_loss,
    hellinger_color_distance,
    psnr,
    rgbuv_histogram,
    ssim,
    tv_loss,
)

from oracles import ssim_textbook


def brute_histogram(img, bins, lo, hi, tau, eps):
    """Direct triple loop over channels, bins and pixels."""
    centers = [lo + (hi - lo) * k / (bins - 1) for k in range(bins)]
    h = np.zeros((bins, bins, 3))
    pixels = img.reshape(-1, 3)
    for c in range(3):
        o1, o2 = [(1, 2), (0, 2), (0, 1)][c]
        for px in pixels:
            y = math.sqrt(sum(v * v for v in px))
            u = math.log((px[c] + eps) / (px[o1] + eps))
            v = math.log((px[c] + eps) / (px[o2] + eps))
            for i, cu in enumerate(centers):
                ku = 1 / (1 + (abs(u - cu) / tau) ** 2)
                for j, cv in enumerate(centers):
                    kv = 1 / (1 + (abs(v - cv) / tau) ** 2)
                    h[i, j, c] += ku * kv * y
    return h / h.sum()


class TestHistogram:
    def test_matches_brute_force(self, rng):
        img = rng.random((3, 4, 3))
        cfg = HistogramConfig(bins=8, tau=0.3)
        expected = brute_histogram(img, 8, -3.0, 3.0, 0.3, 1e-6)
        assert np.allclose(rgbuv_histogram(img, cfg), expected, rtol=1e-10, atol=1e-15)

    def test_default_shape_and_mass(self, rng):
        hist = rgbuv_histogram(rng.random((10, 12, 3)))
        assert hist.shape == (64, 64, 3)
        assert hist.min() >= 0
        assert abs(hist.sum() - 1.0) <= 1e-5

    def test_single_color_argmax(self):
        color = (0.8, 0.4, 0.2)
        img = np.tile(np.array(color), (5, 5, 1))
        cfg = HistogramConfig()
        hist = rgbuv_histogram(img, cfg)
        centers = cfg.centers
        eps = cfg.eps
        for c in range(3):
            o1, o2 = [(1, 2), (0, 2), (0, 1)][c]
            u = math.log((color[c] + eps) / (color[o1] + eps))
            v = math.log((color[c] + eps) / (color[o2] + eps))
            k = np.array(
                [[1 / (1 + ((u - a) / cfg.tau) ** 2) / (1 + ((v - b) / cfg.tau) ** 2) for b in centers] for a in centers]
            )
            assert np.unravel_index(np.argmax(hist[:, :, c]), (64, 64)) == np.unravel_index(np.argmax(k), k.shape)

    def test_permutation_invariance(self, rng):
        img = rng.random((6, 5, 3))
        shuffled = img.reshape(-1, 3)[rng.permutation(30)].reshape(6, 5, 3)
        assert np.allclose(rgbuv_histogram(img), rgbuv_histogram(shuffled), rtol=1e-12, atol=1e-18)

    def test_black_image_is_degenerate(self):
        with pytest.raises(DegenerateHistogramError, match="degenerate histogram"):
            rgbuv_histogram(np.zeros((4, 4, 3)))

    def test_blocked_accumulation_matches_single_block(self, rng, monkeypatch):
        import moiresynth.metrics as m

        img = rng.random((20, 20, 3))
        full = rgbuv_histogram(img)
        monkeypatch.setattr(m, "_BLOCK", 37)
        assert np.allclose(rgbuv_histogram(img), full, rtol=1e-12, atol=1e-18)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            HistogramConfig(tau=0)
        with pytest.raises(ValueError):
            HistogramConfig(u_range=(3, -3))


class TestHellinger:
    def test_identical(self, rng):
        h = rgbuv_histogram(rng.random((5, 5, 3)))
        assert hellinger_color_distance(h, h) == 0.0

    def test_disjoint_support(self):
        a = np.array([0.5, 0.5, 0.0, 0.0])
        b = np.array([0.0, 0.0, 0.25, 0.75])
        assert hellinger_color_distance(a, b) == pytest.approx(math.sqrt(2), abs=1e-12)

    def test_symmetric(self, rng):
        a, b = rng.random(50), rng.random(50)
        a, b = a / a.sum(), b / b.sum()
        assert hellinger_color_distance(a, b) == hellinger_color_distance(b, a)

    @settings(max_examples=100)
    @given(
        arrays(np.float64, 16, elements=st.floats(0, 1)),
        arrays(np.float64, 16, elements=st.floats(0, 1)),
    )
    def test_bounded(self, a, b):
        if a.sum() == 0 or b.sum() == 0:
            return
        d = hellinger_color_distance(a / a.sum(), b / b.sum())
        assert 0.0 <= d <= math.sqrt(2) + 1e-6

    def test_color_shift_increases_distance(self, rng):
        img = rng.random((16, 16, 3)) * 0.7 + 0.1
        shifted = img.copy()
        shifted[..., 0] = np.clip(shifted[..., 0] * 1.2, 0, 1)
        h = rgbuv_histogram(img)
        assert hellinger_color_distance(h, rgbuv_histogram(shifted)) > hellinger_color_distance(h, h)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            hellinger_color_distance(np.ones(3) / 3, np.ones(4) / 4)


class TestTV:
    def test_constant(self):
        assert tv_loss(np.full((5, 5, 3), 0.3)) == 0.0

    def test_two_by_two(self):
        assert tv_loss(np.array([[0.0, 1.0], [0.0, 1.0]])) == 2.0

    @pytest.mark.parametrize("c", [0.0, 0.5, 2.0])
    def test_homogeneity_exact(self, c, rng):
        img = rng.random((7, 6, 3))
        assert tv_loss(c * img) == c * tv_loss(img)

    @settings(max_examples=50)
    @given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 5), st.just(3)), elements=st.floats(0, 1)))
    def test_nonnegative_and_zero_iff_constant(self, img):
        t = tv_loss(img)
        assert t >= 0
        constant = all(np.all(img[..., k] == img[0, 0, k]) for k in range(3))
        assert (t == 0) == constant


class TestCompositeLoss:
    def test_zero(self):
        assert composite_loss(0.0, 0.0, 0.0) == 0.0

    def test_defaults(self):
        assert composite_loss(2.0, 3.0, 10.0) == pytest.approx(6.0)

    def test_absent_perceptual_term(self):
        assert composite_loss(None, 3.0, 10.0) == pytest.approx(4.0)

    def test_linear(self):
        w = LossWeights(per=0.5, color=2.0, tv=0.25)
        base = composite_loss(1.0, 1.0, 1.0, w)
        assert composite_loss(3.0, 1.0, 1.0, w) - base == pytest.approx(2.0 * 0.5)
        assert composite_loss(1.0, 3.0, 1.0, w) - base == pytest.approx(2.0 * 2.0)

    def test_negative_weight(self):
        with pytest.raises(ValueError):
            LossWeights(tv=-0.1)


class TestPSNR:
    def test_identical(self, rng):
        a = rng.random((4, 4))
        assert psnr(a, a) == math.inf

    def test_mse_point_zero_one(self):
        a = np.zeros((10, 10))
        b = np.full((10, 10), 0.1)
        assert psnr(a, b) == pytest.approx(20.0, abs=1e-6)

    def test_symmetric(self, rng):
        a, b = rng.random((5, 5)), rng.random((5, 5))
        assert psnr(a, b) == psnr(b, a)

    def test_decreases_with_noise(self, rng):
        img = rng.random((32, 32, 3))
        noise = rng.standard_normal(img.shape)
        values = [psnr(img, img + s * noise) for s in (0.01, 0.02, 0.05, 0.1, 0.2)]
        assert all(x > y for x, y in zip(values, values[1:]))

    def test_mismatch(self):
        with pytest.raises(ValueError):
            psnr(np.zeros((2, 2)), np.zeros((2, 3)))


class TestSSIM:
    def test_identical(self, rng):
        a = rng.random((20, 20, 3))
        assert ssim(a, a) == pytest.approx(1.0, abs=1e-12)

    def test_symmetric(self, rng):
        a, b = rng.random((16, 16)), rng.random((16, 16))
        assert ssim(a, b) == ssim(b, a)

    def test_inverted_against_textbook_oracle(self):
        g = np.random.default_rng(8)
        a = (g.random((18, 18)) > 0.5).astype(float) * 0.9 + 0.05
        got = ssim(a, 1 - a)
        expected = ssim_textbook(a.tolist(), (1 - a).tolist())
        assert got < 0.5
        assert got == pytest.approx(expected, abs=1e-3)

    def test_against_scikit_image(self, rng):
        skm = pytest.importorskip("skimage.metrics")
        a = rng.random((40, 40))
        b = np.clip(a + 0.1 * rng.standard_normal(a.shape), 0, 1)
        ref = skm.structural_similarity(
            a, b, gaussian_weights=True, sigma=1.5, use_sample_covariance=False, data_range=1.0
        )
        assert ssim(a, b) == pytest.approx(ref, abs=1e-3)

    def test_too_small(self):
        with pytest.raises(ValueError):
            ssim(np.zeros((8, 8)), np.zeros((8, 8)))
