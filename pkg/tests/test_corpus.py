import csv

import numpy as np
import pytest

from moiresynth.corpus import (
    PatternPatch,
    ScaleTier,
    SelectionConfig,
    colorfulness,
    corpus_stats,
    crop_for_tier,
    draw_tier,
    multi_scale_crop,
    select_patch,
    sharpness,
    write_stats_csv,
)
from moiresynth.imaging import CropRect, crop, resize, save_image

from conftest import stripes
from oracles import reference_select

SMALL = SelectionConfig(patch_w=16, patch_h=16, tier_sizes=((40, 30), (32, 24)))


class FixedDraws:
    """Stand-in generator returning scripted uniform draws."""

    def __init__(self, randoms, integers=()):
        self._r = list(randoms)
        self._i = list(integers)

    def random(self):
        return self._r.pop(0)

    def integers(self, lo, hi):
        value = self._i.pop(0) if self._i else lo
        assert lo <= value < hi
        return value


def synthetic_frame(seed, h=30, w=40):
    g = np.random.default_rng(seed)
    amp = g.uniform(0.0, 0.06)
    base = g.uniform(0.3, 0.7, size=3)
    return np.clip(base + amp * g.standard_normal((h, w, 3)), 0, 1)


class TestSharpness:
    def test_constant_is_zero(self):
        assert sharpness(np.full((8, 8, 3), 0.6)) == 0.0

    def test_impulse_matches_analytic_value(self):
        img = np.zeros((9, 9, 3))
        img[4, 4] = 1.0
        # std over 81 pixels of {-1020 once, +255 four times, 0 elsewhere}
        assert sharpness(img) == pytest.approx(126.71051872498808, rel=1e-12)

    def test_rotation_and_flip_invariance(self, rng):
        img = rng.random((12, 10, 3))
        s = sharpness(img)
        assert sharpness(img[::-1, ::-1]) == pytest.approx(s, rel=1e-12)
        assert sharpness(img[::-1]) == pytest.approx(s, rel=1e-12)
        assert sharpness(img[:, ::-1]) == pytest.approx(s, rel=1e-12)

    def test_degenerate_dims(self):
        with pytest.raises(ValueError):
            sharpness(np.zeros((2, 2, 3)))


class TestColorfulness:
    def test_neutral_image_is_zero(self, rng):
        gray = np.repeat(rng.random((6, 6, 1)), 3, axis=2)
        assert colorfulness(gray) == pytest.approx(0.0, abs=1e-4)

    def test_half_red_half_green(self):
        img = np.zeros((4, 4, 3))
        img[:, :2, 0] = 1.0
        img[:, 2:, 1] = 1.0
        # brute force: textbook Lab of both colors, population std over 16 pixels
        assert colorfulness(img) == pytest.approx(83.5204626081377, abs=1e-3)

    def test_permutation_and_flip_invariance(self, rng):
        img = rng.random((5, 7, 3))
        perm = rng.permutation(35)
        shuffled = img.reshape(-1, 3)[perm].reshape(5, 7, 3)
        assert colorfulness(shuffled) == pytest.approx(colorfulness(img), rel=1e-12)
        assert colorfulness(img[::-1]) == pytest.approx(colorfulness(img), rel=1e-12)

    def test_single_channel_rejected(self):
        with pytest.raises(ValueError):
            colorfulness(np.zeros((4, 4)))


class TestMultiScaleCrop:
    frame = np.random.default_rng(3).random((2160, 3840, 3))

    def test_native_branch_is_exact_subwindow(self):
        cfg = SelectionConfig()
        patch, tier, rect = multi_scale_crop(self.frame, cfg, FixedDraws([0.1, 0.9], [100, 200]))
        assert tier is ScaleTier.NATIVE
        assert rect == CropRect(100, 200, 768, 768)
        assert np.array_equal(patch, self.frame[200:968, 100:868])

    def test_direct_branch_is_plain_resize(self):
        cfg = SelectionConfig()
        patch, tier, rect = multi_scale_crop(self.frame, cfg, FixedDraws([0.9, 0.9]))
        assert tier is ScaleTier.DIRECT and rect is None
        assert np.array_equal(patch, resize(self.frame, 768, 768))

    @pytest.mark.parametrize(
        "p2, tier, size", [(0.2, ScaleTier.R2560, (2560, 1440)), (0.5, ScaleTier.R1920, (1920, 1080))]
    )
    def test_tier_branches(self, p2, tier, size):
        cfg = SMALL
        frame = self.frame[:60, :80]
        tsize = cfg.tier_sizes[0] if tier is ScaleTier.R2560 else cfg.tier_sizes[1]
        patch, got, rect = multi_scale_crop(frame, cfg, FixedDraws([0.7, p2], [3, 4]))
        assert got is tier
        assert np.array_equal(patch, crop(resize(frame, *tsize), rect))
        assert SelectionConfig().tier_sizes[0 if tier is ScaleTier.R2560 else 1] == size

    def test_tier_frequencies(self):
        g = np.random.default_rng(99)
        counts = {t: 0 for t in ScaleTier}
        for _ in range(10_000):
            counts[draw_tier(g, SelectionConfig())] += 1
        expected = {ScaleTier.NATIVE: 0.5, ScaleTier.R2560: 1 / 6, ScaleTier.R1920: 1 / 6, ScaleTier.DIRECT: 1 / 6}
        for t, p in expected.items():
            assert abs(counts[t] / 10_000 - p) <= 0.02

    def test_frame_smaller_than_patch(self):
        with pytest.raises(ValueError):
            multi_scale_crop(np.zeros((10, 10, 3)), SMALL, np.random.default_rng(0))

    def test_tier_smaller_than_patch_rejected_at_config(self):
        with pytest.raises(ValueError, match="smaller than"):
            SelectionConfig(patch_w=800, patch_h=800, tier_sizes=((2560, 1440), (640, 480)))


class TestSelectPatch:
    def test_white_frame_rejected(self):
        assert select_patch(np.ones((30, 40, 3)), SMALL, np.random.default_rng(0)) is None

    def test_stripes_accepted_first_attempt(self):
        frame = stripes(30, 40, period=4)
        patch = select_patch(frame, SMALL, np.random.default_rng(0))
        assert isinstance(patch, PatternPatch)
        assert patch.attempt == 0
        assert patch.image.shape == (16, 16, 3)
        assert patch.sharpness == pytest.approx(sharpness(patch.image))
        assert patch.colorfulness == pytest.approx(colorfulness(patch.image))
        assert patch.sharpness >= 15 and patch.colorfulness >= 2

    def test_deterministic(self):
        frame = synthetic_frame(5)
        a = select_patch(frame, SMALL, np.random.default_rng(11))
        b = select_patch(frame, SMALL, np.random.default_rng(11))
        assert (a is None) == (b is None)
        if a is not None:
            assert a.crop == b.crop and a.scale_tier == b.scale_tier
            assert np.array_equal(a.image, b.image)

    def test_provenance(self):
        patch = select_patch(stripes(30, 40), SMALL, np.random.default_rng(0), source_path="x.png")
        prov = patch.provenance()
        assert prov["source_path"] == "x.png"
        assert prov["scale_tier"] in {t.value for t in ScaleTier}

    def test_agrees_with_reference_loop(self):
        agree = 0
        for trial in range(25):
            frame = synthetic_frame(trial)
            got = select_patch(frame, SMALL, np.random.default_rng(trial))
            ref = reference_select(
                frame, 16, 16, 3, 15.0, 2.0, np.random.default_rng(trial), tiers=SMALL.tier_sizes
            )
            assert (got is not None) == ref[0]
            if got is not None:
                assert got.scale_tier.value == ref[1]
                assert (None if got.crop is None else (got.crop.x, got.crop.y)) == ref[2]
                assert got.sharpness == pytest.approx(ref[3], abs=1e-6)
                assert got.colorfulness == pytest.approx(ref[4], abs=1e-6)
            agree += 1
        assert agree == 25


def test_crop_for_tier_caches_resized_frame():
    cache = {}
    frame = np.random.default_rng(1).random((30, 40, 3))
    crop_for_tier(frame, ScaleTier.R1920, SMALL, np.random.default_rng(0), cache)
    assert set(cache) == {ScaleTier.R1920}


class TestCorpusStats:
    def test_empty_directory(self, tmp_path, caplog):
        rows, failures = corpus_stats(tmp_path)
        assert rows == [] and failures == []
        assert "no images" in caplog.text

    def test_white_image_row(self, tmp_path):
        save_image(tmp_path / "w.png", np.ones((8, 8, 3)))
        rows, _ = corpus_stats(tmp_path)
        assert rows[0]["sharpness"] == 0.0
        assert rows[0]["colorfulness"] == pytest.approx(0.0, abs=1e-9)

    def test_matches_direct_calls_and_skips_bad_files(self, tmp_path):
        from moiresynth.imaging import load_image

        save_image(tmp_path / "a.png", stripes(10, 12))
        (tmp_path / "broken.png").write_bytes(b"not a png")
        rows, failures = corpus_stats(tmp_path)
        assert len(rows) == 1 and len(failures) == 1
        img = load_image(tmp_path / "a.png")
        assert rows[0]["sharpness"] == sharpness(img)
        assert rows[0]["colorfulness"] == colorfulness(img)
        out = tmp_path / "stats.csv"
        write_stats_csv(rows, out)
        with open(out) as fh:
            parsed = list(csv.DictReader(fh))
        assert float(parsed[0]["sharpness"]) == rows[0]["sharpness"]
