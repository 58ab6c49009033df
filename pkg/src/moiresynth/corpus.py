"""Pattern corpus preparation: multi-scale cropping and sharpness/colorfulness
selection of raw moire pattern frames, plus per-file score tables."""

import csv
import enum
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ._validation import check_image, check_rng
from .imaging import CropRect, convolve_laplacian, crop, load_image, resize, rgb_to_lab, to_grayscale

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}


class ScaleTier(str, enum.Enum):
    NATIVE = "native4k"
    R2560 = "r2560x1440"
    R1920 = "r1920x1080"
    DIRECT = "direct-resize"


@dataclass(frozen=True)
class SelectionConfig:
    """Parameters of the pattern selection loop.

    ``p_native`` is the probability of cropping at native resolution; the
    remaining mass is split by ``tier_split`` between the 2560x1440 tier, the
    1920x1080 tier and a direct resize of the whole frame.
    """

    patch_w: int = 768
    patch_h: int = 768
    n_attempts: int = 3
    sharpness_threshold: float = 15.0
    colorfulness_threshold: float = 2.0
    p_native: float = 0.5
    tier_split: tuple = (1.0 / 3.0, 2.0 / 3.0)
    tier_sizes: tuple = ((2560, 1440), (1920, 1080))

    def __post_init__(self):
        object.__setattr__(self, "tier_split", tuple(float(v) for v in self.tier_split))
        object.__setattr__(
            self, "tier_sizes", tuple(tuple(int(v) for v in s) for s in self.tier_sizes)
        )
        errors = self.validate()
        if errors:
            raise ValueError("invalid selection config: " + "; ".join(errors))

    def validate(self):
        errors = []
        if self.patch_w < 1 or self.patch_h < 1:
            errors.append(f"patch size must be positive, got {self.patch_w}x{self.patch_h}")
        if self.n_attempts < 1:
            errors.append(f"n_attempts must be >= 1, got {self.n_attempts}")
        if self.sharpness_threshold < 0:
            errors.append(f"sharpness_threshold must be >= 0, got {self.sharpness_threshold}")
        if self.colorfulness_threshold < 0:
            errors.append(
                f"colorfulness_threshold must be >= 0, got {self.colorfulness_threshold}"
            )
        if not 0.0 <= self.p_native <= 1.0:
            errors.append(f"p_native must lie in [0, 1], got {self.p_native}")
        if len(self.tier_split) != 2 or not 0.0 <= self.tier_split[0] <= self.tier_split[1] <= 1.0:
            errors.append(f"tier_split must be 0 <= a <= b <= 1, got {self.tier_split}")
        if len(self.tier_sizes) != 2:
            errors.append(f"tier_sizes needs exactly two (w, h) pairs, got {self.tier_sizes}")
        else:
            for tw, th in self.tier_sizes:
                if tw < self.patch_w or th < self.patch_h:
                    errors.append(
                        f"tier {tw}x{th} is smaller than the {self.patch_w}x{self.patch_h} patch"
                    )
        return errors


@dataclass
class PatternPatch:
    image: np.ndarray = field(repr=False)
    sharpness: float
    colorfulness: float
    scale_tier: ScaleTier
    crop: CropRect = None  # None for a direct resize of the full frame
    source_path: str = ""
    attempt: int = 0

    def provenance(self):
        """JSON-ready description of where this patch came from."""
        return {
            "source_path": self.source_path,
            "scale_tier": self.scale_tier.value,
            "crop": self.crop.as_dict() if self.crop is not None else "resized-full-frame",
            "attempt": self.attempt,
            "sharpness": self.sharpness,
            "colorfulness": self.colorfulness,
        }


def sharpness(patch):
    """Population std of the Laplacian response of the 0-255 scaled luma."""
    arr = check_image(patch, name="patch", min_size=3)
    gray = arr if arr.ndim == 2 else to_grayscale(arr)
    return float(np.std(convolve_laplacian(gray * 255.0)))


def colorfulness(patch):
    """``sqrt(std(a)^2 + std(b)^2)`` over the Lab chroma planes."""
    arr = check_image(patch, name="patch", channels=3)
    _, a, b = rgb_to_lab(arr)
    return float(np.sqrt(np.var(a) + np.var(b)))


def draw_tier(rng, cfg):
    """Draw the two branch probabilities and map them to a scale tier.

    Both numbers are drawn on every call so that the stream consumption is the
    same regardless of the branch taken.
    """
    p1 = rng.random()
    p2 = rng.random()
    if p1 <= cfg.p_native:
        return ScaleTier.NATIVE
    if p2 <= cfg.tier_split[0]:
        return ScaleTier.R2560
    if p2 <= cfg.tier_split[1]:
        return ScaleTier.R1920
    return ScaleTier.DIRECT


def random_crop_rect(rng, width, height, w, h):
    if width < w or height < h:
        raise ValueError(f"cannot crop {w}x{h} from a {width}x{height} image")
    x = int(rng.integers(0, width - w + 1))
    y = int(rng.integers(0, height - h + 1))
    return CropRect(x, y, w, h)


def _tier_source(frame, tier, cfg, cache=None):
    if tier is ScaleTier.NATIVE:
        return frame
    size = cfg.tier_sizes[0] if tier is ScaleTier.R2560 else cfg.tier_sizes[1]
    if cache is None:
        return resize(frame, *size)
    if tier not in cache:
        cache[tier] = resize(frame, *size)
    return cache[tier]


def crop_for_tier(frame, tier, cfg, rng, cache=None):
    """Produce the candidate patch for a given tier.

    Returns ``(patch, rect)`` where ``rect`` is in the coordinates of the
    (possibly resized) tier image, or None for a direct resize.
    """
    if tier is ScaleTier.DIRECT:
        return resize(frame, cfg.patch_w, cfg.patch_h), None
    source = _tier_source(frame, tier, cfg, cache)
    h, w = source.shape[:2]
    rect = random_crop_rect(rng, w, h, cfg.patch_w, cfg.patch_h)
    return crop(source, rect), rect


def multi_scale_crop(frame, cfg, rng, _cache=None):
    """One multi-scale cropping step.

    Returns
    -------
    patch : ndarray
        ``(patch_h, patch_w, 3)`` candidate.
    tier : ScaleTier
    rect : CropRect or None
    """
    arr = check_image(frame, name="frame", channels=3)
    h, w = arr.shape[:2]
    if w < cfg.patch_w or h < cfg.patch_h:
        raise ValueError(
            f"frame {w}x{h} is smaller than the {cfg.patch_w}x{cfg.patch_h} patch"
        )
    tier = draw_tier(rng, cfg)
    patch, rect = crop_for_tier(arr, tier, cfg, rng, _cache)
    return patch, tier, rect


def passes_selection(sharp, color, cfg):
    return sharp >= cfg.sharpness_threshold and color >= cfg.colorfulness_threshold


def select_patch(frame, cfg, rng=None, source_path=""):
    """Run up to ``cfg.n_attempts`` crop-and-test rounds on one frame.

    Returns the first patch whose sharpness and colorfulness both reach their
    thresholds, or None when every attempt is rejected.
    """
    rng = check_rng(rng)
    arr = check_image(frame, name="frame", channels=3)
    cache = {}
    for attempt in range(cfg.n_attempts):
        patch, tier, rect = multi_scale_crop(arr, cfg, rng, _cache=cache)
        s = sharpness(patch)
        c = colorfulness(patch)
        if passes_selection(s, c, cfg):
            result = PatternPatch(
                image=patch,
                sharpness=s,
                colorfulness=c,
                scale_tier=tier,
                crop=rect,
                source_path=str(source_path),
                attempt=attempt,
            )
            assert passes_selection(result.sharpness, result.colorfulness, cfg)
            return result
    return None


def list_images(directory):
    """Sorted image files directly inside ``directory``."""
    return sorted(
        p for p in Path(directory).iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    )


def corpus_stats(pattern_dir):
    """Full-frame sharpness and colorfulness for every image in a directory.

    Returns
    -------
    rows : list of dict
        ``{"path", "sharpness", "colorfulness"}`` per decodable image.
    failures : list of (path, message)
    """
    paths = list_images(pattern_dir)
    if not paths:
        logger.warning("no images found in %s", pattern_dir)
    rows, failures = [], []
    for path in paths:
        try:
            img = load_image(path)
            rows.append(
                {"path": str(path), "sharpness": sharpness(img), "colorfulness": colorfulness(img)}
            )
        except Exception as exc:  # noqa: BLE001 - report and continue
            logger.error("skipping %s: %s", path, exc)
            failures.append((str(path), str(exc)))
    return rows, failures


def write_stats_csv(rows, out_path):
    with open(out_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["path", "sharpness", "colorfulness"])
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def config_as_dict(cfg):
    d = asdict(cfg)
    d["tier_split"] = list(cfg.tier_split)
    d["tier_sizes"] = [list(s) for s in cfg.tier_sizes]
    return d
