"""Color, smoothness and fidelity measurements.

* RGB-uv log-chroma histograms and the Hellinger distance between them
* total variation
* the weighted loss compound
* PSNR and SSIM
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ._validation import check_image, check_same_shape
from .imaging import log_chrominance, luminance_norm, to_grayscale

__all__ = [
    "HistogramConfig",
    "LossWeights",
    "rgbuv_histogram",
    "hellinger_color_distance",
    "tv_loss",
    "composite_loss",
    "psnr",
    "ssim",
]

# pixels per accumulation block; blocks are reduced in index order
_BLOCK = 1 << 15


class DegenerateHistogramError(ValueError):
    """The image carries no luminance, so the histogram cannot be normalized."""


@dataclass(frozen=True)
class HistogramConfig:
    bins: int = 64
    u_range: tuple = (-3.0, 3.0)
    tau: float = 0.02
    eps: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "u_range", tuple(float(v) for v in self.u_range))
        errors = self.validate()
        if errors:
            raise ValueError("invalid histogram config: " + "; ".join(errors))

    def validate(self):
        errors = []
        if self.bins < 2:
            errors.append(f"bins must be >= 2, got {self.bins}")
        if len(self.u_range) != 2 or not self.u_range[0] < self.u_range[1]:
            errors.append(f"u_range must be an increasing pair, got {self.u_range}")
        if not self.tau > 0:
            errors.append(f"tau must be positive, got {self.tau}")
        if not self.eps > 0:
            errors.append(f"eps must be positive, got {self.eps}")
        return errors

    @property
    def centers(self):
        return np.linspace(self.u_range[0], self.u_range[1], self.bins)


def _inverse_quadratic(coords, centers, tau):
    d = (coords[:, None] - centers[None, :]) / tau
    return 1.0 / (1.0 + d * d)


def rgbuv_histogram(img, cfg=None):
    """Luminance-weighted log-chroma histogram of an RGB image.

    For each channel ``c`` the pixel's ``(u_c, v_c)`` coordinates vote into
    every bin ``(u, v)`` of a shared ``bins x bins`` grid with weight
    ``k(u_c - u) * k(v_c - v) * |RGB|`` where ``k(d) = 1 / (1 + (d/tau)^2)``.
    The stacked ``(bins, bins, 3)`` tensor is normalized to unit total mass.

    Raises
    ------
    DegenerateHistogramError
        If the image is entirely black.
    """
    cfg = cfg or HistogramConfig()
    arr = check_image(img, channels=3)
    weight = luminance_norm(arr).ravel()
    planes = [p.ravel() for p in log_chrominance(arr, cfg.eps)]
    centers = cfg.centers
    hist = np.zeros((cfg.bins, cfg.bins, 3))
    for c in range(3):
        u, v = planes[2 * c], planes[2 * c + 1]
        for start in range(0, weight.size, _BLOCK):
            sl = slice(start, start + _BLOCK)
            ku = _inverse_quadratic(u[sl], centers, cfg.tau) * weight[sl, None]
            kv = _inverse_quadratic(v[sl], centers, cfg.tau)
            hist[:, :, c] += ku.T @ kv
    total = hist.sum()
    if not total > 0:
        raise DegenerateHistogramError("degenerate histogram: image has zero luminance")
    return hist / total


def hellinger_color_distance(h1, h2):
    """Euclidean distance between element-wise square roots of two histograms."""
    a = np.asarray(h1, dtype=np.float64)
    b = np.asarray(h2, dtype=np.float64)
    check_same_shape(a, b, ("h1", "h2"))
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("histograms must be nonnegative")
    d = np.sqrt(a) - np.sqrt(b)
    return float(np.sqrt(np.sum(d * d)))


def tv_loss(img):
    """Anisotropic total variation summed over channels."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim not in (2, 3):
        raise ValueError(f"expected (H, W) or (H, W, C), got {arr.shape}")
    dv = np.abs(np.diff(arr, axis=0)).sum()
    dh = np.abs(np.diff(arr, axis=1)).sum()
    return float(dv + dh)


@dataclass(frozen=True)
class LossWeights:
    per: float = 1.0
    color: float = 1.0
    tv: float = 0.1

    def __post_init__(self):
        for name in ("per", "color", "tv"):
            v = getattr(self, name)
            if not v >= 0:
                raise ValueError(f"loss weight {name} must be >= 0, got {v}")


def composite_loss(l_per, l_color, l_tv, weights=None):
    """Weighted sum of the three loss terms.

    ``l_per`` may be None when no perceptual term was computed; it then
    contributes nothing. Callers recording the result should note that.
    """
    w = weights or LossWeights()
    terms = {"l_color": l_color, "l_tv": l_tv}
    if l_per is not None:
        terms["l_per"] = l_per
    for name, value in terms.items():
        if not value >= 0:
            raise ValueError(f"{name} must be >= 0, got {value}")
    total = w.color * l_color + w.tv * l_tv
    if l_per is not None:
        total = w.per * l_per + total
    return float(total)


def psnr(a, b, max_val=1.0):
    """Peak signal-to-noise ratio in dB; ``inf`` for identical inputs."""
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    check_same_shape(x, y, ("a", "b"))
    mse = float(np.mean((x - y) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(max_val * max_val / mse)


def _gaussian_kernel(size=11, sigma=1.5):
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return g / g.sum()


def _filter_valid(img, kernel):
    out = ndimage.correlate1d(img, kernel, axis=0, mode="constant")
    out = ndimage.correlate1d(out, kernel, axis=1, mode="constant")
    r = len(kernel) // 2
    return out[r:-r, r:-r]


def ssim(a, b, win_size=11, sigma=1.5, k1=0.01, k2=0.03, data_range=1.0):
    """Mean structural similarity over all fully covered window positions.

    Color inputs are reduced to BT.601 luma first.
    """
    x = check_image(a, name="a")
    y = check_image(b, name="b")
    check_same_shape(x, y, ("a", "b"))
    if x.ndim == 3:
        x, y = to_grayscale(x), to_grayscale(y)
    if min(x.shape) < win_size:
        raise ValueError(f"image {x.shape} is smaller than the {win_size}x{win_size} window")
    g = _gaussian_kernel(win_size, sigma)
    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2
    mu_x = _filter_valid(x, g)
    mu_y = _filter_valid(y, g)
    sxx = _filter_valid(x * x, g) - mu_x * mu_x
    syy = _filter_valid(y * y, g) - mu_y * mu_y
    sxy = _filter_valid(x * y, g) - mu_x * mu_y
    num = (2 * mu_x * mu_y + c1) * (2 * sxy + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (sxx + syy + c2)
    return float(np.mean(num / den))
