"""Feature-statistics mixing and tone-matrix application.

Feature maps are ``(C, H, W)`` float arrays. Statistics are per channel over
the spatial axes.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import DimensionMismatchError, check_image, check_rng, check_same_shape, check_unit_interval

SIGMA_FLOOR = 1e-6


def _check_feature_map(f, name="f"):
    arr = np.asarray(f, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[np.newaxis]
    if arr.ndim != 3 or arr.size == 0:
        raise ValueError(f"{name} must be a nonempty (C, H, W) array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def channel_stats(f, eps=SIGMA_FLOOR):
    """Per-channel mean and population std, the std floored at ``eps``."""
    arr = _check_feature_map(f)
    mu = arr.mean(axis=(1, 2))
    sigma = np.maximum(arr.std(axis=(1, 2)), eps)
    return mu, sigma


@dataclass(frozen=True)
class MixedStats:
    gamma: np.ndarray
    beta: np.ndarray
    lam: float


def _convex(lam, x, y):
    # The larger weight is always the one derived by rounding 1 - small, and
    # the small weight is recomputed from it, so swapping (x, y, lam) for
    # (y, x, 1 - lam) produces identical products and sums.
    if lam >= 0.5:
        w_x = lam
        w_y = 1.0 - w_x
    else:
        w_y = 1.0 - lam
        w_x = 1.0 - w_y
    return w_x * x + w_y * y


def mix_statistics(f, f_r, lam):
    """Convex mixture of the channel statistics of ``f`` and ``f_r``.

    ``gamma = lam * sigma(f) + (1 - lam) * sigma(f_r)`` and likewise for the
    means. ``mix(f, f_r, lam)`` equals ``mix(f_r, f, 1 - lam)`` bit for bit.
    """
    lam = check_unit_interval(lam, "lam")
    mu, sigma = channel_stats(f)
    mu_r, sigma_r = channel_stats(f_r)
    if mu.shape != mu_r.shape:
        raise DimensionMismatchError(
            f"f has {mu.shape[0]} channels but f_r has {mu_r.shape[0]}"
        )
    return MixedStats(gamma=_convex(lam, sigma, sigma_r), beta=_convex(lam, mu, mu_r), lam=lam)


def apply_mixed_stats(f, stats):
    """Standardize each channel of ``f`` and rescale it to ``stats``."""
    arr = _check_feature_map(f)
    gamma = np.asarray(stats.gamma, dtype=np.float64)
    beta = np.asarray(stats.beta, dtype=np.float64)
    if gamma.shape != (arr.shape[0],) or beta.shape != (arr.shape[0],):
        raise DimensionMismatchError(
            f"stats carry {gamma.shape} channels, feature map has {arr.shape[0]}"
        )
    mu, sigma = channel_stats(arr)
    normed = (arr - mu[:, None, None]) / sigma[:, None, None]
    return gamma[:, None, None] * normed + beta[:, None, None]


def sample_lambda(rng=None, alpha=0.1):
    """One draw from ``Beta(alpha, alpha)``."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    rng = check_rng(rng)
    return float(rng.beta(alpha, alpha))


def apply_tone_matrix(image, tone_matrix=None, normalize=None):
    """Element-wise product with a nonnegative tone matrix, clamped to ``[0, 1]``.

    Parameters
    ----------
    image : ndarray
        Blended image.
    tone_matrix : ndarray, optional
        Same shape as ``image``. All-ones (identity) when omitted.
    normalize : callable, optional
        Color normalization applied to ``image`` before the product. No-op by
        default.
    """
    img = check_image(image, name="image")
    if normalize is not None:
        img = check_image(normalize(img), name="normalized image")
    if tone_matrix is None:
        return np.clip(img, 0.0, 1.0)
    m = check_image(tone_matrix, name="tone_matrix")
    check_same_shape(img, m, ("image", "tone_matrix"))
    if np.any(m < 0):
        raise ValueError("tone_matrix must be nonnegative")
    return np.clip(img * m, 0.0, 1.0)
