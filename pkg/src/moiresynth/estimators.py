"""scikit-learn style wrappers around the functional core.

These let the blending, histogram and statistics-mixing steps sit inside
``sklearn.pipeline.Pipeline`` objects and honour ``get_params`` /
``set_params`` / ``clone``. Image batches are sequences of ``(H, W, 3)``
arrays (or a stacked ``(N, H, W, 3)`` array).
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_image, check_rng
from .blending import BlendConfig, blend_mib, multiply_only_params, sample_blend_params
from .corpus import SelectionConfig, select_patch
from .imaging import resize
from .metrics import HistogramConfig, hellinger_color_distance, rgbuv_histogram
from .tone import apply_mixed_stats, channel_stats, mix_statistics, sample_lambda


def _check_batch(X, name="X"):
    if isinstance(X, np.ndarray) and X.ndim == 3 and X.shape[-1] == 3:
        raise ValueError(f"{name} looks like a single image; wrap it in a list")
    return [check_image(img, name=f"{name}[{i}]", channels=3) for i, img in enumerate(X)]


class PatchSelector(BaseEstimator, TransformerMixin):
    """Multi-scale crop + sharpness/colorfulness selection over raw frames.

    ``transform`` returns one entry per frame: a
    :class:`~moiresynth.corpus.PatternPatch` or None when rejected.
    """

    def __init__(
        self,
        patch_size=(768, 768),
        n_attempts=3,
        sharpness_threshold=15.0,
        colorfulness_threshold=2.0,
        tier_sizes=((2560, 1440), (1920, 1080)),
        random_state=None,
    ):
        self.patch_size = patch_size
        self.n_attempts = n_attempts
        self.sharpness_threshold = sharpness_threshold
        self.colorfulness_threshold = colorfulness_threshold
        self.tier_sizes = tier_sizes
        self.random_state = random_state

    def fit(self, X=None, y=None):
        w, h = self.patch_size
        self.config_ = SelectionConfig(
            patch_w=w,
            patch_h=h,
            n_attempts=self.n_attempts,
            sharpness_threshold=self.sharpness_threshold,
            colorfulness_threshold=self.colorfulness_threshold,
            tier_sizes=tuple(tuple(t) for t in self.tier_sizes),
        )
        self.rng_ = check_rng(self.random_state)
        return self

    def transform(self, X):
        check_is_fitted(self, "config_")
        return [select_patch(frame, self.config_, self.rng_) for frame in _check_batch(X)]


class MoireBlender(BaseEstimator, TransformerMixin):
    """Blend moire patterns into clean images.

    ``fit`` memorizes a pattern corpus; ``transform`` pairs every clean image
    with a uniformly drawn pattern (resized to the clean image), draws blend
    parameters and returns the blended stack. ``params_`` and
    ``pattern_indices_`` describe the last call.

    Parameters
    ----------
    omega_m_range : tuple of float
        Range of the Multiply weight; Grain Merge gets the complement.
    op_m, op_g, op_n : float
        Opacities of the Multiply layer, Grain Merge layer and background.
    multiply_only : bool
        Reduce to a plain multiply of pattern and image.
    random_state : int, Generator or None
    """

    def __init__(
        self,
        omega_m_range=(0.65, 0.75),
        op_m=1.0,
        op_g=0.8,
        op_n=1.0,
        multiply_only=False,
        random_state=None,
    ):
        self.omega_m_range = omega_m_range
        self.op_m = op_m
        self.op_g = op_g
        self.op_n = op_n
        self.multiply_only = multiply_only
        self.random_state = random_state

    def fit(self, patterns, y=None):
        self.patterns_ = _check_batch(patterns, "patterns")
        if not self.patterns_:
            raise ValueError("need at least one pattern")
        self.config_ = BlendConfig(
            omega_m_range=self.omega_m_range, op_m=self.op_m, op_g=self.op_g, op_n=self.op_n
        )
        self.rng_ = check_rng(self.random_state)
        return self

    def transform(self, X):
        check_is_fitted(self, "patterns_")
        out, self.params_, self.pattern_indices_ = [], [], []
        for img in _check_batch(X):
            k = int(self.rng_.integers(len(self.patterns_)))
            h, w = img.shape[:2]
            pattern = resize(self.patterns_[k], w, h)
            if self.multiply_only:
                params = multiply_only_params()
            else:
                params = sample_blend_params(self.rng_, self.config_)
            out.append(blend_mib(pattern, img, params))
            self.params_.append(params)
            self.pattern_indices_.append(k)
        return np.stack(out) if out else np.empty((0,))


class RGBuvHistogram(BaseEstimator, TransformerMixin):
    """Flattened RGB-uv histogram features, one row per image.

    ``score`` returns the negative mean Hellinger distance between each
    image's histogram and a reference batch's pooled histogram, so higher
    is better.
    """

    def __init__(self, bins=64, u_range=(-3.0, 3.0), tau=0.02, eps=1e-6):
        self.bins = bins
        self.u_range = u_range
        self.tau = tau
        self.eps = eps

    def _cfg(self):
        return HistogramConfig(bins=self.bins, u_range=self.u_range, tau=self.tau, eps=self.eps)

    def fit(self, X=None, y=None):
        self.config_ = self._cfg()
        self.n_features_out_ = self.bins * self.bins * 3
        return self

    def transform(self, X):
        check_is_fitted(self, "config_")
        feats = [rgbuv_histogram(img, self.config_).ravel() for img in _check_batch(X)]
        return np.stack(feats) if feats else np.empty((0, self.n_features_out_))

    def score(self, X, y):
        check_is_fitted(self, "config_")
        target = self.transform(y).mean(axis=0)
        return -float(np.mean([hellinger_color_distance(h, target) for h in self.transform(X)]))


class ToneStatsMixer(BaseEstimator, TransformerMixin):
    """Re-style feature maps toward reference statistics.

    ``fit`` records per-channel mean/std of reference ``(C, H, W)`` maps;
    ``transform`` standardizes each input map and rescales it with a convex
    mixture of its own statistics and the reference ones. The mixing weight
    is ``lam`` when given, else a fresh ``Beta(alpha, alpha)`` draw per map.
    """

    def __init__(self, alpha=0.1, lam=None, random_state=None):
        self.alpha = alpha
        self.lam = lam
        self.random_state = random_state

    def fit(self, X, y=None):
        maps = [np.asarray(f, dtype=np.float64) for f in X]
        if not maps:
            raise ValueError("need at least one reference map")
        self.reference_ = maps
        self.reference_mean_, self.reference_std_ = zip(*(channel_stats(f) for f in maps))
        self.rng_ = check_rng(self.random_state)
        return self

    def transform(self, X):
        check_is_fitted(self, "reference_")
        out, self.lambdas_ = [], []
        for i, f in enumerate(X):
            lam = self.lam if self.lam is not None else sample_lambda(self.rng_, self.alpha)
            ref = self.reference_[i % len(self.reference_)]
            out.append(apply_mixed_stats(f, mix_statistics(f, ref, lam)))
            self.lambdas_.append(lam)
        return out
