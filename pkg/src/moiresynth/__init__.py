"""Synthetic moire-image dataset generation.

Pattern selection, layer blending, feature-statistics mixing and the color,
smoothness and fidelity measurements used to build and audit the data.
"""

from .blending import (
    BlendConfig,
    BlendParams,
    alpha_composite,
    blend_mib,
    composition_ratio,
    grain_merge,
    multiply,
    multiply_only_params,
    sample_blend_params,
)
from .config import ConfigError, PipelineConfig, load_config, save_config
from .corpus import (
    PatternPatch,
    ScaleTier,
    SelectionConfig,
    colorfulness,
    corpus_stats,
    multi_scale_crop,
    select_patch,
    sharpness,
)
from .estimators import MoireBlender, PatchSelector, RGBuvHistogram, ToneStatsMixer
from .imaging import (
    CropRect,
    convolve_laplacian,
    crop,
    load_image,
    log_chrominance,
    luminance_norm,
    resize,
    rgb_to_lab,
    save_image,
    to_grayscale,
)
from .metrics import (
    HistogramConfig,
    LossWeights,
    composite_loss,
    hellinger_color_distance,
    psnr,
    rgbuv_histogram,
    ssim,
    tv_loss,
)
from .tone import (
    MixedStats,
    apply_mixed_stats,
    apply_tone_matrix,
    channel_stats,
    mix_statistics,
    sample_lambda,
)

__version__ = "0.1.0"
