"""Moire image blending.

A pattern layer is laid over a clean image twice, once with the Multiply
mode and once with Grain Merge. Each result is alpha-composited back onto
the clean image, and the two composites are mixed with weights
``omega_m + omega_g = 1``.

No function here resizes anything: mismatched shapes raise
:class:`~moiresynth._validation.DimensionMismatchError`.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_image, check_rng, check_same_shape, check_unit_interval

__all__ = [
    "BlendParams",
    "BlendConfig",
    "multiply",
    "grain_merge",
    "composition_ratio",
    "alpha_composite",
    "blend_mib",
    "sample_blend_params",
    "multiply_only_params",
]


def _pair(pattern, clean):
    p = check_image(pattern, name="pattern")
    c = check_image(clean, name="clean")
    check_same_shape(p, c, ("pattern", "clean"))
    return p, c


def multiply(pattern, clean):
    return np.multiply(*_pair(pattern, clean))


def grain_merge(pattern, clean):
    """``pattern + clean - 0.5``, clamped to ``[0, 1]``."""
    p, c = _pair(pattern, clean)
    # offset first so a mid-gray pattern returns ``clean`` bit for bit
    return np.clip(c + (p - 0.5), 0.0, 1.0)


def composition_ratio(op_x, op_n):
    """Effective weight of a foreground layer with opacity ``op_x`` over a
    background of opacity ``op_n``."""
    op_x = check_unit_interval(op_x, "op_x")
    op_n = check_unit_interval(op_n, "op_n")
    denom = op_x + (1.0 - op_x) * op_n
    if denom == 0.0:
        raise ZeroDivisionError("composition ratio undefined for op_x = op_n = 0")
    return op_x / denom


def alpha_composite(fore, back, r):
    r = check_unit_interval(r, "r")
    f = check_image(fore, name="fore")
    b = check_image(back, name="back")
    check_same_shape(f, b, ("fore", "back"))
    return r * f + (1.0 - r) * b


@dataclass(frozen=True)
class BlendParams:
    """Full parameter set of one blend. ``r_m`` and ``r_g`` are derived."""

    omega_m: float
    op_m: float = 1.0
    op_g: float = 0.8
    op_n: float = 1.0

    def __post_init__(self):
        check_unit_interval(self.omega_m, "omega_m")
        for name in ("op_m", "op_g", "op_n"):
            check_unit_interval(getattr(self, name), name)
        composition_ratio(self.op_m, self.op_n)
        composition_ratio(self.op_g, self.op_n)

    @property
    def omega_g(self):
        return 1.0 - self.omega_m

    @property
    def r_m(self):
        return composition_ratio(self.op_m, self.op_n)

    @property
    def r_g(self):
        return composition_ratio(self.op_g, self.op_n)

    def as_dict(self):
        return {
            "omega_m": self.omega_m,
            "omega_g": self.omega_g,
            "op_m": self.op_m,
            "op_g": self.op_g,
            "op_n": self.op_n,
            "r_m": self.r_m,
            "r_g": self.r_g,
        }


def multiply_only_params():
    """Parameters under which the blend reduces to a plain multiply."""
    return BlendParams(omega_m=1.0, op_m=1.0, op_g=0.8, op_n=1.0)


def blend_mib(pattern, clean, params):
    """Blend a pattern into a clean image of the same shape.

    Parameters
    ----------
    pattern, clean : ndarray
        Same-shape images in ``[0, 1]``.
    params : BlendParams

    Returns
    -------
    ndarray
        ``omega_m * comp_M + omega_g * comp_G`` clamped to ``[0, 1]``.
    """
    p, c = _pair(pattern, clean)
    comp_m = alpha_composite(multiply(p, c), c, params.r_m)
    comp_g = alpha_composite(grain_merge(p, c), c, params.r_g)
    return np.clip(params.omega_m * comp_m + params.omega_g * comp_g, 0.0, 1.0)


@dataclass(frozen=True)
class BlendConfig:
    omega_m_range: tuple = (0.65, 0.75)
    op_m: float = 1.0
    op_g: float = 0.8
    op_n: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "omega_m_range", tuple(float(v) for v in self.omega_m_range))
        errors = self.validate()
        if errors:
            raise ValueError("invalid blend config: " + "; ".join(errors))

    def validate(self):
        errors = []
        rng_ = self.omega_m_range
        if len(rng_) != 2:
            errors.append(f"omega_m_range needs two values, got {rng_}")
        elif not 0.0 <= rng_[0] <= rng_[1] <= 1.0:
            errors.append(f"omega_m_range must satisfy 0 <= lo <= hi <= 1, got {list(rng_)}")
        for name in ("op_m", "op_g", "op_n"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                errors.append(f"{name} must lie in [0, 1], got {v}")
        if self.op_n == 0.0 and (self.op_m == 0.0 or self.op_g == 0.0):
            errors.append("op_n = 0 together with a zero layer opacity leaves a ratio undefined")
        return errors


def sample_blend_params(rng=None, config=None):
    """Draw one ``omega_m`` uniformly from the configured range."""
    rng = check_rng(rng)
    config = config or BlendConfig()
    lo, hi = config.omega_m_range
    omega_m = float(rng.uniform(lo, hi))
    params = BlendParams(omega_m=omega_m, op_m=config.op_m, op_g=config.op_g, op_n=config.op_n)
    assert math.isclose(params.omega_m + params.omega_g, 1.0)
    return params
