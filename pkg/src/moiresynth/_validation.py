"""Input validation helpers shared by the math modules and the estimators."""

import numbers

import numpy as np


class DimensionMismatchError(ValueError):
    """Two buffers that must share a shape do not."""


def check_image(img, name="image", channels=None, min_size=1):
    """Validate an image buffer and return it as a float64 array.

    Parameters
    ----------
    img : array_like
        ``(H, W)`` single-channel or ``(H, W, 3)`` color buffer.
    name : str
        Used in error messages.
    channels : {None, 1, 3}
        Required channel count, or None to accept either.
    min_size : int
        Minimum height and width.

    Returns
    -------
    ndarray of float64
        The input, converted without copying when already float64.
    """
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    if arr.ndim == 2:
        n_channels = 1
    elif arr.ndim == 3 and arr.shape[2] == 3:
        n_channels = 3
    else:
        raise ValueError(
            f"{name} must have shape (H, W) or (H, W, 3), got {arr.shape}"
        )
    if channels is not None and n_channels != channels:
        raise ValueError(
            f"{name} must have {channels} channel(s), got {n_channels}"
        )
    h, w = arr.shape[:2]
    if h < min_size or w < min_size:
        raise ValueError(
            f"{name} must be at least {min_size}x{min_size}, got {w}x{h}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_same_shape(a, b, names=("a", "b")):
    if a.shape != b.shape:
        raise DimensionMismatchError(
            f"{names[0]} has shape {a.shape} but {names[1]} has shape {b.shape}"
        )


def check_unit_interval(value, name):
    if not isinstance(value, numbers.Real) or not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return float(value)


def check_rng(random_state):
    """Turn None, an int seed, a SeedSequence or a Generator into a Generator."""
    if isinstance(random_state, np.random.Generator):
        return random_state
    if random_state is None or isinstance(
        random_state, (numbers.Integral, np.random.SeedSequence)
    ):
        return np.random.default_rng(random_state)
    raise TypeError(
        f"cannot build a numpy Generator from {type(random_state).__name__}"
    )


def item_rng(seed, index):
    """Independent RNG stream for work item ``index`` under a global seed.

    Streams depend only on ``(seed, index)``, never on scheduling order.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
