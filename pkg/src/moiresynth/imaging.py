"""Image buffers, color conversions, filtering and geometry.

Images are plain numpy arrays of float64: ``(H, W)`` for one channel and
``(H, W, 3)`` for RGB, holding display-referred (gamma-encoded) sRGB values
nominally in ``[0, 1]``. Every function here is pure: inputs are never
modified and results are fresh arrays.
"""

from dataclasses import dataclass

import numpy as np
from PIL import Image

from ._validation import check_image

__all__ = [
    "CropRect",
    "to_grayscale",
    "rgb_to_lab",
    "luminance_norm",
    "log_chrominance",
    "convolve_laplacian",
    "resize",
    "crop",
    "clamp",
    "load_image",
    "save_image",
]

# ITU-R BT.601 luma weights
GRAY_WEIGHTS = np.array([0.299, 0.587, 0.114])

# linear sRGB -> CIE XYZ, D65
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
# Reference white taken as the image of RGB (1, 1, 1) so neutrals map to a = b = 0.
_D65_WHITE = _RGB_TO_XYZ.sum(axis=1)

LAPLACIAN_KERNEL = np.array([[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]])


@dataclass(frozen=True)
class CropRect:
    """Axis-aligned pixel window: offset ``(x, y)``, extent ``(w, h)``."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError(f"crop extent must be positive, got {self.w}x{self.h}")
        if self.x < 0 or self.y < 0:
            raise ValueError(f"crop offset must be nonnegative, got ({self.x}, {self.y})")

    def fits(self, width, height):
        return self.x + self.w <= width and self.y + self.h <= height

    def compose(self, inner):
        """Rectangle in this rect's parent frame equal to cropping ``inner`` out of self."""
        if not inner.fits(self.w, self.h):
            raise ValueError(f"{inner} does not fit inside a {self.w}x{self.h} window")
        return CropRect(self.x + inner.x, self.y + inner.y, inner.w, inner.h)

    def as_dict(self):
        return {"x": self.x, "y": self.y, "w": self.w, "h": self.h}


def clamp(img):
    return np.clip(img, 0.0, 1.0)


def to_grayscale(img):
    """BT.601 luma of an RGB image, returned as a single-channel buffer."""
    arr = check_image(img)
    if arr.ndim == 2:
        raise ValueError("already grayscale")
    return arr @ GRAY_WEIGHTS


def _srgb_to_linear(c):
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


def _lab_f(t):
    delta = 6.0 / 29.0
    return np.where(
        t > delta**3, np.cbrt(t), t / (3.0 * delta**2) + 4.0 / 29.0
    )


def rgb_to_lab(img):
    """Convert sRGB in ``[0, 1]`` to CIE L*a*b* (D65).

    Returns
    -------
    L, a, b : ndarray
        Three ``(H, W)`` planes; ``L`` in ``[0, 100]``.
    """
    arr = check_image(img, channels=3)
    lin = _srgb_to_linear(np.clip(arr, 0.0, 1.0))
    xyz = lin @ _RGB_TO_XYZ.T / _D65_WHITE
    fx, fy, fz = (_lab_f(xyz[..., i]) for i in range(3))
    L = 116.0 * fy - 16.0
    a = 500.0 * (fx - fy)
    b = 200.0 * (fy - fz)
    return L, a, b


def luminance_norm(img):
    """Per-pixel Euclidean norm of the RGB triple."""
    arr = check_image(img, channels=3)
    return np.sqrt(np.sum(arr * arr, axis=2))


def log_chrominance(img, eps=1e-6):
    """Log-chroma coordinates of each channel relative to the other two.

    Returns the six planes ``(u_r, v_r, u_g, v_g, u_b, v_b)`` where, e.g.,
    ``u_r = log((R+eps)/(G+eps))`` and ``v_r = log((R+eps)/(B+eps))``.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    arr = check_image(img, channels=3)
    logs = np.log(arr + eps)
    lr, lg, lb = logs[..., 0], logs[..., 1], logs[..., 2]
    return (lr - lg, lr - lb, lg - lr, lg - lb, lb - lr, lb - lg)


def convolve_laplacian(gray):
    """4-neighbour Laplacian with replicated borders; output matches input size."""
    arr = check_image(gray, name="gray", channels=1)
    if arr.shape[0] < 3 or arr.shape[1] < 3:
        raise ValueError(f"laplacian needs at least a 3x3 image, got {arr.shape}")
    p = np.pad(arr, 1, mode="edge")
    return (
        p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:] - 4.0 * p[1:-1, 1:-1]
    )


def _bilinear_axis(n_in, n_out):
    # half-pixel centers, edge samples replicated
    src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0.0, n_in - 1)
    i0 = np.floor(src).astype(np.intp)
    i1 = np.minimum(i0 + 1, n_in - 1)
    t = src - i0
    return i0, i1, t


def resize(img, new_w, new_h):
    """Bilinear resize to ``new_w x new_h``. Same-size calls return an exact copy."""
    arr = check_image(img)
    if new_w < 1 or new_h < 1:
        raise ValueError(f"target size must be positive, got {new_w}x{new_h}")
    h, w = arr.shape[:2]
    if (w, h) == (new_w, new_h):
        return arr.copy()
    r0, r1, rt = _bilinear_axis(h, new_h)
    c0, c1, ct = _bilinear_axis(w, new_w)
    extra = (1,) * (arr.ndim - 2)
    rt = rt.reshape((-1, 1) + extra)
    rows = (1.0 - rt) * arr[r0] + rt * arr[r1]
    ct = ct.reshape((1, -1) + extra)
    return (1.0 - ct) * rows[:, c0] + ct * rows[:, c1]


def crop(img, rect):
    """Exact copy of the pixels inside ``rect``."""
    arr = check_image(img)
    h, w = arr.shape[:2]
    if not rect.fits(w, h):
        raise ValueError(f"{rect} lies outside a {w}x{h} image")
    return arr[rect.y : rect.y + rect.h, rect.x : rect.x + rect.w].copy()


def load_image(path, mode="RGB"):
    """Decode an 8-bit PNG/JPEG into float64 in ``[0, 1]``.

    ``mode`` is a PIL mode: "RGB" gives ``(H, W, 3)``, "L" gives ``(H, W)``.
    """
    with Image.open(path) as im:
        data = np.asarray(im.convert(mode), dtype=np.float64)
    return data / 255.0


def save_image(path, img):
    """Encode as 8-bit, rounding ``clamp(v) * 255`` to the nearest integer."""
    arr = check_image(img)
    data = np.rint(clamp(arr) * 255.0).astype(np.uint8)
    Image.fromarray(data).save(path)
