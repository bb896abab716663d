"""Image ingestion, normalization, color-space conversion, and histograms.

Images are carried as float64 arrays in a declared color space so that repeated
conversions do not accumulate 8-bit quantization error. Canonical channel ranges:
RGB 0-255, HSV h 0-360 (degrees) / s,v 0-1, CIELAB L 0-100 / a,b -128-127,
GRAY 0-255.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ConversionError, ImageLoadError

WORKING_SIZE = 256  # every pipeline stage downstream of normalize() assumes this


class ColorSpace(str, Enum):
    RGB = "rgb"
    HSV = "hsv"
    CIELAB = "lab"
    GRAY = "gray"


CHANNEL_RANGES = {
    ColorSpace.RGB: ((0.0, 255.0), (0.0, 255.0), (0.0, 255.0)),
    ColorSpace.HSV: ((0.0, 360.0), (0.0, 1.0), (0.0, 1.0)),
    ColorSpace.CIELAB: ((0.0, 100.0), (-128.0, 127.0), (-128.0, 127.0)),
    ColorSpace.GRAY: ((0.0, 255.0),),
}

GRAY_LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

# sRGB -> XYZ (D65 white point, 2 degree observer), standard matrix. The
# inverse and the white point are derived from it so that white maps to
# exactly L=100, a=b=0.
_SRGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3576761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_XYZ_TO_SRGB = np.linalg.inv(_SRGB_TO_XYZ)
_D65_WHITE = _SRGB_TO_XYZ @ np.ones(3)
_LAB_DELTA = 6.0 / 29.0


@dataclass(frozen=True, eq=False)
class ImageBuffer:
    """Fixed-size raster of float pixels in a declared color space."""

    width: int
    height: int
    color_space: ColorSpace
    data: np.ndarray  # (height, width, channels), float64, C-contiguous

    def __post_init__(self):
        channels = len(CHANNEL_RANGES[self.color_space])
        if self.data.shape != (self.height, self.width, channels):
            raise ValueError(
                f"data shape {self.data.shape} does not match "
                f"{self.height}x{self.width}x{channels}"
            )
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")
        for c, (lo, hi) in enumerate(CHANNEL_RANGES[self.color_space]):
            ch = self.data[:, :, c]
            if ch.min() < lo or ch.max() > hi:
                raise ValueError(
                    f"channel {c} outside canonical range [{lo}, {hi}] "
                    f"for {self.color_space.value}"
                )
        self.data.setflags(write=False)

    @classmethod
    def from_array(cls, arr: np.ndarray, color_space: ColorSpace) -> "ImageBuffer":
        arr = np.ascontiguousarray(arr, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        h, w = arr.shape[:2]
        return cls(width=w, height=h, color_space=color_space, data=arr)

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def pixels(self) -> np.ndarray:
        """Pixels as an (N, channels) row-major view."""
        return self.data.reshape(-1, self.channels)


@dataclass(frozen=True, eq=False)
class Histogram:
    """Per-channel equal-width histogram over the canonical channel ranges."""

    bins_per_channel: int
    counts: tuple  # one int64 array of length bins_per_channel per channel
    color_space: ColorSpace

    def to_dict(self) -> dict:
        return {
            "bins": self.bins_per_channel,
            "channels": [c.tolist() for c in self.counts],
        }


def load_image(path) -> ImageBuffer:
    """Read a PNG or JPEG file into an RGB ImageBuffer at source resolution."""
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"file not found: {path}")
    try:
        with Image.open(p) as im:
            fmt = im.format
            if fmt not in ("PNG", "JPEG"):
                raise ImageLoadError(f"unsupported format {fmt!r}: {path}")
            if im.width == 0 or im.height == 0:
                raise ImageLoadError(f"empty image: {path}")
            rgb = im.convert("RGB")
            arr = np.asarray(rgb, dtype=np.float64)
    except UnidentifiedImageError as exc:
        raise ImageLoadError(f"unreadable image file: {path}") from exc
    if arr.size == 0:
        raise ImageLoadError(f"empty image: {path}")
    return ImageBuffer.from_array(arr, ColorSpace.RGB)


def normalize(img: ImageBuffer) -> ImageBuffer:
    """Plain bilinear resize of an RGB image to the 256x256 working raster.

    Aspect ratio is not preserved. Resizing an already-256x256 image is a
    bit-exact identity, which makes normalize idempotent.
    """
    if img.color_space is not ColorSpace.RGB:
        raise ValueError("normalize expects an RGB image")
    out = _resize_bilinear(img.data, WORKING_SIZE, WORKING_SIZE)
    lo_hi = CHANNEL_RANGES[ColorSpace.RGB][0]
    np.clip(out, lo_hi[0], lo_hi[1], out=out)
    return ImageBuffer.from_array(out, ColorSpace.RGB)


def _resize_bilinear(data: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    src_h, src_w = data.shape[:2]
    ys = (np.arange(out_h) + 0.5) * (src_h / out_h) - 0.5
    xs = (np.arange(out_w) + 0.5) * (src_w / out_w) - 0.5
    ys = np.clip(ys, 0.0, src_h - 1.0)
    xs = np.clip(xs, 0.0, src_w - 1.0)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, src_h - 1)
    x1 = np.minimum(x0 + 1, src_w - 1)
    fy = (ys - y0)[:, np.newaxis, np.newaxis]
    fx = (xs - x0)[np.newaxis, :, np.newaxis]
    a = data[np.ix_(y0, x0)]
    b = data[np.ix_(y0, x1)]
    c = data[np.ix_(y1, x0)]
    d = data[np.ix_(y1, x1)]
    # incremental form keeps flat areas and unit weights bit-exact
    top = a + fx * (b - a)
    bottom = c + fx * (d - c)
    return top + fy * (bottom - top)


def convert_color(img: ImageBuffer, target: ColorSpace) -> ImageBuffer:
    """Per-pixel closed-form conversion; dimensions unchanged.

    Supported pairs: RGB->HSV, RGB->CIELAB, RGB->GRAY, HSV->RGB, CIELAB->RGB,
    plus the identity conversion. Anything else raises ConversionError.
    """
    if img.color_space is target:
        return ImageBuffer.from_array(img.data.copy(), target)
    converted = convert_pixels(img.pixels(), img.color_space, target)
    out = converted.reshape(img.height, img.width, -1)
    return ImageBuffer.from_array(out, target)


def convert_pixels(pixels: np.ndarray, source: ColorSpace, target: ColorSpace) -> np.ndarray:
    """Convert an (N, channels) array of colors between spaces."""
    pixels = np.asarray(pixels, dtype=np.float64)
    if pixels.ndim == 1:
        pixels = pixels[np.newaxis, :]
    if source is target:
        return pixels.copy()
    key = (source, target)
    if key == (ColorSpace.RGB, ColorSpace.HSV):
        return _rgb_to_hsv(pixels)
    if key == (ColorSpace.HSV, ColorSpace.RGB):
        return _hsv_to_rgb(pixels)
    if key == (ColorSpace.RGB, ColorSpace.CIELAB):
        return _rgb_to_lab(pixels)
    if key == (ColorSpace.CIELAB, ColorSpace.RGB):
        return _lab_to_rgb(pixels)
    if key == (ColorSpace.RGB, ColorSpace.GRAY):
        return _rgb_to_gray(pixels)
    if key == (ColorSpace.GRAY, ColorSpace.RGB):
        return np.repeat(pixels, 3, axis=1)
    raise ConversionError(f"unsupported conversion {source.value} -> {target.value}")


def _rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    x = rgb / 255.0
    r, g, b = x[:, 0], x[:, 1], x[:, 2]
    maxc = x.max(axis=1)
    minc = x.min(axis=1)
    span = maxc - minc
    v = maxc
    s = np.where(maxc > 0, span / np.where(maxc > 0, maxc, 1.0), 0.0)
    safe = np.where(span > 0, span, 1.0)
    rc = (maxc - r) / safe
    gc = (maxc - g) / safe
    bc = (maxc - b) / safe
    h0 = np.select([r == maxc, g == maxc], [bc - gc, 2.0 + rc - bc], default=4.0 + gc - rc)
    h = np.where(span > 0, (h0 / 6.0) % 1.0, 0.0) * 360.0
    h = np.where(h >= 360.0, 0.0, h)  # guard against modulo rounding to 1.0
    return np.stack([h, s, v], axis=1)


def _hsv_to_rgb(hsv: np.ndarray) -> np.ndarray:
    h = (hsv[:, 0] / 360.0) % 1.0
    s = hsv[:, 1]
    v = hsv[:, 2]
    i = np.floor(h * 6.0)
    f = h * 6.0 - i
    i = i.astype(np.intp) % 6
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    r = np.choose(i, [v, q, p, p, t, v])
    g = np.choose(i, [t, v, v, q, p, p])
    b = np.choose(i, [p, p, t, v, v, q])
    return np.stack([r, g, b], axis=1) * 255.0


def _srgb_to_linear(c: np.ndarray) -> np.ndarray:
    return np.where(c > 0.04045, ((c + 0.055) / 1.055) ** 2.4, c / 12.92)


def _linear_to_srgb(c: np.ndarray) -> np.ndarray:
    c = np.clip(c, 0.0, None)
    return np.where(c > 0.0031308, 1.055 * c ** (1.0 / 2.4) - 0.055, 12.92 * c)


def _rgb_to_lab(rgb: np.ndarray) -> np.ndarray:
    lin = _srgb_to_linear(rgb / 255.0)
    xyz = (lin @ _SRGB_TO_XYZ.T) / _D65_WHITE
    f = np.where(
        xyz > _LAB_DELTA**3,
        np.cbrt(xyz),
        xyz / (3.0 * _LAB_DELTA**2) + 4.0 / 29.0,
    )
    lab = np.stack(
        [
            116.0 * f[:, 1] - 16.0,
            500.0 * (f[:, 0] - f[:, 1]),
            200.0 * (f[:, 1] - f[:, 2]),
        ],
        axis=1,
    )
    ranges = CHANNEL_RANGES[ColorSpace.CIELAB]
    for c, (lo, hi) in enumerate(ranges):
        np.clip(lab[:, c], lo, hi, out=lab[:, c])
    return lab


def _lab_to_rgb(lab: np.ndarray) -> np.ndarray:
    fy = (lab[:, 0] + 16.0) / 116.0
    fx = fy + lab[:, 1] / 500.0
    fz = fy - lab[:, 2] / 200.0
    f = np.stack([fx, fy, fz], axis=1)
    xyz = np.where(f > _LAB_DELTA, f**3, 3.0 * _LAB_DELTA**2 * (f - 4.0 / 29.0))
    xyz = xyz * _D65_WHITE
    lin = xyz @ _XYZ_TO_SRGB.T
    srgb = _linear_to_srgb(lin)
    return np.clip(srgb, 0.0, 1.0) * 255.0


def _rgb_to_gray(rgb: np.ndarray) -> np.ndarray:
    return (rgb @ GRAY_LUMA_WEIGHTS)[:, np.newaxis]


def color_histogram(img: ImageBuffer, bins: int) -> Histogram:
    """Equal-width per-channel histogram over the canonical channel ranges."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    counts = []
    for c, (lo, hi) in enumerate(CHANNEL_RANGES[img.color_space]):
        hist, _ = np.histogram(img.data[:, :, c], bins=bins, range=(lo, hi))
        counts.append(hist.astype(np.int64))
    return Histogram(bins_per_channel=bins, counts=tuple(counts), color_space=img.color_space)


def write_png(img: ImageBuffer, path) -> None:
    """Debug dump of any ImageBuffer as an 8-bit PNG (non-RGB goes through RGB)."""
    if img.color_space is ColorSpace.GRAY:
        arr = np.round(img.data[:, :, 0]).astype(np.uint8)
        Image.fromarray(arr, "L").save(path, format="PNG")
        return
    rgb = img if img.color_space is ColorSpace.RGB else convert_color(img, ColorSpace.RGB)
    arr = np.round(rgb.data).astype(np.uint8)
    Image.fromarray(arr, "RGB").save(path, format="PNG")
