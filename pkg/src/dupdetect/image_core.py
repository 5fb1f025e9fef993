"""Raster containers, file I/O and the RGB to luma conversion."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image, UnidentifiedImageError

MIN_SIDE = 16

# Y row of the RGB -> YUV transform. U and V are never consumed by the features.
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

_GRAY_MODES = {"1", "L", "LA", "La", "I", "I;16", "I;16B", "I;16L", "I;16N", "F"}


class ImageFormatError(ValueError):
    """Raised for unreadable, unsupported or undersized images."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class RasterImage:
    """Three-channel (R, G, B) image with intensities in [0, 1].

    ``data`` has shape ``(height, width, 3)`` and is read-only.
    """

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 3 or data.shape[2] != 3:
            raise ImageFormatError(f"expected an (H, W, 3) array, got shape {data.shape}")
        if data.shape[0] < MIN_SIDE or data.shape[1] < MIN_SIDE:
            raise ImageFormatError(
                f"image is {data.shape[1]}x{data.shape[0]}, need at least {MIN_SIDE}x{MIN_SIDE}"
            )
        if not np.all(np.isfinite(data)) or data.min() < 0.0 or data.max() > 1.0:
            raise ImageFormatError("intensities must lie in [0, 1]")
        object.__setattr__(self, "data", _frozen(data))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape[:2]

    def channel(self, index: int) -> np.ndarray:
        return self.data[:, :, index]

    def __eq__(self, other):
        if not isinstance(other, RasterImage):
            return NotImplemented
        return np.array_equal(self.data, other.data)

    @classmethod
    def from_uint8(cls, arr: np.ndarray) -> "RasterImage":
        arr = np.asarray(arr)
        return cls(arr.astype(np.float64) / 255.0)


@dataclass(frozen=True, eq=False)
class LumaPlane:
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValueError(f"luma plane must be 2-D, got shape {data.shape}")
        object.__setattr__(self, "data", _frozen(data))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


def rgb_to_luma(img: RasterImage) -> LumaPlane:
    r, g, b = (img.data[:, :, k] for k in range(3))
    y = LUMA_WEIGHTS[0] * r + LUMA_WEIGHTS[1] * g + LUMA_WEIGHTS[2] * b
    # rounding can push a white pixel a few ulps past 1
    return LumaPlane(np.clip(y, 0.0, 1.0))


def _normalize(arr: np.ndarray) -> np.ndarray:
    if arr.dtype == np.uint8:
        return arr.astype(np.float64) / 255.0
    if arr.dtype == np.uint16:
        return arr.astype(np.float64) / 65535.0
    raise ImageFormatError(f"unsupported sample type {arr.dtype}")


def load_image(path: Union[str, Path]) -> RasterImage:
    """Read a PNG or JPEG file as a normalized RGB raster.

    Grayscale files are rejected; an alpha channel is discarded.
    """
    path = Path(path)
    try:
        with Image.open(path) as im:
            if im.format not in ("PNG", "JPEG"):
                raise ImageFormatError(f"{path}: unsupported format {im.format}")
            if im.mode in _GRAY_MODES:
                raise ImageFormatError(f"{path}: grayscale images are not supported")
            if im.mode != "RGB":
                im = im.convert("RGB")
            arr = np.asarray(im)
    except FileNotFoundError:
        raise
    except UnidentifiedImageError as exc:
        raise ImageFormatError(f"{path}: not a readable image") from exc
    except OSError as exc:
        raise ImageFormatError(f"{path}: {exc}") from exc
    return RasterImage(_normalize(arr))


def to_uint8(img: RasterImage) -> np.ndarray:
    return np.round(img.data * 255.0).astype(np.uint8)


def quantize(img: RasterImage) -> RasterImage:
    """Snap intensities to the 8-bit grid, as writing a PNG would."""
    return RasterImage.from_uint8(to_uint8(img))


def save_image(img: RasterImage, path: Union[str, Path]) -> None:
    Image.fromarray(to_uint8(img), mode="RGB").save(path)


def _mask_bits(mask) -> np.ndarray:
    bits = getattr(mask, "bits", mask)
    bits = np.asarray(bits, dtype=bool)
    if bits.ndim != 2 or bits.size == 0:
        raise ValueError(f"mask must be a non-empty 2-D map, got shape {bits.shape}")
    return bits


def save_mask(mask, path: Union[str, Path]) -> None:
    """Write a boolean map as 8-bit PNG: 255 for duplicated pixels, 0 elsewhere."""
    bits = _mask_bits(mask)
    Image.fromarray(np.where(bits, 255, 0).astype(np.uint8), mode="L").save(path, format="PNG")


def load_mask(path: Union[str, Path]) -> np.ndarray:
    """Read a mask PNG; any nonzero sample counts as set."""
    try:
        with Image.open(path) as im:
            arr = np.asarray(im.convert("L"))
    except UnidentifiedImageError as exc:
        raise ImageFormatError(f"{path}: not a readable image") from exc
    return arr > 0
