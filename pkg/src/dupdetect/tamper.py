"""Copy-move forgery generation with ground truth and post-processing attacks.

Attack parameters follow the conventions below.

* ``jpeg``: quality factor 1..100, baseline encoding with Pillow.
* ``blur``: integer radius r, a (2r+1) x (2r+1) Gaussian with sigma = r,
  edges clamped.
* ``awgn``: standard deviation in 0..255 intensity units.
* ``scale``: bilinear resize by a factor, output side ``round(side * factor)``.
* ``shift``: ``(drow, dcol)`` displacement of the paste position.
* ``rotate``: degrees, counter-clockwise about the patch centre.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from PIL import Image
from scipy import ndimage

from .image_core import RasterImage

ATTACK_PARAMS = {
    "jpeg": "quality",
    "blur": "radius",
    "awgn": "std",
    "scale": "factor",
    "shift": "offset",
    "rotate": "degrees",
}


class ForgeryError(ValueError):
    pass


@dataclass(frozen=True)
class AttackOp:
    kind: str
    value: Union[float, tuple[int, int]]

    def __post_init__(self):
        kind, v = self.kind, self.value
        if kind not in ATTACK_PARAMS:
            raise ForgeryError(f"unknown attack {kind!r}; expected one of {sorted(ATTACK_PARAMS)}")
        if kind == "shift":
            try:
                drow, dcol = (int(x) for x in v)
            except (TypeError, ValueError):
                raise ForgeryError(f"shift needs a (drow, dcol) pair, got {v!r}") from None
            object.__setattr__(self, "value", (drow, dcol))
            return
        if isinstance(v, (list, tuple)) or isinstance(v, bool):
            raise ForgeryError(f"{kind} needs a scalar parameter, got {v!r}")
        if kind == "jpeg" and not (int(v) == v and 1 <= v <= 100):
            raise ForgeryError(f"jpeg quality must be an integer in [1, 100], got {v}")
        if kind == "blur" and not (int(v) == v and v >= 1):
            raise ForgeryError(f"blur radius must be an integer >= 1, got {v}")
        if kind == "awgn" and not v >= 0:
            raise ForgeryError(f"noise std must be >= 0, got {v}")
        if kind == "scale" and not v > 0:
            raise ForgeryError(f"scale factor must be > 0, got {v}")
        if kind == "rotate" and not abs(v) <= 45:
            raise ForgeryError(f"rotation is limited to 45 degrees, got {v}")
        if kind in ("jpeg", "blur"):
            v = int(v)
        object.__setattr__(self, "value", v)

    def to_dict(self) -> dict:
        value = list(self.value) if self.kind == "shift" else self.value
        return {"kind": self.kind, ATTACK_PARAMS[self.kind]: value}

    @classmethod
    def from_dict(cls, d: dict) -> "AttackOp":
        kind = d.get("kind")
        if kind not in ATTACK_PARAMS:
            raise ForgeryError(f"unknown attack {kind!r}")
        name = ATTACK_PARAMS[kind]
        if name not in d:
            raise ForgeryError(f"{kind} attack is missing {name!r}")
        return cls(kind, d[name])


@dataclass(frozen=True)
class ForgerySpec:
    """One copy-move: ``source_rect`` is ``(row, col, height, width)``,
    ``dest`` the ``(row, col)`` where the copy's top-left lands."""

    source_rect: tuple[int, int, int, int]
    dest: tuple[int, int]
    pre_paste_ops: tuple[AttackOp, ...] = ()
    post_paste_ops: tuple[AttackOp, ...] = ()

    def __post_init__(self):
        rect = tuple(int(x) for x in self.source_rect)
        dest = tuple(int(x) for x in self.dest)
        if len(rect) != 4 or len(dest) != 2:
            raise ForgeryError("source_rect needs 4 values and dest 2")
        if rect[2] <= 0 or rect[3] <= 0:
            raise ForgeryError(f"source_rect must have positive size, got {rect}")
        object.__setattr__(self, "source_rect", rect)
        object.__setattr__(self, "dest", dest)
        object.__setattr__(self, "pre_paste_ops", tuple(self.pre_paste_ops))
        object.__setattr__(self, "post_paste_ops", tuple(self.post_paste_ops))
        for op in self.post_paste_ops:
            if op.kind in ("shift", "rotate"):
                raise ForgeryError(f"{op.kind} applies to the copied patch only")

    def to_dict(self) -> dict:
        return {
            "source_rect": list(self.source_rect),
            "dest": list(self.dest),
            "pre_paste_ops": [op.to_dict() for op in self.pre_paste_ops],
            "post_paste_ops": [op.to_dict() for op in self.post_paste_ops],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForgerySpec":
        try:
            return cls(
                source_rect=tuple(d["source_rect"]),
                dest=tuple(d["dest"]),
                pre_paste_ops=tuple(AttackOp.from_dict(o) for o in d.get("pre_paste_ops", [])),
                post_paste_ops=tuple(AttackOp.from_dict(o) for o in d.get("post_paste_ops", [])),
            )
        except KeyError as exc:
            raise ForgeryError(f"forgery spec is missing {exc}") from None


def dump_specs(specs: Union[ForgerySpec, Sequence[ForgerySpec]]) -> str:
    if isinstance(specs, ForgerySpec):
        return json.dumps(specs.to_dict(), indent=2)
    return json.dumps([s.to_dict() for s in specs], indent=2)


def load_specs(path: Union[str, Path]) -> list[ForgerySpec]:
    """Read a spec file holding one spec object or a list of them."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ForgeryError(f"{path}: invalid spec file ({exc})") from None
    docs = doc if isinstance(doc, list) else [doc]
    if not docs or not all(isinstance(d, dict) for d in docs):
        raise ForgeryError(f"{path}: expected a spec object or a non-empty list of them")
    return [ForgerySpec.from_dict(d) for d in docs]


# -- raster attacks -------------------------------------------------------

def _pixels(x) -> np.ndarray:
    return np.asarray(getattr(x, "data", x), dtype=np.float64)


def _like(x, arr: np.ndarray):
    return RasterImage(arr) if isinstance(x, RasterImage) else arr


def jpeg_roundtrip(img, quality: int):
    """Encode as baseline JPEG at ``quality`` and decode again."""
    op = AttackOp("jpeg", quality)
    arr = _pixels(img)
    buf = io.BytesIO()
    u8 = np.round(np.clip(arr, 0, 1) * 255).astype(np.uint8)
    Image.fromarray(u8, mode="RGB").save(buf, format="JPEG", quality=op.value)
    buf.seek(0)
    with Image.open(buf) as im:
        out = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    return _like(img, out)


def gaussian_kernel(radius: int) -> np.ndarray:
    """Normalized (2r+1) x (2r+1) Gaussian with sigma = r."""
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-(x ** 2) / (2.0 * radius ** 2))
    k = np.outer(g, g)
    return k / k.sum()


def gaussian_blur(img, radius: int):
    radius = AttackOp("blur", radius).value
    arr = _pixels(img)
    k = gaussian_kernel(radius)
    out = np.empty_like(arr)
    for c in range(arr.shape[2]):
        out[:, :, c] = ndimage.convolve(arr[:, :, c], k, mode="nearest")
    return _like(img, np.clip(out, 0.0, 1.0))


def add_awgn(img, std: float, seed: Union[int, np.random.Generator, None] = None):
    """Add zero-mean Gaussian noise, ``std`` on the 0..255 scale, then clamp."""
    std = AttackOp("awgn", std).value
    arr = _pixels(img)
    if std == 0:
        return _like(img, arr.copy())
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    noisy = arr + rng.normal(0.0, std / 255.0, size=arr.shape)
    return _like(img, np.clip(noisy, 0.0, 1.0))


def _scaled_shape(h: int, w: int, factor: float) -> tuple[int, int]:
    factor = AttackOp("scale", factor).value
    nh, nw = int(round(h * factor)), int(round(w * factor))
    if nh < 1 or nw < 1:
        raise ForgeryError(f"scaling {h}x{w} by {factor} leaves nothing")
    return nh, nw


def _source_coords(h: int, w: int, nh: int, nw: int):
    # pixel-centre alignment; identity when the size is unchanged
    rows = (np.arange(nh) + 0.5) * (h / nh) - 0.5
    cols = (np.arange(nw) + 0.5) * (w / nw) - 0.5
    return np.clip(rows, 0, h - 1), np.clip(cols, 0, w - 1)


def scale_raster(img, factor: float):
    """Bilinear resize to ``round(side * factor)`` on each axis."""
    arr = _pixels(img)
    h, w = arr.shape[:2]
    nh, nw = _scaled_shape(h, w, factor)
    if (nh, nw) == (h, w):
        return _like(img, arr.copy())
    rows, cols = _source_coords(h, w, nh, nw)
    rr, cc = np.meshgrid(rows, cols, indexing="ij")
    out = np.stack(
        [ndimage.map_coordinates(arr[:, :, c], [rr, cc], order=1, mode="nearest") for c in range(arr.shape[2])],
        axis=2,
    )
    return _like(img, np.clip(out, 0.0, 1.0))


def scale_mask(mask: np.ndarray, factor: float) -> np.ndarray:
    """Nearest-neighbour resize using the same geometry as :func:`scale_raster`."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    nh, nw = _scaled_shape(h, w, factor)
    if (nh, nw) == (h, w):
        return mask.copy()
    rows, cols = _source_coords(h, w, nh, nw)
    return mask[np.round(rows).astype(int)][:, np.round(cols).astype(int)]


def rotate_patch(patch, degrees: float) -> tuple[np.ndarray, np.ndarray]:
    """Rotate about the patch centre with bilinear sampling.

    Returns the rotated pixels and a validity map; pixels whose source falls
    outside the original patch are invalid. Any angle is accepted here; the
    45 degree limit applies to rotation attacks in a forgery spec.
    """
    degrees = float(degrees)
    arr = _pixels(patch)
    h, w = arr.shape[:2]
    if degrees == 0:
        return arr.copy(), np.ones((h, w), dtype=bool)
    theta = np.deg2rad(degrees)
    cos, sin = np.cos(theta), np.sin(theta)
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    dy, dx = yy - cy, xx - cx
    # inverse map: output pixel -> source position (rows grow downward)
    src_y = cy + cos * dy + sin * dx
    src_x = cx - sin * dy + cos * dx
    for coord in (src_y, src_x):
        near = np.round(coord)
        snap = np.abs(coord - near) < 1e-9
        coord[snap] = near[snap]
    eps = 1e-9
    valid = (src_y >= -eps) & (src_y <= h - 1 + eps) & (src_x >= -eps) & (src_x <= w - 1 + eps)
    src_y = np.clip(src_y, 0, h - 1)
    src_x = np.clip(src_x, 0, w - 1)
    planes = arr[:, :, None] if arr.ndim == 2 else arr
    out = np.stack(
        [ndimage.map_coordinates(planes[:, :, c], [src_y, src_x], order=1, mode="nearest")
         for c in range(planes.shape[2])],
        axis=2,
    )
    if arr.ndim == 2:
        out = out[:, :, 0]
    return np.clip(out, 0.0, 1.0), valid


def shift_paste(spec: ForgerySpec, drow: int, dcol: int, image_shape: Optional[tuple[int, int]] = None) -> ForgerySpec:
    """Move the paste position by ``(drow, dcol)``.

    With ``image_shape`` given, the shifted footprint must stay in bounds.
    """
    dest = (spec.dest[0] + int(drow), spec.dest[1] + int(dcol))
    if image_shape is not None:
        h, w = image_shape
        _, _, ph, pw = spec.source_rect
        if dest[0] < 0 or dest[1] < 0 or dest[0] + ph > h or dest[1] + pw > w:
            raise ForgeryError(f"shifted paste at {dest} leaves the {w}x{h} image")
    return replace(spec, dest=dest)


# -- forging --------------------------------------------------------------

@dataclass
class _Patch:
    pixels: np.ndarray
    valid: np.ndarray
    dest: tuple[int, int]


def _apply_patch_op(patch: _Patch, op: AttackOp, rng: np.random.Generator) -> _Patch:
    if op.kind == "shift":
        drow, dcol = op.value
        return _Patch(patch.pixels, patch.valid, (patch.dest[0] + drow, patch.dest[1] + dcol))
    if op.kind == "rotate":
        pixels, valid = rotate_patch(patch.pixels, op.value)
        rotated_valid, _ = rotate_patch(patch.valid.astype(np.float64), op.value)
        return _Patch(pixels, valid & (rotated_valid > 0.5), patch.dest)
    if op.kind == "scale":
        return _Patch(scale_raster(patch.pixels, op.value), scale_mask(patch.valid, op.value), patch.dest)
    return _Patch(_apply_raster_op(patch.pixels, op, rng), patch.valid, patch.dest)


def _apply_raster_op(arr: np.ndarray, op: AttackOp, rng: np.random.Generator) -> np.ndarray:
    if op.kind == "jpeg":
        return jpeg_roundtrip(arr, op.value)
    if op.kind == "blur":
        return gaussian_blur(arr, op.value)
    if op.kind == "awgn":
        return add_awgn(arr, op.value, rng)
    if op.kind == "scale":
        return scale_raster(arr, op.value)
    raise ForgeryError(f"{op.kind} cannot be applied to a whole image")


def _check_rect(spec: ForgerySpec, h: int, w: int) -> None:
    r, c, ph, pw = spec.source_rect
    if r < 0 or c < 0 or r + ph > h or c + pw > w:
        raise ForgeryError(f"source_rect {spec.source_rect} leaves the {w}x{h} image")


def apply_forgery(
    img: RasterImage,
    spec: Union[ForgerySpec, Sequence[ForgerySpec]],
    seed: Optional[int] = 0,
) -> tuple[RasterImage, np.ndarray]:
    """Forge ``img`` and return it with the ground-truth mask.

    Several specs produce several duplicated pairs: every copy is cut from the
    untouched input and pasted in turn, then each spec's post-paste ops run
    in order on the whole image. The mask marks each source rectangle and the
    valid pixels of each pasted footprint.
    """
    specs = [spec] if isinstance(spec, ForgerySpec) else list(spec)
    if not specs:
        raise ForgeryError("no forgery spec given")
    rng = np.random.default_rng(seed)
    original = img.data
    h, w = img.shape
    out = original.copy()
    truth = np.zeros((h, w), dtype=bool)

    for s in specs:
        _check_rect(s, h, w)
        r, c, ph, pw = s.source_rect
        patch = _Patch(original[r:r + ph, c:c + pw].copy(), np.ones((ph, pw), dtype=bool), s.dest)
        for op in s.pre_paste_ops:
            patch = _apply_patch_op(patch, op, rng)

        dr, dc = patch.dest
        if dr < 0 or dc < 0 or dr + ph > h or dc + pw > w:
            raise ForgeryError(f"paste footprint at {patch.dest} leaves the {w}x{h} image")
        # only growth from scaling is clipped
        qh, qw = patch.valid.shape
        r0, c0 = max(dr, 0), max(dc, 0)
        r1, c1 = min(dr + qh, h), min(dc + qw, w)
        if r1 <= r0 or c1 <= c0:
            raise ForgeryError(f"pasted patch at {patch.dest} falls outside the image")
        pasted = np.zeros((h, w), dtype=bool)
        sub = (slice(r0 - dr, r1 - dr), slice(c0 - dc, c1 - dc))
        pasted[r0:r1, c0:c1] = patch.valid[sub]
        source = np.zeros((h, w), dtype=bool)
        source[r:r + ph, c:c + pw] = True
        if np.any(pasted & source):
            raise ForgeryError("source and destination footprints overlap")

        region = out[r0:r1, c0:c1]
        keep = pasted[r0:r1, c0:c1]
        region[keep] = patch.pixels[sub][keep]
        truth |= source | pasted

    forged = np.clip(out, 0.0, 1.0)
    for s in specs:
        for op in s.post_paste_ops:
            forged = _apply_raster_op(forged, op, rng)
            if op.kind == "scale":
                truth = scale_mask(truth, op.value)
    return RasterImage(forged), truth

