"""Program memory spectrum: memory traces rendered as square RGB images.

Names and values are position-weighted ASCII sums; the three channels are
names (red), values (green), and stack depths (blue).  Each channel is
filled column-major into a ceil(sqrt(m))-sided square, zero-padded, then
min-max normalized to 0..255 per channel (a constant channel maps to all
zeros).  PNG round trips are lossless.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DataError, DegenerateImageError
from .memcollect import MemoryTrace


def str_to_int(s: str) -> int:
    """Position-weighted character-code sum: sum of (i+1) * code(s[i]).

    Weighting makes the encoding order-sensitive ("ab" != "ba").
    Non-ASCII characters contribute their UTF-8 byte values, one term per
    byte (defensive; the toy language only emits ASCII).
    """
    total = 0
    for i, byte in enumerate(s.encode("utf-8")):
        total += (i + 1) * byte
    return total


def flatten(trace: MemoryTrace) -> tuple[list[int], list[int], list[int]]:
    """Concatenate snapshot entries in (seq, entry) order into three
    length-m lists: encoded names, encoded values, raw depths."""
    names: list[int] = []
    values: list[int] = []
    depths: list[int] = []
    for snapshot in trace.snapshots:
        for name, value, depth in snapshot.entries:
            names.append(str_to_int(name))
            values.append(str_to_int(value))
            depths.append(depth)
    return names, values, depths


def ceil_sqrt(m: int) -> int:
    side = int(np.ceil(np.sqrt(m)))
    while side * side < m:  # guard against float rounding
        side += 1
    while side > 1 and (side - 1) * (side - 1) >= m:
        side -= 1
    return side


def reshape_square(flat: list[int]) -> np.ndarray:
    """Fill a ceil(sqrt(m)) x ceil(sqrt(m)) plane column by column,
    zero-padding the tail."""
    m = len(flat)
    if m == 0:
        raise DegenerateImageError("cannot build an image plane from zero entries")
    side = ceil_sqrt(m)
    plane = np.zeros((side, side), dtype=np.int64)
    for idx, value in enumerate(flat):
        col, row = divmod(idx, side)
        plane[row, col] = value
    return plane


def normalize_channels(stacked: np.ndarray) -> np.ndarray:
    """Min-max scale each channel of a (side, side, 3) integer matrix to
    0..255, rounding to nearest; a zero-range channel becomes all zeros."""
    out = np.zeros(stacked.shape, dtype=np.uint8)
    for c in range(stacked.shape[2]):
        plane = stacked[:, :, c].astype(np.float64)
        lo, hi = plane.min(), plane.max()
        if hi > lo:
            out[:, :, c] = np.rint((plane - lo) / (hi - lo) * 255).astype(np.uint8)
    return out


@dataclass
class PMSImage:
    """Normalized pixels plus the pre-resize side length used by SizeDiv."""

    pixels: np.ndarray  # (side, side, 3) uint8
    original_side: int
    m: int | None = None  # populated cells per channel, when known

    @property
    def side(self) -> int:
        return int(self.pixels.shape[0])


def pms_image(trace: MemoryTrace) -> PMSImage:
    """Full transformation: flatten, reshape per channel, stack, normalize."""
    names, values, depths = flatten(trace)
    if not names:
        raise DegenerateImageError(f"memory trace of {trace.test_id!r} hit no breakpoint")
    planes = [reshape_square(chan) for chan in (names, values, depths)]
    stacked = np.stack(planes, axis=2)
    return PMSImage(
        pixels=normalize_channels(stacked),
        original_side=planes[0].shape[0],
        m=len(names),
    )


def encode_png(image: PMSImage, path: str | Path) -> None:
    """Write the image as an RGB PNG plus a `.json` sidecar carrying the
    original side length and entry count."""
    path = Path(path)
    Image.fromarray(image.pixels, mode="RGB").save(path, format="PNG")
    sidecar = {"original_side": image.original_side, "m": image.m}
    path.with_suffix(".json").write_text(json.dumps(sidecar, sort_keys=True) + "\n")


def decode_png(path: str | Path) -> PMSImage:
    path = Path(path)
    try:
        with Image.open(path) as img:
            pixels = np.asarray(img.convert("RGB"), dtype=np.uint8)
    except (OSError, UnidentifiedImageError) as exc:
        raise DataError(f"malformed PNG {path}: {exc}") from exc
    sidecar_path = path.with_suffix(".json")
    if sidecar_path.exists():
        sidecar = json.loads(sidecar_path.read_text())
        original_side = int(sidecar["original_side"])
        m = None if sidecar.get("m") is None else int(sidecar["m"])
    else:
        original_side = int(pixels.shape[0])
        m = None
    return PMSImage(pixels=pixels, original_side=original_side, m=m)
