"""Grayscale images, PGM I/O, and squared-gradient attraction fields."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class PgmError(ValueError):
    """Malformed PGM data."""


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Row-major grayscale raster with intensities in [0, maxval]."""

    pixels: np.ndarray  # shape (height, width), unsigned integer
    maxval: int = 255

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("pixels must be a 2-D grid with positive dimensions")
        if not np.issubdtype(arr.dtype, np.integer):
            raise ValueError("pixel intensities must be integers")
        if not 1 <= self.maxval <= 65535:
            raise ValueError(f"maxval must be in [1, 65535], got {self.maxval}")
        if arr.min() < 0 or arr.max() > self.maxval:
            raise ValueError("pixel intensities must lie in [0, maxval]")
        arr = arr.astype(np.uint16, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Per-pixel non-negative real values (e.g. squared gradient magnitude)."""

    values: np.ndarray  # shape (height, width), float64

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("values must be a 2-D grid with positive dimensions")
        if not np.isfinite(arr).all():
            raise ValueError("field values must be finite")
        if arr.min() < 0:
            raise ValueError("field values must be non-negative")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


def _header_tokens(data: bytes, count: int, start: int) -> tuple[list[bytes], int]:
    """Read `count` whitespace-separated tokens, honoring '#' comments."""
    tokens: list[bytes] = []
    i = start
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i] == ord("#"):
            while i < n and data[i] != ord("\n"):
                i += 1
            continue
        if i >= n:
            raise PgmError("truncated header")
        j = i
        while j < n and not data[j : j + 1].isspace() and data[j] != ord("#"):
            j += 1
        tokens.append(data[i:j])
        i = j
    return tokens, i


def _header_int(token: bytes, field: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise PgmError(f"{field}: expected an integer, got {token!r}") from None


def load_pgm(data: bytes) -> GrayImage:
    """Parse a P2 (ASCII) or P5 (binary) PGM file."""
    if data[:2] not in (b"P2", b"P5"):
        raise PgmError(f"bad magic {data[:2]!r}: expected P2 or P5")
    magic = data[:2]
    tokens, pos = _header_tokens(data, 3, 2)
    width = _header_int(tokens[0], "width")
    height = _header_int(tokens[1], "height")
    maxval = _header_int(tokens[2], "maxval")
    if width < 1 or height < 1:
        raise PgmError(f"dimensions must be positive, got {width}x{height}")
    if not 1 <= maxval <= 65535:
        raise PgmError(f"maxval must be in [1, 65535], got {maxval}")

    if magic == b"P5":
        # exactly one whitespace byte separates the header from the payload
        if pos >= len(data) or not data[pos : pos + 1].isspace():
            raise PgmError("missing whitespace after maxval")
        pos += 1
        sample_size = 2 if maxval > 255 else 1
        expected = width * height * sample_size
        payload = data[pos:]
        if len(payload) != expected:
            raise PgmError(
                f"truncated pixel data: expected {expected} bytes, got {len(payload)}"
            )
        dtype = ">u2" if sample_size == 2 else np.uint8
        pixels = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    else:
        tokens, pos = _header_tokens(data, width * height, pos)
        rest = data[pos:]
        if rest.strip() and not rest.lstrip()[:1] == b"#":
            raise PgmError(f"unexpected trailing data: {rest[:20]!r}")
        values = [_header_int(t, "pixel") for t in tokens]
        pixels = np.array(values, dtype=np.int64).reshape(height, width)
    if pixels.max(initial=0) > maxval:
        raise PgmError("pixel intensity exceeds maxval")
    if pixels.min(initial=0) < 0:
        raise PgmError("negative pixel intensity")
    return GrayImage(pixels=pixels.astype(np.uint16), maxval=maxval)


def save_pgm(img: GrayImage, binary: bool = True) -> bytes:
    """Serialize with a canonical header; load(save(img)) is pixel-identical."""
    header = (
        f"{'P5' if binary else 'P2'}\n# kymosnake\n{img.width} {img.height}\n{img.maxval}\n"
    ).encode("ascii")
    if binary:
        dtype = ">u2" if img.maxval > 255 else np.uint8
        return header + img.pixels.astype(dtype).tobytes()
    # P2 body: tokens wrapped at 70 characters per line
    lines: list[str] = []
    current = ""
    for value in img.pixels.reshape(-1):
        token = str(int(value))
        if not current:
            current = token
        elif len(current) + 1 + len(token) <= 70:
            current += " " + token
        else:
            lines.append(current)
            current = token
    if current:
        lines.append(current)
    return header + ("\n".join(lines) + "\n").encode("ascii")


def gradient_magnitude_squared(img: GrayImage) -> ScalarField:
    """(dI/dx)^2 + (dI/dy)^2 per pixel.

    Central differences in the interior, one-sided differences at the borders;
    an axis of size 1 contributes zero derivative.
    """
    arr = img.pixels.astype(np.float64)
    gy = np.gradient(arr, axis=0) if img.height > 1 else np.zeros_like(arr)
    gx = np.gradient(arr, axis=1) if img.width > 1 else np.zeros_like(arr)
    return ScalarField(values=gx * gx + gy * gy)


def intensity_squared(img: GrayImage) -> ScalarField:
    """Squared pixel values as an attraction field.

    For rasters that already store edge strength per pixel (synthesized
    kymograms are emitted that way), squaring the stored magnitude gives the
    squared-gradient field directly; re-deriving a spatial gradient would
    shift the maxima off the bright ridge rows.
    """
    arr = img.pixels.astype(np.float64)
    return ScalarField(values=arr * arr)


def external_energy(field: ScalarField, p: tuple[int, int], gamma: float) -> float:
    """Data attraction term at pixel p = (x, y): -gamma * field(p)."""
    x, y = p
    if not (0 <= x < field.width and 0 <= y < field.height):
        raise ValueError(f"point ({x}, {y}) outside field {field.width}x{field.height}")
    if not (gamma >= 0 and np.isfinite(gamma)):
        raise ValueError(f"gamma must be finite and non-negative, got {gamma}")
    return -(gamma * float(field.values[y, x]))
