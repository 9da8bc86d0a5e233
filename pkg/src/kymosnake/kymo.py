"""Vocal-fold vibration strings and synthetic kymograms.

A vibration cycle is written over the alphabet {o, c, x}: `o` while the
glottis opens (and stays open), `c` while it closes, `x` while the folds stay
in contact.  A well-formed string is a repetition of cycle blocks whose three
run lengths stay proportional: for constants (c_x, c_o, c_c) the products
(c_x * len_x, c_o * len_o, c_c * len_c) may deviate from their mean by at
most `eps` relative, and every run must be longer than 1 sample.

Kymograms are rendered as edge-strength rasters: one column per time sample,
bright pixels on the two glottal edge rows, black elsewhere, so the pixel
value itself plays the role of a gradient magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import GrayImage, gradient_magnitude_squared, intensity_squared
from .rng import SplitMix64, derive
from .snake import DeformResult, HardConstraints, Snake, SnakeParams, deform

ALPHABET = "ocx"

_JITTER_STREAM = 0
_NOISE_STREAM = 1


class NoSignalError(ValueError):
    """The image carries no row-wise intensity variation to locate a midline."""


class UnsatisfiableSpecError(ValueError):
    """No jittered run-length assignment can satisfy the proportionality bound."""


@dataclass(frozen=True)
class VibrationSpec:
    """Parameters for generating and rendering one vibration pattern.

    `closed`, `opening`, `closing` are the base run lengths of the x/o/c
    phases (each must exceed 1); `constants` are the per-phase proportionality
    weights in the same order, and `eps` the relative tolerance on the
    weighted run lengths.  Rendering parameters: `amplitude` is the maximum
    glottal half-width in pixels, `w_min` the residual half-width of an
    incomplete closure, `noise` the additive intensity noise amplitude, and
    `edge_intensity` the brightness of the edge rows.
    """

    closed: int
    opening: int
    closing: int
    constants: tuple[float, float, float] = (1.0, 1.0, 1.0)
    eps: float = 0.2
    periods: int = 1
    amplitude: int = 12
    w_min: int = 0
    jitter: int = 0
    noise: int = 0
    seed: int = 0
    height: int = 64
    edge_intensity: int = 200

    def __post_init__(self):
        for name in ("closed", "opening", "closing"):
            if getattr(self, name) <= 1:
                raise ValueError(f"{name} run length must exceed 1")
        if len(self.constants) != 3 or any(c <= 0 for c in self.constants):
            raise ValueError("constants must be three positive numbers")
        if not 0 <= self.eps < 1:
            raise ValueError(f"eps must lie in [0, 1), got {self.eps}")
        if self.periods < 0:
            raise ValueError("periods must be >= 0")
        if self.amplitude < 1:
            raise ValueError("amplitude must be >= 1")
        if not 0 <= self.w_min <= self.amplitude:
            raise ValueError("w_min must lie in [0, amplitude]")
        if self.jitter < 0 or self.noise < 0:
            raise ValueError("jitter and noise must be >= 0")
        if 2 * (self.amplitude + 1) >= self.height:
            raise ValueError(
                f"height {self.height} too small: need 2*(amplitude+1) < height"
            )
        if not 1 <= self.edge_intensity <= 255:
            raise ValueError("edge_intensity must lie in [1, 255]")

    @property
    def period(self) -> int:
        """Base samples per cycle: closed + opening + closing."""
        return self.closed + self.opening + self.closing


def run_lengths(text: str) -> tuple[tuple[str, int], ...]:
    """Run-length view [(symbol, length), ...]; re-concatenates to `text`."""
    runs: list[tuple[str, int]] = []
    for ch in text:
        if runs and runs[-1][0] == ch:
            runs[-1] = (ch, runs[-1][1] + 1)
        else:
            runs.append((ch, 1))
    return tuple(runs)


_CONSTANT_BY_SYMBOL = {"x": 0, "o": 1, "c": 2}  # index into VibrationSpec.constants


def _deviation(lengths_by_symbol: dict[str, int], constants) -> float:
    products = [constants[_CONSTANT_BY_SYMBOL[sym]] * n for sym, n in lengths_by_symbol.items()]
    mean = (products[0] + products[1] + products[2]) / 3.0
    return max(abs(p - mean) for p in products) / mean


def _block_ok(x_len: int, o_len: int, c_len: int, constants, eps: float) -> bool:
    if min(x_len, o_len, c_len) <= 1:
        return False
    return _deviation({"x": x_len, "o": o_len, "c": c_len}, constants) <= eps


@dataclass(frozen=True)
class VibrationVerdict:
    accepted: bool
    runs: tuple[tuple[str, int], ...]
    violation: str | None = None


def decide_vibration(
    text: str, constants: tuple[float, float, float] = (1.0, 1.0, 1.0), eps: float = 0.2
) -> VibrationVerdict:
    """Membership decision with a report naming the first violating run.

    Accepts the empty string and any repetition of cycle blocks in one of the
    three phase rotations (x-o-c, o-c-x, c-x-o; the first run fixes which),
    where every run is longer than 1 and every block meets the
    proportionality bound.  Runs in time linear in the input length.
    """
    if len(constants) != 3 or any(c <= 0 for c in constants):
        raise ValueError("constants must be three positive numbers")
    if eps < 0:
        raise ValueError("eps must be >= 0")
    for ch in text:
        if ch not in ALPHABET:
            raise ValueError(f"foreign symbol {ch!r}: alphabet is {{o, c, x}}")
    runs = run_lengths(text)
    if not runs:
        return VibrationVerdict(accepted=True, runs=runs)

    rotations = {"x": "xoc", "o": "ocx", "c": "cxo"}
    cycle = rotations[runs[0][0]]

    def rejected(message: str) -> VibrationVerdict:
        return VibrationVerdict(accepted=False, runs=runs, violation=message)

    block: dict[str, int] = {}
    for p, (sym, length) in enumerate(runs):
        expected = cycle[p % 3]
        if sym != expected:
            return rejected(f"run {p} ({sym}^{length}): expected a {expected!r} run")
        if length <= 1:
            return rejected(f"run {p} ({sym}^{length}): run length must exceed 1")
        block[sym] = length
        if p % 3 == 2:
            deviation = _deviation(block, constants)
            if deviation > eps:
                return rejected(
                    f"run {p} closes a block (x={block['x']}, o={block['o']}, "
                    f"c={block['c']}) deviating {deviation:.4g} > eps {eps:g}"
                )
            block = {}
    if len(runs) % 3 != 0:
        return rejected(f"run {len(runs) - 1}: incomplete final block ({len(runs) % 3} of 3 runs)")
    return VibrationVerdict(accepted=True, runs=runs)


def _jitter_feasible(spec: VibrationSpec) -> bool:
    j = spec.jitter
    base = (spec.closed, spec.opening, spec.closing)
    for dx in range(-j, j + 1):
        for do in range(-j, j + 1):
            for dc in range(-j, j + 1):
                if _block_ok(
                    max(2, base[0] + dx),
                    max(2, base[1] + do),
                    max(2, base[2] + dc),
                    spec.constants,
                    spec.eps,
                ):
                    return True
    return False


def generate_vibration_string(spec: VibrationSpec) -> str:
    """`periods` cycle blocks x^i o^j c^k with per-block jittered run lengths.

    Each block's lengths are the base lengths plus independent uniform jitter
    in [-jitter, +jitter], clamped to stay above 1, re-drawn until the block
    meets the proportionality bound.  Deterministic for a fixed seed.
    """
    if spec.periods == 0:
        return ""
    if not _jitter_feasible(spec):
        raise UnsatisfiableSpecError(
            "no run-length assignment within the jitter range satisfies the "
            f"proportionality bound (eps={spec.eps:g})"
        )
    rng = SplitMix64(derive(spec.seed, _JITTER_STREAM))
    span = 2 * spec.jitter + 1
    blocks: list[str] = []
    for _ in range(spec.periods):
        while True:
            x_len = max(2, spec.closed + rng.below(span) - spec.jitter)
            o_len = max(2, spec.opening + rng.below(span) - spec.jitter)
            c_len = max(2, spec.closing + rng.below(span) - spec.jitter)
            if _block_ok(x_len, o_len, c_len, spec.constants, spec.eps):
                break
        blocks.append("x" * x_len + "o" * o_len + "c" * c_len)
    return "".join(blocks)


@dataclass(frozen=True)
class Kymogram:
    """Rendered kymogram with its exact pre-noise edge rows."""

    image: GrayImage
    midline: int
    ground_truth: tuple[tuple[int, int], ...]  # per column (upper_row, lower_row)
    source: str

    def ground_truth_json(self) -> dict:
        return {"midline": self.midline, "edges": [[u, l] for u, l in self.ground_truth]}


def _half_width(sym: str, position: int, length: int, spec: VibrationSpec) -> float:
    if sym == "x":
        return float(spec.w_min)
    if sym == "o":
        return spec.w_min + (spec.amplitude - spec.w_min) * (position + 1) / length
    return spec.amplitude - (spec.amplitude - spec.w_min) * (position + 1) / length


def render_kymogram(text: str, spec: VibrationSpec, force: bool = False) -> Kymogram:
    """One column per symbol; bright pixels exactly on the two edge rows.

    The half-width ramps linearly from w_min to amplitude across an opening
    run, back down across a closing run, and holds w_min during contact.
    Edge rows are midline -/+ round(half-width) (round half up).  Seeded
    uniform noise in [0, noise] is added afterwards and clamped; the returned
    ground truth records the exact pre-noise rows.

    Unless `force` is set, the string must be accepted under the spec's
    constants and tolerance.
    """
    if not force:
        verdict = decide_vibration(text, spec.constants, spec.eps)
        if not verdict.accepted:
            raise ValueError(f"string rejected: {verdict.violation} (use force to render anyway)")
    if not text:
        raise ValueError("cannot render an empty string: a kymogram needs >= 1 column")
    for ch in text:
        if ch not in ALPHABET:
            raise ValueError(f"foreign symbol {ch!r}: alphabet is {{o, c, x}}")

    height, width = spec.height, len(text)
    midline = height // 2
    pixels = np.zeros((height, width), dtype=np.int64)
    edges: list[tuple[int, int]] = []
    col = 0
    for sym, length in run_lengths(text):
        for position in range(length):
            w = _half_width(sym, position, length, spec)
            r = int(np.floor(w + 0.5))
            upper, lower = midline - r, midline + r
            pixels[upper, col] = spec.edge_intensity
            pixels[lower, col] = spec.edge_intensity
            edges.append((upper, lower))
            col += 1

    if spec.noise > 0:
        rng = SplitMix64(derive(spec.seed, _NOISE_STREAM))
        flat = pixels.reshape(-1)
        for i in range(flat.shape[0]):
            flat[i] = min(255, flat[i] + rng.below(spec.noise + 1))
    return Kymogram(
        image=GrayImage(pixels=pixels, maxval=255),
        midline=midline,
        ground_truth=tuple(edges),
        source=text,
    )


# Calibration invented for this tool: the qualitative contracts are
# high.period < habitual.period, breathy.w_min > 0, falsetto.amplitude small.
_PRESETS: dict[str, VibrationSpec] = {
    "habitual": VibrationSpec(closed=6, opening=8, closing=8, amplitude=12, w_min=0),
    "high": VibrationSpec(closed=3, opening=4, closing=4, amplitude=8, w_min=0),
    "breathy": VibrationSpec(
        closed=2, opening=8, closing=8, constants=(4.0, 1.0, 1.0), amplitude=14, w_min=2
    ),
    "falsetto": VibrationSpec(
        closed=2, opening=5, closing=5, constants=(2.5, 1.0, 1.0), amplitude=5, w_min=1
    ),
}

PRESET_NAMES = tuple(_PRESETS)


def preset(name: str) -> VibrationSpec:
    """Named phonation calibration (habitual, high, breathy, falsetto)."""
    try:
        return _PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}: choose from {', '.join(_PRESETS)}") from None


def estimate_midline(img: GrayImage) -> int:
    """Row with the highest intensity variance across columns (ties: smaller row).

    On a kymogram the glottal midline fluctuates the most over time; a
    constant image has no such signal and raises NoSignalError.
    """
    variances = img.pixels.astype(np.float64).var(axis=1)
    if float(variances.max()) == 0.0:
        raise NoSignalError("image is constant per row: no midline signal")
    return int(variances.argmax())


def edge_band_constraints(
    height: int, width: int, midline: int, band_halfwidth: int
) -> tuple[HardConstraints, HardConstraints]:
    """Column-locked bands for the upper and lower edge snakes.

    Both bands include the midline row itself, so the snakes can meet there
    but never cross it.
    """
    upper = HardConstraints(
        band=(0, max(0, midline - band_halfwidth), width - 1, midline),
        column_locked=True,
    )
    lower = HardConstraints(
        band=(0, midline, width - 1, min(height - 1, midline + band_halfwidth)),
        column_locked=True,
    )
    return upper, lower


def temporal_snake_transform(
    img: GrayImage,
    params: SnakeParams,
    midline: int,
    band_halfwidth: int,
    field_mode: str = "intensity",
    max_iter: int = 50,
) -> tuple[DeformResult, DeformResult]:
    """Delineate the upper and lower glottal edges with column-locked snakes.

    Both snakes start on the midline row, one snaxel per column; the upper
    snake may move only within [midline - band_halfwidth, midline] and the
    lower within [midline, midline + band_halfwidth], so they cannot cross.
    `field_mode` selects the attraction field: "intensity" squares the stored
    pixel values (for edge-strength rasters like synthesized kymograms),
    "gradient" derives a squared spatial gradient (for plain imagery).
    """
    if not 0 <= midline < img.height:
        raise ValueError(f"midline row {midline} outside image height {img.height}")
    if band_halfwidth < 0:
        raise ValueError("band_halfwidth must be >= 0")
    if img.width < 3:
        raise ValueError("kymogram must have at least 3 columns to deform")
    if field_mode == "intensity":
        field = intensity_squared(img)
    elif field_mode == "gradient":
        field = gradient_magnitude_squared(img)
    else:
        raise ValueError(f"field_mode must be 'intensity' or 'gradient', got {field_mode!r}")

    start = Snake(snaxels=tuple((x, midline) for x in range(img.width)))
    upper_hc, lower_hc = edge_band_constraints(img.height, img.width, midline, band_halfwidth)
    upper = deform(start, field, params, upper_hc, max_iter)
    lower = deform(start, field, params, lower_hc, max_iter)
    return upper, lower


def remap_to_spatial(
    scanline_results: list[tuple[int, Snake, Snake]], t: int
) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """Per-frame left/right edge contours from a stack of kymogram snakes.

    Each input entry is (scanline_row, upper_snake, lower_snake) for one
    scan line; sampling every snake at column t inverts the kymographic
    slicing: the snaxel's row becomes the position along that scan line.
    Contours are returned in the given scanline order as (x, y) points with
    y = scanline_row.
    """
    if not scanline_results:
        raise ValueError("scanline_results must not be empty")
    width = len(scanline_results[0][1].snaxels)
    for row, upper, lower in scanline_results:
        if len(upper.snaxels) != width or len(lower.snaxels) != width:
            raise ValueError("all scanline snakes must share the same width")
    if not 0 <= t < width:
        raise ValueError(f"frame {t} out of range for width {width}")
    left = [(upper.snaxels[t][1], row) for row, upper, _ in scanline_results]
    right = [(lower.snaxels[t][1], row) for row, _, lower in scanline_results]
    return left, right
