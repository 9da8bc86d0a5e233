"""Discrete active contours deformed by exact dynamic programming.

A snake is an ordered chain of integer pixel positions ("snaxels").  Each
deformation step finds the exact global minimum of the energy

    sum_i  0.5 * (alpha_i * |s_i - s_{i-1}|^2 + beta_i * |bend_i|^2)
           - gamma_i * field(s_i)

over a per-snaxel candidate set (a 3x3 neighborhood, or a whole column band
for column-locked snakes).  The bending term needs two neighbors, so the DP
state is the position pair (s_{i-1}, s_i); hard constraints enter as infinite
transition cost.

Every site that evaluates energy terms (the scalar functions here, the DP
transition tables, and any brute-force oracle) must use the same expression
shape, `0.5 * (a * d2 + b * c2) - g * f`, accumulated strictly left to right:
convergence is detected by exact comparison, so the DP's accumulated optimum
and a recomputation of the returned snake's energy have to round identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .image import ScalarField

RIGIDITY_MODES = ("second-difference", "as-printed")


class InfeasibleConstraintsError(ValueError):
    """Every candidate configuration violates the hard constraints."""


@dataclass(frozen=True)
class Snake:
    """Ordered chain of (x, y) pixel positions; closed snakes wrap around."""

    snaxels: tuple[tuple[int, int], ...]
    closed: bool = False

    def __post_init__(self):
        if len(self.snaxels) < 1:
            raise ValueError("a snake needs at least one snaxel")
        normalized = []
        for p in self.snaxels:
            if len(p) != 2 or not all(isinstance(v, (int, np.integer)) for v in p):
                raise ValueError(f"snaxel {p!r} is not an integer (x, y) pair")
            normalized.append((int(p[0]), int(p[1])))
        object.__setattr__(self, "snaxels", tuple(normalized))


@dataclass(frozen=True)
class SnakeParams:
    """Energy weights; optional per-snaxel arrays override the global values.

    `rigidity` selects the bending formula: "second-difference" is the
    classical |s_{i+1} - 2*s_i + s_{i-1}|^2 under which straight uniform
    chains carry zero bending energy; "as-printed" reproduces the variant
    |s_{i+1} - s_i + s_{i-1}|^2 for comparison against sources that state it.
    """

    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    alpha_per: tuple[float, ...] | None = None
    beta_per: tuple[float, ...] | None = None
    gamma_per: tuple[float, ...] | None = None
    rigidity: str = "second-difference"

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
        for name in ("alpha_per", "beta_per", "gamma_per"):
            arr = getattr(self, name)
            if arr is None:
                continue
            for value in arr:
                if not (math.isfinite(value) and value >= 0):
                    raise ValueError(f"{name} entries must be finite and >= 0")
        if self.rigidity not in RIGIDITY_MODES:
            raise ValueError(f"rigidity must be one of {RIGIDITY_MODES}, got {self.rigidity!r}")

    def resolve(self, n: int) -> tuple[tuple[float, ...], tuple[float, ...], tuple[float, ...]]:
        """Per-snaxel (alphas, betas, gammas) for a chain of n snaxels."""
        out = []
        for name, per in (
            ("alpha", self.alpha_per),
            ("beta", self.beta_per),
            ("gamma", self.gamma_per),
        ):
            if per is None:
                out.append((float(getattr(self, name)),) * n)
            else:
                if len(per) != n:
                    raise ValueError(
                        f"{name}_per has length {len(per)}, expected {n} (one per snaxel)"
                    )
                out.append(tuple(float(v) for v in per))
        return out[0], out[1], out[2]


Rect = tuple[int, int, int, int]  # (x0, y0, x1, y1), inclusive


@dataclass(frozen=True)
class HardConstraints:
    """Feasibility conditions enforced as infinite DP cost.

    min_spacing/max_spacing bound the Euclidean distance between consecutive
    snaxels (including the wrap pair of a closed snake).  `band` confines each
    snaxel to a rectangle: one rect for all snaxels, or a sequence with one
    rect per snaxel.  `column_locked` pins snaxel i to column i*stride so only
    its row is free; its move window becomes the whole column band.
    """

    min_spacing: float | None = None
    max_spacing: float | None = None
    band: Rect | tuple[Rect, ...] | None = None
    column_locked: bool = False
    stride: int = 1

    def __post_init__(self):
        if self.min_spacing is not None and self.min_spacing < 0:
            raise ValueError("min_spacing must be >= 0")
        if self.max_spacing is not None and self.max_spacing < 0:
            raise ValueError("max_spacing must be >= 0")
        if (
            self.min_spacing is not None
            and self.max_spacing is not None
            and self.min_spacing > self.max_spacing
        ):
            raise ValueError("min_spacing must not exceed max_spacing")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if self.band is not None:
            rects = self.band if _is_rect_sequence(self.band) else (self.band,)
            for rect in rects:
                x0, y0, x1, y1 = rect
                if x0 > x1 or y0 > y1:
                    raise ValueError(f"band rect {rect!r} is empty")

    def band_for(self, i: int, n: int) -> Rect | None:
        if self.band is None:
            return None
        if _is_rect_sequence(self.band):
            if len(self.band) != n:
                raise ValueError(
                    f"band sequence has length {len(self.band)}, expected {n}"
                )
            return self.band[i]
        return self.band


def _is_rect_sequence(band) -> bool:
    return isinstance(band[0], (tuple, list))


@dataclass(frozen=True)
class DeformResult:
    """Outcome of iterated deformation; the trace is non-increasing."""

    snake: Snake
    energy_trace: tuple[float, ...]
    iterations: int
    converged: bool


# ---------------------------------------------------------------------------
# JSON shapes
# ---------------------------------------------------------------------------

def snake_to_json(s: Snake) -> dict:
    return {"closed": s.closed, "snaxels": [[x, y] for x, y in s.snaxels]}


def snake_from_json(obj: dict) -> Snake:
    if not isinstance(obj, dict) or "snaxels" not in obj:
        raise ValueError("snake JSON must be an object with a 'snaxels' list")
    snaxels = []
    for p in obj["snaxels"]:
        if len(p) != 2:
            raise ValueError(f"snaxel {p!r} is not an [x, y] pair")
        snaxels.append((int(p[0]), int(p[1])))
    return Snake(snaxels=tuple(snaxels), closed=bool(obj.get("closed", False)))


def deform_result_to_json(r: DeformResult) -> dict:
    return {
        "snake": snake_to_json(r.snake),
        "trace": list(r.energy_trace),
        "iterations": r.iterations,
        "converged": r.converged,
    }


# ---------------------------------------------------------------------------
# Energy terms (shared expression shape; see module docstring)
# ---------------------------------------------------------------------------

def _neighbor_sq(s: Snake, i: int) -> float:
    """|s_i - s_{i-1}|^2, or 0.0 where the open-chain neighbor is undefined."""
    n = len(s.snaxels)
    if not s.closed and i == 0:
        return 0.0
    x1, y1 = s.snaxels[i]
    x0, y0 = s.snaxels[(i - 1) % n]
    dx, dy = x1 - x0, y1 - y0
    return float(dx * dx + dy * dy)


def _bend_sq(s: Snake, i: int, rigidity: str) -> float:
    """Squared bending vector at i, or 0.0 where a neighbor is undefined."""
    n = len(s.snaxels)
    if not s.closed and (i == 0 or i == n - 1):
        return 0.0
    xp, yp = s.snaxels[(i - 1) % n]
    xc, yc = s.snaxels[i]
    xn, yn = s.snaxels[(i + 1) % n]
    if rigidity == "as-printed":
        vx, vy = xn - xc + xp, yn - yc + yp
    else:
        vx, vy = xn - 2 * xc + xp, yn - 2 * yc + yp
    return float(vx * vx + vy * vy)


def internal_energy(s: Snake, i: int, params: SnakeParams) -> float:
    """Continuity plus bending energy of snaxel i.

    0.5 * (alpha_i * |s_i - s_{i-1}|^2 + beta_i * |bend_i|^2), with terms
    whose neighbor is undefined (open-chain endpoints) dropped.
    """
    n = len(s.snaxels)
    if not 0 <= i < n:
        raise IndexError(f"snaxel index {i} out of range for {n} snaxels")
    alphas, betas, _ = params.resolve(n)
    return 0.5 * (alphas[i] * _neighbor_sq(s, i) + betas[i] * _bend_sq(s, i, params.rigidity))


def _check_inside(s: Snake, field: ScalarField) -> None:
    for x, y in s.snaxels:
        if not (0 <= x < field.width and 0 <= y < field.height):
            raise ValueError(
                f"snaxel ({x}, {y}) outside field {field.width}x{field.height}"
            )


def snake_energy(s: Snake, field: ScalarField, params: SnakeParams) -> float:
    """Total energy: sum over snaxels of internal plus data attraction terms."""
    _check_inside(s, field)
    n = len(s.snaxels)
    alphas, betas, gammas = params.resolve(n)
    values = field.values
    total = 0.0
    for i in range(n):
        x, y = s.snaxels[i]
        d2 = _neighbor_sq(s, i)
        c2 = _bend_sq(s, i, params.rigidity)
        term = 0.5 * (alphas[i] * d2 + betas[i] * c2) - gammas[i] * float(values[y, x])
        total = total + term
    return total


# ---------------------------------------------------------------------------
# Candidate windows
# ---------------------------------------------------------------------------

def _candidate_windows(
    s: Snake, field: ScalarField, hc: HardConstraints | None
) -> list[list[tuple[int, int]]]:
    """Per-snaxel move candidates, each list ordered by (y, x) ascending."""
    n = len(s.snaxels)
    width, height = field.width, field.height
    windows: list[list[tuple[int, int]]] = []
    for i, (x, y) in enumerate(s.snaxels):
        rect = hc.band_for(i, n) if hc is not None else None
        if rect is not None:
            rx0, ry0, rx1, ry1 = rect
            if not (0 <= rx0 and rx1 < width and 0 <= ry0 and ry1 < height):
                raise ValueError(f"band rect {rect!r} outside image {width}x{height}")
        if hc is not None and hc.column_locked:
            if x != i * hc.stride:
                raise ValueError(
                    f"column-locked snaxel {i} must sit at column {i * hc.stride}, got {x}"
                )
            y_lo, y_hi = 0, height - 1
            cands = []
            if rect is not None:
                rx0, ry0, rx1, ry1 = rect
                y_lo, y_hi = max(y_lo, ry0), min(y_hi, ry1)
                if not rx0 <= x <= rx1:
                    y_hi = y_lo - 1  # column outside its band: empty window
            cands = [(x, yy) for yy in range(y_lo, y_hi + 1)]
        else:
            cands = []
            for yy in range(max(0, y - 1), min(height - 1, y + 1) + 1):
                for xx in range(max(0, x - 1), min(width - 1, x + 1) + 1):
                    if rect is not None:
                        rx0, ry0, rx1, ry1 = rect
                        if not (rx0 <= xx <= rx1 and ry0 <= yy <= ry1):
                            continue
                    cands.append((xx, yy))
        if not cands:
            raise InfeasibleConstraintsError(f"snaxel {i}: empty candidate window")
        windows.append(cands)
    return windows


def _window_arrays(windows):
    xs = [np.array([p[0] for p in w], dtype=np.int64) for w in windows]
    ys = [np.array([p[1] for p in w], dtype=np.int64) for w in windows]
    return xs, ys


def _pair_sq(xs0, ys0, xs1, ys1) -> np.ndarray:
    """Squared distances between every candidate pair of adjacent levels."""
    dx = xs1[None, :] - xs0[:, None]
    dy = ys1[None, :] - ys0[:, None]
    return (dx * dx + dy * dy).astype(np.float64)


def _triple_sq(xs0, ys0, xs1, ys1, xs2, ys2, rigidity: str) -> np.ndarray:
    """Squared bending vectors over every candidate triple (prev, cur, next)."""
    if rigidity == "as-printed":
        vx = xs2[None, None, :] - xs1[None, :, None] + xs0[:, None, None]
        vy = ys2[None, None, :] - ys1[None, :, None] + ys0[:, None, None]
    else:
        vx = xs2[None, None, :] - 2 * xs1[None, :, None] + xs0[:, None, None]
        vy = ys2[None, None, :] - 2 * ys1[None, :, None] + ys0[:, None, None]
    return (vx * vx + vy * vy).astype(np.float64)


def _spacing_ok(d2: np.ndarray, hc: HardConstraints | None) -> np.ndarray:
    feasible = np.ones(d2.shape, dtype=bool)
    if hc is not None:
        if hc.min_spacing is not None:
            feasible &= d2 >= hc.min_spacing * hc.min_spacing
        if hc.max_spacing is not None:
            feasible &= d2 <= hc.max_spacing * hc.max_spacing
    return feasible


def violates_constraints(s: Snake, hc: HardConstraints | None) -> str | None:
    """Description of the first hard-constraint violation, or None."""
    if hc is None:
        return None
    n = len(s.snaxels)
    for i, (x, y) in enumerate(s.snaxels):
        rect = hc.band_for(i, n)
        if rect is not None:
            x0, y0, x1, y1 = rect
            if not (x0 <= x <= x1 and y0 <= y <= y1):
                return f"snaxel {i} at ({x}, {y}) outside band {rect!r}"
        if hc.column_locked and x != i * hc.stride:
            return f"snaxel {i} at column {x}, expected {i * hc.stride}"
    pairs = range(n) if s.closed else range(1, n)
    for i in pairs:
        x1, y1 = s.snaxels[i]
        x0, y0 = s.snaxels[(i - 1) % n]
        dist = math.dist((x0, y0), (x1, y1))
        if hc.min_spacing is not None and dist < hc.min_spacing:
            return f"snaxels {(i - 1) % n},{i} spacing {dist:.3f} < min {hc.min_spacing}"
        if hc.max_spacing is not None and dist > hc.max_spacing:
            return f"snaxels {(i - 1) % n},{i} spacing {dist:.3f} > max {hc.max_spacing}"
    return None


# ---------------------------------------------------------------------------
# Dynamic programming
# ---------------------------------------------------------------------------

def _current_indices(s: Snake, windows) -> list[int | None]:
    """Index of each snaxel's current position within its own window."""
    out: list[int | None] = []
    for (pos, window) in zip(s.snaxels, windows):
        try:
            out.append(window.index(pos))
        except ValueError:
            out.append(None)
    return out


def _transition(best, t_table, cur_prev):
    """One DP level: minimize over the predecessor axis with tie preferences.

    Ties prefer the snaxel's current position, then the smallest (y, x)
    candidate (windows are ordered by (y, x), so argmin's first-hit rule
    supplies the second key).
    """
    cand = best[:, :, None] + t_table
    new_best = cand.min(axis=0)
    back = cand.argmin(axis=0)
    if cur_prev is not None:
        back = np.where(cand[cur_prev] == new_best, cur_prev, back)
    return new_best, back


def _select_final(total, cur_a, cur_b, xs_a, ys_a, xs_b, ys_b) -> tuple[int, int]:
    best = total.min()
    if not np.isfinite(best):
        raise InfeasibleConstraintsError("no feasible snake under the hard constraints")
    ties = np.argwhere(total == best)

    def key(ab):
        a, b = int(ab[0]), int(ab[1])
        return (
            0 if a == cur_a else 1,
            int(ys_a[a]),
            int(xs_a[a]),
            0 if b == cur_b else 1,
            int(ys_b[b]),
            int(xs_b[b]),
        )

    a, b = min(map(tuple, ties), key=key)
    return int(a), int(b)


def _open_chain_dp(s, windows, field, alphas, betas, gammas, rigidity, hc):
    n = len(windows)
    xs, ys = _window_arrays(windows)
    values = field.values
    fvecs = [values[ys[i], xs[i]] for i in range(n)]
    cur = _current_indices(s, windows)

    # level 1 state (s0, s1): charges t(0), which has no neighbor terms
    zeros0 = np.zeros(len(windows[0]))
    t0 = 0.5 * (alphas[0] * zeros0 + betas[0] * zeros0) - gammas[0] * fvecs[0]
    best = np.broadcast_to(t0[:, None], (len(windows[0]), len(windows[1]))).copy()
    d2_01 = _pair_sq(xs[0], ys[0], xs[1], ys[1])
    best[~_spacing_ok(d2_01, hc)] = np.inf

    backs = []
    d2_prev = d2_01
    for i in range(1, n - 1):
        d2_next = _pair_sq(xs[i], ys[i], xs[i + 1], ys[i + 1])
        c2 = _triple_sq(xs[i - 1], ys[i - 1], xs[i], ys[i], xs[i + 1], ys[i + 1], rigidity)
        t = 0.5 * (alphas[i] * d2_prev[:, :, None] + betas[i] * c2) - (
            gammas[i] * fvecs[i]
        )[None, :, None]
        t[:, ~_spacing_ok(d2_next, hc)] = np.inf
        best, back = _transition(best, t, cur[i - 1])
        backs.append(back)
        d2_prev = d2_next

    # final state (s_{n-2}, s_{n-1}): charge t(n-1), which has no bending term
    zeros_last = np.zeros(d2_prev.shape)
    t_last = 0.5 * (alphas[n - 1] * d2_prev + betas[n - 1] * zeros_last) - (
        gammas[n - 1] * fvecs[n - 1]
    )[None, :]
    total = best + t_last

    a, b = _select_final(total, cur[n - 2], cur[n - 1], xs[n - 2], ys[n - 2], xs[n - 1], ys[n - 1])
    idx = [0] * n
    idx[n - 2], idx[n - 1] = a, b
    for i in range(n - 3, -1, -1):
        idx[i] = int(backs[i][idx[i + 1], idx[i + 2]])
    return tuple((int(xs[i][idx[i]]), int(ys[i][idx[i]])) for i in range(n))


def _closed_chain_dp(s, windows, field, alphas, betas, gammas, rigidity, hc):
    """Exact closed-chain optimum by conditioning on the first two positions.

    For each fixed (s0, s1) an open-style DP covers levels 2..n-1; the wrap
    terms t(n-1) and t(0) are added at finalization.  Terms therefore
    accumulate in the rotated order t(1)..t(n-1), t(0); with weights whose
    products are exactly representable this equals the natural-order sum, and
    otherwise may differ from snake_energy by rounding ulps.
    """
    n = len(windows)
    xs, ys = _window_arrays(windows)
    values = field.values
    fvecs = [values[ys[i], xs[i]] for i in range(n)]
    cur = _current_indices(s, windows)

    best_key = None
    best_path = None
    for ia in range(len(windows[0])):
        p0 = (int(xs[0][ia]), int(ys[0][ia]))
        f0 = float(fvecs[0][ia])
        for ib in range(len(windows[1])):
            p1 = (int(xs[1][ib]), int(ys[1][ib]))
            d01 = float(
                (p1[0] - p0[0]) * (p1[0] - p0[0]) + (p1[1] - p0[1]) * (p1[1] - p0[1])
            )
            if not bool(_spacing_ok(np.array([[d01]]), hc)[0, 0]):
                continue
            sub = [[p0], [p1]] + windows[2:]
            sxs, sys_ = _window_arrays(sub)
            sf = [values[sys_[i], sxs[i]] for i in range(n)]

            # level 2 state (s1, s2): charges t(1)
            c2_1 = _triple_sq(sxs[0], sys_[0], sxs[1], sys_[1], sxs[2], sys_[2], rigidity)[0]
            t1 = 0.5 * (alphas[1] * d01 + betas[1] * c2_1) - gammas[1] * sf[1][:, None]
            d2_12 = _pair_sq(sxs[1], sys_[1], sxs[2], sys_[2])
            t1[~_spacing_ok(d2_12, hc)] = np.inf
            best = t1
            backs = []
            d2_prev = d2_12
            for i in range(2, n - 1):
                d2_next = _pair_sq(sxs[i], sys_[i], sxs[i + 1], sys_[i + 1])
                c2 = _triple_sq(
                    sxs[i - 1], sys_[i - 1], sxs[i], sys_[i], sxs[i + 1], sys_[i + 1], rigidity
                )
                t = 0.5 * (alphas[i] * d2_prev[:, :, None] + betas[i] * c2) - (
                    gammas[i] * sf[i]
                )[None, :, None]
                t[:, ~_spacing_ok(d2_next, hc)] = np.inf
                sub_cur = cur[i - 1] if i >= 3 else (0 if cur[1] == ib else None)
                best, back = _transition(best, t, sub_cur)
                backs.append(back)
                d2_prev = d2_next

            # wrap terms: t(n-1) uses next = s0, t(0) uses prev = s_{n-1}
            c2_last = _triple_sq(
                sxs[n - 2], sys_[n - 2], sxs[n - 1], sys_[n - 1],
                np.array([p0[0]]), np.array([p0[1]]), rigidity,
            )[:, :, 0]
            t_last = 0.5 * (alphas[n - 1] * d2_prev + betas[n - 1] * c2_last) - (
                gammas[n - 1] * sf[n - 1]
            )[None, :]
            d2_wrap = _pair_sq(sxs[n - 1], sys_[n - 1], np.array([p0[0]]), np.array([p0[1]]))[:, 0]
            c2_0 = _triple_sq(
                sxs[n - 1], sys_[n - 1], np.array([p0[0]]), np.array([p0[1]]),
                np.array([p1[0]]), np.array([p1[1]]), rigidity,
            )[:, 0, 0]
            t_0 = 0.5 * (alphas[0] * d2_wrap + betas[0] * c2_0) - gammas[0] * f0
            t_0[~_spacing_ok(d2_wrap, hc)] = np.inf
            total = (best + t_last) + t_0[None, :]

            try:
                a, b = _select_final(
                    total,
                    cur[n - 2] if n > 3 else (0 if cur[1] == ib else None),
                    cur[n - 1],
                    sxs[n - 2], sys_[n - 2], sxs[n - 1], sys_[n - 1],
                )
            except InfeasibleConstraintsError:
                continue
            idx = [0] * n
            idx[n - 2], idx[n - 1] = a, b
            # transition i (= 2..n-2) stored at backs[i-2] maps states at
            # (level i, level i+1) back to the level i-1 index
            for j in range(n - 3, 1, -1):
                idx[j] = int(backs[j - 1][idx[j + 1], idx[j + 2]])
            path = (p0, p1) + tuple(
                (int(sxs[i][idx[i]]), int(sys_[i][idx[i]])) for i in range(2, n)
            )
            cost = float(total[a, b])
            key = (cost,) + tuple(
                (0 if path[i] == s.snaxels[i] else 1, path[i][1], path[i][0])
                for i in range(n)
            )
            if best_key is None or key < best_key:
                best_key = key
                best_path = path
    if best_path is None:
        raise InfeasibleConstraintsError("no feasible snake under the hard constraints")
    return best_path


def dp_deform_step(
    s: Snake,
    field: ScalarField,
    params: SnakeParams,
    hc: HardConstraints | None = None,
) -> Snake:
    """One deformation step: the exact energy minimum over the candidate set.

    Guaranteed global optimum over all combinations of per-snaxel candidates;
    ties prefer the incumbent position (so an optimal snake is a fixed point)
    and then the lexicographically smallest (y, x).
    """
    n = len(s.snaxels)
    if n < 3:
        raise ValueError("deformation requires at least 3 snaxels")
    _check_inside(s, field)
    alphas, betas, gammas = params.resolve(n)
    windows = _candidate_windows(s, field, hc)
    if s.closed:
        snaxels = _closed_chain_dp(s, windows, field, alphas, betas, gammas, params.rigidity, hc)
    else:
        snaxels = _open_chain_dp(s, windows, field, alphas, betas, gammas, params.rigidity, hc)
    return Snake(snaxels=snaxels, closed=s.closed)


def deform(
    s0: Snake,
    field: ScalarField,
    params: SnakeParams,
    hc: HardConstraints | None = None,
    max_iter: int = 100,
) -> DeformResult:
    """Iterate dp_deform_step until the snake stops changing or max_iter.

    The energy trace records the total energy after each step; because every
    step returns a global candidate-set optimum and the incumbent is always a
    candidate, the trace is non-increasing.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    current = s0
    trace: list[float] = []
    converged = False
    for _ in range(max_iter):
        stepped = dp_deform_step(current, field, params, hc)
        trace.append(snake_energy(stepped, field, params))
        if stepped == current:
            converged = True
            break
        current = stepped
    return DeformResult(
        snake=current,
        energy_trace=tuple(trace),
        iterations=len(trace),
        converged=converged,
    )
