"""Release gates.

Each test is one ship/no-ship property of the tool, checked end to end at
a stated tolerance and wall-clock budget. Run with -v for one verdict line
per gate.
"""

import itertools
import time

import numpy as np

from kymosnake.automata import (
    ACCEPT,
    FUEL_EXHAUSTED,
    REJECT,
    Dfa,
    DfaStepMachine,
    StepMachine,
    build_substring_dfa,
    dfa_run,
    dovetail_decide,
)
from kymosnake.bijections import (
    pair,
    string_rank,
    string_unrank,
    triple,
    unpair,
    untriple,
)
from kymosnake.image import ScalarField, save_pgm
from kymosnake.kymo import (
    VibrationSpec,
    decide_vibration,
    generate_vibration_string,
    preset,
    render_kymogram,
    temporal_snake_transform,
)
from kymosnake.rng import SplitMix64
from kymosnake.snake import (
    HardConstraints,
    Snake,
    SnakeParams,
    deform,
    dp_deform_step,
    snake_energy,
)

import dataclasses


def _random_field(rng: SplitMix64, height: int, width: int, scale: float = 80.0) -> ScalarField:
    values = np.empty((height, width), dtype=np.float64)
    for y in range(height):
        for x in range(width):
            values[y, x] = scale * rng.unit()
    return ScalarField(values=values)


# ---------------------------------------------------------------------------
# pairing function
# ---------------------------------------------------------------------------

def test_pairing_table_reproduces_all_fifteen_entries():
    started = time.monotonic()
    table = {
        (0, 0): 0,
        (1, 0): 1, (0, 1): 2,
        (2, 0): 3, (1, 1): 4, (0, 2): 5,
        (3, 0): 6, (2, 1): 7, (1, 2): 8, (0, 3): 9,
        (4, 0): 10, (3, 1): 11, (2, 2): 12, (1, 3): 13, (0, 4): 14,
    }
    assert len(table) == 15
    for (a, b), expected in table.items():
        assert pair(a, b) == expected, (a, b)
    assert time.monotonic() - started < 1.0


def test_bijection_round_trips_have_zero_failures():
    started = time.monotonic()
    failures = 0

    for a in range(501):
        for b in range(501):
            if unpair(pair(a, b)) != (a, b):
                failures += 1
    for n in range(250_001):
        if pair(*unpair(n)) != n:
            failures += 1

    for a in range(65):
        for b in range(65):
            for c in range(65):
                if untriple(triple(a, b, c)) != (a, b, c):
                    failures += 1

    ranks = []
    for length in range(13):
        for bits in itertools.product("01", repeat=length):
            text = "".join(bits)
            rank = string_rank(text, "01")
            ranks.append(rank)
            if string_unrank(rank, "01") != text:
                failures += 1
    assert sorted(ranks) == list(range(2 ** 13 - 1))

    assert failures == 0
    assert time.monotonic() - started < 10.0


# ---------------------------------------------------------------------------
# substring automaton
# ---------------------------------------------------------------------------

def test_substring_dfa_matches_naive_search_oracle():
    started = time.monotonic()
    alphabet = "CoRx"
    d = build_substring_dfa("CoRR", alphabet)

    assert dfa_run(d, "CoCoRR"), "restart after partial match must be tracked"

    for length in range(7):
        for symbols in itertools.product(alphabet, repeat=length):
            text = "".join(symbols)
            assert dfa_run(d, text) == ("CoRR" in text), text

    rng = SplitMix64(20260816)
    for _ in range(10_000):
        length = rng.below(65)
        text = "".join(alphabet[rng.below(4)] for _ in range(length))
        assert dfa_run(d, text) == ("CoRR" in text), text

    assert time.monotonic() - started < 30.0


# ---------------------------------------------------------------------------
# dynamic-programming deformation
# ---------------------------------------------------------------------------

def _exhaustive_band_minimum(field, band_y0, params):
    """Minimum energy over all 5^8 column-locked paths in a height-5 band.

    Energies are accumulated with the same per-snaxel expression and the
    same left-to-right addition order as snake_energy, so the minimum is
    comparable to it without tolerance.
    """
    n = 5 ** 8
    digits = (np.arange(n, dtype=np.int64)[:, None] // 5 ** np.arange(8, dtype=np.int64)) % 5

    d2 = np.zeros((n, 8), dtype=np.float64)
    dy = digits[:, 1:] - digits[:, :-1]
    d2[:, 1:] = (1 + dy * dy).astype(np.float64)

    c2 = np.zeros((n, 8), dtype=np.float64)
    vy = digits[:, 2:] - 2 * digits[:, 1:-1] + digits[:, :-2]
    c2[:, 1:-1] = (vy * vy).astype(np.float64)

    alphas, betas, gammas = params.resolve(8)
    total = np.zeros(n, dtype=np.float64)
    for i in range(8):
        f = field.values[band_y0 + digits[:, i], i]
        term = 0.5 * (alphas[i] * d2[:, i] + betas[i] * c2[:, i]) - gammas[i] * f
        total = total + term
    return float(total.min())


def test_dp_step_is_bit_exact_global_minimum():
    started = time.monotonic()
    for seed in range(100):
        rng = SplitMix64(seed)
        field = _random_field(rng, height=9, width=8)
        band_y0 = rng.below(5)
        params = SnakeParams(
            alpha=0.25 + 2.0 * rng.unit(),
            beta=0.1 + 1.5 * rng.unit(),
            gamma=0.5 + 2.0 * rng.unit(),
        )
        start = Snake(snaxels=tuple((x, rng.below(9)) for x in range(8)))
        hc = HardConstraints(band=(0, band_y0, 7, band_y0 + 4), column_locked=True)

        stepped = dp_deform_step(start, field, params, hc)
        got = snake_energy(stepped, field, params)
        want = _exhaustive_band_minimum(field, band_y0, params)
        assert got == want, f"seed {seed}: {got!r} != {want!r}"
    assert time.monotonic() - started < 60.0


def test_deform_energy_traces_are_monotone():
    violations = 0
    for seed in range(25):
        rng = SplitMix64(1000 + seed)
        field = _random_field(rng, height=12, width=10)
        start = Snake(snaxels=tuple((x, rng.below(12)) for x in range(10)))
        hc = HardConstraints(band=(0, 0, 9, 11), column_locked=True)
        result = deform(start, field, SnakeParams(gamma=1.0 + rng.unit()), hc, max_iter=15)
        trace = result.energy_trace
        violations += sum(1 for a, b in zip(trace, trace[1:]) if b > a)

    for seed in range(25):
        rng = SplitMix64(2000 + seed)
        field = _random_field(rng, height=11, width=11)
        n = 5 + rng.below(4)
        closed = rng.below(2) == 1
        snaxels = tuple(
            (1 + rng.below(field.width - 2), 1 + rng.below(field.height - 2))
            for _ in range(n)
        )
        result = deform(
            Snake(snaxels=snaxels, closed=closed),
            field,
            SnakeParams(alpha=0.5 + rng.unit(), beta=rng.unit(), gamma=1.0),
            max_iter=12,
        )
        trace = result.energy_trace
        violations += sum(1 for a, b in zip(trace, trace[1:]) if b > a)

    assert violations == 0


def test_scaled_params_yield_identical_paths():
    for seed in range(50):
        rng = SplitMix64(3000 + seed)
        field = _random_field(rng, height=10, width=8)
        start = Snake(snaxels=tuple((x, rng.below(10)) for x in range(8)))
        hc = HardConstraints(band=(0, 0, 7, 9), column_locked=True)
        alpha = 0.2 + 1.8 * rng.unit()
        beta = 0.1 + 1.2 * rng.unit()
        gamma = 0.5 + 1.5 * rng.unit()

        paths = []
        for t in (0.01, 1.0, 100.0):
            params = SnakeParams(alpha=t * alpha, beta=t * beta, gamma=t * gamma)
            result = deform(start, field, params, hc, max_iter=25)
            paths.append(result.snake.snaxels)
        assert paths[0] == paths[1] == paths[2], seed


# ---------------------------------------------------------------------------
# vibration language
# ---------------------------------------------------------------------------

def test_generator_decider_closure():
    started = time.monotonic()

    rng = SplitMix64(42)
    for case in range(200):
        jitter = rng.below(3)
        spec = VibrationSpec(
            closed=4 + rng.below(6),
            opening=4 + rng.below(6),
            closing=4 + rng.below(6),
            jitter=jitter,
            eps=0.7,
            periods=1 + rng.below(4),
            seed=rng.next_u64(),
        )
        text = generate_vibration_string(spec)
        verdict = decide_vibration(text, spec.constants, spec.eps)
        assert verdict.accepted, (case, text, verdict.violation)

    for case in range(200):
        p = 2 + rng.below(7)
        spec = VibrationSpec(closed=p, opening=p, closing=p, jitter=0, eps=0.0,
                             periods=1 + rng.below(3))
        text = generate_vibration_string(spec)
        cut = rng.below(len(text))
        mutated = text[:cut] + text[cut + 1:]
        verdict = decide_vibration(mutated, spec.constants, 0.0)
        assert not verdict.accepted, (case, p, cut)

    assert time.monotonic() - started < 10.0


# ---------------------------------------------------------------------------
# end-to-end edge recovery
# ---------------------------------------------------------------------------

def test_end_to_end_edge_recovery():
    started = time.monotonic()
    base = dataclasses.replace(preset("habitual"), periods=8, seed=2026)
    text = generate_vibration_string(base)
    assert len(text) == base.period * 8

    clean = render_kymogram(text, base)
    band = base.amplitude + 2
    upper, lower = temporal_snake_transform(
        clean.image, SnakeParams(), clean.midline, band
    )
    worst = 0
    for col, (u, l) in enumerate(clean.ground_truth):
        worst = max(worst, abs(upper.snake.snaxels[col][1] - u),
                    abs(lower.snake.snaxels[col][1] - l))
    assert worst == 0

    noisy_spec = dataclasses.replace(base, noise=base.edge_intensity // 10, seed=7)
    noisy = render_kymogram(text, noisy_spec)
    upper_n, lower_n = temporal_snake_transform(
        noisy.image, SnakeParams(), noisy.midline, band
    )
    errors = []
    for col, (u, l) in enumerate(noisy.ground_truth):
        errors.append(abs(upper_n.snake.snaxels[col][1] - u))
        errors.append(abs(lower_n.snake.snaxels[col][1] - l))
    mae = sum(errors) / len(errors)
    assert mae <= 1.0, mae

    assert time.monotonic() - started < 30.0


def test_renders_are_periodic_and_reproducible():
    spec = dataclasses.replace(preset("habitual"), periods=4, seed=11)
    text = generate_vibration_string(spec)
    kymo = render_kymogram(text, spec)
    p = spec.period
    pixels = kymo.image.pixels
    assert np.array_equal(pixels[:, : pixels.shape[1] - p], pixels[:, p:])

    again = render_kymogram(generate_vibration_string(spec), spec)
    assert save_pgm(kymo.image) == save_pgm(again.image)

    noisy_spec = dataclasses.replace(spec, noise=25)
    one = save_pgm(render_kymogram(text, noisy_spec).image)
    two = save_pgm(render_kymogram(text, noisy_spec).image)
    assert one == two


# ---------------------------------------------------------------------------
# dovetailed recognizers
# ---------------------------------------------------------------------------

class _Loop(StepMachine):
    """Runs forever: stands in for a recognizer that never answers."""

    def step(self) -> str:
        return self.status


def test_dovetail_decides_language_and_complement():
    d = build_substring_dfa("ab", "ab")
    complement = Dfa(
        states=d.states,
        alphabet=d.alphabet,
        transitions=d.transitions,
        start=d.start,
        accepting=frozenset(range(d.states)) - d.accepting,
    )

    rng = SplitMix64(99)
    for _ in range(100):
        text = "".join("ab"[rng.below(2)] for _ in range(rng.below(21)))
        verdict = dovetail_decide(DfaStepMachine(d, text),
                                  DfaStepMachine(complement, text))
        expected = ACCEPT if "ab" in text else REJECT
        assert verdict == expected, text

    assert dovetail_decide(_Loop(), _Loop(), fuel=10_000) == FUEL_EXHAUSTED
