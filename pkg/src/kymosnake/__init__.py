"""Kymographic image synthesis and snake-based edge delineation.

The package bundles four tool families that feed each other: computable
bijections (pairing functions, string and rational ranking), substring-search
DFAs with a step-machine harness for dovetailed decision, a vibration-pattern
language with a kymogram renderer, and a dynamic-programming active contour
that recovers the rendered edges.
"""

from .automata import (
    ACCEPT,
    FUEL_EXHAUSTED,
    REJECT,
    RUNNING,
    Dfa,
    DfaDecodeError,
    DfaStepMachine,
    InputSymbolError,
    StepMachine,
    build_substring_dfa,
    decode_dfa,
    dfa_final_state,
    dfa_run,
    dovetail_decide,
    encode_dfa,
    simulate_encoded_dfa,
)
from .bijections import (
    ReducedFraction,
    pair,
    rational_rank,
    rational_unrank,
    rationals,
    string_rank,
    string_unrank,
    triple,
    unpair,
    untriple,
)
from .image import (
    GrayImage,
    PgmError,
    ScalarField,
    external_energy,
    gradient_magnitude_squared,
    intensity_squared,
    load_pgm,
    save_pgm,
)
from .kymo import (
    PRESET_NAMES,
    Kymogram,
    NoSignalError,
    UnsatisfiableSpecError,
    VibrationSpec,
    VibrationVerdict,
    decide_vibration,
    edge_band_constraints,
    estimate_midline,
    generate_vibration_string,
    preset,
    remap_to_spatial,
    render_kymogram,
    run_lengths,
    temporal_snake_transform,
)
from .rng import SplitMix64, derive
from .snake import (
    DeformResult,
    HardConstraints,
    InfeasibleConstraintsError,
    Snake,
    SnakeParams,
    deform,
    deform_result_to_json,
    dp_deform_step,
    internal_energy,
    snake_energy,
    snake_from_json,
    snake_to_json,
    violates_constraints,
)

__all__ = [name for name in dir() if not name.startswith("_")]
