"""Command-line entry point: one binary, one subcommand per tool.

Exit codes: 0 on success (a reject verdict is a successful computation),
1 on a domain error (bad values, unreadable files), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .automata import build_substring_dfa, dfa_final_state, encode_dfa
from .bijections import (
    ReducedFraction,
    pair,
    rational_rank,
    rational_unrank,
    string_rank,
    string_unrank,
    triple,
    unpair,
    untriple,
)
from .image import gradient_magnitude_squared, intensity_squared, load_pgm, save_pgm
from .kymo import (
    PRESET_NAMES,
    VibrationSpec,
    decide_vibration,
    estimate_midline,
    generate_vibration_string,
    preset,
    render_kymogram,
    temporal_snake_transform,
)
from .snake import (
    HardConstraints,
    SnakeParams,
    deform,
    deform_result_to_json,
    snake_from_json,
)


def _parse_constants(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated numbers, e.g. 1,1,1")
    try:
        c = tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not numeric: {text!r}") from None
    return c


def _parse_rect(text: str) -> tuple[int, int, int, int]:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("expected x0,y0,x1,y1")
    try:
        rect = tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not integers: {text!r}") from None
    return rect


def _natural(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def _parse_fraction(text: str) -> tuple[int, int]:
    parts = text.split("/")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected N/D, e.g. 3/7")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"not integers: {text!r}") from None


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------

_SPEC_FIELDS = (
    "closed", "opening", "closing", "eps", "periods", "amplitude",
    "w_min", "jitter", "noise", "seed", "height", "edge_intensity",
)


def _add_synth(sub) -> None:
    p = sub.add_parser("synth", help="generate a vibration string and render its kymogram")
    p.add_argument("--preset", choices=PRESET_NAMES, help="start from a named calibration")
    p.add_argument("--closed", type=int, help="base closed-phase run length (> 1)")
    p.add_argument("--opening", type=int, help="base opening-phase run length (> 1)")
    p.add_argument("--closing", type=int, help="base closing-phase run length (> 1)")
    p.add_argument("--c", type=_parse_constants, metavar="C1,C2,C3",
                   help="proportionality constants for the closed/opening/closing phases")
    p.add_argument("--eps", type=float, help="relative tolerance on weighted run lengths")
    p.add_argument("--periods", type=int, help="number of cycles (default 1)")
    p.add_argument("--amplitude", type=int, help="maximum glottal half-width in pixels")
    p.add_argument("--w-min", dest="w_min", type=int, help="residual half-width during contact")
    p.add_argument("--jitter", type=int, help="max per-block run-length perturbation")
    p.add_argument("--noise", type=int, help="additive intensity noise amplitude")
    p.add_argument("--height", type=int, help="image height in pixels")
    p.add_argument("--edge-intensity", dest="edge_intensity", type=int,
                   help="brightness of the edge rows (1..255)")
    p.add_argument("--seed", type=int, required=True,
                   help="PRNG seed; required, there is no implicit entropy")
    p.add_argument("-o", "--output", required=True, help="PGM output path")
    p.add_argument("--emit-string", metavar="PATH", help="also write the vibration string")
    p.set_defaults(handler=_run_synth)


def _spec_from_args(args: argparse.Namespace) -> VibrationSpec:
    overrides = {name: getattr(args, name) for name in _SPEC_FIELDS
                 if getattr(args, name) is not None}
    if args.c is not None:
        overrides["constants"] = args.c
    if args.preset is not None:
        return replace(preset(args.preset), **overrides)
    missing = [name for name in ("closed", "opening", "closing") if name not in overrides]
    if missing:
        raise ValueError(
            "need --preset or explicit run lengths (missing: "
            + ", ".join("--" + name for name in missing) + ")"
        )
    return VibrationSpec(**overrides)


def _run_synth(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    text = generate_vibration_string(spec)
    kymo = render_kymogram(text, spec)
    out = Path(args.output)
    out.write_bytes(save_pgm(kymo.image))
    print(f"wrote {out} ({kymo.image.width}x{kymo.image.height})")
    sidecar = out.with_suffix(".json")
    sidecar.write_text(json.dumps(kymo.ground_truth_json()) + "\n")
    print(f"wrote {sidecar}")
    if args.emit_string:
        Path(args.emit_string).write_text(text + "\n")
        print(f"wrote {args.emit_string} ({len(text)} symbols)")
    return 0


# ---------------------------------------------------------------------------
# decide
# ---------------------------------------------------------------------------

def _add_decide(sub) -> None:
    p = sub.add_parser("decide", help="test a vibration string for membership")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--string", metavar="PATH", help="file holding the string")
    src.add_argument("--text", help="literal string")
    p.add_argument("--c", type=_parse_constants, default=(1.0, 1.0, 1.0), metavar="C1,C2,C3",
                   help="proportionality constants (default 1,1,1)")
    p.add_argument("--eps", type=float, default=0.2,
                   help="relative tolerance (default 0.2)")
    p.set_defaults(handler=_run_decide)


def _run_decide(args: argparse.Namespace) -> int:
    if args.string is not None:
        text = Path(args.string).read_text()
        if text.endswith("\n"):
            text = text[:-1]
    else:
        text = args.text
    verdict = decide_vibration(text, args.c, args.eps)
    print("accept" if verdict.accepted else "reject")
    if verdict.violation is not None:
        print(verdict.violation)
    return 0


# ---------------------------------------------------------------------------
# deform
# ---------------------------------------------------------------------------

def _add_deform(sub) -> None:
    p = sub.add_parser("deform", help="fit snakes to a PGM image")
    p.add_argument("--image", required=True, help="PGM input path")
    p.add_argument("--alpha", type=float, default=1.0, help="tension weight (default 1)")
    p.add_argument("--beta", type=float, default=1.0, help="rigidity weight (default 1)")
    p.add_argument("--gamma", type=float, default=1.0, help="attraction weight (default 1)")
    p.add_argument("--rigidity", choices=("second-difference", "as-printed"),
                   default="second-difference")
    p.add_argument("--field", choices=("intensity", "gradient"), default="intensity",
                   help="attraction field: intensity suits edge-strength rasters "
                        "such as synthesized kymograms (default)")
    p.add_argument("--init-snake", metavar="PATH",
                   help="snake JSON to deform freely (otherwise edge-pair mode)")
    p.add_argument("--midline", type=int,
                   help="edge-pair mode: midline row (default: estimated)")
    p.add_argument("--band-halfwidth", type=int,
                   help="edge-pair mode: how far each edge snake may leave the midline")
    p.add_argument("--min-spacing", type=float, help="free mode: minimum snaxel spacing")
    p.add_argument("--max-spacing", type=float, help="free mode: maximum snaxel spacing")
    p.add_argument("--band", type=_parse_rect, metavar="X0,Y0,X1,Y1",
                   help="free mode: confine snaxels to a rectangle")
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("-o", "--output", help="write result JSON here instead of stdout")
    p.set_defaults(handler=_run_deform)


def _run_deform(args: argparse.Namespace) -> int:
    img = load_pgm(Path(args.image).read_bytes())
    params = SnakeParams(alpha=args.alpha, beta=args.beta, gamma=args.gamma,
                         rigidity=args.rigidity)
    if args.init_snake is not None:
        snake = snake_from_json(json.loads(Path(args.init_snake).read_text()))
        field = intensity_squared(img) if args.field == "intensity" else gradient_magnitude_squared(img)
        hc = HardConstraints(min_spacing=args.min_spacing, max_spacing=args.max_spacing,
                             band=args.band)
        result = deform(snake, field, params, hc, args.max_iter)
        payload = deform_result_to_json(result)
    else:
        midline = args.midline if args.midline is not None else estimate_midline(img)
        if args.band_halfwidth is None:
            raise ValueError("edge-pair mode needs --band-halfwidth (or pass --init-snake)")
        upper, lower = temporal_snake_transform(
            img, params, midline, args.band_halfwidth,
            field_mode=args.field, max_iter=args.max_iter,
        )
        payload = {
            "midline": midline,
            "upper": deform_result_to_json(upper),
            "lower": deform_result_to_json(lower),
        }
    rendered = json.dumps(payload, indent=2)
    if args.output:
        Path(args.output).write_text(rendered + "\n")
        print(f"wrote {args.output}")
    else:
        print(rendered)
    return 0


# ---------------------------------------------------------------------------
# dfa
# ---------------------------------------------------------------------------

def _add_dfa(sub) -> None:
    p = sub.add_parser("dfa", help="run a substring-search DFA over an input")
    p.add_argument("--pattern", required=True, help="substring to search for")
    p.add_argument("--input", required=True, help="text to scan")
    p.add_argument("--alphabet",
                   help="DFA alphabet (default: symbols of pattern and input)")
    p.add_argument("--emit", metavar="PATH", help="also write the encoded machine")
    p.set_defaults(handler=_run_dfa)


def _run_dfa(args: argparse.Namespace) -> int:
    alphabet = args.alphabet
    if alphabet is None:
        alphabet = "".join(sorted(set(args.pattern) | set(args.input)))
    d = build_substring_dfa(args.pattern, alphabet)
    final = dfa_final_state(d, args.input)
    print("accept" if final in d.accepting else "reject")
    print(f"final state: {final}")
    if args.emit:
        Path(args.emit).write_text(encode_dfa(d))
        print(f"wrote {args.emit}")
    return 0


# ---------------------------------------------------------------------------
# pair / rank / rational
# ---------------------------------------------------------------------------

def _add_pair(sub) -> None:
    p = sub.add_parser("pair", help="pairing bijections between naturals and tuples")
    ops = p.add_subparsers(dest="op", required=True)
    enc = ops.add_parser("encode", help="pair two naturals")
    enc.add_argument("a", type=_natural)
    enc.add_argument("b", type=_natural)
    enc.set_defaults(handler=lambda a: print(pair(a.a, a.b)) or 0)
    dec = ops.add_parser("decode", help="split a natural into its pair")
    dec.add_argument("n", type=_natural)
    dec.set_defaults(handler=lambda a: print(*unpair(a.n)) or 0)
    tri = ops.add_parser("triple", help="pair three naturals")
    for name in "abc":
        tri.add_argument(name, type=_natural)
    tri.set_defaults(handler=lambda a: print(triple(a.a, a.b, a.c)) or 0)
    unt = ops.add_parser("untriple", help="split a natural into its triple")
    unt.add_argument("n", type=_natural)
    unt.set_defaults(handler=lambda a: print(*untriple(a.n)) or 0)


def _add_rank(sub) -> None:
    p = sub.add_parser("rank", help="shortlex bijection between strings and naturals")
    ops = p.add_subparsers(dest="op", required=True)
    enc = ops.add_parser("encode", help="rank of a string")
    enc.add_argument("--alphabet", required=True, help="ordered alphabet, e.g. 01")
    enc.add_argument("value", help="string to rank (may be empty)")
    enc.set_defaults(handler=lambda a: print(string_rank(a.value, a.alphabet)) or 0)
    dec = ops.add_parser("decode", help="string at a rank")
    dec.add_argument("--alphabet", required=True, help="ordered alphabet, e.g. 01")
    dec.add_argument("rank", type=_natural)
    dec.set_defaults(handler=lambda a: print(string_unrank(a.rank, a.alphabet)) or 0)


def _add_rational(sub) -> None:
    p = sub.add_parser("rational", help="bijection between reduced fractions and naturals")
    ops = p.add_subparsers(dest="op", required=True)
    enc = ops.add_parser("encode", help="rank of a reduced fraction")
    enc.add_argument("fraction", type=_parse_fraction, help="reduced fraction as N/D")
    enc.set_defaults(
        handler=lambda a: print(rational_rank(ReducedFraction(*a.fraction))) or 0
    )
    dec = ops.add_parser("decode", help="fraction at a rank")
    dec.add_argument("rank", type=_natural)
    dec.set_defaults(handler=lambda a: print(rational_unrank(a.rank)) or 0)


# ---------------------------------------------------------------------------
# serve
# ---------------------------------------------------------------------------

def _add_serve(sub) -> None:
    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--store", default="sessions", help="session store directory")
    p.set_defaults(handler=_run_serve)


def _run_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(Path(args.store)), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kymosnake",
        description="Kymogram synthesis, vibration-language tools and snake fitting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_synth(sub)
    _add_decide(sub)
    _add_deform(sub)
    _add_dfa(sub)
    _add_pair(sub)
    _add_rank(sub)
    _add_rational(sub)
    _add_serve(sub)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
