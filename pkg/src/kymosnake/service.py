"""HTTP facade over the core operations, plus on-disk session persistence.

Sessions live in one directory: `{id}.json` for state, `{id}.pgm` for the
image.  Writes go through an atomic replace, mutations are serialized per
session id, and ids are content-addressed (image bytes + creation nonce), so
deleting the store and replaying the same requests reproduces identical
responses byte for byte.

Every error answers with `{"error": code, "detail": text}`: 422 for
validation and domain failures, 404 for unknown sessions.
"""

from __future__ import annotations

import base64
import dataclasses
import hashlib
import json
import re
import tempfile
import threading
from dataclasses import replace
from pathlib import Path

from fastapi import Body, FastAPI, File, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .automata import build_substring_dfa, dfa_final_state
from .bijections import pair, triple, unpair, untriple
from .image import GrayImage, gradient_magnitude_squared, intensity_squared, load_pgm, save_pgm
from .kymo import (
    PRESET_NAMES,
    NoSignalError,
    VibrationSpec,
    decide_vibration,
    edge_band_constraints,
    estimate_midline,
    generate_vibration_string,
    preset,
    render_kymogram,
)
from .snake import (
    HardConstraints,
    SnakeParams,
    deform,
    deform_result_to_json,
    snake_from_json,
    snake_to_json,
)

_SESSION_ID = re.compile(r"[0-9a-f]{16}")


class ApiError(Exception):
    """Carries the structured error body and its HTTP status."""

    def __init__(self, status: int, code: str, detail: str):
        super().__init__(detail)
        self.status = status
        self.code = code
        self.detail = detail


def _validation(detail: str) -> ApiError:
    return ApiError(422, "validation", detail)


class SessionStore:
    """One JSON file per session plus its PGM blob; atomic replace on write."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._guard = threading.Lock()
        self._locks: dict[str, threading.Lock] = {}

    def lock(self, session_id: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def _session_path(self, session_id: str) -> Path:
        return self.root / f"{session_id}.json"

    def _image_path(self, session_id: str) -> Path:
        return self.root / f"{session_id}.pgm"

    def _atomic_write(self, path: Path, data: bytes) -> None:
        fd = tempfile.NamedTemporaryFile(dir=self.root, delete=False)
        try:
            fd.write(data)
            fd.flush()
            fd.close()
            Path(fd.name).replace(path)
        except BaseException:
            fd.close()
            Path(fd.name).unlink(missing_ok=True)
            raise

    def create(self, image_bytes: bytes, record: dict) -> str:
        """Allocate an id and persist image + state in one critical section.

        The nonce is the current session count, which makes id allocation a
        pure function of the request history.
        """
        with self._guard:
            nonce = len(list(self.root.glob("*.json")))
            digest = hashlib.sha256(image_bytes + nonce.to_bytes(8, "big"))
            session_id = digest.hexdigest()[:16]
            record = dict(record, session_id=session_id, nonce=nonce)
            self._atomic_write(self._image_path(session_id), image_bytes)
            self._atomic_write(
                self._session_path(session_id),
                (json.dumps(record, indent=2) + "\n").encode("ascii"),
            )
        return session_id

    def load(self, session_id: str) -> dict:
        if not _SESSION_ID.fullmatch(session_id) or not self._session_path(session_id).exists():
            raise ApiError(404, "not-found", f"no session {session_id!r}")
        return json.loads(self._session_path(session_id).read_text())

    def save(self, session_id: str, record: dict) -> None:
        self._atomic_write(
            self._session_path(session_id),
            (json.dumps(record, indent=2) + "\n").encode("ascii"),
        )

    def image(self, session_id: str) -> GrayImage:
        return load_pgm(self._image_path(session_id).read_bytes())


# ---------------------------------------------------------------------------
# JSON <-> domain objects
# ---------------------------------------------------------------------------

_SPEC_KEYS = {f.name for f in dataclasses.fields(VibrationSpec)}


def _spec_json(spec: VibrationSpec) -> dict:
    out = dataclasses.asdict(spec)
    out["constants"] = list(out["constants"])
    return out


def _spec_from_json(obj) -> VibrationSpec:
    if not isinstance(obj, dict):
        raise _validation("'spec' must be an object")
    unknown = sorted(set(obj) - _SPEC_KEYS)
    if unknown:
        raise _validation(f"unknown spec fields: {', '.join(unknown)}")
    kwargs = dict(obj)
    if "constants" in kwargs:
        constants = kwargs["constants"]
        if not isinstance(constants, (list, tuple)):
            raise _validation("'constants' must be a list of three numbers")
        kwargs["constants"] = tuple(constants)
    try:
        return VibrationSpec(**kwargs)
    except TypeError as exc:
        raise _validation(str(exc)) from None


def _spec_from_payload(payload: dict) -> VibrationSpec:
    if ("preset" in payload) == ("spec" in payload):
        raise _validation("provide exactly one of 'preset' or 'spec'")
    if "preset" in payload:
        base = preset(str(payload["preset"]))
    else:
        base = _spec_from_json(payload["spec"])
    overrides = {}
    for name in ("periods", "seed"):
        if name in payload:
            value = payload[name]
            if not isinstance(value, int) or isinstance(value, bool):
                raise _validation(f"'{name}' must be an integer")
            overrides[name] = value
    return replace(base, **overrides) if overrides else base


_PARAM_KEYS = {"alpha", "beta", "gamma", "alpha_per", "beta_per", "gamma_per", "rigidity"}


def _params_from_json(obj) -> SnakeParams:
    if obj is None:
        return SnakeParams()
    if not isinstance(obj, dict):
        raise _validation("'params' must be an object")
    unknown = sorted(set(obj) - _PARAM_KEYS)
    if unknown:
        raise _validation(f"unknown params fields: {', '.join(unknown)}")
    kwargs = dict(obj)
    for name in ("alpha_per", "beta_per", "gamma_per"):
        if kwargs.get(name) is not None:
            if not isinstance(kwargs[name], (list, tuple)):
                raise _validation(f"'{name}' must be a list of numbers")
            kwargs[name] = tuple(float(v) for v in kwargs[name])
    return SnakeParams(**kwargs)


_CONSTRAINT_KEYS = {"min_spacing", "max_spacing", "band", "column_locked", "stride"}


def _constraints_from_json(obj) -> HardConstraints | None:
    if obj is None:
        return None
    if not isinstance(obj, dict):
        raise _validation("'constraints' must be an object")
    unknown = sorted(set(obj) - _CONSTRAINT_KEYS)
    if unknown:
        raise _validation(f"unknown constraints fields: {', '.join(unknown)}")
    kwargs = dict(obj)
    band = kwargs.get("band")
    if band is not None:
        if not isinstance(band, (list, tuple)) or not band:
            raise _validation("'band' must be a rectangle or a list of rectangles")
        if isinstance(band[0], (list, tuple)):
            kwargs["band"] = tuple(tuple(int(v) for v in rect) for rect in band)
        else:
            kwargs["band"] = tuple(int(v) for v in band)
    return HardConstraints(**kwargs)


def _field_for(img: GrayImage, field_mode: str):
    if field_mode == "intensity":
        return intensity_squared(img)
    if field_mode == "gradient":
        return gradient_magnitude_squared(img)
    raise _validation(f"field_mode must be 'intensity' or 'gradient', got {field_mode!r}")


def _require_str(payload: dict, name: str) -> str:
    value = payload.get(name)
    if not isinstance(value, str):
        raise _validation(f"'{name}' must be a string")
    return value


# ---------------------------------------------------------------------------
# Application
# ---------------------------------------------------------------------------

def create_app(store_dir: Path | str = "sessions") -> FastAPI:
    app = FastAPI(title="kymosnake", docs_url=None, redoc_url=None)
    store = SessionStore(store_dir)

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"error": exc.code, "detail": exc.detail})

    @app.exception_handler(RequestValidationError)
    async def _request_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=422, content={"error": "validation", "detail": str(exc)})

    @app.exception_handler(ValueError)
    async def _domain_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=422, content={"error": "domain", "detail": str(exc)})

    @app.post("/api/synthesize")
    def synthesize(payload: dict = Body(...)):
        spec = _spec_from_payload(payload)
        text = generate_vibration_string(spec)
        kymo = render_kymogram(text, spec)
        pgm = save_pgm(kymo.image)
        ground_truth = kymo.ground_truth_json()
        record = {
            "source": "synthesize",
            "width": kymo.image.width,
            "height": kymo.image.height,
            "midline": kymo.midline,
            "vstring": text,
            "ground_truth": ground_truth,
            "spec": _spec_json(spec),
            "current": None,
            "history": [],
        }
        session_id = store.create(pgm, record)
        return {
            "session_id": session_id,
            "pgm_base64": base64.b64encode(pgm).decode("ascii"),
            "vstring": text,
            "ground_truth": ground_truth,
        }

    @app.post("/api/sessions")
    def upload_session(file: UploadFile = File(...)):
        data = file.file.read()
        img = load_pgm(data)
        try:
            midline = estimate_midline(img)
        except NoSignalError as exc:
            raise ApiError(422, "no-signal", str(exc)) from None
        record = {
            "source": "upload",
            "width": img.width,
            "height": img.height,
            "midline": midline,
            "vstring": None,
            "ground_truth": None,
            "spec": None,
            "current": None,
            "history": [],
        }
        session_id = store.create(data, record)
        return {
            "session_id": session_id,
            "width": img.width,
            "height": img.height,
            "midline_estimate": midline,
        }

    @app.post("/api/sessions/{session_id}/deform")
    def deform_session(session_id: str, payload: dict = Body(...)):
        with store.lock(session_id):
            record = store.load(session_id)
            img = store.image(session_id)
            params = _params_from_json(payload.get("params"))
            step_mode = bool(payload.get("step_mode", False))
            max_iter = payload.get("max_iter", 50)
            if not isinstance(max_iter, int) or isinstance(max_iter, bool) or max_iter < 1:
                raise _validation("'max_iter' must be an integer >= 1")
            if step_mode:
                max_iter = 1
            field_mode = payload.get("field_mode", "intensity")
            init = payload.get("init")

            if init is not None and not isinstance(init, dict):
                raise _validation("'init' must be an object")
            if init is None:
                current = record.get("current")
                if current is None:
                    raise _validation("session has no deformation state yet: provide 'init'")
                mode = current["mode"]
            elif "snake" in init:
                mode = "free"
            elif "midline" in init or "band_halfwidth" in init:
                mode = "pair"
            else:
                raise _validation("'init' needs 'snake' or 'midline'+'band_halfwidth'")

            if mode == "free":
                if init is not None:
                    start = snake_from_json(init["snake"])
                    hc = _constraints_from_json(payload.get("constraints"))
                else:
                    start = snake_from_json(record["current"]["snake"])
                    field_mode = record["current"]["field_mode"]
                    hc = _constraints_from_json(
                        payload.get("constraints", record["current"]["constraints"])
                    )
                field = _field_for(img, field_mode)
                result = deform(start, field, params, hc, max_iter)
                response = deform_result_to_json(result)
                record["current"] = {
                    "mode": "free",
                    "snake": snake_to_json(result.snake),
                    "field_mode": field_mode,
                    "constraints": payload.get("constraints")
                    if init is not None
                    else record["current"]["constraints"],
                }
            else:
                if init is not None:
                    if "midline" not in init or "band_halfwidth" not in init:
                        raise _validation("'init' needs both 'midline' and 'band_halfwidth'")
                    midline = int(init["midline"])
                    band_halfwidth = int(init["band_halfwidth"])
                    if not 0 <= midline < img.height:
                        raise _validation(
                            f"midline row {midline} outside image height {img.height}"
                        )
                    if band_halfwidth < 0:
                        raise _validation("'band_halfwidth' must be >= 0")
                    row = tuple((x, midline) for x in range(img.width))
                    upper_start = lower_start = snake_from_json(
                        {"closed": False, "snaxels": [[x, y] for x, y in row]}
                    )
                else:
                    current = record["current"]
                    midline = current["midline"]
                    band_halfwidth = current["band_halfwidth"]
                    field_mode = current["field_mode"]
                    upper_start = snake_from_json(current["upper"])
                    lower_start = snake_from_json(current["lower"])
                upper_hc, lower_hc = edge_band_constraints(
                    img.height, img.width, midline, band_halfwidth
                )
                field = _field_for(img, field_mode)
                upper = deform(upper_start, field, params, upper_hc, max_iter)
                lower = deform(lower_start, field, params, lower_hc, max_iter)
                response = {
                    "midline": midline,
                    "upper": deform_result_to_json(upper),
                    "lower": deform_result_to_json(lower),
                }
                record["current"] = {
                    "mode": "pair",
                    "midline": midline,
                    "band_halfwidth": band_halfwidth,
                    "field_mode": field_mode,
                    "upper": snake_to_json(upper.snake),
                    "lower": snake_to_json(lower.snake),
                }

            record["history"].append({
                "params": payload.get("params"),
                "step_mode": step_mode,
                "max_iter": max_iter,
                "result": response,
            })
            store.save(session_id, record)
            return response

    @app.post("/api/decide")
    def decide(payload: dict = Body(...)):
        vstring = _require_str(payload, "vstring")
        c = payload.get("c", [1.0, 1.0, 1.0])
        if not isinstance(c, (list, tuple)) or len(c) != 3:
            raise _validation("'c' must be a list of three numbers")
        eps = payload.get("eps", 0.2)
        if isinstance(eps, bool) or not isinstance(eps, (int, float)):
            raise _validation("'eps' must be a number")
        verdict = decide_vibration(vstring, tuple(float(v) for v in c), float(eps))
        body = {
            "verdict": "accept" if verdict.accepted else "reject",
            "runs": [[sym, length] for sym, length in verdict.runs],
        }
        if verdict.violation is not None:
            body["violation"] = verdict.violation
        return body

    @app.post("/api/dfa")
    def dfa(payload: dict = Body(...)):
        pattern = _require_str(payload, "pattern")
        text = _require_str(payload, "input")
        alphabet = payload.get("alphabet")
        if alphabet is None:
            alphabet = "".join(sorted(set(pattern) | set(text)))
        elif not isinstance(alphabet, str):
            raise _validation("'alphabet' must be a string")
        d = build_substring_dfa(pattern, alphabet)
        final = dfa_final_state(d, text)
        return {
            "verdict": "accept" if final in d.accepting else "reject",
            "final_state": final,
        }

    @app.post("/api/pair")
    def pair_ops(payload: dict = Body(...)):
        op = payload.get("op")
        args = payload.get("args")
        arity = {"encode": 2, "decode": 1, "triple": 3, "untriple": 1}
        if op not in arity:
            raise _validation("'op' must be one of encode, decode, triple, untriple")
        if (
            not isinstance(args, list)
            or len(args) != arity[op]
            or any(isinstance(a, bool) or not isinstance(a, int) for a in args)
        ):
            raise _validation(f"'{op}' takes {arity[op]} integer args")
        if op == "encode":
            result = pair(args[0], args[1])
        elif op == "decode":
            result = list(unpair(args[0]))
        elif op == "triple":
            result = triple(args[0], args[1], args[2])
        else:
            result = list(untriple(args[0]))
        return {"result": result}

    @app.get("/api/presets")
    def presets():
        return {name: _spec_json(preset(name)) for name in PRESET_NAMES}

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        return store.load(session_id)

    return app
