"""Serialization, parsing, replay, and verification of transform traces.

A trace is the reproducibility artifact: it pins the source image (by
content hash), the search configuration, the ordered steps, and the
result hash, so anyone holding the source can re-derive the output
bit-exactly. Files are canonical JSON — fixed key order, floats rendered
with 17 significant digits, no whitespace — so equal traces are equal
bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    ResultMismatch,
    SourceMismatch,
    TraceSyntaxError,
    VersionMismatch,
)
from .image import Image, content_hash
from .transforms import TransformSpec, apply_transform, validate_spec

__all__ = [
    "TRACE_FORMAT_VERSION",
    "Trace",
    "TraceConfig",
    "TraceScores",
    "serialize_trace",
    "parse_trace",
    "replay",
    "save_trace",
    "load_trace",
]

TRACE_FORMAT_VERSION = 1

_SCORE_KEYS = (
    "raw_before",
    "raw_after",
    "ssim_final",
    "noise_sigma_before",
    "noise_sigma_after",
)


@dataclass(frozen=True)
class TraceConfig:
    population: int
    epochs: int
    min_ssim: float
    scorer: str
    eval_downscale: int | None


@dataclass(frozen=True)
class TraceScores:
    raw_before: float
    raw_after: float
    ssim_final: float
    noise_sigma_before: float
    noise_sigma_after: float


@dataclass(frozen=True)
class Trace:
    format_version: int
    source_hash: str
    seed: int
    config: TraceConfig
    steps: tuple[TransformSpec, ...]
    result_hash: str
    scores: TraceScores


def trace_config_from_evolve(
    population: int, epochs: int, min_ssim: float, scorer_kind: str,
    eval_downscale: int | None,
) -> TraceConfig:
    return TraceConfig(population, epochs, float(min_ssim), scorer_kind, eval_downscale)


# --------------------------------------------------------------------------
# canonical JSON

def _emit(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        raise TypeError("traces carry no booleans")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        inner = ",".join(f"{json.dumps(k)}:{_emit(v)}" for k, v in value.items())
        return "{" + inner + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_emit(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def serialize_trace(trace: Trace) -> str:
    """Render a trace as canonical JSON text (no trailing newline)."""
    doc = {
        "format_version": trace.format_version,
        "source_hash": trace.source_hash,
        "seed": trace.seed,
        "config": {
            "population": trace.config.population,
            "epochs": trace.config.epochs,
            "min_ssim": float(trace.config.min_ssim),
            "scorer": trace.config.scorer,
            "eval_downscale": trace.config.eval_downscale,
        },
        "steps": [
            {"op": s.op, "params": {k: float(v) for k, v in s.params.items()}}
            for s in trace.steps
        ],
        "result_hash": trace.result_hash,
        "scores": {k: float(getattr(trace.scores, k)) for k in _SCORE_KEYS},
    }
    return _emit(doc)


# --------------------------------------------------------------------------
# parsing

def _need(mapping: dict, key: str, kinds, where: str):
    if key not in mapping:
        raise TraceSyntaxError(f"{where}: missing key {key!r}")
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, kinds):
        raise TraceSyntaxError(f"{where}: bad type for {key!r}")
    return value


def _check_keys(mapping: dict, expected: tuple[str, ...], where: str) -> None:
    extra = set(mapping) - set(expected)
    if extra:
        raise TraceSyntaxError(f"{where}: unexpected keys {sorted(extra)}")


def parse_trace(text: str) -> Trace:
    """Parse and validate trace text; every step is checked against the
    registry (unknown ops and out-of-range params are rejected)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TraceSyntaxError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise TraceSyntaxError("trace document must be a JSON object")
    _check_keys(
        doc,
        ("format_version", "source_hash", "seed", "config", "steps", "result_hash", "scores"),
        "trace",
    )
    version = _need(doc, "format_version", int, "trace")
    if version != TRACE_FORMAT_VERSION:
        raise VersionMismatch(f"unsupported format_version {version}")

    source_hash = _need(doc, "source_hash", str, "trace")
    seed = _need(doc, "seed", int, "trace")
    if not 0 <= seed < 2**64:
        raise TraceSyntaxError("seed must be an unsigned 64-bit integer")

    raw_cfg = _need(doc, "config", dict, "trace")
    _check_keys(
        raw_cfg, ("population", "epochs", "min_ssim", "scorer", "eval_downscale"), "config"
    )
    eval_downscale = raw_cfg.get("eval_downscale")
    if eval_downscale is not None and (
        isinstance(eval_downscale, bool) or not isinstance(eval_downscale, int)
    ):
        raise TraceSyntaxError("config: eval_downscale must be an integer or null")
    config = TraceConfig(
        population=_need(raw_cfg, "population", int, "config"),
        epochs=_need(raw_cfg, "epochs", int, "config"),
        min_ssim=float(_need(raw_cfg, "min_ssim", (int, float), "config")),
        scorer=_need(raw_cfg, "scorer", str, "config"),
        eval_downscale=eval_downscale,
    )

    raw_steps = _need(doc, "steps", list, "trace")
    steps = []
    for i, raw in enumerate(raw_steps):
        if not isinstance(raw, dict):
            raise TraceSyntaxError(f"steps[{i}]: must be an object")
        _check_keys(raw, ("op", "params"), f"steps[{i}]")
        op = _need(raw, "op", str, f"steps[{i}]")
        params = _need(raw, "params", dict, f"steps[{i}]")
        clean = {}
        for k, v in params.items():
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise TraceSyntaxError(f"steps[{i}]: param {k!r} must be a number")
            clean[k] = float(v)
        steps.append(validate_spec(TransformSpec(op, clean)))

    result_hash = _need(doc, "result_hash", str, "trace")

    raw_scores = _need(doc, "scores", dict, "trace")
    _check_keys(raw_scores, _SCORE_KEYS, "scores")
    scores = TraceScores(
        **{k: float(_need(raw_scores, k, (int, float), "scores")) for k in _SCORE_KEYS}
    )

    return Trace(
        format_version=version,
        source_hash=source_hash,
        seed=seed,
        config=config,
        steps=tuple(steps),
        result_hash=result_hash,
        scores=scores,
    )


# --------------------------------------------------------------------------
# replay

def replay(initial: Image, trace: Trace, verify: bool = False) -> Image:
    """Apply the trace's steps to `initial` in order.

    With verify=True the source must hash to trace.source_hash before any
    work and the output must hash to trace.result_hash afterwards.
    """
    if verify:
        actual = content_hash(initial)
        if actual != trace.source_hash:
            raise SourceMismatch(
                f"source hash {actual} != trace source {trace.source_hash}"
            )
    img = initial
    for spec in trace.steps:
        img = apply_transform(spec, img, initial)
    if verify:
        actual = content_hash(img)
        if actual != trace.result_hash:
            raise ResultMismatch(
                f"replay hash {actual} != trace result {trace.result_hash}"
            )
    return img


def save_trace(trace: Trace, path) -> None:
    Path(path).write_text(serialize_trace(trace) + "\n", encoding="utf-8")


def load_trace(path) -> Trace:
    return parse_trace(Path(path).read_text(encoding="utf-8"))
