"""evoimage: evolutionary image enhancement with replayable traces.

Improve an image by population search over ordered sequences of classical
transformations, guided by a pluggable no-reference quality score and
guarded by structural similarity to the source. Every result ships with a
trace that replays bit-exactly.
"""

from . import errors
from .bench import BenchReport, BenchRow, run_bench, write_report
from .degrade import degrade
from .estimator import EvolutionaryEnhancer
from .evolve import (
    EvolveConfig,
    Individual,
    Population,
    canonical_fitness,
    epoch_step,
    evolve,
    init_population,
    random_transform,
    render_sequence,
)
from .image import (
    Image,
    content_hash,
    downscale_half,
    load_image,
    save_image,
    scale_to_max_side,
    to_luma,
)
from .iqa import (
    BrisqueModel,
    QualityScore,
    Scorer,
    ScorerConfig,
    brisque_features,
    brisque_score,
    external_score,
    fit_aggd,
    fit_ggd,
    load_default_model,
    make_scorer,
    mscn,
    noise_variance,
    ssim,
)
from .synthetic import synthetic_image, synthetic_set
from .trace import (
    Trace,
    load_trace,
    parse_trace,
    replay,
    save_trace,
    serialize_trace,
)
from .transforms import (
    REGISTRY,
    TransformSpec,
    apply_transform,
    clahe,
    dehaze_dark_channel,
    registry_ops,
    sharpen,
    stack_weighted,
    tv_denoise,
    validate_spec,
)

__version__ = "0.1.0"

__all__ = [
    "errors",
    "Image",
    "load_image",
    "save_image",
    "to_luma",
    "content_hash",
    "downscale_half",
    "scale_to_max_side",
    "TransformSpec",
    "REGISTRY",
    "registry_ops",
    "validate_spec",
    "apply_transform",
    "stack_weighted",
    "tv_denoise",
    "sharpen",
    "clahe",
    "dehaze_dark_channel",
    "QualityScore",
    "ScorerConfig",
    "BrisqueModel",
    "Scorer",
    "make_scorer",
    "mscn",
    "fit_ggd",
    "fit_aggd",
    "brisque_features",
    "brisque_score",
    "load_default_model",
    "ssim",
    "noise_variance",
    "external_score",
    "EvolveConfig",
    "Individual",
    "Population",
    "canonical_fitness",
    "random_transform",
    "init_population",
    "epoch_step",
    "evolve",
    "render_sequence",
    "Trace",
    "serialize_trace",
    "parse_trace",
    "replay",
    "save_trace",
    "load_trace",
    "degrade",
    "BenchRow",
    "BenchReport",
    "run_bench",
    "write_report",
    "EvolutionaryEnhancer",
    "synthetic_image",
    "synthetic_set",
]
