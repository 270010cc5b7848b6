"""Audio-description generation for movie clips (C++ core)."""

from ._adgen import (
    ConfigError,
    Error,
    InputError,
    PreconditionError,
    RunConfig,
    annotate_dump,
    cider_d,
    detect_shots,
    evaluate,
    generate,
    identify,
    iou,
    load_config,
    rouge_l,
    sample_frames,
    tokenize,
)

__all__ = [
    "ConfigError",
    "Error",
    "InputError",
    "PreconditionError",
    "RunConfig",
    "annotate_dump",
    "cider_d",
    "detect_shots",
    "evaluate",
    "generate",
    "identify",
    "iou",
    "load_config",
    "rouge_l",
    "sample_frames",
    "tokenize",
]
