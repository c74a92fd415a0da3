"""Complexity-controlled reasoning benchmark toolkit: parameterized puzzle
generation, deterministic validation, model-endpoint evaluation with
record/replay, and collapse-threshold analytics."""

from .client import (
    EpisodeError,
    ModelClient,
    ModelRequest,
    ModelResponse,
    ReplayStore,
    evaluate_text,
    replay_key,
    run_episode,
)
from .config import ConfigError, ModelConfig, RunConfig, load_config
from .core import (
    ENV_IDS,
    CollapseReason,
    Environment,
    EvalRecord,
    OracleTimeout,
    OracleUnsupported,
    PuzzleInstance,
    Verdict,
    VerdictKind,
    Violation,
    classify,
    level_label,
    level_schedule,
    predicted_success,
)
from .envs import all_environments, get_environment
from .metrics import (
    CollapseEstimate,
    ComplexityCurve,
    LevelCell,
    aggregate,
    collapse_threshold,
    summaries,
    write_report,
)
from .parsing import ParseFailure, ParseFailureReason, extract_block, parse_literal

__version__ = "0.1.0"

__all__ = [
    "CollapseEstimate",
    "CollapseReason",
    "ComplexityCurve",
    "ConfigError",
    "ENV_IDS",
    "Environment",
    "EpisodeError",
    "EvalRecord",
    "LevelCell",
    "ModelClient",
    "ModelConfig",
    "ModelRequest",
    "ModelResponse",
    "OracleTimeout",
    "OracleUnsupported",
    "ParseFailure",
    "ParseFailureReason",
    "PuzzleInstance",
    "ReplayStore",
    "RunConfig",
    "Verdict",
    "VerdictKind",
    "Violation",
    "aggregate",
    "all_environments",
    "classify",
    "collapse_threshold",
    "evaluate_text",
    "extract_block",
    "get_environment",
    "level_label",
    "level_schedule",
    "load_config",
    "parse_literal",
    "predicted_success",
    "replay_key",
    "run_episode",
    "summaries",
    "write_report",
]
