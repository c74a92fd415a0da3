"""Shared domain types: puzzle instances, verdicts, evaluation records, and the
environment contract that every puzzle family implements."""

from __future__ import annotations

import hashlib
import json
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Optional, Sequence, Union

from .parsing import ParseFailure, ParseFailureReason

# Complexity levels are plain ordinals 1..7: 1..6 form the standard ladder and
# 7 is reserved for the extreme regime beyond it.
LEVEL_MIN = 1
LEVEL_MAX = 7


def level_label(ordinal: int) -> str:
    """Human-readable label for a level ordinal ("L1".."L6", "L6+")."""
    if not LEVEL_MIN <= ordinal <= LEVEL_MAX:
        raise ValueError(f"level ordinal out of range: {ordinal}")
    return "L6+" if ordinal == 7 else f"L{ordinal}"


class VerdictKind(str, Enum):
    PASS = "Pass"
    FAIL = "Fail"
    COLLAPSE = "Collapse"


class CollapseReason(str, Enum):
    UNPARSEABLE = "Unparseable"
    TRUNCATED = "Truncated"
    EMPTY = "Empty"


@dataclass(frozen=True)
class Violation:
    """One broken rule: which rule, where (1-based step/unit index when
    applicable), and a human-readable message.

    ``incomplete`` marks violations that indicate missing or unfinished
    content (unassigned variables, blank cells, a goal left unreached by an
    otherwise legal prefix) rather than an outright rule breach; classify()
    uses it to distinguish truncated output from wrong output.
    """

    rule: str
    message: str
    step: Optional[int] = None
    incomplete: bool = False

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "message": self.message,
            "step": self.step,
            "incomplete": self.incomplete,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Violation":
        return cls(
            rule=d["rule"],
            message=d["message"],
            step=d.get("step"),
            incomplete=bool(d.get("incomplete", False)),
        )


@dataclass(frozen=True)
class Verdict:
    """Three-way outcome of validation: Pass, Fail(violations) or
    Collapse(reason)."""

    kind: VerdictKind
    violations: tuple = ()
    collapse_reason: Optional[CollapseReason] = None

    def __post_init__(self):
        if self.kind is VerdictKind.PASS and self.violations:
            raise ValueError("Pass verdict cannot carry violations")
        if self.kind is VerdictKind.FAIL and not self.violations:
            raise ValueError("Fail verdict requires at least one violation")
        if self.kind is VerdictKind.COLLAPSE:
            if self.violations:
                raise ValueError("Collapse verdict cannot carry violations")
            if self.collapse_reason is None:
                raise ValueError("Collapse verdict requires a reason")
        elif self.collapse_reason is not None:
            raise ValueError("collapse_reason only valid on Collapse verdicts")

    @classmethod
    def passed(cls) -> "Verdict":
        return cls(VerdictKind.PASS)

    @classmethod
    def failed(cls, violations: Iterable[Violation]) -> "Verdict":
        return cls(VerdictKind.FAIL, tuple(violations))

    @classmethod
    def collapsed(cls, reason: CollapseReason) -> "Verdict":
        return cls(VerdictKind.COLLAPSE, (), reason)

    @property
    def is_pass(self) -> bool:
        return self.kind is VerdictKind.PASS

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "violations": [v.to_dict() for v in self.violations],
            "collapse_reason": self.collapse_reason.value if self.collapse_reason else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Verdict":
        reason = d.get("collapse_reason")
        return cls(
            kind=VerdictKind(d["kind"]),
            violations=tuple(Violation.from_dict(v) for v in d.get("violations", [])),
            collapse_reason=CollapseReason(reason) if reason else None,
        )


def _canonical_params(params: dict) -> dict:
    """Recursively sort mapping keys so serialization is byte-stable."""
    def norm(v):
        if isinstance(v, dict):
            return {k: norm(v[k]) for k in sorted(v)}
        if isinstance(v, (list, tuple)):
            return [norm(x) for x in v]
        return v

    return {k: norm(params[k]) for k in sorted(params)}


def canonical_instance_bytes(env_id: str, level: int, seed: int, params: dict) -> bytes:
    """Canonical byte layout that feeds the instance digest: a JSON object with
    fields env, level, seed, params in that fixed order, params keys sorted."""
    obj = {"env": env_id, "level": level, "seed": seed, "params": _canonical_params(params)}
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


@dataclass(frozen=True)
class PuzzleInstance:
    """One fully determined test case. Regenerating with the same
    (env_id, level, seed) yields a byte-identical params record and id."""

    env_id: str
    level: int
    seed: int
    params: dict
    instance_id: str

    @classmethod
    def create(cls, env_id: str, level: int, seed: int, params: dict) -> "PuzzleInstance":
        if not LEVEL_MIN <= level <= LEVEL_MAX:
            raise ValueError(f"level ordinal out of range: {level}")
        params = _canonical_params(params)
        digest = hashlib.sha256(canonical_instance_bytes(env_id, level, seed, params)).hexdigest()
        return cls(env_id=env_id, level=level, seed=seed, params=params, instance_id=digest)

    def to_json(self) -> str:
        obj = {
            "env": self.env_id,
            "level": self.level,
            "seed": self.seed,
            "params": _canonical_params(self.params),
            "instance_id": self.instance_id,
        }
        return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "PuzzleInstance":
        obj = json.loads(text)
        return cls(
            env_id=obj["env"],
            level=obj["level"],
            seed=obj["seed"],
            params=obj["params"],
            instance_id=obj["instance_id"],
        )


@dataclass(frozen=True)
class EvalRecord:
    """One (model, instance) episode. The verdict is a pure function of
    (raw_text, instance, finish_reason), so stored records can be re-validated."""

    model_id: str
    instance_id: str
    raw_text: str
    verdict: Verdict
    prompt_tokens: int
    completion_tokens: int
    latency_ms: int
    finish_reason: str

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "instance_id": self.instance_id,
            "raw_text": self.raw_text,
            "verdict": self.verdict.to_dict(),
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
            "latency_ms": self.latency_ms,
            "finish_reason": self.finish_reason,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvalRecord":
        return cls(
            model_id=d["model_id"],
            instance_id=d["instance_id"],
            raw_text=d["raw_text"],
            verdict=Verdict.from_dict(d["verdict"]),
            prompt_tokens=d["prompt_tokens"],
            completion_tokens=d["completion_tokens"],
            latency_ms=d["latency_ms"],
            finish_reason=d["finish_reason"],
        )


class OracleUnsupported(Exception):
    """Raised when a reference solver is asked for an instance outside its
    tractable range (the validator still works for such instances)."""


class OracleTimeout(Exception):
    """Raised when a reference solver exceeds its search budget; distinct from
    a proven infeasibility result."""


class Environment(ABC):
    """Contract every puzzle family implements.

    The oracle law must hold: validate(i, oracle(i)) is Pass for every
    generated instance on which the oracle is tractable.
    """

    env_id: str = ""
    schema_hint: str = "list"  # extraction hint: list | mapping | digits | tokens
    strict_parse: bool = False  # disable trailing-comma/lowercase-boolean tolerance

    def generate(self, level: int, seed: int, template: Optional[dict] = None) -> PuzzleInstance:
        """Deterministically build the instance for (level, seed).

        `template` overrides the default ladder entry for the level; the
        resolved params record materializes the full puzzle (clauses, edges,
        grids, ...) so instance files are self-contained.
        """
        if template is None:
            ladder = dict(self.default_ladder())
            if level not in ladder:
                raise ValueError(f"{self.env_id}: no default ladder entry for level {level}")
            template = ladder[level]
        params = self.resolve_params(dict(template), seed)
        return PuzzleInstance.create(self.env_id, level, seed, params)

    @abstractmethod
    def resolve_params(self, template: dict, seed: int) -> dict:
        """Expand a ladder template into the concrete, self-contained params
        record for one instance."""

    @abstractmethod
    def render_prompt(self, instance: PuzzleInstance) -> tuple:
        """Return (system_text, user_text). The system text is identical for
        every level of the environment; only user-text parameter slots vary."""

    @abstractmethod
    def parse(self, raw_text: str) -> Union[Any, ParseFailure]:
        """Extract and parse the candidate payload from free-form model text."""

    @abstractmethod
    def render_candidate(self, candidate: Any) -> str:
        """Render a candidate back to its schema text ("Solution: ...")."""

    @abstractmethod
    def validate(self, instance: PuzzleInstance, candidate: Any) -> Verdict:
        """Judge a parsed candidate against exact task mechanics. Returns
        Pass or Fail; collapse classification happens in classify()."""

    @abstractmethod
    def oracle(self, instance: PuzzleInstance) -> Any:
        """Reference solution for a generated instance."""

    def default_ladder(self):
        return level_schedule(self.env_id)


# Finish reasons that indicate the provider cut generation at the budget.
TRUNCATION_FINISH_REASONS = frozenset(
    {"length", "max_tokens", "max_output_tokens", "length_cutoff", "truncated"}
)


def classify(
    parse_result: Union[Any, ParseFailure],
    validation: Optional[Sequence[Violation]],
    finish_reason: str,
) -> Verdict:
    """Total mapping from (parse outcome, violations, finish reason) to a Verdict.

    Unparseable or empty output collapses; violations fail; a clean candidate
    passes. A budget-truncated response whose only problems are incompleteness
    (a legal-but-unfinished payload) collapses as Truncated rather than
    failing.
    """
    if isinstance(parse_result, ParseFailure):
        if parse_result.reason is ParseFailureReason.EMPTY:
            return Verdict.collapsed(CollapseReason.EMPTY)
        return Verdict.collapsed(CollapseReason.UNPARSEABLE)
    violations = tuple(validation or ())
    if not violations:
        return Verdict.passed()
    truncated = (finish_reason or "").strip().lower() in TRUNCATION_FINISH_REASONS
    if truncated and all(v.incomplete for v in violations):
        return Verdict.collapsed(CollapseReason.TRUNCATED)
    return Verdict.failed(violations)


def predicted_success(p: float, length: int) -> float:
    """Analytic per-step error-compounding overlay: probability p of a correct
    step sustained over `length` steps."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"step probability out of [0,1]: {p}")
    if length < 1:
        raise ValueError(f"length must be >= 1: {length}")
    return p ** length


# Default per-environment parameter ladders. The level semantics are fixed
# (L1 minimal .. L6 extreme-adjacent); the numeric values below are this
# artifact's documented defaults and every one of them can be overridden in
# the run config.
DEFAULT_LADDERS = {
    "hanoi": [(i + 1, {"n": n}) for i, n in enumerate([3, 5, 7, 9, 11, 13])],
    "checker": [(i + 1, {"n": n}) for i, n in enumerate([2, 4, 6, 8, 10, 12])],
    "river": [
        (1, {"pairs": 2, "capacity": 2}),
        (2, {"pairs": 3, "capacity": 2}),
        (3, {"pairs": 4, "capacity": 3}),
        (4, {"pairs": 5, "capacity": 3}),
        (5, {"pairs": 6, "capacity": 4}),
        (6, {"pairs": 8, "capacity": 4}),
    ],
    # Water-jug difficulty is keyed to shortest-plan length bands; capacities
    # are sampled per seed inside the stated range until the band is hit.
    "waterjug": [
        (1, {"min_len": 2, "max_len": 4, "cap_lo": 2, "cap_hi": 6}),
        (2, {"min_len": 5, "max_len": 7, "cap_lo": 3, "cap_hi": 8}),
        (3, {"min_len": 8, "max_len": 10, "cap_lo": 5, "cap_hi": 10}),
        (4, {"min_len": 11, "max_len": 14, "cap_lo": 7, "cap_hi": 14}),
        (5, {"min_len": 15, "max_len": 20, "cap_lo": 9, "cap_hi": 18}),
        (6, {"min_len": 21, "max_len": None, "cap_lo": 15, "cap_hi": 30}),
    ],
    "sat": [
        (1, {"num_vars": 5, "alpha": 2.0}),
        (2, {"num_vars": 10, "alpha": 2.5}),
        (3, {"num_vars": 20, "alpha": 3.0}),
        (4, {"num_vars": 30, "alpha": 3.5}),
        (5, {"num_vars": 50, "alpha": 4.0}),
        (6, {"num_vars": 75, "alpha": 4.2}),
    ],
    "crypto": [
        (1, {"letters": 4, "addends": 2, "word_len": 3}),
        (2, {"letters": 6, "addends": 2, "word_len": 4}),
        (3, {"letters": 8, "addends": 2, "word_len": 5}),
        (4, {"letters": 9, "addends": 2, "word_len": 6}),
        (5, {"letters": 10, "addends": 2, "word_len": 7}),
        (6, {"letters": 10, "addends": 3, "word_len": 7}),
    ],
    "graphcolor": [
        (1, {"n": 5, "density": 0.3, "colors": 3}),
        (2, {"n": 8, "density": 0.3, "colors": 3}),
        (3, {"n": 12, "density": 0.35, "colors": 3}),
        (4, {"n": 16, "density": 0.4, "colors": 3}),
        (5, {"n": 22, "density": 0.4, "colors": 3}),
        (6, {"n": 30, "density": 0.45, "colors": 3}),
    ],
    "sudoku": [(i + 1, {"n": 9, "givens": g}) for i, g in enumerate([60, 45, 35, 28, 24, 22])],
    "rubik": [
        (i + 1, {"scramble_len": s, "forbid_cancellation": True})
        for i, s in enumerate([2, 4, 6, 10, 14, 20])
    ],
}

ENV_IDS = tuple(sorted(DEFAULT_LADDERS))


def level_schedule(env_id: str):
    """Default (level, params template) ladder for an environment."""
    if env_id not in DEFAULT_LADDERS:
        raise ValueError(f"unknown environment id: {env_id!r}")
    return [(lvl, dict(params)) for lvl, params in DEFAULT_LADDERS[env_id]]
