"""Two-jug measuring puzzle: exact-transition simulator/validator, BFS plan
oracle, and gcd feasibility screening. Level difficulty is keyed to
shortest-plan length bands rather than raw capacities."""

from __future__ import annotations

import random
import re
from collections import deque
from math import gcd

from ..core import Environment, OracleUnsupported, Verdict, Violation
from ..parsing import extract_and_parse

ACTIONS = ("Fill A", "Fill B", "Empty A", "Empty B", "Pour A to B", "Pour B to A")
_CANON = {a.lower(): a for a in ACTIONS}

ORACLE_MAX_CAP = 10_000

SYSTEM_PROMPT = """You are an expert in planning algorithms and measuring puzzles.

Task: solve the water jug puzzle.

Rules:
1. There are two jugs, Jug A and Jug B, with fixed capacities, plus an
   unlimited water source.
2. Allowed moves:
   - Fill A / Fill B: fill the jug completely from the source.
   - Empty A / Empty B: pour the whole jug onto the ground.
   - Pour A to B / Pour B to A: pour until the source jug is empty or the
     destination jug is full, whichever comes first.

Output format: provide the solution as a structured list, one action per step.
Format: Solution: [['Fill A'], ['Pour A to B'], ...]"""

USER_PROMPT = """Current puzzle:
Jug A capacity: {cap_a}
Jug B capacity: {cap_b}
Target amount: {goal}

Track the exact amount of water in both jugs after every move, then provide
the action sequence that leaves exactly the target amount in one of the jugs."""


def normalize_action(token) -> str:
    """Case-insensitive, whitespace-normalized action lookup; None if unknown."""
    if not isinstance(token, str):
        return None
    return _CANON.get(re.sub(r"\s+", " ", token.strip()).lower())


def apply_action(state, action, cap_a, cap_b):
    x, y = state
    if action == "Fill A":
        return (cap_a, y)
    if action == "Fill B":
        return (x, cap_b)
    if action == "Empty A":
        return (0, y)
    if action == "Empty B":
        return (x, 0)
    if action == "Pour A to B":
        d = min(x, cap_b - y)
        return (x - d, y + d)
    if action == "Pour B to A":
        d = min(y, cap_a - x)
        return (x + d, y - d)
    raise ValueError(f"unknown action {action!r}")


def jug_validate(cap_a: int, cap_b: int, goal: int, steps) -> Verdict:
    """Execute singleton-action steps from (0,0) with exact transitions; Pass
    iff the final state holds the goal amount in either jug."""
    if not isinstance(steps, (list, tuple)):
        return Verdict.failed([Violation("format", "candidate is not a step list")])
    state = (0, 0)
    for idx, step in enumerate(steps, start=1):
        if not isinstance(step, (list, tuple)) or len(step) != 1:
            return Verdict.failed(
                [Violation("invalid_operator", f"step {step!r} is not a singleton action", step=idx)]
            )
        action = normalize_action(step[0])
        if action is None:
            return Verdict.failed(
                [Violation("invalid_operator", f"unknown operator {step[0]!r}", step=idx)]
            )
        state = apply_action(state, action, cap_a, cap_b)
        # transitions make capacity violations impossible; tripwire anyway
        assert 0 <= state[0] <= cap_a and 0 <= state[1] <= cap_b
    if state[0] == goal or state[1] == goal:
        return Verdict.passed()
    return Verdict.failed(
        [
            Violation(
                "goal_not_reached",
                f"final state {state} holds no jug with exactly {goal}",
                incomplete=True,
            )
        ]
    )


def jug_feasible(cap_a: int, cap_b: int, goal: int) -> bool:
    """Classical solvability condition."""
    return goal <= max(cap_a, cap_b) and goal % gcd(cap_a, cap_b) == 0


def jug_oracle(cap_a: int, cap_b: int, goal: int):
    """Shortest action sequence reaching the goal, or None when infeasible."""
    if cap_a > ORACLE_MAX_CAP or cap_b > ORACLE_MAX_CAP:
        raise OracleUnsupported(f"capacities too large for BFS oracle: {cap_a},{cap_b}")
    if cap_a < 1 or cap_b < 1 or goal < 1:
        raise OracleUnsupported("capacities and goal must be positive")
    if not jug_feasible(cap_a, cap_b, goal):
        return None
    start = (0, 0)
    parent = {start: None}
    q = deque([start])
    while q:
        state = q.popleft()
        if state[0] == goal or state[1] == goal:
            plan = []
            cur = state
            while parent[cur] is not None:
                cur, action = parent[cur]
                plan.append([action])
            return plan[::-1]
        for action in ACTIONS:
            nxt = apply_action(state, action, cap_a, cap_b)
            if nxt not in parent:
                parent[nxt] = (state, action)
                q.append(nxt)
    return None  # unreachable when jug_feasible holds


def plan_length(cap_a: int, cap_b: int, goal: int):
    plan = jug_oracle(cap_a, cap_b, goal)
    return None if plan is None else len(plan)


class WaterJugEnvironment(Environment):
    env_id = "waterjug"
    schema_hint = "list"

    # attempts per instance before widening the band tolerance
    SAMPLE_ATTEMPTS = 4000

    def resolve_params(self, template, seed):
        if "cap_a" in template:
            cap_a, cap_b, goal = template["cap_a"], template["cap_b"], template["goal"]
            if not jug_feasible(cap_a, cap_b, goal):
                raise ValueError(f"infeasible jug instance ({cap_a},{cap_b},{goal})")
            return {"cap_a": cap_a, "cap_b": cap_b, "goal": goal}
        lo, hi = template["min_len"], template.get("max_len")
        cap_lo, cap_hi = template["cap_lo"], template["cap_hi"]
        rng = random.Random(("waterjug", lo, hi, cap_lo, cap_hi, seed).__repr__())
        best = None
        for _ in range(self.SAMPLE_ATTEMPTS):
            cap_a = rng.randint(cap_lo, cap_hi)
            cap_b = rng.randint(cap_lo, cap_hi)
            goal = rng.randint(1, max(cap_a, cap_b))
            if not jug_feasible(cap_a, cap_b, goal):
                continue
            n = plan_length(cap_a, cap_b, goal)
            if n is None or n < lo:
                continue
            if hi is None or n <= hi:
                return {"cap_a": cap_a, "cap_b": cap_b, "goal": goal}
            if best is None or n < best[0]:
                best = (n, cap_a, cap_b, goal)
        if best is not None:  # closest-over-band fallback; deterministic
            return {"cap_a": best[1], "cap_b": best[2], "goal": best[3]}
        raise ValueError(f"could not sample a jug instance for band [{lo},{hi}]")

    def render_prompt(self, instance):
        p = instance.params
        return SYSTEM_PROMPT, USER_PROMPT.format(
            cap_a=p["cap_a"], cap_b=p["cap_b"], goal=p["goal"]
        )

    def parse(self, raw_text):
        return extract_and_parse(raw_text, self.schema_hint, strict=self.strict_parse)

    def render_candidate(self, candidate):
        body = ", ".join("['" + step[0] + "']" for step in candidate)
        return f"Solution: [{body}]"

    def validate(self, instance, candidate):
        p = instance.params
        return jug_validate(p["cap_a"], p["cap_b"], p["goal"], candidate)

    def oracle(self, instance):
        p = instance.params
        plan = jug_oracle(p["cap_a"], p["cap_b"], p["goal"])
        if plan is None:
            raise ValueError("generated instance unexpectedly infeasible")
        return plan
