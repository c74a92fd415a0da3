"""River crossing with paired actors/agents: safety predicate, trip-by-trip
validator, and a BFS shortest-plan reference solver with feasibility
screening at generation time."""

from __future__ import annotations

import re
from collections import deque
from functools import lru_cache

from ..core import Environment, OracleUnsupported, Verdict, Violation
from ..parsing import extract_and_parse

LABEL_RE = re.compile(r"^[Aa]_[0-9]+$")

ORACLE_MAX_PAIRS = 8

SYSTEM_PROMPT = """You are an expert in logic puzzles and constraint satisfaction.

Task: solve the river crossing puzzle with actors (a_1, a_2, ...) and agents
(A_1, A_2, ...).

Rules:
1. There are N actor/agent pairs; actor a_i is protected by agent A_i.
2. The boat carries at most k people and cannot travel empty.
3. Safety constraint: an actor a_i may never be in the presence of another
   agent A_j unless its own agent A_i is also present. This applies to the
   left bank, the right bank, and the boat.

Output format: provide the solution as a list of boat trips.
Format: Solution: [['A_1', 'a_1'], ['A_1'], ...]
(Each sub-list is the passenger group for one trip; trips alternate
left-to-right, right-to-left, starting from the left.)"""

USER_PROMPT = """Current puzzle:
- Number of pairs: N = {pairs}
- Boat capacity: k = {capacity}
- Initial state: everyone is on the left bank.

Track who is on each bank after every trip and never violate the safety
constraint. Provide the trip sequence that brings everyone to the right bank."""


class UnknownLabel(ValueError):
    """An entity label outside the instance's population (distinct from unsafe)."""


def _split_label(label: str):
    if not isinstance(label, str) or not LABEL_RE.match(label.strip()):
        raise UnknownLabel(f"bad entity label {label!r}")
    kind, num = label.strip().split("_")
    return kind, int(num)


def river_safe(group, pairs: int = None) -> bool:
    """False iff some actor a_i is present without A_i while any agent is present."""
    agents = set()
    actors = set()
    for label in group:
        kind, num = _split_label(label)
        if pairs is not None and not 1 <= num <= pairs:
            raise UnknownLabel(f"entity {label!r} outside population of {pairs} pairs")
        (agents if kind == "A" else actors).add(num)
    if not agents:
        return True
    return all(i in agents for i in actors)


def river_validate(pairs: int, capacity: int, trips) -> Verdict:
    """Simulate alternating boat trips from the all-left state. Each trip must
    respect capacity, membership of the departure bank, and safety of the boat
    group and both resulting banks. Pass iff the left bank ends empty."""
    if not isinstance(trips, (list, tuple)):
        return Verdict.failed([Violation("format", "candidate is not a trip list")])
    everyone = {f"A_{i}" for i in range(1, pairs + 1)} | {f"a_{i}" for i in range(1, pairs + 1)}
    left = set(everyone)
    right = set()
    side = "left"
    for idx, trip in enumerate(trips, start=1):
        if not isinstance(trip, (list, tuple)):
            return Verdict.failed([Violation("format", f"trip {trip!r} is not a list", step=idx)])
        passengers = []
        for label in trip:
            try:
                _split_label(label)
            except UnknownLabel:
                return Verdict.failed(
                    [Violation("format", f"unknown entity label {label!r}", step=idx)]
                )
            passengers.append(label.strip())
        if len(set(passengers)) != len(passengers):
            return Verdict.failed(
                [Violation("format", "duplicate passenger in one trip", step=idx)]
            )
        if not 1 <= len(passengers) <= capacity:
            return Verdict.failed(
                [
                    Violation(
                        "capacity",
                        f"trip carries {len(passengers)} passengers, allowed 1..{capacity}",
                        step=idx,
                    )
                ]
            )
        bank = left if side == "left" else right
        group = set(passengers)
        if not group <= bank:
            missing = sorted(group - bank)
            return Verdict.failed(
                [
                    Violation(
                        "membership",
                        f"passengers {missing} are not on the {side} bank",
                        step=idx,
                    )
                ]
            )
        try:
            if not river_safe(group, pairs):
                return Verdict.failed(
                    [Violation("boat_unsafe", "boat group violates the safety rule", step=idx)]
                )
        except UnknownLabel as exc:
            return Verdict.failed([Violation("format", str(exc), step=idx)])
        if side == "left":
            left -= group
            right |= group
            side = "right"
        else:
            right -= group
            left |= group
            side = "left"
        if not river_safe(left, pairs) or not river_safe(right, pairs):
            return Verdict.failed(
                [Violation("bank_unsafe", "a bank violates the safety rule", step=idx)]
            )
    if not left:
        return Verdict.passed()
    return Verdict.failed(
        [
            Violation(
                "goal_not_reached",
                f"{sorted(left)} remain on the left bank",
                incomplete=True,
            )
        ]
    )


def _mask_safe(mask: int, pairs: int) -> bool:
    # bits 0..pairs-1 = agents, bits pairs..2*pairs-1 = actors
    agents = mask & ((1 << pairs) - 1)
    if not agents:
        return True
    for i in range(pairs):
        if mask >> (pairs + i) & 1 and not (mask >> i & 1):
            return False
    return True


@lru_cache(maxsize=None)
def _shortest_trips(pairs: int, capacity: int):
    full = (1 << (2 * pairs)) - 1
    safe_cache = {}

    def safe(mask):
        v = safe_cache.get(mask)
        if v is None:
            v = _mask_safe(mask, pairs)
            safe_cache[mask] = v
        return v

    def subsets(mask):
        bits = [1 << b for b in range(2 * pairs) if mask >> b & 1]
        out = []

        def rec(start, cur, size):
            for b in range(start, len(bits)):
                nxt = cur | bits[b]
                out.append(nxt)
                if size + 1 < capacity:
                    rec(b + 1, nxt, size + 1)

        rec(0, 0, 0)
        return out

    start = (full, 0)  # (left mask, boat side 0=left)
    parent = {start: None}
    q = deque([start])
    while q:
        state = q.popleft()
        left, side = state
        if left == 0:
            trips = []
            cur = state
            while parent[cur] is not None:
                cur, trip_mask = parent[cur]
                trips.append(trip_mask)
            trips.reverse()
            labels = []
            for mask in trips:
                trip = [f"A_{i + 1}" for i in range(pairs) if mask >> i & 1]
                trip += [f"a_{i + 1}" for i in range(pairs) if mask >> (pairs + i) & 1]
                labels.append(trip)
            return labels
        bank = left if side == 0 else full & ~left
        for trip_mask in subsets(bank):
            if not safe(trip_mask):
                continue
            new_left = left & ~trip_mask if side == 0 else left | trip_mask
            if not safe(new_left) or not safe(full & ~new_left):
                continue
            nxt = (new_left, 1 - side)
            if nxt not in parent:
                parent[nxt] = (state, trip_mask)
                q.append(nxt)
    return None


def river_oracle(pairs: int, capacity: int):
    """Shortest trip sequence, or None when the instance is infeasible."""
    if not 1 <= pairs <= ORACLE_MAX_PAIRS:
        raise OracleUnsupported(f"pair count out of oracle range: {pairs}")
    if capacity < 1:
        raise OracleUnsupported(f"capacity must be >= 1: {capacity}")
    return _shortest_trips(pairs, capacity)


class InfeasibleInstance(ValueError):
    """Raised by generation when the requested parameters admit no plan."""


class RiverEnvironment(Environment):
    env_id = "river"
    schema_hint = "list"

    def resolve_params(self, template, seed):
        pairs = template.get("pairs", 0)
        capacity = template.get("capacity", 0)
        if not isinstance(pairs, int) or pairs < 1:
            raise ValueError(f"river requires integer pairs >= 1, got {pairs!r}")
        if not isinstance(capacity, int) or capacity < 2:
            raise ValueError(f"river requires capacity >= 2, got {capacity!r}")
        if river_oracle(pairs, capacity) is None:
            raise InfeasibleInstance(
                f"river instance pairs={pairs} capacity={capacity} has no valid plan"
            )
        return {"pairs": pairs, "capacity": capacity}

    def render_prompt(self, instance):
        p = instance.params
        return SYSTEM_PROMPT, USER_PROMPT.format(pairs=p["pairs"], capacity=p["capacity"])

    def parse(self, raw_text):
        return extract_and_parse(raw_text, self.schema_hint, strict=self.strict_parse)

    def render_candidate(self, candidate):
        body = ", ".join("[" + ", ".join(f"'{x}'" for x in trip) + "]" for trip in candidate)
        return f"Solution: [{body}]"

    def validate(self, instance, candidate):
        return river_validate(instance.params["pairs"], instance.params["capacity"], candidate)

    def oracle(self, instance):
        plan = river_oracle(instance.params["pairs"], instance.params["capacity"])
        if plan is None:
            raise InfeasibleInstance("generated instance unexpectedly infeasible")
        return plan
