"""Tower of Hanoi: generator, step-exact validator, and the recursive
optimal-solution reference solver (length 2^n - 1)."""

from __future__ import annotations

from ..core import Environment, OracleUnsupported, Verdict, Violation
from ..parsing import extract_and_parse

PEGS = ("A", "B", "C")

ORACLE_MAX_DISKS = 20

SYSTEM_PROMPT = """You are an expert in recursive planning puzzles.

Task: solve the Tower of Hanoi puzzle.

Rules:
1. There are 3 pegs: Peg A (source), Peg B (auxiliary), Peg C (target).
2. N disks of distinct sizes start stacked on Peg A, smallest on top.
3. Move one disk at a time, always the top disk of its peg.
4. A larger disk may never be placed on top of a smaller disk.

Output format: provide the solution as a list of moves.
Format: Solution: [[Disk, From, To], [Disk, From, To], ...]
Example: Solution: [[1, 'A', 'C'], [2, 'A', 'B'], ...]"""

USER_PROMPT = """Current puzzle:
Number of disks N = {n}

Goal: move all disks from Peg A to Peg C.

Work out the move sequence step by step, tracking every disk, then give the
complete move list in the required output format."""


def hanoi_oracle(n: int):
    """Classic recursive transfer of n disks from A to C; exactly 2^n - 1 moves."""
    if not 1 <= n <= ORACLE_MAX_DISKS:
        raise OracleUnsupported(f"disk count out of oracle range: {n}")
    moves = []

    def rec(k, src, dst, aux):
        if k == 0:
            return
        rec(k - 1, src, aux, dst)
        moves.append([k, src, dst])
        rec(k - 1, aux, dst, src)

    rec(n, "A", "C", "B")
    return moves


def _coerce_move(move):
    """Normalize one [disk, from, to] entry; None if malformed."""
    if not isinstance(move, (list, tuple)) or len(move) != 3:
        return None
    disk, src, dst = move
    if isinstance(disk, bool) or not isinstance(disk, int):
        return None
    if not isinstance(src, str) or not isinstance(dst, str):
        return None
    src, dst = src.strip().upper(), dst.strip().upper()
    if src not in PEGS or dst not in PEGS or src == dst:
        return None
    return disk, src, dst


def hanoi_validate(n: int, moves) -> Verdict:
    """Simulate from A=[n..1]; reject at the first illegal move; Pass iff the
    final state is C=[n..1] with A and B empty."""
    if not isinstance(moves, (list, tuple)):
        return Verdict.failed([Violation("format", "candidate is not a move list")])
    pegs = {"A": list(range(n, 0, -1)), "B": [], "C": []}
    for idx, raw in enumerate(moves, start=1):
        coerced = _coerce_move(raw)
        if coerced is None:
            return Verdict.failed(
                [Violation("format", f"malformed move {raw!r}", step=idx)]
            )
        disk, src, dst = coerced
        if not pegs[src]:
            return Verdict.failed(
                [Violation("empty_source", f"peg {src} is empty", step=idx)]
            )
        top = pegs[src][-1]
        if disk != top:
            return Verdict.failed(
                [
                    Violation(
                        "disk_not_on_top",
                        f"declared disk {disk} but top of {src} is {top}",
                        step=idx,
                    )
                ]
            )
        if pegs[dst] and pegs[dst][-1] < disk:
            return Verdict.failed(
                [
                    Violation(
                        "larger_on_smaller",
                        f"cannot place disk {disk} on smaller disk {pegs[dst][-1]}",
                        step=idx,
                    )
                ]
            )
        pegs[src].pop()
        pegs[dst].append(disk)
    if pegs["C"] == list(range(n, 0, -1)) and not pegs["A"] and not pegs["B"]:
        return Verdict.passed()
    return Verdict.failed(
        [
            Violation(
                "goal_not_reached",
                f"final state A={pegs['A']} B={pegs['B']} C={pegs['C']} is not the goal",
                incomplete=True,
            )
        ]
    )


class HanoiEnvironment(Environment):
    env_id = "hanoi"
    schema_hint = "list"

    def resolve_params(self, template, seed):
        n = template.get("n", 0)
        if not isinstance(n, int) or n < 1:
            raise ValueError(f"hanoi requires integer n >= 1, got {n!r}")
        return {"n": n}

    def render_prompt(self, instance):
        return SYSTEM_PROMPT, USER_PROMPT.format(n=instance.params["n"])

    def parse(self, raw_text):
        return extract_and_parse(raw_text, self.schema_hint, strict=self.strict_parse)

    def render_candidate(self, candidate):
        body = ", ".join(f"[{d}, '{s}', '{t}']" for d, s, t in candidate)
        return f"Solution: [{body}]"

    def validate(self, instance, candidate):
        return hanoi_validate(instance.params["n"], candidate)

    def oracle(self, instance):
        return hanoi_oracle(instance.params["n"])
