"""One-dimensional checker jumping: board simulator, validator, and BFS
shortest-plan reference solver (length (n+1)^2 - 1)."""

from __future__ import annotations

from collections import deque
from functools import lru_cache

from ..core import Environment, OracleUnsupported, Verdict, Violation
from ..parsing import extract_and_parse

# cell encoding: red checkers 1, empty 0, blue checkers 2
RED, EMPTY, BLUE = 1, 0, 2

ORACLE_MAX_N = 6

SYSTEM_PROMPT = """You are a helpful assistant. Solve this puzzle for me.

Problem: on a one-dimensional board there are red checkers (R), blue
checkers (B), and one empty space (_). A checker can move by either:
- sliding forward into an adjacent empty space, or
- jumping over exactly one checker of the opposite color to land in an empty space.

Movement rules:
- Red checkers move to the right.
- Blue checkers move to the left.
- Backward moves are not allowed.

Goal: swap the positions of all red and blue checkers (all blue on the left,
all red on the right).

Output format: provide the solution as a list of moves.
Format: moves = [[Color, from_index, to_index], ...]
Example: [['R', 0, 1], ['B', 2, 0], ...]
Indices are 0-based."""

USER_PROMPT = """Current puzzle: {n} checkers of each color.

Initial board: {n} red (left), one empty space, {n} blue (right).
Total size: {size}

N = {n}

Find the minimum sequence of moves that transforms the initial board into the
goal board (all blue on the left, all red on the right)."""


def start_board(n: int):
    return [RED] * n + [EMPTY] + [BLUE] * n


def goal_board(n: int):
    return [BLUE] * n + [EMPTY] + [RED] * n


def _coerce_move(move):
    if not isinstance(move, (list, tuple)) or len(move) != 3:
        return None
    color, i, j = move
    if not isinstance(color, str):
        return None
    color = color.strip().upper()
    if color not in ("R", "B"):
        return None
    if isinstance(i, bool) or isinstance(j, bool):
        return None
    if not isinstance(i, int) or not isinstance(j, int):
        return None
    return color, i, j


def checker_validate(n: int, moves, strict_opposite_color: bool = False) -> Verdict:
    """Simulate from [R^n, _, B^n]; first illegal move fails; Pass iff the
    final board is the mirrored goal.

    By default a jump only requires a non-empty midpoint; the
    strict_opposite_color flag additionally requires the jumped checker to be
    the opposing color.
    """
    if not isinstance(moves, (list, tuple)):
        return Verdict.failed([Violation("format", "candidate is not a move list")])
    board = start_board(n)
    size = len(board)
    for idx, raw in enumerate(moves, start=1):
        coerced = _coerce_move(raw)
        if coerced is None:
            return Verdict.failed([Violation("format", f"malformed move {raw!r}", step=idx)])
        color, i, j = coerced
        col = RED if color == "R" else BLUE
        if not (0 <= i < size and 0 <= j < size):
            return Verdict.failed(
                [Violation("out_of_bounds", f"indices {i}->{j} outside 0..{size - 1}", step=idx)]
            )
        if board[i] != col:
            return Verdict.failed(
                [Violation("wrong_source", f"cell {i} does not hold a {color} checker", step=idx)]
            )
        if board[j] != EMPTY:
            return Verdict.failed(
                [Violation("destination_occupied", f"cell {j} is not empty", step=idx)]
            )
        direction = 1 if col == RED else -1
        delta = j - i
        if delta * direction < 0:
            return Verdict.failed(
                [Violation("backward_move", f"{color} checker may not move backward", step=idx)]
            )
        if abs(delta) == 2:
            mid = board[(i + j) // 2]
            if mid == EMPTY:
                return Verdict.failed(
                    [Violation("jump_over_empty", "jump must pass over a checker", step=idx)]
                )
            if strict_opposite_color and mid == col:
                return Verdict.failed(
                    [
                        Violation(
                            "jump_over_own_color",
                            "jump must pass over an opposing checker",
                            step=idx,
                        )
                    ]
                )
        if abs(delta) not in (1, 2):
            return Verdict.failed(
                [Violation("bad_distance", f"move distance {abs(delta)} not in {{1,2}}", step=idx)]
            )
        board[j] = board[i]
        board[i] = EMPTY
    if board == goal_board(n):
        return Verdict.passed()
    return Verdict.failed(
        [Violation("goal_not_reached", "final board is not the mirrored goal", incomplete=True)]
    )


@lru_cache(maxsize=None)
def _shortest_plan(n: int):
    start = tuple(start_board(n))
    goal = tuple(goal_board(n))
    parent = {start: None}
    q = deque([start])
    while q:
        board = q.popleft()
        if board == goal:
            plan = []
            cur = board
            while parent[cur] is not None:
                cur, move = parent[cur]
                plan.append(move)
            return plan[::-1]
        empty = board.index(EMPTY)
        for i, cell in enumerate(board):
            if cell == EMPTY:
                continue
            direction = 1 if cell == RED else -1
            delta = empty - i
            if delta * direction < 0 or abs(delta) not in (1, 2):
                continue
            if abs(delta) == 2 and board[(i + empty) // 2] == EMPTY:
                continue
            nxt = list(board)
            nxt[empty] = cell
            nxt[i] = EMPTY
            nxt = tuple(nxt)
            if nxt not in parent:
                color = "R" if cell == RED else "B"
                parent[nxt] = (board, [color, i, empty])
                q.append(nxt)
    return None


def checker_oracle(n: int):
    """Breadth-first search over boards; shortest plan of length (n+1)^2 - 1."""
    if not 1 <= n <= ORACLE_MAX_N:
        raise OracleUnsupported(f"checker board too large for BFS oracle: n={n}")
    plan = _shortest_plan(n)
    if plan is None:
        raise OracleUnsupported(f"no plan found for n={n}")  # unreachable for valid n
    return [list(m) for m in plan]


class CheckerEnvironment(Environment):
    env_id = "checker"
    schema_hint = "list"

    def __init__(self, strict_opposite_color: bool = False):
        self.strict_opposite_color = strict_opposite_color

    def resolve_params(self, template, seed):
        n = template.get("n", 0)
        if not isinstance(n, int) or n < 1:
            raise ValueError(f"checker requires integer n >= 1, got {n!r}")
        return {"n": n}

    def render_prompt(self, instance):
        n = instance.params["n"]
        return SYSTEM_PROMPT, USER_PROMPT.format(n=n, size=2 * n + 1)

    def parse(self, raw_text):
        return extract_and_parse(raw_text, self.schema_hint, strict=self.strict_parse)

    def render_candidate(self, candidate):
        body = ", ".join(f"['{c}', {i}, {j}]" for c, i, j in candidate)
        return f"moves = [{body}]"

    def validate(self, instance, candidate):
        return checker_validate(
            instance.params["n"], candidate, strict_opposite_color=self.strict_opposite_color
        )

    def oracle(self, instance):
        return checker_oracle(instance.params["n"])
