"""3x3 cube simulator over facelet strings: exact quarter-turn permutations,
strict move-token parsing, state sanity checks, a simulate-and-compare
validator, and the inverse-scramble reference solver.

Facelet layout: face blocks in the fixed order U, R, F, D, L, B, each block
row-major as seen from outside the face. Solved state is W*9 R*9 G*9 Y*9 O*9
B*9 (bindings U=W, R=R, F=G, D=Y, L=O, B=B).
"""

from __future__ import annotations

import random
import re

from ..core import Environment, Verdict, Violation
from ..parsing import extract_and_parse

FACES = "URFDLB"
COLORS = "WRGYOB"
CUBE_N = 3
SOLVED = "".join(color * 9 for color in COLORS)

MOVE_RE = re.compile(r"^[URFDLB](2|')?$")

SYSTEM_PROMPT = """You are an expert puzzle solver for the 3x3 Rubik's Cube.

Task: given a scramble applied to a solved cube, produce a move sequence that
returns the cube to the solved state.

Notation (quarter-turn metric): the faces are U, D, L, R, F, B. A bare letter
is a 90-degree clockwise turn of that face, a trailing ' is counterclockwise,
and a trailing 2 is a half turn (e.g. R U R' U' F2).

Output format: provide the solution as a single whitespace-separated move
sequence.
Format: Solution: R U R' U' ..."""

USER_PROMPT = """Current puzzle:
Scramble sequence applied to the solved cube: {scramble}

Work out the cube state after the scramble, then provide a move sequence that
solves it, in the required output format."""

# ---------------------------------------------------------------------------
# Permutation tables, constructed geometrically: each facelet has an integer
# 3D center (normal axis +-2, in-face coordinates in {-1,0,1}); a clockwise
# face turn rotates the face's layer about its axis.
# ---------------------------------------------------------------------------

_FACE_AXIS = {"U": (1, 1), "D": (1, -1), "R": (0, 1), "L": (0, -1), "F": (2, 1), "B": (2, -1)}

_ROTATE = {
    "U": lambda p: (-p[2], p[1], p[0]),
    "D": lambda p: (p[2], p[1], -p[0]),
    "R": lambda p: (p[0], p[2], -p[1]),
    "L": lambda p: (p[0], -p[2], p[1]),
    "F": lambda p: (p[1], -p[0], p[2]),
    "B": lambda p: (-p[1], p[0], p[2]),
}


def _facelet_position(face, row, col):
    if face == "U":
        return (-1 + col, 2, -1 + row)
    if face == "D":
        return (-1 + col, -2, 1 - row)
    if face == "R":
        return (2, 1 - row, 1 - col)
    if face == "L":
        return (-2, 1 - row, -1 + col)
    if face == "F":
        return (-1 + col, 1 - row, 2)
    return (1 - col, 1 - row, -2)  # B


def _build_tables():
    positions = []
    index_of = {}
    for face in FACES:
        for row in range(3):
            for col in range(3):
                p = _facelet_position(face, row, col)
                index_of[p] = len(positions)
                positions.append(p)
    tables = {}
    for face in FACES:
        axis, sign = _FACE_AXIS[face]
        rotate = _ROTATE[face]
        dest = list(range(54))
        for i, p in enumerate(positions):
            if p[axis] * sign >= 1:  # the face itself and its adjacent strip layer
                dest[i] = index_of[rotate(p)]
        tables[face] = tuple(dest)
    return tables

_DEST = _build_tables()


def _turn(state, face):
    dest = _DEST[face]
    out = [None] * 54
    for i, ch in enumerate(state):
        out[dest[i]] = ch
    return "".join(out)


def parse_move(token: str):
    """(face, quarter_turns) for a legal token, else None."""
    if not isinstance(token, str) or not MOVE_RE.match(token):
        return None
    face = token[0]
    turns = {"": 1, "2": 2, "'": 3}[token[1:]]
    return face, turns


def cube_apply(state: str, token: str) -> str:
    """Apply one move token; inverses are three quarter turns, doubles two."""
    move = parse_move(token)
    if move is None:
        raise ValueError(f"illegal move token {token!r}")
    face, turns = move
    for _ in range(turns):
        state = _turn(state, face)
    return state


def apply_sequence(state: str, tokens) -> str:
    for token in tokens:
        state = cube_apply(state, token)
    return state


def invert_move(token: str) -> str:
    face, turns = parse_move(token)
    return face + {1: "'", 2: "2", 3: ""}[turns]


def state_issues(label: str, state, n: int = CUBE_N, check_counts: bool = True):
    """Sanity issues for a facelet string: length, alphabet, color counts."""
    issues = []
    if not isinstance(state, str) or len(state) != 6 * n * n:
        issues.append(
            Violation("state_length", f"{label} state length is not {6 * n * n}")
        )
        return issues
    bad = sorted({ch for ch in state if ch not in COLORS})
    if bad:
        issues.append(Violation("state_alphabet", f"{label} state has characters {bad}"))
        return issues
    if check_counts:
        for color in COLORS:
            count = state.count(color)
            if count != n * n:
                issues.append(
                    Violation(
                        "color_count",
                        f"{label} state has {count} {color} facelets, expected {n * n}",
                    )
                )
    return issues


def cube_validate(n: int, start: str, move_tokens, target: str, check_counts: bool = True) -> Verdict:
    """Pipeline: state length, alphabet, optional color counts, token
    legality, simulation, exact final-state equality with the target."""
    issues = state_issues("start", start, n, check_counts)
    issues += state_issues("target", target, n, check_counts)
    if issues:
        return Verdict.failed(issues)
    if isinstance(move_tokens, str):
        move_tokens = move_tokens.split()
    if not isinstance(move_tokens, (list, tuple)):
        return Verdict.failed([Violation("format", "moves are not a token sequence")])
    if n != CUBE_N and move_tokens:
        return Verdict.failed(
            [Violation("format", f"move semantics are defined for n={CUBE_N} only")]
        )
    for idx, token in enumerate(move_tokens, start=1):
        if parse_move(token) is None:
            return Verdict.failed(
                [Violation("illegal_token", f"illegal move token {token!r}", step=idx)]
            )
    state = start
    for token in move_tokens:
        state = cube_apply(state, token)
    if state == target:
        return Verdict.passed()
    mismatches = sum(1 for a, b in zip(state, target) if a != b)
    return Verdict.failed(
        [
            Violation(
                "final_state_mismatch",
                f"simulated end state differs from target at {mismatches} facelets",
                incomplete=True,
            )
        ]
    )


def cube_scramble(length: int, seed, forbid_cancellation: bool = True):
    """Random scramble from solved; with forbid_cancellation, consecutive
    moves never share a face. Returns (tokens, scrambled_state)."""
    if length < 0:
        raise ValueError(f"scramble length must be >= 0: {length}")
    rng = random.Random(("rubik", length, forbid_cancellation, seed).__repr__())
    tokens = []
    prev_face = None
    for _ in range(length):
        choices = [f for f in FACES if not (forbid_cancellation and f == prev_face)]
        face = rng.choice(choices)
        tokens.append(face + rng.choice(["", "'", "2"]))
        prev_face = face
    return tokens, apply_sequence(SOLVED, tokens)


def cube_oracle(scramble_tokens):
    """Reversed, move-wise-inverted scramble; restores the solved state."""
    return [invert_move(t) for t in reversed(scramble_tokens)]


class RubikEnvironment(Environment):
    env_id = "rubik"
    schema_hint = "tokens"

    def resolve_params(self, template, seed):
        length = template["scramble_len"]
        forbid = bool(template.get("forbid_cancellation", True))
        tokens, state = cube_scramble(length, seed, forbid_cancellation=forbid)
        return {
            "n": CUBE_N,
            "scramble": tokens,
            "start": state,
            "target": SOLVED,
            "forbid_cancellation": forbid,
        }

    def render_prompt(self, instance):
        scramble = " ".join(instance.params["scramble"]) or "(no moves)"
        return SYSTEM_PROMPT, USER_PROMPT.format(scramble=scramble)

    def parse(self, raw_text):
        run = extract_and_parse(raw_text, self.schema_hint)
        if isinstance(run, str):
            return run.split()
        return run

    def render_candidate(self, candidate):
        if isinstance(candidate, str):
            candidate = candidate.split()
        return "Solution: " + " ".join(candidate)

    def validate(self, instance, candidate):
        p = instance.params
        return cube_validate(p["n"], p["start"], candidate, p["target"])

    def oracle(self, instance):
        return cube_oracle(instance.params["scramble"])
