"""Generalized N x N sudoku: region systems (jigsaw, rectangular, inferred
square blocks), a pipeline validator, a backtracking solver with candidate
elimination, and a clue-removal generator."""

from __future__ import annotations

import math
import random

from ..core import Environment, OracleTimeout, OracleUnsupported, Verdict, Violation
from ..parsing import extract_and_parse

ORACLE_MAX_N = 16
DEFAULT_NODE_BUDGET = 4_000_000

SYSTEM_PROMPT = """You are an expert logic puzzle solver.

Task: solve a standard 9x9 sudoku puzzle.

Input format: the puzzle is a single string of 81 digits, read row by row
(left to right, top to bottom). 0 marks an empty cell; 1-9 are filled cells.

Output format: provide the solution as a single string of 81 digits with no
spaces or newlines.
Format: Solution: [81_DIGIT_STRING]

Goal: fill all empty cells so that every row, column, and 3x3 box contains
the digits 1-9 exactly once."""

USER_PROMPT = """Current puzzle:
{puzzle}

Track the valid candidates for each cell step by step, then provide the final
solved string in the required output format."""

GENERAL_SYSTEM_PROMPT = """You are an expert logic puzzle solver.

Task: solve an {n}x{n} sudoku puzzle.

Input format: the puzzle is given row by row as comma-separated integers;
0 marks an empty cell and 1-{n} are filled cells.

Output format: provide the solution as a list of {n} rows, each a list of
{n} integers.
Format: Solution: [[...], [...], ...]

Goal: fill all empty cells so that every row, column, and region contains the
digits 1-{n} exactly once."""

GENERAL_USER_PROMPT = """Current puzzle (0 = blank):
{puzzle}

Track the valid candidates for each cell step by step, then provide the
completed grid in the required output format."""


class RegionError(ValueError):
    """The instance's region system is not a valid partition."""


def build_regions(n: int, regions_grid=None, block_shape=None):
    """Region id for every cell: jigsaw ids, else rectangular tiling, else
    inferred square blocks. Raises RegionError on any count/size discrepancy."""
    if regions_grid is not None:
        if len(regions_grid) != n or any(len(row) != n for row in regions_grid):
            raise RegionError(f"region grid is not {n}x{n}")
        cells = {}
        for r in range(n):
            for c in range(n):
                cells.setdefault(regions_grid[r][c], []).append((r, c))
        if len(cells) != n:
            raise RegionError(f"expected {n} regions, found {len(cells)}")
        for rid, members in cells.items():
            if len(members) != n:
                raise RegionError(f"region {rid!r} covers {len(members)} cells, expected {n}")
        return [[regions_grid[r][c] for c in range(n)] for r in range(n)]
    if block_shape is not None:
        br, bc = block_shape
        if br < 1 or bc < 1 or br * bc != n:
            raise RegionError(f"block shape {br}x{bc} does not tile side {n}")
        return [[(r // br) * (n // bc) + (c // bc) for c in range(n)] for r in range(n)]
    root = math.isqrt(n)
    if root * root != n:
        raise RegionError(f"side {n} is not a perfect square and no region system was given")
    return build_regions(n, block_shape=(root, root))


def region_cells(n: int, regions_grid=None, block_shape=None):
    """The n cell-sets of the region partition."""
    grid = build_regions(n, regions_grid, block_shape)
    out = {}
    for r in range(n):
        for c in range(n):
            out.setdefault(grid[r][c], set()).add((r, c))
    return [out[k] for k in sorted(out, key=lambda x: str(x))]


def coerce_grid(candidate, n: int):
    """Digit string / flat list / row list -> n x n integer grid, or None."""
    if isinstance(candidate, str):
        text = candidate.strip()
        if len(text) != n * n or not text.isdigit() or n > 9:
            return None
        flat = [int(ch) for ch in text]
    elif isinstance(candidate, (list, tuple)):
        if len(candidate) == n and all(isinstance(row, (list, tuple)) for row in candidate):
            if any(len(row) != n for row in candidate):
                return None
            flat = [x for row in candidate for x in row]
        elif len(candidate) == n * n:
            flat = list(candidate)
        else:
            return None
        if any(isinstance(x, bool) or not isinstance(x, int) for x in flat):
            return None
    else:
        return None
    return [flat[r * n : (r + 1) * n] for r in range(n)]


def sudoku_validate(
    n: int,
    grid,
    puzzle=None,
    regions_grid=None,
    block_shape=None,
    allow_zeros: bool = True,
    require_complete: bool = False,
) -> Verdict:
    """Pipeline: shapes, region partition, digit domain, clue agreement, then
    duplicate checks over rows, columns, and regions (blanks ignored).
    Structural failures end the pipeline; later steps collect all issues."""
    coerced = coerce_grid(grid, n)
    if coerced is None:
        return Verdict.failed([Violation("shape", f"grid is not a valid {n}x{n} layout")])
    grid = coerced
    try:
        regions = build_regions(n, regions_grid, block_shape)
    except RegionError as exc:
        return Verdict.failed([Violation("region_system", str(exc))])
    issues = []
    blanks = []
    for r in range(n):
        for c in range(n):
            v = grid[r][c]
            if v == 0:
                blanks.append((r, c))
                if not allow_zeros and not require_complete:
                    issues.append(Violation("digit_domain", f"blank at ({r},{c}) not allowed"))
            elif not 1 <= v <= n:
                issues.append(Violation("digit_domain", f"value {v} at ({r},{c}) outside 1..{n}"))
    if require_complete and blanks:
        issues.append(
            Violation(
                "incomplete_grid",
                f"{len(blanks)} blank cells remain",
                incomplete=True,
            )
        )
    if puzzle is not None:
        for r in range(n):
            for c in range(n):
                clue = puzzle[r][c]
                if clue != 0 and grid[r][c] != clue:
                    issues.append(
                        Violation(
                            "clue_mismatch",
                            f"clue {clue} at ({r},{c}) was changed to {grid[r][c]}",
                        )
                    )

    def check_unit(kind, index, values):
        seen = {}
        for pos, v in values:
            if v == 0 or not 1 <= v <= n:
                continue
            if v in seen:
                issues.append(
                    Violation(f"duplicate_{kind}", f"digit {v} repeats in {kind} {index}")
                )
            else:
                seen[v] = pos

    for r in range(n):
        check_unit("row", r, [((r, c), grid[r][c]) for c in range(n)])
    for c in range(n):
        check_unit("column", c, [((r, c), grid[r][c]) for r in range(n)])
    by_region = {}
    for r in range(n):
        for c in range(n):
            by_region.setdefault(regions[r][c], []).append(((r, c), grid[r][c]))
    for rid in sorted(by_region, key=lambda x: str(x)):
        check_unit("region", rid, by_region[rid])
    if issues:
        return Verdict.failed(issues)
    return Verdict.passed()


def solve_grid(
    n: int,
    puzzle,
    regions_grid=None,
    block_shape=None,
    rng=None,
    limit: int = 1,
    node_budget: int = DEFAULT_NODE_BUDGET,
):
    """Backtracking with per-unit candidate elimination and fewest-candidates
    cell selection. Returns (solutions, backtrack_count); `limit` bounds the
    number of completions searched for (2 suffices for uniqueness checks)."""
    if n > ORACLE_MAX_N:
        raise OracleUnsupported(f"side {n} beyond solver bound {ORACLE_MAX_N}")
    regions = build_regions(n, regions_grid, block_shape)
    grid = [list(row) for row in puzzle]
    rows = [set() for _ in range(n)]
    cols = [set() for _ in range(n)]
    regs = {}
    for r in range(n):
        for c in range(n):
            v = grid[r][c]
            if v == 0:
                continue
            rid = regions[r][c]
            if v in rows[r] or v in cols[c] or v in regs.get(rid, set()):
                return [], 0  # contradictory givens
            rows[r].add(v)
            cols[c].add(v)
            regs.setdefault(rid, set()).add(v)
    for rid in set(x for row in regions for x in row):
        regs.setdefault(rid, set())

    digits = list(range(1, n + 1))
    solutions = []
    stats = {"nodes": 0, "backtracks": 0}

    def best_cell():
        best = None
        for r in range(n):
            for c in range(n):
                if grid[r][c] != 0:
                    continue
                cand = [
                    d
                    for d in digits
                    if d not in rows[r] and d not in cols[c] and d not in regs[regions[r][c]]
                ]
                if best is None or len(cand) < len(best[2]):
                    best = (r, c, cand)
                    if len(cand) <= 1:
                        return best
        return best

    def backtrack():
        stats["nodes"] += 1
        if stats["nodes"] > node_budget:
            raise OracleTimeout("sudoku node budget exceeded")
        cell = best_cell()
        if cell is None:
            solutions.append([list(row) for row in grid])
            return len(solutions) >= limit
        r, c, cand = cell
        if rng is not None:
            cand = list(cand)
            rng.shuffle(cand)
        rid = regions[r][c]
        for d in cand:
            grid[r][c] = d
            rows[r].add(d)
            cols[c].add(d)
            regs[rid].add(d)
            if backtrack():
                return True
            grid[r][c] = 0
            rows[r].remove(d)
            cols[c].remove(d)
            regs[rid].remove(d)
            stats["backtracks"] += 1
        return False

    backtrack()
    return solutions, stats["backtracks"]


def sudoku_oracle(n, puzzle, regions_grid=None, block_shape=None):
    """A completed grid passing full validation, or None when none exists."""
    solutions, _ = solve_grid(n, puzzle, regions_grid, block_shape, limit=1)
    return solutions[0] if solutions else None


def sudoku_generate(n: int, givens: int, seed, unique: bool = False):
    """Build a full valid grid by randomized backtracking, then remove cells
    until `givens` remain. With `unique`, a removal is kept only while the
    puzzle still has exactly one completion."""
    if not 0 <= givens <= n * n:
        raise ValueError(f"givens out of range 0..{n * n}: {givens}")
    rng = random.Random(("sudoku", n, givens, unique, seed).__repr__())
    empty = [[0] * n for _ in range(n)]
    solutions, _ = solve_grid(n, empty, rng=rng)
    full = solutions[0]
    puzzle = [list(row) for row in full]
    cells = [(r, c) for r in range(n) for c in range(n)]
    rng.shuffle(cells)
    removed = 0
    target = n * n - givens
    for r, c in cells:
        if removed == target:
            break
        saved = puzzle[r][c]
        puzzle[r][c] = 0
        if unique:
            found, _ = solve_grid(n, puzzle, limit=2)
            if len(found) != 1:
                puzzle[r][c] = saved
                continue
        removed += 1
    return puzzle, full


class SudokuEnvironment(Environment):
    env_id = "sudoku"
    schema_hint = "digits"

    def resolve_params(self, template, seed):
        n = template.get("n", 9)
        givens = template["givens"]
        unique = bool(template.get("unique", False))
        puzzle, _ = sudoku_generate(n, givens, seed, unique=unique)
        params = {"n": n, "givens": givens, "puzzle": puzzle}
        if template.get("block_shape"):
            params["block_shape"] = list(template["block_shape"])
        return params

    def _shapes(self, params):
        block = params.get("block_shape")
        return params.get("regions"), tuple(block) if block else None

    def render_prompt(self, instance):
        p = instance.params
        n = p["n"]
        if n == 9:
            flat = "".join(str(v) for row in p["puzzle"] for v in row)
            return SYSTEM_PROMPT, USER_PROMPT.format(puzzle=flat)
        rows = "\n".join(", ".join(str(v) for v in row) for row in p["puzzle"])
        return (
            GENERAL_SYSTEM_PROMPT.format(n=n),
            GENERAL_USER_PROMPT.format(puzzle=rows),
        )

    def parse(self, raw_text):
        return extract_and_parse(raw_text, self.schema_hint)

    def render_candidate(self, candidate):
        if isinstance(candidate, str):
            return f"Solution: {candidate}"
        n = len(candidate)
        if n == 9:
            return "Solution: " + "".join(str(v) for row in candidate for v in row)
        body = ", ".join("[" + ", ".join(str(v) for v in row) + "]" for row in candidate)
        return f"Solution: [{body}]"

    def validate(self, instance, candidate):
        p = instance.params
        regions_grid, block_shape = self._shapes(p)
        return sudoku_validate(
            p["n"],
            candidate,
            puzzle=p["puzzle"],
            regions_grid=regions_grid,
            block_shape=block_shape,
            allow_zeros=False,
            require_complete=True,
        )

    def oracle(self, instance):
        p = instance.params
        regions_grid, block_shape = self._shapes(p)
        grid = sudoku_oracle(p["n"], p["puzzle"], regions_grid, block_shape)
        if grid is None:
            raise ValueError("generated puzzle unexpectedly unsolvable")
        if p["n"] == 9:
            return "".join(str(v) for row in grid for v in row)
        return grid
