"""Graph coloring: planted-colorable generator with density control, an
issue-collecting validator (reports every conflict, not just the first), and
a backtracking reference solver with most-constrained-vertex ordering."""

from __future__ import annotations

import random

from ..core import Environment, OracleTimeout, OracleUnsupported, Verdict, Violation
from ..parsing import extract_and_parse

DEFAULT_PALETTE = ("Red", "Green", "Blue")

ORACLE_MAX_VERTICES = 60
DEFAULT_NODE_BUDGET = 2_000_000

SYSTEM_PROMPT = """You are an expert in graph theory and constraint satisfaction
problems.

Task: solve a graph coloring problem. Assign a color to every node so that no
two connected nodes share the same color.

Input format:
- Nodes: integers 0 to N-1.
- Allowed colors: a fixed list of color names.
- Edges: a list of pairs (u, v).

Output format: provide the result as a list of assignments.
Format: Solution: [(Node, Color), (Node, Color), ...]

Use ONLY the allowed colors and do not violate any edge constraint."""

USER_PROMPT = """Current graph:
Nodes: 0 to {max_node}
Allowed colors: {palette}
Edges:
{edges}

Assign colors step by step, checking every constraint, then provide the final
assignment list in the required output format."""


def _normalize_color(value):
    return value.strip().lower() if isinstance(value, str) else value


def candidate_to_mapping(candidate):
    """Pair-list or mapping candidate -> {vertex: color}. A vertex repeated
    with conflicting colors is a format violation."""
    if isinstance(candidate, dict):
        items = list(candidate.items())
    elif isinstance(candidate, (list, tuple)):
        items = []
        for entry in candidate:
            if not isinstance(entry, (list, tuple)) or len(entry) != 2:
                return None, Violation("format", f"entry {entry!r} is not a (node, color) pair")
            items.append((entry[0], entry[1]))
    else:
        return None, Violation("format", "candidate is neither a pair list nor a mapping")
    mapping = {}
    for node, color in items:
        if isinstance(node, bool) or not isinstance(node, int):
            return None, Violation("format", f"node {node!r} is not an integer")
        if node in mapping and _normalize_color(mapping[node]) != _normalize_color(color):
            return None, Violation("format", f"node {node} assigned conflicting colors")
        mapping[node] = color
    return mapping, None


def gc_validate(
    num_vertices: int,
    edges,
    candidate,
    palette=None,
    k_max: int = None,
    k_exact: int = None,
    allow_self_loops: bool = False,
) -> Verdict:
    """Collect every issue: missing/unknown vertices, off-palette colors,
    optional color-count bounds, edge sanity, and every monochromatic edge."""
    mapping, violation = candidate_to_mapping(candidate)
    if violation is not None:
        return Verdict.failed([violation])
    issues = []
    vertices = set(range(num_vertices))
    missing = sorted(vertices - set(mapping))
    if missing:
        issues.append(
            Violation("missing_vertex", f"vertices {missing} have no color", incomplete=True)
        )
    extra = sorted(set(mapping) - vertices)
    if extra:
        issues.append(Violation("unknown_vertex", f"unknown vertices {extra} colored"))
    norm = {v: _normalize_color(c) for v, c in mapping.items()}
    if palette is not None:
        allowed = {_normalize_color(c) for c in palette}
        off = sorted(v for v in mapping if v in vertices and norm[v] not in allowed)
        if off:
            issues.append(
                Violation("off_palette", f"vertices {off} use colors outside the palette")
            )
    used = {norm[v] for v in mapping if v in vertices}
    if k_max is not None and len(used) > k_max:
        issues.append(Violation("too_many_colors", f"{len(used)} colors used, at most {k_max} allowed"))
    if k_exact is not None and len(used) != k_exact:
        issues.append(
            Violation("wrong_color_count", f"{len(used)} colors used, exactly {k_exact} required")
        )
    for u, v in edges:
        if u not in vertices or v not in vertices:
            issues.append(Violation("edge_unknown_vertex", f"edge ({u},{v}) references an unknown vertex"))
            continue
        if u == v:
            if not allow_self_loops:
                issues.append(Violation("self_loop", f"self-loop on vertex {u}"))
            continue
        if u in norm and v in norm and norm[u] == norm[v]:
            issues.append(Violation("conflict", f"conflict on edge ({u},{v})"))
    if issues:
        return Verdict.failed(issues)
    return Verdict.passed()


def gc_generate(num_vertices: int, density: float, colors: int, seed):
    """Planted-colorable graph: balance vertices over `colors` parts and
    sample edges only between distinct parts. Returns (edges, planted_parts)."""
    if colors < 2 or num_vertices < colors:
        raise ValueError(f"need n >= k >= 2, got n={num_vertices} k={colors}")
    if not 0 < density <= 1:
        raise ValueError(f"density out of (0, 1]: {density}")
    rng = random.Random(("graphcolor", num_vertices, density, colors, seed).__repr__())
    order = list(range(num_vertices))
    rng.shuffle(order)
    part_of = {v: i % colors for i, v in enumerate(order)}
    cross = [
        (u, v)
        for u in range(num_vertices)
        for v in range(u + 1, num_vertices)
        if part_of[u] != part_of[v]
    ]
    m = round(density * num_vertices * (num_vertices - 1) / 2)
    if m > len(cross):
        raise ValueError(
            f"density {density} needs {m} edges but only {len(cross)} cross-part pairs exist"
        )
    edges = sorted(rng.sample(cross, m))
    return [list(e) for e in edges], part_of


def gc_oracle(num_vertices: int, edges, palette, node_budget: int = DEFAULT_NODE_BUDGET):
    """Backtracking with most-constrained-vertex (saturation) ordering.
    Returns a coloring dict or None when exhaustive search proves none."""
    if num_vertices > ORACLE_MAX_VERTICES:
        raise OracleUnsupported(f"vertex count beyond oracle bound: {num_vertices}")
    palette = list(palette)
    adjacency = {v: set() for v in range(num_vertices)}
    for u, v in edges:
        if u == v:
            return None  # self-loop can never be properly colored
        adjacency[u].add(v)
        adjacency[v].add(u)

    coloring = {}
    budget = [node_budget]

    def saturation(v):
        return len({coloring[u] for u in adjacency[v] if u in coloring})

    def backtrack():
        budget[0] -= 1
        if budget[0] < 0:
            raise OracleTimeout("coloring node budget exceeded")
        uncolored = [v for v in range(num_vertices) if v not in coloring]
        if not uncolored:
            return True
        v = max(uncolored, key=lambda u: (saturation(u), len(adjacency[u]), -u))
        taken = {coloring[u] for u in adjacency[v] if u in coloring}
        for color in palette:
            if color in taken:
                continue
            coloring[v] = color
            if backtrack():
                return True
            del coloring[v]
        return False

    return dict(coloring) if backtrack() else None


class GraphColorEnvironment(Environment):
    env_id = "graphcolor"
    schema_hint = "list"

    def resolve_params(self, template, seed):
        n = template["n"]
        density = template.get("density", 0.3)
        colors = template.get("colors", 3)
        palette = list(template.get("palette", DEFAULT_PALETTE[:colors]))
        if len(palette) != colors:
            raise ValueError(f"palette size {len(palette)} != color count {colors}")
        edges, _ = gc_generate(n, density, colors, seed)
        return {"n": n, "density": density, "palette": palette, "edges": edges}

    def render_prompt(self, instance):
        p = instance.params
        edge_text = "[" + ", ".join(f"({u}, {v})" for u, v in p["edges"]) + "]"
        return SYSTEM_PROMPT, USER_PROMPT.format(
            max_node=p["n"] - 1, palette=", ".join(p["palette"]), edges=edge_text
        )

    def parse(self, raw_text):
        return extract_and_parse(raw_text, self.schema_hint, strict=self.strict_parse)

    def render_candidate(self, candidate):
        if isinstance(candidate, dict):
            items = sorted(candidate.items())
        else:
            items = [tuple(e) for e in candidate]
        body = ", ".join(f"({v}, '{c}')" for v, c in items)
        return f"Solution: [{body}]"

    def validate(self, instance, candidate):
        p = instance.params
        return gc_validate(p["n"], p["edges"], candidate, palette=p["palette"])

    def oracle(self, instance):
        p = instance.params
        coloring = gc_oracle(p["n"], p["edges"], p["palette"])
        if coloring is None:
            raise ValueError("planted instance unexpectedly uncolorable")
        return coloring
