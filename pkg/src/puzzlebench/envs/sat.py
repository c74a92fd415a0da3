"""CNF satisfiability: planted-satisfiable generator with clause-ratio
control, clause-level validator, and a DPLL reference solver with unit
propagation."""

from __future__ import annotations

import random

from ..core import Environment, OracleTimeout, OracleUnsupported, Verdict, Violation
from ..parsing import extract_and_parse

ORACLE_MAX_VARS = 60
DEFAULT_NODE_BUDGET = 2_000_000

SYSTEM_PROMPT = """You are an expert in logic and boolean satisfiability.

Task: solve a Boolean SAT problem given in Conjunctive Normal Form (CNF).

Notation:
- Variables are integers (1, 2, 3, ...).
- A positive literal means the variable is True; a negative literal means it
  is False.
- A clause is a list of literals, e.g. [1, -2, 3] means (x1 OR NOT x2 OR x3).
- The formula is a list of clauses; every clause must be satisfied.

Output format: provide the solution as a dictionary mapping every variable id
to a boolean value.
Format: Solution: {1: True, 2: False, 3: True, ...}"""

USER_PROMPT = """Current puzzle:
Total variables: {num_vars}

Clauses:
{clauses}

Work through the constraints step by step, backtracking on conflicts, and
give the final complete assignment in the required output format."""


def normalize_assignment(candidate):
    """Coerce mapping keys to variable ids; values must already be booleans.
    Returns (assignment, violation) where exactly one side is set."""
    if not isinstance(candidate, dict):
        return None, Violation("format", "candidate is not a variable mapping")
    values = {}
    for key, val in candidate.items():
        var = None
        if isinstance(key, bool):
            pass
        elif isinstance(key, int):
            var = key
        elif isinstance(key, str):
            stripped = key.strip()
            if stripped.lstrip("+-").isdigit():
                var = int(stripped)
        if var is None:
            return None, Violation("format", f"assignment key {key!r} is not a variable id")
        if not isinstance(val, bool):
            return None, Violation("format", f"assignment value {val!r} for {var} is not boolean")
        values[var] = val
    return values, None


def sat_validate(clauses, candidate) -> Verdict:
    """Check completeness then satisfaction clause by clause; the first
    violating clause (1-based) names the failure."""
    assignment, violation = normalize_assignment(candidate)
    if violation is not None:
        return Verdict.failed([violation])
    for idx, clause in enumerate(clauses, start=1):
        for lit in clause:
            var = abs(lit)
            if var not in assignment:
                return Verdict.failed(
                    [
                        Violation(
                            "missing_variable",
                            f"variable {var} referenced by clause {idx} is unassigned",
                            step=idx,
                            incomplete=True,
                        )
                    ]
                )
        if not any((lit > 0) == assignment[abs(lit)] for lit in clause):
            return Verdict.failed(
                [Violation("unsatisfied_clause", f"clause {idx} evaluates to false", step=idx)]
            )
    return Verdict.passed()


def sat_generate(num_vars: int, alpha: float, seed, width: int = 3):
    """Planted-satisfiable random CNF: draw a hidden assignment first, then
    resample each clause until it satisfies it. Clause literals are distinct
    in variable; m = round(alpha * num_vars)."""
    if num_vars < width:
        raise ValueError(f"need at least {width} variables, got {num_vars}")
    if not 0 < alpha <= 6:
        raise ValueError(f"alpha out of range (0, 6]: {alpha}")
    rng = random.Random(("sat", num_vars, alpha, width, seed).__repr__())
    hidden = {v: rng.random() < 0.5 for v in range(1, num_vars + 1)}
    m = round(alpha * num_vars)
    clauses = []
    while len(clauses) < m:
        variables = rng.sample(range(1, num_vars + 1), width)
        clause = [v if rng.random() < 0.5 else -v for v in variables]
        if any((lit > 0) == hidden[abs(lit)] for lit in clause):
            clauses.append(clause)
    return clauses, hidden


def _simplify(clauses, var, value):
    """Assign var=value; None signals an empty clause (conflict)."""
    out = []
    true_lit = var if value else -var
    for clause in clauses:
        if true_lit in clause:
            continue
        reduced = [lit for lit in clause if abs(lit) != var]
        if not reduced:
            return None
        out.append(reduced)
    return out


def sat_oracle(num_vars: int, clauses, node_budget: int = DEFAULT_NODE_BUDGET):
    """DPLL with unit propagation. Returns a satisfying assignment dict or
    None for unsatisfiable; raises OracleTimeout past the node budget."""
    if num_vars > ORACLE_MAX_VARS:
        raise OracleUnsupported(f"variable count beyond oracle bound: {num_vars}")
    for clause in clauses:
        if not clause:
            return None
        for lit in clause:
            if lit == 0 or abs(lit) > num_vars:
                raise ValueError(f"literal {lit} out of range for {num_vars} variables")

    budget = [node_budget]

    def dpll(clauses, assignment):
        budget[0] -= 1
        if budget[0] < 0:
            raise OracleTimeout("DPLL node budget exceeded")
        while True:
            unit = next((c[0] for c in clauses if len(c) == 1), None)
            if unit is None:
                break
            assignment[abs(unit)] = unit > 0
            clauses = _simplify(clauses, abs(unit), unit > 0)
            if clauses is None:
                return None
        if not clauses:
            return assignment
        counts = {}
        for clause in clauses:
            weight = 2.0 ** -len(clause)
            for lit in clause:
                counts[lit] = counts.get(lit, 0.0) + weight
        lit = max(counts, key=lambda l: (counts[l], -abs(l), l > 0))
        for value in ((lit > 0), not (lit > 0)):
            nxt = _simplify(clauses, abs(lit), value)
            if nxt is None:
                continue
            trial = dict(assignment)
            trial[abs(lit)] = value
            result = dpll(nxt, trial)
            if result is not None:
                return result
        return None

    result = dpll([list(c) for c in clauses], {})
    if result is None:
        return None
    for v in range(1, num_vars + 1):  # free variables default False
        result.setdefault(v, False)
    return result


class SatEnvironment(Environment):
    env_id = "sat"
    schema_hint = "mapping"

    def resolve_params(self, template, seed):
        num_vars = template["num_vars"]
        alpha = template.get("alpha", 3.0)
        width = template.get("width", 3)
        clauses, _ = sat_generate(num_vars, alpha, seed, width=width)
        return {"num_vars": num_vars, "alpha": alpha, "width": width, "clauses": clauses}

    def render_prompt(self, instance):
        p = instance.params
        clause_text = "[" + ", ".join(str(c) for c in p["clauses"]) + "]"
        return SYSTEM_PROMPT, USER_PROMPT.format(num_vars=p["num_vars"], clauses=clause_text)

    def parse(self, raw_text):
        return extract_and_parse(raw_text, self.schema_hint, strict=self.strict_parse)

    def render_candidate(self, candidate):
        body = ", ".join(f"{v}: {candidate[v]}" for v in sorted(candidate))
        return "Solution: {" + body + "}"

    def validate(self, instance, candidate):
        return sat_validate(instance.params["clauses"], candidate)

    def oracle(self, instance):
        p = instance.params
        assignment = sat_oracle(p["num_vars"], p["clauses"])
        if assignment is None:
            raise ValueError("planted instance unexpectedly unsatisfiable")
        return assignment
