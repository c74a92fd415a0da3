"""Cryptarithmetic (alphametic) puzzles: equation parsing, full-constraint
validation with exact base-10 arithmetic, a column/carry-pruned exhaustive
reference solver, and a planted generator."""

from __future__ import annotations

import random
import re

from ..core import Environment, Verdict, Violation
from ..parsing import extract_and_parse

WORD_RE = re.compile(r"[A-Za-z]+")

SYSTEM_PROMPT = """You are an expert in constraint satisfaction problems and
mathematical puzzles.

Task: solve a cryptarithmetic (verbal arithmetic) puzzle.

Rules:
1. Each letter stands for a single digit 0-9.
2. No two different letters may stand for the same digit.
3. The leading letter of a word cannot be 0.
4. The decoded arithmetic equation must hold exactly.

Output format: provide the solution as a letter-to-digit mapping.
Format: Solution: {'A': 1, 'B': 2, ...}"""

USER_PROMPT = """Current puzzle:
{equation}

Deduce the digit for every letter without violating any constraint, then give
the final mapping in the required output format."""


class EquationError(ValueError):
    """Malformed equation text (zero addends, multi-word right side, ...)."""


def parse_equation(text: str):
    """Normalize and split an equation into (addends, result, letters)."""
    if not isinstance(text, str) or "=" not in text:
        raise EquationError(f"equation must contain '=': {text!r}")
    lhs, _, rhs = text.partition("=")
    if "=" in rhs:
        raise EquationError("equation must contain exactly one '='")
    addends = [w.upper() for w in WORD_RE.findall(lhs)]
    results = [w.upper() for w in WORD_RE.findall(rhs)]
    if re.search(r"[^A-Za-z+=\s]", text):
        raise EquationError(f"non-alphabetic token in equation: {text!r}")
    if not addends:
        raise EquationError("equation has no addends")
    if len(results) != 1:
        raise EquationError("right side must contain exactly one word")
    letters = sorted(set("".join(addends) + results[0]))
    if len(letters) > 10:
        raise EquationError(f"{len(letters)} distinct letters exceed the 10 digits")
    return addends, results[0], letters


def word_value(word: str, mapping) -> int:
    value = 0
    for ch in word:
        value = value * 10 + mapping[ch]
    return value


def crypto_validate(equation: str, candidate) -> Verdict:
    """Check digit range, completeness, injectivity, leading zeros, and exact
    decoded arithmetic equality, failing at the first broken constraint."""
    try:
        addends, result, letters = parse_equation(equation)
    except EquationError as exc:
        return Verdict.failed([Violation("equation", str(exc))])
    if not isinstance(candidate, dict):
        return Verdict.failed([Violation("format", "candidate is not a letter mapping")])
    mapping = {}
    for key, val in candidate.items():
        if not isinstance(key, str) or len(key.strip()) != 1 or not key.strip().isalpha():
            return Verdict.failed([Violation("format", f"key {key!r} is not a single letter")])
        if isinstance(val, bool) or not isinstance(val, int) or not 0 <= val <= 9:
            return Verdict.failed(
                [Violation("digit_range", f"value {val!r} for {key!r} is not a digit 0-9")]
            )
        mapping[key.strip().upper()] = val
    missing = [l for l in letters if l not in mapping]
    if missing:
        return Verdict.failed(
            [
                Violation(
                    "missing_letter",
                    f"letters {missing} have no digit",
                    incomplete=True,
                )
            ]
        )
    if len(set(mapping[l] for l in letters)) != len(letters):
        return Verdict.failed([Violation("injectivity", "two letters share one digit")])
    for word in addends + [result]:
        if mapping[word[0]] == 0:
            return Verdict.failed(
                [Violation("leading_zero", f"word {word} would start with 0")]
            )
    total = sum(word_value(w, mapping) for w in addends)
    target = word_value(result, mapping)
    if total != target:
        return Verdict.failed(
            [
                Violation(
                    "arithmetic",
                    f"decoded sum {total} != decoded result {target}",
                )
            ]
        )
    return Verdict.passed()


def crypto_oracle(equation: str, find_all: bool = False, limit: int = None):
    """Exhaustive injective search pruned column by column with the mod-10 /
    carry recurrence (generalized to multi-addend sums, carries above 1).
    Returns the first valid mapping, all of them with find_all, or None."""
    addends, result, letters = parse_equation(equation)
    leading = {w[0] for w in addends + [result]}
    width = max(len(w) for w in addends + [result])
    columns = []
    for t in range(width):
        col_addends = [w[len(w) - 1 - t] for w in addends if t < len(w)]
        col_result = result[len(result) - 1 - t] if t < len(result) else None
        columns.append((col_addends, col_result))

    solutions = []
    assign = {}
    used = [False] * 10

    def column(t, carry):
        """Returns True when the search should stop early."""
        if t == width:
            if carry == 0:
                solutions.append(dict(assign))
                if not find_all:
                    return True
                return limit is not None and len(solutions) >= limit
            return False
        col_addends, col_result = columns[t]
        unassigned = sorted(set(l for l in col_addends if l not in assign))

        def fill(i):
            if i == len(unassigned):
                total = sum(assign[l] for l in col_addends) + carry
                digit, carry_out = total % 10, total // 10
                if col_result is None:
                    return False if digit != 0 else column(t + 1, carry_out)
                if col_result in assign:
                    if assign[col_result] != digit:
                        return False
                    return column(t + 1, carry_out)
                if used[digit] or (digit == 0 and col_result in leading):
                    return False
                assign[col_result] = digit
                used[digit] = True
                stop = column(t + 1, carry_out)
                del assign[col_result]
                used[digit] = False
                return stop
            letter = unassigned[i]
            for digit in range(10):
                if used[digit] or (digit == 0 and letter in leading):
                    continue
                assign[letter] = digit
                used[digit] = True
                if fill(i + 1):
                    return True
                del assign[letter]
                used[digit] = False
            return False

        return fill(0)

    column(0, 0)
    if find_all:
        return solutions
    return solutions[0] if solutions else None


def carry_profile(equation: str, mapping):
    """Per-column carries under a mapping, plus the longest run of nonzero
    carries (a measured coupling statistic of the instance)."""
    addends, result, _ = parse_equation(equation)
    width = max(len(w) for w in addends + [result])
    carries = []
    carry = 0
    for t in range(width):
        total = sum(mapping[w[len(w) - 1 - t]] for w in addends if t < len(w)) + carry
        carry = total // 10
        carries.append(carry)
    longest = run = 0
    for c in carries:
        run = run + 1 if c > 0 else 0
        longest = max(longest, run)
    return carries, longest


def crypto_generate(letters: int, addends: int, word_len: int, seed, max_attempts: int = 200_000):
    """Planted instance: sample addend numbers whose digits (plus the sum's)
    cover exactly `letters` distinct digits, then name each digit with a
    letter. The hidden digit->letter injection is the planted solution."""
    rng = random.Random(("crypto", letters, addends, word_len, seed).__repr__())
    alphabet = [chr(ord("A") + i) for i in range(26)]
    for _ in range(max_attempts):
        numbers = [
            rng.randint(10 ** (word_len - 1), 10 ** word_len - 1) for _ in range(addends)
        ]
        total = sum(numbers)
        digits = set("".join(str(x) for x in numbers) + str(total))
        if len(digits) != letters:
            continue
        letter_names = rng.sample(alphabet, letters)
        letter_of = dict(zip(sorted(digits), letter_names))
        words = ["".join(letter_of[d] for d in str(x)) for x in numbers]
        result = "".join(letter_of[d] for d in str(total))
        equation = " + ".join(words) + " = " + result
        planted = {letter_of[d]: int(d) for d in digits}
        return equation, planted
    raise ValueError(
        f"could not plant an instance with letters={letters} addends={addends} word_len={word_len}"
    )


class CryptoEnvironment(Environment):
    env_id = "crypto"
    schema_hint = "mapping"

    def resolve_params(self, template, seed):
        if "equation" in template:
            parse_equation(template["equation"])  # raises on malformed input
            return {"equation": template["equation"]}
        equation, _ = crypto_generate(
            template["letters"], template["addends"], template["word_len"], seed
        )
        return {"equation": equation}

    def render_prompt(self, instance):
        return SYSTEM_PROMPT, USER_PROMPT.format(equation=instance.params["equation"])

    def parse(self, raw_text):
        return extract_and_parse(raw_text, self.schema_hint, strict=self.strict_parse)

    def render_candidate(self, candidate):
        body = ", ".join(f"'{k}': {candidate[k]}" for k in sorted(candidate))
        return "Solution: {" + body + "}"

    def validate(self, instance, candidate):
        return crypto_validate(instance.params["equation"], candidate)

    def oracle(self, instance):
        mapping = crypto_oracle(instance.params["equation"])
        if mapping is None:
            raise ValueError("planted instance unexpectedly unsolvable")
        return mapping
