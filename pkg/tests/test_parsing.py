"""Solution-block extraction and the tolerant literal grammar."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from puzzlebench.envs import get_environment
from puzzlebench.parsing import (
    ParseFailure,
    ParseFailureReason,
    extract_and_parse,
    extract_block,
    parse_literal,
)


class TestExtractBlock:
    def test_anchor_then_mapping(self):
        text = "...thinking...\nSolution: {1: True, 2: False}"
        assert extract_block(text, "mapping") == "{1: True, 2: False}"

    def test_no_anchor_no_fallback(self):
        out = extract_block("I cannot solve this.", "mapping")
        assert isinstance(out, ParseFailure)
        assert out.reason is ParseFailureReason.NO_ANCHOR

    def test_last_anchor_wins(self):
        text = "Solution: [1,2]\n...revision...\nSolution: [3,4]"
        assert extract_block(text, "list") == "[3,4]"

    def test_empty_text(self):
        out = extract_block("", "list")
        assert isinstance(out, ParseFailure)
        assert out.reason is ParseFailureReason.EMPTY

    def test_code_fences_are_transparent(self):
        text = "```python\nSolution: [1, 2]\n```"
        assert extract_block(text, "list") == "[1, 2]"

    def test_bare_list_fallback(self):
        assert extract_block("the answer is [[1, 'A', 'C']] I think", "list") == "[[1, 'A', 'C']]"

    def test_digits_schema_takes_last_run(self):
        grid = "1234" * 20 + "5"  # 81 chars
        text = f"some working 123 Solution: {grid}"
        assert extract_block(text, "digits") == grid

    def test_digits_in_brackets(self):
        grid = "9" * 81
        assert extract_block(f"Solution: [{grid}]", "digits") == grid

    def test_tokens_after_anchor(self):
        assert extract_block("blah\nSolution: R U R' U'", "tokens") == "R U R' U'"

    def test_tokens_keep_illegal_tokens_for_validator(self):
        assert extract_block("Solution: X3 R", "tokens") == "X3 R"

    def test_tokens_final_line_fallback(self):
        assert extract_block("I will do\nR U2 F'", "tokens") == "R U2 F'"

    def test_anchor_monotone_under_suffix(self):
        base = "Solution: [1, 2]"
        assert extract_block(base + "\nand some more prose.", "list") == extract_block(base, "list")

    def test_oversized_input_is_empty_equivalent(self):
        out = extract_block("x" * (10 * 1024 * 1024 + 1), "list")
        assert isinstance(out, ParseFailure)
        assert out.reason is ParseFailureReason.EMPTY


class TestParseLiteral:
    def test_nested_move_list(self):
        assert parse_literal("[['R', 0, 1], ['B', 2, 0]]") == [["R", 0, 1], ["B", 2, 0]]

    def test_trailing_comma_tolerated(self):
        assert parse_literal("{'S': 9, 'E': 5,}") == {"S": 9, "E": 5}

    def test_tuples_normalize_to_lists(self):
        assert parse_literal("[(0, 'Red'), (1, 'Green')]") == [[0, "Red"], [1, "Green"]]

    def test_boolean_spellings(self):
        assert parse_literal("{1: True, 2: false}") == {1: True, 2: False}

    def test_negative_integers(self):
        assert parse_literal("[[1, -2, 3]]") == [[1, -2, 3]]

    def test_double_quotes(self):
        assert parse_literal('["Fill A"]') == ["Fill A"]

    def test_unbalanced_is_malformed(self):
        out = parse_literal("[[1, 2")
        assert isinstance(out, ParseFailure)
        assert out.reason is ParseFailureReason.MALFORMED_LITERAL

    def test_stray_token_is_malformed(self):
        assert isinstance(parse_literal("[1] trailing"), ParseFailure)

    def test_bare_word_is_malformed(self):
        assert isinstance(parse_literal("[Red]"), ParseFailure)

    def test_strict_rejects_tolerances(self):
        assert isinstance(parse_literal("{1: true}", strict=True), ParseFailure)
        assert isinstance(parse_literal("[1, 2,]", strict=True), ParseFailure)
        assert parse_literal("{1: True}", strict=True) == {1: True}


class TestSchemaRoundTrips:
    """Rendering a canonical candidate to schema text and re-parsing it yields
    the same value, for all nine environment schemas."""

    CANDIDATES = {
        "hanoi": [[1, "A", "C"], [2, "A", "B"]],
        "checker": [["R", 0, 1], ["B", 2, 0]],
        "river": [["A_1", "a_1"], ["A_1"]],
        "waterjug": [["Fill B"], ["Pour B to A"]],
        "sat": {1: True, 2: False, 3: True},
        "crypto": {"A": 1, "B": 2},
        "graphcolor": [[0, "Red"], [1, "Green"]],
        "rubik": ["R", "U", "R'", "U'", "F2"],
    }

    @pytest.mark.parametrize("env_id", sorted(CANDIDATES))
    def test_round_trip(self, env_id):
        env = get_environment(env_id)
        candidate = self.CANDIDATES[env_id]
        text = env.render_candidate(candidate)
        assert env.parse(text) == candidate

    def test_sudoku_string_round_trip(self):
        env = get_environment("sudoku")
        digits = "123456789" * 9
        assert env.parse(env.render_candidate(digits)) == digits

    def test_sudoku_grid_round_trip(self):
        env = get_environment("sudoku")
        grid = [[1, 2, 3, 4], [3, 4, 1, 2], [2, 1, 4, 3], [4, 3, 2, 1]]
        assert env.parse(env.render_candidate(grid)) == grid


@given(text=st.text(max_size=2000))
@settings(max_examples=300)
def test_parse_pipeline_total_on_arbitrary_text(text):
    for hint in ("list", "mapping", "digits", "tokens"):
        result = extract_and_parse(text, hint)
        assert result is not None  # either a value or a ParseFailure, never a raise


@given(
    prefix=st.text(max_size=200),
    suffix=st.text(alphabet=st.characters(blacklist_characters="[]{}()"), max_size=200),
)
@settings(max_examples=150)
def test_anchor_monotonicity(prefix, suffix):
    """Appending anchor-free, bracket-free text never changes the extraction."""
    base = prefix + "\nSolution: [1, 2, 3]"
    extended = base + " " + suffix.replace("Solution:", "").replace("moves =", "")
    assert extract_block(base, "list") == extract_block(extended, "list")
