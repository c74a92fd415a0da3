"""Extraction of the machine-parseable solution block from free-form model
text, plus a tolerant literal parser for the extracted fragment.

The extractor looks for the LAST anchor ("Solution:" / "moves ="): reasoning
traces often restate tentative answers, and the final stated solution is the
model's commitment. Code fences are transparent. Everything here is total:
arbitrary byte input yields either a value or a ParseFailure, never an
exception.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional, Union

MAX_SCAN_BYTES = 10 * 1024 * 1024

_ANCHOR_RE = re.compile(r"(solution\s*:|moves\s*=)", re.IGNORECASE)
_FENCE_RE = re.compile(r"^\s*```.*$", re.MULTILINE)
_DIGIT_RUN_RE = re.compile(r"[0-9]+")
# plausible move token for the no-anchor fallback of token schemas
_TOKENISH_RE = re.compile(r"^[A-Za-z][0-9']{0,2}$")


class ParseFailureReason(str, Enum):
    NO_ANCHOR = "NoAnchor"
    MALFORMED_LITERAL = "MalformedLiteral"
    EMPTY = "Empty"


@dataclass(frozen=True)
class ParseFailure:
    reason: ParseFailureReason
    scanned_len: int = 0
    detail: str = ""

    def to_dict(self) -> dict:
        return {"reason": self.reason.value, "scanned_len": self.scanned_len, "detail": self.detail}


def _strip_fences(text: str) -> str:
    # fence markers are transparent: drop the ``` lines, keep their content
    return _FENCE_RE.sub("", text)


def _find_balanced(text: str, start: int) -> Optional[str]:
    """Return the balanced bracket/brace/paren literal beginning at the first
    opener at or after `start`, honoring quoted strings. None if unbalanced."""
    openers = "[({"
    closers = {"[": "]", "(": ")", "{": "}"}
    i = start
    while i < len(text) and text[i] not in openers:
        i += 1
    if i >= len(text):
        return None
    stack = []
    j = i
    quote = None
    while j < len(text):
        ch = text[j]
        if quote:
            if ch == "\\":
                j += 2
                continue
            if ch == quote:
                quote = None
        elif ch in "'\"":
            quote = ch
        elif ch in openers:
            stack.append(closers[ch])
        elif ch in "])}":
            if not stack or ch != stack[-1]:
                return None
            stack.pop()
            if not stack:
                return text[i : j + 1]
        j += 1
    return None


def _last_balanced(text: str, opener: str) -> Optional[str]:
    """Last top-level balanced block in `text` starting with `opener`."""
    best = None
    i = 0
    while i < len(text):
        if text[i] == opener:
            frag = _find_balanced(text, i)
            if frag is not None:
                best = frag
                i += len(frag)  # skip nested openers inside this block
                continue
        i += 1
    return best


def extract_block(text: str, schema_hint: str) -> Union[str, ParseFailure]:
    """Locate the solution fragment for the given schema hint.

    Hints: "list" and "mapping" return a balanced literal; "digits" returns
    the last digit run after the anchor (grid-as-string schemas); "tokens"
    returns the move-token run after the anchor.
    """
    if text is None or not text.strip():
        return ParseFailure(ParseFailureReason.EMPTY, scanned_len=len(text or ""))
    if len(text) > MAX_SCAN_BYTES:
        return ParseFailure(ParseFailureReason.EMPTY, scanned_len=len(text), detail="input exceeds scan cap")
    text = _strip_fences(text)

    last_anchor = None
    for m in _ANCHOR_RE.finditer(text):
        last_anchor = m
    tail = text[last_anchor.end():] if last_anchor else None

    if schema_hint == "digits":
        # a grid rendered as one digit string is at least 16 chars (4x4);
        # shorter runs are list entries and fall through to the literal path
        region = tail if tail is not None else text
        runs = [m.group(0) for m in _DIGIT_RUN_RE.finditer(region) if len(m.group(0)) >= 16]
        if runs:
            return runs[-1]
        if tail is not None:
            frag = _find_balanced(tail, 0)
            if frag is not None:
                return frag
            return ParseFailure(
                ParseFailureReason.MALFORMED_LITERAL,
                scanned_len=len(text),
                detail="no digit run or literal after anchor",
            )
        frag = _last_balanced(text, "[")
        if frag is not None:
            return frag
        return ParseFailure(ParseFailureReason.NO_ANCHOR, scanned_len=len(text))

    if schema_hint == "tokens":
        if tail is not None:
            line = tail.lstrip(" \t").split("\n", 1)[0]
            return line.strip().strip("[](){}").strip()
        for line in reversed(text.strip().splitlines()):
            toks = line.strip().strip("[](){}").split()
            if toks and all(_TOKENISH_RE.match(t) for t in toks):
                return line.strip().strip("[](){}").strip()
        return ParseFailure(ParseFailureReason.NO_ANCHOR, scanned_len=len(text))

    # list / mapping literals
    if tail is not None:
        frag = _find_balanced(tail, 0)
        if frag is not None:
            return frag
        return ParseFailure(
            ParseFailureReason.MALFORMED_LITERAL, scanned_len=len(text), detail="no balanced literal after anchor"
        )
    opener = "{" if schema_hint == "mapping" else "["
    frag = _last_balanced(text, opener)
    if frag is not None:
        return frag
    return ParseFailure(ParseFailureReason.NO_ANCHOR, scanned_len=len(text))


class _Tokens:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self):
        t = self.peek()
        self.pos += 1
        return t


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<punct>[\[\]\(\)\{\},:])
  | (?P<string>'(?:[^'\\]|\\.)*'|"(?:[^"\\]|\\.)*")
  | (?P<int>[+-]?[0-9]+)
  | (?P<word>[A-Za-z_][A-Za-z_0-9]*)
    """,
    re.VERBOSE,
)

_BOOL_WORDS = {"True": True, "False": False}
_BOOL_WORDS_TOLERANT = {"true": True, "false": False, "TRUE": True, "FALSE": False}


def _tokenize(fragment: str):
    tokens = []
    i = 0
    while i < len(fragment):
        m = _TOKEN_RE.match(fragment, i)
        if m is None:
            return None
        i = m.end()
        if m.lastgroup == "ws":
            continue
        tokens.append((m.lastgroup, m.group(0)))
    return tokens


def _unquote(s: str) -> str:
    body = s[1:-1]
    return body.replace("\\" + s[0], s[0]).replace("\\\\", "\\")


def parse_literal(fragment: str, strict: bool = False) -> Union[Any, ParseFailure]:
    """Parse a bracketed/braced literal into plain Python values.

    Grammar: quoted strings (single or double), True/False booleans, signed
    integers, lists with [] or () (tuples normalize to lists), mappings with
    {}. The tolerant default additionally accepts lowercase true/false and
    trailing commas; strict mode does not.
    """
    if fragment is None or not fragment.strip():
        return ParseFailure(ParseFailureReason.EMPTY, scanned_len=len(fragment or ""))
    tokens = _tokenize(fragment)
    if tokens is None:
        return ParseFailure(ParseFailureReason.MALFORMED_LITERAL, len(fragment), "unrecognized token")
    ts = _Tokens(tokens)

    def fail(detail):
        return ParseFailure(ParseFailureReason.MALFORMED_LITERAL, len(fragment), detail)

    def value():
        tok = ts.peek()
        if tok is None:
            return fail("unexpected end of input")
        kind, text = tok
        if kind == "string":
            ts.next()
            return _unquote(text)
        if kind == "int":
            ts.next()
            return int(text)
        if kind == "word":
            ts.next()
            if text in _BOOL_WORDS:
                return _BOOL_WORDS[text]
            if not strict and text in _BOOL_WORDS_TOLERANT:
                return _BOOL_WORDS_TOLERANT[text]
            return fail(f"bare word {text!r}")
        if text in "[(":
            return seq("]" if text == "[" else ")")
        if text == "{":
            return mapping()
        return fail(f"unexpected token {text!r}")

    def seq(closer):
        ts.next()  # opener
        items = []
        while True:
            tok = ts.peek()
            if tok is None:
                return fail("unbalanced sequence")
            if tok[1] == closer:
                ts.next()
                return items
            item = value()
            if isinstance(item, ParseFailure):
                return item
            items.append(item)
            tok = ts.peek()
            if tok is None:
                return fail("unbalanced sequence")
            if tok[1] == ",":
                ts.next()
                nxt = ts.peek()
                if nxt is not None and nxt[1] == closer:
                    if strict:
                        return fail("trailing comma")
                    ts.next()
                    return items
            elif tok[1] != closer:
                return fail(f"expected ',' or {closer!r}")

    def mapping():
        ts.next()  # '{'
        result = {}
        while True:
            tok = ts.peek()
            if tok is None:
                return fail("unbalanced mapping")
            if tok[1] == "}":
                ts.next()
                return result
            key = value()
            if isinstance(key, ParseFailure):
                return key
            if not isinstance(key, (int, str, bool)):
                return fail("mapping key must be scalar")
            tok = ts.peek()
            if tok is None or tok[1] != ":":
                return fail("expected ':' in mapping")
            ts.next()
            val = value()
            if isinstance(val, ParseFailure):
                return val
            result[key] = val
            tok = ts.peek()
            if tok is None:
                return fail("unbalanced mapping")
            if tok[1] == ",":
                ts.next()
                nxt = ts.peek()
                if nxt is not None and nxt[1] == "}":
                    if strict:
                        return fail("trailing comma")
                    ts.next()
                    return result
            elif tok[1] != "}":
                return fail("expected ',' or '}'")

    result = value()
    if isinstance(result, ParseFailure):
        return result
    if ts.peek() is not None:
        return fail(f"stray token {ts.peek()[1]!r}")
    return result


def extract_and_parse(text: str, schema_hint: str, strict: bool = False) -> Union[Any, ParseFailure]:
    """extract_block followed by parse_literal for literal schemas; digit runs
    and token runs pass through as strings."""
    frag = extract_block(text, schema_hint)
    if isinstance(frag, ParseFailure):
        return frag
    if schema_hint == "tokens":
        return frag
    if schema_hint == "digits":
        if frag.isdigit():
            return frag
        return parse_literal(frag, strict=strict)  # grid rendered as a list
    return parse_literal(frag, strict=strict)
