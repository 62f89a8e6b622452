"""Tokenizer for the experiment language.

Produces a flat token stream with 1-based line/column positions. Keywords are
reserved words: they lex as KEYWORD tokens and can never be used as names.
The strategy-argument labels (``n``, ``init``, ``seed``) are deliberately not
reserved so tasks may declare parameters with those names.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import SourceError

KEYWORDS = frozenset(
    """
    experiment intent maximize minimize workflow task impl abstract manual
    params inputs vp in param input deploy variability strategy grid random
    bayesian metrics metric output constraints soft interaction checkpoint
    after configurations role supervisor validator cost min budget monitor
    threshold window min_new
    """.split()
)

PUNCT = {"{", "}", "(", ")", ";", ",", "=", ":", "."}

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


class LexError(Exception):
    def __init__(self, error: SourceError):
        super().__init__(str(error))
        self.error = error


@dataclass(frozen=True)
class Token:
    type: str  # IDENT | KEYWORD | STRING | NUMBER | ARROW | LE | GE | one of PUNCT | EOF
    value: object
    line: int
    column: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line = 1
    col = 1
    i = 0
    n = len(source)

    def error(code: str, message: str, at_line: int | None = None, at_col: int | None = None):
        raise LexError(SourceError(at_line or line, at_col or col, code, message))

    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        start_line, start_col = line, col
        if ch == "-":
            if i + 1 < n and source[i + 1] == ">":
                tokens.append(Token("ARROW", "->", start_line, start_col))
                i += 2
                col += 2
                continue
            if i + 1 < n and (source[i + 1].isdigit() or source[i + 1] == "."):
                pass  # negative number, handled below
            else:
                error("UnexpectedChar", "stray '-' (expected '->' or a number)")
        if ch == "<" or ch == ">":
            if i + 1 < n and source[i + 1] == "=":
                tokens.append(Token("LE" if ch == "<" else "GE", ch + "=", start_line, start_col))
                i += 2
                col += 2
                continue
            error("UnexpectedChar", f"unexpected '{ch}' (did you mean '{ch}='?)")
        if ch in PUNCT:
            tokens.append(Token(ch, ch, start_line, start_col))
            i += 1
            col += 1
            continue
        if ch == '"':
            i += 1
            col += 1
            parts: list[str] = []
            while True:
                if i >= n or source[i] == "\n":
                    error("UnterminatedString", "string literal is not closed", start_line, start_col)
                c = source[i]
                if c == '"':
                    i += 1
                    col += 1
                    break
                if c == "\\":
                    if i + 1 >= n or source[i + 1] not in _ESCAPES:
                        error("BadEscape", "unsupported escape sequence")
                    parts.append(_ESCAPES[source[i + 1]])
                    i += 2
                    col += 2
                    continue
                parts.append(c)
                i += 1
                col += 1
            tokens.append(Token("STRING", "".join(parts), start_line, start_col))
            continue
        if ch.isdigit() or ch == "-" or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            if source[j] == "-":
                j += 1
            while j < n and source[j].isdigit():
                j += 1
            is_float = False
            if j < n and source[j] == ".":
                is_float = True
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    is_float = True
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            try:
                value: object = float(text) if is_float else int(text)
            except ValueError:
                error("BadNumber", f"malformed number literal '{text}'")
            tokens.append(Token("NUMBER", value, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            kind = "KEYWORD" if word in KEYWORDS else "IDENT"
            tokens.append(Token(kind, word, start_line, start_col))
            col += j - i
            i = j
            continue
        error("UnexpectedChar", f"unexpected character {ch!r}")

    tokens.append(Token("EOF", None, line, col))
    return tokens
