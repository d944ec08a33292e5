"""Tokenizer for the Python subset. Never raises: bad input becomes ERROR tokens."""

from __future__ import annotations

import keyword
import re
from dataclasses import dataclass

NAME, NUMBER, STRING, OP = "NAME", "NUMBER", "STRING", "OP"
NEWLINE, INDENT, DEDENT, ENDMARKER, ERROR = "NEWLINE", "INDENT", "DEDENT", "ENDMARKER", "ERROR"

LAYOUT = frozenset({NEWLINE, INDENT, DEDENT, ENDMARKER})
KEYWORDS = frozenset(keyword.kwlist)


@dataclass(frozen=True)
class Token:
    type: str
    text: str
    start: int
    end: int
    line: int

    @property
    def is_keyword(self) -> bool:
        return self.type == NAME and self.text in KEYWORDS


_NUMBER = re.compile(
    r"0[xX][0-9a-fA-F_]+|0[bB][01_]+|0[oO][0-7_]+"
    r"|(?:[0-9][0-9_]*(?:\.[0-9_]*)?|\.[0-9][0-9_]*)(?:[eE][+-]?[0-9]+)?[jJ]?"
)
_NAME = re.compile(r"[^\W\d]\w*")
_STRING_START = re.compile(r"(?:[rRbBuUfF]{1,2})?('''|\"\"\"|'|\")")
_OPERATORS = sorted(
    "**= //= >>= <<= ... -> := ** // << >> <= >= == != += -= *= /= %= &= |= ^= @= "
    "+ - * / % @ & | ^ ~ < > ( ) [ ] { } , : . ; =".split(),
    key=len,
    reverse=True,
)
_OPEN, _CLOSE = "([{", ")]}"


def tokenize(source: str) -> list[Token]:
    toks: list[Token] = []
    indents = [0]
    depth = 0
    pos = 0
    line = 1
    n = len(source)
    at_line_start = True
    pending_newline = False  # a logical line has content

    def emit(type_, text, start, end):
        toks.append(Token(type_, text, start, end, line))

    while pos < n:
        if at_line_start and depth == 0:
            # measure indentation, skipping blank and comment-only lines
            col = 0
            p = pos
            while p < n and source[p] in " \t\f":
                col = (col // 8 + 1) * 8 if source[p] == "\t" else col + 1
                p += 1
            if p >= n:
                pos = p
                break
            if source[p] in "#\r\n":
                while p < n and source[p] not in "\r\n":
                    p += 1
                if p < n:
                    p += 2 if source.startswith("\r\n", p) else 1
                    line += 1
                pos = p
                continue
            if col > indents[-1]:
                indents.append(col)
                emit(INDENT, "", p, p)
            elif col < indents[-1]:
                while col < indents[-1]:
                    indents.pop()
                    emit(DEDENT, "", p, p)
                if col != indents[-1]:
                    emit(ERROR, "", p, p)  # inconsistent dedent
            pos = p
            at_line_start = False

        ch = source[pos]
        if ch in " \t\f":
            pos += 1
            continue
        if ch == "#":
            while pos < n and source[pos] not in "\r\n":
                pos += 1
            continue
        if ch in "\r\n":
            step = 2 if source.startswith("\r\n", pos) else 1
            if depth == 0 and pending_newline:
                emit(NEWLINE, "", pos, pos + step)
                pending_newline = False
            pos += step
            line += 1
            at_line_start = depth == 0
            continue
        if ch == "\\" and pos + 1 < n and source[pos + 1] in "\r\n":
            pos += 3 if source.startswith("\r\n", pos + 1) else 2
            line += 1
            continue

        pending_newline = True
        m = _STRING_START.match(source, pos)
        if m:
            quote = m.group(1)
            body_start = m.end()
            end = _string_end(source, body_start, quote)
            if end is None:
                stop = n if len(quote) == 3 else _line_end(source, pos)
                emit(ERROR, source[pos:stop], pos, stop)
                line += source.count("\n", pos, stop)
                pos = stop
            else:
                emit(STRING, source[pos:end], pos, end)
                line += source.count("\n", pos, end)
                pos = end
            continue
        m = _NUMBER.match(source, pos)
        if m and m.end() > pos and not (source[pos] == "." and m.group() == "."):
            emit(NUMBER, m.group(), pos, m.end())
            pos = m.end()
            continue
        m = _NAME.match(source, pos)
        if m:
            emit(NAME, m.group(), pos, m.end())
            pos = m.end()
            continue
        for op in _OPERATORS:
            if source.startswith(op, pos):
                if op in _OPEN:
                    depth += 1
                elif op in _CLOSE:
                    depth = max(0, depth - 1)
                emit(OP, op, pos, pos + len(op))
                pos += len(op)
                break
        else:
            emit(ERROR, ch, pos, pos + 1)
            pos += 1

    if pending_newline:
        emit(NEWLINE, "", n, n)
    while len(indents) > 1:
        indents.pop()
        emit(DEDENT, "", n, n)
    emit(ENDMARKER, "", n, n)
    return toks


def _string_end(source, pos, quote):
    n = len(source)
    while pos < n:
        ch = source[pos]
        if ch == "\\":
            pos += 2
            continue
        if len(quote) == 1 and ch in "\r\n":
            return None
        if source.startswith(quote, pos):
            return pos + len(quote)
        pos += 1
    return None


def _line_end(source, pos):
    while pos < len(source) and source[pos] not in "\r\n":
        pos += 1
    return pos


def code_tokens(source: str) -> list[str]:
    """Token texts without layout tokens; the token stream used by BLEU."""
    return [t.text for t in tokenize(source) if t.type not in LAYOUT]
