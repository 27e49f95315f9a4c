"""Minimal s-expression reader for SMT-LIB 2 scripts."""

from __future__ import annotations

from ..errors import MalformedOutput


def tokenize(text: str):
    out = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c in " \t\r\n":
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            out.append(c)
            i += 1
        elif c == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 1
            out.append(text[i : j + 1])
            i = j + 1
        elif c == "|":
            j = i + 1
            while j < n and text[j] != "|":
                j += 1
            out.append(text[i + 1 : j])
            i = j + 1
        else:
            j = i
            while j < n and text[j] not in " \t\r\n();\"":
                j += 1
            out.append(text[i:j])
            i = j
    return out


def parse_all(text: str):
    """Parse a script into a list of nested lists/atoms."""
    tokens = tokenize(text)
    pos = 0
    out = []

    def read():
        nonlocal pos
        if pos >= len(tokens):
            raise MalformedOutput("unexpected end of input")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            items = []
            while pos < len(tokens) and tokens[pos] != ")":
                items.append(read())
            if pos >= len(tokens):
                raise MalformedOutput("unbalanced parenthesis")
            pos += 1
            return items
        if tok == ")":
            raise MalformedOutput("unbalanced ')'")
        return tok

    while pos < len(tokens):
        out.append(read())
    return out


def to_text(node) -> str:
    if isinstance(node, list):
        return "(" + " ".join(to_text(x) for x in node) + ")"
    return str(node)
