"""Streaming reader and writer for the N-Triples subset used for ingestion.

Grammar, one triple per line::

    <iri> | _:label   <iri>   <iri> | _:label | "literal"[^^<iri> | @lang]   .

Literal escapes are limited to ``\\"``, ``\\\\``, ``\\n`` and ``\\t``.  Language
tags are accepted and dropped.  ``#`` starts a comment line.
"""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Iterator

from .terms import Graph, Kind, expand, is_blank, is_literal

log = logging.getLogger(__name__)

_IRI_FORBIDDEN = set(' \t<>"{}|^`\\')
_UNESCAPE = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}
_ESCAPE = {'"': '\\"', "\\": "\\\\", "\n": "\\n", "\t": "\\t"}


class NTriplesError(SyntaxError):
    def __init__(self, line_no: int, reason: str) -> None:
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


@dataclass(frozen=True)
class ParsedLine:
    subject: str
    predicate: str
    object: str
    line_no: int


def escape_literal(text: str) -> str:
    return '"' + "".join(_ESCAPE.get(ch, ch) for ch in text) + '"'


def literal(text: str, datatype: str | None = None) -> str:
    """Canonical lexical form of a literal."""
    lexical = escape_literal(text)
    if datatype:
        lexical += f"^^<{expand(datatype)}>"
    return lexical


class _Scanner:
    def __init__(self, line: str, line_no: int) -> None:
        self.line = line
        self.pos = 0
        self.line_no = line_no

    def fail(self, reason: str):
        raise NTriplesError(self.line_no, reason)

    def skip_ws(self) -> None:
        line, pos = self.line, self.pos
        while pos < len(line) and line[pos] in " \t":
            pos += 1
        self.pos = pos

    def at_end(self) -> bool:
        return self.pos >= len(self.line)

    def peek(self) -> str:
        return self.line[self.pos] if self.pos < len(self.line) else ""

    def iri(self) -> str:
        end = self.line.find(">", self.pos + 1)
        if end < 0:
            self.fail("unterminated IRI")
        value = self.line[self.pos + 1:end]
        if not value:
            self.fail("empty IRI")
        bad = _IRI_FORBIDDEN.intersection(value)
        if bad:
            self.fail(f"illegal character {sorted(bad)[0]!r} in IRI")
        self.pos = end + 1
        value = expand(value)
        if is_blank(value):
            self.fail("IRI collides with blank node syntax")
        return value

    def blank(self) -> str:
        start = self.pos
        pos = start + 2
        line = self.line
        while pos < len(line) and line[pos] not in " \t":
            pos += 1
        label = line[start + 2:pos]
        # a trailing '.' directly after the label terminates the statement
        if label.endswith(".") and line[pos:].strip() == "":
            label = label[:-1]
            pos -= 1
        if not label or not all(ch.isalnum() or ch in "_-." for ch in label):
            self.fail("malformed blank node label")
        self.pos = pos
        return "_:" + label

    def literal(self) -> str:
        line = self.line
        pos = self.pos + 1
        chars = []
        while True:
            if pos >= len(line):
                self.fail("unterminated literal")
            ch = line[pos]
            if ch == '"':
                break
            if ch == "\\":
                nxt = line[pos + 1:pos + 2]
                if nxt not in _UNESCAPE:
                    self.fail(f"unsupported escape \\{nxt}")
                chars.append(_UNESCAPE[nxt])
                pos += 2
                continue
            chars.append(ch)
            pos += 1
        self.pos = pos + 1
        datatype = None
        if line.startswith("^^", self.pos):
            self.pos += 2
            if self.peek() != "<":
                self.fail("datatype must be an IRI")
            datatype = self.iri()
        elif self.peek() == "@":
            pos = self.pos + 1
            while pos < len(line) and (line[pos].isalnum() or line[pos] == "-"):
                pos += 1
            if pos == self.pos + 1:
                self.fail("empty language tag")
            self.pos = pos
        return literal("".join(chars), datatype)

    def term(self, allow_literal: bool, allow_blank: bool) -> str:
        ch = self.peek()
        if ch == "<":
            return self.iri()
        if ch == "_" and self.line.startswith("_:", self.pos):
            if not allow_blank:
                self.fail("blank node not allowed in this position")
            return self.blank()
        if ch == '"':
            if not allow_literal:
                self.fail("literal not allowed in this position")
            return self.literal()
        if not ch or ch == ".":
            self.fail("missing term")
        self.fail(f"unexpected character {ch!r}")


def parse_line(line: str, line_no: int) -> ParsedLine | None:
    """Parse one line; None for blank and comment lines."""
    stripped = line.strip()
    if not stripped or stripped.startswith("#"):
        return None
    sc = _Scanner(stripped, line_no)
    s = sc.term(allow_literal=False, allow_blank=True)
    sc.skip_ws()
    p = sc.term(allow_literal=False, allow_blank=False)
    sc.skip_ws()
    if sc.peek() == ".":
        sc.fail("missing object")
    o = sc.term(allow_literal=True, allow_blank=True)
    sc.skip_ws()
    if sc.peek() != ".":
        sc.fail("expected '.' at end of triple")
    sc.pos += 1
    sc.skip_ws()
    if not sc.at_end() and sc.peek() != "#":
        sc.fail("trailing content after '.'")
    return ParsedLine(s, p, o, line_no)


def parse_stream(
    stream: BinaryIO | Iterable[bytes] | Iterable[str],
    strict: bool = True,
    errors: list[NTriplesError] | None = None,
) -> Iterator[ParsedLine]:
    """Yield one ParsedLine per triple line.

    In lenient mode bad lines are logged, appended to ``errors`` if given,
    and skipped.
    """
    for line_no, raw in enumerate(stream, start=1):
        try:
            if isinstance(raw, bytes):
                try:
                    raw = raw.decode("utf-8")
                except UnicodeDecodeError:
                    raise NTriplesError(line_no, "invalid UTF-8") from None
            if "\x00" in raw:
                raise NTriplesError(line_no, "NUL byte")
            parsed = parse_line(raw, line_no)
        except NTriplesError as exc:
            if strict:
                raise
            log.warning("skipping %s", exc)
            if errors is not None:
                errors.append(exc)
            continue
        if parsed is not None:
            yield parsed


def read_into(g: Graph, stream, strict: bool = True, errors=None) -> int:
    """Insert every parsed triple into ``g``; returns the number of lines read."""
    n = 0
    intern = g.intern
    for line in parse_stream(stream, strict=strict, errors=errors):
        g.insert((intern(line.subject), intern(line.predicate, Kind.PREDICATE), intern(line.object)))
        n += 1
    return n


def load(paths: Iterable[str | os.PathLike], strict: bool = True, errors=None) -> Graph:
    """Parse N-Triples files into one classified graph."""
    g = Graph()
    for path in paths:
        with open(path, "rb") as fh:
            read_into(g, fh, strict=strict, errors=errors)
    return g.classify()


def parse_text(text: str, strict: bool = True) -> Graph:
    g = Graph()
    read_into(g, text.splitlines(), strict=strict)
    return g.classify()


def format_term(lexical: str) -> str:
    if is_literal(lexical) or is_blank(lexical):
        return lexical
    return f"<{lexical}>"


def format_triple(s: str, p: str, o: str) -> str:
    return f"{format_term(s)} {format_term(p)} {format_term(o)} ."


def serialize(g: Graph, out: BinaryIO) -> int:
    """Write ``g`` as N-Triples, one triple per line in insertion order."""
    lex = g.terms.lexical
    n = 0
    for s, p, o in g:
        out.write(format_triple(lex(s), lex(p), lex(o)).encode("utf-8") + b"\n")
        n += 1
    return n
