"""Binary persistence of an ingested graph.

Layout: magic, u16 version, a JSON header, the string table in handle
order, then the triples as little-endian uint32 handle triples.  Kinds and
the hierarchy are cheap to recompute, so they are rebuilt on load.
"""
from __future__ import annotations

import json
import os
import sys
from array import array

from .codec import FormatError, Reader, write_str, write_varint
from .terms import Graph

MAGIC = b"KGGRAPH\x00"
VERSION = 1


def graph_to_bytes(g: Graph, header: dict | None = None) -> bytes:
    buf = bytearray(MAGIC)
    buf += VERSION.to_bytes(2, "little")
    write_str(buf, json.dumps(header or {}, sort_keys=True))
    lexicals = g.terms.lexicals()
    write_varint(buf, len(lexicals))
    for lex in lexicals:
        write_str(buf, lex)
    flat = array("I")
    for t in g:
        flat.extend(t)
    if sys.byteorder != "little":
        flat.byteswap()
    write_varint(buf, len(g))
    buf += flat.tobytes()
    return bytes(buf)


def graph_from_bytes(data: bytes) -> tuple[Graph, dict]:
    if data[: len(MAGIC)] != MAGIC:
        raise FormatError("not a kgstats graph file (bad magic)")
    r = Reader(data)
    r.take(len(MAGIC))
    version = int.from_bytes(r.take(2), "little")
    if version != VERSION:
        raise FormatError(f"unsupported graph format version {version}")
    try:
        header = json.loads(r.str())
    except json.JSONDecodeError as exc:
        raise FormatError(f"bad header: {exc}") from None
    g = Graph()
    n_terms = r.varint()
    for _ in range(n_terms):
        g.intern(r.str())
    n = r.varint()
    flat = array("I")
    flat.frombytes(r.take(12 * n))
    if sys.byteorder != "little":
        flat.byteswap()
    if not r.at_end():
        raise FormatError("trailing bytes after graph")
    if flat and max(flat) >= n_terms:
        raise FormatError("term reference out of range")
    for i in range(0, len(flat), 3):
        g.insert(flat[i:i + 3])
    return g.classify(), header


def save_graph(g: Graph, path: str | os.PathLike, header: dict | None = None) -> None:
    with open(path, "wb") as fh:
        fh.write(graph_to_bytes(g, header))


def load_graph(path: str | os.PathLike) -> tuple[Graph, dict]:
    with open(path, "rb") as fh:
        return graph_from_bytes(fh.read())
