"""The statistical index: counters per schema triple and key type, retrieval
with above/below approximation, and the binary/TSV file formats."""
from __future__ import annotations

import json
import os
import warnings
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .codec import FormatError, Reader, write_str, write_varint
from .engine import MASKS, SPO, AlgorithmConfig, StatsBuilder, mask_name, normalize
from .hierarchy import HierarchyIndex
from .schema import SchemaTriple, StoredSchemaGraph, triple_leq
from .terms import (
    OWL_THING,
    RDFS_DOMAIN,
    RDFS_RANGE,
    RDFS_SUBCLASSOF,
    RDFS_SUBPROPERTYOF,
    Graph,
    Kind,
    TermTable,
    compact,
    resolve,
    short,
)

MAGIC = b"KGSTATS\x00"
VERSION = 1


class MissingKey(KeyError):
    pass


class ModeNotComputed(ValueError):
    pass


class NotCoveredWarning(UserWarning):
    """The queried schema triple is unrelated to every index key."""


class KeyTypeCounts(NamedTuple):
    all_bound: int
    all_unbound: int
    distinct_bound: int
    distinct_unbound: int


@dataclass(frozen=True)
class Retrieval:
    value: int
    how: str  # exact | above | below | not-covered
    sources: tuple[SchemaTriple, ...] = ()


# counts[mask] = (all, distinct); index 0 unused
Counts = tuple


def _counts_from(builder_table, key_for_mask, cfg: AlgorithmConfig) -> Counts:
    out = [None] * 8
    for mask in MASKS:
        c = builder_table[key_for_mask(mask)]
        n = c.n
        d = n if c.keys is None else c.distinct()
        out[mask] = (n if cfg.count_all else 0, d if cfg.count_distinct else 0)
    return tuple(out)


class StatIndex:
    """Immutable statistical index.

    ``bound`` maps a schema triple to its 7 (all, distinct) counter pairs;
    ``unbound`` maps (normalized schema triple, mask) to one pair.  The
    schema of statistics for bound retrieval is the key set of ``bound``.
    """

    def __init__(
        self,
        terms: TermTable,
        hier: HierarchyIndex,
        bound: dict[SchemaTriple, Counts],
        unbound: dict[tuple[SchemaTriple, int], tuple[int, int]],
        config: dict,
        schema: Iterable[tuple[str, str, str]],
    ) -> None:
        self.terms = terms
        self.h = hier
        self.bound = bound
        self.unbound = unbound
        self.config = config
        self.schema = sorted(set(schema))
        self.run = None

    # -- construction -----------------------------------------------------

    @classmethod
    def from_builder(
        cls, b: StatsBuilder, g: Graph, hier: HierarchyIndex, ssg: StoredSchemaGraph, cfg: AlgorithmConfig
    ) -> "StatIndex":
        bound = {}
        for st in sorted({st for st, _ in b.bound}):
            bound[st] = _counts_from(b.bound, lambda m, st=st: (st, m), cfg)
        unbound = {}
        for key in sorted(b.unbound):
            c = b.unbound[key]
            d = c.n if c.keys is None else c.distinct()
            unbound[key] = (c.n if cfg.count_all else 0, d if cfg.count_distinct else 0)
        return cls(g.terms, hier, bound, unbound, config_dict(cfg, hier), schema_of(g))

    # -- basic access -----------------------------------------------------

    @property
    def modes(self) -> frozenset[str]:
        return frozenset(self.config["modes"])

    def schema_of_statistics(self, mode: str = "bound", mask: int = SPO) -> set[SchemaTriple]:
        if mode == "bound":
            return set(self.bound)
        return {st for st, m in self.unbound if m == mask}

    def exists_statistics(self, st: Sequence[int], mode: str = "bound", mask: int = SPO) -> bool:
        st = SchemaTriple(*st)
        if mode == "bound":
            return st in self.bound
        return (normalize(st, mask, self.h.thing), mask) in self.unbound

    def get_statistics(self, st: Sequence[int], mask: int = SPO, counter: str = "all", mode: str = "bound") -> int:
        if counter not in self.modes or mode not in self.modes:
            raise ModeNotComputed(f"{counter}/{mode} counting was not enabled for this index")
        col = 0 if counter == "all" else 1
        st = SchemaTriple(*st)
        if mode == "bound":
            counts = self.bound.get(st)
            if counts is None:
                raise MissingKey(self.format_triple(st))
            return counts[mask][col]
        key = (normalize(st, mask, self.h.thing), mask)
        pair = self.unbound.get(key)
        if pair is None:
            raise MissingKey(self.format_triple(key[0]) + " @" + mask_name(mask))
        return pair[col]

    def entry(self, st: Sequence[int]) -> dict[str, KeyTypeCounts]:
        """All 28 counters of a bound schema triple, unbound ones resolved by normalization."""
        st = SchemaTriple(*st)
        counts = self.bound[st]
        out = {}
        for mask in MASKS:
            ua, ud = self.unbound.get((normalize(st, mask, self.h.thing), mask), (0, 0))
            out[mask_name(mask)] = KeyTypeCounts(counts[mask][0], ua, counts[mask][1], ud)
        return out

    @property
    def n_bound_keys(self) -> int:
        return len(MASKS) * len(self.bound)

    @property
    def n_unbound_keys(self) -> int:
        return len(self.unbound)

    # -- names ------------------------------------------------------------

    def id(self, name: str) -> int:
        return resolve(self.terms, name)

    def lex(self, h: int) -> str:
        return self.terms.lexical(h)

    def format_triple(self, st: Sequence[int]) -> str:
        return "(" + ", ".join(short(self.lex(x)) for x in st) + ")"

    def lexical_triple(self, st: Sequence[int]) -> tuple[str, str, str]:
        return tuple(self.lex(x) for x in st)

    # -- canonical form, equality, persistence ----------------------------

    def canonical(self):
        bound = sorted((self.lexical_triple(st), counts[1:]) for st, counts in self.bound.items())
        unbound = sorted(
            (self.lexical_triple(st), mask, pair) for (st, mask), pair in self.unbound.items()
        )
        return self.config, bound, unbound

    def __eq__(self, other) -> bool:
        if not isinstance(other, StatIndex):
            return NotImplemented
        return self.canonical() == other.canonical()

    def to_bytes(self) -> bytes:
        config, bound, unbound = self.canonical()
        strings = set()
        for triple in self.schema:
            strings.update(triple)
        for triple, _ in bound:
            strings.update(triple)
        for triple, _, _ in unbound:
            strings.update(triple)
        table = sorted(strings)
        ref = {s: i for i, s in enumerate(table)}

        buf = bytearray(MAGIC)
        buf += VERSION.to_bytes(2, "little")
        write_str(buf, json.dumps(config, sort_keys=True))
        write_varint(buf, len(table))
        for s in table:
            write_str(buf, s)
        write_varint(buf, len(self.schema))
        for triple in self.schema:
            for x in triple:
                write_varint(buf, ref[x])
        write_varint(buf, len(bound))
        for triple, counts in bound:
            for x in triple:
                write_varint(buf, ref[x])
            for a, d in counts:
                write_varint(buf, a)
                write_varint(buf, d)
        write_varint(buf, len(unbound))
        for triple, mask, (a, d) in unbound:
            for x in triple:
                write_varint(buf, ref[x])
            write_varint(buf, mask)
            write_varint(buf, a)
            write_varint(buf, d)
        return bytes(buf)

    @classmethod
    def from_bytes(cls, data: bytes) -> "StatIndex":
        if data[: len(MAGIC)] != MAGIC:
            raise FormatError("not a kgstats index file (bad magic)")
        r = Reader(data)
        r.take(len(MAGIC))
        version = int.from_bytes(r.take(2), "little")
        if version != VERSION:
            raise FormatError(f"unsupported index format version {version}")
        try:
            config = json.loads(r.str())
        except json.JSONDecodeError as exc:
            raise FormatError(f"bad header: {exc}") from None
        table = [r.str() for _ in range(r.varint())]

        def triple():
            try:
                return tuple(table[r.varint()] for _ in range(3))
            except IndexError:
                raise FormatError("string reference out of range") from None

        schema = [triple() for _ in range(r.varint())]
        bound_lex = []
        for _ in range(r.varint()):
            st = triple()
            counts = tuple((r.varint(), r.varint()) for _ in MASKS)
            bound_lex.append((st, counts))
        unbound_lex = []
        for _ in range(r.varint()):
            st = triple()
            mask = r.varint()
            if not 1 <= mask <= SPO:
                raise FormatError(f"bad key mask {mask}")
            unbound_lex.append((st, mask, (r.varint(), r.varint())))
        if not r.at_end():
            raise FormatError("trailing bytes after index")

        keys = [st for st, _ in bound_lex] + [st for st, _, _ in unbound_lex]
        g, hier = schema_graph(schema, keys, collapse=config.get("collapse_cycles", False))
        intern = g.terms.lookup
        bound = {}
        for st, counts in bound_lex:
            bound[SchemaTriple(*(intern(x) for x in st))] = (None,) + counts
        unbound = {}
        for st, mask, pair in unbound_lex:
            unbound[(SchemaTriple(*(intern(x) for x in st)), mask)] = pair
        return cls(g.terms, hier, bound, unbound, config, schema)

    def to_tsv(self) -> str:
        """One row per (schema triple, key positions); unbound columns resolved by normalization."""
        rows = ["s\tp\to\tpositions\tall_bound\tall_unbound\tdistinct_bound\tdistinct_unbound"]
        thing = self.h.thing
        keys = {(st, m) for st in self.bound for m in MASKS} | set(self.unbound)
        records = []
        for st, mask in keys:
            counts = self.bound.get(st)
            ab, db = (counts[mask] if counts else ("-", "-"))
            ua, ud = self.unbound.get((normalize(st, mask, thing), mask), ("-", "-"))
            lex = [compact(x) for x in self.lexical_triple(st)]
            records.append((lex, mask_name(mask), ab, ua, db, ud))
        for lex, name, ab, ua, db, ud in sorted(records, key=lambda r: (r[0], r[1])):
            rows.append("\t".join(lex + [name, str(ab), str(ua), str(db), str(ud)]))
        return "\n".join(rows) + "\n"


def config_dict(cfg: AlgorithmConfig, hier: HierarchyIndex) -> dict:
    """Settings that change what the counters mean.  The enumerator itself
    is left to the run manifest, so equal key sets give equal files."""
    return {
        "modes": sorted(cfg.modes),
        "include_meta": cfg.include_meta,
        "sketch": cfg.sketch,
        "collapse_cycles": bool(hier.rep),
    }


_SCHEMA_PREDICATES = (RDFS_SUBCLASSOF, RDFS_SUBPROPERTYOF, RDFS_DOMAIN, RDFS_RANGE)


def schema_of(g: Graph) -> list[tuple[str, str, str]]:
    """The hierarchy and domain/range triples, lexically."""
    lex = g.terms.lexical
    out = []
    for name in _SCHEMA_PREDICATES:
        p = g.terms.lookup(name)
        for t in g.by_p.get(p, ()):
            out.append((lex(t.s), lex(t.p), lex(t.o)))
    return out


def schema_graph(schema, keys, collapse: bool = False) -> tuple[Graph, HierarchyIndex]:
    """Rebuild enough of a graph to compare index keys under the partial order."""
    g = Graph()
    g.intern(OWL_THING, Kind.CLASS)
    for s, p, o in keys:
        g.intern(s, Kind.CLASS)
        if p != OWL_THING:
            g.intern(p, Kind.PREDICATE)
        g.intern(o, Kind.CLASS)
    for s, p, o in schema:
        g.add(s, p, o)
    g.classify()
    return g, HierarchyIndex(g, collapse_cycles=collapse)


def save(index: StatIndex, path: str | os.PathLike) -> None:
    with open(path, "wb") as fh:
        fh.write(index.to_bytes())


def load(path: str | os.PathLike) -> StatIndex:
    with open(path, "rb") as fh:
        return StatIndex.from_bytes(fh.read())


# -- retrieval with approximation -----------------------------------------


def _schema(index: StatIndex, st: SchemaTriple, mode: str, mask: int):
    if mode == "bound":
        return st, index.schema_of_statistics("bound")
    return normalize(st, mask, index.h.thing), index.schema_of_statistics("unbound", mask)


def _lower(index: StatIndex, st, S) -> list[SchemaTriple]:
    return [t for t in S if triple_leq(index.h, t, st)]


def _upper(index: StatIndex, st, S) -> list[SchemaTriple]:
    return [t for t in S if triple_leq(index.h, st, t)]


def _strictly_differs(index: StatIndex, a: int, b: int) -> bool:
    h = index.h
    return h.canonical(a) != h.canonical(b)


def above_stat_schema(index: StatIndex, st: Sequence[int], S=None) -> bool:
    """Some component of ``st`` is strictly more general than that component
    of every index key below ``st``."""
    st = SchemaTriple(*st)
    S = index.schema_of_statistics() if S is None else S
    lows = _lower(index, st, S)
    if not lows:
        return False
    return any(all(_strictly_differs(index, st[i], t[i]) for t in lows) for i in range(3))


def below_stat_schema(index: StatIndex, st: Sequence[int], S=None) -> bool:
    st = SchemaTriple(*st)
    S = index.schema_of_statistics() if S is None else S
    highs = _upper(index, st, S)
    if not highs:
        return False
    return any(all(_strictly_differs(index, st[i], t[i]) for t in highs) for i in range(3))


def maximal(index: StatIndex, items: list[SchemaTriple]) -> list[SchemaTriple]:
    h = index.h
    return [t for t in items if not any(o != t and triple_leq(h, t, o) for o in items)]


def minimal(index: StatIndex, items: list[SchemaTriple]) -> list[SchemaTriple]:
    h = index.h
    return [t for t in items if not any(o != t and triple_leq(h, o, t) for o in items)]


def retrieve_statistics(
    index: StatIndex, st: Sequence[int], mask: int = SPO, counter: str = "all", mode: str = "bound"
) -> Retrieval:
    """Exact lookup, else the sum over the closest keys below ``st`` (above
    case), else the minimum over the closest keys above it (below case)."""
    st = SchemaTriple(*st)
    key, S = _schema(index, st, mode, mask)
    if key in S:
        return Retrieval(index.get_statistics(key, mask, counter, mode), "exact", (key,))
    if above_stat_schema(index, key, S):
        b_u = sorted(maximal(index, _lower(index, key, S)))
        total = sum(index.get_statistics(t, mask, counter, mode) for t in b_u)
        return Retrieval(total, "above", tuple(b_u))
    if below_stat_schema(index, key, S):
        b_l = sorted(minimal(index, _upper(index, key, S)))
        value = min(index.get_statistics(t, mask, counter, mode) for t in b_l)
        return Retrieval(value, "below", tuple(b_l))
    warnings.warn(f"{index.format_triple(st)} is not covered by the index", NotCoveredWarning, stacklevel=2)
    return Retrieval(0, "not-covered", ())
