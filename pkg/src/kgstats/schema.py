"""Stored schema graph extraction, the partial order lifted to triples, and
the brute-force interpretation of schema triples."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .hierarchy import HierarchyIndex
from .terms import (
    META_PREDICATES,
    RDFS_DOMAIN,
    RDFS_RANGE,
    RDFS_SUBCLASSOF,
    RDFS_SUBPROPERTYOF,
    Graph,
    Triple,
)


class SchemaTriple(NamedTuple):
    s: int
    p: int
    o: int


@dataclass(frozen=True)
class StoredSchemaGraph:
    schema_triples: frozenset[SchemaTriple]
    # (owl:Thing, p, owl:Thing) for the schema-defining predicates used in g
    meta_triples: frozenset[SchemaTriple]
    hierarchy_triples: frozenset[Triple]
    domains: dict[int, frozenset[int]] = field(repr=False)
    ranges: dict[int, frozenset[int]] = field(repr=False)
    meta_predicates: frozenset[int] = frozenset()

    def keys(self) -> frozenset[SchemaTriple]:
        """Every stored schema triple that may act as a statistics key."""
        return self.schema_triples | self.meta_triples


def extract_stored_schema(g: Graph, h: HierarchyIndex) -> StoredSchemaGraph:
    """Domain x range products per predicate; (owl:Thing, p, owl:Thing) when a
    predicate lacks a declared domain or range."""
    lookup = g.terms.lookup
    domain_p, range_p = lookup(RDFS_DOMAIN), lookup(RDFS_RANGE)
    domains: dict[int, set[int]] = {}
    ranges: dict[int, set[int]] = {}
    for t in g.by_p.get(domain_p, ()):
        domains.setdefault(h.canonical(t.s), set()).add(h.canonical(t.o))
    for t in g.by_p.get(range_p, ()):
        ranges.setdefault(h.canonical(t.s), set()).add(h.canonical(t.o))

    meta = frozenset(x for x in (lookup(m) for m in META_PREDICATES) if x is not None)
    thing = h.thing
    schema, meta_triples = set(), set()
    for p in sorted({h.canonical(p) for p in h.predicates}):
        d, r = domains.get(p), ranges.get(p)
        if d and r:
            triples = {SchemaTriple(s, p, o) for s in d for o in r}
        else:
            triples = {SchemaTriple(thing, p, thing)}
        if p in meta:
            # meta predicates only matter if they are actually used
            if g.by_p.get(p):
                meta_triples |= triples
        else:
            schema |= triples

    hier = set()
    for name in (RDFS_SUBCLASSOF, RDFS_SUBPROPERTYOF):
        hier.update(g.by_p.get(lookup(name), ()))

    return StoredSchemaGraph(
        schema_triples=frozenset(schema),
        meta_triples=frozenset(meta_triples),
        hierarchy_triples=frozenset(hier),
        domains={p: frozenset(v) for p, v in domains.items()},
        ranges={p: frozenset(v) for p, v in ranges.items()},
        meta_predicates=meta,
    )


def declared_domains(ssg: StoredSchemaGraph, h: HierarchyIndex, p: int) -> frozenset[int]:
    """Domains used by the enumerators: owl:Thing unless domain AND range are declared."""
    d, r = ssg.domains.get(p), ssg.ranges.get(p)
    return d if d and r else frozenset({h.thing})


def declared_ranges(ssg: StoredSchemaGraph, h: HierarchyIndex, p: int) -> frozenset[int]:
    d, r = ssg.domains.get(p), ssg.ranges.get(p)
    return r if d and r else frozenset({h.thing})


def triple_leq(h: HierarchyIndex, t1: Iterable[int], t2: Iterable[int]) -> bool:
    s1, p1, o1 = t1
    s2, p2, o2 = t2
    return h.leq(s1, s2) and h.leq(p1, p2) and h.leq(o1, o2)


def is_schema_triple(h: HierarchyIndex, t: Iterable[int], ssg: StoredSchemaGraph) -> bool:
    t = SchemaTriple(*t)
    keys = ssg.keys()
    if t in keys:
        return True
    return any(triple_leq(h, t, ts) or triple_leq(h, ts, t) for ts in keys)


def schema_interpretation(
    h: HierarchyIndex, t: Iterable[int], g: Graph, mode: str = "natural"
) -> frozenset[Triple]:
    """Exact interpretation by full scan.  Test oracle only.

    ``plain`` requires every component to be in the interpretation of the
    corresponding class (the predicate must match directly or through
    subPropertyOf); ``natural`` only requires componentwise ``leq``.
    """
    s, p, o = t
    leq = h.leq
    if mode == "natural":
        return frozenset(x for x in g if leq(x.s, s) and leq(x.p, p) and leq(x.o, o))
    if mode != "plain":
        raise ValueError(f"unknown mode {mode!r}")

    def member(x: int, c: int) -> bool:
        return h.is_class(c) and not h.is_class(x) and x in h.interpretation(c)

    return frozenset(
        x for x in g if member(x.s, s) and h.leq(x.p, p) and h.is_predicate(p) and member(x.o, o)
    )
