"""Identifiers, triples and the in-memory graph.

Every term is interned into a dense integer handle.  Downstream code works
on handles only; lexical forms are needed for parsing, printing and
persistence.
"""
from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
OWL = "http://www.w3.org/2002/07/owl#"
XSD = "http://www.w3.org/2001/XMLSchema#"

PREFIXES = {"rdf": RDF, "rdfs": RDFS, "owl": OWL, "xsd": XSD}

RDF_TYPE = RDF + "type"
RDF_PROPERTY = RDF + "Property"
RDFS_SUBCLASSOF = RDFS + "subClassOf"
RDFS_SUBPROPERTYOF = RDFS + "subPropertyOf"
RDFS_DOMAIN = RDFS + "domain"
RDFS_RANGE = RDFS + "range"
RDFS_CLASS = RDFS + "Class"
RDFS_LITERAL = RDFS + "Literal"
OWL_CLASS = OWL + "Class"
OWL_THING = OWL + "Thing"

# predicates used to define the conceptual schema itself
META_PREDICATES = (RDF_TYPE, RDFS_SUBCLASSOF, RDFS_SUBPROPERTYOF, RDFS_DOMAIN, RDFS_RANGE)


def expand(iri: str) -> str:
    """Expand the well-known ``rdf:``, ``rdfs:``, ``owl:`` and ``xsd:`` prefixes."""
    head, sep, tail = iri.partition(":")
    if sep and head in PREFIXES and not tail.startswith("//"):
        return PREFIXES[head] + tail
    return iri


def compact(lexical: str) -> str:
    """Inverse of :func:`expand`, used for display only."""
    for name, ns in PREFIXES.items():
        if lexical.startswith(ns):
            return f"{name}:{lexical[len(ns):]}"
        # typed literals carry the datatype IRI in their lexical form
        marker = "^^<" + ns
        if marker in lexical:
            return lexical.replace(marker, f"^^<{name}:", 1)
    return lexical


def short(lexical: str) -> str:
    """Compact display name: prefixed form, or the local name of other IRIs."""
    c = compact(lexical)
    if c != lexical or is_literal(lexical) or is_blank(lexical):
        return c
    return local_name(lexical) or lexical


def is_literal(lexical: str) -> bool:
    return lexical.startswith('"')


def is_blank(lexical: str) -> bool:
    return lexical.startswith("_:")


def literal_datatype(lexical: str) -> str:
    """Datatype IRI of a literal in canonical form, ``rdfs:Literal`` if untyped."""
    end = lexical.rfind('"')
    rest = lexical[end + 1:]
    if rest.startswith("^^<") and rest.endswith(">"):
        return rest[3:-1]
    return RDFS_LITERAL


class Kind(enum.IntFlag):
    NONE = 0
    INDIVIDUAL = 1
    CLASS = 2
    PREDICATE = 4
    LITERAL = 8


class ConflictingKind(ValueError):
    """An identifier was used both as a class and as a literal."""


@dataclass(frozen=True)
class Identifier:
    id: int
    lexical: str
    kind: Kind

    def __str__(self) -> str:
        return compact(self.lexical)


class Triple(NamedTuple):
    s: int
    p: int
    o: int


class TermTable:
    """Bijective mapping between lexical forms and dense integer handles."""

    def __init__(self) -> None:
        self._ids: dict[str, int] = {}
        self._lexicals: list[str] = []
        self.hints: dict[int, Kind] = {}

    def __len__(self) -> int:
        return len(self._lexicals)

    def __contains__(self, lexical: str) -> bool:
        return lexical in self._ids

    def intern(self, lexical: str, hint: Kind | None = None) -> int:
        if not lexical:
            raise ValueError("cannot intern an empty lexical form")
        handle = self._ids.get(lexical)
        if handle is None:
            handle = len(self._lexicals)
            self._ids[lexical] = handle
            self._lexicals.append(lexical)
        if hint:
            self.hints[handle] = self.hints.get(handle, Kind.NONE) | hint
        return handle

    def lookup(self, lexical: str) -> int | None:
        return self._ids.get(lexical)

    def lexical(self, handle: int) -> str:
        return self._lexicals[handle]

    def lexicals(self) -> list[str]:
        return list(self._lexicals)


class Graph:
    """A set of triples over interned handles with S, P, O and PO indexes.

    After :meth:`classify` the graph is frozen; statistics passes only read it.
    """

    def __init__(self, terms: TermTable | None = None) -> None:
        self.terms = terms if terms is not None else TermTable()
        self._triples: dict[Triple, None] = {}
        self.by_s: dict[int, list[Triple]] = defaultdict(list)
        self.by_p: dict[int, list[Triple]] = defaultdict(list)
        self.by_o: dict[int, list[Triple]] = defaultdict(list)
        self.by_po: dict[tuple[int, int], list[Triple]] = defaultdict(list)
        self.kinds: dict[int, Kind] = {}
        self.frozen = False

    # -- building ---------------------------------------------------------

    def intern(self, lexical: str, hint: Kind | None = None) -> int:
        return self.terms.intern(lexical, hint)

    def insert(self, t: Iterable[int]) -> bool:
        """Add a triple of handles.  Returns True if the graph grew."""
        if self.frozen:
            raise RuntimeError("graph is read-only after classify()")
        t = Triple(*t)
        if t in self._triples:
            return False
        self._triples[t] = None
        self.by_s[t.s].append(t)
        self.by_p[t.p].append(t)
        self.by_o[t.o].append(t)
        self.by_po[t.p, t.o].append(t)
        return True

    def add(self, s: str, p: str, o: str) -> bool:
        """Intern three lexical forms and insert the triple."""
        return self.insert((self.intern(s), self.intern(p, Kind.PREDICATE), self.intern(o)))

    # -- access -----------------------------------------------------------

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __contains__(self, t) -> bool:
        return Triple(*t) in self._triples

    def triples(self) -> list[Triple]:
        return list(self._triples)

    def lexical_triples(self) -> set[tuple[str, str, str]]:
        lex = self.terms.lexical
        return {(lex(s), lex(p), lex(o)) for s, p, o in self._triples}

    def id(self, lexical: str) -> int:
        """Handle of an already-interned term (prefixes expanded); KeyError otherwise."""
        handle = self.terms.lookup(expand(lexical))
        if handle is None:
            raise KeyError(lexical)
        return handle

    def identifier(self, handle: int) -> Identifier:
        return Identifier(handle, self.terms.lexical(handle), self.kinds.get(handle, Kind.NONE))

    def kind(self, handle: int) -> Kind:
        return self.kinds.get(handle, Kind.NONE)

    def is_class(self, handle: int) -> bool:
        return bool(self.kinds.get(handle, 0) & Kind.CLASS)

    def is_predicate(self, handle: int) -> bool:
        return bool(self.kinds.get(handle, 0) & Kind.PREDICATE)

    def is_literal(self, handle: int) -> bool:
        return bool(self.kinds.get(handle, 0) & Kind.LITERAL)

    def is_individual(self, handle: int) -> bool:
        return bool(self.kinds.get(handle, 0) & Kind.INDIVIDUAL)

    def identifiers(self) -> range:
        return range(len(self.terms))

    # -- classification ---------------------------------------------------

    def classify(self) -> "Graph":
        """Assign every identifier its kind bits and freeze the graph.

        owl:Thing is injected as a class.  Literal datatypes become classes so
        they can serve as ranges.  Raises ConflictingKind when a literal is
        used where only a class may appear.
        """
        terms = self.terms
        intern = terms.intern
        kinds: dict[int, Kind] = defaultdict(lambda: Kind.NONE)
        typed: set[int] = set()

        thing = intern(OWL_THING)
        kinds[thing] |= Kind.CLASS

        rdf_type = terms.lookup(RDF_TYPE)
        sub_class = terms.lookup(RDFS_SUBCLASSOF)
        sub_prop = terms.lookup(RDFS_SUBPROPERTYOF)
        domain = terms.lookup(RDFS_DOMAIN)
        range_ = terms.lookup(RDFS_RANGE)
        declares_class = {terms.lookup(RDFS_CLASS), terms.lookup(OWL_CLASS)} - {None}
        rdf_property = terms.lookup(RDF_PROPERTY)

        for handle, hint in terms.hints.items():
            kinds[handle] |= hint & (Kind.CLASS | Kind.PREDICATE)

        for s, p, o in self._triples:
            kinds[p] |= Kind.PREDICATE
            if p == rdf_type:
                kinds[o] |= Kind.CLASS
                typed.add(s)
                if o == rdf_property:
                    kinds[s] |= Kind.PREDICATE
                elif o in declares_class:
                    kinds[s] |= Kind.CLASS
            elif p == sub_class:
                kinds[s] |= Kind.CLASS
                kinds[o] |= Kind.CLASS
            elif p == sub_prop:
                kinds[s] |= Kind.PREDICATE
                kinds[o] |= Kind.PREDICATE
            elif p == domain or p == range_:
                kinds[s] |= Kind.PREDICATE
                kinds[o] |= Kind.CLASS

        for handle in range(len(terms)):
            lexical = terms.lexical(handle)
            if is_literal(lexical):
                if kinds[handle] & Kind.CLASS:
                    raise ConflictingKind(f"literal {lexical} is used as a class")
                kinds[handle] |= Kind.LITERAL
                kinds[intern(literal_datatype(lexical))] |= Kind.CLASS
        # datatype classes may have been interned above
        for handle in range(len(terms)):
            k = kinds[handle]
            if handle in typed and not k & Kind.LITERAL:
                k |= Kind.INDIVIDUAL
            if not k:
                k = Kind.INDIVIDUAL
            kinds[handle] = k

        self.kinds = dict(kinds)
        self.frozen = True
        return self


def classify(g: Graph) -> Graph:
    return g.classify()


class UnknownTerm(KeyError):
    pass


def local_name(lexical: str) -> str:
    cut = max(lexical.rfind("#"), lexical.rfind("/"))
    return lexical[cut + 1:] if cut >= 0 else lexical


def resolve(terms: TermTable, text: str) -> int:
    """Handle for a user-supplied name: a full IRI (angle brackets optional),
    a prefixed name, a literal, or an unambiguous local name."""
    text = text.strip()
    if text.startswith("<") and text.endswith(">"):
        text = text[1:-1]
    for cand in (text, expand(text)):
        h = terms.lookup(cand)
        if h is not None:
            return h
    if not is_literal(text):
        hits = [h for h, lex in enumerate(terms._lexicals) if not is_literal(lex) and local_name(lex) == text]
        if len(hits) == 1:
            return hits[0]
        if hits:
            names = ", ".join(sorted(terms.lexical(h) for h in hits))
            raise UnknownTerm(f"{text!r} is ambiguous: {names}")
    raise UnknownTerm(f"unknown term {text!r}")
