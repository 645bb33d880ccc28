"""Triple-pattern types and cardinality estimates from the statistical index."""
from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from typing import Sequence, Union

from .engine import O_BIT, P_BIT, S_BIT, SPO
from .hierarchy import HierarchyIndex
from .schema import SchemaTriple, declared_domains, declared_ranges, extract_stored_schema
from .store import NotCoveredWarning, Retrieval, StatIndex, retrieve_statistics
from .terms import Graph, TermTable, expand, resolve

BITS = (S_BIT, P_BIT, O_BIT)


class PatternError(ValueError):
    pass


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return "?" + self.name


@dataclass(frozen=True)
class Const:
    """A constant the term table has never seen (an individual that only
    occurs in the data, when just the index is at hand)."""

    text: str

    def __str__(self) -> str:
        return self.text


Term = Union[int, Var, Const]


@dataclass(frozen=True)
class TriplePattern:
    s: Term
    p: Term
    o: Term

    def __post_init__(self) -> None:
        if not any(isinstance(x, Var) for x in self):
            raise PatternError("a triple pattern needs at least one variable")

    def __iter__(self):
        return iter((self.s, self.p, self.o))

    @property
    def bound_mask(self) -> int:
        return sum(bit for bit, x in zip(BITS, self) if not isinstance(x, Var))

    def variables(self) -> dict[str, int]:
        """Variable name -> position bit (first occurrence)."""
        out: dict[str, int] = {}
        for bit, x in zip(BITS, self):
            if isinstance(x, Var):
                out.setdefault(x.name, bit)
        return out


_TOKEN = re.compile(
    r'\s*(\?\w+|<[^>]*>|"(?:[^"\\]|\\.)*"(?:\^\^(?:<[^>]*>|[\w.-]+:[\w.-]+)|@[\w-]+)?|[^\s<>"?]+)'
)


def tokenize(text: str) -> list[str]:
    tokens, pos = [], 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise PatternError(f"cannot parse {text[pos:]!r}")
        tokens.append(m.group(1))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    if len(tokens) == 4 and tokens[3] == ".":
        tokens.pop()
    if len(tokens) != 3:
        raise PatternError(f"expected three terms, got {len(tokens)} in {text!r}")
    return tokens


def _literal_token(tok: str) -> str:
    body, sep, dt = tok.rpartition('"^^')
    if not sep:
        return tok.split('"@')[0] + '"' if '"@' in tok else tok
    dt = dt[1:-1] if dt.startswith("<") else dt
    return f'{body}"^^<{expand(dt)}>'


def resolve_token(terms: TermTable, tok: str) -> int:
    if tok.startswith('"'):
        tok = _literal_token(tok)
    try:
        return resolve(terms, tok)
    except KeyError as exc:
        raise PatternError(exc.args[0]) from None


def parse_pattern(text: str, terms: TermTable, allow_unknown: bool = False) -> TriplePattern:
    """Parse ``"?x wasBornIn athens"``.  With ``allow_unknown``, subjects and
    objects missing from ``terms`` become :class:`Const`."""
    parts = []
    for pos, tok in enumerate(tokenize(text)):
        if tok.startswith("?"):
            parts.append(Var(tok[1:]))
            continue
        try:
            parts.append(resolve_token(terms, tok))
        except PatternError:
            if not allow_unknown or pos == 1:
                raise
            parts.append(Const(tok))
    return TriplePattern(*parts)


def parse_schema_triple(text: str, terms: TermTable) -> SchemaTriple:
    """``"person wasBornIn location"`` (commas and parentheses allowed)."""
    cleaned = text.strip().strip("()").replace(",", " ")
    toks = tokenize(cleaned)
    if any(t.startswith("?") for t in toks):
        raise PatternError("a schema triple has no variables")
    return SchemaTriple(*(resolve_token(terms, t) for t in toks))


class Estimator:
    """Pattern typing and estimation against one index.

    ``graph`` is optional: with it, bound individuals are typed by their own
    most specific classes; without it, by the domain/range of the predicate.
    """

    def __init__(self, index: StatIndex, graph: Graph | None = None, hier: HierarchyIndex | None = None) -> None:
        self.index = index
        self.graph = graph
        if graph is not None:
            self.h = hier or HierarchyIndex(graph)
            self.terms = graph.terms
        else:
            self.h = index.h
            self.terms = index.terms
        self.ssg = extract_stored_schema(self.h.graph, self.h)
        self.thing = self.h.thing
        self._sizes: dict[int, int] = {}

    def parse(self, text: str) -> TriplePattern:
        return parse_pattern(text, self.terms, allow_unknown=self.graph is None)

    # -- typing -----------------------------------------------------------

    def _pick(self, classes) -> int:
        """The ⪯-minimal class; ties by smaller interpretation, then by name."""
        h = self.h
        classes = set(classes)
        minimal = [c for c in classes if not any(o != c and h.leq(o, c) for o in classes)]

        def size(c: int) -> int:
            if self.graph is None:
                return 0
            if c not in self._sizes:
                self._sizes[c] = len(h.interpretation(c))
            return self._sizes[c]

        return min(minimal, key=lambda c: (size(c), h.lexical(c)))

    def _declared(self, p: Term, side: str) -> int:
        if isinstance(p, Var) or not self.h.is_predicate(p):
            return self.thing
        p = self.h.canonical(p)
        found = (declared_domains if side == "s" else declared_ranges)(self.ssg, self.h, p)
        return self._pick(found)

    def _bound_type(self, x: int | Const, p: Term, side: str) -> int:
        h = self.h
        if isinstance(x, Const):
            return self._declared(p, side)
        if self.graph is not None and not h.is_class(x):
            return self._pick(h.types_of.get(x, {self.thing}))
        if h.is_class(x):
            return h.canonical(x)
        return self._declared(p, side)

    def pattern_type(self, tp: TriplePattern) -> SchemaTriple:
        s, p, o = tp
        ts = self._declared(p, "s") if isinstance(s, Var) else self._bound_type(s, p, "s")
        to = self._declared(p, "o") if isinstance(o, Var) else self._bound_type(o, p, "o")
        tpred = self.thing if isinstance(p, Var) else self.h.canonical(p)
        return SchemaTriple(ts, tpred, to)

    def to_index(self, ct: Sequence[int]) -> SchemaTriple:
        """Map a type computed over the graph into the index's handle space.

        A class the index never saw is replaced by its nearest superclass
        that the index knows (owl:Thing at worst).
        """
        if self.index.terms is self.terms:
            return SchemaTriple(*ct)
        lookup, lex = self.index.terms.lookup, self.terms.lexical
        out = []
        for pos, x in enumerate(ct):
            h = lookup(lex(x))
            if h is None and pos != 1 and self.h.is_class(x):
                ups = sorted(self.h.up_dist.get(self.h.canonical(x), {}).items(), key=lambda kv: (kv[1], lex(kv[0])))
                h = next((lookup(lex(c)) for c, _ in ups if lookup(lex(c)) is not None), None)
            if h is None:
                h = self.index.h.thing if pos != 1 else lookup(lex(x))
            if h is None:
                raise PatternError(f"predicate {lex(x)} is unknown to the index")
            out.append(h)
        return SchemaTriple(*out)

    # -- estimation -------------------------------------------------------

    def estimate_typed(self, tp: TriplePattern, ct: Sequence[int], mode: str = "bound") -> "Estimate":
        mask = tp.bound_mask
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", NotCoveredWarning)
            total = retrieve_statistics(self.index, ct, SPO, "all", mode)
            keys = retrieve_statistics(self.index, ct, mask, "distinct", mode) if mask else None
        for w in caught:
            warnings.warn(w.message, w.category, stacklevel=3)
        if keys is None:
            value = float(total.value)
        else:
            value = total.value / keys.value if keys.value else 0.0
        return Estimate(value, SchemaTriple(*ct), total, keys)

    def estimate(self, tp: TriplePattern | str, mode: str = "bound") -> "Estimate":
        if isinstance(tp, str):
            tp = self.parse(tp)
        return self.estimate_typed(tp, self.to_index(self.pattern_type(tp)), mode)

    def estimate_join(self, tp1: TriplePattern | str, tp2: TriplePattern | str) -> "JoinEstimate":
        """Heuristic: |R| |S| / max(V(R, v), V(S, v)) over the shared variable v,
        after narrowing both patterns to the more specific type of v."""
        tp1 = self.parse(tp1) if isinstance(tp1, str) else tp1
        tp2 = self.parse(tp2) if isinstance(tp2, str) else tp2
        v1, v2 = tp1.variables(), tp2.variables()
        shared = sorted(v1.keys() & v2.keys())
        if not shared:
            raise PatternError("patterns share no variable")
        var = shared[0]
        b1, b2 = v1[var], v2[var]
        ct1, ct2 = list(self.to_index(self.pattern_type(tp1))), list(self.to_index(self.pattern_type(tp2)))
        i1, i2 = BITS.index(b1), BITS.index(b2)
        c1, c2 = ct1[i1], ct2[i2]
        ih = self.index.h
        if ih.leq(c1, c2):
            choices = [c1]
        elif ih.leq(c2, c1):
            choices = [c2]
        else:
            choices = [c1, c2]
        candidates = []
        for c in choices:
            ct1[i1], ct2[i2] = c, c
            e1 = self.estimate_typed(tp1, ct1)
            e2 = self.estimate_typed(tp2, ct2)
            d1 = retrieve_statistics(self.index, ct1, b1, "distinct").value
            d2 = retrieve_statistics(self.index, ct2, b2, "distinct").value
            denom = max(d1, d2)
            value = e1.value * e2.value / denom if denom else 0.0
            candidates.append(JoinCandidate(value, ih.lexical(c), e1, e2))
        return JoinEstimate(var, candidates)


@dataclass(frozen=True)
class Estimate:
    value: float
    type: SchemaTriple
    total: Retrieval
    keys: Retrieval | None

    @property
    def how(self) -> str:
        hows = {self.total.how} | ({self.keys.how} if self.keys else set())
        return "exact" if hows == {"exact"} else "/".join(sorted(hows - {"exact"}))


@dataclass(frozen=True)
class JoinCandidate:
    value: float
    join_type: str
    left: Estimate
    right: Estimate


@dataclass(frozen=True)
class JoinEstimate:
    """Heuristic join size; several candidates when the variable types are incomparable."""

    variable: str
    candidates: list[JoinCandidate]
    heuristic: bool = True
