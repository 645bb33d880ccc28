"""Class and predicate hierarchies: closures, the is-more-specific order,
interpretations and hierarchy distance."""
from __future__ import annotations

from collections import defaultdict, deque
from typing import Iterable

from .terms import (
    OWL_THING,
    RDF_TYPE,
    RDFS_SUBCLASSOF,
    RDFS_SUBPROPERTYOF,
    Graph,
    literal_datatype,
)


class CycleError(ValueError):
    def __init__(self, cycle: list[str]) -> None:
        super().__init__("rdfs:subClassOf/subPropertyOf cycle: " + " -> ".join(cycle))
        self.cycle = cycle


class UnknownClass(KeyError):
    pass


def _sccs(nodes: Iterable[int], edges: dict[int, set[int]]) -> list[list[int]]:
    """Strongly connected components (iterative Tarjan)."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(sorted(edges.get(root, ()))))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(sorted(edges.get(nxt, ())))))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    comp.append(member)
                    if member == node:
                        break
                out.append(comp)
    return out


def _bfs_distances(start: int, edges: dict[int, set[int]]) -> dict[int, int]:
    """Shortest directed path length from ``start`` to every reachable node."""
    dist = {start: 0}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        d = dist[node] + 1
        for nxt in edges.get(node, ()):
            if nxt not in dist:
                dist[nxt] = d
                queue.append(nxt)
    del dist[start]
    return dist


class HierarchyIndex:
    """Materialized rdfs:subClassOf+ / rdfs:subPropertyOf+ closures over a
    classified graph.

    Every class other than owl:Thing is placed under owl:Thing: classes with
    no declared superclass get an implicit direct edge to it.  Individuals
    without rdf:type are typed owl:Thing.

    With ``collapse_cycles`` each strongly connected component of the
    hierarchy is replaced by its smallest handle; otherwise a cycle raises
    CycleError.
    """

    def __init__(self, g: Graph, collapse_cycles: bool = False) -> None:
        if not g.frozen:
            raise ValueError("graph must be classified first")
        self.graph = g
        self.thing = g.id(OWL_THING)
        self.rep: dict[int, int] = {}

        sub_class = g.terms.lookup(RDFS_SUBCLASSOF)
        sub_prop = g.terms.lookup(RDFS_SUBPROPERTYOF)
        rdf_type = g.terms.lookup(RDF_TYPE)

        class_edges: dict[int, set[int]] = defaultdict(set)
        pred_edges: dict[int, set[int]] = defaultdict(set)
        for s, o in ((t.s, t.o) for t in g.by_p.get(sub_class, ())):
            if s != o and s != self.thing:
                class_edges[s].add(o)
        for s, o in ((t.s, t.o) for t in g.by_p.get(sub_prop, ())):
            if s != o:
                pred_edges[s].add(o)

        self.classes = frozenset(h for h in g.identifiers() if g.is_class(h))
        self.predicates = frozenset(h for h in g.identifiers() if g.is_predicate(h))
        class_edges = self._acyclic(class_edges, self.classes, collapse_cycles)
        pred_edges = self._acyclic(pred_edges, self.predicates, collapse_cycles)

        thing = self.thing
        for c in self.classes:
            if c != thing and self.rep.get(c, c) == c and not class_edges.get(c):
                class_edges[c].add(thing)
        self.class_parents = {c: frozenset(ps) for c, ps in class_edges.items()}
        self.pred_parents = {p: frozenset(ps) for p, ps in pred_edges.items()}

        class_children: dict[int, set[int]] = defaultdict(set)
        for c, ps in class_edges.items():
            for p in ps:
                class_children[p].add(c)
        self._class_children = class_children

        # ancestor -> shortest distance, per class; owl:Thing has none
        self.up_dist: dict[int, dict[int, int]] = {}
        for c in sorted(self.classes):
            c = self.rep.get(c, c)
            if c not in self.up_dist:
                self.up_dist[c] = _bfs_distances(c, class_edges)
        self.up_class = {c: frozenset(d) for c, d in self.up_dist.items()}
        self.down_dist: dict[int, dict[int, int]] = {}
        self.up_pred = {
            p: frozenset(_bfs_distances(p, pred_edges))
            for p in sorted(self.predicates)
            if self.rep.get(p, p) == p
        }

        types_of: dict[int, set[int]] = defaultdict(set)
        for t in g.by_p.get(rdf_type, ()):
            types_of[t.s].add(self.rep.get(t.o, t.o))
        self.types_of: dict[int, frozenset[int]] = {}
        instances: dict[int, set[int]] = defaultdict(set)
        for h in g.identifiers():
            if g.is_class(h):
                continue
            if g.is_literal(h):
                direct = frozenset({self.canonical(g.id(literal_datatype(g.terms.lexical(h))))})
            else:
                direct = frozenset(types_of.get(h, ())) or frozenset({thing})
            self.types_of[h] = direct
            for c in direct:
                instances[c].add(h)
        self.instances_of = {c: frozenset(v) for c, v in instances.items()}

        self._closure_cache: dict[frozenset[int], frozenset[int]] = {}
        self._type_closure: dict[int, frozenset[int]] = {}
        self._interp_cache: dict[int, frozenset[int]] = {}

    def _acyclic(self, edges, nodes, collapse):
        comps = [c for c in _sccs(sorted(nodes | edges.keys()), edges) if len(c) > 1]
        if not comps:
            return edges
        if not collapse:
            lex = self.graph.terms.lexical
            cycle = sorted(comps[0])
            raise CycleError([lex(h) for h in cycle] + [lex(cycle[0])])
        for comp in comps:
            head = min(comp)
            for member in comp:
                self.rep[member] = head
        merged: dict[int, set[int]] = defaultdict(set)
        for s, targets in edges.items():
            rs = self.rep.get(s, s)
            for o in targets:
                ro = self.rep.get(o, o)
                if ro != rs:
                    merged[rs].add(ro)
        return merged

    # -- basic lookups ----------------------------------------------------

    def canonical(self, h: int) -> int:
        return self.rep.get(h, h)

    def is_class(self, h: int) -> bool:
        return self.graph.is_class(h)

    def is_predicate(self, h: int) -> bool:
        return self.graph.is_predicate(h)

    def superclasses(self, c: int) -> frozenset[int]:
        return self.up_class.get(self.canonical(c), frozenset())

    def superpredicates(self, p: int) -> frozenset[int]:
        return self.up_pred.get(self.canonical(p), frozenset())

    def predicate_closure(self, p: int) -> frozenset[int]:
        p = self.canonical(p)
        return frozenset({p}) | self.up_pred.get(p, frozenset())

    def class_closure(self, classes: Iterable[int]) -> frozenset[int]:
        key = frozenset(self.canonical(c) for c in classes)
        hit = self._closure_cache.get(key)
        if hit is None:
            out = set(key)
            for c in key:
                out |= self.up_class.get(c, ())
            hit = self._closure_cache[key] = frozenset(out)
        return hit

    def type_closure(self, x: int) -> frozenset[int]:
        """Every class ``x`` is more specific than or equal to.

        A class contributes itself and its superclasses; anything else its
        rdf:type classes (literals their datatype) closed upward.
        """
        hit = self._type_closure.get(x)
        if hit is None:
            if self.is_class(x):
                hit = self.class_closure((x,))
            else:
                hit = self.class_closure(self.types_of.get(x, (self.thing,)))
            self._type_closure[x] = hit
        return hit

    # -- the partial order ------------------------------------------------

    def leq(self, i1: int, i2: int) -> bool:
        """``i1`` is more specific than or equal to ``i2``."""
        if i1 == i2 or i2 == self.thing:
            return True
        c1, c2 = self.canonical(i1), self.canonical(i2)
        if c1 == c2:
            return True
        g = self.graph
        if g.is_class(i2) and c2 in self.type_closure(i1):
            return True
        if g.is_predicate(i2) and g.is_predicate(i1):
            return c2 in self.up_pred.get(c1, ())
        return False

    def dist(self, c1: int, c2: int) -> int | None:
        """Shortest rdfs:subClassOf path between comparable classes."""
        c1, c2 = self.canonical(c1), self.canonical(c2)
        if c1 == c2:
            return 0
        d = self.up_dist.get(c1, {}).get(c2)
        if d is None:
            d = self.up_dist.get(c2, {}).get(c1)
        return d

    def subclasses_within(self, c: int, levels: int) -> dict[int, int]:
        """Classes at most ``levels`` subClassOf steps below ``c``, with distance."""
        c = self.canonical(c)
        if levels <= 0:
            return {c: 0}
        full = self.down_dist.get(c)
        if full is None:
            full = self.down_dist[c] = _bfs_distances(c, self._class_children)
        out = {k: d for k, d in full.items() if d <= levels}
        out[c] = 0
        return out

    def superclasses_within(self, c: int, levels: int) -> dict[int, int]:
        c = self.canonical(c)
        out = {k: d for k, d in self.up_dist.get(c, {}).items() if d <= levels}
        out[c] = 0
        return out

    # -- interpretations --------------------------------------------------

    def interpretation(self, c: int) -> frozenset[int]:
        """Non-class identifiers typed ``c`` directly or through a subclass."""
        if not self.is_class(c):
            raise UnknownClass(self.graph.terms.lexical(c))
        c = self.canonical(c)
        hit = self._interp_cache.get(c)
        if hit is None:
            members: set[int] = set(self.instances_of.get(c, ()))
            for sub in self.subclasses_within(c, len(self.up_dist) + 1):
                members |= self.instances_of.get(sub, frozenset())
            hit = self._interp_cache[c] = frozenset(members)
        return hit

    def natural_interpretation(self, i: int) -> frozenset[int]:
        """Every identifier more specific than or equal to ``i``."""
        return frozenset(x for x in self.graph.identifiers() if self.leq(x, i))

    def lexical(self, h: int) -> str:
        return self.graph.terms.lexical(h)


def build(g: Graph, collapse_cycles: bool = False) -> HierarchyIndex:
    return HierarchyIndex(g, collapse_cycles=collapse_cycles)

