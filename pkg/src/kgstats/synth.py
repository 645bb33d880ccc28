"""Seeded generators of test graphs: small random DAG-typed graphs and a
large layered graph for scale runs."""
from __future__ import annotations

import random

from .ntriples import literal
from .terms import (
    OWL_THING,
    RDF_TYPE,
    RDFS_DOMAIN,
    RDFS_RANGE,
    RDFS_SUBCLASSOF,
    RDFS_SUBPROPERTYOF,
    XSD,
    Graph,
    Kind,
)

NS = "http://example.org/syn/"


def random_graph(seed: int, max_classes: int = 20, max_triples: int = 200) -> Graph:
    """A small classified graph with a DAG class hierarchy.

    Mixes multiple inheritance, multi-typed and untyped individuals,
    predicates with and without domain/range, subPropertyOf chains and
    typed literals.
    """
    rng = random.Random(seed)
    g = Graph()
    budget = [max_triples]

    def add(s, p, o):
        if budget[0] > 0 and g.add(s, p, o):
            budget[0] -= 1

    n_classes = rng.randint(2, max_classes)
    classes = [f"{NS}C{i}" for i in range(n_classes)]
    for i, c in enumerate(classes):
        g.intern(c, Kind.CLASS)
        if i == 0 or rng.random() < 0.2:
            if rng.random() < 0.5:
                add(c, RDFS_SUBCLASSOF, OWL_THING)
            continue
        for parent in rng.sample(classes[:i], k=min(i, rng.choice((1, 1, 1, 2)))):
            add(c, RDFS_SUBCLASSOF, parent)

    n_preds = rng.randint(1, 5)
    preds = [f"{NS}p{i}" for i in range(n_preds)]
    literal_preds = set()
    for i, p in enumerate(preds):
        g.intern(p, Kind.PREDICATE)
        if i and rng.random() < 0.3:
            add(p, RDFS_SUBPROPERTYOF, preds[rng.randrange(i)])
        r = rng.random()
        if r < 0.65:
            for c in rng.sample(classes, k=min(len(classes), rng.choice((1, 1, 2)))):
                add(p, RDFS_DOMAIN, c)
            if rng.random() < 0.2:
                add(p, RDFS_RANGE, XSD + "integer")
                literal_preds.add(p)
            else:
                for c in rng.sample(classes, k=min(len(classes), rng.choice((1, 1, 2)))):
                    add(p, RDFS_RANGE, c)
        elif r < 0.8:
            add(p, RDFS_DOMAIN, rng.choice(classes))

    n_ind = rng.randint(2, 25)
    inds = [f"{NS}i{i}" for i in range(n_ind)]
    for x in inds:
        for c in rng.sample(classes, k=rng.choice((0, 1, 1, 1, 2))):
            add(x, RDF_TYPE, c)

    attempts = 0
    while budget[0] > 0 and attempts < 4 * max_triples:
        attempts += 1
        p = rng.choice(preds)
        s = rng.choice(inds)
        if p in literal_preds or rng.random() < 0.1:
            o = literal(str(rng.randint(0, 5)), XSD + "integer" if rng.random() < 0.8 else None)
        else:
            o = rng.choice(inds)
        add(s, p, o)
    return g.classify()


def layered_graph(
    n_triples: int = 1_000_000,
    n_classes: int = 1000,
    depth: int = 5,
    n_predicates: int = 40,
    n_individuals: int = 100_000,
    seed: int = 0,
) -> Graph:
    """A large graph whose hierarchy has ``depth`` levels under owl:Thing.

    Level sizes grow geometrically; predicates declare domains and ranges
    in the upper levels and individuals are typed in the lower ones, so the
    data conforms to the declared schema.
    """
    rng = random.Random(seed)
    g = Graph()
    intern = g.intern
    sub_class = intern(RDFS_SUBCLASSOF, Kind.PREDICATE)
    rdf_type = intern(RDF_TYPE, Kind.PREDICATE)
    domain = intern(RDFS_DOMAIN, Kind.PREDICATE)
    range_ = intern(RDFS_RANGE, Kind.PREDICATE)
    sub_prop = intern(RDFS_SUBPROPERTYOF, Kind.PREDICATE)
    thing = intern(OWL_THING, Kind.CLASS)

    # geometric level sizes summing to n_classes
    ratio = 4
    weights = [ratio ** i for i in range(depth)]
    sizes = [max(1, n_classes * w // sum(weights)) for w in weights]
    sizes[-1] += n_classes - sum(sizes)
    levels: list[list[int]] = []
    parent_of: dict[int, int] = {}
    k = 0
    for lvl, size in enumerate(sizes):
        row = []
        for _ in range(size):
            c = intern(f"{NS}L{lvl}C{k}", Kind.CLASS)
            k += 1
            parent = thing if lvl == 0 else rng.choice(levels[-1])
            g.insert((c, sub_class, parent))
            parent_of[c] = parent
            row.append(c)
        levels.append(row)

    children: dict[int, list[int]] = {}
    for c, p in parent_of.items():
        children.setdefault(p, []).append(c)

    def descendants(c: int) -> list[int]:
        out, stack = [], [c]
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(children.get(x, ()))
        return out

    # individuals typed with classes from the lower three levels
    lower = [c for row in levels[max(0, depth - 3):] for c in row]
    members: dict[int, list[int]] = {}
    inds = []
    for i in range(n_individuals):
        x = intern(f"{NS}e{i}")
        c = rng.choice(lower)
        g.insert((x, rdf_type, c))
        members.setdefault(c, []).append(x)
        inds.append(x)

    preds = []
    pools = []
    for i in range(n_predicates):
        p = intern(f"{NS}rel{i}", Kind.PREDICATE)
        if i >= 4 and rng.random() < 0.25:
            g.insert((p, sub_prop, preds[rng.randrange(4)]))
        d = rng.choice(levels[min(1, depth - 1)])
        r = rng.choice(levels[min(2, depth - 1)] if depth > 2 else levels[-1])
        g.insert((p, domain, d))
        g.insert((p, range_, r))
        subj = [x for c in descendants(d) for x in members.get(c, ())] or inds
        obj = [x for c in descendants(r) for x in members.get(c, ())] or inds
        preds.append(p)
        pools.append((subj, obj))

    remaining = n_triples - len(g)
    capacity = sum(len(subj) * len(obj) for subj, obj in pools)
    if remaining > capacity // 2:
        raise ValueError(f"{n_triples} triples requested but the predicate pools only hold {capacity}")
    choice = rng.choice
    insert = g.insert
    while remaining > 0:
        i = rng.randrange(n_predicates)
        subj, obj = pools[i]
        if insert((choice(subj), preds[i], choice(obj))):
            remaining -= 1
    return g.classify()
