import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgstats.hierarchy import CycleError, HierarchyIndex, UnknownClass
from kgstats.ntriples import parse_text
from kgstats.synth import random_graph

from .oracle import Oracle


def test_superclasses(simple):
    h = simple.h
    assert h.superclasses(simple["scientist"]) == {simple["person"], simple["owl:Thing"]}
    assert h.superclasses(simple["owl:Thing"]) == frozenset()
    # xsd:integer has no declared superclass and sits directly under owl:Thing
    assert h.superclasses(simple["xsd:integer"]) == {simple["owl:Thing"]}


def test_superpredicates(simple):
    h = simple.h
    assert h.superpredicates(simple["wasBornIn"]) == {simple["subjectStartRelation"]}
    assert h.predicate_closure(simple["influences"]) == {simple["influences"]}


def test_leq_examples(simple):
    h, s = simple.h, simple
    assert h.leq(s["leibniz"], s["scientist"])
    assert h.leq(s["leibniz"], s["philosopher"])
    assert h.leq(s["goedel"], s["person"])
    assert not h.leq(s["goedel"], s["philosopher"])
    assert h.leq(s["scientist"], s["person"])
    assert not h.leq(s["person"], s["scientist"])
    assert h.leq(s["wasBornIn"], s["subjectStartRelation"])
    assert h.leq(s["athens"], s["owl:Thing"])
    assert h.leq(s["wasBornIn"], s["owl:Thing"])


def test_literal_typed_by_datatype(simple):
    lit = simple['"80"^^<http://www.w3.org/2001/XMLSchema#integer>']
    assert simple.h.leq(lit, simple["xsd:integer"])
    assert lit in simple.h.interpretation(simple["xsd:integer"])


def test_interpretation(simple):
    s = simple
    people = {s["plato"], s["leibniz"], s["goedel"]}
    assert s.h.interpretation(s["person"]) == people
    assert s.h.interpretation(s["scientist"]) == {s["leibniz"], s["goedel"]}
    with pytest.raises(UnknownClass):
        s.h.interpretation(s["plato"])


def test_natural_interpretation_contains_subclasses(simple):
    s = simple
    nat = s.h.natural_interpretation(s["person"])
    assert {s["scientist"], s["philosopher"], s["plato"], s["person"]} <= nat
    assert s["athens"] not in nat


def test_dist_and_level_strips(simple):
    s, h = simple, simple.h
    assert h.dist(s["scientist"], s["owl:Thing"]) == 2
    assert h.dist(s["owl:Thing"], s["scientist"]) == 2
    assert h.dist(s["scientist"], s["location"]) is None
    assert set(h.superclasses_within(s["scientist"], 1)) == {s["scientist"], s["person"]}
    assert set(h.subclasses_within(s["person"], 1)) == {s["person"], s["scientist"], s["philosopher"]}
    assert h.subclasses_within(s["person"], 0) == {s["person"]: 0}


CYCLE = """
<http://x/A> <rdfs:subClassOf> <http://x/B> .
<http://x/B> <rdfs:subClassOf> <http://x/C> .
<http://x/C> <rdfs:subClassOf> <http://x/A> .
<http://x/i> <rdf:type> <http://x/B> .
"""


def test_cycle_rejected_by_default():
    g = parse_text(CYCLE)
    with pytest.raises(CycleError) as err:
        HierarchyIndex(g)
    assert err.value.cycle[0] == err.value.cycle[-1]


def test_cycle_collapsed_on_request():
    g = parse_text(CYCLE)
    h = HierarchyIndex(g, collapse_cycles=True)
    a, b, c = (g.id(f"http://x/{n}") for n in "ABC")
    assert h.canonical(a) == h.canonical(b) == h.canonical(c)
    assert h.leq(a, c) and h.leq(c, a)
    assert g.id("http://x/i") in h.interpretation(a)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_leq_agrees_with_fixpoint_oracle(seed):
    g = random_graph(seed)
    h, o = HierarchyIndex(g), Oracle(g)
    ids = list(g.identifiers())
    for a in ids:
        for b in ids:
            assert h.leq(a, b) == o.leq(a, b)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_interpretation_agrees_with_oracle(seed):
    g = random_graph(seed)
    h, o = HierarchyIndex(g), Oracle(g)
    for c in o.classes:
        expected = {x for x in g.identifiers() if x not in o.classes and c in o.closed_types(x)}
        assert h.interpretation(c) == expected
