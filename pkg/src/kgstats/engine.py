"""Per-triple type enumeration and key-type counting.

For every triple ``t`` one of three enumerators produces the schema triples
whose natural interpretation contains ``t``:

* ``stored``  - domain x range of ``p`` and each of its superpredicates,
* ``all``     - every combination of the closed types of s and o with the
                superpredicates of p,
* ``levels``  - ``all`` restricted to classes at most ``u`` levels above or
                ``l`` levels below a declared domain (range) of the predicate.

Each emitted schema triple is split into its seven key types and the
counters for all/distinct x bound/unbound are updated.
"""
from __future__ import annotations

import enum
import logging
import multiprocessing
import os
import time
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

from .hierarchy import HierarchyIndex
from .schema import SchemaTriple, StoredSchemaGraph, declared_domains, declared_ranges
from .sketch import HyperLogLog
from .terms import Graph, Triple

log = logging.getLogger(__name__)

# position bits of a key type; a mask lists the key (non-underlined) positions
S_BIT, P_BIT, O_BIT = 4, 2, 1
SPO = S_BIT | P_BIT | O_BIT
MASKS = (7, 6, 5, 3, 4, 2, 1)
_POS_LETTERS = ((S_BIT, "s"), (P_BIT, "p"), (O_BIT, "o"))


def mask_name(mask: int) -> str:
    return "".join(ch for bit, ch in _POS_LETTERS if mask & bit)


def parse_mask(positions: str) -> int:
    bits = {c: b for b, c in _POS_LETTERS}
    mask = 0
    for ch in positions.lower():
        if ch not in bits:
            raise ValueError(f"bad position {ch!r} in {positions!r}")
        mask |= bits[ch]
    if not mask:
        raise ValueError("at least one key position is required")
    return mask


def normalize(st: Sequence[int], mask: int, thing: int) -> SchemaTriple:
    """Replace the type at every underlined position with owl:Thing."""
    s, p, o = st
    return SchemaTriple(
        s if mask & S_BIT else thing,
        p if mask & P_BIT else thing,
        o if mask & O_BIT else thing,
    )


def project(t: Sequence[int], mask: int) -> tuple:
    """The key of ``t`` for a key type: components outside the mask become None."""
    s, p, o = t
    return (s if mask & S_BIT else None, p if mask & P_BIT else None, o if mask & O_BIT else None)


class Algorithm(str, enum.Enum):
    STORED = "stored"
    ALL = "all"
    LEVELS = "levels"


class MemoryBudgetExceeded(MemoryError):
    pass


@dataclass(frozen=True)
class AlgorithmConfig:
    algorithm: Algorithm = Algorithm.STORED
    u: int = 0
    l: int = 0
    count_all: bool = True
    count_distinct: bool = True
    count_bound: bool = True
    count_unbound: bool = True
    include_meta: bool = False
    sketch: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        if self.u < 0 or self.l < 0:
            raise ValueError("levels must be non-negative")
        if not (self.count_all or self.count_distinct):
            raise ValueError("enable at least one of all/distinct counting")
        if not (self.count_bound or self.count_unbound):
            raise ValueError("enable at least one of bound/unbound counting")

    @property
    def modes(self) -> frozenset[str]:
        flags = {
            "all": self.count_all,
            "distinct": self.count_distinct,
            "bound": self.count_bound,
            "unbound": self.count_unbound,
        }
        return frozenset(k for k, v in flags.items() if v)

    @classmethod
    def from_modes(cls, modes: Iterable[str], **kw) -> "AlgorithmConfig":
        modes = {m.strip() for m in modes if m.strip()}
        unknown = modes - {"all", "distinct", "bound", "unbound"}
        if unknown:
            raise ValueError(f"unknown counting modes: {sorted(unknown)}")
        return cls(
            count_all="all" in modes,
            count_distinct="distinct" in modes,
            count_bound="bound" in modes,
            count_unbound="unbound" in modes,
            **kw,
        )


class TypeEnumerator:
    """The three per-triple enumerators over a read-only graph."""

    def __init__(
        self, hier: HierarchyIndex, ssg: StoredSchemaGraph, include_meta: bool = False
    ) -> None:
        self.h = hier
        self.ssg = ssg
        self.thing = hier.thing
        self.include_meta = include_meta
        self._strips: dict[tuple[int, int, int, str], frozenset[int]] = {}
        self._gp: dict[int, tuple[int, ...]] = {}

    def predicates_of(self, p: int) -> tuple[int, ...]:
        """``p`` and its superpredicates, in a fixed order."""
        hit = self._gp.get(p)
        if hit is None:
            gp = self.h.predicate_closure(p)
            if not self.include_meta:
                gp = gp - self.ssg.meta_predicates
            hit = self._gp[p] = tuple(sorted(gp))
        return hit

    def strip(self, pg: int, u: int, l: int, side: str) -> frozenset[int]:
        """Classes within ``u`` levels above or ``l`` below a declared domain/range."""
        key = (pg, u, l, side)
        hit = self._strips.get(key)
        if hit is None:
            anchors = (declared_domains if side == "s" else declared_ranges)(self.ssg, self.h, pg)
            out: set[int] = set()
            for c in anchors:
                out.update(self.h.superclasses_within(c, u))
                out.update(self.h.subclasses_within(c, l))
            hit = self._strips[key] = frozenset(out)
        return hit

    def candidates(self, pg: int, cfg: AlgorithmConfig) -> tuple[frozenset[int] | None, frozenset[int] | None]:
        """Admissible S and O classes for predicate ``pg``; None means any class."""
        if cfg.algorithm is Algorithm.ALL:
            return None, None
        if cfg.algorithm is Algorithm.STORED:
            return (
                declared_domains(self.ssg, self.h, pg),
                declared_ranges(self.ssg, self.h, pg),
            )
        return self.strip(pg, cfg.u, cfg.l, "s"), self.strip(pg, cfg.u, cfg.l, "o")

    def selection(self, t: Sequence[int], cfg: AlgorithmConfig):
        """Per superpredicate: (pg, selected S classes, selected O classes)."""
        s, p, o = t
        g_s = self.h.type_closure(s)
        g_o = self.h.type_closure(o)
        out = []
        for pg in self.predicates_of(p):
            cs, co = self.candidates(pg, cfg)
            out.append((pg, g_s if cs is None else g_s & cs, g_o if co is None else g_o & co))
        return out

    def emit(self, t: Sequence[int], cfg: AlgorithmConfig) -> frozenset[SchemaTriple]:
        return frozenset(
            SchemaTriple(cs, pg, co)
            for pg, ss, so in self.selection(t, cfg)
            for cs in ss
            for co in so
        )

    def statistics_stored(self, t: Sequence[int]) -> frozenset[SchemaTriple]:
        return self.emit(t, AlgorithmConfig(Algorithm.STORED, include_meta=self.include_meta))

    def statistics_all(self, t: Sequence[int]) -> frozenset[SchemaTriple]:
        return self.emit(t, AlgorithmConfig(Algorithm.ALL, include_meta=self.include_meta))

    def statistics_levels(self, t: Sequence[int], u: int, l: int) -> frozenset[SchemaTriple]:
        return self.emit(t, AlgorithmConfig(Algorithm.LEVELS, u=u, l=l, include_meta=self.include_meta))

    def unbound_keys(self, t: Sequence[int], cfg: AlgorithmConfig) -> frozenset[tuple[SchemaTriple, int]]:
        """Unbound counters touched by ``t``.

        An underlined position is not restricted by any type, so a triple
        counts for (owl:Thing, p, location) at key positions {P, O} even when
        its subject fails every admissible domain class.
        """
        thing = self.thing
        out = set()
        for pg, ss, so in self.selection(t, cfg):
            for mask in MASKS:
                subj = ss if mask & S_BIT else (thing,)
                obj = so if mask & O_BIT else (thing,)
                pred = pg if mask & P_BIT else thing
                for cs, co in product(subj, obj):
                    out.add((SchemaTriple(cs, pred, co), mask))
        return frozenset(out)


class _Counter:
    """An all-counter plus the set of distinct keys seen."""

    __slots__ = ("n", "keys")

    def __init__(self, keys) -> None:
        self.n = 0
        self.keys = keys

    def distinct(self) -> int:
        if isinstance(self.keys, HyperLogLog):
            return int(round(self.keys.count()))
        return len(self.keys)


class StatsBuilder:
    """Worker-private counter maps.

    Bound counters are keyed by (schema triple, mask); unbound counters by
    (normalized schema triple, mask).  Distinct keys at mask SPO are not
    stored when ``spo_from_all`` is set: the driver updates every counter at
    most once per triple and a graph has no duplicate triples, so the count
    of distinct full keys equals the all-count.
    """

    def __init__(self, thing: int, width: int, sketch: bool = False, spo_from_all: bool = False) -> None:
        self.thing = thing
        self.width = width
        self.sketch = sketch
        self.spo_from_all = spo_from_all
        self.bound: dict[tuple[SchemaTriple, int], _Counter] = {}
        self.unbound: dict[tuple[SchemaTriple, int], _Counter] = {}

    def _new_keys(self, mask: int):
        if mask == SPO and self.spo_from_all:
            return None
        return HyperLogLog() if self.sketch else set()

    def counter(self, bound: bool, key: tuple[SchemaTriple, int]) -> _Counter:
        table = self.bound if bound else self.unbound
        c = table.get(key)
        if c is None:
            c = table[key] = _Counter(self._new_keys(key[1]))
        return c

    def pack(self, t: Sequence[int], mask: int) -> int:
        """Encode the key of ``t`` for ``mask`` as one integer."""
        w = self.width
        s, p, o = t
        return (
            ((s + 1) if mask & S_BIT else 0) << (2 * w)
            | ((p + 1) if mask & P_BIT else 0) << w
            | ((o + 1) if mask & O_BIT else 0)
        )

    def update_keytype(self, mode: str, boundness: str, base: Sequence[int], mask: int, t: Sequence[int]) -> None:
        """Count key ``t`` restricted to ``mask`` for the key type (base, mask)."""
        bound = boundness == "bound"
        if not bound and boundness != "unbound":
            raise ValueError(boundness)
        st = SchemaTriple(*base) if bound else normalize(base, mask, self.thing)
        c = self.counter(bound, (st, mask))
        if mode == "all":
            c.n += 1
        elif mode == "distinct":
            if c.keys is not None:
                c.keys.add(self.pack(t, mask))
        else:
            raise ValueError(mode)

    def update_statistics(self, st: Sequence[int], t: Sequence[int], cfg: AlgorithmConfig, seen_unbound: set | None = None) -> None:
        """Update the seven key types of ``st`` for triple ``t``.

        ``seen_unbound`` guards against counting one triple twice in an unbound
        counter shared by several schema triples emitted for it.
        """
        for mask in MASKS:
            if cfg.count_bound:
                if cfg.count_all or self.spo_from_all:
                    self.update_keytype("all", "bound", st, mask, t)
                if cfg.count_distinct:
                    self.update_keytype("distinct", "bound", st, mask, t)
            if cfg.count_unbound:
                key = (normalize(st, mask, self.thing), mask)
                if seen_unbound is not None:
                    if key in seen_unbound:
                        continue
                    seen_unbound.add(key)
                if cfg.count_all or self.spo_from_all:
                    self.update_keytype("all", "unbound", st, mask, t)
                if cfg.count_distinct:
                    self.update_keytype("distinct", "unbound", st, mask, t)

    def merge(self, other: "StatsBuilder") -> None:
        for mine, theirs in ((self.bound, other.bound), (self.unbound, other.unbound)):
            for key, c in theirs.items():
                m = mine.get(key)
                if m is None:
                    mine[key] = c
                    continue
                m.n += c.n
                if m.keys is None:
                    continue
                if isinstance(m.keys, HyperLogLog):
                    m.keys.merge(c.keys)
                else:
                    m.keys |= c.keys

    def distinct_elements(self) -> int:
        total = 0
        for table in (self.bound, self.unbound):
            for c in table.values():
                if isinstance(c.keys, set):
                    total += len(c.keys)
        return total


@dataclass
class RunStats:
    triples: int = 0
    seconds: float = 0.0
    signatures: int = 0
    workers: int = 1
    phases: dict[str, float] = field(default_factory=dict)


class Driver:
    """Runs the configured enumerator over every triple of a graph."""

    # bytes per stored distinct key, used against the memory budget
    BYTES_PER_KEY = 64

    def __init__(self, g: Graph, hier: HierarchyIndex, ssg: StoredSchemaGraph, cfg: AlgorithmConfig,
                 mem_budget_mb: float | None = None) -> None:
        self.g = g
        self.h = hier
        self.ssg = ssg
        self.cfg = cfg
        self.enum = TypeEnumerator(hier, ssg, include_meta=cfg.include_meta)
        self.width = max(1, len(g.terms).bit_length())
        if mem_budget_mb is None:
            env = os.environ.get("KGSTATS_MEM_BUDGET_MB")
            mem_budget_mb = float(env) if env else None
        self.mem_budget_mb = mem_budget_mb

    def new_builder(self) -> StatsBuilder:
        return StatsBuilder(self.h.thing, self.width, sketch=self.cfg.sketch, spo_from_all=True)

    def _plan(self, b: StatsBuilder, t: Triple):
        cfg = self.cfg
        plan = []
        if cfg.count_bound:
            for st in sorted(self.enum.emit(t, cfg)):
                for mask in MASKS:
                    plan.append((b.counter(True, (st, mask)), mask))
        if cfg.count_unbound:
            for key in sorted(self.enum.unbound_keys(t, cfg)):
                plan.append((b.counter(False, key), key[1]))
        return plan

    def run_shard(self, triples: Iterable[Triple], b: StatsBuilder | None = None) -> StatsBuilder:
        """Count one shard.

        Triples are grouped by signature (closed subject types, predicate,
        closed object types): every triple of a group touches the same
        counters, so all-counts grow by the group size and distinct-key sets
        are extended with one bulk update per counter.
        """
        b = b or self.new_builder()
        tc = self.h.type_closure
        groups: dict[tuple, list[Triple]] = {}
        n = 0
        for t in triples:
            sig = (tc(t[0]), t[1], tc(t[2]))
            group = groups.get(sig)
            if group is None:
                groups[sig] = [t]
            else:
                group.append(t)
            n += 1
            if n % 1_000_000 == 0:
                log.info("grouped %d triples", n)

        distinct = self.cfg.count_distinct
        w = self.width
        w2 = 2 * w
        pending = 0
        for ts in groups.values():
            plan = self._plan(b, ts[0])
            size = len(ts)
            keys: dict[int, list[int]] = {}
            for c, mask in plan:
                c.n += size
                if distinct and mask != SPO:
                    ks = keys.get(mask)
                    if ks is None:
                        ks = keys[mask] = [
                            ((s + 1) << w2 if mask & S_BIT else 0)
                            | ((p + 1) << w if mask & P_BIT else 0)
                            | (o + 1 if mask & O_BIT else 0)
                            for s, p, o in ts
                        ]
                    c.keys.update(ks)
                    pending += size
            if pending > 1 << 16:
                self._check_budget(b)
                pending = 0
        self._check_budget(b)
        self.signatures = len(groups)
        return b

    def _check_budget(self, b: StatsBuilder) -> None:
        if self.mem_budget_mb is None:
            return
        used = b.distinct_elements() * self.BYTES_PER_KEY / 2**20
        if used > self.mem_budget_mb:
            raise MemoryBudgetExceeded(
                f"distinct-key sets use ~{used:.0f} MB, over the {self.mem_budget_mb:.0f} MB budget; "
                "rerun with --sketch, fewer levels, or without distinct counting"
            )

    def run(self, workers: int = 1) -> StatsBuilder:
        triples = self.g.triples()
        if workers <= 1 or len(triples) < 2:
            return self.run_shard(triples)
        shards = [triples[i::workers] for i in range(workers)]
        try:
            ctx = multiprocessing.get_context("fork")
        except ValueError:
            log.warning("fork unavailable; counting sequentially")
            return self.run_shard(triples)
        global _ACTIVE
        _ACTIVE = self
        try:
            with ctx.Pool(workers) as pool:
                parts = pool.map(_run_shard_worker, shards)
        finally:
            _ACTIVE = None
        merged = parts[0]
        for part in parts[1:]:
            merged.merge(part)
        return merged


_ACTIVE: Driver | None = None


def _run_shard_worker(shard: list[Triple]) -> StatsBuilder:
    assert _ACTIVE is not None
    return _ACTIVE.run_shard(shard)


def compute_statistics(
    g: Graph,
    hier: HierarchyIndex,
    ssg: StoredSchemaGraph,
    cfg: AlgorithmConfig,
    workers: int = 1,
    mem_budget_mb: float | None = None,
):
    """Count every triple of ``g`` under ``cfg`` and return a StatIndex."""
    from .store import StatIndex

    start = time.perf_counter()
    driver = Driver(g, hier, ssg, cfg, mem_budget_mb=mem_budget_mb)
    builder = driver.run(workers=workers)
    index = StatIndex.from_builder(builder, g, hier, ssg, cfg)
    index.run = RunStats(
        triples=len(g),
        seconds=time.perf_counter() - start,
        signatures=getattr(driver, "signatures", 0),
        workers=workers,
    )
    return index
