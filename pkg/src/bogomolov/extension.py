"""
The tails extension of a presented group and the relations among its tails.

Every defining relation r = w of the presentation gets a new central
generator t (a tail), turning it into r = w t.  The resulting group is a
central extension of the tail group T by G.  Two kinds of relations
among the tails are extracted here:

* overlap relations: both ways of collecting each critical word must agree;
  their differences span the relations needed to make the extension
  consistent, so Z^l / (overlap rows) is the tail group of the extension;
* commuting-pair relations: for x, y commuting in G, the lifted commutator
  [x~, y~] lies in T; forcing it to be trivial kills the universal
  commutator relations.

Tail numbering: power tails t_1..t_n first, then commutator tails in
increasing (i, j) order.
"""

from __future__ import annotations

import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .collector import (Collector, STEP_BUDGET, class_representatives, center,
                        evaluate_overlap, letters_of, overlap_instances, generator,
                        centralizer, random_element, multiply, power)
from .presentation import Presentation
from .intlattice import LatticeAccumulator

FULL_ENUMERATION_LIMIT = 10 ** 4


class InconsistentPresentation(ValueError):
    """The base presentation failed an overlap test."""


class EnumerationBudgetExceeded(RuntimeError):
    pass


class ExtElement(NamedTuple):
    exponents: tuple
    tail: tuple


@dataclass(frozen=True)
class ExtendedPresentation:
    base: Presentation
    mode: str
    l: int
    power_tail: tuple          # 0-based tail index for x_i^p
    comm_tail: dict            # (j, g) 0-based, j > g -> tail index
    relations: tuple           # per tail: ("pow", i) or ("comm", (i, j)), 1-based

    def collector(self, budget: int | None = None) -> Collector:
        return Collector(self.base, tails=(self.l, self.power_tail, self.comm_tail), budget=budget)

    def tail_symbol(self, k: int) -> str:
        """Relation symbol of tail k (0-based): 'b^p' or '[d,a]'."""
        g = self.base.generators
        kind, key = self.relations[k]
        if kind == "pow":
            return f"{g[key - 1]}^p"
        i, j = key
        return f"[{g[i - 1]},{g[j - 1]}]"

    def tail_label(self, k: int) -> str:
        """Defining relator of tail k, e.g. '[d,a] e^-1' (the value of t_k)."""
        P = self.base
        kind, key = self.relations[k]
        w = P.power_rhs[key - 1] if kind == "pow" else P.comm_rhs.get(key, ())
        inv = " ".join(f"{P.generators[h - 1]}^{-e}" for h, e in reversed(w))
        head = self.tail_symbol(k)
        return f"{head} {inv}" if inv else head


def attach_tails(pres: Presentation, mode: str = "reduced") -> ExtendedPresentation:
    """Add one tail per power relation and per materialized commutator relation.

    ``reduced`` materializes the nontrivial commutator relations only,
    ``full`` every pair i > j.
    """
    if mode not in ("reduced", "full"):
        raise ValueError(f"unknown tail mode {mode!r}")
    n = pres.n
    relations = [("pow", i) for i in range(1, n + 1)]
    if mode == "full":
        pairs = [(i, j) for i in range(2, n + 1) for j in range(1, i)]
    else:
        pairs = sorted(k for k, w in pres.comm_rhs.items() if w)
    relations += [("comm", key) for key in pairs]
    comm_tail = {(i - 1, j - 1): n + k for k, (i, j) in enumerate(pairs)}
    return ExtendedPresentation(pres, mode, len(relations), tuple(range(n)), comm_tail, tuple(relations))


def _gen_index(pres, g):
    return pres.index(g) if isinstance(g, str) else g


def ext_normalize(word, ext: ExtendedPresentation) -> ExtElement:
    """Collect a GenWord [(gen, exponent), ...] in the tails extension."""
    c = ext.collector()
    letters, extra = c.word_letters(word)
    e, t = c.collect([0] * ext.base.n, extra, letters)
    return ExtElement(tuple(e), tuple(t))


def ext_multiply(x: ExtElement, y: ExtElement, c: Collector) -> ExtElement:
    e, t = c.collect(list(x.exponents), list(x.tail), letters_of(y.exponents))
    return ExtElement(tuple(e), tuple(a + b for a, b in zip(t, y.tail)))


# ------------------------------------------------------------ relation rows

@dataclass
class RelationMatrix:
    width: int
    rows: list = field(default_factory=list)
    provenance: list = field(default_factory=list)
    sampled: bool = False

    def append(self, row, why: str):
        if len(row) != self.width:
            raise ValueError("row length does not match the tail count")
        self.rows.append(tuple(int(v) for v in row))
        self.provenance.append(why)

    def extend(self, other: "RelationMatrix"):
        for r, w in zip(other.rows, other.provenance):
            self.append(r, w)
        self.sampled = self.sampled or other.sampled

    def __len__(self):
        return len(self.rows)

    def canonical(self) -> "RelationMatrix":
        """Rows sorted, duplicates removed (first provenance in sort order kept)."""
        out = RelationMatrix(self.width, sampled=self.sampled)
        seen = set()
        for r, w in sorted(zip(self.rows, self.provenance)):
            if r not in seen:
                seen.add(r)
                out.append(r, w)
        return out

    def dump(self) -> str:
        return "".join(f"{w}: {' '.join(map(str, r))}\n" for r, w in zip(self.rows, self.provenance))


def _names(pres, idx):
    return " ".join(pres.generators[i] for i in idx)


_FAMILY = {1: "assoc", 2: "pow-left", 3: "pow-right", 4: "pow-self"}


def overlap_relations(ext: ExtendedPresentation, budget: int | None = None) -> RelationMatrix:
    """Tail differences of the four overlap families (nonzero rows only)."""
    c = ext.collector(budget)
    M = RelationMatrix(ext.l)
    for family, idx in overlap_instances(ext.base.n):
        (le, lt), (re_, rt) = evaluate_overlap(c, family, idx)
        if le != re_:
            raise InconsistentPresentation(
                f"{ext.base.name} at p={ext.base.prime}: overlap {_FAMILY[family]} "
                f"({_names(ext.base, idx)}) collects to {tuple(le)} and {tuple(re_)}")
        row = [a - b for a, b in zip(lt, rt)]
        if any(row):
            M.append(row, f"{_FAMILY[family]} {_names(ext.base, idx)}")
    return M


def pair_row(x, y, c: Collector):
    """Tail of [x~, y~] for commuting x, y (normal-word lifts): tail(xy) - tail(yx)."""
    zero = [0] * c.l
    e1, t1 = c.collect(list(x), list(zero), letters_of(y))
    e2, t2 = c.collect(list(y), list(zero), letters_of(x))
    if e1 != e2:
        raise ValueError(f"elements {x} and {y} do not commute")
    return [a - b for a, b in zip(t1, t2)]


def _word(pres, x):
    parts = [pres.generators[i] + ("" if k == 1 else f"^{k}") for i, k in enumerate(x) if k]
    return "".join(parts) if parts else "1"


def _rows_for_pairs(args):
    ext, pairs = args
    c = ext.collector()
    out = []
    for x, y in pairs:
        row = pair_row(x, y, c)
        if any(row):
            out.append((tuple(row), f"cp [{_word(ext.base, x)},{_word(ext.base, y)}]"))
    return out


def default_workers() -> int:
    env = os.environ.get("BOGOMOLOV_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _evaluate_pairs(ext, pairs, workers):
    if workers is None:
        workers = default_workers()
    if workers <= 1 or len(pairs) < 64:
        results = _rows_for_pairs((ext, pairs))
    else:
        shards = [pairs[k::workers] for k in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for part in pool.map(_rows_for_pairs, [(ext, s) for s in shards]) for r in part]
    results.sort()
    return results


def center_reduced_pairs(pres: Presentation):
    """Commuting pairs whose rows generate the same lattice as all commuting pairs.

    For fixed x the map y -> [x~, y~] is a homomorphism on C(x) with values
    in the central tail group, and it is unchanged by simultaneous
    conjugation; so x may run over class representatives and y over a
    generating set of C(x).  Multiplying x by a central z adds the value
    [z~, y~], and replacing x by a coprime power scales the value, so
    representatives are needed only up to those moves, together with the
    pairs (z, g) for z in a basis of the center and g a pc generator.
    """
    pairs = []
    for rep in class_representatives(pres):
        for y in rep.centralizer:
            pairs.append((rep.element, y))
    gens = [generator(pres, g) for g in range(1, pres.n + 1)]
    for z in center(pres):
        for g in gens:
            pairs.append((z, g))
    return pairs


def _full_rows(ext: ExtendedPresentation, limit: int):
    """All commuting pairs, vectorized over the multiplication table."""
    P = ext.base
    p, n, l = P.prime, P.n, ext.l
    N = p ** n
    if N > limit:
        raise EnumerationBudgetExceeded(
            f"full commuting-pair enumeration needs p^n = {N} <= {limit}; use center-reduced")
    c = ext.collector()
    elems = np.array(list(np.ndindex(*([p] * n))), dtype=np.int64)
    weights = p ** np.arange(n - 1, -1, -1, dtype=np.int64)
    rm = np.zeros((N, n), dtype=np.int64)
    rt = np.zeros((N, n, l), dtype=np.int64)
    for u in range(N):
        x = elems[u].tolist()
        for g in range(n):
            e, t = c.collect(list(x), [0] * l, [(g, 1)])
            rm[u, g] = int(np.dot(e, weights))
            rt[u, g] = t

    def products(U, V, with_tail):
        cur = U.copy()
        tail = np.zeros((len(U), l), dtype=np.int64) if with_tail else None
        ev = elems[V]
        for g in range(n):
            for r in range(p - 1):
                mask = ev[:, g] > r
                if not mask.any():
                    continue
                idx = cur[mask]
                if with_tail:
                    tail[mask] += rt[idx, g]
                cur[mask] = rm[idx, g]
        return cur, tail

    # base multiplication table, then the commuting pairs u < v
    allv = np.arange(N, dtype=np.int64)
    MT = np.empty((N, N), dtype=np.int64)
    step = max(1, 200000 // N)
    for s in range(0, N, step):
        U = np.repeat(allv[s:s + step], N)
        V = np.tile(allv, len(allv[s:s + step]))
        MT[s:s + step] = products(U, V, False)[0].reshape(-1, N)
    PU, PV = np.nonzero(np.triu(MT == MT.T, k=1))
    del MT
    # only rows that enlarge the running lattice are kept, so the result
    # spans the same lattice as all N-choose-2 candidate rows
    acc = LatticeAccumulator(l)
    chunk = 50000
    for s in range(0, len(PU), chunk):
        U, V = PU[s:s + chunk], PV[s:s + chunk]
        _, t1 = products(U, V, True)
        _, t2 = products(V, U, True)
        rows = t1 - t2
        if rows.size and np.abs(rows).max() > 2 ** 40:
            raise OverflowError("tail entries too large for the vectorized path")
        nz = rows.any(axis=1)
        rows, U, V = rows[nz], U[nz], V[nz]
        if not len(rows):
            continue
        acc.add(rows, list(zip(U, V)))
    out = []
    for row, (u, v) in acc.kept:
        x, y = tuple(int(e) for e in elems[u]), tuple(int(e) for e in elems[v])
        out.append((tuple(row), f"cp [{_word(P, x)},{_word(P, y)}] (reduced)"))
    return out


@dataclass(frozen=True)
class Sampled:
    seed: int = 0
    count: int = 1000


def parse_strategy(s):
    """'full', 'center-reduced' or 'sampled(seed,count)'."""
    if isinstance(s, Sampled) or s in ("full", "center-reduced"):
        return s
    if isinstance(s, str) and s.startswith("sampled"):
        inner = s[len("sampled"):].strip("() ")
        vals = [int(v) for v in inner.split(",") if v.strip()] if inner else []
        return Sampled(*vals)
    raise ValueError(f"unknown strategy {s!r}")


def commuting_pair_relations(ext: ExtendedPresentation, strategy="center-reduced",
                             workers: int | None = None,
                             full_limit: int = FULL_ENUMERATION_LIMIT) -> RelationMatrix:
    """Tail rows of lifted commutators of commuting pairs, sorted canonically."""
    strategy = parse_strategy(strategy)
    P = ext.base
    M = RelationMatrix(ext.l)
    if strategy == "full":
        rows = _full_rows(ext, full_limit)
    elif strategy == "center-reduced":
        rows = _evaluate_pairs(ext, center_reduced_pairs(P), workers)
    else:
        rng = random.Random(strategy.seed)
        pairs = []
        for _ in range(strategy.count):
            x = random_element(P, rng)
            y = (0,) * P.n
            for h in centralizer(x, P):
                y = multiply(y, power(h, rng.randrange(P.prime), P), P)
            pairs.append((x, y))
        rows = _evaluate_pairs(ext, pairs, workers)
        M.sampled = True
    for r, why in rows:
        M.append(r, why)
    return M
