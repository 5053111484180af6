"""
Schur and Bogomolov multipliers from a consistent polycyclic presentation.

Pipeline: attach tails, collect the overlap relations (and, for the
Bogomolov multiplier, the commuting-pair relations), then read the abelian
invariants of Z^l modulo the relation lattice from its Smith normal form.
The torsion part is the multiplier; the free part must have rank n.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from math import comb, gcd

from .collector import (commutator, multiply, nilpotency_class, power, prop27_fast_path,
                        random_element, normalize, identity)
from .extension import (ExtendedPresentation, RelationMatrix, Sampled, attach_tails,
                        commuting_pair_relations, overlap_relations, parse_strategy)
from .intlattice import (AbelianType, abelian_type, inverse_unimodular, lattice_basis,
                         smith_normal_form)
from .presentation import Presentation, parse_presentation, render_presentation


class SampledStrategyRefused(ValueError):
    """Sampled commuting pairs cannot support a verdict."""


@dataclass
class MultiplierOptions:
    mode: str = "reduced"
    strategy: object = "center-reduced"
    fast_path: bool = False
    schur: bool = False
    workers: int | None = None
    full_limit: int = 10 ** 4


@dataclass
class TailQuotient:
    """Z^l modulo a relation lattice, with the data to name its generators."""
    ext: ExtendedPresentation
    basis: list                 # Hermite rows of the lattice
    invariants: AbelianType
    generators: list            # coefficient vectors of torsion generators


def _reduce_symmetric(v, basis):
    v = list(v)
    for r in basis:
        c = next(i for i, x in enumerate(r) if x)
        d = r[c]
        q = (2 * v[c] + d) // (2 * d)
        if q:
            v = [a - q * b for a, b in zip(v, r)]
    return v


def _nice_generator(v, d, basis):
    """Shortest representative of the cyclic generator v of order d."""
    best = None
    for k in range(1, d):
        if gcd(k, d) != 1:
            continue
        w = _reduce_symmetric([k * x for x in v], basis)
        key = (sum(abs(x) for x in w), k)
        if best is None or key < best[0]:
            best = (key, w)
    w = best[1]
    first = next((x for x in w if x), 0)
    if first < 0:
        w = [-x for x in w]
    return w


def tail_quotient(ext: ExtendedPresentation, rows) -> TailQuotient:
    rows = getattr(rows, "rows", rows)
    basis = lattice_basis(rows, ext.l)
    snf = smith_normal_form(basis, ext.l)
    diag = snf.diagonal
    inv = abelian_type(diag, ext.l)
    gens = []
    if inv.torsion:
        Qinv = inverse_unimodular(snf.Q)
        for k, d in enumerate(diag):
            if abs(d) > 1:
                gens.append(_nice_generator(Qinv[k], abs(d), basis))
    return TailQuotient(ext, basis, inv, gens)


def describe_generator(ext: ExtendedPresentation, v) -> str:
    """Product of relation symbols, e.g. '[c,b] [d,a]^-1'."""
    parts = []
    for k, c in enumerate(v):
        if c:
            s = ext.tail_symbol(k)
            parts.append(s if c == 1 else f"{s}^{c}")
    return " ".join(parts) if parts else "1"


def describe_tails(ext: ExtendedPresentation, v) -> str:
    """The same combination in tail names, e.g. 't10 t11^-1'."""
    parts = [f"t{k + 1}" + ("" if c == 1 else f"^{c}") for k, c in enumerate(v) if c]
    return " ".join(parts) if parts else "1"


def schur_multiplier(pres: Presentation, full_quotient: bool = False):
    """M(G): torsion of the full-mode tail group under overlap relations only."""
    ext = attach_tails(pres, "full")
    q = tail_quotient(ext, overlap_relations(ext))
    if full_quotient:
        return q
    return AbelianType(q.invariants.torsion, 0)


@dataclass
class MultiplierReport:
    group: str
    prime: int
    mode: str
    strategy: str
    schur: list | None
    invariants: list
    generators: list
    free_rank: int | None
    fast_path: str
    timings_ms: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    n: int = 0
    tail_generators: list = field(default_factory=list)
    tail_labels: list = field(default_factory=list)
    generator_vectors: list = field(default_factory=list)

    @property
    def trivial(self) -> bool:
        return not self.invariants

    def to_dict(self, timings: bool = True) -> dict:
        d = {
            "group": self.group,
            "prime": self.prime,
            "mode": self.mode,
            "strategy": self.strategy,
            "schur": self.schur,
            "bogomolov": {"invariants": list(self.invariants), "generators": list(self.generators)},
            "free_rank": self.free_rank,
            "fast_path": self.fast_path,
            "timings_ms": dict(self.timings_ms) if timings else None,
        }
        if self.params:
            d["params"] = dict(self.params)
        return d

    def to_json(self, timings: bool = True) -> str:
        return json.dumps(self.to_dict(timings), indent=2)

    def text(self) -> str:
        lines = [f"group {self.group}  p={self.prime}  tails={self.mode}  pairs={self.strategy}"]
        if self.params:
            lines.append("params " + " ".join(f"{k}={v}" for k, v in sorted(self.params.items())))
        if self.schur is not None:
            lines.append("M(G)  = " + (" x ".join(f"Z_{d}" for d in self.schur) or "0"))
        if self.free_rank is None:
            lines.append(f"B0~(G) = 0  (fast path: {self.fast_path})")
            return "\n".join(lines) + "\n"
        lines.append("B0~(G) = " + (" x ".join(f"Z_{d}" for d in self.invariants) or "0"))
        for d, g, t in zip(self.invariants, self.generators, self.tail_generators):
            lines.append(f"  order {d}: {g}   ({t})")
        for lab in self.tail_labels:
            lines.append(f"    {lab}")
        lines.append(f"free rank {self.free_rank} (n = {self.n})")
        lines.append(f"fast path: {self.fast_path}")
        return "\n".join(lines) + "\n"


def _strategy_name(s) -> str:
    if isinstance(s, Sampled):
        return f"sampled({s.seed},{s.count})"
    return s


def bogomolov_relations(pres: Presentation, options: MultiplierOptions, timings=None):
    """Extended presentation and all relation rows (overlaps, then commuting pairs)."""
    timings = {} if timings is None else timings
    t0 = time.perf_counter()
    ext = attach_tails(pres, options.mode)
    rows = overlap_relations(ext)
    t1 = time.perf_counter()
    cp = commuting_pair_relations(ext, options.strategy, workers=options.workers,
                                  full_limit=options.full_limit)
    t2 = time.perf_counter()
    timings["overlaps"] = round((t1 - t0) * 1000, 3)
    timings["commuting_pairs"] = round((t2 - t1) * 1000, 3)
    rows.extend(cp)
    return ext, rows


def bogomolov_multiplier(pres: Presentation, options: MultiplierOptions | None = None,
                         params: dict | None = None, **kw) -> MultiplierReport:
    """B~0(G) as the torsion of Z^l modulo overlap and commuting-pair rows."""
    if options is None:
        options = MultiplierOptions(**kw)
    elif kw:
        raise TypeError("pass either options or keyword overrides")
    options.strategy = parse_strategy(options.strategy)
    if isinstance(options.strategy, Sampled):
        raise SampledStrategyRefused("sampled commuting pairs are for exploration only")
    timings = {}
    t = time.perf_counter()
    fast = prop27_fast_path(pres)
    timings["fast_path"] = round((time.perf_counter() - t) * 1000, 3)
    schur = None
    if options.schur:
        t = time.perf_counter()
        schur = list(schur_multiplier(pres).torsion)
        timings["schur"] = round((time.perf_counter() - t) * 1000, 3)
    report = MultiplierReport(pres.name, pres.prime, options.mode, _strategy_name(options.strategy),
                              schur, [], [], None, fast, timings, dict(params or {}), pres.n)
    if options.fast_path and fast == "trivial":
        return report
    ext, rows = bogomolov_relations(pres, options, timings)
    t = time.perf_counter()
    q = tail_quotient(ext, rows)
    timings["smith"] = round((time.perf_counter() - t) * 1000, 3)
    report.invariants = list(q.invariants.torsion)
    report.free_rank = q.invariants.free_rank
    report.generator_vectors = [list(v) for v in q.generators]
    report.generators = [describe_generator(ext, v) for v in q.generators]
    report.tail_generators = [describe_tails(ext, v) for v in q.generators]
    used = sorted({k for v in q.generators for k, c in enumerate(v) if c})
    report.tail_labels = [f"t{k + 1} = {ext.tail_label(k)}" for k in used]
    return report


# ------------------------------------------------------------ CP extension

def _free_complement(basis, l):
    chosen = []
    rank = len(basis)
    current = list(basis)
    for j in range(l):
        e = [0] * l
        e[j] = 1
        trial = lattice_basis(current + [e], l)
        if len(trial) != len(current) + 1:
            continue
        # accept only if no new torsion appears
        before = abelian_type(smith_normal_form(current, l).diagonal, l).torsion
        after = abelian_type(smith_normal_form(trial, l).diagonal, l).torsion
        if _order(after) == _order(before):
            chosen.append(j)
            current = trial
        if len(current) == l:
            break
    return chosen, current


def _order(torsion):
    out = 1
    for d in torsion:
        out *= d
    return out


def cp_extension(pres: Presentation, report: MultiplierReport | None = None,
                 options: MultiplierOptions | None = None) -> str:
    """Presentation text of a commutativity-preserving central extension by B~0(G).

    The tail group modulo all relations is B~0(G) times a free part; the
    free part is split off by setting a set of original tails to 1 (chosen
    greedily, lowest index first).  The surviving tails become new central
    generators T1, T2, ... appended after the original ones.
    """
    options = options or MultiplierOptions()
    ext, rows = bogomolov_relations(pres, options)
    basis = lattice_basis(rows.rows, ext.l)
    torsion = abelian_type(smith_normal_form(basis, ext.l).diagonal, ext.l).torsion
    if not torsion:
        return render_presentation(pres)
    chosen, lattice = _free_complement(basis, ext.l)
    if _order(abelian_type(smith_normal_form(lattice, ext.l).diagonal, ext.l).torsion) != _order(torsion) \
            or len(lattice) != ext.l:
        raise RuntimeError("no complement spanned by original tails")
    snf = smith_normal_form(lattice, ext.l)
    diag = snf.diagonal
    cyclic = [(k, abs(d)) for k, d in enumerate(diag) if abs(d) > 1]
    p = pres.prime
    # image of tail j in cyclic factor k is Q[j][k] mod d_k
    images = [[snf.Q[j][k] % d for k, d in cyclic] for j in range(ext.l)]
    # rescale each factor so the first tail hitting it with a unit coefficient maps to 1
    for col, (k, d) in enumerate(cyclic):
        unit = next((images[j][col] for j in range(ext.l) if gcd(images[j][col], d) == 1), 1)
        inv = pow(unit, -1, d)
        for j in range(ext.l):
            images[j][col] = images[j][col] * inv % d
    # new generators: factor of order p^m gets a chain T, T_2, ..., T_m
    names = list(pres.generators)
    chains = []
    for col, (k, d) in enumerate(cyclic):
        m = 0
        while p ** m < d:
            m += 1
        if p ** m != d:
            raise ValueError(f"torsion order {d} is not a power of p")
        base = f"T{col + 1}"
        chain = [base] + [f"{base}_{s}" for s in range(2, m + 1)]
        chains.append(chain)
        names.extend(chain)

    def tail_word(j):
        parts = []
        for col, (k, d) in enumerate(cyclic):
            a = images[j][col]
            for name in chains[col]:
                a, r = divmod(a, p)
                if r:
                    parts.append(name if r == 1 else f"{name}^{r}")
                # carries are absorbed by the chain's power relations
        return parts

    g = pres.generators
    lines = [f"group {pres.name}_cp", f"prime {p}", "generators " + " ".join(names)]
    for kind, key in ext.relations:
        j = ext.relations.index((kind, key))
        extra = tail_word(j)
        if kind == "pow":
            base = pres.word_str(pres.power_rhs[key - 1]).split() if pres.power_rhs[key - 1] else []
            if extra:
                lines.append(f"pow {g[key - 1]} = {' '.join(base + extra)}")
            elif base:
                lines.append(f"pow {g[key - 1]} = {' '.join(base)}")
        else:
            i, jj = key
            w = pres.comm_rhs.get(key, ())
            base = pres.word_str(w).split() if w else []
            if base or extra:
                lines.append(f"comm [{g[i - 1]},{g[jj - 1]}] = {' '.join(base + extra)}")
    for kind_key in sorted(pres.comm_rhs):
        if ("comm", kind_key) not in ext.relations:
            i, jj = kind_key
            lines.append(f"comm [{g[i - 1]},{g[jj - 1]}] = {pres.word_str(pres.comm_rhs[kind_key])}")
    for chain in chains:
        for a, b in zip(chain, chain[1:]):
            lines.append(f"pow {a} = {b}")
        lines.append(f"pow {chain[-1]} = 1")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------ power-commutator check

def a_coefficient(n: int) -> int:
    return n * (n - 1) * (2 * n - 1) // 6


def lemma24_terms(x, y, n, pres):
    """The eight (commutator, exponent) factors of the expansion of [x^n, y]."""
    P = pres

    def c(u, v):
        return commutator(u, v, P)

    xy = c(x, y)
    xyx = c(xy, x)
    return [
        (xy, n),
        (xyx, comb(n, 2)),
        (c(xyx, x), comb(n, 3)),
        (c(c(xyx, x), x), comb(n, 4)),
        (c(xyx, xy), a_coefficient(n)),
        (c(c(c(xyx, x), x), x), comb(n, 5)),
        (c(c(xyx, xy), x), comb(n, 3) + 2 * comb(n, 4)),
        (c(c(xyx, x), xy), comb(n, 3) + comb(n, 4)),
    ]


def lemma24_rhs(x, y, n, pres):
    out = identity(pres)
    for term, e in lemma24_terms(x, y, n, pres):
        out = multiply(out, power(term, e, pres), pres)
    return out


def lemma24_lhs(x, y, n, pres):
    return commutator(power(x, n, pres), y, pres)


@dataclass
class CheckReport:
    trials: int
    failures: list
    seed: int

    @property
    def passed(self) -> bool:
        return not self.failures


class ClassTooLarge(ValueError):
    pass


def lemma24_property_check(pres: Presentation, seed: int = 0, trials: int = 200,
                           n_values=None) -> CheckReport:
    """Compare [x^n, y] with its eight-term expansion on random inputs."""
    cl = nilpotency_class(pres)
    if cl > 6:
        raise ClassTooLarge(f"class {cl} exceeds 6")
    rng = random.Random(seed)
    failures = []
    for k in range(trials):
        x = random_element(pres, rng)
        y = random_element(pres, rng)
        n = n_values[k % len(n_values)] if n_values else rng.randint(1, 2 * pres.prime)
        lhs = lemma24_lhs(x, y, n, pres)
        rhs = lemma24_rhs(x, y, n, pres)
        if lhs != rhs:
            failures.append((x, y, n, lhs, rhs))
    return CheckReport(trials, failures, seed)
