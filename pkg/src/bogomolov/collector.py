"""
Arithmetic in a group given by a polycyclic presentation.

Elements are exponent tuples (e_1, ..., e_n) with 0 <= e_i < p, stored
0-based.  Words handed to :func:`normalize` are sequences of
(generator, exponent) pairs with 1-based generator indices (or names) and
arbitrary integer exponents.

Collection is from the left: the collected prefix is kept as an exponent
vector and the rest of the word sits on a stack.  Multiplying the prefix
x_1^e_1 ... x_n^e_n by a letter x_g moves x_g past the suffix
v = x_{g+1}^e_{g+1} ... x_n^e_n using v x_g = x_g v^{x_g}, where each
x_j^{x_g} = x_j [x_j, x_g] is a normal word read off the presentation.

The same engine runs in a central extension when a tail table is supplied:
every application of a relation then also adds its tail vector.  That is
what the extension module builds on.

The pc series G = G_1 > G_2 > ... > G_{n+1} = 1, G_k = <x_k, ..., x_n>, is
central with factors of order p for every valid presentation, since each
commutator [x_i, x_j] lies in G_{max(i,j)+1}.  Centralizers and class
representatives below work layer by layer down this series.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .presentation import Presentation

STEP_BUDGET = 10 ** 7


class CollectionBudgetExceeded(RuntimeError):
    """Collection did not terminate within the step budget (a defect indicator)."""


class Collector:
    """Collection engine for ``pres``, optionally with central tails.

    ``tails`` is ``None`` for the plain group.  Otherwise it is a tuple
    ``(l, power_tail, comm_tail)`` where ``power_tail[g]`` is the tail index
    attached to x_g^p (or None) and ``comm_tail[(j, g)]`` (0-based, j > g) the
    tail index attached to [x_j, x_g] (or None).
    """

    def __init__(self, pres: Presentation, tails=None, budget: int | None = None):
        self.pres = pres
        self.p = p = pres.prime
        self.n = n = pres.n
        self.budget = STEP_BUDGET if budget is None else budget
        if tails is None:
            self.l = 0
            power_tail = [None] * n
            comm_tail = {}
        else:
            self.l, power_tail, comm_tail = tails
        self.with_tails = tails is not None
        self.power_tail = list(power_tail)
        # x_g^p as a normal word, 0-based
        self.power_word = [tuple((h - 1, e) for h, e in w) for w in pres.power_rhs]
        # conj[g][j] = normal word of x_j^{x_g} for j > g; ctail[g][j] its tail index
        self.conj = [[None] * n for _ in range(n)]
        self.ctail = [[None] * n for _ in range(n)]
        self.nontrivial = [[] for _ in range(n)]
        for g in range(n):
            for j in range(g + 1, n):
                c = pres.comm_rhs.get((j + 1, g + 1), ())
                self.conj[g][j] = ((j, 1),) + tuple((h - 1, e) for h, e in c)
                self.ctail[g][j] = comm_tail.get((j, g))
                if c:
                    self.nontrivial[g].append(j)
        # tails picked up while passing x_g over a letter that commutes with it
        self.silent = [[j for j in range(g + 1, n) if self.ctail[g][j] is not None
                        and j not in self.nontrivial[g]] for g in range(n)]
        self._inverse_gen = [None] * n

    # ------------------------------------------------------------ core

    def _new_tail(self):
        return [0] * self.l if self.with_tails else None

    def collect(self, exps, tail, letters):
        """Multiply the collected element (exps, tail) in place by ``letters``.

        ``letters`` is a sequence of (0-based generator, exponent >= 1).
        """
        stack = list(reversed(letters))
        e = exps
        p = self.p
        steps = 0
        budget = self.budget
        conj, ctail, nontrivial, silent = self.conj, self.ctail, self.nontrivial, self.silent
        power_word, power_tail = self.power_word, self.power_tail
        has_tail = tail is not None
        while stack:
            g, k = stack.pop()
            steps += 1
            if steps > budget:
                raise CollectionBudgetExceeded("collection budget exceeded")
            m = -1
            for j in nontrivial[g]:
                if e[j]:
                    m = j
                    break
            if m < 0:
                # the suffix commutes with x_g
                if has_tail:
                    for j in silent[g]:
                        if e[j]:
                            tail[ctail[g][j]] += k * e[j]
                eg = e[g] + k
                if eg < p:
                    e[g] = eg
                    continue
                q, r = divmod(eg, p)
                e[g] = r
                if has_tail and power_tail[g] is not None:
                    tail[power_tail[g]] += q
                w = power_word[g]
                if w:
                    v = [(j, e[j]) for j in range(g + 1, self.n) if e[j]]
                    for j, _ in v:
                        e[j] = 0
                    stack.extend(reversed(v))
                    stack.extend(reversed(w * q))
                continue
            if k > 1:
                stack.append((g, k - 1))
            if has_tail:
                for j in silent[g]:
                    if j < m and e[j]:
                        tail[ctail[g][j]] += e[j]
            moved = []
            row = conj[g]
            trow = ctail[g]
            for j in range(m, self.n):
                ej = e[j]
                if ej:
                    moved.extend(row[j] * ej)
                    if has_tail and trow[j] is not None:
                        tail[trow[j]] += ej
                    e[j] = 0
            stack.extend(reversed(moved))
            eg = e[g] + 1
            if eg < p:
                e[g] = eg
                continue
            e[g] = 0
            if has_tail and power_tail[g] is not None:
                tail[power_tail[g]] += 1
            w = power_word[g]
            if w:
                v = [(j, e[j]) for j in range(g + 1, m) if e[j]]
                for j, _ in v:
                    e[j] = 0
                stack.extend(reversed(v))
                stack.extend(reversed(w))
        return e, tail

    # ------------------------------------------------------------ words

    def _gen_index(self, g):
        if isinstance(g, str):
            return self.pres.index(g) - 1
        if not 1 <= g <= self.n:
            raise ValueError(f"generator index {g} out of range 1..{self.n}")
        return g - 1

    def inverse_generator(self, g):
        """x_g^{-1} (0-based g) as (exponents, tail)."""
        if self._inverse_gen[g] is None:
            unit = [0] * self.n
            unit[g] = 1
            self._inverse_gen[g] = self._invert(unit, self._new_tail())
        return self._inverse_gen[g]

    def word_letters(self, word):
        """Expand a GenWord into (collected-prefix letters, extra tail)."""
        letters = []
        extra = self._new_tail()
        for g, k in word:
            g = self._gen_index(g)
            if k >= 0:
                if k:
                    letters.append((g, k))
            else:
                inv, t = self.inverse_generator(g)
                lw = [(j, x) for j, x in enumerate(inv) if x]
                for _ in range(-k):
                    letters.extend(lw)
                    if extra is not None:
                        for i, v in enumerate(t):
                            extra[i] += v
        return letters, extra

    def _invert(self, exps, tail):
        acc = list(exps)
        acc_tail = list(tail) if tail is not None else None
        out = [0] * self.n
        for i in range(self.n):
            if acc[i]:
                k = self.p - acc[i]
                out[i] = k
                self.collect(acc, acc_tail, [(i, k)])
        # exps * out = acc_tail (central), so inverse is out * acc_tail^-1
        if acc_tail is not None:
            acc_tail = [-v for v in acc_tail]
        return tuple(out), acc_tail


def letters_of(x):
    """Normal-word letters of an exponent vector (0-based)."""
    return [(j, k) for j, k in enumerate(x) if k]


# collectors are cheap to share; cache one per presentation
_CACHE: dict = {}


def collector_for(pres: Presentation) -> Collector:
    key = id(pres)
    hit = _CACHE.get(key)
    if hit is not None and hit[0] is pres:
        return hit[1]
    if len(_CACHE) > 256:
        _CACHE.clear()
    c = Collector(pres)
    _CACHE[key] = (pres, c)
    return c


def identity(pres: Presentation):
    return (0,) * pres.n


def generator(pres: Presentation, g) -> tuple:
    """The pc generator g (1-based index or name) as an element."""
    i = pres.index(g) if isinstance(g, str) else g
    v = [0] * pres.n
    v[i - 1] = 1
    return tuple(v)


def normalize(word, pres: Presentation) -> tuple:
    """Normal form of a GenWord [(gen, exponent), ...]."""
    c = collector_for(pres)
    letters, _ = c.word_letters(word)
    e, _ = c.collect([0] * pres.n, None, letters)
    return tuple(e)


def multiply(x, y, pres: Presentation) -> tuple:
    c = collector_for(pres)
    e, _ = c.collect(list(x), None, letters_of(y))
    return tuple(e)


def invert(x, pres: Presentation) -> tuple:
    return collector_for(pres)._invert(x, None)[0]


def power(x, k: int, pres: Presentation) -> tuple:
    if k < 0:
        x, k = invert(x, pres), -k
    result = identity(pres)
    base = tuple(x)
    while k:
        if k & 1:
            result = multiply(result, base, pres)
        base = multiply(base, base, pres)
        k >>= 1
    return result


def commutator(x, y, pres: Presentation, *more) -> tuple:
    """[x, y] = x^-1 y^-1 x y; extra arguments nest to the left."""
    xy = multiply(x, y, pres)
    yx = multiply(y, x, pres)
    c = multiply(invert(yx, pres), xy, pres)
    for z in more:
        c = commutator(c, z, pres)
    return c


def random_element(pres: Presentation, rng: random.Random) -> tuple:
    return tuple(rng.randrange(pres.prime) for _ in range(pres.n))


def all_elements(pres: Presentation):
    return itertools.product(range(pres.prime), repeat=pres.n)


def depth(x) -> int:
    """Index (0-based) of the first nonzero exponent, len(x) for the identity."""
    for i, v in enumerate(x):
        if v:
            return i
    return len(x)


# ------------------------------------------------------------ consistency

class OverlapFailure(NamedTuple):
    family: int
    indices: tuple
    left: tuple
    right: tuple


@dataclass
class ConsistencyReport:
    consistent: bool
    failures: list = field(default_factory=list)
    enumerated_order: int | None = None
    expected_order: int | None = None


def overlap_instances(n: int):
    """The four overlap families as (family, 0-based indices), in a fixed order.

    1: x_k (x_j x_i) = (x_k x_j) x_i            k > j > i
    2: (x_j^p) x_i = x_j^(p-1) (x_j x_i)        j > i
    3: x_j (x_i^p) = (x_j x_i) x_i^(p-1)        j > i
    4: (x_i^p) x_i = x_i (x_i^p)
    """
    for k in range(n):
        for j in range(k):
            for i in range(j):
                yield 1, (k, j, i)
    for j in range(n):
        for i in range(j):
            yield 2, (j, i)
    for j in range(n):
        for i in range(j):
            yield 3, (j, i)
    for i in range(n):
        yield 4, (i,)


def evaluate_overlap(c: Collector, family: int, idx):
    """Collect both sides of one overlap; returns ((exps, tail), (exps, tail))."""
    n, p = c.n, c.p

    def unit(i):
        v = [0] * n
        v[i] = 1
        return v

    def prod(first, letters):
        # first is (exps, tail); multiply by letters
        e = list(first[0])
        t = list(first[1]) if first[1] is not None else None
        c.collect(e, t, letters)
        return e, t

    def elem_letters(x):
        return letters_of(x[0])

    def add_tail(x, t):
        if x[1] is None:
            return x
        return x[0], [a + b for a, b in zip(x[1], t)]

    zero = c._new_tail()
    if family == 1:
        k, j, i = idx
        ji = prod((unit(j), zero), [(i, 1)])
        left = add_tail(prod((unit(k), zero), elem_letters(ji)), ji[1] or [])
        kj = prod((unit(k), zero), [(j, 1)])
        right = prod(kj, [(i, 1)])
    elif family == 2:
        j, i = idx
        jp = prod((unit(j), zero), [(j, p - 1)])          # x_j^p collected
        left = prod(jp, [(i, 1)])
        ji = prod((unit(j), zero), [(i, 1)])
        xjm = prod(([0] * n, zero), [(j, p - 1)])
        right = add_tail(prod(xjm, elem_letters(ji)), ji[1] or [])
    elif family == 3:
        j, i = idx
        ip = prod((unit(i), zero), [(i, p - 1)])
        left = add_tail(prod((unit(j), zero), elem_letters(ip)), ip[1] or [])
        ji = prod((unit(j), zero), [(i, 1)])
        right = prod(ji, [(i, p - 1)])
    else:
        (i,) = idx
        ip = prod((unit(i), zero), [(i, p - 1)])
        left = prod(ip, [(i, 1)])
        right = add_tail(prod((unit(i), zero), elem_letters(ip)), ip[1] or [])
    return left, right


def enumerate_order(pres: Presentation, limit: int = 10 ** 5):
    """Order of the group generated by right multiplication by the generators.

    Breadth-first closure of the identity under x -> x * x_g; a consistent
    presentation reaches all p^n normal forms, an inconsistent one usually
    collapses.  For an inconsistent presentation collection is not a group
    operation, so this is only a diagnostic.  Returns None above ``limit``.
    """
    if pres.prime ** pres.n > limit:
        return None
    c = collector_for(pres)
    start = identity(pres)
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for x in frontier:
            for g in range(pres.n):
                e, _ = c.collect(list(x), None, [(g, 1)])
                y = tuple(e)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return len(seen)


def regular_order(pres: Presentation, limit: int = 10 ** 5):
    """Order of the permutation group generated by right multiplication maps.

    Each generator x_g acts on the p^n normal forms by x -> collect(x * x_g).
    If the presentation is consistent these are the right regular
    permutations and the generated group has order exactly p^n; an
    inconsistent presentation gives maps that are not regular (often not
    even bijective).  Returns None above ``limit``.
    """
    p, n = pres.prime, pres.n
    N = p ** n
    if N > limit:
        return None
    c = collector_for(pres)
    elems = list(all_elements(pres))
    index = {x: k for k, x in enumerate(elems)}
    perms = []
    for g in range(n):
        img = []
        for x in elems:
            e, _ = c.collect(list(x), None, [(g, 1)])
            img.append(index[tuple(e)])
        if len(set(img)) != N:
            return 0
        perms.append(tuple(img))
    # orbit of the identity permutation under right composition
    ident = tuple(range(N))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for s in frontier:
            for t in perms:
                u = tuple(t[v] for v in s)
                if u not in seen:
                    seen.add(u)
                    if len(seen) > N:
                        return len(seen)
                    nxt.append(u)
        frontier = nxt
    return len(seen)


def check_consistency(pres: Presentation, budget: int | None = None,
                      enumerate_limit: int = 10 ** 4) -> ConsistencyReport:
    """Test the four overlap families; for small groups also the group order."""
    c = Collector(pres, budget=budget)
    failures = []
    for family, idx in overlap_instances(pres.n):
        (le, _), (re_, _) = evaluate_overlap(c, family, idx)
        if le != re_:
            failures.append(OverlapFailure(family, tuple(i + 1 for i in idx), tuple(le), tuple(re_)))
    expected = pres.prime ** pres.n
    order = regular_order(pres, limit=enumerate_limit) if expected <= enumerate_limit else None
    ok = not failures and (order is None or order == expected)
    return ConsistencyReport(ok, failures, order, expected)


# ------------------------------------------------------------ subgroups

class Subgroup:
    """Induced pcgs of a subgroup: at most one element per depth, leading exponent 1."""

    def __init__(self, pres: Presentation):
        self.pres = pres
        self.table = [None] * pres.n

    @property
    def gens(self):
        return [x for x in self.table if x is not None]

    @property
    def depths(self):
        return [d for d, x in enumerate(self.table) if x is not None]

    @property
    def order(self):
        return self.pres.prime ** len(self.gens)

    def sift(self, x):
        """Reduce x against the table; returns the remainder (identity iff member)."""
        p = self.pres.prime
        x = tuple(x)
        while True:
            d = depth(x)
            if d == len(x) or self.table[d] is None:
                return x
            x = multiply(x, power(self.table[d], p - x[d], self.pres), self.pres)

    def __contains__(self, x):
        return depth(self.sift(x)) == self.pres.n

    def add(self, x, normal: bool = False) -> bool:
        """Add x and close under products (and conjugation if ``normal``)."""
        P = self.pres
        p = P.prime
        queue = [tuple(x)]
        changed = False
        while queue:
            y = self.sift(queue.pop())
            d = depth(y)
            if d == P.n:
                continue
            inv = pow(y[d], -1, p)
            y = power(y, inv, P)
            self.table[d] = y
            changed = True
            queue.append(power(y, p, P))
            for z in self.gens:
                if z != y:
                    queue.append(commutator(y, z, P))
            if normal:
                for g in range(1, P.n + 1):
                    queue.append(commutator(y, generator(P, g), P))
        return changed


def subgroup_pcgs(pres: Presentation, gens, normal: bool = False) -> Subgroup:
    H = Subgroup(pres)
    for x in gens:
        H.add(x, normal=normal)
    return H


def _kernel_step(x, H, k, pres):
    """Restrict H to {h in H : coordinate k of [x, h] is 0}.

    Assumes [x, h] lies in G_k for all h in H, so the coordinate is a
    homomorphism H -> Z_p.  H is a list of induced-pcgs elements.
    Returns (new H, whether delta vanished identically).
    """
    p = pres.prime
    deltas = [commutator(x, h, pres)[k] for h in H]
    pivots = [i for i, d in enumerate(deltas) if d]
    if not pivots:
        return H, True
    s = max(pivots, key=lambda i: depth(H[i]))
    hs, ds = H[s], deltas[s]
    out = []
    for i, h in enumerate(H):
        if i == s:
            continue
        if deltas[i]:
            a = (-deltas[i] * pow(ds, -1, p)) % p
            h = multiply(h, power(hs, a, pres), pres)
        out.append(h)
    return out, False


def centralizer(x, pres: Presentation, within=None) -> list:
    """Induced pcgs of C(x) (intersected with the subgroup ``within``)."""
    H = [generator(pres, g) for g in range(1, pres.n + 1)] if within is None else list(within)
    for k in range(pres.n):
        H, _ = _kernel_step(x, H, k, pres)
    return sorted(H, key=depth)


def center(pres: Presentation) -> list:
    H = [generator(pres, g) for g in range(1, pres.n + 1)]
    for g in range(1, pres.n + 1):
        H = centralizer(generator(pres, g), pres, within=H)
    return H


class ClassRep(NamedTuple):
    element: tuple
    centralizer: list


def class_representatives(pres: Presentation, modulo_center: bool = True,
                          modulo_powers: bool = True) -> list:
    """Conjugacy class representatives with centralizer pcgs.

    With ``modulo_center`` branches on central pc generators are skipped
    (representatives are then complete only up to multiplication by central
    pc generators); with ``modulo_powers`` only one leading exponent is kept
    for each depth (complete up to coprime powers).
    """
    n, p = pres.n, pres.prime
    central = set()
    if modulo_center:
        Z = Subgroup(pres)
        for z in center(pres):
            Z.add(z)
        central = {g for g in range(n) if generator(pres, g + 1) in Z}
    full = [generator(pres, g) for g in range(1, n + 1)]
    out = []
    stack = [(identity(pres), full, 0)]
    while stack:
        x, H, k = stack.pop()
        if k == n:
            out.append(ClassRep(x, sorted(H, key=depth)))
            continue
        H2, vanished = _kernel_step(x, H, k, pres)
        if not vanished:
            stack.append((x, H2, k + 1))
            continue
        if modulo_center and k in central:
            choices = [0]
        elif modulo_powers and not any(x):
            choices = [0, 1]
        else:
            choices = range(p)
        for a in reversed(list(choices)):
            y = list(x)
            y[k] = a
            stack.append((tuple(y), H2, k + 1))
    out.sort()
    return out


# ------------------------------------------------------------ structure

@dataclass
class StructureReport:
    order: int
    nilpotency_class: int
    lower_central_series: list
    exponent_p: bool
    center: list


def lower_central_series(pres: Presentation) -> list:
    """Terms gamma_1 > gamma_2 > ... > 1 as Subgroup objects (trivial term last)."""
    G = Subgroup(pres)
    for g in range(1, pres.n + 1):
        G.table[g - 1] = generator(pres, g)
    series = [G]
    while series[-1].gens:
        nxt = Subgroup(pres)
        for a in series[-1].gens:
            for g in range(1, pres.n + 1):
                nxt.add(commutator(a, generator(pres, g), pres), normal=True)
        if len(nxt.gens) == len(series[-1].gens):
            raise RuntimeError("lower central series does not descend; group is not nilpotent "
                               "or the presentation is inconsistent")
        series.append(nxt)
    return series


def nilpotency_class(pres: Presentation) -> int:
    return len(lower_central_series(pres)) - 1


def structure(pres: Presentation, sample: int = 200, seed: int = 0) -> StructureReport:
    series = lower_central_series(pres)
    p = pres.prime
    ok = all(not any(power(generator(pres, g), p, pres)) for g in range(1, pres.n + 1))
    rng = random.Random(seed)
    for _ in range(sample if ok else 0):
        if any(power(random_element(pres, rng), p, pres)):
            ok = False
            break
    return StructureReport(
        order=p ** pres.n,
        nilpotency_class=len(series) - 1,
        lower_central_series=[[d + 1 for d in H.depths] for H in series],
        exponent_p=ok,
        center=center(pres),
    )


def prop27_fast_path(pres: Presentation, nilclass: int | None = None) -> str:
    """'trivial' when p > 3, class <= 3 and the nontrivial commutators of pc
    generators are pairwise different pc generators; else 'not-applicable'."""
    if pres.prime <= 3:
        return "not-applicable"
    seen = set()
    for w in pres.comm_rhs.values():
        if not w:
            continue
        if len(w) != 1 or w[0][1] != 1 or w[0][0] in seen:
            return "not-applicable"
        seen.add(w[0][0])
    if nilclass is None:
        nilclass = nilpotency_class(pres)
    return "trivial" if nilclass <= 3 else "not-applicable"
