"""
Polycyclic presentations of finite p-groups.

A presentation has generators x_1 < x_2 < ... < x_n, each of relative
order p, power relations  x_i^p = w_i  and commutator relations
[x_i, x_j] = w_ij  (i > j), where every right-hand side is a normal word
in generators of index strictly greater than i.  Commutator relations that
are not listed are trivial.

Text format (one directive per line, '#' starts a comment):

    group G9
    prime p                 # or a number; 'p' is supplied when loading
    param t                 # optional symbolic exponents
    generators a b c d e f g
    pow a = 1               # optional, default is the identity
    comm [b,a] = c
    comm [d,b] = e g        # also accepted: eg
    comm [e,c] = f^t        # f^-1, f^2, ...

Generator indices are 1-based throughout this module, matching the order
of declaration.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

# a normal word: ((generator index, exponent), ...) with increasing indices
NormalWord = tuple


class PresentationError(ValueError):
    """Raised for malformed presentation text or inconsistent load arguments."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column or 1}: {message}"
        super().__init__(message)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


@dataclass(frozen=True)
class Presentation:
    name: str
    prime: int
    generators: tuple
    power_rhs: tuple
    comm_rhs: Mapping = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.generators)

    @property
    def n_generators(self) -> int:
        return len(self.generators)

    def index(self, name: str) -> int:
        return self.generators.index(name) + 1

    def word_str(self, word) -> str:
        if not word:
            return "1"
        parts = []
        for g, e in word:
            s = self.generators[g - 1]
            parts.append(s if e == 1 else f"{s}^{e}")
        return " ".join(parts)

    def relations(self):
        """Yield the nontrivial relations as (kind, key, word), sorted."""
        for i, w in enumerate(self.power_rhs, start=1):
            if w:
                yield "pow", i, w
        for key in sorted(self.comm_rhs):
            yield "comm", key, self.comm_rhs[key]

    def with_prime(self, prime: int) -> "Presentation":
        """Same relation data at another prime (exponents reduced mod the new prime)."""
        red = lambda w: tuple((g, e % prime) for g, e in w if e % prime)
        return Presentation(
            self.name,
            prime,
            self.generators,
            tuple(red(w) for w in self.power_rhs),
            {k: red(w) for k, w in self.comm_rhs.items() if red(w)},
        )

    def __hash__(self):
        return hash((self.name, self.prime, self.generators, self.power_rhs,
                     tuple(sorted(self.comm_rhs.items()))))


@dataclass(frozen=True)
class Violation:
    rule: str
    location: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def _check_word(word, lhs, n, p, where, out):
    prev = 0
    for item in word:
        try:
            g, e = item
        except (TypeError, ValueError):
            out.append(Violation("word-shape", where, f"malformed letter {item!r}"))
            return
        if not 1 <= g <= n:
            out.append(Violation("unknown-generator", where, f"generator index {g} out of range 1..{n}"))
        elif g <= lhs:
            out.append(Violation("rhs-index", where, "RHS index must exceed LHS index"))
        if g <= prev:
            out.append(Violation("normal-word", where, "generator indices must be strictly increasing"))
        if not (isinstance(p, int) and 0 < e < max(p, 2)):
            out.append(Violation("normal-word", where, f"exponent {e} not in [1, p)"))
        prev = g


def validate_polycyclic(pres: Presentation) -> ValidationReport:
    """Collect every structural violation of ``pres``; never raises."""
    out = []
    p = pres.prime
    if not isinstance(p, int) or not is_prime(p) or p == 2:
        out.append(Violation("prime-required", "prime", f"prime required: {p!r} is not an odd prime"))
    n = pres.n
    names = list(pres.generators)
    if len(set(names)) != len(names):
        out.append(Violation("generator-names", "generators", "generator names must be distinct"))
    for s in names:
        if not isinstance(s, str) or not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", s):
            out.append(Violation("generator-names", "generators", f"bad generator name {s!r}"))
    if len(pres.power_rhs) != n:
        out.append(Violation("power-count", "power_rhs", f"expected {n} power words, got {len(pres.power_rhs)}"))
    for i, w in enumerate(pres.power_rhs, start=1):
        _check_word(w, i, n, p, f"pow {i}", out)
    for key, w in pres.comm_rhs.items():
        try:
            i, j = key
        except (TypeError, ValueError):
            out.append(Violation("comm-key", repr(key), "commutator key must be a pair (i, j)"))
            continue
        where = f"comm ({i},{j})"
        if not (n >= i > j >= 1):
            out.append(Violation("comm-key", where, "commutator keys need n >= i > j >= 1"))
        if not w:
            out.append(Violation("normal-word", where, "trivial commutators are stored implicitly"))
        _check_word(w, i, n, p, where, out)
    return ValidationReport(tuple(out))


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(\S+)")


def _int_or_param(tok, params, lineno, col):
    if re.fullmatch(r"[+-]?\d+", tok):
        return int(tok)
    sign = 1
    if tok.startswith("-"):
        sign, tok = -1, tok[1:]
    if tok in params:
        if params[tok] is None:
            raise PresentationError(f"missing parameter {tok!r}", lineno, col)
        return sign * int(params[tok])
    raise PresentationError(f"bad exponent {tok!r}", lineno, col)


def _parse_word(text, gens, params, p, lineno, col0):
    """Parse a product of generator powers; returns a NormalWord."""
    letters = []
    pos = 0
    names = sorted(gens, key=len, reverse=True)
    s = text
    while pos < len(s):
        if s[pos].isspace():
            pos += 1
            continue
        col = col0 + pos
        if s[pos] == "1" and not letters and s[pos:].strip() == "1":
            return ()
        for name in names:
            if s.startswith(name, pos):
                break
        else:
            m = re.match(r"[A-Za-z][A-Za-z0-9_]*", s[pos:])
            bad = m.group(0) if m else s[pos]
            raise PresentationError(f"unknown generator {bad!r}", lineno, col)
        pos += len(name)
        e = 1
        if pos < len(s) and s[pos] == "^":
            m = re.match(r"\^([+-]?[A-Za-z0-9_]+)", s[pos:])
            if not m:
                raise PresentationError("exponent expected after '^'", lineno, col0 + pos)
            e = _int_or_param(m.group(1), params, lineno, col0 + pos + 1)
            pos += m.end()
        letters.append((gens[name], e, col))
    word = []
    for g, e, col in letters:
        if word and g <= word[-1][0]:
            raise PresentationError("right-hand side must be a normal word "
                                    "(generators in increasing order, each at most once)", lineno, col)
        word.append((g, e))
    return tuple((g, e % p) for g, e in word if e % p)


def parse_presentation(text: str, prime: int | None = None, params: Mapping | None = None) -> Presentation:
    """Parse the line-oriented presentation format.

    ``prime`` instantiates a parametric ``prime p`` line and must agree with a
    numeric one.  ``params`` supplies values for ``param`` declarations.
    Exponents are reduced mod p; zero exponents are dropped.
    """
    params = dict(params or {})
    name = None
    p = None
    declared = {}
    gens = None
    power = {}
    comm = {}
    pending = []  # relations are parsed once the prime is known
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _TOKEN.match(line)
        kw, rest_at = m.group(1), m.end()
        rest = line[rest_at:]
        col = m.start(1) + 1
        if kw == "group":
            if not rest.strip():
                raise PresentationError("group name expected", lineno, rest_at + 1)
            name = rest.strip()
        elif kw == "prime":
            tok = rest.strip()
            if re.fullmatch(r"\d+", tok):
                p = int(tok)
                if prime is not None and prime != p:
                    raise PresentationError(f"presentation fixes prime {p}, requested {prime}", lineno, col)
            elif re.fullmatch(r"[A-Za-z]\w*", tok):
                if prime is None:
                    raise PresentationError(f"prime parameter {tok!r} not supplied", lineno, col)
                p = prime
            else:
                raise PresentationError("prime expects a number or a parameter name", lineno, rest_at + 1)
        elif kw == "param":
            for tok in rest.split():
                if not re.fullmatch(r"[A-Za-z]\w*", tok):
                    raise PresentationError(f"bad parameter name {tok!r}", lineno, col)
                declared[tok] = params.get(tok)
        elif kw == "generators":
            toks = rest.split()
            if gens is not None:
                raise PresentationError("generators declared twice", lineno, col)
            if not toks:
                raise PresentationError("at least one generator expected", lineno, rest_at + 1)
            for tok in toks:
                if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", tok):
                    raise PresentationError(f"bad generator name {tok!r}", lineno, line.find(tok) + 1)
            if len(set(toks)) != len(toks):
                raise PresentationError("duplicate generator name", lineno, rest_at + 1)
            gens = {s: k for k, s in enumerate(toks, start=1)}
        elif kw in ("pow", "comm"):
            pending.append((kw, rest, lineno, rest_at))
        else:
            raise PresentationError(f"unknown directive {kw!r}", lineno, col)
    if gens is None:
        raise PresentationError("no generators line")
    if p is None:
        if prime is None:
            raise PresentationError("no prime given")
        p = prime
    if not is_prime(p) or p == 2:
        raise PresentationError(f"prime required: {p} is not an odd prime")
    for kw, rest, lineno, at in pending:
        if "=" not in rest:
            raise PresentationError("'=' expected", lineno, at + len(rest) + 1)
        lhs, rhs = rest.split("=", 1)
        rhs_col = at + len(lhs) + 2
        if kw == "pow":
            g = lhs.strip()
            if g not in gens:
                raise PresentationError(f"unknown generator {g!r}", lineno, at + 1 + lhs.find(g))
            i = gens[g]
            if i in power:
                raise PresentationError(f"duplicate power relation for {g}", lineno, at + 1)
            w = _parse_word(rhs, gens, declared, p, lineno, rhs_col)
            key_i = i
        else:
            m = re.fullmatch(r"\s*\[\s*(\w+)\s*,\s*(\w+)\s*\]\s*", lhs)
            if not m:
                raise PresentationError("commutator '[x,y]' expected", lineno, at + 1)
            for k in (1, 2):
                if m.group(k) not in gens:
                    raise PresentationError(f"unknown generator {m.group(k)!r}", lineno, at + 1 + m.start(k))
            i, j = gens[m.group(1)], gens[m.group(2)]
            if not i > j:
                raise PresentationError("commutator must be written [x_i,x_j] with i > j", lineno, at + 1)
            if (i, j) in comm:
                raise PresentationError(f"duplicate relation for [{m.group(1)},{m.group(2)}]", lineno, at + 1)
            w = _parse_word(rhs, gens, declared, p, lineno, rhs_col)
            key_i = i
        for g, _ in w:
            if g <= key_i:
                raise PresentationError("RHS index must exceed LHS index", lineno, rhs_col)
        if kw == "pow":
            power[i] = w
        else:
            comm[(i, j)] = w
    names = tuple(sorted(gens, key=gens.get))
    n = len(names)
    return Presentation(
        name or "G",
        p,
        names,
        tuple(power.get(i, ()) for i in range(1, n + 1)),
        {k: w for k, w in sorted(comm.items()) if w},
    )


def render_presentation(pres: Presentation) -> str:
    """Inverse of :func:`parse_presentation` for a numeric prime."""
    lines = [f"group {pres.name}", f"prime {pres.prime}", "generators " + " ".join(pres.generators)]
    g = pres.generators
    for kind, key, w in pres.relations():
        if kind == "pow":
            lines.append(f"pow {g[key - 1]} = {pres.word_str(w)}")
        else:
            i, j = key
            lines.append(f"comm [{g[i - 1]},{g[j - 1]}] = {pres.word_str(w)}")
    return "\n".join(lines) + "\n"


def make_presentation(name: str, prime: int, generators: Sequence[str],
                      comm: Mapping | None = None, power: Mapping | None = None) -> Presentation:
    """Build a presentation from name-keyed relation dicts, e.g.

    >>> P = make_presentation("H", 5, "abc", comm={("b", "a"): "c"})
    >>> P.comm_rhs
    {(2, 1): ((3, 1),)}
    """
    text = [f"group {name}", f"prime {prime}", "generators " + " ".join(generators)]
    for (x, y), w in (comm or {}).items():
        text.append(f"comm [{x},{y}] = {w}")
    for x, w in (power or {}).items():
        text.append(f"pow {x} = {w}")
    return parse_presentation("\n".join(text))
