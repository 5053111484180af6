"""
Embedded presentations of groups of order p^7 and exponent p, with the
expected multiplier verdicts.

Data lives next to this file: one ``<id>.pc`` presentation per entry,
``index.txt`` (sets, primes, parameters, notes) and ``expected.txt``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from ..presentation import Presentation, PresentationError, is_prime, parse_presentation, \
    validate_polycyclic


class CatalogError(KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "catalog error"


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    sets: tuple
    primes: str
    params: tuple = ()
    note: str = ""
    loadable: bool = True
    source: str = ""

    def applies_to(self, prime: int) -> bool:
        """Whether the entry is listed as a group at this prime."""
        for tok in self.primes.split(","):
            if tok.endswith("+") and prime >= int(tok[:-1]):
                return True
            if tok == str(prime):
                return True
        return False


@dataclass(frozen=True)
class ExpectedMultiplier:
    id: str
    prime: int
    verdict: str
    invariants: tuple | None = None
    note: str = ""


def _read(name: str) -> str:
    return resources.files(__package__).joinpath("data", name).read_text(encoding="utf-8")


def sort_key(entry_id: str):
    m = re.fullmatch(r"G(\d+)(.*)", entry_id)
    if m:
        return (0, int(m.group(1)), m.group(2))
    return (1, 0, entry_id)


@lru_cache(maxsize=None)
def _index() -> dict:
    out = {}
    for line in _read("index.txt").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        head, _, note = line.partition("|")
        toks = head.split()
        eid, sets, primes = toks[0], tuple(toks[1].split(",")), toks[2]
        params = tuple(t.split("=")[0] for t in toks[3:] if "=" in t)
        loadable = "stub" not in toks[3:]
        source = _read(f"{eid}.pc") if loadable else ""
        out[eid] = CatalogEntry(eid, sets, primes, params, note.strip(), loadable, source)
    return out


@lru_cache(maxsize=None)
def _expected() -> dict:
    out = {}
    for line in _read("expected.txt").splitlines():
        body, _, note = line.partition("#")
        toks = body.split()
        if not toks:
            continue
        eid, prime, verdict = toks[:3]
        if verdict not in ("trivial", "nontrivial", "unknown"):
            raise ValueError(f"bad verdict in expected table: {line!r}")
        out[(eid, prime)] = (verdict, tuple(toks[3:]) or None, note.strip())
    return out


def get_entry(entry_id: str) -> CatalogEntry:
    try:
        return _index()[entry_id]
    except KeyError:
        raise CatalogError(f"unknown catalog id {entry_id!r}") from None


def list_entries(set_name: str | None = None) -> list:
    """Ids of entries with a printed presentation, sorted by numeric index."""
    ids = [e.id for e in _index().values() if e.loadable and (set_name is None or set_name in e.sets)]
    if set_name is not None and set_name not in set_names():
        raise CatalogError(f"unknown set {set_name!r}")
    return sorted(ids, key=sort_key)


def list_stubs() -> list:
    return sorted((e.id for e in _index().values() if not e.loadable), key=sort_key)


def set_names() -> list:
    return sorted({s for e in _index().values() for s in e.sets})


def smallest_nonresidue(p: int) -> int:
    squares = {x * x % p for x in range(1, p)}
    return next(a for a in range(2, p) if a not in squares)


def default_params(entry_id: str, prime: int) -> dict:
    """Values used for parameters the caller leaves unspecified."""
    return {name: smallest_nonresidue(prime) for name in get_entry(entry_id).params}


def resolve_params(entry_id: str, prime: int, params=None, fill_defaults: bool = False) -> dict:
    entry = get_entry(entry_id)
    params = dict(params or {})
    unknown = set(params) - set(entry.params)
    if unknown:
        raise CatalogError(f"{entry_id} has no parameter(s) {sorted(unknown)}")
    missing = [k for k in entry.params if k not in params]
    if missing:
        if not fill_defaults:
            raise CatalogError(f"{entry_id}: missing parameter(s) {missing}")
        defaults = default_params(entry_id, prime)
        for k in missing:
            params[k] = defaults[k]
    return params


def load_entry(entry_id: str, prime: int, params=None, *, fill_defaults: bool = False) -> Presentation:
    """Instantiate a catalog presentation at an odd prime."""
    entry = get_entry(entry_id)
    if not entry.loadable:
        raise CatalogError(f"{entry_id} has no printed presentation")
    if not isinstance(prime, int) or prime == 2 or not is_prime(prime):
        raise PresentationError(f"prime required: {prime!r} is not an odd prime")
    params = resolve_params(entry_id, prime, params, fill_defaults)
    pres = parse_presentation(entry.source, prime=prime, params=params)
    report = validate_polycyclic(pres)
    if not report.ok:
        raise PresentationError(f"{entry_id}: {report.violations[0].message}")
    return pres


def expected_result(entry_id: str, prime: int) -> ExpectedMultiplier:
    get_entry(entry_id)
    table = _expected()
    hit = table.get((entry_id, str(prime)))
    if hit is None and prime >= 7:
        hit = table.get((entry_id, "*"))
    if hit is None:
        return ExpectedMultiplier(entry_id, prime, "unknown")
    verdict, inv, note = hit
    if inv is not None:
        inv = tuple(prime if t == "p" else int(t) for t in inv)
    return ExpectedMultiplier(entry_id, prime, verdict, inv, note)
