"""
Command-line front end.

Exit status: 0 success, 1 mathematical mismatch (``verify``, failed
``lemma24`` trials), 2 usage or input errors, 3 budget overruns and
defective presentations.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

from . import catalog, collector
from .catalog import CatalogError
from .collector import CollectionBudgetExceeded, check_consistency, structure
from .extension import EnumerationBudgetExceeded, FULL_ENUMERATION_LIMIT, InconsistentPresentation
from .multiplier import (ClassTooLarge, MultiplierOptions, SampledStrategyRefused,
                         bogomolov_multiplier, cp_extension, lemma24_property_check,
                         schur_multiplier)
from .presentation import PresentationError, parse_presentation

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_DEFECT = 0, 1, 2, 3

DEFECTS = (CollectionBudgetExceeded, EnumerationBudgetExceeded, InconsistentPresentation,
           ClassTooLarge, OverflowError)


@dataclass
class RunConfig:
    command: str
    catalog_id: str | None = None
    path: str | None = None
    prime: int | None = None
    params: dict = field(default_factory=dict)
    mode: str = "reduced"
    strategy: str = "center-reduced"
    json: bool = False
    seed: int = 0
    workers: int | None = None


def _param(text):
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    try:
        return name.strip(), int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"parameter value must be an integer: {text!r}") from None


def _add_input(sp, prime_required=False):
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--catalog", metavar="ID", help="catalog entry, e.g. G9")
    src.add_argument("--file", metavar="PATH", help="presentation file")
    sp.add_argument("--prime", type=int, required=prime_required,
                    help="odd prime (optional for files declaring one)")
    sp.add_argument("--param", type=_param, action="append", default=[], metavar="NAME=INT",
                    help="value of a symbolic parameter (repeatable)")


def _add_pipeline(sp):
    sp.add_argument("--mode", choices=("reduced", "full"), default="reduced", help="tail mode")
    sp.add_argument("--strategy", default="center-reduced",
                    help="commuting pairs: full | center-reduced | sampled(seed,count)")
    sp.add_argument("--workers", type=int, default=None,
                    help="worker processes (default: BOGOMOLOV_WORKERS or cpu count)")
    sp.add_argument("--full-limit", type=int, default=FULL_ENUMERATION_LIMIT,
                    help="largest group order for full pair enumeration")


def _add_common(sp):
    sp.add_argument("--json", action="store_true", help="JSON output")
    sp.add_argument("--step-budget", type=int, default=None,
                    help="collection steps allowed per word")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bogomolov",
                                 description="Schur and Bogomolov multipliers of p-groups")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("compute", help="Bogomolov multiplier (optionally also Schur)")
    _add_input(sp)
    _add_pipeline(sp)
    _add_common(sp)
    sp.add_argument("--schur", action="store_true", help="also compute M(G)")
    sp.add_argument("--fast-path", action="store_true",
                    help="stop early when the class-3 criterion proves triviality")
    sp.add_argument("--cp", action="store_true", help="print the CP extension presentation")
    sp.add_argument("--timings", action="store_true", help="include stage timings")

    sp = sub.add_parser("schur", help="Schur multiplier")
    _add_input(sp)
    _add_common(sp)

    sp = sub.add_parser("verify", help="run the catalog against the expected table")
    sp.add_argument("--prime", type=int, required=True)
    sp.add_argument("--set", dest="set_name", default=None, help="restrict to one catalog set")
    sp.add_argument("--ids", nargs="+", default=None, help="restrict to these ids")
    _add_pipeline(sp)
    _add_common(sp)

    sp = sub.add_parser("consistency", help="check the overlap conditions")
    _add_input(sp)
    _add_common(sp)

    sp = sub.add_parser("structure", help="order, class, lower central series, center")
    _add_input(sp)
    _add_common(sp)
    sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("lemma24", help="random check of the [x^n,y] expansion")
    _add_input(sp)
    _add_common(sp)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--trials", type=int, default=200)

    sp = sub.add_parser("catalog", help="catalog queries")
    csub = sp.add_subparsers(dest="catalog_command", required=True)
    lp = csub.add_parser("list", help="list entries with a printed presentation")
    lp.add_argument("--set", dest="set_name", default=None)
    lp.add_argument("--stubs", action="store_true", help="list entries without a presentation")
    lp.add_argument("--sets", action="store_true", help="list set names")
    return ap


def _load(args):
    """(presentation, params actually used)."""
    params = dict(args.param)
    if args.catalog:
        if args.prime is None:
            raise PresentationError("--prime is required with --catalog")
        params = catalog.resolve_params(args.catalog, args.prime, params, fill_defaults=True)
        return catalog.load_entry(args.catalog, args.prime, params), params
    with open(args.file, encoding="utf-8") as fh:
        text = fh.read()
    return parse_presentation(text, prime=args.prime, params=params or None), params


def _options(args, **kw):
    return MultiplierOptions(mode=args.mode, strategy=args.strategy, workers=args.workers,
                             full_limit=args.full_limit, **kw)


def _emit(args, data, text, out):
    if args.json:
        out.write(json.dumps(data, indent=2) + "\n")
    else:
        out.write(text)


def cmd_compute(args, out):
    pres, params = _load(args)
    opts = _options(args, schur=args.schur, fast_path=args.fast_path)
    report = bogomolov_multiplier(pres, opts, params=params)
    if args.json:
        d = report.to_dict(timings=args.timings)
        if args.cp:
            d["cp_extension"] = cp_extension(pres, report)
        out.write(json.dumps(d, indent=2) + "\n")
        return EXIT_OK
    out.write(report.text())
    if args.timings:
        out.write("timings_ms " + " ".join(f"{k}={v}" for k, v in report.timings_ms.items()) + "\n")
    if args.cp:
        out.write("\n" + cp_extension(pres, report))
    return EXIT_OK


def cmd_schur(args, out):
    pres, params = _load(args)
    inv = schur_multiplier(pres)
    data = {"group": pres.name, "prime": pres.prime, "schur": list(inv.torsion)}
    if params:
        data["params"] = params
    _emit(args, data, f"M({pres.name}) = {inv}  (p={pres.prime})\n", out)
    return EXIT_OK


def _compare(expected, report):
    if expected.verdict == "unknown":
        return "unknown"
    if expected.verdict == "trivial":
        return "ok" if not report.invariants else "MISMATCH"
    if not report.invariants:
        return "MISMATCH"
    if expected.invariants is not None and tuple(report.invariants) != tuple(expected.invariants):
        return "MISMATCH"
    return "ok"


def cmd_verify(args, out, err):
    p = args.prime
    ids = args.ids or catalog.list_entries(args.set_name)
    records = []
    for eid in ids:
        entry = catalog.get_entry(eid)
        if not entry.applies_to(p):
            continue
        exp = catalog.expected_result(eid, p)
        rec = {"id": eid, "prime": p, "expected": exp.verdict,
               "expected_invariants": list(exp.invariants) if exp.invariants else None}
        try:
            params = catalog.resolve_params(eid, p, None, fill_defaults=True)
            pres = catalog.load_entry(eid, p, params)
            report = bogomolov_multiplier(pres, _options(args), params=params)
        except DEFECTS as e:
            rec.update(got=None, status="error", message=f"{type(e).__name__}: {e}")
        else:
            rec.update(got=list(report.invariants), free_rank=report.free_rank,
                       status=_compare(exp, report))
            if report.free_rank is not None and report.free_rank != pres.n:
                rec["status"] = "MISMATCH"
                rec["message"] = f"free rank {report.free_rank} != {pres.n}"
        records.append(rec)
        if not args.json:
            got = "?" if rec["got"] is None else (" x ".join(f"Z_{d}" for d in rec["got"]) or "0")
            line = f"{eid:<10} p={p}  expected {exp.verdict:<10} got {got:<8} {rec['status']}"
            if rec.get("message"):
                line += f"  ({rec['message']})"
            out.write(line + "\n")
    bad = sum(r["status"] == "MISMATCH" for r in records)
    errors = sum(r["status"] == "error" for r in records)
    unknown = sum(r["status"] == "unknown" for r in records)
    if args.json:
        out.write(json.dumps({"prime": p, "set": args.set_name, "results": records,
                              "mismatches": bad, "errors": errors, "unknown": unknown},
                             indent=2) + "\n")
    else:
        out.write(f"{len(records)} checked, {bad} mismatch, {errors} error, {unknown} unknown\n")
    if bad:
        return EXIT_MISMATCH
    return EXIT_DEFECT if errors else EXIT_OK


def cmd_consistency(args, out):
    pres, _ = _load(args)
    rep = check_consistency(pres, budget=args.step_budget)
    data = {"group": pres.name, "prime": pres.prime, "consistent": rep.consistent,
            "enumerated_order": rep.enumerated_order, "expected_order": rep.expected_order,
            "failures": [{"family": f.family, "indices": list(f.indices),
                          "left": list(f.left), "right": list(f.right)} for f in rep.failures]}
    lines = [f"{pres.name} p={pres.prime}: {'consistent' if rep.consistent else 'INCONSISTENT'}"]
    if rep.enumerated_order is not None:
        lines.append(f"  enumerated order {rep.enumerated_order} (expected {rep.expected_order})")
    for f in rep.failures:
        names = ",".join(pres.generators[i - 1] for i in f.indices)
        lines.append(f"  overlap family {f.family} ({names}): {list(f.left)} != {list(f.right)}")
    _emit(args, data, "\n".join(lines) + "\n", out)
    return EXIT_OK if rep.consistent else EXIT_DEFECT


def cmd_structure(args, out):
    pres, _ = _load(args)
    rep = structure(pres, seed=args.seed)
    g = pres.generators

    def names(depths):
        return [g[d - 1] for d in depths]

    data = {"group": pres.name, "prime": pres.prime, "order": rep.order,
            "nilpotency_class": rep.nilpotency_class, "exponent_p": rep.exponent_p,
            "lower_central_series": [names(t) for t in rep.lower_central_series],
            "center": [list(z) for z in rep.center]}
    lines = [f"{pres.name} p={pres.prime}: order {rep.order}, class {rep.nilpotency_class}, "
             f"exponent p: {rep.exponent_p}"]
    for k, t in enumerate(rep.lower_central_series, 1):
        lines.append(f"  gamma_{k}: <{', '.join(names(t))}>")
    lines.append(f"  center basis: {[list(z) for z in rep.center]}")
    _emit(args, data, "\n".join(lines) + "\n", out)
    return EXIT_OK


def cmd_lemma24(args, out):
    pres, _ = _load(args)
    rep = lemma24_property_check(pres, seed=args.seed, trials=args.trials)
    data = {"group": pres.name, "prime": pres.prime, "trials": rep.trials, "seed": rep.seed,
            "failures": [{"x": list(x), "y": list(y), "n": n, "lhs": list(a), "rhs": list(b)}
                         for x, y, n, a, b in rep.failures]}
    text = (f"{pres.name} p={pres.prime}: {rep.trials} trials, "
            f"{len(rep.failures)} failures (seed {rep.seed})\n")
    _emit(args, data, text, out)
    return EXIT_OK if rep.passed else EXIT_MISMATCH


def cmd_catalog(args, out):
    if args.sets:
        out.write("\n".join(catalog.set_names()) + "\n")
    elif args.stubs:
        out.write("\n".join(catalog.list_stubs()) + "\n")
    else:
        out.write("\n".join(catalog.list_entries(args.set_name)) + "\n")
    return EXIT_OK


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    budget = getattr(args, "step_budget", None)
    if budget is None:
        return _dispatch(args, out, err)
    # the budget is process-wide; restore it so embedding callers are unaffected
    saved = collector.STEP_BUDGET
    collector.STEP_BUDGET = budget
    collector._CACHE.clear()
    try:
        return _dispatch(args, out, err)
    finally:
        collector.STEP_BUDGET = saved
        collector._CACHE.clear()


def _dispatch(args, out, err) -> int:
    handlers = {"compute": cmd_compute, "schur": cmd_schur, "consistency": cmd_consistency,
                "structure": cmd_structure, "lemma24": cmd_lemma24, "catalog": cmd_catalog}
    try:
        if args.command == "verify":
            return cmd_verify(args, out, err)
        return handlers[args.command](args, out)
    except (PresentationError, CatalogError, SampledStrategyRefused, ValueError, OSError) as e:
        if isinstance(e, DEFECTS):
            err.write(f"error: {type(e).__name__}: {e}\n")
            return EXIT_DEFECT
        err.write(f"error: {e}\n")
        return EXIT_USAGE
    except DEFECTS as e:
        err.write(f"error: {type(e).__name__}: {e}\n")
        return EXIT_DEFECT


def main(argv=None) -> int:
    return run(argv)
