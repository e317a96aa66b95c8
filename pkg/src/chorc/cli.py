"""Command-line front end.

Exit codes: 0 when the check passes, 1 when it was performed and failed,
2 on usage, parse or I/O errors.  Data goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from chorc import events as ev
from chorc import harness, refine, render
from chorc.semantics import interpret, wf_check
from chorc.syntax import GChor, ParseError, format_path, parse, parse_refinable, pretty
from chorc.typecheck import ChorTypeError, type_of

OK, FAILED, USAGE = 0, 1, 2


class _Usage(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _Usage(f"cannot read {path}: {exc.strerror}") from None


def _load(path: str) -> GChor:
    text = _read(path)
    try:
        return parse(text)
    except ParseError as exc:
        raise _Usage(f"{path}:{exc}") from None


def _err(msg: str):
    print(msg, file=sys.stderr)


def _semantics(g: GChor, cap: int):
    res = interpret(g, cap)
    if res.bottom is not None:
        _err(f"undefined semantics: {res.bottom}")
    return res.es


def cmd_parse(args) -> int:
    print(pretty(_load(args.file)))
    return OK


def cmd_sem(args) -> int:
    es = _semantics(_load(args.file), args.cap)
    if es is None:
        return FAILED
    print(f"{len(es)} events, {len(ev.max_config_masks(es, args.cap))} maximal configurations")
    print(es)
    if args.dot:
        try:
            Path(args.dot).write_text(render.dot_export(es), encoding="utf-8")
        except OSError as exc:
            raise _Usage(f"cannot write {args.dot}: {exc.strerror}") from None
    return OK


def cmd_dot(args) -> int:
    es = _semantics(_load(args.file), args.cap)
    if es is None:
        return FAILED
    sys.stdout.write(render.dot_export(es))
    return OK


def _contexts(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        return render.load_contexts(json.loads(_read(path)))
    except (ValueError, TypeError, ParseError) as exc:
        raise _Usage(f"{path}: bad context file: {exc}") from None


def cmd_type(args) -> int:
    g = _load(args.file)
    try:
        t = type_of(g, _contexts(args.ctx), not args.no_default_ctx)
    except ChorTypeError as exc:
        _err(f"type error: {exc}")
        return FAILED
    sys.stdout.write(render.dumps(render.type_json(t, render.label_order(g))))
    return OK


def cmd_wf(args) -> int:
    report = wf_check(_load(args.file), args.cap)
    if report.well_formed:
        print(report.summary())
        return OK
    _err(report.summary())
    return FAILED


def _bindings(specs: list[str]) -> list[refine.Binding]:
    out = []
    for spec in specs:
        tag, sep, path = spec.partition("=")
        if not sep or not tag or not path:
            raise _Usage(f"--bind expects TAG=FILE, got {spec!r}")
        try:
            out.append(refine.Binding(tag, _load(path)))
        except ValueError as exc:
            raise _Usage(str(exc)) from None
    return out


def _refine_json(report: refine.RefineReport, order) -> dict:
    holes = []
    for h in report.per_hole:
        holes.append({
            "tag": h.tag,
            "action": pretty(h.action),
            "inferred_ctx": None if h.inferred_ctx is None else render.type_json(h.inferred_ctx, order),
            "tref_valid": h.tref_valid,
            "tref_reason": h.tref_reason,
            "sem_refines": h.sem_refines.to_json(),
        })
    return {
        "ok": report.ok,
        "substituted": pretty(report.substituted),
        "result_type": None if report.result_type is None else render.type_json(report.result_type, order),
        "error": None if report.error is None else {"stage": report.stage, "message": str(report.error)},
        "per_hole": holes,
    }


def cmd_refine(args) -> int:
    g = _load(args.file)
    bindings = _bindings(args.bind)
    try:
        report = refine.refine_and_check(g, bindings, _contexts(args.ctx),
                                         not args.no_default_ctx, args.cap)
    except (refine.UnknownTag, refine.DuplicateTag) as exc:
        kind = "unknown" if isinstance(exc, refine.UnknownTag) else "duplicate"
        raise _Usage(f"{kind} tag: {exc.args[0]}") from None
    order = render.label_order(report.substituted)
    for b in bindings:
        order.update({k: v + len(order) for k, v in render.label_order(b.replacement).items()
                      if k not in order})
    if args.json:
        sys.stdout.write(render.dumps(_refine_json(report, order)))
    else:
        print(pretty(report.substituted))
        for h in report.per_hole:
            admitted = "admitted" if h.tref_valid else f"rejected ({h.tref_reason})"
            print(f"{h.tag}: {pretty(h.action)}: {admitted}; {h.sem_refines.describe()}")
        if report.result_type is not None:
            print(f"type: {report.result_type}")
    if report.error is not None:
        _err(f"type error in {report.stage}: {report.error}")
    return OK if report.ok else FAILED


def cmd_refcheck(args) -> int:
    g = _load(args.file)
    try:
        action = parse_refinable(args.action)
    except ParseError as exc:
        raise _Usage(f"--action: {exc}") from None
    report = refine.refines(g, action, args.cap)
    if args.json:
        sys.stdout.write(render.dumps(report.to_json()))
    else:
        print(report.describe())
    if not report.holds and report.witnesses:
        _err(json.dumps(report.witnesses, ensure_ascii=False, sort_keys=True))
    return OK if report.holds else FAILED


def cmd_iso(args) -> int:
    results = [_semantics(_load(f), args.cap) for f in (args.file1, args.file2)]
    if any(es is None for es in results):
        return FAILED
    same = ev.es_isomorphic(*results)
    print("isomorphic" if same else "not isomorphic")
    return OK if same else FAILED


def cmd_fuzz(args) -> int:
    try:
        params = harness.GenParams(max_leaves=args.leaves, seed=args.seed)
    except ValueError as exc:
        raise _Usage(str(exc)) from None
    if args.enumerate:
        terms = None
    else:
        terms = [harness.gen_random(harness.GenParams(max_leaves=args.leaves, seed=args.seed + i))
                 for i in range(args.count)]
    sound = harness.soundness_sweep(params, args.cap, terms=terms)
    meta = harness.metatheory_sweep(params, args.cap, terms=terms)
    sys.stdout.write(render.dumps({"soundness": sound.to_json(), "metatheory": meta.to_json()}))
    bad = len(sound.violations) + len(meta.violations)
    if bad:
        _err(f"{bad} violations")
    return FAILED if bad else OK


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chorc", description="Global choreography checker.")
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def command(name, fn, help_text, file=True, cap=True):
        p = sub.add_parser(name, help=help_text)
        if file:
            p.add_argument("file", metavar="FILE")
        if cap:
            p.add_argument("--cap", type=_positive, default=ev.DEFAULT_CAP,
                           help="maximal-configuration bound (default %(default)s)")
        p.set_defaults(fn=fn)
        return p

    command("parse", cmd_parse, "pretty-print a choreography", cap=False)
    command("sem", cmd_sem, "event-structure semantics").add_argument(
        "--dot", metavar="OUT", help="also write the DOT rendering to OUT")
    p = command("type", cmd_type, "infer the type as JSON", cap=False)
    p.add_argument("--ctx", metavar="CTXFILE", help="JSON contexts for refinable actions")
    p.add_argument("--no-default-ctx", action="store_true",
                   help="reject refinable actions without an explicit context")
    command("wf", cmd_wf, "well-formedness verdict")
    p = command("refine", cmd_refine, "substitute and check refinements")
    p.add_argument("--bind", action="append", default=[], metavar="TAG=FILE",
                   help="replace occurrence TAG by the ground term in FILE")
    p.add_argument("--ctx", metavar="CTXFILE", help="JSON contexts for remaining actions")
    p.add_argument("--no-default-ctx", action="store_true")
    p.add_argument("--json", action="store_true", help="JSON report")
    p = command("refcheck", cmd_refcheck, "check a ground term against a refinable action")
    p.add_argument("--action", required=True, help='e.g. "C ~> {md : S}"')
    p.add_argument("--json", action="store_true", help="JSON report")
    p = command("iso", cmd_iso, "compare two semantics up to isomorphism", file=False)
    p.add_argument("file1", metavar="F1")
    p.add_argument("file2", metavar="F2")
    p = command("fuzz", cmd_fuzz, "metatheory sweeps on generated terms", file=False)
    p.add_argument("--leaves", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=_positive, default=500,
                   help="random terms to draw (ignored with --enumerate)")
    p.add_argument("--enumerate", action="store_true", help="exhaustive enumeration")
    command("dot", cmd_dot, "DOT rendering of the semantics")
    return ap


def run(argv: list[str]) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return OK if exc.code == 0 else USAGE
    try:
        return args.fn(args)
    except _Usage as exc:
        _err(f"chorc: {exc}")
        return USAGE
    except ev.ConfigExplosion as exc:
        _err(f"chorc: {exc} at {format_path(exc.path)}; raise --cap to continue")
        return USAGE


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
