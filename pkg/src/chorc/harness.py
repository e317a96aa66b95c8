"""Term generators and sweeps checking the metatheory on small alphabets.

Sweeps work bottom-up: the type and semantics of every term with fewer
than ``max_leaves`` leaves are computed once and kept in per-size tables,
so each term of the largest size only pays for its top-level operator.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterator

from chorc import events as ev
from chorc import semantics, typecheck
from chorc.events import IN, OUT, ConfigExplosion, bits
from chorc.refine import refines
from chorc.syntax import (Choice, Empty, GChor, Interaction, Par, Refinable, Seq, is_ground,
                          participants, pretty)
from chorc.typecheck import ChorType, ChorTypeError, hat, validate_ref_context

OPERATORS = (Seq, Par, Choice)


@dataclass(frozen=True)
class GenParams:
    max_leaves: int = 4
    participants: tuple = ("A", "B", "C")
    messages: tuple = ("m", "n")
    allow_refinable: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.max_leaves < 0:
            raise ValueError("max_leaves must be nonnegative")
        if len(self.participants) < 2 or len(set(self.participants)) != len(self.participants):
            raise ValueError("need at least two distinct participants")
        if not self.messages or len(set(self.messages)) != len(self.messages):
            raise ValueError("need at least one message, without repetitions")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def leaves(params: GenParams) -> list[GChor]:
    """All interactions, then (optionally) all untagged refinable actions."""
    ps, ms = params.participants, params.messages
    out: list[GChor] = [Interaction(a, b, m) for a in ps for b in ps if a != b for m in ms]
    if params.allow_refinable:
        for a in ps:
            others = [b for b in ps if b != a]
            for k in range(1, len(others) + 1):
                for dests in itertools.permutations(others, k):
                    for msgs in itertools.product(ms, repeat=k):
                        out.append(Refinable(a, tuple(zip(msgs, dests))))
    return out


def _combos(op_terms, n: int) -> Iterator[GChor]:
    for k in range(1, n):
        for op in OPERATORS:
            for l in op_terms[k]:
                for r in op_terms[n - k]:
                    yield op(l, r)


def enumerate_terms(params: GenParams) -> Iterator[GChor]:
    """Every term with at most ``max_leaves`` leaves, each once, smallest first.

    ``0`` occurs only as the whole term; refinable leaves are untagged.
    """
    yield Empty()
    sized: dict[int, list] = {}
    for n in range(1, params.max_leaves + 1):
        level = leaves(params) if n == 1 else _combos(sized, n)
        if n < params.max_leaves:
            sized[n] = list(level)
            yield from sized[n]
        else:
            yield from level


def count_terms(params: GenParams) -> int:
    n_leaves = len(leaves(params))
    counts = {1: n_leaves}
    for n in range(2, params.max_leaves + 1):
        counts[n] = sum(len(OPERATORS) * counts[k] * counts[n - k] for k in range(1, n))
    return 1 + sum(counts[n] for n in range(1, params.max_leaves + 1))


def gen_random(params: GenParams) -> GChor:
    """A term drawn from a generator seeded by ``params.seed``."""
    rng = random.Random(params.seed)
    pool = leaves(params)
    n = rng.randint(0, params.max_leaves)
    if n == 0:
        return Empty()

    def build(k: int) -> GChor:
        if k == 1:
            return rng.choice(pool)
        split = rng.randint(1, k - 1)
        op = rng.choice(OPERATORS)
        return op(build(split), build(k - split))

    return build(n)


# ------------------------------------------------------------------ sweeps

@dataclass
class SweepReport:
    total: int = 0
    typable: int = 0
    wf: int = 0
    skipped: int = 0  # terms whose configurations exceeded the cap
    checks: dict = field(default_factory=dict)  # property -> number of instances checked
    violations: list = field(default_factory=list)  # (term, property, witness)

    @property
    def passed(self) -> bool:
        return not self.violations

    def note(self, prop: str, n: int = 1):
        self.checks[prop] = self.checks.get(prop, 0) + n

    def violate(self, g: GChor, prop: str, witness: str):
        self.violations.append((pretty(g), prop, witness))

    def finish(self) -> "SweepReport":
        self.violations.sort()
        return self

    def to_json(self) -> dict:
        return {"total": self.total, "typable": self.typable, "wf": self.wf,
                "skipped": self.skipped, "checks": dict(sorted(self.checks.items())),
                "violations": [{"term": t, "property": p, "witness": w}
                               for t, p, w in self.violations]}


@dataclass
class _Entry:
    term: GChor
    type: ChorType | None
    es: ev.EventStructure | None  # None: undefined, or not built (see ``wf``)
    parts: frozenset
    configs: list | None = None
    exploded: bool = False
    wf: bool | None = None  # defaults to ``es is not None``
    labels: frozenset | None = None

    def __post_init__(self):
        if self.wf is None:
            self.wf = self.es is not None


def _leaf_entry(g: GChor) -> _Entry:
    try:
        t = typecheck.type_of(g)
    except ChorTypeError:
        t = None
    es = None
    if isinstance(g, Interaction):
        es = ev.interaction(g.sender, g.receiver, g.msg)
    return _Entry(g, t, es, participants(g))


def _combine(op, l: _Entry, r: _Entry, cap: int, lazy: bool = False) -> _Entry:
    """Entry for ``op(l, r)``.  With ``lazy``, untypable sequential and
    parallel compositions only get their well-formedness flag."""
    g = op(l.term, r.term)
    t = None
    if l.type is not None and r.type is not None:
        try:
            t = typecheck.combine(g, l.type, r.type)
        except ChorTypeError:
            pass
    es = None
    wf = False
    exploded = l.exploded or r.exploded
    if l.es is not None and r.es is not None and not exploded:
        try:
            configs = None
            if op is Seq:
                configs = _configs(l, cap)
            if lazy and t is None and op is not Choice:
                wf = op is Seq or _labels(l).isdisjoint(_labels(r))
            else:
                es, _ = semantics.combine(g, l.es, r.es, cap, configs)
                wf = es is not None
        except ConfigExplosion:
            exploded = True
    return _Entry(g, t, es, l.parts | r.parts, exploded=exploded, wf=wf)


def _labels(entry: _Entry) -> frozenset:
    if entry.labels is None:
        entry.labels = frozenset(entry.es.labels)
    return entry.labels


def _configs(entry: _Entry, cap: int) -> list:
    if entry.configs is None:
        entry.configs = ev.max_config_masks(entry.es, cap)
    return entry.configs


def _entries(params: GenParams, cap: int, lazy: bool = False) -> Iterator[_Entry]:
    """Entries for every enumerated term, in ``enumerate_terms`` order.

    ``lazy`` applies to the largest terms only, which nothing else reuses.
    """
    if params.allow_refinable:
        raise ValueError("sweeps need ground-only parameters")
    yield _Entry(Empty(), ChorType(frozenset(), frozenset(), frozenset()), ev.EMPTY, frozenset())
    tables: dict[int, list] = {}
    for n in range(1, params.max_leaves + 1):
        keep = n < params.max_leaves
        if n == 1:
            level = [_leaf_entry(g) for g in leaves(params)]
        else:
            level = _level(tables, n, cap, lazy and not keep)
        if keep:
            level = list(level)
            tables[n] = level
        yield from level


def _level(tables, n: int, cap: int, lazy: bool = False) -> Iterator[_Entry]:
    for k in range(1, n):
        for op in OPERATORS:
            for l in tables[k]:
                for r in tables[n - k]:
                    yield _combine(op, l, r, cap, lazy)


def _single(g: GChor, cap: int) -> _Entry:
    """Entry for one arbitrary ground term, computed the same way as in sweeps."""
    if isinstance(g, (Empty, Interaction)):
        if isinstance(g, Empty):
            return _Entry(g, ChorType(frozenset(), frozenset(), frozenset()), ev.EMPTY, frozenset())
        return _leaf_entry(g)
    return _combine(type(g), _single(g.left, cap), _single(g.right, cap), cap)


def _terms_entries(params: GenParams | None, terms, cap: int, lazy: bool = False) -> Iterator[_Entry]:
    if terms is not None:
        for g in terms:
            if not is_ground(g):
                raise ValueError(f"sweeps need ground terms: {pretty(g)}")
            yield _single(g, cap)
    else:
        yield from _entries(params, cap, lazy)


def _label_names(es: ev.EventStructure, mask: int) -> str:
    return "{" + ", ".join(sorted(str(es.labels[e]) for e in bits(mask))) + "}"


def _check_soundness(entry: _Entry, report: SweepReport, retype: bool):
    g, t, es = entry.term, entry.type, entry.es
    if retype:
        report.note("unique-typing")
        again = typecheck.type_of(g)
        if again != t:
            report.violate(g, "unique-typing", f"{t} vs {again}")
    report.note("soundness")
    if es is None:
        report.violate(g, "soundness", "typable but semantics undefined")
        return
    if t.pi != entry.parts:
        report.violate(g, "soundness", f"context {sorted(t.pi)} ≠ participants {sorted(entry.parts)}")
    for p in sorted(t.pi):
        proj = es.subject_mask(p)
        first = es.label_set(es.min_mask(proj))
        last = es.label_set(es.max_mask(proj))
        if hat(t.first, p) != first:
            report.violate(g, "soundness", f"first labels of {p}: type {sorted(map(str, hat(t.first, p)))}"
                                           f" vs minimal events {sorted(map(str, first))}")
        if hat(t.last, p) != last:
            report.violate(g, "soundness", f"last labels of {p}: type {sorted(map(str, hat(t.last, p)))}"
                                           f" vs maximal events {sorted(map(str, last))}")


def soundness_sweep(params: GenParams | None = None, cap: int = ev.DEFAULT_CAP,
                    terms=None, retype: bool = True) -> SweepReport:
    """Typable terms have defined semantics whose projections match their type.

    With ``retype`` every typable term is also typed again from scratch by
    ``type_of`` and compared with the type computed bottom-up.  ``terms``
    replaces the enumeration by an explicit list of ground terms.
    """
    report = SweepReport()
    for entry in _terms_entries(params, terms, cap, lazy=True):
        report.total += 1
        if entry.exploded:
            report.skipped += 1
            continue
        if entry.wf:
            report.wf += 1
        if entry.type is None:
            continue
        report.typable += 1
        _check_soundness(entry, report, retype)
    return report.finish()


def synthesize_actions(t: ChorType) -> list[Refinable]:
    """Refinable actions suggested by a type: its unique output subject as
    initiator, and any nonempty set of participants whose last label is a
    single input as targets."""
    starters = {l.subject for l in t.first if l.polarity == OUT}
    if len(starters) != 1:
        return []
    (a,) = starters
    targets = []
    for b in sorted(t.pi - {a}):
        h = hat(t.last, b)
        if len(h) == 1:
            (l,) = h
            if l.polarity == IN:
                targets.append((l.msg, b))
    out = []
    for k in range(1, len(targets) + 1):
        for combo in itertools.combinations(targets, k):
            out.append(Refinable(a, combo))
    return out


def _check_metatheory(entry: _Entry, report: SweepReport, cap: int):
    g, t, es = entry.term, entry.type, entry.es
    if es is None:
        return
    configs = _configs(entry, cap)
    masks = {p: es.subject_mask(p) for p in entry.parts}
    if t is not None:
        report.note("singleton-maxima")
        for x in configs:
            for p, m in masks.items():
                top = es.max_mask(x & m)
                if top.bit_count() > 1:
                    report.violate(g, "singleton-maxima",
                                   f"{p} ends with {_label_names(es, top)} in {_label_names(es, x)}")
    if len(es):
        report.note("min-max")
        for x in configs:
            low, high = es.min_mask(x), es.max_mask(x)
            if not low or any(es.labels[e].polarity != OUT for e in bits(low)):
                report.violate(g, "min-max-i", f"minimal events {_label_names(es, low)}")
            if not high or any(es.labels[e].polarity != IN for e in bits(high)):
                report.violate(g, "min-max-i", f"maximal events {_label_names(es, high)}")
            subs = {es.labels[e].subject for e in bits(x)}
            if subs != entry.parts:
                report.violate(g, "min-max-ii", f"subjects {sorted(subs)} in {_label_names(es, x)}")
    if t is not None:
        for action in synthesize_actions(t):
            ok, _ = validate_ref_context(action, t)
            if not ok:
                continue
            report.note("t-ref-admission")
            verdict = refines(g, action, cap, es=es)
            if not verdict.holds:
                report.violate(g, "t-ref-admission", f"{pretty(action)}: {verdict.describe()}")


def metatheory_sweep(params: GenParams | None = None, cap: int = ev.DEFAULT_CAP,
                     terms=None) -> SweepReport:
    """Singleton maxima and admission soundness on typable terms; min/max
    shape of maximal configurations on every nonempty well-formed term."""
    report = SweepReport()
    for entry in _terms_entries(params, terms, cap):
        report.total += 1
        if entry.exploded:
            report.skipped += 1
            continue
        if entry.type is not None:
            report.typable += 1
        if entry.es is None:
            continue
        report.wf += 1
        try:
            _check_metatheory(entry, report, cap)
        except ConfigExplosion:
            report.skipped += 1
    return report.finish()
