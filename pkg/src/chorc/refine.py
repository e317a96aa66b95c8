"""Refinement of refinable actions by ground g-choreographies.

Two routes decide whether a ground candidate may replace a refinable
action: ``refines`` inspects the event-structure semantics directly, and
the typing route checks that the candidate's own type is an admissible
t-ref context for the action.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from chorc import events as ev
from chorc.events import IN, bits
from chorc.semantics import interpret
from chorc.syntax import BINARY, GChor, Refinable, is_ground, pretty, refinable_occurrences
from chorc.typecheck import (ChorType, ChorTypeError, RefContext, type_of,
                             validate_ref_context)


class UnknownTag(KeyError):
    pass


class DuplicateTag(ValueError):
    pass


@dataclass(frozen=True)
class Binding:
    tag: str
    replacement: GChor

    def __post_init__(self):
        if not is_ground(self.replacement):
            raise ValueError(f"replacement for {self.tag} is not ground: {pretty(self.replacement)}")


@dataclass(frozen=True)
class RefReport:
    holds: bool
    initiator_found: str | None = None
    failed_clause: str | None = None  # "i", "ii" or "iii"
    witnesses: dict = field(default_factory=dict)

    def describe(self) -> str:
        if self.holds:
            return f"refines (initiator {self.initiator_found})"
        what = {"i": "semantics undefined", "ii": "no unique initiator matching the action",
                "iii": "promised input missing at the end of some branch"}[self.failed_clause]
        return f"does not refine: clause {self.failed_clause} ({what})"

    def to_json(self) -> dict:
        return {"holds": self.holds, "initiator": self.initiator_found,
                "failed_clause": self.failed_clause, "witnesses": self.witnesses}


def refines(g: GChor, action: Refinable, cap: int = ev.DEFAULT_CAP,
            es: ev.EventStructure | None = None) -> RefReport:
    """Check ``g ref action`` on the semantics of ``g``.

    ``es`` may supply an already computed (defined) semantics of ``g``.
    """
    if es is None:
        res = interpret(g, cap)
        if res.bottom is not None:
            return RefReport(False, None, "i", {"diagnostic": str(res.bottom)})
        es = res.es
    starters = sorted({es.labels[e].subject for e in bits(es.min_mask())})
    initiator = starters[0] if len(starters) == 1 else None
    if starters != [action.initiator]:
        return RefReport(False, initiator, "ii", {"initiators": starters})
    for x in ev.max_config_masks(es, cap):
        for m, b in action.targets:
            last = es.max_mask(x & es.subject_mask(b))
            if not any(es.labels[e].polarity == IN and es.labels[e].msg == m for e in bits(last)):
                return RefReport(False, initiator, "iii", {
                    "configuration": sorted(str(es.labels[e]) for e in bits(x)),
                    "participant": b, "message": m,
                    "last": sorted(str(es.labels[e]) for e in bits(last))})
    return RefReport(True, initiator)


def infer_context(g: GChor) -> RefContext:
    """The context read off the unique type of a ground candidate."""
    return RefContext.of(type_of(g, use_default_ctx=False))


def substitute(g: GChor, bindings: Sequence[Binding]) -> GChor:
    """Replace the named refinable occurrences; unbound ones stay in place."""
    table = {}
    for b in bindings:
        if b.tag in table:
            raise DuplicateTag(b.tag)
        table[b.tag] = b.replacement
    names = [name for name, _ in refinable_occurrences(g)]
    unknown = sorted(set(table) - set(names))
    if unknown:
        raise UnknownTag(", ".join(unknown))
    it = iter(names)

    def rebuild(t: GChor) -> GChor:
        if isinstance(t, Refinable):
            name = next(it)
            return table.get(name, t)
        if isinstance(t, BINARY):
            left = rebuild(t.left)
            return type(t)(left, rebuild(t.right))
        return t

    return rebuild(g)


@dataclass
class HoleReport:
    tag: str
    action: Refinable
    inferred_ctx: RefContext | None
    tref_valid: bool
    tref_reason: str
    sem_refines: RefReport
    error: ChorTypeError | None = None


@dataclass
class RefineReport:
    substituted: GChor
    result_type: ChorType | None
    error: ChorTypeError | None
    stage: str | None  # where typing failed
    per_hole: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.result_type is not None and all(
            h.tref_valid and h.sem_refines.holds for h in self.per_hole)


def refine_and_check(g: GChor, bindings: Sequence[Binding],
                     ctxs: Mapping[str, ChorType] | None = None,
                     use_default_ctx: bool = True, cap: int = ev.DEFAULT_CAP) -> RefineReport:
    """Check each replacement against its action, substitute, and retype the result.

    ``ctxs`` are keyed by the occurrence names of ``g``; contexts of holes
    that stay refinable are carried over to their names in the result.
    """
    occurrences = refinable_occurrences(g)
    actions = dict(occurrences)
    per_hole = []
    for b in bindings:
        if b.tag not in actions:
            raise UnknownTag(b.tag)
        action = actions[b.tag]
        try:
            ctx = infer_context(b.replacement)
        except ChorTypeError as exc:
            per_hole.append(HoleReport(b.tag, action, None, False,
                                       f"replacement is untypable: {exc}",
                                       refines(b.replacement, action, cap), exc))
            continue
        valid, reason = validate_ref_context(action, ctx)
        per_hole.append(HoleReport(b.tag, action, ctx, valid, reason,
                                   refines(b.replacement, action, cap)))
    result = substitute(g, bindings)
    bound = {b.tag for b in bindings}
    remaining = [name for name, _ in occurrences if name not in bound]
    renamed = dict(zip(remaining, (name for name, _ in refinable_occurrences(result))))
    carried = {renamed[k]: v for k, v in (ctxs or {}).items() if k in renamed}
    try:
        t = type_of(result, carried, use_default_ctx)
    except ChorTypeError as exc:
        return RefineReport(result, None, exc, "substituted term", per_hole)
    return RefineReport(result, t, None, None, per_hole)
