"""Syntax-directed typing of (refinable) g-choreographies.

A judgement ``Π ⊢ G : ⟨φ, Λ⟩`` assigns to ``G`` its participants ``Π``
and the labels ``φ`` / ``Λ`` of its first and last events.  Typing never
builds event structures; it only manipulates label sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from chorc.events import IN, OUT, Label
from chorc.syntax import (Choice, Empty, GChor, Interaction, Par, Path, Refinable,
                          Seq, format_path)

LabelSet = frozenset


@dataclass(frozen=True)
class ChorType:
    pi: frozenset
    first: frozenset
    last: frozenset

    def __str__(self) -> str:
        def show(ls):
            return "{" + ", ".join(sorted(map(str, ls))) + "}"
        return f"{show(self.pi)} ⊢ ⟨{show(self.first)}, {show(self.last)}⟩"


@dataclass(frozen=True)
class RefContext(ChorType):
    """Typing context annotating a refinable action (an instance of t-ref)."""

    @classmethod
    def of(cls, t: ChorType) -> "RefContext":
        return cls(t.pi, t.first, t.last)


class ChorTypeError(Exception):
    """No typing rule applies; ``rule`` names the rule whose side condition failed."""

    def __init__(self, rule: str, path: Path, detail: str, witness: Iterable = ()):
        self.rule = rule
        self.path = tuple(path)
        self.detail = detail
        self.witness = tuple(sorted(map(str, witness)))
        super().__init__(f"{rule} at {format_path(self.path)}: {detail}")

    def under(self, step: str) -> "ChorTypeError":
        return ChorTypeError(self.rule, (step,) + self.path, self.detail, self.witness)


def hat(ls: Iterable[Label], p: str) -> frozenset:
    """Labels of ``ls`` whose subject is ``p``."""
    return frozenset(l for l in ls if l.subject == p)


def minus(ls: Iterable[Label], pi: Iterable[str]) -> frozenset:
    """Labels of ``ls`` whose subject is outside ``pi``."""
    pi = set(pi)
    return frozenset(l for l in ls if l.subject not in pi)


def subjects(ls: Iterable[Label]) -> frozenset:
    return frozenset(l.subject for l in ls)


def output_uniform(u: frozenset, v: frozenset) -> bool:
    return not (u & v) and all(l.polarity == OUT for l in u | v)


def input_uniform(u: frozenset, v: frozenset) -> bool:
    return not (u & v) and all(l.polarity == IN for l in u | v)


def compch(phi1: Iterable[Label], phi2: Iterable[Label], pi: Iterable[str]):
    """Side condition of t-ch.  Returns ``(holds, selector)``."""
    ok, selector, _ = _compch(frozenset(phi1), frozenset(phi2), frozenset(pi))
    return ok, selector


def _compch(phi1: frozenset, phi2: frozenset, pi: frozenset):
    active = []
    passive_bad = []
    for p in sorted(pi):
        u, v = hat(phi1, p), hat(phi2, p)
        if u and v and output_uniform(u, v):
            active.append(p)
        elif not (input_uniform(u, v) and bool(u) == bool(v)):
            passive_bad.append(p)
    if len(active) != 1:
        if not active:
            return False, None, ("no participant has disjoint nonempty outputs "
                                 "in both branches", tuple(passive_bad))
        return False, None, ("more than one participant could select the branch",
                             tuple(active))
    if passive_bad:
        return False, None, ("participants are neither selector nor input-uniform "
                             "with matching emptiness", tuple(passive_bad))
    return True, active[0], None


def default_ref_context(r: Refinable) -> RefContext:
    labels = set()
    for m, b in r.targets:
        labels.add(Label(r.initiator, b, OUT, m))
        labels.add(Label(r.initiator, b, IN, m))
    pi = frozenset((r.initiator, *r.dests))
    return RefContext(pi, frozenset(labels), frozenset(labels))


def validate_ref_context(r: Refinable, ctx: ChorType) -> tuple[bool, str]:
    """Side conditions of t-ref for annotating ``r`` with ``ctx``."""
    if subjects(ctx.first) != ctx.pi or subjects(ctx.last) != ctx.pi:
        return False, "subjects of first and last labels must both equal the context participants"
    out_subjects = subjects(l for l in ctx.first if l.polarity == OUT)
    if out_subjects != {r.initiator}:
        found = ", ".join(sorted(out_subjects)) or "none"
        return False, (f"outputs among first labels must all belong to {r.initiator} "
                       f"(found subjects: {found})")
    for m, b in r.targets:
        h = hat(ctx.last, b)
        if len(h) != 1:
            return False, f"{b} must have exactly one last label, found {len(h)}"
        (l,) = h
        if not (l.polarity == IN and l.receiver == b and l.msg == m):
            return False, f"last label of {b} is {l}, expected an input of {m}"
    return True, "ok"


_EMPTY_TYPE = ChorType(frozenset(), frozenset(), frozenset())


class _Typer:
    def __init__(self, ctxs: Mapping[str, ChorType], use_default_ctx: bool, memo: dict | None):
        self.ctxs = ctxs
        self.use_default_ctx = use_default_ctx
        self.memo = memo
        self.count = 0  # refinable occurrences met so far, in preorder

    def type(self, g: GChor) -> ChorType:
        if isinstance(g, Empty):
            return _EMPTY_TYPE
        if isinstance(g, Interaction):
            labels = frozenset((Label(g.sender, g.receiver, OUT, g.msg),
                                Label(g.sender, g.receiver, IN, g.msg)))
            return ChorType(frozenset((g.sender, g.receiver)), labels, labels)
        if isinstance(g, Refinable):
            self.count += 1
            name = g.tag or f"r{self.count}"
            if name in self.ctxs:
                ctx = self.ctxs[name]
            elif self.use_default_ctx:
                ctx = default_ref_context(g)
            else:
                raise ChorTypeError("t-ref", (), f"no typing context for refinable action {name}")
            ok, reason = validate_ref_context(g, ctx)
            if not ok:
                raise ChorTypeError("t-ref", (), f"invalid context for {name}: {reason}")
            return ChorType(ctx.pi, ctx.first, ctx.last)
        memo = self.memo
        if memo is not None and g in memo:
            hit = memo[g]
            if isinstance(hit, ChorTypeError):
                raise hit
            return hit
        try:
            t = self._binary(g)
        except ChorTypeError as exc:
            if memo is not None:
                memo[g] = exc
            raise
        if memo is not None:
            memo[g] = t
        return t

    def _binary(self, g: GChor) -> ChorType:
        try:
            t1 = self.type(g.left)
        except ChorTypeError as exc:
            raise exc.under("L") from None
        try:
            t2 = self.type(g.right)
        except ChorTypeError as exc:
            raise exc.under("R") from None
        return combine(g, t1, t2)


def combine(g: GChor, t1: ChorType, t2: ChorType) -> ChorType:
    """Conclusion of the rule for the binary operator of ``g`` from its premises."""
    if isinstance(g, Seq):
        return ChorType(t1.pi | t2.pi,
                        t1.first | minus(t2.first, t1.pi),
                        t2.last | minus(t1.last, t2.pi))
    if isinstance(g, Par):
        overlap = t1.pi & t2.pi
        if overlap:
            raise ChorTypeError("t-par", (),
                                f"participants {', '.join(sorted(overlap))} occur on both sides",
                                overlap)
        return ChorType(t1.pi | t2.pi, t1.first | t2.first, t1.last | t2.last)
    if isinstance(g, Choice):
        if t1.pi != t2.pi:
            left = "{" + ",".join(sorted(t1.pi)) + "}"
            right = "{" + ",".join(sorted(t2.pi)) + "}"
            raise ChorTypeError("t-ch", (), f"branch contexts differ: {left} ≠ {right}",
                                t1.pi ^ t2.pi)
        ok, _, why = _compch(t1.first, t2.first, t1.pi)
        if not ok:
            reason, witness = why
            raise ChorTypeError("t-ch", (), f"compch fails: {reason}", witness)
        return ChorType(t1.pi, t1.first | t2.first, t1.last | t2.last)
    raise TypeError(f"not a binary node: {g!r}")


def type_of(g: GChor, ctxs: Mapping[str, ChorType] | None = None,
            use_default_ctx: bool = True, memo: dict | None = None) -> ChorType:
    """The unique type of ``g``, or ``ChorTypeError`` locating the failing rule.

    Refinable occurrences take the context registered under their tag (or
    automatic name ``r<k>``) in ``ctxs``; otherwise the default context
    when ``use_default_ctx`` holds.  ``memo`` may only be shared between
    calls on ground terms.
    """
    return _Typer(ctxs or {}, use_default_ctx, memo).type(g)
