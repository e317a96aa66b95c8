"""Finite labelled prime event structures over communication labels.

Events are the integers ``0 .. n-1``.  Relations are stored as Python
integers used as bitsets:

* ``preds[e]`` has bit ``f`` set iff ``f < e`` (strict causality, kept
  transitively closed);
* ``conflicts[e]`` has bit ``f`` set iff ``e # f``.

Structures built by the operations in this module are always closed
(causality transitive, conflict hereditary).  ``EventStructure.build``
accepts arbitrary generators so that malformed inputs can be reported by
``validate``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

OUT = "!"
IN = "?"

DEFAULT_CAP = 4096


class Label(NamedTuple):
    sender: str
    receiver: str
    polarity: str  # OUT or IN
    msg: str

    def __str__(self) -> str:
        if len(self.sender) == 1 and len(self.receiver) == 1:
            return f"{self.sender}{self.receiver}{self.polarity}{self.msg}"
        return f"{self.sender} {self.receiver}{self.polarity}{self.msg}"

    @property
    def is_output(self) -> bool:
        return self.polarity == OUT

    @property
    def subject(self) -> str:
        return self.sender if self.polarity == OUT else self.receiver


def subject(label: Label) -> str:
    """The participant performing the action: sender of an output, receiver of an input."""
    return label.sender if label.polarity == OUT else label.receiver


def co_action(label: Label) -> Label:
    return label._replace(polarity=IN if label.polarity == OUT else OUT)


def parse_label(text: str) -> Label:
    """Parse ``"AB!m"`` or ``"Alice Bob?m"``."""
    from chorc.syntax import parse_label_tokens, tokenize

    sender, receiver, polarity, msg = parse_label_tokens(tokenize(text))
    return Label(sender, receiver, polarity, msg)


class ConfigExplosion(Exception):
    """Raised when the number of maximal configurations would exceed the cap."""

    def __init__(self, cap: int, path=()):
        self.cap = cap
        self.path = path
        super().__init__(f"more than {cap} maximal configurations")


class Violation(NamedTuple):
    kind: str  # "cycle", "conflict-reflexive", "conflict-asymmetric", "hereditary", "unlabelled"
    events: tuple

    def __str__(self) -> str:
        return f"{self.kind} {self.events}"


def bits(mask: int) -> Iterable[int]:
    """Indices of the set bits of ``mask``, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _close(preds: list[int]) -> list[int]:
    # Warshall on bitsets; a cycle shows up as an event preceding itself
    preds = list(preds)
    n = len(preds)
    for k in range(n):
        bk = 1 << k
        pk = preds[k]
        for i in range(n):
            if preds[i] & bk:
                preds[i] |= pk
    return preds


@dataclass(frozen=True)
class EventStructure:
    labels: tuple  # Label per event (None marks a labelling gap)
    preds: tuple  # strict predecessors, transitively closed
    conflicts: tuple

    @classmethod
    def build(cls, labels: Sequence, cause: Iterable = (), conflict: Iterable = ()) -> "EventStructure":
        """Make a structure from a causality generator and conflict pairs.

        Causality is closed transitively; conflict is only symmetrised, so
        hereditarity gaps survive for ``validate`` to report.
        """
        n = len(labels)
        preds = [0] * n
        for e, f in cause:
            preds[f] |= 1 << e
        conf = [0] * n
        for e, f in conflict:
            conf[e] |= 1 << f
            conf[f] |= 1 << e
        return cls(tuple(labels), tuple(_close(preds)), tuple(conf))

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def events(self) -> range:
        return range(len(self.labels))

    @property
    def full(self) -> int:
        return (1 << len(self.labels)) - 1

    def leq(self, e: int, f: int) -> bool:
        return e == f or bool(self.preds[f] >> e & 1)

    def in_conflict(self, e: int, f: int) -> bool:
        return bool(self.conflicts[e] >> f & 1)

    @property
    def cause(self) -> set:
        """Immediate causality: the transitive reduction of ``<``."""
        out = set()
        for f, pf in enumerate(self.preds):
            covered = 0
            for e in bits(pf):
                covered |= self.preds[e]
            out.update((e, f) for e in bits(pf & ~covered))
        return out

    @property
    def conflict(self) -> set:
        return {(e, f) for e in self.events for f in bits(self.conflicts[e]) if e < f}

    def successors(self) -> list[int]:
        succ = [0] * len(self)
        for f, pf in enumerate(self.preds):
            for e in bits(pf):
                succ[e] |= 1 << f
        return succ

    @property
    def _subject_masks(self) -> dict:
        # computed once per structure; stored outside the dataclass fields
        masks = self.__dict__.get("_masks")
        if masks is None:
            masks = {}
            for e, lab in enumerate(self.labels):
                p = lab.subject
                masks[p] = masks.get(p, 0) | 1 << e
            self.__dict__["_masks"] = masks
        return masks

    def subject_mask(self, p: str) -> int:
        return self._subject_masks.get(p, 0)

    def subjects(self) -> set:
        return set(self._subject_masks)

    def label_set(self, mask: int | None = None) -> set:
        if mask is None:
            return set(self.labels)
        return {self.labels[e] for e in bits(mask)}

    def min_mask(self, within: int | None = None) -> int:
        """Events of ``within`` with no strict predecessor inside ``within``."""
        within = self.full if within is None else within
        m = 0
        for e in bits(within):
            if not self.preds[e] & within:
                m |= 1 << e
        return m

    def max_mask(self, within: int | None = None) -> int:
        within = self.full if within is None else within
        covered = 0
        for e in bits(within):
            covered |= self.preds[e] & within
        return within & ~covered

    def __str__(self) -> str:
        if not self.labels:
            return "ε"
        names = [f"e{e}:{lab}" for e, lab in enumerate(self.labels)]
        order = ", ".join(f"e{e}<e{f}" for e, f in sorted(self.cause))
        conf = ", ".join(f"e{e}#e{f}" for e, f in sorted(self.conflict))
        return f"events [{', '.join(names)}]; order [{order}]; conflict [{conf}]"


EMPTY = EventStructure((), (), ())


def interaction(sender: str, receiver: str, msg: str) -> EventStructure:
    """The two-event chain ``AB!m < AB?m``."""
    return EventStructure((Label(sender, receiver, OUT, msg), Label(sender, receiver, IN, msg)),
                          (0, 1), (0, 0))


def validate(es: EventStructure) -> list[Violation]:
    out = []
    n = len(es)
    for e in range(n):
        if es.preds[e] >> e & 1:
            out.append(Violation("cycle", (e,)))
    for e in range(n):
        if es.conflicts[e] >> e & 1:
            out.append(Violation("conflict-reflexive", (e,)))
        for f in bits(es.conflicts[e]):
            if not es.conflicts[f] >> e & 1:
                out.append(Violation("conflict-asymmetric", (e, f)))
    for e in range(n):
        for f in bits(es.conflicts[e]):
            # e # f and f <= g must give e # g
            for g in range(n):
                if es.preds[g] >> f & 1 and not es.conflicts[e] >> g & 1:
                    out.append(Violation("hereditary", (e, g)))
    for e, lab in enumerate(es.labels):
        if not isinstance(lab, Label):
            out.append(Violation("unlabelled", (e,)))
    extra = len(es.preds) != n or len(es.conflicts) != n
    if extra:
        out.append(Violation("unlabelled", tuple(range(n, max(len(es.preds), len(es.conflicts))))))
    return out


def restrict(es: EventStructure, mask: int) -> EventStructure:
    """Sub-structure on the events of ``mask``, renumbered in ascending order."""
    keep = list(bits(mask))
    index = {e: i for i, e in enumerate(keep)}

    def remap(m: int) -> int:
        r = 0
        for e in bits(m & mask):
            r |= 1 << index[e]
        return r

    return EventStructure(tuple(es.labels[e] for e in keep),
                          tuple(remap(es.preds[e]) for e in keep),
                          tuple(remap(es.conflicts[e]) for e in keep))


def project(es: EventStructure, p: str) -> EventStructure:
    return restrict(es, es.subject_mask(p))


def _shift(masks: Iterable[int], k: int) -> list[int]:
    return [m << k for m in masks]


def tensor(a: EventStructure, b: EventStructure) -> EventStructure:
    """Disjoint union with no causality or conflict across the components."""
    na = len(a)
    return EventStructure(a.labels + b.labels,
                          a.preds + tuple(_shift(b.preds, na)),
                          a.conflicts + tuple(_shift(b.conflicts, na)))


def es_sum(family: Sequence[EventStructure]) -> EventStructure:
    """Disjoint union putting every pair of events from distinct members in conflict."""
    if not family:
        raise ValueError("sum of an empty family")
    labels, preds, conf = [], [], []
    offset = 0
    spans = []
    for es in family:
        spans.append(((1 << len(es)) - 1) << offset)
        offset += len(es)
    total = (1 << offset) - 1
    offset = 0
    for es, span in zip(family, spans):
        labels.extend(es.labels)
        preds.extend(_shift(es.preds, offset))
        others = total & ~span
        conf.extend((c << offset) | others for c in es.conflicts)
        offset += len(es)
    return EventStructure(tuple(labels), tuple(preds), tuple(conf))


def minimals(es: EventStructure) -> set:
    return set(bits(es.min_mask()))


def maximals(es: EventStructure) -> set:
    return set(bits(es.max_mask()))


def max_config_masks(es: EventStructure, cap: int = DEFAULT_CAP) -> list[int]:
    """Maximal configurations as bitmasks, sorted ascending.

    With hereditary conflict the maximal configurations are exactly the
    maximal conflict-free sets, i.e. maximal cliques of the compatibility
    graph.  Events in no conflict belong to every one of them.
    """
    n = len(es)
    conf = es.conflicts
    touched = 0
    for e in range(n):
        if conf[e]:
            touched |= 1 << e
    free = es.full & ~touched
    if not touched:
        return [free]
    compat = {e: touched & ~conf[e] & ~(1 << e) for e in bits(touched)}
    found: list[int] = []

    def expand(chosen: int, cand: int, excl: int):
        if not cand:
            if not excl:
                if len(found) >= cap:
                    raise ConfigExplosion(cap)
                found.append(chosen | free)
            return
        pivot = max(bits(cand | excl), key=lambda u: (cand & compat[u]).bit_count())
        for v in bits(cand & ~compat[pivot]):
            bv = 1 << v
            expand(chosen | bv, cand & compat[v], excl & compat[v])
            cand &= ~bv
            excl |= bv

    expand(0, touched, 0)
    found.sort()
    return found


def max_configurations(es: EventStructure, cap: int = DEFAULT_CAP) -> list[frozenset]:
    return [frozenset(bits(x)) for x in max_config_masks(es, cap)]


def is_configuration(es: EventStructure, events: Iterable[int]) -> bool:
    x = 0
    for e in events:
        x |= 1 << e
    for e in bits(x):
        if es.preds[e] & ~x or es.conflicts[e] & x:
            return False
    return True


def seq_compose(a: EventStructure, b: EventStructure, cap: int = DEFAULT_CAP,
                configs: list[int] | None = None, branch_local: bool = True) -> EventStructure:
    """Sequential composition: one conflicting copy of ``b`` per maximal configuration of ``a``.

    An event of the copy attached to ``x`` is caused by every event of ``x``
    with the same subject; causality is then closed transitively and
    conflict hereditarily.  With ``branch_local`` the copy attached to
    ``x`` also conflicts with every event of ``a`` outside ``x``, so that
    it can only occur in branch ``x``; without it, events of a copy that
    no event of ``x`` causes may join a configuration of another branch.
    ``configs`` may pass precomputed ``max_config_masks(a)``.
    """
    if configs is None:
        configs = max_config_masks(a, cap)
    na, nb, k = len(a), len(b), len(configs)
    if nb == 0:
        return a
    b_subjects = [lab.subject for lab in b.labels]
    # subjects occurring at or below each event of b
    below_subjects = []
    for f in range(nb):
        subs = {b_subjects[f]}
        subs.update(b_subjects[g] for g in bits(b.preds[f]))
        below_subjects.append(subs)
    a_labels, a_preds, a_conf = a.labels, a.preds, a.conflicts
    a_full = a.full
    a_subjects = a._subject_masks
    labels = list(a_labels)
    preds = list(a_preds)
    conf = list(a_conf)
    copies_total = ((1 << (k * nb)) - 1) << na
    extra_conf = [0] * na
    for i, x in enumerate(configs):
        off = na + i * nb
        span = ((1 << nb) - 1) << off
        # downward closure of the events of x per subject
        down = {}
        for p, pm in a_subjects.items():
            xp = x & pm
            if xp:
                d = xp
                for e in bits(xp):
                    d |= a_preds[e]
                down[p] = d
        if branch_local:
            outside = a_full & ~x
            for g in bits(outside):
                extra_conf[g] |= span
        else:
            inherited = {}
            for p, d in down.items():
                acc = 0
                for e in bits(d):
                    acc |= a_conf[e]
                inherited[p] = acc
        others = copies_total & ~span
        for f in range(nb):
            anc = 0
            inh = 0
            for p in below_subjects[f]:
                if p in down:
                    anc |= down[p]
                    if not branch_local:
                        inh |= inherited[p]
            labels.append(b.labels[f])
            preds.append((b.preds[f] << off) | anc)
            if branch_local:
                conf.append((b.conflicts[f] << off) | others | outside)
            else:
                conf.append((b.conflicts[f] << off) | others | inh)
                ev = 1 << (off + f)
                for g in bits(inh):
                    extra_conf[g] |= ev
    for g in range(na):
        conf[g] |= extra_conf[g]
    return EventStructure(tuple(labels), tuple(preds), tuple(conf))


def well_forked(a: EventStructure, b: EventStructure) -> bool:
    return not (set(a.labels) & set(b.labels))


class BranchCheck(NamedTuple):
    ok: bool
    selector: str | None
    failure: str | None  # None, "determined-choice" or "unique-selector"
    participant: str | None  # witness participant for a failure
    detail: str


def _branch_check(a: EventStructure, b: EventStructure) -> BranchCheck:
    # Works on the operands: in a + b the minimal events of a projection are
    # those of each side, and every pair across the sides is in conflict.
    parts = sorted(a.subjects() | b.subjects())
    mins = {}
    for p in parts:
        pa, pb = a.subject_mask(p), b.subject_mask(p)
        if (pa == 0) != (pb == 0):
            side = "left" if pa else "right"
            return BranchCheck(False, None, "determined-choice", p,
                               f"determined choice fails for participant {p}: "
                               f"{p} acts only in the {side} branch")
        ma, mb = a.min_mask(pa), b.min_mask(pb)
        la = {a.labels[x] for x in bits(ma)}
        lb = {b.labels[x] for x in bits(mb)}
        clash = la & lb
        for es, mask in ((a, ma), (b, mb)):
            for x in bits(mask):
                for y in bits(es.conflicts[x] & mask):
                    if es.labels[x] == es.labels[y]:
                        clash.add(es.labels[x])
        if clash:
            return BranchCheck(False, None, "determined-choice", p,
                               f"determined choice fails for participant {p}: "
                               f"conflicting minimal events share label {min(clash)}")
        mins[p] = la | lb
    outputs = [p for p in parts if any(l.polarity == OUT for l in mins[p])]
    for p in outputs:
        if all(l.polarity == OUT for l in mins[p]) and all(
                all(l.polarity == IN for l in mins[q]) for q in parts if q != p):
            return BranchCheck(True, p, None, None, f"selector {p}")
    if not outputs:
        return BranchCheck(False, None, "unique-selector", None,
                           "unique selector fails: no participant starts with an output")
    if len(outputs) > 1:
        return BranchCheck(False, None, "unique-selector", outputs[1],
                           "unique selector fails: participants "
                           f"{', '.join(outputs)} all have minimal outputs")
    p = outputs[0]
    return BranchCheck(False, None, "unique-selector", p,
                       f"unique selector fails: {p} mixes minimal inputs and outputs")


def well_branched(a: EventStructure, b: EventStructure) -> BranchCheck:
    """Determined choice and unique selector on ``a + b``; returns the selector on success."""
    return _branch_check(a, b)


def depths(es: EventStructure) -> list[int]:
    """Length of the longest causal chain ending in each event."""
    n = len(es)
    depth = [0] * n
    order = sorted(range(n), key=lambda e: es.preds[e].bit_count())
    for e in order:
        d = 0
        for f in bits(es.preds[e]):
            if depth[f] + 1 > d:
                d = depth[f] + 1
        depth[e] = d
    return depth


def permute(es: EventStructure, order: Sequence[int]) -> EventStructure:
    """Renumber so that old event ``order[i]`` becomes event ``i``."""
    index = {old: new for new, old in enumerate(order)}

    def remap(m: int) -> int:
        r = 0
        for e in bits(m):
            r |= 1 << index[e]
        return r

    return EventStructure(tuple(es.labels[e] for e in order),
                          tuple(remap(es.preds[e]) for e in order),
                          tuple(remap(es.conflicts[e]) for e in order))


def canonicalize(es: EventStructure) -> EventStructure:
    """Renumber by causal depth, then label, then the new ids of the predecessors.

    Remaining ties keep their relative input order.
    """
    depth = depths(es)
    new_id: dict[int, int] = {}
    order: list[int] = []
    for d in sorted(set(depth)):
        level = [e for e in es.events if depth[e] == d]
        level.sort(key=lambda e: (tuple(es.labels[e]),
                                  sorted(new_id[f] for f in bits(es.preds[e])), e))
        for e in level:
            new_id[e] = len(order)
            order.append(e)
    return permute(es, order)


def es_isomorphic(a: EventStructure, b: EventStructure) -> bool:
    """Label-preserving bijection matching causality and conflict exactly."""
    n = len(a)
    if n != len(b) or sorted(a.labels) != sorted(b.labels):
        return False
    da, db = depths(a), depths(b)
    sa, sb = a.successors(), b.successors()

    def signature(es, depth, succ, e):
        return (es.labels[e], depth[e], es.preds[e].bit_count(),
                succ[e].bit_count(), es.conflicts[e].bit_count())

    sig_a = [signature(a, da, sa, e) for e in range(n)]
    sig_b = [signature(b, db, sb, e) for e in range(n)]
    if sorted(sig_a) != sorted(sig_b):
        return False
    order = sorted(range(n), key=lambda e: (da[e], sig_a[e]))
    mapping = [-1] * n
    used = [False] * n

    def extend(i: int) -> bool:
        if i == n:
            return True
        e = order[i]
        for f in range(n):
            if used[f] or sig_b[f] != sig_a[e]:
                continue
            ok = True
            for j in range(i):
                g = order[j]
                h = mapping[g]
                if (a.preds[e] >> g & 1) != (b.preds[f] >> h & 1) \
                        or (a.preds[g] >> e & 1) != (b.preds[h] >> f & 1) \
                        or (a.conflicts[e] >> g & 1) != (b.conflicts[f] >> h & 1):
                    ok = False
                    break
            if ok:
                mapping[e] = f
                used[f] = True
                if extend(i + 1):
                    return True
                used[f] = False
        mapping[e] = -1
        return False

    return extend(0)
