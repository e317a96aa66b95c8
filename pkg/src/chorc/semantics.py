"""Event-structure semantics of ground g-choreographies.

``interpret`` returns either an event structure or a diagnostic standing
for the undefined semantics, located at the offending subterm.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from chorc import events as ev
from chorc.events import ConfigExplosion, EventStructure
from chorc.syntax import Empty, GChor, Interaction, Par, Path, Refinable, Seq, format_path, walk

NOT_WELL_FORKED = "NotWellForked"
DETERMINED_CHOICE = "NotWellBranched-DeterminedChoice"
UNIQUE_SELECTOR = "NotWellBranched-UniqueSelector"
REFINABLE_IN_GROUND = "RefinableInGround"
CONFIG_EXPLOSION = "ConfigExplosion"


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    path: Path
    detail: str
    witnesses: tuple = ()

    def __str__(self) -> str:
        return f"{self.kind} at {format_path(self.path)}: {self.detail}"

    def under(self, step: str) -> "Diagnostic":
        return Diagnostic(self.kind, (step,) + self.path, self.detail, self.witnesses)


@dataclass(frozen=True)
class SemResult:
    es: EventStructure | None = None
    bottom: Diagnostic | None = None

    def __post_init__(self):
        if (self.es is None) == (self.bottom is None):
            raise ValueError("exactly one of es / bottom must be set")

    @property
    def defined(self) -> bool:
        return self.es is not None


@dataclass
class _Node:
    """Cached interpretation of one subterm (paths relative to it)."""

    es: EventStructure | None
    bottom: Diagnostic | None
    configs: list | None = field(default=None)


def combine(g: GChor, left: EventStructure, right: EventStructure, cap: int,
            left_configs: list | None = None):
    """Apply the clause for the binary operator of ``g`` to its operands' semantics.

    Returns ``(es, None)`` or ``(None, diagnostic)`` with a root-relative path.
    """
    if isinstance(g, Seq):
        return ev.seq_compose(left, right, cap, left_configs), None
    if isinstance(g, Par):
        shared = set(left.labels) & set(right.labels)
        if shared:
            names = sorted(str(l) for l in shared)
            return None, Diagnostic(NOT_WELL_FORKED, (),
                                    f"parallel branches share labels {', '.join(names)}",
                                    tuple(names))
        return ev.tensor(left, right), None
    check = ev.well_branched(left, right)
    if check.ok:
        return ev.es_sum([left, right]), None
    kind = DETERMINED_CHOICE if check.failure == "determined-choice" else UNIQUE_SELECTOR
    wit = (check.participant,) if check.participant else ()
    return None, Diagnostic(kind, (), check.detail, wit)


def _interp(g: GChor, cap: int, memo: dict | None) -> _Node:
    if memo is not None:
        hit = memo.get(g)
        if hit is not None:
            return hit
    if isinstance(g, Empty):
        node = _Node(ev.EMPTY, None)
    elif isinstance(g, Interaction):
        node = _Node(ev.interaction(g.sender, g.receiver, g.msg), None)
    elif isinstance(g, Refinable):
        node = _Node(None, Diagnostic(REFINABLE_IN_GROUND, (), "refinable action has no semantics"))
    else:
        left = _interp(g.left, cap, memo)
        if left.bottom is not None:
            node = _Node(None, left.bottom.under("L"))
        else:
            right = _interp(g.right, cap, memo)
            if right.bottom is not None:
                node = _Node(None, right.bottom.under("R"))
            else:
                configs = None
                if isinstance(g, Seq):
                    if left.configs is None:
                        left.configs = ev.max_config_masks(left.es, cap)
                    configs = left.configs
                es, diag = combine(g, left.es, right.es, cap, configs)
                node = _Node(es, diag)
    if memo is not None:
        memo[g] = node
    return node


def interpret(g: GChor, cap: int = ev.DEFAULT_CAP, memo: dict | None = None) -> SemResult:
    """Semantics of ``g``: a canonical event structure, or a located diagnostic.

    Raises ``ConfigExplosion`` (carrying the subterm path) when some
    sequential composition needs more than ``cap`` maximal configurations.
    """
    for path, sub in walk(g):
        if isinstance(sub, Refinable):
            return SemResult(bottom=Diagnostic(REFINABLE_IN_GROUND, path,
                                               "refinable action has no semantics"))
    try:
        node = _interp(g, cap, memo)
    except ConfigExplosion as exc:
        raise ConfigExplosion(cap, _explosion_path(g, cap)) from exc
    if node.bottom is not None:
        return SemResult(bottom=node.bottom)
    return SemResult(es=ev.canonicalize(node.es))


def _explosion_path(g: GChor, cap: int) -> Path:
    # innermost subterm whose interpretation exceeds the cap
    found: Path = ()
    for path, sub in walk(g):
        if isinstance(sub, Seq) and len(path) >= len(found):
            try:
                _interp(sub, cap, None)
            except ConfigExplosion:
                if len(path) > len(found) or not found:
                    found = path
    return found


@dataclass(frozen=True)
class WfReport:
    well_formed: bool
    diagnostic: Diagnostic | None
    events: int | None = None
    configurations: int | None = None

    def summary(self) -> str:
        if self.well_formed:
            return (f"well-formed ({self.events} events, "
                    f"{self.configurations} maximal configurations)")
        return f"not well-formed: {self.diagnostic}"


def wf_check(g: GChor, cap: int = ev.DEFAULT_CAP) -> WfReport:
    res = interpret(g, cap)
    if res.bottom is not None:
        return WfReport(False, res.bottom)
    return WfReport(True, None, len(res.es), len(ev.max_config_masks(res.es, cap)))
