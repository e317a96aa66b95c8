"""DOT and JSON renderings with byte-stable output."""

from __future__ import annotations

import json
from typing import Iterable, Mapping

from chorc.events import EventStructure, Label, bits, canonicalize, parse_label
from chorc.syntax import GChor, Interaction, Refinable, walk
from chorc.typecheck import ChorType, RefContext


def minimal_conflicts(es: EventStructure) -> list[tuple[int, int]]:
    """Conflicting pairs not inherited from a conflict between predecessors."""
    out = []
    for e in es.events:
        for f in bits(es.conflicts[e]):
            if e < f and not (es.preds[e] & es.conflicts[f]) and not (es.preds[f] & es.conflicts[e]):
                out.append((e, f))
    return out


def dot_export(es: EventStructure, name: str = "es") -> str:
    """Graphviz digraph: immediate causality solid, minimal conflicts dashed."""
    es = canonicalize(es)
    lines = [f"digraph {name} {{", "  node [shape=plaintext];"]
    for e, lab in enumerate(es.labels):
        lines.append(f'  e{e} [label="{lab}"];')
    for e, f in sorted(es.cause):
        lines.append(f"  e{e} -> e{f};")
    for e, f in minimal_conflicts(es):
        lines.append(f"  e{e} -> e{f} [style=dashed, dir=none, constraint=false];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def label_order(g: GChor) -> dict:
    """Position of each label's first occurrence in ``g`` (output before input)."""
    order: dict = {}

    def add(label: Label):
        order.setdefault(label, len(order))

    for _, sub in walk(g):
        if isinstance(sub, Interaction):
            add(Label(sub.sender, sub.receiver, "!", sub.msg))
            add(Label(sub.sender, sub.receiver, "?", sub.msg))
        elif isinstance(sub, Refinable):
            for m, b in sub.targets:
                add(Label(sub.initiator, b, "!", m))
                add(Label(sub.initiator, b, "?", m))
    return order


def sorted_labels(labels: Iterable[Label], order: Mapping | None = None) -> list[str]:
    order = order or {}
    return [str(l) for l in sorted(labels, key=lambda l: (order.get(l, len(order)), tuple(l)))]


def type_json(t: ChorType, order: Mapping | None = None) -> dict:
    return {"pi": sorted(t.pi), "first": sorted_labels(t.first, order),
            "last": sorted_labels(t.last, order)}


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def load_contexts(data: Mapping) -> dict:
    """Decode a context file: ``{tag: {"pi": [...], "first": [...], "last": [...]}}``."""
    out = {}
    for tag, entry in data.items():
        if not isinstance(entry, Mapping) or set(entry) != {"pi", "first", "last"}:
            raise ValueError(f"context {tag!r} must have exactly the keys pi, first, last")
        out[tag] = RefContext(frozenset(entry["pi"]),
                              frozenset(parse_label(s) for s in entry["first"]),
                              frozenset(parse_label(s) for s in entry["last"]))
    return out
