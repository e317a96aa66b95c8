"""Global choreographies: parsing, event-structure semantics, typing and refinement."""

from chorc.events import EventStructure, Label, es_isomorphic, max_configurations, project
from chorc.refine import Binding, refine_and_check, refines, substitute
from chorc.semantics import interpret, wf_check
from chorc.syntax import parse, pretty
from chorc.typecheck import ChorType, ChorTypeError, RefContext, type_of

__all__ = [
    "Binding", "ChorType", "ChorTypeError", "EventStructure", "Label", "RefContext",
    "es_isomorphic", "interpret", "max_configurations", "parse", "pretty", "project",
    "refine_and_check", "refines", "substitute", "type_of", "wf_check",
]

__version__ = "0.1.0"
