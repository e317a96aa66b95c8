"""Abstract syntax, parser and pretty-printer for (refinable) g-choreographies.

Concrete syntax::

    G ::= "0"
        | A "->" B ":" m
        | A "~>" "{" m ":" B ("," m ":" B)* "}" ("as" tag)?
        | G ";" G | G "|" G | G "+" G
        | "(" G ")"

``;`` binds tighter than ``|``, which binds tighter than ``+``; all three
are left-associative.  ``#`` starts a comment running to the end of line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*")

Participant = str
Message = str
Path = tuple  # of "L" / "R" steps from the root


@dataclass(frozen=True, slots=True)
class Empty:
    pass


@dataclass(frozen=True, slots=True)
class Interaction:
    sender: Participant
    receiver: Participant
    msg: Message


@dataclass(frozen=True, slots=True)
class Seq:
    left: "GChor"
    right: "GChor"


@dataclass(frozen=True, slots=True)
class Par:
    left: "GChor"
    right: "GChor"


@dataclass(frozen=True, slots=True)
class Choice:
    left: "GChor"
    right: "GChor"


@dataclass(frozen=True, slots=True)
class Refinable:
    """``initiator ~> {m1 : B1, ..., mn : Bn}``, optionally named by ``tag``."""

    initiator: Participant
    targets: tuple  # of (msg, dest) pairs, nonempty, dests pairwise distinct
    tag: str | None = None

    @property
    def dests(self) -> tuple:
        return tuple(dest for _, dest in self.targets)


GChor = Union[Empty, Interaction, Seq, Par, Choice, Refinable]
BINARY = (Seq, Par, Choice)

_PREC = {Choice: 1, Par: 2, Seq: 3}
_SYMBOL = {Seq: ";", Par: "|", Choice: "+"}


class ParseError(Exception):
    """Syntax or well-formedness error in choreography source text."""

    def __init__(self, message: str, line: int, column: int, expected=()):
        self.message = message
        self.line = line
        self.column = column
        self.expected = tuple(sorted(set(expected)))
        text = f"{line}:{column}: {message}"
        if self.expected:
            text += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(text)


# ---------------------------------------------------------------- lexing

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<arrow>->)
  | (?P<squiggle>~>)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<zero>0(?![A-Za-z0-9_]))
  | (?P<punct>[:;|+(){},!?])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # "ident", "eof", or the literal text of a symbol
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind != "ws":
            tok_kind = "ident" if kind == "ident" else m.group()
            tokens.append(Token(tok_kind, m.group(), line, pos - line_start + 1))
        for i, ch in enumerate(m.group()):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


def _describe(kind: str) -> str:
    return {"ident": "identifier", "eof": "end of input"}.get(kind, repr(kind))


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.tags: dict[str, Token] = {}
        self.refinables: list[tuple[Refinable, Token]] = []

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def fail(self, expected, tok: Token | None = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(f"unexpected {found}", tok.line, tok.column,
                         [_describe(k) for k in expected])

    def expect(self, kind: str) -> Token:
        tok = self.tok
        if tok.kind != kind:
            self.fail([kind])
        self.pos += 1
        return tok

    def at(self, kind: str) -> bool:
        return self.tok.kind == kind

    def parse_top(self) -> GChor:
        g = self.parse_expr(1)
        if not self.at("eof"):
            self.fail(["eof", ";", "|", "+"])
        self.check_auto_names()
        return g

    def parse_expr(self, min_prec: int) -> GChor:
        left = self.parse_atom()
        while True:
            op = {";": Seq, "|": Par, "+": Choice}.get(self.tok.kind)
            if op is None or _PREC[op] < min_prec:
                return left
            self.pos += 1
            right = self.parse_expr(_PREC[op] + 1)
            left = op(left, right)

    def parse_atom(self) -> GChor:
        tok = self.tok
        if tok.kind == "0":
            self.pos += 1
            return Empty()
        if tok.kind == "(":
            self.pos += 1
            g = self.parse_expr(1)
            self.expect(")")
            return g
        if tok.kind != "ident":
            self.fail(["0", "(", "ident"])
        self.pos += 1
        if self.at("->"):
            self.pos += 1
            receiver = self.expect("ident")
            self.expect(":")
            msg = self.expect("ident").text
            if receiver.text == tok.text:
                raise ParseError(f"sender and receiver coincide ({tok.text})",
                                 receiver.line, receiver.column)
            return Interaction(tok.text, receiver.text, msg)
        if self.at("~>"):
            self.pos += 1
            return self.parse_refinable(tok)
        self.fail(["->", "~>"])

    def parse_refinable(self, initiator: Token) -> Refinable:
        self.expect("{")
        targets = []
        seen = {}
        while True:
            msg = self.expect("ident").text
            self.expect(":")
            dest = self.expect("ident")
            if dest.text in seen:
                raise ParseError(f"duplicate destination {dest.text} in refinable action",
                                 dest.line, dest.column)
            if dest.text == initiator.text:
                raise ParseError(f"initiator {dest.text} listed among its own destinations",
                                 dest.line, dest.column)
            seen[dest.text] = dest
            targets.append((msg, dest.text))
            if self.at("}"):
                self.pos += 1
                break
            if not self.at(","):
                self.fail([",", "}"])
            self.pos += 1
        tag = None
        if self.at("ident") and self.tok.text == "as":
            self.pos += 1
            tag_tok = self.expect("ident")
            tag = tag_tok.text
            if tag in self.tags:
                raise ParseError(f"duplicate tag {tag}", tag_tok.line, tag_tok.column)
            self.tags[tag] = tag_tok
        r = Refinable(initiator.text, tuple(targets), tag)
        self.refinables.append((r, initiator))
        return r

    def check_auto_names(self):
        # an explicit tag must not shadow the automatic name of another occurrence
        for i, (r, tok) in enumerate(self.refinables, start=1):
            auto = f"r{i}"
            if r.tag is None and auto in self.tags:
                clash = self.tags[auto]
                raise ParseError(f"tag {auto} clashes with the automatic name of occurrence {i}",
                                 clash.line, clash.column)


def parse(text: str) -> GChor:
    """Parse choreography source text into an AST."""
    return _Parser(text).parse_top()


def parse_label_tokens(tokens: list[Token]):
    """Split a label token run into (sender, receiver, polarity, msg).

    Accepts ``AB!m`` (single-letter participants written together) and
    ``Alice Bob!m``.
    """
    kinds = [t.kind for t in tokens]
    if kinds == ["ident", "!", "ident", "eof"] or kinds == ["ident", "?", "ident", "eof"]:
        pair = tokens[0].text
        if len(pair) != 2:
            raise ParseError(f"cannot split {pair!r} into sender and receiver; "
                             "separate multi-letter names with a space",
                             tokens[0].line, tokens[0].column)
        return pair[0], pair[1], tokens[1].kind, tokens[2].text
    if kinds in (["ident", "ident", "!", "ident", "eof"], ["ident", "ident", "?", "ident", "eof"]):
        return tokens[0].text, tokens[1].text, tokens[2].kind, tokens[3].text
    bad = next((t for t, k in zip(tokens, kinds) if k not in ("ident", "!", "?")), tokens[-1])
    raise ParseError("malformed label", bad.line, bad.column, ["identifier", "'!'", "'?'"])


def parse_refinable(text: str) -> Refinable:
    """Parse a single refinable action such as ``A ~> {m : B, n : C}``."""
    g = parse(text)
    if not isinstance(g, Refinable):
        raise ParseError("expected a refinable action", 1, 1, ["'~>'"])
    return g


# ---------------------------------------------------------- pretty-printing

def _prec(g: GChor) -> int:
    return _PREC.get(type(g), 4)


def pretty(g: GChor) -> str:
    """Render with the minimal parentheses needed to parse back to ``g``."""
    if isinstance(g, Empty):
        return "0"
    if isinstance(g, Interaction):
        return f"{g.sender} -> {g.receiver} : {g.msg}"
    if isinstance(g, Refinable):
        body = ", ".join(f"{m} : {b}" for m, b in g.targets)
        tag = f" as {g.tag}" if g.tag is not None else ""
        return f"{g.initiator} ~> {{{body}}}{tag}"
    p = _PREC[type(g)]
    left = pretty(g.left)
    if _prec(g.left) < p:
        left = f"({left})"
    right = pretty(g.right)
    if _prec(g.right) <= p:
        right = f"({right})"
    return f"{left} {_SYMBOL[type(g)]} {right}"


# --------------------------------------------------------- structural queries

def participants(g: GChor) -> frozenset:
    if isinstance(g, Empty):
        return frozenset()
    if isinstance(g, Interaction):
        return frozenset((g.sender, g.receiver))
    if isinstance(g, Refinable):
        return frozenset((g.initiator, *g.dests))
    return participants(g.left) | participants(g.right)


def is_ground(g: GChor) -> bool:
    if isinstance(g, Refinable):
        return False
    if isinstance(g, BINARY):
        return is_ground(g.left) and is_ground(g.right)
    return True


def walk(g: GChor, path: Path = ()) -> Iterator[tuple[Path, GChor]]:
    """Left-to-right preorder traversal yielding (path, subterm)."""
    yield path, g
    if isinstance(g, BINARY):
        yield from walk(g.left, path + ("L",))
        yield from walk(g.right, path + ("R",))


def subterm_at(g: GChor, path: Path) -> GChor:
    for step in path:
        if not isinstance(g, BINARY):
            raise KeyError(f"path {format_path(path)} leaves the term")
        g = g.left if step == "L" else g.right
    return g


def format_path(path: Path) -> str:
    return "/" + "/".join(path) if path else "/"


def refinable_occurrences(g: GChor) -> list[tuple[str, Refinable]]:
    """Refinable actions in preorder; untagged ones are named ``r<position>``."""
    out = []
    for _, sub in walk(g):
        if isinstance(sub, Refinable):
            out.append((sub.tag or f"r{len(out) + 1}", sub))
    return out


def refinable_paths(g: GChor) -> list[tuple[str, Path, Refinable]]:
    out = []
    for path, sub in walk(g):
        if isinstance(sub, Refinable):
            out.append((sub.tag or f"r{len(out) + 1}", path, sub))
    return out


def leaf_count(g: GChor) -> int:
    if isinstance(g, (Interaction, Refinable)):
        return 1
    if isinstance(g, BINARY):
        return leaf_count(g.left) + leaf_count(g.right)
    return 0
