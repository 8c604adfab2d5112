"""Parenthesized fact statements: parsing, emission, and normalization.

The grammar is one statement per fact, `kind(arg1, arg2, ...).`, where each
argument is a bare integer or a double-quoted string.  Statements may span
lines.  Quoted strings are raw: a backslash is an ordinary character and the
string simply runs to the next double quote, so Windows paths such as
"C:\\Users\\UserA\\Desktop\\" need no escaping (and embedded quotes are not
representable).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .errors import InputError
from .intervals import Timestamp
from .kb import (
    EventEntity,
    KnowledgeBase,
    ObjectEntity,
    RelationEdge,
    SubjectEntity,
)

Arg = Union[int, str, Timestamp]

# Attribute emission order for case-style entity facts; attributes outside
# these lists follow in sorted-name order.
OBJECT_FACT_FIELDS = ("pageID", "title", "url", "hostname")
SUBJECT_FACT_FIELDS = ("session",)

_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_BODY = _IDENT_START | set("0123456789")


@dataclass(frozen=True)
class FactStatement:
    kind: str
    args: tuple[Arg, ...]
    line: int = 0

    def canonical(self) -> str:
        return format_fact(self.kind, self.args)


def format_value(value: Arg) -> str:
    if isinstance(value, bool):
        raise InputError(f"boolean {value!r} has no fact representation")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Timestamp):
        return f'"{value.isoformat()}"'
    if isinstance(value, str):
        if '"' in value:
            raise InputError(f"fact strings cannot contain a double quote: {value!r}")
        return f'"{value}"'
    raise InputError(f"value {value!r} has no fact representation")


def format_fact(kind: str, args: Iterable[Arg]) -> str:
    return f"{kind}({', '.join(format_value(a) for a in args)})."


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1

    def eof(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos]

    def advance(self) -> str:
        ch = self.text[self.pos]
        self.pos += 1
        if ch == "\n":
            self.line += 1
        return ch

    def skip_ws(self) -> None:
        while not self.eof() and self.peek() in " \t\r\n":
            self.advance()

    def expect(self, ch: str) -> None:
        if self.eof() or self.peek() != ch:
            found = "end of input" if self.eof() else repr(self.peek())
            raise InputError(f"line {self.line}: expected {ch!r}, found {found}")
        self.advance()

    def identifier(self) -> str:
        if self.eof() or self.peek() not in _IDENT_START:
            found = "end of input" if self.eof() else repr(self.peek())
            raise InputError(f"line {self.line}: expected a fact name, found {found}")
        chars = [self.advance()]
        while not self.eof() and self.peek() in _IDENT_BODY:
            chars.append(self.advance())
        return "".join(chars)

    def string(self) -> str:
        self.expect('"')
        start_line = self.line
        chars = []
        while True:
            if self.eof():
                raise InputError(f"line {start_line}: unterminated string")
            ch = self.advance()
            if ch == '"':
                return "".join(chars)
            chars.append(ch)

    def integer(self) -> int:
        chars = []
        if not self.eof() and self.peek() == "-":
            chars.append(self.advance())
        while not self.eof() and self.peek().isdigit():
            chars.append(self.advance())
        if not chars or chars == ["-"]:
            found = "end of input" if self.eof() else repr(self.peek())
            raise InputError(f"line {self.line}: expected an integer, found {found}")
        return int("".join(chars))

    def argument(self) -> Arg:
        if self.eof():
            raise InputError(f"line {self.line}: expected an argument, found end of input")
        if self.peek() == '"':
            return self.string()
        return self.integer()


def parse_facts(text: str) -> list[FactStatement]:
    """Parse every statement in the text, in order of appearance."""
    scanner = _Scanner(text)
    statements = []
    while True:
        scanner.skip_ws()
        if scanner.eof():
            return statements
        line = scanner.line
        kind = scanner.identifier()
        scanner.skip_ws()
        scanner.expect("(")
        args: list[Arg] = []
        scanner.skip_ws()
        if not scanner.eof() and scanner.peek() != ")":
            while True:
                args.append(scanner.argument())
                scanner.skip_ws()
                if scanner.eof() or scanner.peek() != ",":
                    break
                scanner.advance()
                scanner.skip_ws()
        scanner.expect(")")
        scanner.skip_ws()
        scanner.expect(".")
        statements.append(FactStatement(kind, tuple(args), line))


def normalize(text: str) -> list[str]:
    """Canonical one-line rendering of every statement in the text."""
    return [st.canonical() for st in parse_facts(text)]


def _attribute_args(attributes: dict, preferred: Sequence[str]) -> list[Arg]:
    order = [f for f in preferred if f in attributes]
    order += [f for f in sorted(attributes) if f not in preferred]
    return [attributes[f] for f in order]


def subject_fact(subject: SubjectEntity, fields: Sequence[str] = SUBJECT_FACT_FIELDS) -> str:
    return format_fact("subject", [subject.id, *_attribute_args(subject.attributes, fields)])


def object_fact(obj: ObjectEntity, fields: Sequence[str] = OBJECT_FACT_FIELDS) -> str:
    return format_fact("object", [obj.id, *_attribute_args(obj.attributes, fields)])


def event_fact(event: EventEntity) -> str:
    return format_fact(
        "event",
        [event.id, event.interval.t_start, event.interval.t_end, event.location],
    )


def edge_fact(edge: RelationEdge) -> str:
    return format_fact(edge.relation.value, [edge.source_id, edge.target_id])


def participation_fact(subject_id: int, event_id: int) -> str:
    return format_fact("participation", [subject_id, event_id])


def footprint_fact(kind: str, args: Iterable[Arg]) -> str:
    return format_fact(kind, args)


def kb_to_facts(
    kb: KnowledgeBase,
    object_fields: Sequence[str] = OBJECT_FACT_FIELDS,
    subject_fields: Sequence[str] = SUBJECT_FACT_FIELDS,
) -> list[str]:
    """Entity and edge facts of the knowledge base (footprints excluded).

    Ordering is deterministic: subjects, objects, events by id, then edges
    by (relation, source, target).
    """
    out = []
    for _, subject in sorted(kb.subjects.items()):
        out.append(subject_fact(subject, subject_fields))
    for _, obj in sorted(kb.objects.items()):
        out.append(object_fact(obj, object_fields))
    for _, event in sorted(kb.events.items()):
        out.append(event_fact(event))
    for edge in sorted(kb.edges, key=lambda e: (e.relation.value, e.source_id, e.target_id)):
        out.append(edge_fact(edge))
    return out


def fact_set(facts: Iterable[str]) -> frozenset[str]:
    """Normalized set of facts for order-insensitive comparison."""
    out = set()
    for text in facts:
        out.update(normalize(text))
    return frozenset(out)
