"""Formulas, statements and definition sets.

Everything downstream (length measures, the machine verifier, the debate
protocol) works on the canonical JSON serialization defined here: objects are
dumped with sorted keys and no whitespace, so equal values always produce
byte-identical documents and content hashes are stable across processes.

Formula JSON shapes (single-key objects, hence injective):

    {"atom": "p"}          free propositional atom, always in scope
    {"sym": "zeta"}        named symbol, must be declared by a definition set
    {"not": f}             negation
    {"and": [f, g]}        conjunction
    {"or":  [f, g]}        disjunction
    {"imp": [f, g]}        implication
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Any, Iterator

__all__ = [
    "ParseError",
    "Formula",
    "atom",
    "sym",
    "neg",
    "conj",
    "disj",
    "impl",
    "Statement",
    "DefinitionSet",
    "canonical_json",
    "content_hash",
]

_BINARY = ("and", "or", "imp")
_UNARY = ("not",)
_LEAF = ("atom", "sym")


class ParseError(ValueError):
    """A document does not decode to a well-formed object."""


def canonical_json(value: Any) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def content_hash(value: Any) -> str:
    """Hex sha256 of the canonical serialization of a JSON-ready value."""
    return hashlib.sha256(canonical_json(value).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Formula:
    op: str
    name: str | None = None
    args: tuple["Formula", ...] = ()

    def __post_init__(self) -> None:
        if self.op in _LEAF:
            if not isinstance(self.name, str) or not self.name or self.args:
                raise ParseError(f"{self.op} formula needs a name and no arguments")
        elif self.op in _UNARY:
            if self.name is not None or len(self.args) != 1:
                raise ParseError(f"{self.op} takes exactly one argument")
        elif self.op in _BINARY:
            if self.name is not None or len(self.args) != 2:
                raise ParseError(f"{self.op} takes exactly two arguments")
        else:
            raise ParseError(f"unknown connective {self.op!r}")

    def to_json(self) -> Any:
        if self.op in _LEAF:
            return {self.op: self.name}
        if self.op in _UNARY:
            return {self.op: self.args[0].to_json()}
        return {self.op: [a.to_json() for a in self.args]}

    @staticmethod
    def from_json(doc: Any) -> "Formula":
        if not isinstance(doc, dict) or len(doc) != 1:
            raise ParseError(f"formula must be a single-key object, got {doc!r}")
        op, body = next(iter(doc.items()))
        if op in _LEAF:
            if not isinstance(body, str):
                raise ParseError(f"{op} name must be a string")
            return Formula(op, body)
        if op in _UNARY:
            return Formula(op, args=(Formula.from_json(body),))
        if op in _BINARY:
            if not isinstance(body, list) or len(body) != 2:
                raise ParseError(f"{op} takes a two-element array")
            return Formula(op, args=(Formula.from_json(body[0]), Formula.from_json(body[1])))
        raise ParseError(f"unknown connective {op!r}")

    def tokens(self) -> Iterator[str]:
        """Prefix-order token stream: one token per connective or leaf name."""
        stack = [self]
        while stack:
            f = stack.pop()
            if f.op in _LEAF:
                yield f.name  # type: ignore[misc]
            else:
                yield f.op
                stack.extend(reversed(f.args))

    def symbols(self) -> Iterator[str]:
        """Names of every `sym` leaf (declaration-requiring references)."""
        stack = [self]
        while stack:
            f = stack.pop()
            if f.op == "sym":
                yield f.name  # type: ignore[misc]
            else:
                stack.extend(f.args)

    def canonical(self) -> str:
        return canonical_json(self.to_json())

    def __str__(self) -> str:
        if self.op in _LEAF:
            return self.name  # type: ignore[return-value]
        if self.op == "not":
            return f"~{self.args[0]}"
        glyph = {"and": "&", "or": "|", "imp": "->"}[self.op]
        return f"({self.args[0]} {glyph} {self.args[1]})"


def atom(name: str) -> Formula:
    return Formula("atom", name)


def sym(name: str) -> Formula:
    return Formula("sym", name)


def neg(f: Formula) -> Formula:
    return Formula("not", args=(f,))


def conj(a: Formula, b: Formula) -> Formula:
    return Formula("and", args=(a, b))


def disj(a: Formula, b: Formula) -> Formula:
    return Formula("or", args=(a, b))


def impl(a: Formula, b: Formula) -> Formula:
    return Formula("imp", args=(a, b))


@dataclass(frozen=True)
class Statement:
    """What a claim asserts: under `context`, `assumptions` entail `conclusion`.

    The context is an opaque label (a theory or library name); it scopes which
    defined symbols are in play but carries no logical content of its own.
    Assumptions are a set, serialized in canonical formula order.
    """

    conclusion: Formula
    assumptions: frozenset[Formula] = frozenset()
    context: str = ""

    def sorted_assumptions(self) -> tuple[Formula, ...]:
        return tuple(sorted(self.assumptions, key=Formula.canonical))

    def tokens(self) -> Iterator[str]:
        for f in self.sorted_assumptions():
            yield from f.tokens()
        yield from self.conclusion.tokens()

    def symbols(self) -> Iterator[str]:
        for f in self.sorted_assumptions():
            yield from f.symbols()
        yield from self.conclusion.symbols()

    def to_json(self) -> Any:
        doc: dict[str, Any] = {
            "assumptions": [f.to_json() for f in self.sorted_assumptions()],
            "conclusion": self.conclusion.to_json(),
        }
        if self.context:
            doc["context"] = self.context
        return doc

    @staticmethod
    def from_json(doc: Any) -> "Statement":
        if not isinstance(doc, dict):
            raise ParseError("statement must be an object")
        unknown = set(doc) - {"assumptions", "conclusion", "context"}
        if unknown:
            raise ParseError(f"unknown statement fields {sorted(unknown)}")
        if "conclusion" not in doc:
            raise ParseError("statement needs a conclusion")
        raw = doc.get("assumptions", [])
        if not isinstance(raw, list):
            raise ParseError("assumptions must be an array")
        context = doc.get("context", "")
        if not isinstance(context, str):
            raise ParseError("context must be a string")
        return Statement(
            conclusion=Formula.from_json(doc["conclusion"]),
            assumptions=frozenset(Formula.from_json(f) for f in raw),
            context=context,
        )

    def hash(self) -> str:
        return content_hash(self.to_json())


@dataclass(frozen=True)
class DefinitionSet:
    """Named symbols introduced by a proof, plus imported context labels.

    `symbols` maps each introduced name to its defining formula (order
    preserved for serialization; names must be unique). `imports` lists
    context labels whose symbols are assumed in scope.
    """

    symbols: tuple[tuple[str, Formula], ...] = ()
    imports: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for name, _ in self.symbols:
            if name in seen:
                raise ParseError(f"duplicate symbol {name!r}")
            seen.add(name)

    def names(self) -> frozenset[str]:
        return frozenset(name for name, _ in self.symbols)

    def tokens(self) -> Iterator[str]:
        for label in self.imports:
            yield label
        for name, f in self.symbols:
            yield name
            yield from f.tokens()

    def to_json(self) -> Any:
        return {
            "imports": list(self.imports),
            "symbols": [[name, f.to_json()] for name, f in self.symbols],
        }

    @staticmethod
    def from_json(doc: Any) -> "DefinitionSet":
        if not isinstance(doc, dict):
            raise ParseError("definition set must be an object")
        unknown = set(doc) - {"imports", "symbols"}
        if unknown:
            raise ParseError(f"unknown definition fields {sorted(unknown)}")
        imports = doc.get("imports", [])
        raw = doc.get("symbols", [])
        if not isinstance(imports, list) or not all(isinstance(x, str) for x in imports):
            raise ParseError("imports must be an array of strings")
        if not isinstance(raw, list):
            raise ParseError("symbols must be an array")
        pairs = []
        for entry in raw:
            if not isinstance(entry, list) or len(entry) != 2 or not isinstance(entry[0], str):
                raise ParseError("each symbol entry must be [name, formula]")
            pairs.append((entry[0], Formula.from_json(entry[1])))
        return DefinitionSet(symbols=tuple(pairs), imports=tuple(imports))
