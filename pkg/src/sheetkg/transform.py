"""Tiny pure expression language for reshaping cell text before counting.

An expression is a pipeline of steps separated by ``|``. Evaluation starts
from the single-element list ``[cell_text]`` and each step maps a list of
strings to a new list of strings:

    split("/") | trim() | lower()
    regex_all("[A-Z]{2,}")
    replace("TODO", "")
    ["fixed", "list"]          constant output, ignores the input

Evaluation is side-effect free and bounded: producing more than the step
budget of elements aborts with a TransformError, which extractors turn into
a per-cell staged warning rather than a crash.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

from .errors import TransformError

STEP_BUDGET = 10_000


def _split(sep: str) -> Callable[[str], list[str]]:
    if sep == "":
        raise TransformError("split() separator must be non-empty")
    return lambda text: [piece for piece in text.split(sep) if piece != ""]


def _trim() -> Callable[[str], list[str]]:
    return lambda text: [text.strip()]


def _replace(old: str, new: str) -> Callable[[str], list[str]]:
    return lambda text: [text.replace(old, new)]


def _regex_all(pattern: str) -> Callable[[str], list[str]]:
    try:
        compiled = re.compile(pattern)
    except re.error as exc:
        raise TransformError(f"bad regex in regex_all(): {exc}") from None
    group = 1 if compiled.groups else 0
    return lambda text: [m.group(group) for m in compiled.finditer(text)
                         if m.group(group) is not None]


def _lower() -> Callable[[str], list[str]]:
    return lambda text: [text.lower()]


def _upper() -> Callable[[str], list[str]]:
    return lambda text: [text.upper()]


_FUNCTIONS: dict[str, tuple[int, Callable]] = {
    "split": (1, _split),
    "trim": (0, _trim),
    "replace": (2, _replace),
    "regex_all": (1, _regex_all),
    "lower": (0, _lower),
    "upper": (0, _upper),
}


class _Scanner:
    def __init__(self, source: str):
        self.source = source
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.source) and self.source[self.pos] in " \t\r\n":
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.source[self.pos] if self.pos < len(self.source) else ""

    def take(self, ch: str):
        if self.peek() != ch:
            raise TransformError(
                f"expected {ch!r} at position {self.pos} in transform expression")
        self.pos += 1

    def string(self) -> str:
        quote = self.peek()
        if quote not in ("'", '"'):
            raise TransformError(
                f"expected string literal at position {self.pos}")
        self.pos += 1
        out = []
        while True:
            if self.pos >= len(self.source):
                raise TransformError("unterminated string in transform expression")
            ch = self.source[self.pos]
            if ch == quote:
                self.pos += 1
                return "".join(out)
            if ch == "\\":
                self.pos += 1
                if self.pos >= len(self.source):
                    raise TransformError("dangling escape in transform expression")
                esc = self.source[self.pos]
                out.append({"n": "\n", "t": "\t", "r": "\r"}.get(esc, esc))
                self.pos += 1
            else:
                out.append(ch)
                self.pos += 1

    def name(self) -> str:
        self.skip_ws()
        start = self.pos
        while (self.pos < len(self.source) and
               (self.source[self.pos].isalnum() or self.source[self.pos] == "_")):
            self.pos += 1
        if start == self.pos:
            raise TransformError(
                f"expected function name at position {self.pos}")
        return self.source[start:self.pos]

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.source)


@dataclass(frozen=True)
class TransformExpr:
    """Compiled transform pipeline; ``apply`` maps text to a list of texts."""

    source: str
    _steps: tuple = ()

    @classmethod
    def parse(cls, source: str) -> "TransformExpr":
        scanner = _Scanner(source)
        steps = []
        while True:
            steps.append(_parse_step(scanner))
            if scanner.peek() == "|":
                scanner.take("|")
                continue
            break
        if not scanner.at_end():
            raise TransformError(
                f"unexpected trailing content at position {scanner.pos} "
                f"in transform expression")
        return cls(source, tuple(steps))

    def apply(self, text: str) -> list[str]:
        values = [text]
        produced = 0
        for step in self._steps:
            next_values: list[str] = []
            if isinstance(step, tuple) and step[0] == "const":
                next_values = list(step[1])
                produced += len(next_values)
            else:
                for value in values:
                    out = step(value)
                    produced += len(out)
                    next_values.extend(out)
            if produced > STEP_BUDGET:
                raise TransformError(
                    f"transform exceeded the step budget of {STEP_BUDGET}")
            values = next_values
        return values


def _parse_step(scanner: _Scanner):
    if scanner.peek() == "[":
        scanner.take("[")
        items: list[str] = []
        if scanner.peek() != "]":
            items.append(scanner.string())
            while scanner.peek() == ",":
                scanner.take(",")
                items.append(scanner.string())
        scanner.take("]")
        return ("const", tuple(items))
    name = scanner.name()
    if name not in _FUNCTIONS:
        known = ", ".join(sorted(_FUNCTIONS))
        raise TransformError(f"unknown transform function {name!r} "
                             f"(available: {known})")
    arity, factory = _FUNCTIONS[name]
    scanner.take("(")
    args: list[str] = []
    if scanner.peek() != ")":
        args.append(scanner.string())
        while scanner.peek() == ",":
            scanner.take(",")
            args.append(scanner.string())
    scanner.take(")")
    if len(args) != arity:
        raise TransformError(
            f"{name}() takes {arity} argument(s), got {len(args)}")
    return factory(*args)
