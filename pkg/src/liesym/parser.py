"""Recursive-descent parser for the expression grammar.

    expr   := term (('+'|'-') term)*
    term   := unary (('*'|'/') unary)*
    unary  := ('+'|'-') unary | factor
    factor := base (('^'|'**') ['-'] integer)?
    base   := integer | identifier | 'df' '(' identifier (',' identifier (',' integer)?)* ')'
            | fname '(' expr ')' | '(' expr ')'

Identifiers are resolved through a :class:`SymbolTable`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, FrozenSet, List, Mapping, Optional, Tuple

from .expr import UNARY_FUNCTIONS, Expression, ExpressionError

RESERVED = frozenset({"df", "epsilon", *UNARY_FUNCTIONS})
_PARAM = re.compile(r"^[kf]_\d+$")


class ParseError(ExpressionError):
    def __init__(self, message: str, text: str = "", pos: int = -1):
        if pos >= 0:
            message = f"{message} at position {pos}: {text!r}"
        super().__init__(message)
        self.pos = pos


@dataclass(frozen=True)
class SymbolTable:
    """Identifiers known to the parser.

    ``coordinates`` are plain symbols (independent variables, dependent
    variables, jet coordinates); ``constants`` are symbolic constants;
    ``functions`` maps kernel names to their dependency lists;
    ``tokens`` maps extra spellings (``u_xt``, ``f_u_t``) to expressions.
    """

    coordinates: FrozenSet[str] = frozenset()
    constants: FrozenSet[str] = frozenset()
    functions: Mapping[str, Tuple[str, ...]] = field(default_factory=dict)
    tokens: Mapping[str, Expression] = field(default_factory=dict)
    resolver: Optional[Callable[[str], Optional[Expression]]] = None
    allow_parameters: bool = True

    def with_functions(self, extra: Mapping[str, Tuple[str, ...]]) -> "SymbolTable":
        merged = dict(self.functions)
        for name, deps in extra.items():
            if name in merged and tuple(merged[name]) != tuple(deps):
                raise ExpressionError(f"dependency list of {name} is already registered")
            merged[name] = tuple(deps)
        return SymbolTable(
            self.coordinates, self.constants, merged, self.tokens, self.resolver, self.allow_parameters
        )

    def with_constants(self, names) -> "SymbolTable":
        return SymbolTable(
            self.coordinates,
            self.constants | frozenset(names),
            self.functions,
            self.tokens,
            self.resolver,
            self.allow_parameters,
        )

    def resolve(self, name: str) -> Optional[Expression]:
        if name in self.functions:
            return Expression.kernel(name, self.functions[name])
        if name in self.coordinates or name in self.constants or name == "epsilon":
            return Expression.symbol(name)
        if name in self.tokens:
            return self.tokens[name]
        if self.resolver is not None:
            hit = self.resolver(name)
            if hit is not None:
                return hit
        if self.allow_parameters and _PARAM.match(name) and name.startswith("k_"):
            return Expression.symbol(name)
        return None


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>\*\*|[-+*/^(),]))"
)


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    toks = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError("unexpected character", text, pos)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), start))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, symbols: SymbolTable):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.symbols = symbols

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value:
            raise ParseError(f"expected {value!r}, found {val or 'end of input'!r}", self.text, pos)

    def parse(self) -> Expression:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {val!r}", self.text, pos)
        return e

    def expr(self) -> Expression:
        e = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self) -> Expression:
        e = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            if op == "*":
                e = e * rhs
            else:
                if rhs.is_zero():
                    raise ParseError("division by zero", self.text, self.toks[self.i - 1][2])
                e = e / rhs
        return e

    def unary(self) -> Expression:
        if self.peek()[1] == "-":
            self.take()
            return -self.unary()
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.factor()

    def factor(self) -> Expression:
        base = self.base()
        if self.peek()[1] in ("^", "**"):
            self.take()
            sign = 1
            if self.peek()[1] == "-":
                self.take()
                sign = -1
            kind, val, pos = self.take()
            if kind != "num":
                raise ParseError("expected an integer exponent", self.text, pos)
            n = sign * int(val)
            if n < 0 and base.is_zero():
                raise ParseError("negative power of zero", self.text, pos)
            return base ** n
        return base

    def base(self) -> Expression:
        kind, val, pos = self.take()
        if kind == "num":
            return Expression.const(int(val))
        if val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind != "id":
            raise ParseError(f"unexpected {val or 'end of input'!r}", self.text, pos)
        if val == "df" and self.peek()[1] == "(":
            return self.derivative(pos)
        if val in UNARY_FUNCTIONS and self.peek()[1] == "(":
            self.take()
            arg = self.expr()
            self.expect(")")
            return Expression.apply(val, arg)
        hit = self.symbols.resolve(val)
        if hit is None:
            raise ParseError(f"unknown identifier {val!r}", self.text, pos)
        return hit

    def derivative(self, pos: int) -> Expression:
        self.expect("(")
        kind, name, npos = self.take()
        if kind != "id":
            raise ParseError("df expects a function name", self.text, npos)
        deps = self.symbols.functions.get(name)
        if deps is None:
            raise ParseError(f"{name!r} has no declared dependencies", self.text, npos)
        derivs: List[str] = []
        while self.peek()[1] == ",":
            self.take()
            kind, var, vpos = self.take()
            if kind != "id":
                raise ParseError("expected a variable name", self.text, vpos)
            if var not in deps:
                raise ParseError(f"{name} does not depend on {var}", self.text, vpos)
            count = 1
            if self.peek()[1] == "," and self.toks[self.i + 1][0] == "num":
                self.take()
                count = int(self.take()[1])
            derivs.extend([var] * count)
        self.expect(")")
        return Expression.kernel(name, deps, derivs)


def parse(text: str, symbols: Optional[SymbolTable] = None) -> Expression:
    """Parse ``text`` into a canonical :class:`Expression`."""
    return _Parser(text, symbols or SymbolTable()).parse()


def split_top_level(text: str, sep: str = ",") -> List[str]:
    """Split on ``sep`` outside parentheses/braces."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    tail = "".join(cur).strip()
    if tail or parts:
        parts.append(tail)
    return [p for p in parts if p != ""]
