"""Small comparison grammar for vertex and edge filters.

    expr    := term ('or' term)*
    term    := factor ('and' factor)*
    factor  := 'not' factor | '(' expr ')' | 'true' | 'false' | compare
    compare := NAME [OP literal | 'contains' literal]

Evaluation is three-valued: a comparison against a missing attribute, or
between incomparable types, is unknown. Unknown collapses to ``False`` only
at the top, so ``not (age > 3)`` is also false for a vertex without ``age``.
"""

from __future__ import annotations

import operator
import re

from .errors import ConfigError, UnknownAttributeError
from .graph import parse_value

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<op><=|>=|==|!=|<|>|=)
      | (?P<lp>\()
      | (?P<rp>\))
      | (?P<str>"[^"]*"|'[^']*')
      | (?P<word>[^\s()<>=!"']+)
    )""",
    re.VERBOSE,
)

_OPS = {
    "==": operator.eq,
    "=": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}

_KEYWORDS = {"and", "or", "not", "true", "false", "contains"}


def _tokenize(text):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ConfigError(f"cannot parse predicate {text!r} at offset {pos}")
        pos = m.end()
        kind = m.lastgroup
        val = m.group(kind)
        if kind == "word" and val.lower() in _KEYWORDS:
            kind, val = "kw", val.lower()
        out.append((kind, val))
    return out


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.names = set()

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def fail(self, what):
        raise ConfigError(f"predicate {self.text!r}: {what}")

    def parse(self):
        if not self.toks:
            return lambda rec: True
        node = self.expr()
        if self.i != len(self.toks):
            self.fail(f"unexpected token {self.peek()[1]!r}")
        return node

    def expr(self):
        parts = [self.term()]
        while self.peek() == ("kw", "or"):
            self.take()
            parts.append(self.term())
        if len(parts) == 1:
            return parts[0]

        def _or(rec):
            unknown = False
            for p in parts:
                r = p(rec)
                if r is True:
                    return True
                if r is None:
                    unknown = True
            return None if unknown else False

        return _or

    def term(self):
        parts = [self.factor()]
        while self.peek() == ("kw", "and"):
            self.take()
            parts.append(self.factor())
        if len(parts) == 1:
            return parts[0]

        def _and(rec):
            unknown = False
            for p in parts:
                r = p(rec)
                if r is False:
                    return False
                if r is None:
                    unknown = True
            return None if unknown else True

        return _and

    def factor(self):
        kind, val = self.peek()
        if (kind, val) == ("kw", "not"):
            self.take()
            inner = self.factor()

            def _not(rec):
                r = inner(rec)
                return None if r is None else not r

            return _not
        if kind == "lp":
            self.take()
            node = self.expr()
            if self.take()[0] != "rp":
                self.fail("missing ')'")
            return node
        if (kind, val) == ("kw", "true"):
            self.take()
            return lambda rec: True
        if (kind, val) == ("kw", "false"):
            self.take()
            return lambda rec: False
        if kind == "word":
            return self.compare()
        self.fail(f"unexpected token {val!r}")

    def literal(self):
        kind, val = self.take()
        if kind == "str":
            return val[1:-1]
        if kind == "word":
            return parse_value(val)
        if kind == "kw" and val in ("true", "false"):
            return val == "true"
        self.fail(f"expected a literal, got {val!r}")

    def compare(self):
        _, name = self.take()
        self.names.add(name)
        kind, val = self.peek()
        if kind == "op":
            self.take()
            return _comparison(name, _OPS[val], self.literal())
        if (kind, val) == ("kw", "contains"):
            self.take()
            lit = self.literal()

            def _contains(rec):
                x = rec.get(name)
                if x is None:
                    return None
                if isinstance(x, (frozenset, set, tuple, list)):
                    return lit in x
                return x == lit

            return _contains

        def _truthy(rec):
            x = rec.get(name)
            return None if x is None else x is True

        return _truthy


def _comparison(name, op, lit):
    numeric = isinstance(lit, (int, float)) and not isinstance(lit, bool)

    def _cmp(rec):
        x = rec.get(name)
        if x is None:
            return None
        if numeric != (isinstance(x, (int, float)) and not isinstance(x, bool)):
            if op is operator.eq:
                return False
            if op is operator.ne:
                return True
            return None
        try:
            return op(x, lit)
        except TypeError:
            return None

    return _cmp


class Predicate:
    """A compiled filter; calling it on an attribute record returns a bool."""

    __slots__ = ("text", "attributes", "_fn", "trivial")

    def __init__(self, text: str | None = "true"):
        text = (text or "").strip() or "true"
        p = _Parser(text)
        self.text = text
        self._fn = p.parse()
        self.attributes = frozenset(p.names)
        self.trivial = text.lower() == "true"

    def evaluate(self, record):
        """Three-valued result: True, False, or None for unknown."""
        return self._fn(record)

    def __call__(self, record) -> bool:
        return self._fn(record) is True

    def check_schema(self, schema, what="attribute"):
        missing = sorted(self.attributes - set(schema))
        if missing:
            raise UnknownAttributeError(
                f"predicate {self.text!r} references unknown {what} {', '.join(missing)}"
            )

    def __repr__(self):
        return f"Predicate({self.text!r})"
