"""Expression grammar for model files and the matching printer.

    expr   := term (("+" | "-") term)*
    term   := factor ("*" factor)*
    factor := ("-" | "+") factor | atom
    atom   := INT ["/" INT] | NAME | "(" expr ")"

Names are x1.., th1.., etaS1.., etaT1.. and, inside path blocks, t.  Adjacent
atoms without an operator are rejected.
"""

import re
from fractions import Fraction

from .errors import ParseSyntaxError, UnknownSymbol
from .functions import SuperFunction
from .grassmann import GrassmannElement, bits, format_element

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


def tokenize(text, line=1):
    tokens = []
    pos = 0
    end = len(text.rstrip())
    while pos < end:
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.end() == pos:
            break
        col = m.start(m.lastindex) + 1 if m.lastindex else pos + 1
        if m.group(1) is not None:
            tokens.append(("int", m.group(1), col))
        elif m.group(2) is not None:
            tokens.append(("name", m.group(2), col))
        elif m.group(3) is not None:
            ch = m.group(3)
            if ch not in "+-*/()":
                raise ParseSyntaxError(f"unexpected character {ch!r}", line, col)
            tokens.append(("op", ch, col))
        pos = m.end()
    tokens.append(("end", "", len(text) + 1))
    return tokens


class Environment:
    """Resolves names to SuperFunctions over fixed even variables."""

    def __init__(self, context, evens=(), extra=None):
        self.context = context
        self.evens = tuple(evens)
        self.extra = dict(extra or {})

    def resolve(self, name):
        if name in self.extra:
            return self.extra[name]
        if name in self.evens:
            return SuperFunction.variable(self.context, self.evens, name)
        m = re.fullmatch(r"(th|etaS|etaT)(\d+)", name)
        if m:
            fam, i = m.group(1), int(m.group(2))
            if 1 <= i <= self.context.size(fam):
                return SuperFunction.generator(self.context, self.evens, fam, i)
        return None

    def constant(self, c):
        return SuperFunction.constant(self.context, self.evens, c)


class _Parser:
    def __init__(self, text, env, line):
        self.tokens = tokenize(text, line)
        self.i = 0
        self.env = env
        self.line = line

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseSyntaxError(msg, self.line, tok[2])

    def parse(self):
        if self.peek()[0] == "end":
            self.fail("empty expression")
        value = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            if tok[0] in ("int", "name") or tok[1] == "(":
                self.fail("juxtaposition is not allowed; use '*'")
            self.fail(f"unexpected {tok[1]!r}")
        return value

    def expr(self):
        value = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.factor()
        while self.peek()[:2] == ("op", "*"):
            self.take()
            value = value * self.factor()
        return value

    def factor(self):
        tok = self.peek()
        if tok[:2] == ("op", "-"):
            self.take()
            return -self.factor()
        if tok[:2] == ("op", "+"):
            self.take()
            return self.factor()
        return self.atom()

    def atom(self):
        tok = self.take()
        kind, text, col = tok
        if kind == "int":
            value = Fraction(int(text))
            if self.peek()[:2] == ("op", "/"):
                self.take()
                den = self.take()
                if den[0] != "int":
                    self.fail("expected an integer denominator", den)
                if int(den[1]) == 0:
                    self.fail("zero denominator", den)
                value = value / int(den[1])
            return self.env.constant(value)
        if kind == "name":
            got = self.env.resolve(text)
            if got is None:
                raise UnknownSymbol(f"unknown symbol {text!r}", self.line, col)
            return got
        if tok[:2] == ("op", "("):
            value = self.expr()
            close = self.take()
            if close[:2] != ("op", ")"):
                self.fail("expected ')'", close)
            return value
        if kind == "end":
            self.fail("unexpected end of expression", tok)
        self.fail(f"unexpected {text!r}", tok)


def parse_expression(text, env, line=1):
    return _Parser(text, env, line).parse()


def format_function(f):
    """Parseable rendering of a SuperFunction."""
    if f.is_zero():
        return "0"
    parts = []

    def key(item):
        (e, m), _ = item
        return (sum(e) + m.bit_count(), tuple(-x for x in e), tuple(bits(m)))

    for (e, m), c in sorted(f.terms.items(), key=key):
        factors = []
        for name, k in zip(f.evens, e):
            factors.extend([name] * k)
        factors.extend(f.context.label(b) for b in bits(m))
        if not factors:
            parts.append(str(c))
        elif c == 1:
            parts.append("*".join(factors))
        elif c == -1:
            parts.append("-" + "*".join(factors))
        else:
            parts.append(f"{c}*" + "*".join(factors))
    out = parts[0]
    for p in parts[1:]:
        out += " - " + p[1:] if p.startswith("-") else " + " + p
    return out


def format_any(value):
    if isinstance(value, SuperFunction):
        return format_function(value)
    if isinstance(value, GrassmannElement):
        return format_element(value)
    return str(value)


def element_json(value):
    """Sorted list of {"indices": [...], "coeff": "p/q"} for reports."""
    if isinstance(value, SuperFunction):
        if value.is_constant():
            terms = {m: c for (_, m), c in value.terms.items()}
        else:
            return [{"exponents": list(e), "indices": [value.context.label(b) for b in bits(m)], "coeff": str(c)}
                    for (e, m), c in sorted(value.terms.items())]
        ctx = value.context
    else:
        terms = value.terms
        ctx = value.context
    return [{"indices": [ctx.label(b) for b in bits(m)], "coeff": str(c)}
            for m, c in sorted(terms.items(), key=lambda kv: (kv[0].bit_count(), tuple(bits(kv[0]))))]
