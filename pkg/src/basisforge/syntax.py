"""Text syntax for terms.

Precedence, lowest first (all left-associative except ``^``)::

    +  -.          addition, monus (also spelled ∸)
    *  /  %        product, integer division, remainder
    ^              power, right-associative; a literal base 2 means exp2
    f(a, ...)  [a | b]  (e)  constants  identifiers

Variables ``x``, ``y``, ``z`` and ``x<k>`` denote indices 0, 1, 2 and k. Any
other identifier gets the lowest free index, in order of first occurrence.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .terms import (ADD, DIV, EXP2, MOD, MONUS, MUL, PAIR, POW, Const, Op,
                    Term, UnknownSymbol, Var, is_registered, postorder, symbol)


class ParseError(ValueError):
    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>-\.|∸|[-+*/%^()\[\]|,])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str
    text: str
    pos: int


def _tokenize(src: str) -> list[Token]:
    toks = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            line, col = _line_col(src, pos)
            raise ParseError(f"unexpected character {src[pos]!r}", line, col)
        kind = m.lastgroup
        if kind != "ws":
            text = m.group()
            if text == "∸":
                text = "-."
            toks.append(Token(kind, text, pos))
        pos = m.end()
    toks.append(Token("eof", "", len(src)))
    return toks


def _line_col(src, pos):
    line = src.count("\n", 0, pos) + 1
    return line, pos - (src.rfind("\n", 0, pos) + 1) + 1


_CANONICAL = re.compile(r"x(\d+)|[xyz]")


def canonical_index(name: str) -> int | None:
    m = _CANONICAL.fullmatch(name)
    if m is None:
        return None
    if m.group(1) is not None:
        return int(m.group(1))
    return "xyz".index(name)


def var_name(i: int) -> str:
    return "xyz"[i] if i < 3 else f"x{i}"


_ADDITIVE = {"+": ADD, "-.": MONUS}
_MULTIPLICATIVE = {"*": MUL, "/": DIV, "%": MOD}


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0
        self.names: dict[str, int] = {}
        self._assign_variables()

    def _assign_variables(self):
        idents = [t.text for k, t in enumerate(self.toks)
                  if t.kind == "ident" and self.toks[k + 1].text != "("]
        taken = set()
        for name in idents:
            i = canonical_index(name)
            if i is not None:
                self.names[name] = i
                taken.add(i)
        nxt = 0
        for name in idents:
            if name in self.names:
                continue
            while nxt in taken:
                nxt += 1
            self.names[name] = nxt
            taken.add(nxt)

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        line, col = _line_col(self.src, tok.pos)
        return ParseError(msg, line, col)

    def expect(self, text):
        if self.tok.text != text:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        self.i += 1

    def parse(self) -> Term:
        t = self.additive()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")
        return t

    def additive(self):
        left = self.multiplicative()
        while self.tok.text in _ADDITIVE:
            sym = _ADDITIVE[self.tok.text]
            self.i += 1
            left = Op(sym, (left, self.multiplicative()))
        return left

    def multiplicative(self):
        left = self.power()
        while self.tok.text in _MULTIPLICATIVE:
            sym = _MULTIPLICATIVE[self.tok.text]
            self.i += 1
            left = Op(sym, (left, self.power()))
        return left

    def power(self):
        base_tok = self.tok
        base = self.atom()
        if self.tok.text != "^":
            return base
        self.i += 1
        exponent = self.power()
        if base_tok.kind == "num" and base is Const(2):
            return Op(EXP2, (exponent,))
        return Op(POW, (base, exponent))

    def atom(self):
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Const(int(tok.text))
        if tok.kind == "ident":
            self.i += 1
            if self.tok.text == "(":
                return self.call(tok)
            return Var(self.names[tok.text])
        if tok.text == "(":
            self.i += 1
            t = self.additive()
            self.expect(")")
            return t
        if tok.text == "[":
            self.i += 1
            a = self.additive()
            self.expect("|")
            b = self.additive()
            self.expect("]")
            return Op(PAIR, (a, b))
        raise self.error(f"unexpected {tok.text or 'end of input'!r}")

    def call(self, name_tok):
        if not is_registered(name_tok.text):
            raise self.error(f"unknown function {name_tok.text!r}", name_tok)
        sym = symbol(name_tok.text)
        self.expect("(")
        args = [self.additive()]
        while self.tok.text == ",":
            self.i += 1
            args.append(self.additive())
        self.expect(")")
        if len(args) != sym.arity:
            raise self.error(f"{sym.name} takes {sym.arity} argument(s), got {len(args)}", name_tok)
        return Op(sym, args)


def parse(src: str) -> Term:
    return _Parser(src).parse()


def parse_with_names(src: str) -> tuple[Term, dict[str, int]]:
    """Parse and also return the identifier -> variable index mapping."""
    p = _Parser(src)
    return p.parse(), dict(p.names)


def parse_lines(text: str) -> list[Term]:
    """One term per non-blank line; ``#`` starts a comment."""
    terms = []
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0]
        if not body.strip():
            continue
        try:
            terms.append(parse(body))
        except ParseError as e:
            raise ParseError(str(e).rsplit(" (line", 1)[0], lineno, e.column) from None
    return terms


# ---------------------------------------------------------------------------
# Printing

_INFIX = {ADD: ("+", 1), MONUS: ("-.", 1), MUL: ("*", 2), DIV: ("/", 2), MOD: ("%", 2)}
_ATOM = 4


def _prec(t: Term) -> int:
    if isinstance(t, Op):
        if t.symbol in _INFIX:
            return _INFIX[t.symbol][1]
        if t.symbol in (POW, EXP2):
            return 3
    return _ATOM


def to_text(t: Term) -> str:
    """Render with the fewest parentheses that still parse back to ``t``."""
    out: dict[int, str] = {}

    def wrap(c, need):
        s = out[id(c)]
        return f"({s})" if need else s

    for n in postorder(t):
        if isinstance(n, Const):
            s = str(n.value)
        elif isinstance(n, Var):
            s = var_name(n.index)
        elif n.symbol in _INFIX:
            text, p = _INFIX[n.symbol]
            a, b = n.args
            s = f"{wrap(a, _prec(a) < p)} {text} {wrap(b, _prec(b) <= p)}"
        elif n.symbol is EXP2:
            (e,) = n.args
            s = f"2^{wrap(e, _prec(e) < 3)}"
        elif n.symbol is POW:
            a, b = n.args
            need = _prec(a) <= 3 or a is Const(2)
            s = f"{wrap(a, need)}^{wrap(b, _prec(b) < 3)}"
        elif n.symbol is PAIR:
            a, b = n.args
            s = f"[{out[id(a)]} | {out[id(b)]}]"
        else:
            s = f"{n.symbol.name}({', '.join(out[id(c)] for c in n.args)})"
        out[id(n)] = s
    return out[id(t)]


print_term = to_text


def to_dag_text(t: Term) -> str:
    """Let-style listing of the distinct subterms, for terms too big to print as trees."""
    names: dict[int, str] = {}
    lines = []
    for n in postorder(t):
        if not isinstance(n, Op):
            names[id(n)] = to_text(n)
            continue
        shown = Op(n.symbol, [Var(1000 + k) for k in range(len(n.args))])
        body = to_text(shown)
        for k, c in enumerate(n.args):
            body = re.sub(rf"\bx{1000 + k}\b", names[id(c)], body)
        name = f"t{len(lines)}"
        lines.append(f"{name} = {body}")
        names[id(n)] = name
    if not lines:
        return names[id(t)]
    return "\n".join(lines)


__all__ = ["ParseError", "UnknownSymbol", "parse", "parse_with_names", "parse_lines",
           "to_text", "print_term", "to_dag_text", "var_name", "canonical_index"]
