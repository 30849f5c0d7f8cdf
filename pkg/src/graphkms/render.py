"""Text form of algebra elements: rendering and the matching parser.

Terms render as ``s[e1.e2] s*[f]`` with ``p[v]`` for vertex projections and an
optional scalar prefix, e.g. ``0.5 · s[e] s*[f] + p[v]``.  Complex scalars are
parenthesized as ``(a+bi)``.  The parser accepts exactly the rendered grammar
(juxtaposition is multiplication, whitespace is insignificant), so rendering
round-trips.
"""

from __future__ import annotations

import re

from .algebra import (
    AlgebraElement,
    adjoint,
    elem_add,
    elem_mul,
    isometry,
    scalar_mul,
    vertex_projection,
)
from .errors import ParseError
from .graph import Path, WeightedGraph

_NUMBER_RE = re.compile(r"\d+(?:\.\d+)?(?:[eE][+-]?\d+)?")
_ID_RE = re.compile(r"[A-Za-z0-9_:-]+")


def _fmt_float(x: float) -> str:
    return repr(float(x))


def _fmt_coeff(c: complex) -> str:
    sign = "+" if c.imag >= 0 else "-"
    return f"({_fmt_float(c.real)}{sign}{_fmt_float(abs(c.imag))}i)"


def _path_sort_key(p: Path):
    return (len(p.edges), p.edges, p.source_v, p.range_v)


def _term_body(mu: Path, nu: Path) -> str:
    if mu.is_vertex and nu.is_vertex:
        return f"p[{mu.range_v}]"
    parts = []
    if not mu.is_vertex:
        parts.append(f"s[{'.'.join(mu.edges)}]")
    if not nu.is_vertex:
        parts.append(f"s*[{'.'.join(nu.edges)}]")
    return " ".join(parts)


def render_element(x: AlgebraElement) -> str:
    if x.is_zero:
        return "0"
    keys = sorted(x.terms, key=lambda k: (_path_sort_key(k[0]), _path_sort_key(k[1])))
    pieces: list[str] = []
    for i, key in enumerate(keys):
        c = x.terms[key]
        body = _term_body(*key)
        if c.imag == 0.0:
            mag = abs(c.real)
            prefix = "" if mag == 1.0 else _fmt_float(mag) + " · "
            negative = c.real < 0
            if i == 0:
                pieces.append(("-" if negative else "") + prefix + body)
            else:
                pieces.append(("- " if negative else "+ ") + prefix + body)
        else:
            piece = _fmt_coeff(c) + " · " + body
            pieces.append(piece if i == 0 else "+ " + piece)
    return " ".join(pieces)


# ---------------------------------------------------------------------------
# Parser


class _Token:
    __slots__ = ("kind", "value", "pos")

    def __init__(self, kind: str, value, pos: int):
        self.kind = kind
        self.value = value
        self.pos = pos


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if text.startswith("s*[", i) or text.startswith("s[", i) or text.startswith("p[", i):
            kind = "s*" if text.startswith("s*[", i) else text[i]
            i = text.index("[", i) + 1
            ids: list[str] = []
            while True:
                m = _ID_RE.match(text, i)
                if not m:
                    raise ParseError(f"expected an id at column {i + 1}", i)
                ids.append(m.group(0))
                i = m.end()
                if i < n and text[i] == ".":
                    i += 1
                    continue
                break
            if i >= n or text[i] != "]":
                raise ParseError(f"expected ']' at column {i + 1}", i)
            i += 1
            tokens.append(_Token(kind, ids, i))
            continue
        if ch in "+-()·":
            tokens.append(_Token(ch, ch, i))
            i += 1
            continue
        if ch == "i":
            tokens.append(_Token("i", "i", i))
            i += 1
            continue
        m = _NUMBER_RE.match(text, i)
        if m:
            tokens.append(_Token("num", float(m.group(0)), i))
            i = m.end()
            continue
        raise ParseError(f"unexpected character {ch!r} at column {i + 1}", i)
    return tokens


class _Parser:
    def __init__(self, g: WeightedGraph, tokens: list[_Token]):
        self.g = g
        self.tokens = tokens
        self.i = 0

    def peek(self) -> _Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self, kind: str | None = None) -> _Token:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of expression")
        if kind is not None and tok.kind != kind:
            raise ParseError(
                f"expected {kind!r} at column {tok.pos + 1}, got {tok.kind!r}", tok.pos
            )
        self.i += 1
        return tok

    def parse(self) -> AlgebraElement:
        # the zero element renders as the bare scalar 0
        if len(self.tokens) == 1 and self.tokens[0].kind == "num" and self.tokens[0].value == 0.0:
            return AlgebraElement()
        result = AlgebraElement()
        sign = 1.0
        if self.peek() is not None and self.peek().kind == "-":
            self.take()
            sign = -1.0
        result = elem_add(result, scalar_mul(sign, self.term()))
        while self.peek() is not None:
            tok = self.take()
            if tok.kind == "+":
                result = elem_add(result, self.term())
            elif tok.kind == "-":
                result = elem_add(result, scalar_mul(-1.0, self.term()))
            else:
                raise ParseError(
                    f"expected '+' or '-' at column {tok.pos + 1}", tok.pos
                )
        return result

    def term(self) -> AlgebraElement:
        scalar: complex = 1.0
        product: AlgebraElement | None = None
        saw_factor = False
        while True:
            tok = self.peek()
            if tok is None or tok.kind in "+-":
                break
            if tok.kind == "·":
                self.take()
                continue
            saw_factor = True
            if tok.kind == "num":
                scalar *= self.take().value
            elif tok.kind == "(":
                scalar *= self.complex_literal()
            elif tok.kind in ("s", "s*", "p"):
                atom = self.atom()
                product = atom if product is None else elem_mul(product, atom)
            else:
                raise ParseError(
                    f"unexpected token at column {tok.pos + 1}", tok.pos
                )
        if not saw_factor:
            raise ParseError("empty term")
        if product is None:
            raise ParseError("a term must contain a monomial factor, not just scalars")
        return scalar_mul(scalar, product)

    def complex_literal(self) -> complex:
        self.take("(")
        re_sign = 1.0
        if self.peek() is not None and self.peek().kind == "-":
            self.take()
            re_sign = -1.0
        re_tok = self.take("num")
        sign_tok = self.take()
        if sign_tok.kind not in "+-":
            raise ParseError(
                f"expected '+' or '-' in complex literal at column {sign_tok.pos + 1}",
                sign_tok.pos,
            )
        im_tok = self.take("num")
        self.take("i")
        self.take(")")
        imag = im_tok.value if sign_tok.kind == "+" else -im_tok.value
        return complex(re_sign * re_tok.value, imag)

    def atom(self) -> AlgebraElement:
        tok = self.take()
        if tok.kind == "p":
            if len(tok.value) != 1:
                raise ParseError(
                    f"p[...] takes a single vertex id at column {tok.pos}", tok.pos
                )
            v = tok.value[0]
            self.g.require_vertex(v)
            return vertex_projection(v)
        if tok.kind == "s":
            return isometry(self.g, tok.value)
        if tok.kind == "s*":
            return adjoint(isometry(self.g, tok.value))
        raise ParseError(f"unexpected token at column {tok.pos + 1}", tok.pos)


def parse_element(g: WeightedGraph, text: str) -> AlgebraElement:
    """Parse the rendered text form back into an algebra element."""
    tokens = _tokenize(text)
    if not tokens:
        raise ParseError("empty expression")
    return _Parser(g, tokens).parse()
