"""Strategy scripts: tokenizer, recursive-descent parser, printer and static checks.

Grammar (whitespace-insensitive, ``#`` comments)::

    script  := "given" [id {"," id}] ";" {stmt}
    stmt    := "let" id ["," id] "=" expr ";" | "request" id "in" openset ";"
             | "if" test "{" {stmt} "}" ["else" "{" {stmt} "}"]
             | "repeat" nat "{" {stmt} "}" | "output" id ";" | "assert" test ";"
    expr    := "join" "(" id "," id ")" | "meet" "(" id "," id ")"
             | "intersect" "(" id "," id ")" ["[" ("0"|"1") "]"]
             | "circle" "(" id "," id "," id ")"
    test    := incident(id, id) | equal(id, id) | parallel(id, id)
             | between(id, id, id) | sameside(id, id, id)
    openset := atom {"and" atom}
    atom    := "disc" "(" (pointlit | id) "," rational ")" | "halfplane" "(" id "," ("+"|"-") ")"

The two-name ``let P, Q = intersect(a, b);`` binds both intersection points.
Bindings made inside an ``if`` arm or a ``repeat`` body are local to it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .numbers import ConstructibleReal, parse_real, real

__all__ = [
    "Script",
    "LetJoin",
    "LetMeet",
    "LetIntersections",
    "LetCircle",
    "Request",
    "If",
    "Repeat",
    "Output",
    "Assert",
    "Incident",
    "Equal",
    "Parallel",
    "Between",
    "SameSide",
    "OpenSetExpr",
    "Disc",
    "HalfPlane",
    "PointLit",
    "ParseError",
    "ScriptSyntaxError",
    "Diagnostic",
    "parse",
    "pretty_print",
    "check",
    "tests_in",
]

_POS = field(default=(0, 0), compare=False, repr=False)


# -- AST ------------------------------------------------------------------------------


@dataclass(frozen=True)
class PointLit:
    x: ConstructibleReal
    y: ConstructibleReal


@dataclass(frozen=True)
class Disc:
    center: Union[PointLit, str]
    radius: Fraction
    pos: tuple = _POS


@dataclass(frozen=True)
class HalfPlane:
    line: str
    side: str
    pos: tuple = _POS


@dataclass(frozen=True)
class OpenSetExpr:
    atoms: tuple


@dataclass(frozen=True)
class Incident:
    point: str
    carrier: str
    pos: tuple = _POS


@dataclass(frozen=True)
class Equal:
    a: str
    b: str
    pos: tuple = _POS


@dataclass(frozen=True)
class Parallel:
    l: str
    m: str
    pos: tuple = _POS


@dataclass(frozen=True)
class Between:
    p: str
    q: str
    r: str
    pos: tuple = _POS


@dataclass(frozen=True)
class SameSide:
    p: str
    q: str
    line: str
    pos: tuple = _POS


Test = Union[Incident, Equal, Parallel, Between, SameSide]


@dataclass(frozen=True)
class LetJoin:
    name: str
    p: str
    q: str
    pos: tuple = _POS


@dataclass(frozen=True)
class LetMeet:
    name: str
    l: str
    m: str
    pos: tuple = _POS


@dataclass(frozen=True)
class LetIntersections:
    names: tuple
    a: str
    b: str
    index: Optional[int] = None
    pos: tuple = _POS


@dataclass(frozen=True)
class LetCircle:
    name: str
    center: str
    a: str
    b: str
    pos: tuple = _POS


@dataclass(frozen=True)
class Request:
    name: str
    region: OpenSetExpr
    pos: tuple = _POS


@dataclass(frozen=True)
class If:
    test: Test
    then: tuple
    orelse: Optional[tuple] = None
    pos: tuple = _POS


@dataclass(frozen=True)
class Repeat:
    count: int
    body: tuple
    pos: tuple = _POS


@dataclass(frozen=True)
class Output:
    name: str
    pos: tuple = _POS


@dataclass(frozen=True)
class Assert:
    test: Test
    pos: tuple = _POS


@dataclass(frozen=True)
class Script:
    givens: tuple
    body: tuple
    source_name: str = field(default="<script>", compare=False, repr=False)


# -- errors ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParseError:
    message: str
    line: int
    column: int
    expected: str = ""

    def __str__(self):
        exp = f" (expected {self.expected})" if self.expected else ""
        return f"{self.line}:{self.column}: {self.message}{exp}"


class ScriptSyntaxError(ValueError):
    def __init__(self, errors, name="<script>"):
        self.errors = list(errors)
        super().__init__(f"{name}: " + "; ".join(map(str, self.errors)))


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    message: str
    line: int
    column: int

    def __str__(self):
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


# -- tokenizer ------------------------------------------------------------------------

KEYWORDS = {
    "given", "let", "request", "in", "if", "else", "repeat", "output", "assert", "and",
    "join", "meet", "intersect", "circle",
    "incident", "equal", "parallel", "between", "sameside",
    "disc", "halfplane", "sqrt",
}

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<int>[0-9]+)"
    r"|(?P<punct>[;,(){}\[\]=/+\-*])"
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident, kw, int, punct, eof
    text: str
    line: int
    col: int
    offset: int

    @property
    def end_col(self):
        return self.col + len(self.text)


def tokenize(source):
    tokens, errors = [], []
    line, line_start, i = 1, 0, 0
    while i < len(source):
        m = _TOKEN_RE.match(source, i)
        if m is None:
            errors.append(ParseError(f"unexpected character {source[i]!r}", line, i - line_start + 1))
            i += 1
            continue
        kind = m.lastgroup
        text = m.group()
        col = i - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "ident":
            tokens.append(Token("kw" if text in KEYWORDS else "ident", text, line, col, i))
        elif kind in ("int", "punct"):
            tokens.append(Token(kind, text, line, col, i))
        i = m.end()
    tokens.append(Token("eof", "", line, i - line_start + 1, i))
    return tokens, errors


# -- parser ---------------------------------------------------------------------------


class _Fail(Exception):
    pass


_ARITY = {"join": 2, "meet": 2, "intersect": 2, "circle": 3}
_TEST_ARITY = {"incident": 2, "equal": 2, "parallel": 2, "between": 3, "sameside": 3}
_CLOSERS = {";", ")", "]", "}"}


class _Parser:
    def __init__(self, source):
        self.source = source
        self.toks, self.errors = tokenize(source)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def advance(self):
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def error(self, message, expected="", at=None):
        t = at or self.tok
        if at is None and expected in _CLOSERS and self.i > 0:
            prev = self.toks[self.i - 1]
            self.errors.append(ParseError(message, prev.line, prev.end_col, expected))
        else:
            self.errors.append(ParseError(message, t.line, t.col, expected))
        raise _Fail

    def expect(self, text):
        if self.tok.text == text and self.tok.kind in ("punct", "kw"):
            return self.advance()
        found = self.tok.text or "end of input"
        self.error(f"unexpected {found!r}", expected=text)

    def ident(self):
        if self.tok.kind == "ident":
            return self.advance().text
        found = self.tok.text or "end of input"
        what = "keyword" if self.tok.kind == "kw" else "token"
        self.error(f"unexpected {what} {found!r}", expected="identifier")

    def at(self, text):
        return self.tok.text == text and self.tok.kind in ("punct", "kw")

    # script / blocks

    def script(self):
        givens = []
        try:
            self.expect("given")
            if not self.at(";"):
                givens.append(self.ident())
                while self.at(","):
                    self.advance()
                    givens.append(self.ident())
            self.expect(";")
        except _Fail:
            self.sync()
        body = self.block(top=True)
        return Script(tuple(givens), tuple(body))

    def block(self, top=False):
        out = []
        while True:
            if self.tok.kind == "eof":
                if not top:
                    self.errors.append(ParseError("unterminated block", self.tok.line, self.tok.col, "}"))
                return out
            if self.at("}"):
                if top:
                    self.errors.append(ParseError("unmatched '}'", self.tok.line, self.tok.col))
                    self.advance()
                    continue
                return out
            start = self.i
            try:
                out.append(self.stmt())
            except _Fail:
                if self.i == start:
                    self.advance()
                self.sync()

    def sync(self):
        depth = 0
        while self.tok.kind != "eof":
            t = self.tok
            if t.text == "{":
                depth += 1
            elif t.text == "}":
                if depth == 0:
                    return
                depth -= 1
                if depth == 0:
                    self.advance()
                    return
            elif t.text == ";" and depth == 0:
                self.advance()
                return
            self.advance()

    def braced(self):
        self.expect("{")
        body = self.block()
        self.expect("}")
        return tuple(body)

    # statements

    def stmt(self):
        t = self.tok
        pos = (t.line, t.col)
        if self.at("let"):
            self.advance()
            names = [self.ident()]
            if self.at(","):
                self.advance()
                names.append(self.ident())
            self.expect("=")
            node = self.expr(names, pos)
            self.expect(";")
            return node
        if self.at("request"):
            self.advance()
            name = self.ident()
            self.expect("in")
            region = self.openset()
            self.expect(";")
            return Request(name, region, pos)
        if self.at("if"):
            self.advance()
            test = self.test()
            then = self.braced()
            orelse = None
            if self.at("else"):
                self.advance()
                orelse = self.braced()
            return If(test, then, orelse, pos)
        if self.at("repeat"):
            self.advance()
            if self.tok.kind != "int":
                self.error(f"unexpected {self.tok.text or 'end of input'!r}", expected="loop bound (natural literal)")
            count = int(self.advance().text)
            return Repeat(count, self.braced(), pos)
        if self.at("output"):
            self.advance()
            name = self.ident()
            self.expect(";")
            return Output(name, pos)
        if self.at("assert"):
            self.advance()
            test = self.test()
            self.expect(";")
            return Assert(test, pos)
        found = t.text or "end of input"
        self.error(f"unexpected {found!r}", expected="statement")

    def args(self):
        """Parenthesized identifier list; returns (names, call token)."""
        self.expect("(")
        names = [self.ident()]
        while self.at(","):
            self.advance()
            names.append(self.ident())
        self.expect(")")
        return names

    def expr(self, names, pos):
        call = self.tok
        if call.kind != "kw" or call.text not in _ARITY:
            self.error(f"unexpected {call.text or 'end of input'!r}", expected="join, meet, intersect or circle")
        self.advance()
        args = self.args()
        want = _ARITY[call.text]
        if len(args) != want:
            self.error(f"{call.text} expects {want} arguments, got {len(args)}", at=call)
        if call.text == "intersect":
            index = None
            if self.at("["):
                self.advance()
                if self.tok.kind != "int" or self.tok.text not in ("0", "1"):
                    self.error(f"unexpected {self.tok.text!r}", expected="0 or 1")
                index = int(self.advance().text)
                self.expect("]")
                if len(names) == 2:
                    self.error("an indexed intersect binds a single name", at=call)
            return LetIntersections(tuple(names), args[0], args[1], index, pos)
        if len(names) != 1:
            self.error(f"{call.text} binds a single name", at=call)
        if call.text == "join":
            return LetJoin(names[0], *args, pos=pos)
        if call.text == "meet":
            return LetMeet(names[0], *args, pos=pos)
        return LetCircle(names[0], *args, pos=pos)

    def test(self):
        call = self.tok
        if call.kind != "kw" or call.text not in _TEST_ARITY:
            self.error(f"unexpected {call.text or 'end of input'!r}", expected="test")
        self.advance()
        args = self.args()
        want = _TEST_ARITY[call.text]
        if len(args) != want:
            self.error(f"{call.text} expects {want} arguments, got {len(args)}", at=call)
        pos = (call.line, call.col)
        cls = {"incident": Incident, "equal": Equal, "parallel": Parallel, "between": Between, "sameside": SameSide}
        return cls[call.text](*args, pos=pos)

    def openset(self):
        atoms = [self.setatom()]
        while self.at("and"):
            self.advance()
            atoms.append(self.setatom())
        return OpenSetExpr(tuple(atoms))

    def setatom(self):
        t = self.tok
        pos = (t.line, t.col)
        if self.at("disc"):
            self.advance()
            self.expect("(")
            if self.at("("):
                center = self.pointlit()
            else:
                center = self.ident()
            self.expect(",")
            radius = self.number()
            if not radius.is_rational() or radius.sign() <= 0:
                self.error("disc radius must be a positive rational", at=t)
            self.expect(")")
            return Disc(center, radius.as_fraction(), pos)
        if self.at("halfplane"):
            self.advance()
            self.expect("(")
            name = self.ident()
            self.expect(",")
            if not (self.at("+") or self.at("-")):
                self.error(f"unexpected {self.tok.text!r}", expected="+ or -")
            side = self.advance().text
            self.expect(")")
            return HalfPlane(name, side, pos)
        self.error(f"unexpected {t.text or 'end of input'!r}", expected="disc or halfplane")

    def pointlit(self):
        self.expect("(")
        x = self.number()
        self.expect(",")
        y = self.number()
        self.expect(")")
        return PointLit(x, y)

    def number(self):
        t = self.tok
        if self.at("("):
            depth = 0
            start = t.offset
            while True:
                cur = self.advance()
                if cur.kind == "eof":
                    self.error("unterminated number", expected=")")
                if cur.text == "(":
                    depth += 1
                elif cur.text == ")":
                    depth -= 1
                    if depth == 0:
                        break
            text = self.source[start:cur.offset + 1]
            try:
                return parse_real(text)
            except (ValueError, ZeroDivisionError) as exc:
                self.error(f"bad number: {exc}", at=t)
        neg = False
        if self.at("-"):
            self.advance()
            neg = True
        if self.tok.kind != "int":
            self.error(f"unexpected {self.tok.text or 'end of input'!r}", expected="number")
        value = Fraction(int(self.advance().text))
        if self.at("/"):
            self.advance()
            if self.tok.kind != "int":
                self.error(f"unexpected {self.tok.text or 'end of input'!r}", expected="denominator")
            den = int(self.advance().text)
            if den == 0:
                self.error("zero denominator", at=t)
            value /= den
        return real(-value if neg else value)


def parse(source: str, name: str = "<script>") -> Script:
    """Parse a strategy script; raises ScriptSyntaxError listing every error found."""
    p = _Parser(source)
    script = p.script()
    if p.errors:
        errs = sorted(set(p.errors), key=lambda e: (e.line, e.column))
        raise ScriptSyntaxError(errs, name)
    return Script(script.givens, script.body, name)


# -- printer --------------------------------------------------------------------------


def _num(v):
    return v.to_str()


def _test_str(t):
    if isinstance(t, Incident):
        return f"incident({t.point}, {t.carrier})"
    if isinstance(t, Equal):
        return f"equal({t.a}, {t.b})"
    if isinstance(t, Parallel):
        return f"parallel({t.l}, {t.m})"
    if isinstance(t, Between):
        return f"between({t.p}, {t.q}, {t.r})"
    return f"sameside({t.p}, {t.q}, {t.line})"


def _atom_str(a):
    if isinstance(a, Disc):
        c = a.center if isinstance(a.center, str) else f"({_num(a.center.x)}, {_num(a.center.y)})"
        return f"disc({c}, {a.radius})"
    return f"halfplane({a.line}, {a.side})"


def openset_str(region):
    return " and ".join(_atom_str(a) for a in region.atoms)


def _stmts(body, indent, out):
    pad = "  " * indent
    for s in body:
        if isinstance(s, LetJoin):
            out.append(f"{pad}let {s.name} = join({s.p}, {s.q});")
        elif isinstance(s, LetMeet):
            out.append(f"{pad}let {s.name} = meet({s.l}, {s.m});")
        elif isinstance(s, LetIntersections):
            idx = "" if s.index is None else f"[{s.index}]"
            out.append(f"{pad}let {', '.join(s.names)} = intersect({s.a}, {s.b}){idx};")
        elif isinstance(s, LetCircle):
            out.append(f"{pad}let {s.name} = circle({s.center}, {s.a}, {s.b});")
        elif isinstance(s, Request):
            out.append(f"{pad}request {s.name} in {openset_str(s.region)};")
        elif isinstance(s, If):
            out.append(f"{pad}if {_test_str(s.test)} {{")
            _stmts(s.then, indent + 1, out)
            if s.orelse is None:
                out.append(f"{pad}}}")
            else:
                out.append(f"{pad}}} else {{")
                _stmts(s.orelse, indent + 1, out)
                out.append(f"{pad}}}")
        elif isinstance(s, Repeat):
            out.append(f"{pad}repeat {s.count} {{")
            _stmts(s.body, indent + 1, out)
            out.append(f"{pad}}}")
        elif isinstance(s, Output):
            out.append(f"{pad}output {s.name};")
        elif isinstance(s, Assert):
            out.append(f"{pad}assert {_test_str(s.test)};")
        else:
            raise TypeError(f"unknown statement {s!r}")


def pretty_print(script: Script) -> str:
    out = [f"given {', '.join(script.givens)};" if script.givens else "given;"]
    _stmts(script.body, 0, out)
    return "\n".join(out) + "\n"


# -- static checks ---------------------------------------------------------------------

_RESULT = {LetJoin: "line", LetMeet: "point", LetIntersections: "point", LetCircle: "conic", Request: "point"}


def _type_of(obj):
    from .projective import Conic, HLine, HPoint

    if isinstance(obj, HPoint):
        return "point"
    if isinstance(obj, HLine):
        return "line"
    if isinstance(obj, Conic):
        return "conic"
    return "any"


class _Checker:
    def __init__(self):
        self.diags = []

    def add(self, severity, message, pos):
        self.diags.append(Diagnostic(severity, message, pos[0], pos[1]))

    def use(self, scope, name, want, pos, what):
        kind = None
        for frame in reversed(scope):
            if name in frame:
                kind = frame[name]
                break
        if kind is None:
            self.add("error", f"undefined identifier {name!r}", pos)
            return
        if kind != "any" and kind not in want:
            self.add("error", f"{what} needs {' or '.join(sorted(want))}, {name!r} is a {kind}", pos)

    def bind(self, scope, name, kind, pos):
        if any(name in frame for frame in scope):
            self.add("error", f"{name!r} is already bound (names cannot be rebound)", pos)
        scope[-1][name] = kind

    def test(self, scope, t):
        pos = t.pos
        if isinstance(t, Incident):
            self.use(scope, t.point, {"point"}, pos, "incident")
            self.use(scope, t.carrier, {"line", "conic"}, pos, "incident")
        elif isinstance(t, Equal):
            self.use(scope, t.a, {"point", "line", "conic"}, pos, "equal")
            self.use(scope, t.b, {"point", "line", "conic"}, pos, "equal")
        elif isinstance(t, Parallel):
            self.use(scope, t.l, {"line"}, pos, "parallel")
            self.use(scope, t.m, {"line"}, pos, "parallel")
        elif isinstance(t, Between):
            for n in (t.p, t.q, t.r):
                self.use(scope, n, {"point"}, pos, "between")
        elif isinstance(t, SameSide):
            self.use(scope, t.p, {"point"}, pos, "sameside")
            self.use(scope, t.q, {"point"}, pos, "sameside")
            self.use(scope, t.line, {"line"}, pos, "sameside")

    def block(self, scope, body):
        for s in body:
            pos = s.pos
            if isinstance(s, LetJoin):
                self.use(scope, s.p, {"point"}, pos, "join")
                self.use(scope, s.q, {"point"}, pos, "join")
                self.bind(scope, s.name, "line", pos)
            elif isinstance(s, LetMeet):
                self.use(scope, s.l, {"line"}, pos, "meet")
                self.use(scope, s.m, {"line"}, pos, "meet")
                self.bind(scope, s.name, "point", pos)
            elif isinstance(s, LetIntersections):
                self.use(scope, s.a, {"line", "conic"}, pos, "intersect")
                self.use(scope, s.b, {"line", "conic"}, pos, "intersect")
                if len(s.names) == 2 and s.names[0] == s.names[1]:
                    self.add("error", "intersect binds the same name twice", pos)
                for n in s.names:
                    self.bind(scope, n, "point", pos)
            elif isinstance(s, LetCircle):
                for n in (s.center, s.a, s.b):
                    self.use(scope, n, {"point"}, pos, "circle")
                self.bind(scope, s.name, "conic", pos)
            elif isinstance(s, Request):
                for atom in s.region.atoms:
                    if isinstance(atom, Disc) and isinstance(atom.center, str):
                        self.use(scope, atom.center, {"point"}, atom.pos, "disc")
                    elif isinstance(atom, HalfPlane):
                        self.use(scope, atom.line, {"line"}, atom.pos, "halfplane")
                self.bind(scope, s.name, "point", pos)
            elif isinstance(s, If):
                self.test(scope, s.test)
                self.block(scope + [{}], s.then)
                if s.orelse is not None:
                    self.block(scope + [{}], s.orelse)
            elif isinstance(s, Repeat):
                if s.count == 0:
                    self.add("warning", "repeat 0: dead block", pos)
                self.block(scope + [{}], s.body)
            elif isinstance(s, Output):
                self.use(scope, s.name, {"point", "line", "conic"}, pos, "output")
            elif isinstance(s, Assert):
                self.test(scope, s.test)


def check(script: Script, inputs=None) -> list:
    """Identifier, type and arity diagnostics; no geometry is evaluated.

    ``inputs`` is an optional sequence of objects (or a Configuration) bound
    to the declared givens in order."""
    ch = _Checker()
    top = {}
    if inputs is not None:
        objs = [o for _, o in inputs] if hasattr(inputs, "points") else list(inputs)
        if len(objs) < len(script.givens):
            ch.add("error", f"script declares {len(script.givens)} givens but {len(objs)} inputs were supplied", (1, 1))
        kinds = [_type_of(o) for o in objs]
    else:
        kinds = []
    for i, name in enumerate(script.givens):
        if name in top:
            ch.add("error", f"given {name!r} declared twice", (1, 1))
        top[name] = kinds[i] if i < len(kinds) else "any"
    ch.block([top], script.body)
    return ch.diags


def tests_in(body):
    """Every Test node in a statement list, in source order."""
    out = []
    for s in body:
        if isinstance(s, (If, Assert)):
            out.append(s.test)
        if isinstance(s, If):
            out += tests_in(s.then)
            if s.orelse is not None:
                out += tests_in(s.orelse)
        elif isinstance(s, Repeat):
            out += tests_in(s.body)
    return out
