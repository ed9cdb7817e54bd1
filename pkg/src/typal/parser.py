"""Lexer and recursive-descent parser for ``.tp`` model files."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError
from .syntax import (
    ARITH_OPS, COMPARE_OPS, SET_OPS, Action, BinOp, BoolConst, Effect, EnumConst,
    Expr, FieldAccess, Index, IntConst, Not, Param, RawLit, SetLit, SourceModel,
    TagAccess, TagConstruct, TagTest, TupleAccess, TupleLit, Var, VarDecl, is_reference,
)
from .types import (
    BOOL, ArrayType, EnumType, IntRange, NamedType, RecordType, SetType, TupleType,
    TypeExpr, UnionType,
)

KEYWORDS = frozenset("""
    type var init goal action pre eff end when true false bool set array
    not and or is as
""".split()) | frozenset(ARITH_OPS + COMPARE_OPS + SET_OPS)

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<int>-?\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>:=|\.\.|[;:=.,(){}<>\[\]])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # int | name | kw | sym | eof
    text: str
    line: int
    col: int

    @property
    def pos(self) -> tuple[int, int]:
        return (self.line, self.col)


def tokenize(text: str) -> list[Token]:
    tokens = []
    i, line, line_start = 0, 1, 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", (line, i - line_start + 1))
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            if kind == "name" and chunk in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, chunk, line, i - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = i + chunk.rindex("\n") + 1
        i = m.end()
    tokens.append(Token("eof", "<end of input>", line, i - line_start + 1))
    return tokens


class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    # -- token helpers -------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("kw", "sym") and t.text in texts

    def fail(self, expected) -> ParseError:
        t = self.tok
        return ParseError(f"unexpected {t.text!r}", t.pos, frozenset(expected))

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.fail({text})
        return self.advance()

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def name(self) -> Token:
        if self.tok.kind != "name":
            raise self.fail({"NAME"})
        return self.advance()

    def integer(self) -> int:
        if self.tok.kind != "int":
            raise self.fail({"INT"})
        return int(self.advance().text)

    # -- declarations --------------------------------------------------------

    def model(self) -> SourceModel:
        typedefs, decls, init, goals, actions = [], [], [], [], []
        starters = {"type", "var", "init", "goal", "action"}
        if self.tok.kind == "eof":
            raise ParseError("expected declaration", self.tok.pos, frozenset(starters))
        while self.tok.kind != "eof":
            if self.at("type"):
                self.advance()
                name = self.name().text
                self.expect("=")
                typedefs.append((name, self.type_expr()))
                self.expect(";")
            elif self.at("var"):
                start = self.advance()
                name = self.name().text
                self.expect(":")
                decls.append(VarDecl(name, self.type_expr(), start.pos))
                self.expect(";")
            elif self.at("init"):
                self.advance()
                name = self.name().text
                self.expect("=")
                init.append((name, self.literal()))
                self.expect(";")
            elif self.at("goal"):
                self.advance()
                goals.append(self.expr())
                self.expect(";")
            elif self.at("action"):
                actions.append(self.action())
            else:
                raise ParseError("expected declaration", self.tok.pos, frozenset(starters))
        goal = None
        for g in goals:
            goal = g if goal is None else BinOp("and", goal, g, pos=g.pos)
        return SourceModel(tuple(typedefs), tuple(decls), tuple(init), goal, tuple(actions))

    def action(self) -> Action:
        start = self.expect("action")
        name = self.name().text
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                p = self.name()
                self.expect(":")
                params.append(Param(p.text, self.type_expr(), p.pos))
                if not self.at(","):
                    break
                self.advance()
        self.expect(")")
        self.expect("pre")
        pre = self.expr()
        self.expect("eff")
        effects = []
        while not self.at("end"):
            effects.append(self.effect())
            self.expect(";")
        self.expect("end")
        return Action(name, tuple(params), pre, tuple(effects), start.pos)

    def effect(self) -> Effect:
        start = self.tok
        cond = None
        if self.at("when"):
            self.advance()
            cond = self.expr()
        if self.tok.kind != "name":
            raise self.fail({"NAME"})
        target = self.postfix()
        if not is_reference(target):
            raise ParseError("assignment target must be a reference", target.pos)
        self.expect(":=")
        return Effect(cond, target, self.expr(), start.pos)

    # -- types ---------------------------------------------------------------

    def type_expr(self) -> TypeExpr:
        t = self.tok
        if self.at("bool"):
            self.advance()
            return BOOL
        if t.kind == "int":
            lo = self.integer()
            self.expect("..")
            hi = self.integer()
            if lo > hi:
                raise ParseError(f"empty integer range {lo}..{hi}", t.pos)
            return IntRange(lo, hi)
        if self.at("{"):
            self.advance()
            if self.peek().text == ":" and self.tok.kind == "name":
                fields = self.named_types("}")
                return self._build(RecordType, fields, t)
            items = [self.name().text]
            while self.at(","):
                self.advance()
                items.append(self.name().text)
            self.expect("}")
            return self._build(EnumType, tuple(items), t)
        if self.at("<"):
            self.advance()
            comps = [self.type_expr()]
            while self.at(","):
                self.advance()
                comps.append(self.type_expr())
            self.expect(">")
            return TupleType(tuple(comps))
        if self.at("["):
            self.advance()
            return self._build(UnionType, self.named_types("]"), t)
        if self.at("set"):
            self.advance()
            self.expect("<")
            el = self.type_expr()
            self.expect(">")
            return SetType(el)
        if self.at("array"):
            self.advance()
            self.expect("<")
            key = self.type_expr()
            self.expect(",")
            value = self.type_expr()
            self.expect(">")
            return ArrayType(value, key)
        if t.kind == "name":
            self.advance()
            return NamedType(t.text)
        raise self.fail({"bool", "INT", "{", "<", "[", "set", "array", "NAME"})

    def named_types(self, close: str) -> tuple:
        out = []
        while True:
            n = self.name().text
            self.expect(":")
            out.append((n, self.type_expr()))
            if not self.at(","):
                break
            self.advance()
        self.expect(close)
        return tuple(out)

    @staticmethod
    def _build(cls, arg, tok: Token):
        try:
            return cls(arg)
        except ValueError as exc:
            raise ParseError(str(exc), tok.pos) from None

    # -- literals ------------------------------------------------------------

    def literal(self) -> RawLit:
        t = self.tok
        if self.at("true", "false"):
            self.advance()
            return RawLit("bool", t.text == "true", t.pos)
        if t.kind == "int":
            return RawLit("int", self.integer(), t.pos)
        if t.kind == "name":
            self.advance()
            if self.at("("):
                self.advance()
                inner = self.literal()
                self.expect(")")
                return RawLit("tag", (t.text, inner), t.pos)
            return RawLit("name", t.text, t.pos)
        if self.at("<"):
            self.advance()
            items = self.literal_list(">")
            return RawLit("tuple", items, t.pos)
        if self.at("["):
            self.advance()
            return RawLit("array", self.literal_list("]"), t.pos)
        if self.at("{"):
            self.advance()
            if self.at("}"):
                self.advance()
                return RawLit("set", (), t.pos)
            if self.tok.kind == "name" and self.peek().text == ":":
                fields = []
                while True:
                    n = self.name().text
                    self.expect(":")
                    fields.append((n, self.literal()))
                    if not self.at(","):
                        break
                    self.advance()
                self.expect("}")
                return RawLit("record", tuple(fields), t.pos)
            return RawLit("set", self.literal_list("}"), t.pos)
        raise self.fail({"true", "false", "INT", "NAME", "<", "[", "{"})

    def literal_list(self, close: str) -> tuple:
        items = []
        if not self.at(close):
            items.append(self.literal())
            while self.at(","):
                self.advance()
                items.append(self.literal())
        self.expect(close)
        return tuple(items)

    # -- expressions ---------------------------------------------------------

    def expr(self) -> Expr:
        left = self.and_expr()
        while self.at("or"):
            t = self.advance()
            left = BinOp("or", left, self.and_expr(), pos=t.pos)
        return left

    def and_expr(self) -> Expr:
        left = self.not_expr()
        while self.at("and"):
            t = self.advance()
            left = BinOp("and", left, self.not_expr(), pos=t.pos)
        return left

    def not_expr(self) -> Expr:
        if self.at("not"):
            t = self.advance()
            return Not(self.not_expr(), pos=t.pos)
        return self.compare_expr()

    def compare_expr(self) -> Expr:
        left = self.add_expr()
        if self.tok.kind == "kw" and self.tok.text in COMPARE_OPS:
            t = self.advance()
            return BinOp(t.text, left, self.add_expr(), pos=t.pos)
        return left

    def add_expr(self) -> Expr:
        left = self.mul_expr()
        while self.at("add", "sub"):
            t = self.advance()
            left = BinOp(t.text, left, self.mul_expr(), pos=t.pos)
        return left

    def mul_expr(self) -> Expr:
        left = self.set_expr()
        while self.at("mul", "div"):
            t = self.advance()
            left = BinOp(t.text, left, self.set_expr(), pos=t.pos)
        return left

    def set_expr(self) -> Expr:
        left = self.postfix()
        while self.at(*SET_OPS):
            t = self.advance()
            left = BinOp(t.text, left, self.postfix(), pos=t.pos)
        return left

    def postfix(self) -> Expr:
        e = self.primary()
        while True:
            t = self.tok
            if self.at("."):
                self.advance()
                if self.tok.kind == "int":
                    idx = self.integer()
                    if idx < 1:
                        raise ParseError("tuple index must be positive", t.pos)
                    e = TupleAccess(e, idx, pos=t.pos)
                else:
                    e = FieldAccess(e, self.name().text, pos=t.pos)
            elif self.at("["):
                self.advance()
                idx = self.expr()
                self.expect("]")
                e = Index(e, idx, pos=t.pos)
            elif self.at("is"):
                self.advance()
                e = TagTest(e, self.name().text, pos=t.pos)
            elif self.at("as"):
                self.advance()
                e = TagAccess(e, self.name().text, pos=t.pos)
            else:
                return e

    def primary(self) -> Expr:
        t = self.tok
        if t.kind == "int":
            return IntConst(self.integer(), pos=t.pos)
        if self.at("true", "false"):
            self.advance()
            return BoolConst(t.text == "true", pos=t.pos)
        if t.kind == "name":
            self.advance()
            if self.at("("):
                self.advance()
                inner = self.expr()
                self.expect(")")
                return TagConstruct(t.text, inner, pos=t.pos)
            return Var(t.text, pos=t.pos)
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if self.at("{"):
            self.advance()
            return SetLit(self.expr_list("}"), pos=t.pos)
        if self.at("<"):
            self.advance()
            elems = self.expr_list(">")
            if not elems:
                raise ParseError("empty tuple", t.pos)
            return TupleLit(elems, pos=t.pos)
        raise self.fail({"INT", "true", "false", "NAME", "(", "{", "<", "not"})

    def expr_list(self, close: str) -> tuple[Expr, ...]:
        items = []
        if not self.at(close):
            items.append(self.expr())
            while self.at(","):
                self.advance()
                items.append(self.expr())
        self.expect(close)
        return tuple(items)


def parse_model(text: str) -> SourceModel:
    return Parser(text).model()


def parse_expr(text: str) -> Expr:
    p = Parser(text)
    e = p.expr()
    if p.tok.kind != "eof":
        raise p.fail({"<end of input>"})
    return e


def parse_type(text: str) -> TypeExpr:
    p = Parser(text)
    t = p.type_expr()
    if p.tok.kind != "eof":
        raise p.fail({"<end of input>"})
    return t
