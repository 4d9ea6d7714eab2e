"""AST node definitions for MiniCC."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .lexer import Span
from .types import Type


@dataclass
class Node:
    span: Span


# ---- expressions ----

@dataclass
class IntLit(Node):
    value: int


@dataclass
class CharLit(Node):
    value: int


@dataclass
class StrLit(Node):
    value: str


@dataclass
class Ident(Node):
    name: str


@dataclass
class Unary(Node):
    op: str  # '*' '&' '-' '!'
    operand: "Expr"


@dataclass
class Bin(Node):
    op: str
    left: "Expr"
    right: "Expr"


@dataclass
class Assign(Node):
    target: "Expr"
    value: "Expr"


@dataclass
class Index(Node):
    base: "Expr"
    index: "Expr"


@dataclass
class Field(Node):
    base: "Expr"
    name: str
    arrow: bool


@dataclass
class Call(Node):
    name: str
    args: list


@dataclass
class Cast(Node):
    type: Type
    expr: "Expr"


@dataclass
class AllocExpr(Node):
    elem_type: Type
    count: "Expr"


@dataclass
class FreeExpr(Node):
    arg: "Expr"


@dataclass
class HintExpr(Node):
    arg: "Expr"
    array: bool  # mm_array_checked vs mm_checked


@dataclass
class MarshalExpr(Node):
    array: "Expr"
    count: "Expr"


@dataclass
class UnmarshalExpr(Node):
    thin: "Expr"
    orig: "Expr"
    count: "Expr"


Expr = (IntLit, CharLit, StrLit, Ident, Unary, Bin, Assign, Index, Field, Call,
        Cast, AllocExpr, FreeExpr, HintExpr, MarshalExpr, UnmarshalExpr)


# ---- statements ----

@dataclass
class Block(Node):
    stmts: list


@dataclass
class DeclStmt(Node):
    name: str
    type: Type
    vla_size: Optional["Expr"]  # non-None for variable-length arrays
    init: Optional["Expr"]


@dataclass
class If(Node):
    cond: "Expr"
    then: "Stmt"
    els: Optional["Stmt"]


@dataclass
class While(Node):
    cond: "Expr"
    body: "Stmt"


@dataclass
class Return(Node):
    value: Optional["Expr"]


@dataclass
class ExprStmt(Node):
    expr: "Expr"


Stmt = (Block, DeclStmt, If, While, Return, ExprStmt)


# ---- declarations ----

@dataclass
class StructDecl(Node):
    name: str
    fields: list  # [(name, Type)]


@dataclass
class GlobalDecl(Node):
    name: str
    type: Type
    init: Optional["Expr"]


@dataclass
class FuncDecl(Node):
    name: str
    ret: Type
    params: list  # [(name, Type)]
    body: Block
    unchecked: bool


@dataclass
class Program:
    structs: list = field(default_factory=list)
    globals: list = field(default_factory=list)
    funcs: list = field(default_factory=list)


def ast_equal(a, b) -> bool:
    """Structural equality ignoring spans."""
    if type(a) is not type(b):
        return False
    if isinstance(a, list):
        return len(a) == len(b) and all(ast_equal(x, y) for x, y in zip(a, b))
    if isinstance(a, tuple):
        return len(a) == len(b) and all(ast_equal(x, y) for x, y in zip(a, b))
    if isinstance(a, (Node, Program)):
        for f in a.__dataclass_fields__:
            if f == "span":
                continue
            if not ast_equal(getattr(a, f), getattr(b, f)):
                return False
        return True
    return a == b
