"""Recursive-descent parser for MiniCC."""

from __future__ import annotations

from . import ast
from .lexer import Span, Token, tokenize, unescape
from .types import (ArrayT, CHAR, INT, MmArrayPtrT, MmPtrT, RawPtrT, StructT,
                    Type, VOID)


class SyntaxError_(Exception):
    def __init__(self, msg: str, span: Span, expected: set[str] | None = None):
        super().__init__(f"{span}: syntax error: {msg}")
        self.msg = msg
        self.span = span
        self.expected = expected or set()


TYPE_STARTERS = {"int", "char", "void", "struct", "mm_ptr", "mm_array_ptr"}

CMP_OPS = {"==", "!=", "<", "<=", ">", ">="}
ADD_OPS = {"+", "-"}
MUL_OPS = {"*", "/", "%"}


class Parser:
    def __init__(self, toks: list[Token]):
        self.toks = toks
        self.pos = 0

    # -- token helpers --

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, lexeme: str) -> bool:
        t = self.peek()
        return t.lexeme == lexeme and t.kind in ("kw", "punct")

    def accept(self, lexeme: str) -> Token | None:
        if self.at(lexeme):
            t = self.peek()
            self.pos += 1
            return t
        return None

    def expect(self, lexeme: str) -> Token:
        t = self.accept(lexeme)
        if t is None:
            got = self.peek()
            raise SyntaxError_(f"expected {lexeme!r}, got {got.lexeme!r}",
                               got.span, {lexeme})
        return t

    def expect_ident(self) -> Token:
        t = self.peek()
        if t.kind != "ident":
            raise SyntaxError_(f"expected identifier, got {t.lexeme!r}", t.span,
                               {"identifier"})
        self.pos += 1
        return t

    # -- types --

    def at_type(self) -> bool:
        t = self.peek()
        return t.kind == "kw" and t.lexeme in TYPE_STARTERS

    def parse_type(self) -> Type:
        t = self.peek()
        if self.accept("int"):
            base: Type = INT
        elif self.accept("char"):
            base = CHAR
        elif self.accept("void"):
            base = VOID
        elif self.accept("struct"):
            base = StructT(self.expect_ident().lexeme)
        elif self.accept("mm_ptr"):
            self.expect("<")
            base = MmPtrT(self.parse_type())
            self.expect(">")
        elif self.accept("mm_array_ptr"):
            self.expect("<")
            base = MmArrayPtrT(self.parse_type())
            self.expect(">")
        else:
            raise SyntaxError_(f"expected type, got {t.lexeme!r}", t.span, TYPE_STARTERS)
        while self.accept("*"):
            base = RawPtrT(base)
        return base

    # -- program --

    def parse_program(self) -> ast.Program:
        prog = ast.Program()
        while self.peek().kind != "eof":
            if self.at("struct") and self.peek(2).lexeme == "{":
                prog.structs.append(self.parse_struct())
            else:
                self.parse_top_decl(prog)
        return prog

    def parse_struct(self) -> ast.StructDecl:
        sp = self.peek().span
        self.expect("struct")
        name = self.expect_ident().lexeme
        self.expect("{")
        fields = []
        while not self.accept("}"):
            ft = self.parse_type()
            fname = self.expect_ident().lexeme
            if self.accept("["):
                n = int(self.expect_int().lexeme)
                self.expect("]")
                ft = ArrayT(ft, n)
            self.expect(";")
            fields.append((fname, ft))
        self.expect(";")
        return ast.StructDecl(sp, name, fields)

    def expect_int(self) -> Token:
        t = self.peek()
        if t.kind != "int":
            raise SyntaxError_(f"expected integer, got {t.lexeme!r}", t.span,
                               {"integer"})
        self.pos += 1
        return t

    def parse_top_decl(self, prog: ast.Program):
        sp = self.peek().span
        unchecked = self.accept("unchecked") is not None
        ty = self.parse_type()
        name = self.expect_ident().lexeme
        if self.at("("):
            prog.funcs.append(self.parse_func(sp, ty, name, unchecked))
            return
        if unchecked:
            raise SyntaxError_("'unchecked' applies to functions only", sp)
        if self.accept("["):
            n = int(self.expect_int().lexeme)
            self.expect("]")
            ty = ArrayT(ty, n)
        init = None
        if self.accept("="):
            init = self.parse_expr()
        self.expect(";")
        prog.globals.append(ast.GlobalDecl(sp, name, ty, init))

    def parse_func(self, sp: Span, ret: Type, name: str, unchecked: bool) -> ast.FuncDecl:
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                pt = self.parse_type()
                pn = self.expect_ident().lexeme
                params.append((pn, pt))
                if not self.accept(","):
                    break
        self.expect(")")
        body = self.parse_block()
        return ast.FuncDecl(sp, name, ret, params, body, unchecked)

    # -- statements --

    def parse_block(self) -> ast.Block:
        sp = self.expect("{").span
        stmts = []
        while not self.accept("}"):
            stmts.append(self.parse_stmt())
        return ast.Block(sp, stmts)

    def parse_stmt(self):
        t = self.peek()
        if self.at("{"):
            return self.parse_block()
        if self.at("if"):
            sp = self.expect("if").span
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            then = self.parse_stmt()
            els = self.parse_stmt() if self.accept("else") else None
            return ast.If(sp, cond, then, els)
        if self.at("while"):
            sp = self.expect("while").span
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            return ast.While(sp, cond, self.parse_stmt())
        if self.at("return"):
            sp = self.expect("return").span
            val = None if self.at(";") else self.parse_expr()
            self.expect(";")
            return ast.Return(sp, val)
        if self.at_type() and not self.at("void"):
            return self.parse_decl_stmt()
        sp = t.span
        e = self.parse_expr()
        self.expect(";")
        return ast.ExprStmt(sp, e)

    def parse_decl_stmt(self) -> ast.DeclStmt:
        sp = self.peek().span
        ty = self.parse_type()
        name = self.expect_ident().lexeme
        vla_size = None
        if self.accept("["):
            if self.peek().kind == "int" and self.peek(1).lexeme == "]":
                ty = ArrayT(ty, int(self.expect_int().lexeme))
            else:
                vla_size = self.parse_expr()
                ty = ArrayT(ty, 0)  # length resolved at runtime
            self.expect("]")
        init = None
        if self.accept("="):
            init = self.parse_expr()
        self.expect(";")
        return ast.DeclStmt(sp, name, ty, vla_size, init)

    # -- expressions (C precedence: postfix > unary > mul > add > cmp > assign) --

    def parse_expr(self):
        return self.parse_assign()

    def parse_assign(self):
        lhs = self.parse_cmp()
        if self.at("="):
            sp = self.expect("=").span
            rhs = self.parse_assign()
            return ast.Assign(sp, lhs, rhs)
        return lhs

    def parse_cmp(self):
        e = self.parse_add()
        while self.peek().kind == "punct" and self.peek().lexeme in CMP_OPS:
            op = self.peek().lexeme
            sp = self.expect(op).span
            e = ast.Bin(sp, op, e, self.parse_add())
        return e

    def parse_add(self):
        e = self.parse_mul()
        while self.peek().kind == "punct" and self.peek().lexeme in ADD_OPS:
            op = self.peek().lexeme
            sp = self.expect(op).span
            e = ast.Bin(sp, op, e, self.parse_mul())
        return e

    def parse_mul(self):
        e = self.parse_unary()
        while self.peek().kind == "punct" and self.peek().lexeme in MUL_OPS:
            op = self.peek().lexeme
            sp = self.expect(op).span
            e = ast.Bin(sp, op, e, self.parse_unary())
        return e

    def parse_unary(self):
        t = self.peek()
        if t.kind == "punct" and t.lexeme in ("*", "&", "-", "!"):
            sp = self.expect(t.lexeme).span
            return ast.Unary(sp, t.lexeme, self.parse_unary())
        if self.at("(") and self.peek(1).kind == "kw" and self.peek(1).lexeme in TYPE_STARTERS:
            sp = self.expect("(").span
            ty = self.parse_type()
            self.expect(")")
            return ast.Cast(sp, ty, self.parse_unary())
        return self.parse_postfix()

    def parse_postfix(self):
        e = self.parse_primary()
        while True:
            if self.at("["):
                sp = self.expect("[").span
                idx = self.parse_expr()
                self.expect("]")
                e = ast.Index(sp, e, idx)
            elif self.at("."):
                sp = self.expect(".").span
                e = ast.Field(sp, e, self.expect_ident().lexeme, False)
            elif self.at("->"):
                sp = self.expect("->").span
                e = ast.Field(sp, e, self.expect_ident().lexeme, True)
            else:
                return e

    def parse_primary(self):
        t = self.peek()
        if t.kind == "int":
            self.pos += 1
            return ast.IntLit(t.span, int(t.lexeme))
        if t.kind == "char":
            self.pos += 1
            body = unescape(t.lexeme)
            if len(body) != 1:
                raise SyntaxError_("char literal must hold one character", t.span)
            return ast.CharLit(t.span, ord(body))
        if t.kind == "str":
            self.pos += 1
            return ast.StrLit(t.span, unescape(t.lexeme))
        if self.at("("):
            self.expect("(")
            e = self.parse_expr()
            self.expect(")")
            return e
        if self.at("mm_alloc"):
            sp = self.expect("mm_alloc").span
            self.expect("<")
            ty = self.parse_type()
            self.expect(">")
            self.expect("(")
            count = self.parse_expr()
            self.expect(")")
            return ast.AllocExpr(sp, ty, count)
        if self.at("mm_free"):
            sp = self.expect("mm_free").span
            self.expect("(")
            arg = self.parse_expr()
            self.expect(")")
            return ast.FreeExpr(sp, arg)
        if self.at("mm_checked") or self.at("mm_array_checked"):
            array = self.at("mm_array_checked")
            sp = self.expect(t.lexeme).span
            self.expect("(")
            arg = self.parse_expr()
            self.expect(")")
            return ast.HintExpr(sp, arg, array)
        if self.at("marshal"):
            sp = self.expect("marshal").span
            self.expect("(")
            arr = self.parse_expr()
            self.expect(",")
            count = self.parse_expr()
            self.expect(")")
            return ast.MarshalExpr(sp, arr, count)
        if self.at("unmarshal"):
            sp = self.expect("unmarshal").span
            self.expect("(")
            thin = self.parse_expr()
            self.expect(",")
            orig = self.parse_expr()
            self.expect(",")
            count = self.parse_expr()
            self.expect(")")
            return ast.UnmarshalExpr(sp, thin, orig, count)
        if t.kind == "ident":
            self.pos += 1
            if self.at("("):
                self.expect("(")
                args = []
                if not self.at(")"):
                    while True:
                        args.append(self.parse_expr())
                        if not self.accept(","):
                            break
                self.expect(")")
                return ast.Call(t.span, t.lexeme, args)
            return ast.Ident(t.span, t.lexeme)
        raise SyntaxError_(f"unexpected token {t.lexeme!r}", t.span)


def parse(src: str) -> ast.Program:
    return Parser(tokenize(src)).parse_program()
