"""Pretty-printer for MiniCC ASTs.

parse(format(a)) is structurally equal to a for every well-formed AST; the
round-trip property is exercised by the test suite.
"""

from __future__ import annotations

from . import ast
from .lexer import escape
from .parser import ADD_OPS, CMP_OPS, MUL_OPS
from .types import ArrayT

# precedence levels used for minimal parenthesization
P_ASSIGN, P_CMP, P_ADD, P_MUL, P_UNARY, P_POSTFIX = 1, 2, 3, 4, 5, 6

BIN_PREC = {**{op: P_CMP for op in CMP_OPS},
            **{op: P_ADD for op in ADD_OPS},
            **{op: P_MUL for op in MUL_OPS}}


def fmt_expr(e, parent_prec: int = 0) -> str:
    if isinstance(e, ast.IntLit):
        return str(e.value)
    if isinstance(e, ast.CharLit):
        return f"'{escape(chr(e.value))}'"
    if isinstance(e, ast.StrLit):
        return f'"{escape(e.value)}"'
    if isinstance(e, ast.Ident):
        return e.name
    if isinstance(e, ast.Assign):
        s = f"{fmt_expr(e.target, P_CMP)} = {fmt_expr(e.value, P_ASSIGN)}"
        return f"({s})" if parent_prec > P_ASSIGN else s
    if isinstance(e, ast.Bin):
        p = BIN_PREC[e.op]
        s = f"{fmt_expr(e.left, p)} {e.op} {fmt_expr(e.right, p + 1)}"
        return f"({s})" if parent_prec > p else s
    if isinstance(e, ast.Unary):
        s = f"{e.op}{fmt_expr(e.operand, P_UNARY)}"
        return f"({s})" if parent_prec > P_UNARY else s
    if isinstance(e, ast.Cast):
        s = f"({e.type}){fmt_expr(e.expr, P_UNARY)}"
        return f"({s})" if parent_prec > P_UNARY else s
    if isinstance(e, ast.Index):
        return f"{fmt_expr(e.base, P_POSTFIX)}[{fmt_expr(e.index)}]"
    if isinstance(e, ast.Field):
        return f"{fmt_expr(e.base, P_POSTFIX)}{'->' if e.arrow else '.'}{e.name}"
    if isinstance(e, ast.Call):
        return f"{e.name}({', '.join(fmt_expr(a) for a in e.args)})"
    if isinstance(e, ast.AllocExpr):
        return f"mm_alloc<{e.elem_type}>({fmt_expr(e.count)})"
    if isinstance(e, ast.FreeExpr):
        return f"mm_free({fmt_expr(e.arg)})"
    if isinstance(e, ast.HintExpr):
        name = "mm_array_checked" if e.array else "mm_checked"
        return f"{name}({fmt_expr(e.arg)})"
    if isinstance(e, ast.MarshalExpr):
        return f"marshal({fmt_expr(e.array)}, {fmt_expr(e.count)})"
    if isinstance(e, ast.UnmarshalExpr):
        return (f"unmarshal({fmt_expr(e.thin)}, {fmt_expr(e.orig)}, "
                f"{fmt_expr(e.count)})")
    raise TypeError(f"unknown expr {e!r}")


def fmt_stmt(s, indent: int = 0) -> str:
    pad = "    " * indent
    if isinstance(s, ast.Block):
        inner = "".join(fmt_stmt(x, indent + 1) for x in s.stmts)
        return f"{pad}{{\n{inner}{pad}}}\n"
    if isinstance(s, ast.DeclStmt):
        if s.vla_size is not None:
            return f"{pad}{s.type.elem} {s.name}[{fmt_expr(s.vla_size)}];\n"
        if isinstance(s.type, ArrayT):
            return f"{pad}{s.type.elem} {s.name}[{s.type.length}];\n"
        init = f" = {fmt_expr(s.init)}" if s.init is not None else ""
        return f"{pad}{s.type} {s.name}{init};\n"
    if isinstance(s, ast.If):
        out = f"{pad}if ({fmt_expr(s.cond)})\n{fmt_substmt(s.then, indent)}"
        if s.els is not None:
            out += f"{pad}else\n{fmt_substmt(s.els, indent)}"
        return out
    if isinstance(s, ast.While):
        return f"{pad}while ({fmt_expr(s.cond)})\n{fmt_substmt(s.body, indent)}"
    if isinstance(s, ast.Return):
        if s.value is None:
            return f"{pad}return;\n"
        return f"{pad}return {fmt_expr(s.value)};\n"
    if isinstance(s, ast.ExprStmt):
        return f"{pad}{fmt_expr(s.expr)};\n"
    raise TypeError(f"unknown stmt {s!r}")


def fmt_substmt(s, indent: int) -> str:
    if isinstance(s, ast.Block):
        return fmt_stmt(s, indent)
    return fmt_stmt(s, indent + 1)


def format_program(prog: ast.Program) -> str:
    parts = []
    for sd in prog.structs:
        fields = "".join(
            f"    {ft.elem} {fn}[{ft.length}];\n" if isinstance(ft, ArrayT)
            else f"    {ft} {fn};\n"
            for fn, ft in sd.fields)
        parts.append(f"struct {sd.name} {{\n{fields}}};\n")
    for g in prog.globals:
        if isinstance(g.type, ArrayT):
            parts.append(f"{g.type.elem} {g.name}[{g.type.length}];\n")
        else:
            init = f" = {fmt_expr(g.init)}" if g.init is not None else ""
            parts.append(f"{g.type} {g.name}{init};\n")
    for f in prog.funcs:
        qual = "unchecked " if f.unchecked else ""
        params = ", ".join(f"{t} {n}" for n, t in f.params)
        parts.append(f"{qual}{f.ret} {f.name}({params})\n{fmt_stmt(f.body)}")
    return "\n".join(parts)
