"""Compile pipeline: source text -> typed AST -> TIR, per backend."""

from __future__ import annotations

import json
from dataclasses import dataclass

from . import checkopt, lexer, parser, typecheck
from .lower import lower_program
from .tir import MetaLayout, TirProgram
from .vm import RunResult, VmConfig, run_program


@dataclass
class Diagnostic:
    line: int
    col: int
    kind: str
    msg: str
    file: str = "<input>"

    def render(self) -> str:
        return f"{self.file}:{self.line}:{self.col}: {self.kind}: {self.msg}"

    def to_dict(self) -> dict:
        return {"file": self.file, "line": self.line, "col": self.col,
                "kind": self.kind, "msg": self.msg}


class CompileError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(d.render() for d in diagnostics))

    def render(self, as_json: bool = False, file: str = "<input>") -> str:
        for d in self.diagnostics:
            d.file = file
        if as_json:
            return json.dumps([d.to_dict() for d in self.diagnostics], indent=2)
        return "\n".join(d.render() for d in self.diagnostics)


def fat_width_for(backend: str) -> int:
    return 16 if backend == "inplace" else 8


def compile_source(src: str, backend: str = "inplace", key_bits: int = 32,
                   opt_checks: bool = True) -> TirProgram:
    try:
        prog_ast = parser.parse(src)
    except lexer.LexError as e:
        raise CompileError([Diagnostic(e.span.line, e.span.col, "lex error",
                                       e.msg)]) from e
    except parser.SyntaxError_ as e:
        raise CompileError([Diagnostic(e.span.line, e.span.col, "syntax error",
                                       e.msg)]) from e
    tp = typecheck.check_program(prog_ast)
    if tp.errors:
        diags = [Diagnostic(e.span.line, e.span.col, e.kind, e.msg)
                 for e in tp.errors]
        raise CompileError(diags)
    prog = lower_program(tp, layout=MetaLayout(key_bits),
                         fat_width=fat_width_for(backend))
    if opt_checks and backend != "unchecked":
        prog = checkopt.optimize_checks(prog)
    return prog


def compile_and_run(src: str, cfg: VmConfig, guest_input=()) -> RunResult:
    prog = compile_source(src, backend=cfg.backend, key_bits=cfg.key_bits,
                          opt_checks=cfg.opt_checks)
    return run_program(prog, cfg, guest_input)
