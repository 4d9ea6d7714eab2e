"""Name resolution, type assignment, and checked-pointer discipline.

Rules enforced here:
  - a raw pointer value never flows into a checked pointer
  - checked->raw flows are legal only inside `unchecked` functions
  - nested fat-vs-thin pointee mismatches are always incompatible
  - pointer arithmetic is legal on mm_array_ptr and raw pointers, never mm_ptr
  - mm_free takes only checked pointers
  - arguments smuggling fat pointers beneath a raw pointer must come from
    marshal(...)
  - mm_checked/mm_array_checked may appear only in unchecked functions

Address-of and mm_alloc results are typed bidirectionally (one level deep)
from the destination; locals whose address escapes into a checked pointer
are recorded so the lowering pass can place them in the locked frame region.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import ast
from .lexer import Span
from .types import (ArrayT, CHAR, CharT, INT, IntT, MmArrayPtrT, MmPtrT,
                    RawPtrT, StructInfo, StructT, Type, VOID, VoidT,
                    contains_fat_below_raw, is_fat, is_pointer)


@dataclass
class TypeError_:
    kind: str  # RawToChecked | IncompatiblePointee | MarshalRequired |
               # CheckedOpInCheckedFn | ArithOnMmPtr | BadFree | UnknownName |
               # NotAnLvalue | Other
    span: Span
    msg: str

    def render(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.span.line}:{self.span.col}: {self.kind}: {self.msg}"


@dataclass
class GlobalInfo:
    name: str
    type: Type
    init: object
    address_taken: bool = False  # address escapes into a checked pointer


@dataclass
class FuncInfo:
    decl: ast.FuncDecl
    locals: dict = field(default_factory=dict)  # name -> Type (params included)
    params: list = field(default_factory=list)
    addr_taken_checked: set = field(default_factory=set)
    addr_taken_raw: set = field(default_factory=set)
    vlas: set = field(default_factory=set)

    @property
    def unchecked(self):
        return self.decl.unchecked


@dataclass
class TypedProgram:
    program: ast.Program
    structs: dict
    globals: dict
    funcs: dict
    errors: list


BUILTINS = {
    "print_int": ([INT], VOID),
    "print_str": (None, VOID),  # any char pointer
    "read_int": ([], INT),
}


def assignable(dst: Type, src: Type, ctx: str) -> bool:
    """Pure flow predicate; ctx is 'checked' or 'unchecked'."""
    if dst == src:
        return True
    if isinstance(dst, IntT) and isinstance(src, CharT):
        return True
    # checked -> raw of the identical pointee, unchecked context only
    if (isinstance(dst, RawPtrT) and isinstance(src, (MmPtrT, MmArrayPtrT))
            and ctx == "unchecked" and dst.pointee == src.pointee):
        return True
    return False


class Checker:
    def __init__(self, prog: ast.Program):
        self.prog = prog
        self.errors: list[TypeError_] = []
        self.structs: dict[str, StructInfo] = {}
        self.globals: dict[str, GlobalInfo] = {}
        self.funcs: dict[str, FuncInfo] = {}
        self.cur: FuncInfo | None = None

    def err(self, kind: str, span: Span, msg: str):
        self.errors.append(TypeError_(kind, span, msg))

    @property
    def ctx(self) -> str:
        return "unchecked" if self.cur and self.cur.unchecked else "checked"

    # -- entry --

    def run(self) -> TypedProgram:
        for sd in self.prog.structs:
            if sd.name in self.structs:
                self.err("Other", sd.span, f"duplicate struct {sd.name}")
            self.structs[sd.name] = StructInfo(sd.name, sd.fields)
        for g in self.prog.globals:
            if g.name in self.globals:
                self.err("Other", g.span, f"duplicate global {g.name}")
            self.globals[g.name] = GlobalInfo(g.name, g.type, g.init)
        for f in self.prog.funcs:
            if f.name in self.funcs or f.name in BUILTINS:
                self.err("Other", f.span, f"duplicate function {f.name}")
            self.funcs[f.name] = FuncInfo(f)
        for fi in self.funcs.values():
            self.check_func(fi)
        return TypedProgram(self.prog, self.structs, self.globals, self.funcs,
                            self.errors)

    def check_func(self, fi: FuncInfo):
        self.cur = fi
        for pname, pt in fi.decl.params:
            if pname in fi.locals:
                self.err("Other", fi.decl.span, f"duplicate parameter {pname}")
            fi.locals[pname] = pt
            fi.params.append((pname, pt))
        self.check_stmt(fi.decl.body)
        self.cur = None

    # -- statements --

    def check_stmt(self, s):
        fi = self.cur
        if isinstance(s, ast.Block):
            for x in s.stmts:
                self.check_stmt(x)
        elif isinstance(s, ast.DeclStmt):
            if s.name in fi.locals:
                self.err("Other", s.span, f"duplicate local {s.name}")
            fi.locals[s.name] = s.type
            if s.vla_size is not None:
                fi.vlas.add(s.name)
                nt = self.check_expr(s.vla_size)
                if not isinstance(nt, (IntT, CharT)):
                    self.err("Other", s.span, "VLA size must be an integer")
            if s.init is not None:
                vt = self.check_expr(s.init, expected=s.type)
                self.check_flow(s.type, vt, s.init, s.span)
        elif isinstance(s, ast.If):
            self.check_expr(s.cond)
            self.check_stmt(s.then)
            if s.els is not None:
                self.check_stmt(s.els)
        elif isinstance(s, ast.While):
            self.check_expr(s.cond)
            self.check_stmt(s.body)
        elif isinstance(s, ast.Return):
            rt = fi.decl.ret
            if s.value is None:
                if not isinstance(rt, VoidT):
                    self.err("Other", s.span, "missing return value")
            else:
                vt = self.check_expr(s.value, expected=rt)
                self.check_flow(rt, vt, s.value, s.span)
        elif isinstance(s, ast.ExprStmt):
            self.check_expr(s.expr)
        else:
            raise TypeError(f"unknown stmt {s!r}")

    def check_flow(self, dst: Type, src: Type, value_expr, span: Span):
        if src == VOID or dst == VOID:
            self.err("Other", span, "void value in assignment")
            return
        if assignable(dst, src, self.ctx):
            return
        if is_fat(dst) and isinstance(src, RawPtrT):
            self.err("RawToChecked", span,
                     f"cannot assign raw pointer {src} to checked {dst}")
        elif isinstance(dst, RawPtrT) and is_fat(src):
            if dst.pointee != src.pointee:
                self.err("IncompatiblePointee", span,
                         f"pointee mismatch: {dst} vs {src}")
            else:
                self.err("CheckedOpInCheckedFn", span,
                         "checked-to-raw flow is only legal in unchecked functions")
        elif is_pointer(dst) and is_pointer(src):
            self.err("IncompatiblePointee", span,
                     f"incompatible pointer types: {dst} vs {src}")
        else:
            self.err("Other", span, f"cannot assign {src} to {dst}")

    # -- expressions --

    def check_expr(self, e, expected: Type | None = None) -> Type:
        t = self._expr(e, expected)
        e.ty = t
        return t

    def _expr(self, e, expected) -> Type:
        fi = self.cur
        if isinstance(e, ast.IntLit):
            if e.value == 0 and expected is not None and is_pointer(expected):
                return expected  # null literal
            return INT
        if isinstance(e, ast.CharLit):
            return CHAR
        if isinstance(e, ast.StrLit):
            return MmArrayPtrT(CHAR) if self.ctx == "checked" else RawPtrT(CHAR)
        if isinstance(e, ast.Ident):
            if e.name in fi.locals:
                e.sym = ("local", e.name)
                t = fi.locals[e.name]
            elif e.name in self.globals:
                e.sym = ("global", e.name)
                t = self.globals[e.name].type
            else:
                self.err("UnknownName", e.span, f"unknown name {e.name}")
                e.sym = ("local", e.name)
                return INT
            if isinstance(t, ArrayT) and expected is not None and is_pointer(expected):
                return self.decay(e, t, expected)
            return t
        if isinstance(e, ast.Unary):
            if e.op == "*":
                t = self.check_expr(e.operand)
                if not is_pointer(t):
                    self.err("Other", e.span, f"cannot dereference {t}")
                    return INT
                return t.pointee
            if e.op == "&":
                return self.addr_of(e.operand, e.span, expected)
            t = self.check_expr(e.operand)
            if not isinstance(t, (IntT, CharT)):
                self.err("Other", e.span, f"unary {e.op} needs an integer")
            return INT
        if isinstance(e, ast.Bin):
            return self.check_bin(e, expected)
        if isinstance(e, ast.Assign):
            t = self.check_expr(e.target)
            self.require_lvalue(e.target)
            vt = self.check_expr(e.value, expected=t)
            self.check_flow(t, vt, e.value, e.span)
            return t
        if isinstance(e, ast.Index):
            bt = self.check_expr(e.base)
            it = self.check_expr(e.index)
            if not isinstance(it, (IntT, CharT)):
                self.err("Other", e.span, "index must be an integer")
            if isinstance(bt, (MmArrayPtrT, RawPtrT)):
                return bt.pointee
            if isinstance(bt, ArrayT):
                return bt.elem
            if isinstance(bt, MmPtrT):
                self.err("ArithOnMmPtr", e.span,
                         "mm_ptr cannot be indexed; use mm_array_ptr")
                return bt.pointee
            self.err("Other", e.span, f"cannot index {bt}")
            return INT
        if isinstance(e, ast.Field):
            bt = self.check_expr(e.base)
            if e.arrow:
                if not (is_pointer(bt) and isinstance(bt.pointee, StructT)):
                    self.err("Other", e.span, f"-> needs a pointer to struct, got {bt}")
                    return INT
                sname = bt.pointee.name
            else:
                if not isinstance(bt, StructT):
                    self.err("Other", e.span, f". needs a struct, got {bt}")
                    return INT
                sname = bt.name
            if sname not in self.structs:
                self.err("UnknownName", e.span, f"unknown struct {sname}")
                return INT
            for fname, ft in self.structs[sname].fields:
                if fname == e.name:
                    return ft
            self.err("UnknownName", e.span, f"struct {sname} has no field {e.name}")
            return INT
        if isinstance(e, ast.Call):
            return self.check_call(e)
        if isinstance(e, ast.Cast):
            return self.check_cast(e)
        if isinstance(e, ast.AllocExpr):
            nt = self.check_expr(e.count)
            if not isinstance(nt, (IntT, CharT)):
                self.err("Other", e.span, "mm_alloc count must be an integer")
            if isinstance(expected, MmPtrT) and expected.pointee == e.elem_type:
                return expected
            return MmArrayPtrT(e.elem_type)
        if isinstance(e, ast.FreeExpr):
            t = self.check_expr(e.arg)
            if not is_fat(t):
                self.err("BadFree", e.span,
                         f"mm_free takes a checked pointer, got {t}")
            return VOID
        if isinstance(e, ast.HintExpr):
            if self.ctx == "checked":
                self.err("CheckedOpInCheckedFn", e.span,
                         "mm_checked hints are only allowed in unchecked functions")
            t = self.check_expr(e.arg)
            want_array = isinstance(t, MmArrayPtrT)
            if not is_fat(t):
                self.err("Other", e.span, "hint argument must be a checked pointer")
            elif e.array != want_array:
                self.err("Other", e.span, "hint kind does not match pointer kind")
            return t
        if isinstance(e, ast.MarshalExpr):
            at = self.check_expr(e.array)
            nt = self.check_expr(e.count)
            if not isinstance(nt, (IntT, CharT)):
                self.err("Other", e.span, "marshal count must be an integer")
            if isinstance(at, MmArrayPtrT) and isinstance(at.pointee, MmPtrT):
                return RawPtrT(RawPtrT(at.pointee.pointee))
            self.err("Other", e.span,
                     f"marshal needs mm_array_ptr<mm_ptr<T>>, got {at}")
            return RawPtrT(RawPtrT(INT))
        if isinstance(e, ast.UnmarshalExpr):
            tt = self.check_expr(e.thin)
            ot = self.check_expr(e.orig)
            nt = self.check_expr(e.count)
            if not isinstance(nt, (IntT, CharT)):
                self.err("Other", e.span, "unmarshal count must be an integer")
            if not (isinstance(tt, RawPtrT) and isinstance(tt.pointee, RawPtrT)):
                self.err("Other", e.span, f"unmarshal thin argument has type {tt}")
            if isinstance(ot, MmArrayPtrT) and isinstance(ot.pointee, MmPtrT):
                return ot
            self.err("Other", e.span,
                     f"unmarshal needs mm_array_ptr<mm_ptr<T>>, got {ot}")
            return ot if is_fat(ot) else MmArrayPtrT(MmPtrT(INT))
        raise TypeError(f"unknown expr {e!r}")

    def check_bin(self, e: ast.Bin, expected) -> Type:
        from .parser import CMP_OPS
        lt = self.check_expr(e.left)
        if e.op in CMP_OPS:
            rt = self.check_expr(e.right, expected=lt if is_pointer(lt) else None)
            if is_pointer(lt) or is_pointer(rt):
                # raw-address comparison; metadata is not identity
                okl = is_pointer(lt) or lt == INT
                okr = is_pointer(rt) or rt == INT
                if not (okl and okr):
                    self.err("Other", e.span, f"cannot compare {lt} and {rt}")
            return INT
        # arithmetic
        if is_pointer(lt) or isinstance(lt, ArrayT):
            if isinstance(lt, ArrayT):
                lt = self.decay(e.left, lt, expected if (expected is not None and is_pointer(expected)) else None)
                e.left.ty = lt
            rt = self.check_expr(e.right)
            if isinstance(lt, MmPtrT):
                self.err("ArithOnMmPtr", e.span,
                         "mm_ptr cannot be used in pointer arithmetic")
                return lt
            if e.op not in ("+", "-"):
                self.err("Other", e.span, f"operator {e.op} undefined on pointers")
            if not isinstance(rt, (IntT, CharT)):
                self.err("Other", e.span, "pointer arithmetic needs an integer")
            return lt
        rt = self.check_expr(e.right)
        if not isinstance(lt, (IntT, CharT)) or not isinstance(rt, (IntT, CharT)):
            self.err("Other", e.span, f"arithmetic on {lt} and {rt}")
        return INT

    def decay(self, e: ast.Ident | ast.Node, t: ArrayT, expected) -> Type:
        """Array-to-pointer decay; checked-ness follows the destination."""
        root = self.lvalue_root(e)
        if expected is not None and isinstance(expected, (MmArrayPtrT, MmPtrT)) \
                and expected.pointee == t.elem:
            self.mark_addr_taken(root, checked=True)
            return MmArrayPtrT(t.elem)
        self.mark_addr_taken(root, checked=False)
        return RawPtrT(t.elem)

    def lvalue_root(self, e):
        """The named local/global whose storage an lvalue denotes, if any."""
        if isinstance(e, ast.Ident):
            return e
        if isinstance(e, ast.Field) and not e.arrow:
            return self.lvalue_root(e.base)
        if isinstance(e, ast.Index) and isinstance(getattr(e.base, "ty", None), ArrayT):
            return self.lvalue_root(e.base)
        return None

    def mark_addr_taken(self, root, checked: bool):
        if root is None or not isinstance(root, ast.Ident):
            return
        sym = getattr(root, "sym", None)
        if sym is None:
            return
        kind, name = sym
        if kind == "local":
            if checked:
                self.cur.addr_taken_checked.add(name)
            else:
                self.cur.addr_taken_raw.add(name)
        elif kind == "global" and checked:
            self.globals[name].address_taken = True

    def addr_of(self, base, span: Span, expected) -> Type:
        t = self.check_expr(base)
        self.require_lvalue(base)
        if isinstance(base, ast.Field) and base.arrow:
            pt = base.base.ty
            inner = t
            if is_fat(pt):
                return MmPtrT(inner)
            return RawPtrT(inner)
        if isinstance(base, ast.Index):
            bt = base.base.ty
            if isinstance(bt, MmArrayPtrT):
                return MmPtrT(bt.pointee)
            if isinstance(bt, RawPtrT):
                return RawPtrT(bt.pointee)
            if isinstance(bt, ArrayT):
                return self._addr_of_named(base, bt.elem, expected)
        if isinstance(base, ast.Unary) and base.op == "*":
            pt = base.operand.ty
            if is_fat(pt):
                return MmPtrT(t)
            return RawPtrT(t)
        if isinstance(base, (ast.Ident, ast.Field)):
            return self._addr_of_named(base, t, expected)
        self.err("NotAnLvalue", span, "cannot take the address of this expression")
        return RawPtrT(t)

    def _addr_of_named(self, base, t: Type, expected) -> Type:
        """&local / &global / &local.f / &local_arr[i]: destination decides
        checked-ness; ambiguous uses default to raw."""
        root = self.lvalue_root(base)
        if expected is not None and isinstance(expected, MmPtrT) and expected.pointee == t:
            self.mark_addr_taken(root, checked=True)
            return MmPtrT(t)
        self.mark_addr_taken(root, checked=False)
        return RawPtrT(t)

    def require_lvalue(self, e):
        if isinstance(e, (ast.Ident, ast.Index, ast.Field)):
            return
        if isinstance(e, ast.Unary) and e.op == "*":
            return
        self.err("NotAnLvalue", e.span, "expression is not an lvalue")

    def check_call(self, e: ast.Call) -> Type:
        if e.name in BUILTINS:
            sig, ret = BUILTINS[e.name]
            if e.name == "print_str":
                if len(e.args) != 1:
                    self.err("Other", e.span, "print_str takes one argument")
                else:
                    t = self.check_expr(e.args[0])
                    if not (is_pointer(t) and isinstance(t.pointee, CharT)):
                        self.err("Other", e.span, f"print_str needs a char pointer, got {t}")
                return ret
            if len(e.args) != len(sig):
                self.err("Other", e.span, f"{e.name} takes {len(sig)} argument(s)")
                return ret
            for a, pt in zip(e.args, sig):
                at = self.check_expr(a, expected=pt)
                self.check_flow(pt, at, a, a.span)
            return ret
        if e.name not in self.funcs:
            self.err("UnknownName", e.span, f"unknown function {e.name}")
            for a in e.args:
                self.check_expr(a)
            return INT
        fi = self.funcs[e.name]
        if len(e.args) != len(fi.params):
            self.err("Other", e.span,
                     f"{e.name} takes {len(fi.params)} argument(s), got {len(e.args)}")
        for a, (pn, pt) in zip(e.args, fi.params):
            at = self.check_expr(a, expected=pt)
            if contains_fat_below_raw(at, self.structs) and \
                    not isinstance(a, ast.MarshalExpr):
                self.err("MarshalRequired", a.span,
                         "fat pointers beneath a raw pointer must be marshalled")
                continue
            self.check_flow(pt, at, a, a.span)
        return fi.decl.ret

    def check_cast(self, e: ast.Cast) -> Type:
        st = self.check_expr(e.expr, expected=e.type)
        dt = e.type
        if st == dt:
            return dt
        if isinstance(dt, (IntT, CharT)) and isinstance(st, (IntT, CharT)):
            return dt
        if is_fat(dt) and isinstance(st, RawPtrT):
            self.err("RawToChecked", e.span,
                     "casting a raw pointer to a checked pointer is prohibited")
            return dt
        if isinstance(dt, RawPtrT) and is_fat(st):
            if self.ctx != "unchecked":
                self.err("CheckedOpInCheckedFn", e.span,
                         "checked-to-raw casts are only legal in unchecked functions")
            elif dt.pointee != st.pointee:
                self.err("IncompatiblePointee", e.span,
                         f"pointee mismatch in cast: {dt} vs {st}")
            return dt
        if isinstance(dt, RawPtrT) and isinstance(st, RawPtrT):
            if self.ctx != "unchecked":
                self.err("Other", e.span,
                         "raw pointer reinterpretation requires an unchecked function")
            return dt
        if isinstance(dt, IntT) and is_pointer(st) and self.ctx == "unchecked":
            return dt
        self.err("Other", e.span, f"illegal cast from {st} to {dt}")
        return dt


def check_program(prog: ast.Program) -> TypedProgram:
    return Checker(prog).run()
