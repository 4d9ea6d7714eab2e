"""Lowering from typed AST to TIR.

Check insertion: every dereference through a fat value, and every address
computation (`&p->f`, `&p[i]`, `p[i]`, `p->f`) over a fat base, is preceded
by a KeyCheck of that base value. Functions whose frame holds checked
address-taken locals get a lock init in the prologue and a lock kill on
every exit path.

Scalar locals whose address is never taken live in virtual registers;
structs, arrays, and address-taken locals are memory-resident.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import ast, tir
from .tir import (AddrGlobal, AddrLocal, Alloc, BinOp, Br, CallI, Const,
                  FrameLayout, Free, GetLocal, GlobalSlot, Hint, Jmp, KeyCheck,
                  LoadMem, Marshal, MetaLayout, NullFat, PrintInt, PrintStr,
                  PtrAdd, ReadInt, Ret, SetLocal, StoreMem, StrAddr, Thin,
                  TirFunc, TirProgram, Trunc8, Unmarshal, VlaAlloc,
                  FrameLockInit, FrameLockKill)
from .typecheck import FuncInfo, TypedProgram
from .types import (ArrayT, CharT, IntT, MmArrayPtrT, MmPtrT, RawPtrT,
                    SizeModel, StructT, Type, VoidT, is_fat, is_pointer)


class LoweringError(Exception):
    pass


@dataclass
class MemLV:
    addr: int  # register holding the address (fat or thin)
    type: Type
    slot: str | None = None  # set for direct named-location access
    via_raw: bool = False    # address derived from a raw pointer


@dataclass
class LocalLV:
    name: str
    type: Type


class FuncLowerer:
    def __init__(self, tp: TypedProgram, fi: FuncInfo, sizes: SizeModel,
                 pool: list, pool_index: dict):
        self.tp = tp
        self.fi = fi
        self.sizes = sizes
        self.pool = pool
        self.pool_index = pool_index
        self.nreg = 0
        self.blocks: list[list] = [[]]
        self.cur = 0
        self.frame = self.layout_frame()
        self.mem_resident = ({n for n, _, _ in self.frame.locked}
                             | {n for n, _, _ in self.frame.unlocked}
                             | {n for n, _ in self.frame.vlas})

    # -- plumbing --

    def reg(self) -> int:
        self.nreg += 1
        return self.nreg - 1

    def emit(self, ins) -> None:
        self.blocks[self.cur].append(ins)

    def new_block(self) -> int:
        self.blocks.append([])
        return len(self.blocks) - 1

    def layout_frame(self) -> FrameLayout:
        fi = self.fi
        fl = FrameLayout()
        lock_off = 0
        plain_off = 0
        for name, t in fi.locals.items():
            if name in fi.vlas:
                fl.vlas.append((name, self.sizes.sizeof(t.elem)))
                continue
            mem = (name in fi.addr_taken_checked or name in fi.addr_taken_raw
                   or isinstance(t, (StructT, ArrayT)))
            if not mem:
                continue
            size = self.sizes.sizeof(t)
            align = self.sizes.alignof(t)
            if name in fi.addr_taken_checked:
                lock_off = (lock_off + align - 1) // align * align
                fl.locked.append((name, lock_off, size))
                lock_off += size
            else:
                plain_off = (plain_off + align - 1) // align * align
                fl.unlocked.append((name, plain_off, size))
                plain_off += size
        fl.locked_size = lock_off
        fl.unlocked_size = (plain_off + 15) // 16 * 16
        return fl

    def intern_string(self, s: str) -> int:
        if s not in self.pool_index:
            self.pool_index[s] = len(self.pool)
            self.pool.append(s)
        return self.pool_index[s]

    def slot_of(self, e) -> str | None:
        """Storage-slot identity for the dataflow pass (direct reads only)."""
        if isinstance(e, ast.Ident):
            kind, name = e.sym
            return f"{kind}:{name}"
        return None

    # -- lvalues --

    def lower_lvalue(self, e, want_checked: bool | None = None):
        if isinstance(e, ast.Ident):
            kind, name = e.sym
            if kind == "local" and name not in self.mem_resident:
                return LocalLV(name, e.ty)
            dst = self.reg()
            checked = bool(want_checked)
            if kind == "local":
                self.emit(AddrLocal(dst, name, checked, span=e.span))
            else:
                self.emit(AddrGlobal(dst, name, checked, span=e.span))
            return MemLV(dst, self.declared_type(e), slot=f"{kind}:{name}")
        if isinstance(e, ast.Unary) and e.op == "*":
            v = self.lower_expr(e.operand)
            if is_fat(e.operand.ty):
                self.emit(KeyCheck(v, slot=self.slot_of(e.operand), span=e.span))
            return MemLV(v, e.ty, via_raw=isinstance(e.operand.ty, RawPtrT))
        if isinstance(e, ast.Index):
            bt = e.base.ty
            if isinstance(bt, ArrayT):
                base_lv = self.lower_lvalue(e.base, want_checked)
                assert isinstance(base_lv, MemLV)
                idx = self.lower_expr(e.index)
                dst = self.reg()
                self.emit(PtrAdd(dst, base_lv.addr, idx,
                                 self.sizes.sizeof(bt.elem), span=e.span))
                return MemLV(dst, bt.elem)
            v = self.lower_expr(e.base)
            if is_fat(bt):
                self.emit(KeyCheck(v, slot=self.slot_of(e.base), span=e.span))
            idx = self.lower_expr(e.index)
            dst = self.reg()
            self.emit(PtrAdd(dst, v, idx, self.sizes.sizeof(bt.pointee),
                             span=e.span))
            return MemLV(dst, bt.pointee, via_raw=isinstance(bt, RawPtrT))
        if isinstance(e, ast.Field):
            via_raw = False
            if e.arrow:
                v = self.lower_expr(e.base)
                bt = e.base.ty
                if is_fat(bt):
                    self.emit(KeyCheck(v, slot=self.slot_of(e.base), span=e.span))
                via_raw = isinstance(bt, RawPtrT)
                sname = bt.pointee.name
                base_addr = v
            else:
                base_lv = self.lower_lvalue(e.base, want_checked)
                if not isinstance(base_lv, MemLV):
                    raise LoweringError(f"struct local {base_lv.name} not in memory")
                sname = self.struct_name_of(e.base.ty)
                base_addr = base_lv.addr
                via_raw = base_lv.via_raw
            off = self.sizes.field_offset(sname, e.name)
            c = self.reg()
            self.emit(Const(c, off, span=e.span))
            dst = self.reg()
            self.emit(PtrAdd(dst, base_addr, c, 1, span=e.span))
            return MemLV(dst, self.sizes.field_type(sname, e.name),
                         via_raw=via_raw)
        raise LoweringError(f"not an lvalue: {e!r}")

    def struct_name_of(self, t: Type) -> str:
        if isinstance(t, StructT):
            return t.name
        raise LoweringError(f"expected struct type, got {t}")

    def declared_type(self, e: ast.Ident) -> Type:
        kind, name = e.sym
        if kind == "local":
            return self.fi.locals[name]
        return self.tp.globals[name].type

    # -- expressions --

    def lower_expr(self, e) -> int:
        if isinstance(e, ast.IntLit):
            dst = self.reg()
            if e.value == 0 and is_fat(getattr(e, "ty", None)):
                self.emit(NullFat(dst, span=e.span))
            else:
                self.emit(Const(dst, e.value, span=e.span))
            return dst
        if isinstance(e, ast.CharLit):
            dst = self.reg()
            self.emit(Const(dst, e.value, span=e.span))
            return dst
        if isinstance(e, ast.StrLit):
            idx = self.intern_string(e.value)
            dst = self.reg()
            self.emit(StrAddr(dst, idx, is_fat(e.ty), span=e.span))
            return dst
        if isinstance(e, ast.Ident):
            kind, name = e.sym
            declared = self.declared_type(e)
            if isinstance(declared, ArrayT) and is_pointer(e.ty):
                # array-to-pointer decay
                dst = self.reg()
                if kind == "local":
                    self.emit(AddrLocal(dst, name, is_fat(e.ty), span=e.span))
                else:
                    self.emit(AddrGlobal(dst, name, is_fat(e.ty), span=e.span))
                return dst
            if kind == "local" and name not in self.mem_resident:
                dst = self.reg()
                self.emit(GetLocal(dst, name, span=e.span))
                return dst
            lv = self.lower_lvalue(e)
            dst = self.reg()
            self.emit(LoadMem(dst, lv.addr, e.ty, span=e.span))
            return dst
        if isinstance(e, (ast.Unary, )) and e.op == "*":
            lv = self.lower_lvalue(e)
            dst = self.reg()
            self.emit(LoadMem(dst, lv.addr, e.ty, span=e.span))
            return dst
        if isinstance(e, ast.Unary) and e.op == "&":
            return self.lower_addr_of(e)
        if isinstance(e, ast.Unary):
            v = self.lower_expr(e.operand)
            dst = self.reg()
            if e.op == "-":
                z = self.reg()
                self.emit(Const(z, 0, span=e.span))
                self.emit(BinOp(dst, "-", z, v, span=e.span))
            elif e.op == "!":
                z = self.reg()
                self.emit(Const(z, 0, span=e.span))
                self.emit(BinOp(dst, "==", v, z, span=e.span))
            else:
                raise LoweringError(f"unary {e.op}")
            return dst
        if isinstance(e, ast.Bin):
            lt = e.left.ty
            if is_pointer(lt) and e.op in ("+", "-"):
                base = self.lower_expr(e.left)
                idx = self.lower_expr(e.right)
                if e.op == "-":
                    m = self.reg()
                    self.emit(Const(m, -1, span=e.span))
                    neg = self.reg()
                    self.emit(BinOp(neg, "*", idx, m, span=e.span))
                    idx = neg
                dst = self.reg()
                self.emit(PtrAdd(dst, base, idx, self.sizes.sizeof(lt.pointee),
                                 span=e.span))
                return dst
            a = self.lower_expr(e.left)
            b = self.lower_expr(e.right)
            dst = self.reg()
            self.emit(BinOp(dst, e.op, a, b, span=e.span))
            return dst
        if isinstance(e, ast.Assign):
            return self.lower_assign(e.target, e.value, e.span)
        if isinstance(e, (ast.Index, ast.Field)):
            lv = self.lower_lvalue(e)
            dst = self.reg()
            self.emit(LoadMem(dst, lv.addr, lv.type, span=e.span))
            return dst
        if isinstance(e, ast.Call):
            return self.lower_call(e)
        if isinstance(e, ast.Cast):
            return self.lower_cast(e)
        if isinstance(e, ast.AllocExpr):
            n = self.lower_expr(e.count)
            esz = self.reg()
            self.emit(Const(esz, self.sizes.sizeof(e.elem_type), span=e.span))
            size = self.reg()
            self.emit(BinOp(size, "*", n, esz, span=e.span))
            dst = self.reg()
            self.emit(Alloc(dst, size, span=e.span))
            return dst
        if isinstance(e, ast.FreeExpr):
            v = self.lower_expr(e.arg)
            self.emit(Free(v, span=e.span))
            return v
        if isinstance(e, ast.HintExpr):
            v = self.lower_expr(e.arg)
            self.emit(Hint(self.slot_of(e.arg), span=e.span))
            return v
        if isinstance(e, ast.MarshalExpr):
            arr = self.lower_expr(e.array)
            self.emit(KeyCheck(arr, slot=self.slot_of(e.array), span=e.span))
            n = self.lower_expr(e.count)
            dst = self.reg()
            self.emit(Marshal(dst, arr, n, span=e.span))
            return dst
        if isinstance(e, ast.UnmarshalExpr):
            thin = self.lower_expr(e.thin)
            orig = self.lower_expr(e.orig)
            self.emit(KeyCheck(orig, slot=self.slot_of(e.orig), span=e.span))
            n = self.lower_expr(e.count)
            dst = self.reg()
            self.emit(Unmarshal(dst, thin, orig, n, span=e.span))
            return dst
        raise LoweringError(f"cannot lower {e!r}")

    def lower_addr_of(self, e: ast.Unary) -> int:
        want_checked = is_fat(e.ty)
        lv = self.lower_lvalue(e.operand, want_checked=want_checked)
        if isinstance(lv, LocalLV):
            raise LoweringError(f"address of register-resident local {lv.name}")
        operand = e.operand
        # fat-derived addresses are already fat; thin destination takes the raw half
        if not want_checked and self.addr_is_fat(operand):
            dst = self.reg()
            self.emit(Thin(dst, lv.addr, span=e.span))
            return dst
        return lv.addr

    def addr_is_fat(self, lval_expr) -> bool:
        if isinstance(lval_expr, ast.Unary) and lval_expr.op == "*":
            return is_fat(lval_expr.operand.ty)
        if isinstance(lval_expr, ast.Index):
            return is_fat(lval_expr.base.ty)
        if isinstance(lval_expr, ast.Field) and lval_expr.arrow:
            return is_fat(lval_expr.base.ty)
        if isinstance(lval_expr, ast.Field):
            return self.addr_is_fat(lval_expr.base)
        return False

    def lower_assign(self, target, value, span) -> int:
        lv = self.lower_lvalue(target)
        rv = self.lower_expr(value)
        rv = self.convert(rv, value.ty, target.ty, span)
        if isinstance(lv, LocalLV):
            self.emit(SetLocal(lv.name, rv, span=span))
        else:
            self.emit(StoreMem(lv.addr, rv, target.ty, slot=lv.slot,
                               via_raw=lv.via_raw, span=span))
        return rv

    def convert(self, reg: int, src: Type, dst: Type, span) -> int:
        if is_fat(src) and isinstance(dst, (RawPtrT, IntT)):
            d = self.reg()
            self.emit(Thin(d, reg, span=span))
            return d
        if isinstance(dst, CharT) and isinstance(src, IntT):
            d = self.reg()
            self.emit(Trunc8(d, reg, span=span))
            return d
        return reg

    def lower_call(self, e: ast.Call) -> int:
        if e.name == "print_int":
            v = self.lower_expr(e.args[0])
            self.emit(PrintInt(v, span=e.span))
            return v
        if e.name == "print_str":
            v = self.lower_expr(e.args[0])
            if is_fat(e.args[0].ty):
                self.emit(KeyCheck(v, slot=self.slot_of(e.args[0]), span=e.span))
            self.emit(PrintStr(v, span=e.span))
            return v
        if e.name == "read_int":
            dst = self.reg()
            self.emit(ReadInt(dst, span=e.span))
            return dst
        fi = self.tp.funcs[e.name]
        args = []
        for a, (pn, pt) in zip(e.args, fi.params):
            r = self.lower_expr(a)
            args.append(self.convert(r, a.ty, pt, a.span))
        dst = None if isinstance(fi.decl.ret, VoidT) else self.reg()
        self.emit(CallI(dst, e.name, args, span=e.span))
        if dst is None:
            dst = self.reg()
            self.emit(Const(dst, 0, span=e.span))
        return dst

    def lower_cast(self, e: ast.Cast) -> int:
        v = self.lower_expr(e.expr)
        return self.convert(v, e.expr.ty, e.type, e.span)

    # -- statements --

    def lower_stmt(self, s):
        if isinstance(s, ast.Block):
            for x in s.stmts:
                self.lower_stmt(x)
        elif isinstance(s, ast.DeclStmt):
            if s.vla_size is not None:
                n = self.lower_expr(s.vla_size)
                esz = self.sizes.sizeof(s.type.elem)
                self.emit(VlaAlloc(s.name, n, esz, span=s.span))
                return
            if s.init is not None:
                ident = ast.Ident(s.span, s.name)
                ident.sym = ("local", s.name)
                ident.ty = s.type
                self.lower_assign(ident, s.init, s.span)
        elif isinstance(s, ast.If):
            c = self.lower_expr(s.cond)
            c = self.truthy(c, s.cond)
            then_b = self.new_block()
            else_b = self.new_block()
            join_b = self.new_block()
            self.emit(Br(c, then_b, else_b, span=s.span))
            self.cur = then_b
            self.lower_stmt(s.then)
            self.emit(Jmp(join_b, span=s.span))
            self.cur = else_b
            if s.els is not None:
                self.lower_stmt(s.els)
            self.emit(Jmp(join_b, span=s.span))
            self.cur = join_b
        elif isinstance(s, ast.While):
            head = self.new_block()
            body = self.new_block()
            exit_b = self.new_block()
            self.emit(Jmp(head, span=s.span))
            self.cur = head
            c = self.lower_expr(s.cond)
            c = self.truthy(c, s.cond)
            self.emit(Br(c, body, exit_b, span=s.span))
            self.cur = body
            self.lower_stmt(s.body)
            self.emit(Jmp(head, span=s.span))
            self.cur = exit_b
        elif isinstance(s, ast.Return):
            v = None
            if s.value is not None:
                v = self.lower_expr(s.value)
                v = self.convert(v, s.value.ty, self.fi.decl.ret, s.span)
            if self.needs_lock_mgmt():
                self.emit(FrameLockKill(span=s.span))
            self.emit(Ret(v, span=s.span))
            self.cur = self.new_block()  # unreachable continuation
        elif isinstance(s, ast.ExprStmt):
            self.lower_expr(s.expr)
        else:
            raise LoweringError(f"cannot lower stmt {s!r}")

    def truthy(self, reg: int, cond_expr) -> int:
        if is_pointer(cond_expr.ty) or is_fat(cond_expr.ty):
            z = self.reg()
            self.emit(Const(z, 0, span=cond_expr.span))
            d = self.reg()
            self.emit(BinOp(d, "!=", reg, z, span=cond_expr.span))
            return d
        return reg

    def needs_lock_mgmt(self) -> bool:
        return self.frame.has_lock or bool(self.frame.vlas)

    def lower(self) -> TirFunc:
        if self.frame.has_lock:
            self.emit(FrameLockInit(span=self.fi.decl.span))
        self.lower_stmt(self.fi.decl.body)
        last = self.blocks[self.cur]
        if not last or not isinstance(last[-1], tir.TERMINATORS):
            if self.needs_lock_mgmt():
                self.emit(FrameLockKill(span=self.fi.decl.span))
            self.emit(Ret(None, span=self.fi.decl.span))
        return TirFunc(self.fi.decl.name, list(self.fi.params), self.blocks,
                       self.frame, dict(self.fi.locals), self.fi.decl.ret)


def eval_const(e) -> int:
    if e is None:
        return 0
    if isinstance(e, ast.IntLit):
        return e.value
    if isinstance(e, ast.CharLit):
        return e.value
    raise LoweringError("global initializers must be integer constants")


def lower_program(tp: TypedProgram, layout: MetaLayout | None = None,
                  fat_width: int = 16) -> TirProgram:
    if tp.errors:
        raise LoweringError("cannot lower a program with type errors")
    layout = layout or MetaLayout()
    sizes = SizeModel(tp.structs, fat_width=fat_width)
    prog = TirProgram(layout=layout, fat_width=fat_width)
    prog.sizes = sizes
    for g in tp.globals.values():
        prog.globals.append(GlobalSlot(g.name, g.type, sizes.sizeof(g.type),
                                       g.address_taken, eval_const(g.init)))
    pool: list[str] = []
    pool_index: dict[str, int] = {}
    for fi in tp.funcs.values():
        fl = FuncLowerer(tp, fi, sizes, pool, pool_index)
        prog.funcs[fi.decl.name] = fl.lower()
    prog.string_pool = pool
    return prog
