"""Forward must-analysis removing provably redundant key checks.

A fact is a storage slot ("local:x" / "global:g") whose held checked pointer
is known valid at a program point. GEN: a key check on the slot's value, or
an mm_checked/mm_array_checked hint. KILL: any call (it may free any heap
object), any mm_free, any store through a raw pointer, any store whose
written type contains a pointer (it may retarget a checked pointer), and
reassignment of the slot itself. Facts meet by intersection at joins.

The pass is deliberately conservative: facts are keyed by storage slot, not
value number, and checks on derived temporaries are never removed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import tir
from .tir import TirFunc, TirProgram
from .types import contains_pointer, is_fat

ALL = None  # lattice top: every slot valid (init value for non-entry blocks)


def successors(block: list) -> list[int]:
    if not block:
        return []
    last = block[-1]
    if isinstance(last, tir.Jmp):
        return [last.target]
    if isinstance(last, tir.Br):
        return [last.then, last.els]
    return []


def kills_everything(ins, structs) -> bool:
    if isinstance(ins, (tir.CallI, tir.Free)):
        return True
    if isinstance(ins, tir.StoreMem) and ins.slot is None:
        if ins.via_raw:
            return True
        if contains_pointer(ins.type, structs):
            return True
    return False


def transfer(ins, facts: set, structs) -> set:
    if kills_everything(ins, structs):
        return set()
    if isinstance(ins, tir.KeyCheck) and ins.slot is not None:
        facts = facts | {ins.slot}
    elif isinstance(ins, tir.Hint) and ins.slot is not None:
        facts = facts | {ins.slot}
    elif isinstance(ins, tir.SetLocal):
        facts = facts - {f"local:{ins.name}"}
    elif isinstance(ins, tir.StoreMem) and ins.slot is not None:
        if is_fat(ins.type) or contains_pointer(ins.type, structs):
            facts = facts - {ins.slot}
    return facts


@dataclass
class BlockFacts:
    in_: set | None = None
    out: set | None = ALL


def analyze(func: TirFunc, structs) -> list[BlockFacts]:
    n = len(func.blocks)
    info = [BlockFacts() for _ in range(n)]
    info[0].in_ = set()
    preds: list[list[int]] = [[] for _ in range(n)]
    for i, b in enumerate(func.blocks):
        for s in successors(b):
            preds[s].append(i)
    changed = True
    while changed:
        changed = False
        for i, block in enumerate(func.blocks):
            if i == 0:
                in_ = set()
            else:
                in_ = ALL
                for p in preds[i]:
                    po = info[p].out
                    if po is ALL:
                        continue
                    in_ = set(po) if in_ is ALL else (in_ & po)
                if in_ is ALL:
                    in_ = ALL  # unreachable or back-edge-only so far
            info[i].in_ = in_
            if in_ is ALL:
                out = ALL
            else:
                out = set(in_)
                for ins in block:
                    out = transfer(ins, out, structs)
            if out != info[i].out:
                info[i].out = out
                changed = True
    return info


def optimize_func(func: TirFunc, structs) -> TirFunc:
    info = analyze(func, structs)
    new_blocks = []
    elided = 0
    for i, block in enumerate(func.blocks):
        facts = info[i].in_
        facts = set() if facts is ALL else set(facts)
        nb = []
        for ins in block:
            if isinstance(ins, tir.KeyCheck) and ins.slot is not None \
                    and ins.slot in facts:
                elided += 1
            else:
                nb.append(ins)
            facts = transfer(ins, facts, structs)
        new_blocks.append(nb)
    return TirFunc(func.name, func.params, new_blocks, func.frame,
                   func.local_types, func.ret_type,
                   elided_static=func.elided_static + elided)


def optimize_checks(prog: TirProgram) -> TirProgram:
    structs = prog.sizes.structs
    out = TirProgram(funcs={}, globals=prog.globals,
                     string_pool=prog.string_pool, layout=prog.layout,
                     fat_width=prog.fat_width)
    out.sizes = prog.sizes
    for name, f in prog.funcs.items():
        out.funcs[name] = optimize_func(f, structs)
    return out


def dump_dataflow(prog_or_func, structs=None) -> str:
    def show(s):
        return "ALL" if s is ALL else "{" + ", ".join(sorted(s)) + "}"

    def one(func: TirFunc, structs) -> list[str]:
        info = analyze(func, structs)
        lines = [f"func {func.name}:"]
        for i, bf in enumerate(info):
            lines.append(f"  bb{i}: IN={show(bf.in_)} OUT={show(bf.out)}")
        return lines

    if isinstance(prog_or_func, TirFunc):
        return "\n".join(one(prog_or_func, structs))
    prog = prog_or_func
    out = []
    for func in prog.funcs.values():
        out.extend(one(func, prog.sizes.structs))
    return "\n".join(out)
