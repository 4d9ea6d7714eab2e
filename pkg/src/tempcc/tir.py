"""Typed IR with explicit key checks and lock management.

A fat value in the IR is always a single unit: (raw address, key, offset).
No transformation splits the halves apart. Metadata words pack the key into
the high keyBits and the byte offset from the referent's payload start into
the low 64-keyBits bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .lexer import Span
from .types import Type

INVALID_KEY = 0
GLOBAL_KEY = 1

# lock placement: every locked region is [8 pad][8 lock][payload], payload
# 16-byte aligned, so lock address = raw - offset - 8
HEADER_SIZE = 16
LOCK_SIZE = 8


class OffsetOverflow(Exception):
    pass


@dataclass(frozen=True)
class MetaLayout:
    key_bits: int = 32

    def __post_init__(self):
        if not 2 <= self.key_bits <= 48:
            raise ValueError(f"key_bits must be in [2, 48], got {self.key_bits}")

    @property
    def offset_bits(self) -> int:
        return 64 - self.key_bits

    @property
    def max_offset(self) -> int:
        return (1 << self.offset_bits) - 1

    @property
    def max_key(self) -> int:
        return (1 << self.key_bits) - 1

    def pack(self, key: int, offset: int) -> int:
        if not 0 <= key <= self.max_key:
            raise ValueError(f"key {key} out of range")
        if not 0 <= offset <= self.max_offset:
            raise OffsetOverflow(f"offset {offset} exceeds {self.max_offset}")
        return (key << self.offset_bits) | offset

    def unpack(self, word: int) -> tuple[int, int]:
        return word >> self.offset_bits, word & self.max_offset


# ---- instructions ----
# operands are virtual register ids (ints); dst is a register id

@dataclass
class Instr:
    span: Optional[Span] = field(default=None, kw_only=True)


@dataclass
class Const(Instr):
    dst: int
    value: int


@dataclass
class BinOp(Instr):
    dst: int
    op: str
    a: int
    b: int


@dataclass
class GetLocal(Instr):
    dst: int
    name: str


@dataclass
class SetLocal(Instr):
    name: str
    src: int


@dataclass
class AddrLocal(Instr):
    # address of a memory-resident local; checked=True yields a fat value
    # keyed by the frame lock
    dst: int
    name: str
    checked: bool


@dataclass
class AddrGlobal(Instr):
    dst: int
    name: str
    checked: bool


@dataclass
class LoadMem(Instr):
    dst: int
    addr: int
    type: Type


@dataclass
class StoreMem(Instr):
    addr: int
    src: int
    type: Type
    slot: Optional[str] = None  # set when storing directly to a named location
    via_raw: bool = False       # address was derived from a raw pointer


@dataclass
class NullFat(Instr):
    # null checked-pointer value: raw 0, invalid key, offset 0
    dst: int


@dataclass
class StrAddr(Instr):
    # address of a pooled string literal; checked=True yields a fat value
    # carrying the global key
    dst: int
    index: int
    checked: bool


@dataclass
class Thin(Instr):
    # take the raw-address half of a fat value (checked->raw conversion)
    dst: int
    src: int


@dataclass
class Trunc8(Instr):
    dst: int
    src: int


@dataclass
class PtrAdd(Instr):
    # dst = base + idx * elem_size; fat base keeps its key, offset updated
    dst: int
    base: int
    idx: int
    elem_size: int


@dataclass
class KeyCheck(Instr):
    val: int
    slot: Optional[str] = None  # storage slot identity for the dataflow pass


@dataclass
class Hint(Instr):
    # mm_checked/mm_array_checked: dataflow fact only, no runtime effect
    slot: Optional[str]


@dataclass
class Alloc(Instr):
    dst: int
    size: int  # register holding byte count


@dataclass
class Free(Instr):
    val: int


@dataclass
class Marshal(Instr):
    dst: int
    array: int
    count: int


@dataclass
class Unmarshal(Instr):
    dst: int
    thin: int
    orig: int
    count: int


@dataclass
class VlaAlloc(Instr):
    # extend the frame with a locked region for a variable-length array
    name: str
    count: int  # register
    elem_size: int


@dataclass
class CallI(Instr):
    dst: Optional[int]
    func: str
    args: list = field(default_factory=list)


@dataclass
class PrintInt(Instr):
    src: int


@dataclass
class PrintStr(Instr):
    src: int


@dataclass
class ReadInt(Instr):
    dst: int


@dataclass
class FrameLockInit(Instr):
    pass


@dataclass
class FrameLockKill(Instr):
    pass


@dataclass
class Ret(Instr):
    src: Optional[int] = None


@dataclass
class Jmp(Instr):
    target: int


@dataclass
class Br(Instr):
    cond: int
    then: int
    els: int


TERMINATORS = (Ret, Jmp, Br)


@dataclass
class FrameLayout:
    """Memory-resident locals of one function.

    Fixed-size address-taken-checked locals share one locked region:
    [8 pad][8 lock][aggregated payload]. Other memory-resident locals live
    in an unlocked frame area. VLAs each get their own locked region,
    carved at runtime.
    """
    locked: list = field(default_factory=list)    # [(name, offset_from_payload, size)]
    locked_size: int = 0
    unlocked: list = field(default_factory=list)  # [(name, offset, size)]
    unlocked_size: int = 0
    vlas: list = field(default_factory=list)      # [(name, elem_size)]

    @property
    def has_lock(self) -> bool:
        return bool(self.locked)

    def frame_size(self) -> int:
        sz = self.unlocked_size
        if self.locked:
            sz += HEADER_SIZE + ((self.locked_size + 15) // 16 * 16)
        return sz


@dataclass
class TirFunc:
    name: str
    params: list                      # [(name, Type)]
    blocks: list = field(default_factory=list)  # list of list[Instr]
    frame: FrameLayout = field(default_factory=FrameLayout)
    local_types: dict = field(default_factory=dict)
    ret_type: Type = None
    elided_static: int = 0  # KeyChecks removed by the dataflow pass


@dataclass
class GlobalSlot:
    name: str
    type: Type
    size: int
    address_taken: bool
    init: object = None


@dataclass
class TirProgram:
    funcs: dict = field(default_factory=dict)
    globals: list = field(default_factory=list)
    string_pool: list = field(default_factory=list)  # de-duplicated literals
    layout: MetaLayout = field(default_factory=MetaLayout)
    fat_width: int = 16


def dump_func(f: TirFunc) -> str:
    lines = [f"func {f.name}({', '.join(f'{n}: {t}' for n, t in f.params)}):"]
    if f.frame.has_lock or f.frame.unlocked or f.frame.vlas:
        lines.append(f"  frame locked={f.frame.locked} unlocked={f.frame.unlocked} "
                     f"vlas={f.frame.vlas}")
    for bi, block in enumerate(f.blocks):
        lines.append(f" bb{bi}:")
        for ins in block:
            fields = []
            for k, v in vars(ins).items():
                if k == "span":
                    continue
                fields.append(f"{k}={v}")
            lines.append(f"    {type(ins).__name__} {' '.join(fields)}")
    return "\n".join(lines)


def dump_program(p: TirProgram) -> str:
    parts = []
    for g in p.globals:
        parts.append(f"global {g.name}: {g.type} size={g.size} "
                     f"locked={g.address_taken}")
    for s in p.string_pool:
        parts.append(f"string {s!r}")
    for f in p.funcs.values():
        parts.append(dump_func(f))
    return "\n".join(parts) + "\n"
