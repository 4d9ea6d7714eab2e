"""TIR interpreter with pluggable metadata backends.

Backends:
  inplace   - fat values carry (key, offset) beside the raw address; the lock
              sits 8 bytes before the referent's payload
  disjoint  - raw pointers in memory, (key, lock address) entries in a
              two-level table keyed by the pointer's storage address; locks
              live in a separate arena
  unchecked - checks and metadata compiled out; thin pointers, no headers

Metadata traffic accounting (per memory-resident checked-pointer op):
  key check: 1 lock load (inplace) vs 4 table/lock loads (disjoint)
  store:     1 metadata-word store (inplace) vs 2 entry stores (disjoint)
  load:      free (inplace: the word travels with the value) vs 2 entry
             loads (disjoint)
instrCount, the run-cost proxy, is executed IR instructions plus metadata
loads and stores.
"""

from __future__ import annotations

import json
from collections import namedtuple
from dataclasses import dataclass, field
from enum import IntEnum

from . import tir
from .mem import (DisjointTable, HeapAllocator, KeyGen, LockArena, Oracle,
                  SimMemory, DEFAULT_HEAP_SIZE, DEFAULT_STACK_SIZE,
                  DEFAULT_LOCK_ARENA_SIZE, GLOBALS_BASE, STACK_TOP)
from .tir import GLOBAL_KEY, HEADER_SIZE, MetaLayout, TirFunc, TirProgram
from .types import CharT, is_fat

SHADOW_BASE = 0x3_0000_0000

MASK64 = (1 << 64) - 1

FatVal = namedtuple("FatVal", ["raw", "key", "offset", "lock_addr"])
NULL_FAT = FatVal(0, 0, 0, 0)


class TrapCode(IntEnum):
    UAF = 11
    DOUBLE_FREE = 12
    INVALID_FREE = 13
    OBJECT_TOO_LARGE = 14
    MARSHAL_ERROR = 15
    OUT_OF_MEMORY = 16
    INTERNAL_FAULT = 70


class Trap(Exception):
    def __init__(self, code: TrapCode, span=None, msg: str = ""):
        self.code = code
        self.span = span
        self.msg = msg
        where = f" at {span}" if span else ""
        super().__init__(f"trap {code.name} ({int(code)}){where}: {msg}")

    @property
    def line(self):
        return self.span.line if self.span else None


@dataclass
class VmConfig:
    backend: str = "inplace"  # 'inplace' | 'disjoint' | 'unchecked'
    key_bits: int = 32
    seed: int = 0
    opt_checks: bool = True
    oracle: bool = False
    heap_size: int = DEFAULT_HEAP_SIZE
    stack_size: int = DEFAULT_STACK_SIZE
    lock_arena_size: int = DEFAULT_LOCK_ARENA_SIZE
    max_instr: int = 200_000_000


@dataclass
class Stats:
    instr_exec: int = 0
    key_checks_exec: int = 0
    key_checks_elided_static: int = 0
    meta_loads: int = 0
    meta_stores: int = 0
    alloc_count: int = 0
    free_count: int = 0
    heap_bytes_payload: int = 0
    heap_bytes_metadata: int = 0
    peak_live_bytes: int = 0
    live_bytes: int = 0
    fat_slot_bytes: int = 0  # metadata bytes across distinct fat storage slots
    table_entry_bytes: int = 0  # disjoint only: live trie entries * 16
    table_page_bytes: int = 0  # disjoint only: committed trie leaf pages
    per_function: dict = field(default_factory=dict)

    @property
    def instr_count(self) -> int:
        return self.instr_exec + self.meta_loads + self.meta_stores

    def to_dict(self) -> dict:
        return {
            "instrCount": self.instr_count,
            "keyChecksExec": self.key_checks_exec,
            "keyChecksElidedStatic": self.key_checks_elided_static,
            "metaLoads": self.meta_loads,
            "metaStores": self.meta_stores,
            "allocCount": self.alloc_count,
            "freeCount": self.free_count,
            "heapBytesPayload": self.heap_bytes_payload,
            "heapBytesMetadata": self.heap_bytes_metadata,
            "peakLiveBytes": self.peak_live_bytes,
            "fatSlotBytes": self.fat_slot_bytes,
            "tableEntryBytes": self.table_entry_bytes,
            "tablePageBytes": self.table_page_bytes,
            "perFunction": {k: dict(v) for k, v in sorted(self.per_function.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


@dataclass
class Divergence:
    false_positives: list = field(default_factory=list)
    false_negatives: list = field(default_factory=list)
    offset_violations: list = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not (self.false_positives or self.false_negatives
                    or self.offset_violations)


@dataclass
class RunResult:
    exit_code: int
    output: str
    stats: Stats
    trap: Trap | None = None
    divergence: Divergence | None = None


def to_signed(v: int) -> int:
    v &= MASK64
    return v - (1 << 64) if v >= (1 << 63) else v


def cdiv(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return -q if (a < 0) != (b < 0) else q


def cmod(a: int, b: int) -> int:
    return a - cdiv(a, b) * b


class Frame:
    __slots__ = ("func", "regs", "locals", "base", "locked_payload",
                 "frame_key", "frame_lock_addr", "vlas", "addr_map")

    def __init__(self, func: TirFunc):
        self.func = func
        self.regs: dict[int, object] = {}
        self.locals: dict[str, object] = {}
        self.base = 0
        self.locked_payload = 0
        self.frame_key = 0
        self.frame_lock_addr = 0
        self.vlas: dict[str, tuple] = {}  # name -> (payload, key, lock_addr, size)


class VM:
    def __init__(self, prog: TirProgram, cfg: VmConfig, guest_input=()):
        self.prog = prog
        self.cfg = cfg
        self.backend = cfg.backend
        self.layout: MetaLayout = prog.layout
        self.sizes = prog.sizes
        self.mem = SimMemory(heap_size=cfg.heap_size, stack_size=cfg.stack_size,
                             lock_arena_size=cfg.lock_arena_size)
        self.allocator = HeapAllocator(size=cfg.heap_size)
        self.keygen = KeyGen(cfg.key_bits, cfg.seed)
        self.arena = LockArena(self.mem)
        self.table = DisjointTable()
        self.oracle = Oracle() if cfg.oracle else None
        self.divergence = Divergence() if cfg.oracle else None
        self.stats = Stats()
        self.fat_slots: set[int] = set()
        self.out: list[str] = []
        self.guest_input = list(guest_input)
        self.input_pos = 0
        self.sp = STACK_TOP
        self.live_block_sizes: dict[int, int] = {}
        self.marshal_snapshots: dict[int, dict] = {}
        self.global_addr: dict[str, int] = {}
        self.string_addr: list[int] = []
        self.global_lock_addr = 0
        self._addr_maps: dict[str, dict] = {}
        self._shadow_maps: dict[str, dict] = {}
        self._load_globals()

    # -- setup --

    def _load_globals(self):
        cursor = GLOBALS_BASE
        checked_meta = self.backend != "unchecked"
        if self.backend == "disjoint":
            self.global_lock_addr = self.arena.alloc_lock(GLOBAL_KEY)
        for g in self.prog.globals:
            cursor = (cursor + 15) // 16 * 16
            if g.address_taken and self.backend == "inplace":
                cursor += HEADER_SIZE
                self.mem.write64(cursor - 8, GLOBAL_KEY)
            self.global_addr[g.name] = cursor
            if not isinstance(g.type, CharT) and g.init:
                self.mem.write64(cursor, g.init & MASK64)
            elif g.init:
                self.mem.write8(cursor, g.init & 0xFF)
            if g.address_taken and self.oracle is not None and checked_meta:
                self.oracle.on_alloc(cursor, g.size, "global")
            cursor += max(g.size, 1)
        for s in self.prog.string_pool:
            cursor = (cursor + 15) // 16 * 16
            if self.backend == "inplace":
                cursor += HEADER_SIZE
                self.mem.write64(cursor - 8, GLOBAL_KEY)
            self.string_addr.append(cursor)
            data = s.encode("latin-1") + b"\0"
            for i, b in enumerate(data):
                self.mem.write8(cursor + i, b)
            if self.oracle is not None and checked_meta:
                self.oracle.on_alloc(cursor, len(data), "global")
            cursor += len(data)

    def global_lock_for(self, payload_addr: int, offset: int) -> int:
        if self.backend == "disjoint":
            return self.global_lock_addr
        return payload_addr - offset - 8

    # -- value plumbing --

    def fat_global(self, addr: int, region_start: int) -> FatVal:
        off = addr - region_start
        if self.backend == "disjoint":
            return FatVal(addr, GLOBAL_KEY, off, self.global_lock_addr)
        return FatVal(addr, GLOBAL_KEY, off, region_start - 8)

    def raw_of(self, v) -> int:
        return v.raw if isinstance(v, FatVal) else v & MASK64

    def _shadow_slot(self, frame: Frame, name: str, val):
        # register-resident fat locals still occupy a metadata slot: 8 extra
        # bytes in-place (the spilled meta word), a 16-byte table entry
        # disjoint.  Slot addresses live in a shadow region keyed by frame
        # base so reused stack depths reuse slots.  No load/store traffic is
        # charged for register ops.
        if not isinstance(val, FatVal) or self.backend == "unchecked":
            return
        idx = self._shadow_idx(frame.func).get(name)
        if idx is None:
            return
        addr = SHADOW_BASE + (STACK_TOP - frame.base) + idx * 8
        self.fat_slots.add(addr)
        if self.backend == "disjoint":
            self.table.set(addr, val.key, val.lock_addr, val.offset)

    def _shadow_idx(self, func: TirFunc) -> dict:
        m = self._shadow_maps.get(func.name)
        if m is None:
            names = set(func.local_types) | {p for p, _ in func.params}
            m = {n: i for i, n in enumerate(sorted(names))}
            self._shadow_maps[func.name] = m
        return m

    def load_value(self, addr: int, t) -> object:
        if is_fat(t) and self.backend == "inplace":
            raw = self.mem.read64(addr)
            meta = self.mem.read64(addr + 8)
            key, off = self.layout.unpack(meta)
            return FatVal(raw, key, off, (raw - off - 8) & MASK64)
        if is_fat(t) and self.backend == "disjoint":
            raw = self.mem.read64(addr)
            entry = self.table.get(addr)
            self.stats.meta_loads += 2
            if entry is None:
                return FatVal(raw, 0, 0, 0)
            key, lock_addr, off = entry
            return FatVal(raw, key, off, lock_addr)
        if isinstance(t, CharT):
            return self.mem.read8(addr)
        return to_signed(self.mem.read64(addr))

    def store_value(self, addr: int, v, t):
        if is_fat(t):
            fv = v if isinstance(v, FatVal) else FatVal(v & MASK64, 0, 0, 0)
            if self.backend == "inplace":
                self.mem.write64(addr, fv.raw)
                self.mem.write64(addr + 8, self.layout.pack(fv.key, fv.offset))
                self.stats.meta_stores += 1
                self.fat_slots.add(addr)
            elif self.backend == "disjoint":
                self.mem.write64(addr, fv.raw)
                self.table.set(addr, fv.key, fv.lock_addr, fv.offset)
                self.stats.meta_stores += 2
                self.fat_slots.add(addr)
            else:
                self.mem.write64(addr, fv.raw)
            return
        if isinstance(t, CharT):
            self.mem.write8(addr, (v if isinstance(v, int) else v.raw) & 0xFF)
            return
        self.mem.write64(addr, self.raw_of(v) if isinstance(v, FatVal) else v & MASK64)

    # -- checks, allocation, free --

    def key_check(self, v, span):
        if self.backend == "unchecked":
            return
        st = self.stats
        st.key_checks_exec += 1
        st.meta_loads += 1 if self.backend == "inplace" else 4
        if isinstance(v, FatVal) and v.key >= 1:
            lock = self.mem.read64(v.lock_addr)
            ok = lock == v.key
        else:
            lock = None
            ok = False
        if self.oracle is not None:
            self._oracle_at_check(v, ok, span)
        if not ok:
            key = v.key if isinstance(v, FatVal) else None
            raise Trap(TrapCode.UAF, span,
                       f"key check failed: raw={self.raw_of(v):#x} key={key} lock={lock}")

    def _oracle_at_check(self, v, ok: bool, span):
        raw = self.raw_of(v)
        if isinstance(v, FatVal) and v.key >= 2:
            verdict, rec = self.oracle.query_key(v.key, raw)
        else:
            verdict, rec = self.oracle.query(raw)
        site = (span.line if span else None, raw)
        if verdict == "live" and not ok:
            self.divergence.false_positives.append(site)
        elif verdict == "dead" and ok:
            self.divergence.false_negatives.append(site)
        if verdict == "live" and isinstance(v, FatVal):
            if rec.start != (raw - v.offset) & MASK64:
                self.divergence.offset_violations.append(site)

    def mm_alloc(self, size: int, span) -> object:
        st = self.stats
        if size < 0:
            raise Trap(TrapCode.INTERNAL_FAULT, span, "negative allocation size")
        if size > self.layout.max_offset:
            raise Trap(TrapCode.OBJECT_TOO_LARGE, span,
                       f"allocation of {size} bytes exceeds max offset "
                       f"{self.layout.max_offset}")
        if self.backend == "inplace":
            block = self.allocator.alloc(HEADER_SIZE + size)
            if block is None:
                raise Trap(TrapCode.OUT_OF_MEMORY, span, "heap exhausted")
            payload = block + HEADER_SIZE
            key = self.keygen.next()
            self._zero(payload, size)
            self.mem.write64(payload - 8, key)
            st.heap_bytes_metadata += HEADER_SIZE
            result = FatVal(payload, key, 0, payload - 8)
        elif self.backend == "disjoint":
            payload = self.allocator.alloc(size)
            if payload is None:
                raise Trap(TrapCode.OUT_OF_MEMORY, span, "heap exhausted")
            key = self.keygen.next()
            self._zero(payload, size)
            lock_addr = self.arena.alloc_lock(key)
            st.heap_bytes_metadata += 8
            result = FatVal(payload, key, 0, lock_addr)
        else:
            payload = self.allocator.alloc(size)
            if payload is None:
                raise Trap(TrapCode.OUT_OF_MEMORY, span, "heap exhausted")
            self._zero(payload, size)
            result = payload
            key = None
        st.alloc_count += 1
        st.heap_bytes_payload += size
        st.live_bytes += size
        st.peak_live_bytes = max(st.peak_live_bytes, st.live_bytes)
        self.live_block_sizes[payload if not isinstance(result, FatVal) else result.raw] = size
        if self.oracle is not None:
            self.oracle.on_alloc(payload, size, "heap", key=key)
        return result

    def _zero(self, addr: int, size: int):
        seg = self.mem.segment_for(addr)
        off = addr - seg.base
        if off + size > len(seg.data):
            seg.data.extend(b"\0" * (off + size - len(seg.data)))
        seg.data[off : off + size] = b"\0" * size

    def mm_free(self, v, span):
        st = self.stats
        if self.backend == "unchecked":
            raw = self.raw_of(v)
            if raw in self.allocator.live:
                self.allocator.free(raw)
                st.free_count += 1
                st.live_bytes -= self.live_block_sizes.pop(raw, 0)
            return  # bad frees pass silently in the baseline
        if not isinstance(v, FatVal):
            raise Trap(TrapCode.INVALID_FREE, span, "free of a thin value")
        if v.offset != 0:
            raise Trap(TrapCode.INVALID_FREE, span,
                       f"free of interior pointer (offset {v.offset})")
        if v.key < 2:
            raise Trap(TrapCode.INVALID_FREE, span,
                       f"free with reserved key {v.key}")
        lock = self.mem.read64(v.lock_addr)
        if lock != v.key:
            raise Trap(TrapCode.DOUBLE_FREE, span,
                       f"double free: key={v.key} lock={lock}")
        if self.backend == "inplace":
            self.mem.write64(v.lock_addr, 0)
            self.allocator.free(v.raw - HEADER_SIZE)
        else:
            self.arena.free_lock(v.lock_addr)
            self.allocator.free(v.raw)
        st.free_count += 1
        st.live_bytes -= self.live_block_sizes.pop(v.raw, 0)
        if self.oracle is not None:
            self.oracle.on_free(v.raw)

    # -- marshalling --

    def marshal(self, arr: object, n: int, span) -> int:
        thin = self.allocator.alloc(max(8 * n, 8))
        if thin is None:
            raise Trap(TrapCode.OUT_OF_MEMORY, span, "heap exhausted")
        self.stats.heap_bytes_payload += 8 * n
        fatw = self.prog.fat_width
        if self.backend == "unchecked":
            base = self.raw_of(arr)
            for i in range(n):
                self.mem.write64(thin + 8 * i, self.mem.read64(base + fatw * i))
            return thin
        snapshot: dict[int, FatVal] = {}
        base = self.raw_of(arr)
        from .types import MmPtrT, INT
        elem_t = MmPtrT(INT)
        for i in range(n):
            fv = self.load_value_uncounted(base + fatw * i, elem_t)
            self.mem.write64(thin + 8 * i, fv.raw)
            snapshot[fv.raw] = fv
        self.marshal_snapshots[thin] = snapshot
        return thin

    def load_value_uncounted(self, addr: int, t) -> object:
        before = (self.stats.meta_loads, self.stats.meta_stores)
        v = self.load_value(addr, t)
        self.stats.meta_loads, self.stats.meta_stores = before
        return v

    def unmarshal(self, thin: int, orig: object, n: int, span) -> object:
        fatw = self.prog.fat_width
        if self.backend == "unchecked":
            base = self.raw_of(orig)
            for i in range(n):
                self.mem.write64(base + fatw * i, self.mem.read64(thin + 8 * i))
            if thin in self.allocator.live:
                self.allocator.free(thin)
            return orig
        snapshot = self.marshal_snapshots.get(thin)
        if snapshot is None:
            raise Trap(TrapCode.MARSHAL_ERROR, span, "unmarshal of unknown thin array")
        base = self.raw_of(orig)
        before = (self.stats.meta_loads, self.stats.meta_stores)
        for i in range(n):
            raw = self.mem.read64(thin + 8 * i)
            fv = snapshot.get(raw)
            if fv is None:
                self.stats.meta_loads, self.stats.meta_stores = before
                raise Trap(TrapCode.MARSHAL_ERROR, span,
                           f"unmarshal: raw address {raw:#x} not in snapshot")
            from .types import MmPtrT, INT
            self.store_value(base + fatw * i, fv, MmPtrT(INT))
        self.stats.meta_loads, self.stats.meta_stores = before
        del self.marshal_snapshots[thin]
        if thin in self.allocator.live:
            self.allocator.free(thin)
        return orig

    # -- frames --

    def addr_map(self, func: TirFunc) -> dict:
        m = self._addr_maps.get(func.name)
        if m is None:
            m = {}
            for name, off, _ in func.frame.locked:
                m[name] = ("locked", off)
            for name, off, _ in func.frame.unlocked:
                m[name] = ("unlocked", off)
            self._addr_maps[func.name] = m
        return m

    def local_addr(self, frame: Frame, name: str) -> int:
        region, off = self.addr_map(frame.func)[name]
        if region == "locked":
            return frame.locked_payload + off
        fl = frame.func.frame
        locked_block = (HEADER_SIZE + (fl.locked_size + 15) // 16 * 16
                        if fl.locked else 0)
        return frame.base + locked_block + off

    def frame_enter(self, func: TirFunc) -> Frame:
        frame = Frame(func)
        size = func.frame.frame_size()
        self.sp = (self.sp - size) & ~15
        if self.sp < STACK_TOP - self.cfg.stack_size:
            raise Trap(TrapCode.INTERNAL_FAULT, None, "guest stack overflow")
        frame.base = self.sp
        if func.frame.locked:
            frame.locked_payload = frame.base + HEADER_SIZE
            self._zero(frame.base, size)
        elif size:
            self._zero(frame.base, size)
        return frame

    def frame_lock_init(self, frame: Frame):
        key = self.keygen.next()
        frame.frame_key = key
        if self.backend == "inplace":
            frame.frame_lock_addr = frame.locked_payload - 8
            self.mem.write64(frame.frame_lock_addr, key)
        elif self.backend == "disjoint":
            frame.frame_lock_addr = self.arena.alloc_lock(key)
        if self.oracle is not None and self.backend != "unchecked":
            self.oracle.on_alloc(frame.locked_payload,
                                 frame.func.frame.locked_size, "stack",
                                 key=key)

    def frame_lock_kill(self, frame: Frame):
        if frame.frame_key:
            if self.backend == "inplace":
                self.mem.write64(frame.frame_lock_addr, 0)
            elif self.backend == "disjoint":
                self.arena.free_lock(frame.frame_lock_addr)
            if self.oracle is not None:
                self.oracle.on_free(frame.locked_payload)
            frame.frame_key = 0
        for name, (payload, key, lock_addr, _) in list(frame.vlas.items()):
            if self.backend == "inplace":
                self.mem.write64(lock_addr, 0)
            elif self.backend == "disjoint":
                self.arena.free_lock(lock_addr)
            if self.oracle is not None:
                self.oracle.on_free(payload)
            del frame.vlas[name]

    def vla_alloc(self, frame: Frame, name: str, count: int, elem_size: int, span):
        size = count * elem_size
        if size < 0 or size > self.layout.max_offset:
            raise Trap(TrapCode.OBJECT_TOO_LARGE, span, f"VLA of {size} bytes")
        total = HEADER_SIZE + ((size + 15) // 16 * 16)
        self.sp = (self.sp - total) & ~15
        if self.sp < STACK_TOP - self.cfg.stack_size:
            raise Trap(TrapCode.INTERNAL_FAULT, span, "guest stack overflow")
        payload = self.sp + HEADER_SIZE
        self._zero(self.sp, total)
        key = self.keygen.next()
        if self.backend == "inplace":
            lock_addr = payload - 8
            self.mem.write64(lock_addr, key)
        elif self.backend == "disjoint":
            lock_addr = self.arena.alloc_lock(key)
        else:
            lock_addr = 0
        frame.vlas[name] = (payload, key, lock_addr, size)
        if self.oracle is not None and self.backend != "unchecked":
            self.oracle.on_alloc(payload, size, "stack", key=key)

    # -- execution --

    def run(self, entry: str = "main") -> RunResult:
        trap = None
        try:
            if entry not in self.prog.funcs:
                raise Trap(TrapCode.INTERNAL_FAULT, None, f"no function {entry}")
            self.call(entry, [])
            code = 0
        except Trap as t:
            trap = t
            code = int(t.code)
        self.stats.fat_slot_bytes = len(self.fat_slots) * (
            8 if self.backend == "inplace" else
            16 if self.backend == "disjoint" else 0)
        if self.backend == "disjoint":
            self.stats.table_entry_bytes = self.table.entry_bytes
            self.stats.table_page_bytes = self.table.page_bytes
        return RunResult(code, "".join(self.out), self.stats, trap,
                         self.divergence)

    def call(self, fname: str, args: list):
        func = self.prog.funcs[fname]
        saved_sp = self.sp
        frame = self.frame_enter(func)
        amap = self.addr_map(func)
        for (pname, ptype), val in zip(func.params, args):
            if pname in amap:
                self.store_value(self.local_addr(frame, pname), val, ptype)
            else:
                frame.locals[pname] = val
                if isinstance(val, FatVal):
                    self._shadow_slot(frame, pname, val)
        try:
            result = self.exec_blocks(frame)
        finally:
            self.sp = saved_sp
        return result

    def exec_blocks(self, frame: Frame):
        st = self.stats
        fstats = st.per_function.setdefault(
            frame.func.name, {"instrCount": 0, "keyChecksExec": 0})
        blocks = frame.func.blocks
        regs = frame.regs
        bi = 0
        ii = 0
        while True:
            block = blocks[bi]
            if ii >= len(block):
                # fall through to an implicit return (unreachable continuations)
                return None
            ins = block[ii]
            ii += 1
            st.instr_exec += 1
            fstats["instrCount"] += 1
            if st.instr_exec > self.cfg.max_instr:
                raise Trap(TrapCode.INTERNAL_FAULT, ins.span,
                           "instruction budget exceeded")
            cls = type(ins)
            if cls is tir.Const:
                regs[ins.dst] = ins.value
            elif cls is tir.GetLocal:
                regs[ins.dst] = frame.locals.get(ins.name, 0)
            elif cls is tir.SetLocal:
                val = regs[ins.src]
                frame.locals[ins.name] = val
                if isinstance(val, FatVal):
                    self._shadow_slot(frame, ins.name, val)
            elif cls is tir.BinOp:
                regs[ins.dst] = self.binop(ins.op, regs[ins.a], regs[ins.b], ins.span)
            elif cls is tir.KeyCheck:
                self.key_check(regs[ins.val], ins.span)
                fstats["keyChecksExec"] += 1
            elif cls is tir.LoadMem:
                regs[ins.dst] = self.load_value(self.raw_of(regs[ins.addr]), ins.type)
            elif cls is tir.StoreMem:
                self.store_value(self.raw_of(regs[ins.addr]), regs[ins.src], ins.type)
            elif cls is tir.PtrAdd:
                regs[ins.dst] = self.ptr_add(regs[ins.base], regs[ins.idx],
                                             ins.elem_size, ins.span)
            elif cls is tir.AddrLocal:
                regs[ins.dst] = self.addr_local(frame, ins)
            elif cls is tir.AddrGlobal:
                regs[ins.dst] = self.addr_global(ins)
            elif cls is tir.StrAddr:
                base = self.string_addr[ins.index]
                if ins.checked and self.backend != "unchecked":
                    regs[ins.dst] = self.fat_global(base, base)
                else:
                    regs[ins.dst] = base
            elif cls is tir.NullFat:
                regs[ins.dst] = NULL_FAT if self.backend != "unchecked" else 0
            elif cls is tir.Thin:
                regs[ins.dst] = self.raw_of(regs[ins.src])
            elif cls is tir.Trunc8:
                regs[ins.dst] = self.raw_of(regs[ins.src]) & 0xFF
            elif cls is tir.Alloc:
                regs[ins.dst] = self.mm_alloc(regs[ins.size], ins.span)
            elif cls is tir.Free:
                self.mm_free(regs[ins.val], ins.span)
            elif cls is tir.Marshal:
                regs[ins.dst] = self.marshal(regs[ins.array], regs[ins.count], ins.span)
            elif cls is tir.Unmarshal:
                regs[ins.dst] = self.unmarshal(self.raw_of(regs[ins.thin]),
                                               regs[ins.orig], regs[ins.count],
                                               ins.span)
            elif cls is tir.VlaAlloc:
                self.vla_alloc(frame, ins.name, regs[ins.count], ins.elem_size,
                               ins.span)
            elif cls is tir.CallI:
                result = self.call(ins.func, [regs[a] for a in ins.args])
                if ins.dst is not None:
                    regs[ins.dst] = result if result is not None else 0
            elif cls is tir.PrintInt:
                self.out.append(f"{to_signed(self.raw_of(regs[ins.src]))}\n")
            elif cls is tir.PrintStr:
                self.out.append(
                    self.mem.read_cstr(self.raw_of(regs[ins.src])) + "\n")
            elif cls is tir.ReadInt:
                if self.input_pos < len(self.guest_input):
                    regs[ins.dst] = self.guest_input[self.input_pos]
                    self.input_pos += 1
                else:
                    regs[ins.dst] = 0
            elif cls is tir.FrameLockInit:
                self.frame_lock_init(frame)
            elif cls is tir.FrameLockKill:
                self.frame_lock_kill(frame)
            elif cls is tir.Hint:
                st.instr_exec -= 1  # hints emit no runtime code
                fstats["instrCount"] -= 1
            elif cls is tir.Ret:
                return regs[ins.src] if ins.src is not None else None
            elif cls is tir.Jmp:
                bi, ii = ins.target, 0
            elif cls is tir.Br:
                bi = ins.then if self.raw_of(regs[ins.cond]) else ins.els
                ii = 0
            else:
                raise Trap(TrapCode.INTERNAL_FAULT, ins.span,
                           f"unknown instruction {cls.__name__}")

    def addr_local(self, frame: Frame, ins) -> object:
        if ins.name in frame.vlas:
            payload, key, lock_addr, _ = frame.vlas[ins.name]
            if ins.checked and self.backend != "unchecked":
                return FatVal(payload, key, 0, lock_addr)
            return payload
        addr = self.local_addr(frame, ins.name)
        if ins.checked and self.backend != "unchecked":
            off = addr - frame.locked_payload
            return FatVal(addr, frame.frame_key, off, frame.frame_lock_addr)
        return addr

    def addr_global(self, ins) -> object:
        base = self.global_addr[ins.name]
        if ins.checked and self.backend != "unchecked":
            return self.fat_global(base, base)
        return base

    def ptr_add(self, base, idx, elem_size: int, span):
        delta = to_signed(self.raw_of(idx) if isinstance(idx, FatVal) else idx) * elem_size
        if isinstance(base, FatVal):
            if self.backend == "unchecked":
                return (base.raw + delta) & MASK64
            new_off = base.offset + delta
            if new_off < 0 or new_off > self.layout.max_offset:
                raise Trap(TrapCode.OBJECT_TOO_LARGE, span,
                           f"pointer offset {new_off} not representable")
            return FatVal((base.raw + delta) & MASK64, base.key, new_off,
                          base.lock_addr)
        return (base + delta) & MASK64

    def binop(self, op: str, a, b, span):
        av = to_signed(self.raw_of(a)) if isinstance(a, FatVal) else a
        bv = to_signed(self.raw_of(b)) if isinstance(b, FatVal) else b
        if op == "+":
            return to_signed(av + bv)
        if op == "-":
            return to_signed(av - bv)
        if op == "*":
            return to_signed(av * bv)
        if op == "/":
            if bv == 0:
                raise Trap(TrapCode.INTERNAL_FAULT, span, "division by zero")
            return to_signed(cdiv(av, bv))
        if op == "%":
            if bv == 0:
                raise Trap(TrapCode.INTERNAL_FAULT, span, "modulo by zero")
            return to_signed(cmod(av, bv))
        if op == "==":
            return 1 if av == bv else 0
        if op == "!=":
            return 1 if av != bv else 0
        if op == "<":
            return 1 if av < bv else 0
        if op == "<=":
            return 1 if av <= bv else 0
        if op == ">":
            return 1 if av > bv else 0
        if op == ">=":
            return 1 if av >= bv else 0
        raise Trap(TrapCode.INTERNAL_FAULT, span, f"unknown operator {op}")


def strip_checks(prog: TirProgram) -> TirProgram:
    """Baseline backend: remove key checks, hints, and lock management."""
    import copy
    out = copy.copy(prog)
    out.funcs = {}
    for name, f in prog.funcs.items():
        nf = TirFunc(f.name, f.params,
                     [[ins for ins in block
                       if not isinstance(ins, (tir.KeyCheck, tir.Hint,
                                               tir.FrameLockInit,
                                               tir.FrameLockKill))]
                      for block in f.blocks],
                     f.frame, f.local_types, f.ret_type)
        out.funcs[name] = nf
    return out


def run_program(prog: TirProgram, cfg: VmConfig, guest_input=()) -> RunResult:
    if cfg.backend == "unchecked":
        prog = strip_checks(prog)
    vm = VM(prog, cfg, guest_input)
    result = vm.run()
    result.stats.key_checks_elided_static = sum(
        f.elided_static for f in prog.funcs.values())
    return result
