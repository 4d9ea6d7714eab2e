"""Simulated 64-bit memory, lock-headed heap allocator, key generation,
disjoint metadata table, and the byte-granularity liveness oracle.

Freed heap bytes stay readable: a key check may load a stale lock without
the substrate itself faulting, matching real hardware.
"""

from __future__ import annotations

from bisect import bisect_right, insort
from dataclasses import dataclass, field

GLOBALS_BASE = 0x0001_0000
STACK_TOP = 0x4000_0000
HEAP_BASE = 0x1_0000_0000
LOCK_ARENA_BASE = 0x2_0000_0000

DEFAULT_HEAP_SIZE = 256 * 1024 * 1024
DEFAULT_STACK_SIZE = 8 * 1024 * 1024
DEFAULT_LOCK_ARENA_SIZE = 16 * 1024 * 1024


class MemFault(Exception):
    pass


class Segment:
    def __init__(self, base: int, size: int):
        self.base = base
        self.size = size
        self.data = bytearray()

    def contains(self, addr: int) -> bool:
        return self.base <= addr < self.base + self.size

    def read(self, addr: int, n: int) -> int:
        off = addr - self.base
        end = min(off + n, len(self.data))
        if end <= off:
            return 0
        chunk = bytes(self.data[off:end]) + b"\0" * (off + n - end)
        return int.from_bytes(chunk, "little")

    def write(self, addr: int, n: int, value: int):
        off = addr - self.base
        if off + n > len(self.data):
            self.data.extend(b"\0" * (off + n - len(self.data)))
        self.data[off : off + n] = (value & ((1 << (8 * n)) - 1)).to_bytes(n, "little")


class SimMemory:
    def __init__(self, globals_size: int = 1 << 20,
                 heap_size: int = DEFAULT_HEAP_SIZE,
                 stack_size: int = DEFAULT_STACK_SIZE,
                 lock_arena_size: int = DEFAULT_LOCK_ARENA_SIZE):
        self.globals = Segment(GLOBALS_BASE, globals_size)
        self.stack = Segment(STACK_TOP - stack_size, stack_size)
        self.heap = Segment(HEAP_BASE, heap_size)
        self.lock_arena = Segment(LOCK_ARENA_BASE, lock_arena_size)
        self.segments = [self.globals, self.stack, self.heap, self.lock_arena]

    def segment_for(self, addr: int):
        for s in self.segments:
            if s.contains(addr):
                return s
        return None

    def read(self, addr: int, n: int) -> int:
        s = self.segment_for(addr)
        if s is None:
            return 0  # reads of unmapped bytes yield zero
        return s.read(addr, n)

    def write(self, addr: int, n: int, value: int):
        s = self.segment_for(addr)
        if s is None:
            raise MemFault(f"write outside all segments: {addr:#x}")
        s.write(addr, n, value)

    def read8(self, a):
        return self.read(a, 1)

    def read64(self, a):
        return self.read(a, 8)

    def write8(self, a, v):
        self.write(a, 1, v)

    def write64(self, a, v):
        self.write(a, 8, v)

    def read_cstr(self, addr: int, limit: int = 1 << 20) -> str:
        out = []
        for i in range(limit):
            b = self.read8(addr + i)
            if b == 0:
                break
            out.append(chr(b))
        return "".join(out)


class HeapAllocator:
    """First-fit free list over the heap segment, 16-byte granularity,
    freed blocks coalesced with free neighbors and eagerly reused."""

    def __init__(self, base: int = HEAP_BASE, size: int = DEFAULT_HEAP_SIZE):
        self.base = base
        self.size = size
        self.free_list: list[tuple[int, int]] = [(base, size)]  # sorted by start
        self.live: dict[int, int] = {}  # block start -> block size

    @staticmethod
    def _round(n: int) -> int:
        return max(16, (n + 15) // 16 * 16)

    def alloc(self, nbytes: int) -> int | None:
        want = self._round(nbytes)
        for i, (start, size) in enumerate(self.free_list):
            if size >= want:
                if size == want:
                    self.free_list.pop(i)
                else:
                    self.free_list[i] = (start + want, size - want)
                self.live[start] = want
                return start
        return None

    def free(self, start: int):
        size = self.live.pop(start)
        lo = 0
        hi = len(self.free_list)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.free_list[mid][0] < start:
                lo = mid + 1
            else:
                hi = mid
        self.free_list.insert(lo, (start, size))
        # coalesce with neighbors
        i = max(0, lo - 1)
        while i < len(self.free_list) - 1:
            s0, z0 = self.free_list[i]
            s1, z1 = self.free_list[i + 1]
            if s0 + z0 == s1:
                self.free_list[i : i + 2] = [(s0, z0 + z1)]
            else:
                i += 1
                if i > lo:
                    break

    def total_free(self) -> int:
        return sum(z for _, z in self.free_list)


class KeyGen:
    """Deterministic key source: seeded pseudo-random first key, then +1 per
    request; 0 (invalid) and 1 (global) are never issued."""

    def __init__(self, key_bits: int = 32, seed: int = 0):
        self.key_bits = key_bits
        self.mask = (1 << key_bits) - 1
        x = (seed ^ 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF or 1
        x ^= (x << 13) & 0xFFFFFFFFFFFFFFFF
        x ^= x >> 7
        x ^= (x << 17) & 0xFFFFFFFFFFFFFFFF
        self.next_key = x & self.mask
        if self.next_key < 2:
            self.next_key = 2

    def next(self) -> int:
        k = self.next_key
        nk = (k + 1) & self.mask
        if nk < 2:
            nk = 2
        self.next_key = nk
        return k


class LockArena:
    """8-byte lock slots for the disjoint backend, living apart from objects."""

    def __init__(self, mem: SimMemory):
        self.mem = mem
        self.bump = LOCK_ARENA_BASE
        self.free_slots: list[int] = []
        self.allocated = 0

    def alloc_lock(self, value: int) -> int:
        if self.free_slots:
            addr = self.free_slots.pop()
        else:
            addr = self.bump
            self.bump += 8
        self.allocated += 1
        self.mem.write64(addr, value)
        return addr

    def free_lock(self, addr: int):
        self.mem.write64(addr, 0)
        self.allocated -= 1
        self.free_slots.append(addr)


class DisjointTable:
    """Two-level trie mapping a pointer's storage address to a 16-byte
    (key, lock address) entry."""

    PAGE_SHIFT = 12
    ENTRY_BYTES = 16

    def __init__(self):
        self.directory: dict[int, dict[int, tuple[int, int]]] = {}
        self.entry_count = 0

    def set(self, storage_addr: int, key: int, lock_addr: int, offset: int = 0):
        # offset rides along for simulation bookkeeping; the modeled entry
        # is still 16 bytes (key + lock address)
        page_id = storage_addr >> self.PAGE_SHIFT
        page = self.directory.get(page_id)
        if page is None:
            page = self.directory[page_id] = {}
        slot = storage_addr & ((1 << self.PAGE_SHIFT) - 1)
        if slot not in page:
            self.entry_count += 1
        page[slot] = (key, lock_addr, offset)

    def get(self, storage_addr: int) -> tuple[int, int, int] | None:
        page = self.directory.get(storage_addr >> self.PAGE_SHIFT)
        if page is None:
            return None
        return page.get(storage_addr & ((1 << self.PAGE_SHIFT) - 1))

    @property
    def entry_bytes(self) -> int:
        return self.entry_count * self.ENTRY_BYTES

    @property
    def page_bytes(self) -> int:
        # a leaf page covers 4 KiB of address space: 512 entries of 16 bytes,
        # committed in full when first touched
        per_page = (1 << self.PAGE_SHIFT) // 8 * self.ENTRY_BYTES
        return len(self.directory) * per_page


@dataclass
class AllocRecord:
    id: int
    start: int  # payload start
    size: int
    kind: str  # 'heap' | 'stack' | 'global'
    live: bool = True


class Oracle:
    """Ground-truth liveness: exact byte-to-allocation mapping, independent
    of the key-lock mechanism."""

    def __init__(self):
        self.records: list[AllocRecord] = []
        self._live_starts: list[int] = []
        self._live_by_start: dict[int, AllocRecord] = {}
        self.by_key: dict[int, AllocRecord] = {}

    def on_alloc(self, start: int, size: int, kind: str = "heap",
                 key: int | None = None) -> int:
        rec = AllocRecord(len(self.records), start, size, kind)
        self.records.append(rec)
        insort(self._live_starts, start)
        self._live_by_start[start] = rec
        if key is not None and key >= 2:
            # provenance index: lets a checker distinguish a stale pointer
            # from a fresh object that reuses the same address
            self.by_key[key] = rec
        return rec.id

    def on_free(self, start: int):
        rec = self._live_by_start.pop(start, None)
        if rec is None:
            raise MemFault(f"oracle: free of unknown block {start:#x}")
        assert rec.live
        rec.live = False
        self._live_starts.remove(start)

    def query_key(self, key: int, addr: int) -> tuple[str, AllocRecord | None]:
        """Provenance-aware liveness: the verdict is about the allocation the
        pointer was derived from, not whoever occupies the address now."""
        rec = self.by_key.get(key)
        if rec is None:
            return "unknown", None
        if not rec.live:
            return "dead", rec
        if rec.start <= addr < rec.start + max(rec.size, 1):
            return "live", rec
        return "unknown", rec

    def query(self, addr: int) -> tuple[str, AllocRecord | None]:
        """Returns ('live'|'dead'|'unknown', record)."""
        i = bisect_right(self._live_starts, addr)
        if i:
            rec = self._live_by_start[self._live_starts[i - 1]]
            if rec.start <= addr < rec.start + max(rec.size, 1):
                return "live", rec
        for rec in reversed(self.records):
            if not rec.live and rec.start <= addr < rec.start + max(rec.size, 1):
                return "dead", rec
        return "unknown", None
