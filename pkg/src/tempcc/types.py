"""Guest-language types and size/alignment computation."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Type:
    pass


@dataclass(frozen=True)
class IntT(Type):
    def __str__(self):
        return "int"


@dataclass(frozen=True)
class CharT(Type):
    def __str__(self):
        return "char"


@dataclass(frozen=True)
class VoidT(Type):
    def __str__(self):
        return "void"


@dataclass(frozen=True)
class StructT(Type):
    name: str

    def __str__(self):
        return f"struct {self.name}"


@dataclass(frozen=True)
class ArrayT(Type):
    elem: Type
    length: int

    def __str__(self):
        return f"{self.elem}[{self.length}]"


@dataclass(frozen=True)
class RawPtrT(Type):
    pointee: Type

    def __str__(self):
        return f"{self.pointee}*"


@dataclass(frozen=True)
class MmPtrT(Type):
    pointee: Type

    def __str__(self):
        return f"mm_ptr<{self.pointee}>"


@dataclass(frozen=True)
class MmArrayPtrT(Type):
    pointee: Type

    def __str__(self):
        return f"mm_array_ptr<{self.pointee}>"


INT = IntT()
CHAR = CharT()
VOID = VoidT()

FAT_PTR_SIZE = 16  # checked-pointer value: 8-byte address + 8-byte metadata word


def is_fat(t: Type) -> bool:
    return isinstance(t, (MmPtrT, MmArrayPtrT))


def is_pointer(t: Type) -> bool:
    return isinstance(t, (RawPtrT, MmPtrT, MmArrayPtrT))


def pointee_of(t: Type) -> Type:
    assert is_pointer(t)
    return t.pointee


def contains_pointer(t: Type, structs: dict[str, "StructInfo"],
                     _seen: frozenset = frozenset()) -> bool:
    if is_pointer(t):
        return True
    if isinstance(t, ArrayT):
        return contains_pointer(t.elem, structs, _seen)
    if isinstance(t, StructT):
        if t.name in _seen:
            return False
        seen = _seen | {t.name}
        return any(contains_pointer(ft, structs, seen)
                   for _, ft in structs[t.name].fields)
    return False


def contains_fat_below_raw(t: Type, structs: dict[str, "StructInfo"],
                           below_raw=False,
                           _seen: frozenset = frozenset()) -> bool:
    """True if a checked (fat) pointer occurs anywhere beneath a raw pointer in t."""
    if is_fat(t) and below_raw:
        return True
    if isinstance(t, RawPtrT):
        return contains_fat_below_raw(t.pointee, structs, True, _seen)
    if is_fat(t):
        return contains_fat_below_raw(t.pointee, structs, below_raw, _seen)
    if isinstance(t, ArrayT):
        return contains_fat_below_raw(t.elem, structs, below_raw, _seen)
    if isinstance(t, StructT):
        # cycle cutoff: a struct already on the path adds nothing new at the
        # same below_raw polarity
        tag = (t.name, below_raw)
        if tag in _seen:
            return False
        seen = _seen | {tag}
        return any(contains_fat_below_raw(ft, structs, below_raw, seen)
                   for _, ft in structs[t.name].fields)
    return False


@dataclass
class StructInfo:
    name: str
    fields: list[tuple[str, Type]]


class SizeModel:
    """Computes sizes, alignments, and struct field offsets.

    fat_width is 16 for backends that materialize metadata in memory and 8
    for the thin-pointer baseline (checked pointers degrade to raw words).
    """

    def __init__(self, structs: dict[str, StructInfo], fat_width: int = FAT_PTR_SIZE):
        self.structs = structs
        self.fat_width = fat_width
        self._layout_cache: dict[str, tuple[int, int, dict[str, int]]] = {}

    def sizeof(self, t: Type) -> int:
        if isinstance(t, (IntT, RawPtrT)):
            return 8
        if isinstance(t, CharT):
            return 1
        if is_fat(t):
            return self.fat_width
        if isinstance(t, ArrayT):
            return t.length * self.sizeof(t.elem)
        if isinstance(t, StructT):
            return self.struct_layout(t.name)[0]
        raise ValueError(f"sizeof undefined for {t}")

    def alignof(self, t: Type) -> int:
        if isinstance(t, CharT):
            return 1
        if isinstance(t, ArrayT):
            return self.alignof(t.elem)
        if isinstance(t, StructT):
            return self.struct_layout(t.name)[1]
        return 8

    def struct_layout(self, name: str) -> tuple[int, int, dict[str, int]]:
        """Returns (size, align, field offsets) with natural alignment padding."""
        if name in self._layout_cache:
            return self._layout_cache[name]
        info = self.structs[name]
        off = 0
        align = 1
        offsets: dict[str, int] = {}
        for fname, ft in info.fields:
            a = self.alignof(ft)
            align = max(align, a)
            off = (off + a - 1) // a * a
            offsets[fname] = off
            off += self.sizeof(ft)
        size = (off + align - 1) // align * align if off else 0
        result = (size, align, offsets)
        self._layout_cache[name] = result
        return result

    def field_offset(self, struct_name: str, field: str) -> int:
        return self.struct_layout(struct_name)[2][field]

    def field_type(self, struct_name: str, field: str) -> Type:
        for fname, ft in self.structs[struct_name].fields:
            if fname == field:
                return ft
        raise KeyError(field)
