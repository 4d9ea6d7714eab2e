"""Metadata word packing: layout constants and bijection."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tempcc.tir import GLOBAL_KEY, HEADER_SIZE, INVALID_KEY, MetaLayout, \
    OffsetOverflow


def test_reserved_keys():
    assert INVALID_KEY == 0
    assert GLOBAL_KEY == 1
    assert HEADER_SIZE == 16


def test_pack_layout_example():
    # key 42, offset 0x14 at 32 key bits: key in the high word
    lay = MetaLayout(32)
    assert lay.pack(42, 0x14) == 0x0000002A_00000014


def test_field_widths():
    lay = MetaLayout(40)
    assert lay.max_key == (1 << 40) - 1
    assert lay.max_offset == (1 << 24) - 1
    with pytest.raises(OffsetOverflow):
        lay.pack(1, 1 << 24)


@pytest.mark.parametrize("bits", [2, 8, 32, 40, 48])
@given(data=st.data())
def test_pack_unpack_bijection(bits, data):
    lay = MetaLayout(bits)
    key = data.draw(st.integers(0, lay.max_key))
    off = data.draw(st.integers(0, lay.max_offset))
    word = lay.pack(key, off)
    assert 0 <= word < (1 << 64)
    assert lay.unpack(word) == (key, off)


def test_key_bits_range_enforced():
    with pytest.raises(ValueError):
        MetaLayout(1)
    with pytest.raises(ValueError):
        MetaLayout(49)
