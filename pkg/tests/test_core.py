import itertools
import math

import pytest

from hierzip.core import PARITIES, Box, HierarchyLayout, Parity, make_layout
from hierzip.exceptions import HierzipError, LayoutError


def brute_parity_counts(dims, level_stride_fine):
    """Count points of the stride-2t grid split by parity, by enumeration."""
    counts = {}
    for coord in itertools.product(*[range(n) for n in dims]):
        if any(c % level_stride_fine for c in coord):
            continue
        g = tuple(c // level_stride_fine for c in coord)
        p = tuple(gi % 2 for gi in g)
        counts[p] = counts.get(p, 0) + 1
    return counts


def test_parities_are_the_seven_nonzero_classes():
    assert len(PARITIES) == 7
    assert len(set(PARITIES)) == 7
    assert sorted(p.order for p in PARITIES) == [1, 1, 1, 2, 2, 2, 3]
    assert {p.label for p in PARITIES if p.order == 1} == {"b", "c", "e"}
    assert {p.label for p in PARITIES if p.order == 2} == {"d", "f", "g"}
    assert Parity(1, 1, 1).label == "h"
    for p in PARITIES:
        assert Parity.from_bits(p.bits) == p


def test_layout_8cube_three_levels():
    layout = make_layout((8, 8, 8), 3, 1e-2)
    assert layout.level_count(1) == 512 // 64
    assert layout.level_count(3) == 448
    assert layout.level_count(3) == 0.875 * 512
    assert sum(layout.level_counts()) == 512
    assert layout.grid_dims(1) == (2, 2, 2)
    assert layout.base_stride == 4


def test_layout_odd_dims_parity_split():
    layout = make_layout((5, 4, 4), 2, 1.0)
    brute = brute_parity_counts((5, 4, 4), 1)
    for p in PARITIES:
        dims = layout.subblock_dims(2, p)
        assert dims[0] == (3 if p.z == 0 else 2)
        assert math.prod(dims) == brute[tuple(p)]
    assert sum(layout.level_counts()) == 80


def test_eb_schedule_is_increasing():
    layout = make_layout((16, 16, 16), 3, 1e-2)
    ebs = layout.eb_per_level
    assert ebs[-1] == 1e-2
    assert all(a < b for a, b in zip(ebs, ebs[1:]))


@pytest.mark.parametrize("levels", [2, 3])
def test_level_counts_sum_exhaustively(levels):
    for dims in itertools.product(range(2, 18), repeat=3):
        if min(dims) < 2 ** (levels - 1):
            with pytest.raises(LayoutError):
                HierarchyLayout(dims, levels)
            continue
        layout = HierarchyLayout(dims, levels)
        assert sum(layout.level_counts()) == math.prod(dims)
        assert layout.level_count(1) == math.prod(-(-n // layout.base_stride) for n in dims)


@pytest.mark.parametrize("dims,levels", [((5, 6, 7), 2), ((9, 8, 11), 3), ((4, 4, 4), 3)])
def test_locate_is_a_bijection(dims, levels):
    layout = HierarchyLayout(dims, levels)
    seen = set()
    for coord in itertools.product(*[range(n) for n in dims]):
        level, parity, index = layout.locate(coord)
        key = (level, parity, index)
        assert key not in seen
        seen.add(key)
        assert layout.coord_of(level, parity, index) == coord
        shape = layout.subblock_dims(level, parity) if parity else layout.grid_dims(1)
        assert all(0 <= i < n for i, n in zip(index, shape))
    assert len(seen) == math.prod(dims)


def test_divisible_by_four_exact_fractions():
    for dims in [(4, 8, 12), (16, 16, 16), (8, 12, 20)]:
        layout = make_layout(dims, 3, 1.0) if min(dims) >= 8 else HierarchyLayout(dims, 3)
        total = math.prod(dims)
        assert layout.level_count(1) * 64 == total
        assert layout.level_count(3) * 8 == 7 * total


@pytest.mark.parametrize(
    "dims,levels,eb",
    [((4, 8, 8), 3, 1.0), ((8, 8, 1), 2, 1.0), ((8, 8, 8), 3, 0.0), ((8, 8, 8), 3, -1.0), ((8, 8, 8), 4, 1.0)],
)
def test_make_layout_rejects(dims, levels, eb):
    with pytest.raises(LayoutError):
        make_layout(dims, levels, eb)


def test_box_parse_format_roundtrip():
    box = Box.parse("0:4, 2:9,3:5")
    assert box.lo == (0, 2, 3) and box.hi == (4, 9, 5)
    assert Box.parse(box.format()) == box
    assert box.shape == (4, 7, 2)
    with pytest.raises(HierzipError):
        Box((0, 0, 0), (0, 1, 1))
    with pytest.raises(HierzipError):
        Box.parse("0:4,1:2")
