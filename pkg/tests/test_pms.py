"""Memory-spectrum image construction and PNG round trips."""
import numpy as np
import pytest
from hypothesis import given, strategies as st

from pmsindex.errors import DataError, DegenerateImageError
from pmsindex.memcollect import MemorySnapshot, MemoryTrace
from pmsindex.pms import (
    ceil_sqrt,
    decode_png,
    encode_png,
    flatten,
    normalize_channels,
    pms_image,
    reshape_square,
    str_to_int,
)


def _trace(*snapshot_entries):
    snapshots = [
        MemorySnapshot(breakpoint=10 + j, seq=j + 1, entries=list(entries))
        for j, entries in enumerate(snapshot_entries)
    ]
    return MemoryTrace(test_id="f", snapshots=snapshots)


class TestStrToInt:
    def test_worked_example(self):
        assert str_to_int("Ee01") == 611

    def test_empty_string(self):
        assert str_to_int("") == 0

    def test_order_sensitivity(self):
        assert str_to_int("ab") == 293
        assert str_to_int("ba") == 292

    def test_single_character_is_its_code(self):
        assert str_to_int("A") == 65

    def test_non_ascii_uses_utf8_bytes(self):
        degree = "°"  # two UTF-8 bytes: 0xc2 0xb0
        assert str_to_int(degree) == 1 * 0xC2 + 2 * 0xB0

    @given(
        st.text(alphabet=st.characters(min_codepoint=33, max_codepoint=126), min_size=2, max_size=8),
        st.integers(0, 6),
    )
    def test_adjacent_transpositions_always_change_the_encoding(self, s, pos):
        # position weighting is order-sensitive: swapping two adjacent
        # distinct characters shifts the sum by exactly their code
        # difference.  (Full permutation-invariance does not hold: some
        # rotations collide, e.g. "pms" and "msp" both encode to 675.)
        pos = pos % (len(s) - 1)
        if s[pos] == s[pos + 1]:
            return
        swapped = s[:pos] + s[pos + 1] + s[pos] + s[pos + 2:]
        assert str_to_int(swapped) != str_to_int(s)

    def test_some_rotations_collide(self):
        assert str_to_int("pms") == str_to_int("msp") == 675


class TestFlatten:
    def test_snapshot_order_and_lengths(self):
        trace = _trace(
            [("x", "1", 1), ("y", "2", 1)],
            [("x", "3", 1), ("y", "4", 1), ("z", "5", 2)],
        )
        names, values, depths = flatten(trace)
        assert len(names) == len(values) == len(depths) == 5
        assert names[:2] == [str_to_int("x"), str_to_int("y")]
        assert values == [str_to_int(v) for v in ("1", "2", "3", "4", "5")]
        assert depths == [1, 1, 1, 1, 2]

    def test_single_entry(self):
        names, values, depths = flatten(_trace([("x", "7", 1)]))
        assert (names, values, depths) == ([str_to_int("x")], [str_to_int("7")], [1])

    def test_empty_trace_yields_degenerate_image_error(self):
        with pytest.raises(DegenerateImageError):
            pms_image(MemoryTrace(test_id="f", snapshots=[]))


class TestReshape:
    def test_column_major_fill_with_zero_padding(self):
        plane = reshape_square([10, 20, 30, 40, 50])
        expected = np.array([[10, 40, 0], [20, 50, 0], [30, 0, 0]])
        assert np.array_equal(plane, expected)

    def test_perfect_square_has_no_padding(self):
        plane = reshape_square([1, 2, 3, 4])
        assert np.array_equal(plane, np.array([[1, 3], [2, 4]]))

    def test_single_element(self):
        assert np.array_equal(reshape_square([9]), np.array([[9]]))

    def test_empty_rejected(self):
        with pytest.raises(DegenerateImageError):
            reshape_square([])

    @given(st.integers(1, 400))
    def test_side_is_ceil_sqrt(self, m):
        side = ceil_sqrt(m)
        assert (side - 1) ** 2 < m <= side**2
        plane = reshape_square(list(range(1, m + 1)))
        assert plane.shape == (side, side)
        assert int(np.count_nonzero(plane)) == m  # inputs 1..m are nonzero


class TestNormalize:
    def test_min_max_scaling(self):
        mat = np.zeros((3, 1, 3), dtype=np.int64)
        mat[:, 0, 0] = [0, 50, 100]
        out = normalize_channels(mat)
        assert list(out[:, 0, 0]) == [0, 128, 255]

    def test_constant_channel_becomes_zeros(self):
        mat = np.full((2, 2, 3), 7, dtype=np.int64)
        assert normalize_channels(mat).sum() == 0

    def test_full_range_channel_is_fixed(self):
        mat = np.zeros((2, 1, 3), dtype=np.int64)
        mat[:, 0, 1] = [0, 255]
        out = normalize_channels(mat)
        assert list(out[:, 0, 1]) == [0, 255]

    def test_all_cells_within_byte_range(self):
        rng = np.random.default_rng(0)
        mat = rng.integers(-5000, 5000, size=(4, 4, 3))
        out = normalize_channels(mat)
        assert out.dtype == np.uint8
        assert out.min() >= 0 and out.max() <= 255


class TestPmsImage:
    def test_channels_and_shape(self):
        trace = _trace([("x", "1", 1), ("yy", "23", 2), ("z", "4", 2)])
        image = pms_image(trace)
        assert image.pixels.shape == (2, 2, 3)
        assert image.original_side == 2
        assert image.m == 3

    def test_equal_traces_give_pixel_identical_images(self):
        trace_a = _trace([("x", "1", 1), ("y", "2", 1)])
        trace_b = _trace([("x", "1", 1), ("y", "2", 1)])
        assert np.array_equal(pms_image(trace_a).pixels, pms_image(trace_b).pixels)

    def test_depth_channel_is_blue(self):
        trace = _trace([("a", "1", 1), ("b", "2", 9)])
        image = pms_image(trace)
        blue = image.pixels[:, :, 2]
        assert blue.max() == 255  # depth 9 scales to the top of the range


class TestPng:
    def test_round_trip_identity(self, tmp_path):
        trace = _trace([("x", "1", 1), ("y", "2", 1), ("z", "3", 2), ("w", "4", 2), ("v", "5", 3)])
        image = pms_image(trace)
        path = tmp_path / "img.png"
        encode_png(image, path)
        back = decode_png(path)
        assert np.array_equal(back.pixels, image.pixels)
        assert back.original_side == image.original_side
        assert back.m == image.m

    def test_1x1_image(self, tmp_path):
        image = pms_image(_trace([("x", "1", 1)]))
        path = tmp_path / "one.png"
        encode_png(image, path)
        assert decode_png(path).pixels.shape == (1, 1, 3)

    def test_truncated_file_rejected(self, tmp_path):
        image = pms_image(_trace([("x", "1", 1), ("y", "2", 1)]))
        path = tmp_path / "broken.png"
        encode_png(image, path)
        path.write_bytes(path.read_bytes()[:20])
        with pytest.raises(DataError):
            decode_png(path)

    def test_byte_identical_reruns(self, tmp_path):
        image = pms_image(_trace([("x", "1", 1), ("y", "2", 1), ("z", "3", 1)]))
        p1, p2 = tmp_path / "a.png", tmp_path / "b.png"
        encode_png(image, p1)
        encode_png(image, p2)
        assert p1.read_bytes() == p2.read_bytes()
