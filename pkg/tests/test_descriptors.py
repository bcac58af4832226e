"""Descriptor packing, bit order, distances, and substring slicing."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hashloop.descriptors import (
    DESCRIPTOR_BITS,
    SubstringConfig,
    as_descriptor_array,
    flip_bits,
    get_bit,
    hamming_distance,
    pack_bytes,
    random_descriptors,
    substring_value,
    substring_values,
    unpack_bytes,
)

import oracles

descriptor_bytes = st.binary(min_size=32, max_size=32)


def from_int(value: int) -> np.ndarray:
    return pack_bytes(value.to_bytes(32, "little"))[0]


class TestSubstringConfig:
    def test_defaults(self):
        cfg = SubstringConfig()
        assert cfg.n_substrings == 16
        assert cfg.substring_bits == 16
        assert cfg.n_bucket_slots == 65536

    @pytest.mark.parametrize("m", [1, 2, 4, 8, 16, 32, 64, 128, 256])
    def test_from_substring_count(self, m):
        cfg = SubstringConfig.from_substring_count(m)
        assert cfg.n_substrings * cfg.substring_bits == DESCRIPTOR_BITS

    @pytest.mark.parametrize("m, l", [(3, 16), (16, 8), (0, 256), (16, 0)])
    def test_rejects_bad_split(self, m, l):
        with pytest.raises(ValueError):
            SubstringConfig(m, l)

    def test_rejects_non_divisor_count(self):
        with pytest.raises(ValueError):
            SubstringConfig.from_substring_count(3)


class TestPacking:
    @given(descriptor_bytes)
    def test_round_trip(self, raw):
        assert unpack_bytes(pack_bytes(raw)) == raw

    def test_bit_order_is_little_endian(self):
        # byte 0 = bits 0..7 with bit 0 least significant
        desc = pack_bytes(bytes([0b00000001] + [0] * 31))[0]
        assert get_bit(desc, 0) == 1
        assert all(get_bit(desc, i) == 0 for i in range(1, 16))
        desc = pack_bytes(bytes([0] * 31 + [0b10000000]))[0]
        assert get_bit(desc, 255) == 1

    def test_rejects_wrong_dtype_and_shape(self):
        with pytest.raises(TypeError):
            as_descriptor_array(np.zeros((1, 4), dtype=np.uint32))
        with pytest.raises(ValueError):
            as_descriptor_array(np.zeros((1, 5), dtype=np.uint64))
        with pytest.raises(ValueError):
            pack_bytes(b"\x00" * 33)


class TestHamming:
    def test_identical_is_zero(self):
        desc = from_int(2**256 - 1)
        assert hamming_distance(desc, desc) == 0

    def test_complement_is_256(self):
        assert hamming_distance(from_int(0), from_int(2**256 - 1)) == 256

    def test_single_flip(self):
        base = from_int(0)
        for position in [0, 63, 64, 100, 255]:
            assert hamming_distance(base, flip_bits(base, [position])) == 1

    @given(descriptor_bytes, descriptor_bytes)
    def test_matches_integer_oracle(self, raw_a, raw_b):
        a, b = pack_bytes(raw_a)[0], pack_bytes(raw_b)[0]
        assert hamming_distance(a, b) == oracles.hamming(a, b)

    def test_flip_count_equals_distance(self, rng):
        base = random_descriptors(rng, 1)[0]
        positions = rng.choice(256, size=40, replace=False)
        assert hamming_distance(base, flip_bits(base, positions)) == 40


class TestSubstrings:
    def test_bit_zero_maps_to_first_substring(self):
        cfg = SubstringConfig()
        desc = from_int(1)
        assert substring_value(desc, 0, cfg) == 1
        assert all(substring_value(desc, k, cfg) == 0 for k in range(1, 16))

    def test_known_value(self):
        cfg = SubstringConfig()
        # substring 1 covers bits 16..31; set bit 16 -> value 1 there
        desc = from_int(1 << 16)
        assert substring_value(desc, 1, cfg) == 1
        assert substring_value(desc, 0, cfg) == 0

    @given(descriptor_bytes,
           st.sampled_from([1, 2, 4, 8, 16, 32, 64, 128, 256]))
    def test_matches_integer_oracle(self, raw, m):
        cfg = SubstringConfig.from_substring_count(m)
        desc = pack_bytes(raw)[0]
        assert substring_values(desc, cfg) == oracles.substrings(
            desc, m, cfg.substring_bits)

    @given(descriptor_bytes, descriptor_bytes)
    def test_substring_distances_sum_to_total(self, raw_a, raw_b):
        # the split is a partition of the 256 bits
        cfg = SubstringConfig()
        a, b = pack_bytes(raw_a)[0], pack_bytes(raw_b)[0]
        per_substring = [
            bin(substring_value(a, k, cfg) ^ substring_value(b, k, cfg)
                ).count("1")
            for k in range(cfg.n_substrings)
        ]
        assert sum(per_substring) == hamming_distance(a, b)

    @given(descriptor_bytes, st.integers(0, 15))
    def test_pigeonhole_shares_a_substring(self, raw, n_flips):
        # fewer flips than substrings forces at least one substring equal
        cfg = SubstringConfig()
        base = pack_bytes(raw)[0]
        rng = np.random.default_rng(n_flips)
        other = flip_bits(base, rng.choice(256, n_flips, replace=False))
        shared = any(
            substring_value(base, k, cfg) == substring_value(other, k, cfg)
            for k in range(cfg.n_substrings)
        )
        assert shared

    def test_rejects_out_of_range(self):
        cfg = SubstringConfig()
        desc = from_int(0)
        with pytest.raises(ValueError):
            substring_value(desc, 16, cfg)
        with pytest.raises(ValueError):
            get_bit(desc, 256)
        with pytest.raises(ValueError):
            flip_bits(desc, [300])
