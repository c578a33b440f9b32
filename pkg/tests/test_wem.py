import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wca.errors import DimensionError, FormatError, MissingEmbeddingError
from wca.wem import (
    HEADER,
    PrecomputedStore,
    read_embedding_file,
    write_embedding_file,
)


def make_store(dim, entries, normalized=False):
    store = PrecomputedStore(dim=dim, normalized=normalized)
    for entry_id, values in entries:
        store.add(entry_id, values)
    return store


def roundtrip(store, tmp_path, name="store.wem1"):
    path = tmp_path / name
    write_embedding_file(store, path)
    return path, read_embedding_file(path)


class TestRoundTrip:
    def test_empty_store_is_13_bytes(self, tmp_path):
        path, loaded = roundtrip(make_store(4, []), tmp_path)
        assert path.stat().st_size == 13
        assert loaded.dim == 4 and len(loaded) == 0 and not loaded.normalized

    def test_two_ids_bit_exact(self, tmp_path):
        store = make_store(2, [("a", [1.5, -2.25]), ("b", [0.1, 3.0])])
        _, loaded = roundtrip(store, tmp_path)
        assert list(loaded.entries) == ["a", "b"]
        for key in ("a", "b"):
            original_f32 = np.asarray(store.entries[key], dtype=np.float32)
            np.testing.assert_array_equal(
                original_f32, loaded.entries[key].astype(np.float32)
            )

    def test_normalized_flag_round_trips(self, tmp_path):
        store = make_store(2, [("u", [0.6, 0.8])], normalized=True)
        _, loaded = roundtrip(store, tmp_path)
        assert loaded.normalized

    def test_unicode_ids(self, tmp_path):
        store = make_store(3, [("åçé::0", [1, 2, 3])])
        _, loaded = roundtrip(store, tmp_path)
        assert "åçé::0" in loaded

    @given(
        dim=st.integers(min_value=1, max_value=16),
        n=st.integers(min_value=0, max_value=8),
        data=st.data(),
    )
    @settings(max_examples=50, deadline=None)
    def test_random_stores_round_trip(self, dim, n, data, tmp_path_factory):
        tmp = tmp_path_factory.mktemp("wem")
        ids = data.draw(
            st.lists(st.text(min_size=1, max_size=12), min_size=n, max_size=n, unique=True)
        )
        store = PrecomputedStore(dim=dim)
        rng = np.random.default_rng(dim * 1000 + n)
        for entry_id in ids:
            store.add(entry_id, rng.normal(size=dim).astype(np.float32))
        path = tmp / "s.wem1"
        write_embedding_file(store, path)
        loaded = read_embedding_file(path)
        assert list(loaded.entries) == list(store.entries)
        for key in store.entries:
            np.testing.assert_array_equal(
                store.entries[key].astype(np.float32),
                loaded.entries[key].astype(np.float32),
            )


class TestStoreApi:
    def test_lookup(self):
        store = make_store(2, [("img_001", [1.0, 2.0])])
        np.testing.assert_array_equal(store.lookup("img_001"), [1.0, 2.0])
        assert store.lookup("img_001").dtype == np.float64

    def test_missing_id_names_it(self):
        store = make_store(2, [])
        with pytest.raises(MissingEmbeddingError, match="absent"):
            store.lookup("absent")

    def test_duplicate_add_rejected(self):
        store = make_store(2, [("x", [1, 2])])
        with pytest.raises(FormatError, match="duplicate"):
            store.add("x", [3, 4])

    def test_dim_enforced(self):
        store = make_store(2, [])
        with pytest.raises(DimensionError):
            store.add("bad", [1, 2, 3])

    def test_merge_duplicate_rejected(self):
        a = make_store(2, [("x", [1, 2])])
        b = make_store(2, [("x", [3, 4])])
        with pytest.raises(FormatError, match="duplicate"):
            a.merged_with(b)

    def test_merge_dim_mismatch(self):
        a = make_store(2, [])
        b = make_store(3, [])
        with pytest.raises(DimensionError):
            a.merged_with(b)


def valid_file_bytes(tmp_path) -> bytes:
    store = make_store(2, [("aa", [1.0, 2.0]), ("bb", [3.0, 4.0])])
    path = tmp_path / "valid.wem1"
    write_embedding_file(store, path)
    return path.read_bytes()


def corruptions(blob: bytes) -> dict[str, bytes]:
    """Ten distinct defects, each hitting a different validation rule."""
    bad_utf8 = bytearray(blob)
    bad_utf8[15] = 0xFF  # first id byte
    empty_id = bytearray(blob)
    empty_id[13:15] = struct.pack("<H", 0)
    dup = bytearray(blob)
    dup[25:27] = blob[13:15]
    dup[27:29] = blob[15:17]  # second record id "bb" -> "aa"
    flag7 = bytearray(blob)
    flag7[12] = 7
    dim0 = bytearray(blob)
    dim0[4:8] = struct.pack("<I", 0)
    return {
        "bad_magic": b"XXXX" + blob[4:],
        "short_header": blob[:9],
        "dim_zero": bytes(dim0),
        "bad_flag": bytes(flag7),
        "truncated_id_length": blob[:14],
        "truncated_id": blob[:16],
        "truncated_values": blob[:-3],
        "duplicate_id": bytes(dup),
        "trailing_garbage": blob + b"\x00\x01",
        "bad_utf8_id": bytes(bad_utf8),
        "empty_id": bytes(empty_id),
    }


class TestFormatErrors:
    def test_all_corruptions_raise_format_error(self, tmp_path):
        blob = valid_file_bytes(tmp_path)
        variants = corruptions(blob)
        assert len(variants) >= 10
        for name, payload in variants.items():
            path = tmp_path / f"{name}.wem1"
            path.write_bytes(payload)
            with pytest.raises(FormatError):
                read_embedding_file(path)

    def test_bad_magic_message_and_offset(self, tmp_path):
        blob = valid_file_bytes(tmp_path)
        path = tmp_path / "magic.wem1"
        path.write_bytes(b"XXXX" + blob[4:])
        with pytest.raises(FormatError, match="magic") as err:
            read_embedding_file(path)
        assert err.value.offset == 0

    def test_truncation_reports_offset(self, tmp_path):
        blob = valid_file_bytes(tmp_path)
        path = tmp_path / "trunc.wem1"
        path.write_bytes(blob[:-3])
        with pytest.raises(FormatError, match="byte offset"):
            read_embedding_file(path)

    def test_normalized_flag_violation(self, tmp_path):
        store = make_store(2, [("big", [3.0, 4.0])])
        store.normalized = True
        path = tmp_path / "norm.wem1"
        write_embedding_file(store, path)
        with pytest.raises(FormatError, match="norm"):
            read_embedding_file(path)

    def test_normalized_flag_accepts_unit_vectors(self, tmp_path):
        store = make_store(2, [("u", [0.6, 0.8])], normalized=True)
        _, loaded = roundtrip(store, tmp_path)
        assert abs(np.linalg.norm(loaded.lookup("u")) - 1.0) < 1e-3

    def test_non_finite_payload_rejected(self, tmp_path):
        blob = bytearray(valid_file_bytes(tmp_path))
        blob[15 + 2 : 15 + 6] = struct.pack("<f", float("nan"))
        path = tmp_path / "nan.wem1"
        path.write_bytes(bytes(blob))
        with pytest.raises(FormatError, match="non-finite"):
            read_embedding_file(path)


def test_header_is_13_bytes():
    assert HEADER.size == 13


def test_writer_rejects_oversized_ids(tmp_path):
    store = make_store(1, [])
    store.entries["x" * 70000] = np.zeros(1)
    with pytest.raises(FormatError, match="65535"):
        write_embedding_file(store, tmp_path / "big.wem1")
