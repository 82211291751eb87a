"""The exporter's readers and writers against the benchmark package's."""

import numpy as np
import pytest
from ctdegrad import fileio as primary_fileio
from ctdegrad.grids import Image

from ctexport.ctde import save_embeddings
from ctexport.ctdi import FormatError, load_image


@pytest.fixture()
def slice_file(tmp_path):
    rng = np.random.default_rng(31)
    values = rng.normal(0.0, 300.0, size=(24, 17))
    path = tmp_path / "slice.ctdi"
    primary_fileio.save_image(path, Image(values=values, pixel_spacing_mm=0.75))
    return path, values


def test_ctdi_reader_matches_primary_writer(slice_file):
    path, values = slice_file
    loaded, spacing = load_image(path)
    assert loaded.dtype == np.float64
    # the container stores float32; one rounding is the exact contract
    np.testing.assert_array_equal(loaded, values.astype(np.float32))
    assert spacing == np.float32(0.75)


def test_ctdi_reader_rejects_bad_magic(tmp_path, slice_file):
    path, _ = slice_file
    raw = bytearray(path.read_bytes())
    raw[:4] = b"NOPE"
    bad = tmp_path / "bad.ctdi"
    bad.write_bytes(bytes(raw))
    with pytest.raises(FormatError, match="magic"):
        load_image(bad)


def test_ctdi_reader_rejects_truncation_and_trailing(tmp_path, slice_file):
    path, _ = slice_file
    raw = path.read_bytes()
    short = tmp_path / "short.ctdi"
    short.write_bytes(raw[:-5])
    with pytest.raises(FormatError, match="truncated"):
        load_image(short)
    long = tmp_path / "long.ctdi"
    long.write_bytes(raw + b"x")
    with pytest.raises(FormatError, match="trailing"):
        load_image(long)


def test_ctde_writer_loads_in_primary(tmp_path):
    rng = np.random.default_rng(32)
    entries = [(f"img:s{i}", rng.normal(size=12)) for i in range(4)]
    path = tmp_path / "embs.ctde"
    save_embeddings(path, entries)
    loaded = primary_fileio.load_embeddings(path)
    assert [name for name, _ in loaded] == [name for name, _ in entries]
    for (_, got), (_, sent) in zip(loaded, entries):
        np.testing.assert_array_equal(got, sent.astype(np.float32))


def test_ctde_writer_validation(tmp_path):
    path = tmp_path / "embs.ctde"
    with pytest.raises(ValueError, match="empty"):
        save_embeddings(path, [])
    with pytest.raises(ValueError, match="duplicate"):
        save_embeddings(path, [("img:a", [1.0]), ("img:a", [2.0])])
    with pytest.raises(ValueError, match="shape"):
        save_embeddings(path, [("img:a", [1.0, 2.0]), ("img:b", [1.0])])
    with pytest.raises(ValueError, match="non-finite"):
        save_embeddings(path, [("img:a", [np.nan])])
