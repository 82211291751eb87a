import numpy as np
import pytest

from ctdegrad.fileio import (
    FormatError,
    load_embeddings,
    load_image,
    load_sinogram,
    save_embeddings,
    save_image,
    save_sinogram,
)
from ctdegrad.grids import Image, Sinogram, make_geometry


def test_image_roundtrip(tmp_path):
    rng = np.random.default_rng(7)
    img = Image(values=rng.normal(size=(33, 47)).astype(np.float32), pixel_spacing_mm=0.8)
    path = tmp_path / "img.ctdi"
    save_image(path, img)
    back = load_image(path)
    assert back.pixel_spacing_mm == pytest.approx(0.8)
    np.testing.assert_array_equal(back.values, img.values)
    # in-memory grids are float64; f32 input survives the round trip exactly
    assert back.values.dtype == np.float64


def test_image_write_is_deterministic(tmp_path):
    img = Image(values=np.arange(12.0, dtype=np.float32).reshape(3, 4), pixel_spacing_mm=1.0)
    a, b = tmp_path / "a.ctdi", tmp_path / "b.ctdi"
    save_image(a, img)
    save_image(b, img)
    assert a.read_bytes() == b.read_bytes()


def test_image_bad_magic_and_truncation(tmp_path):
    img = Image(values=np.zeros((5, 5), dtype=np.float32), pixel_spacing_mm=1.0)
    path = tmp_path / "img.ctdi"
    save_image(path, img)
    raw = bytearray(path.read_bytes())

    bad = tmp_path / "bad.ctdi"
    bad.write_bytes(b"XXXX" + bytes(raw[4:]))
    with pytest.raises(FormatError):
        load_image(bad)

    trunc = tmp_path / "trunc.ctdi"
    trunc.write_bytes(bytes(raw[:-3]))
    with pytest.raises(FormatError):
        load_image(trunc)

    trail = tmp_path / "trail.ctdi"
    trail.write_bytes(bytes(raw) + b"\x00")
    with pytest.raises(FormatError):
        load_image(trail)


def test_sinogram_roundtrip(tmp_path):
    geom = make_geometry((32, 32), pixel_spacing_mm=0.5)
    rng = np.random.default_rng(3)
    sino = Sinogram(
        geometry=geom,
        values=rng.normal(size=(geom.num_views, geom.num_detectors)).astype(np.float32),
    )
    path = tmp_path / "s.ctds"
    save_sinogram(path, sino)
    back = load_sinogram(path)
    assert back.geometry.num_detectors == geom.num_detectors
    assert back.geometry.detector_spacing_mm == pytest.approx(0.5)
    np.testing.assert_array_equal(back.values, sino.values)
    np.testing.assert_allclose(back.geometry.angles_deg, geom.angles_deg)
    # inferred grid reproduces the original image shape
    assert back.geometry.image_shape == (32, 32)


def test_embeddings_roundtrip(tmp_path):
    rng = np.random.default_rng(11)
    names = ["img:r0001_S1_noise_L2", "prompt:H:0", "meta:encoder=test"]
    vecs = rng.normal(size=(3, 16)).astype(np.float32)
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    path = tmp_path / "e.ctde"
    save_embeddings(path, list(zip(names, vecs)))
    back = load_embeddings(path)
    assert [name for name, _ in back] == names
    np.testing.assert_array_equal(np.stack([vec for _, vec in back]), vecs)


def test_embeddings_rejects_bad_entries(tmp_path):
    vecs = np.eye(2, 4, dtype=np.float32)
    with pytest.raises(ValueError):
        save_embeddings(tmp_path / "d.ctde", [("a", vecs[0]), ("a", vecs[1])])
    with pytest.raises(ValueError):
        save_embeddings(tmp_path / "m.ctde", [("a", vecs[0]), ("b", np.ones(5))])
    with pytest.raises(ValueError):
        save_embeddings(tmp_path / "e.ctde", [])
    with pytest.raises(ValueError):
        save_embeddings(tmp_path / "n.ctde", [("a", np.array([1.0, np.nan]))])


def test_embeddings_truncation(tmp_path):
    vecs = np.eye(2, 4, dtype=np.float32)
    path = tmp_path / "e.ctde"
    save_embeddings(path, [("a", vecs[0]), ("b", vecs[1])])
    raw = path.read_bytes()
    cut = tmp_path / "cut.ctde"
    cut.write_bytes(raw[:-5])
    with pytest.raises(FormatError):
        load_embeddings(cut)
