import numpy as np
import pytest

from ctdegrad.semantic import (
    DEFAULT_HIGH_PROMPTS,
    DEFAULT_LOW_PROMPTS,
    EmbeddingSet,
    QualityAxis,
    embedding_drift,
    global_score,
    normalize,
    patch_scores,
    pool_scores,
    quality_axis,
)


def test_default_prompt_sets():
    assert len(DEFAULT_HIGH_PROMPTS) == 3
    assert len(DEFAULT_LOW_PROMPTS) == 5
    for p in DEFAULT_HIGH_PROMPTS + DEFAULT_LOW_PROMPTS:
        assert p.endswith(".")
        assert "CT" in p
    # one low prompt per degradation family
    joined = " ".join(DEFAULT_LOW_PROMPTS)
    for token in ("noise", "blur", "streak", "sparse-view", "metal"):
        assert token in joined
    assert all("no " in p or "clean" in p or "clear" in p for p in DEFAULT_HIGH_PROMPTS)


def test_normalize():
    v = normalize(np.array([3.0, 4.0]))
    np.testing.assert_allclose(v, [0.6, 0.8])
    assert np.linalg.norm(v) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        normalize(np.zeros(4))
    with pytest.raises(ValueError):
        normalize(np.ones((2, 2)))
    with pytest.raises(ValueError):
        normalize(np.array([1.0, np.inf]))


def test_quality_axis_toy_geometry():
    high = [np.array([2.0, 0.0]), np.array([5.0, 0.0])]
    low = [np.array([0.0, 1.0])]
    axis = quality_axis(high, low)
    assert isinstance(axis, QualityAxis)
    np.testing.assert_allclose(axis.direction, [np.sqrt(0.5), -np.sqrt(0.5)])
    assert np.linalg.norm(axis.direction) == pytest.approx(1.0, abs=1e-12)
    assert axis.dim == 2
    assert axis.high_prototype_norm == pytest.approx(1.0)
    # scores order the prototypes correctly
    assert global_score([1.0, 0.0], axis) > global_score([0.0, 1.0], axis)


def test_quality_axis_validation():
    with pytest.raises(ValueError):
        quality_axis([], [np.ones(3)])
    with pytest.raises(ValueError):
        quality_axis([np.ones(3)], [np.ones(4)])
    with pytest.raises(ValueError):
        quality_axis([np.array([1.0, 0.0])], [np.array([2.0, 0.0])])


def test_global_score_scale_invariance(rng):
    axis = quality_axis([rng.normal(size=8) for _ in range(3)],
                        [rng.normal(size=8) for _ in range(5)])
    z = rng.normal(size=8)
    s = global_score(z, axis)
    assert -1.0 <= s <= 1.0
    assert global_score(7.5 * z, axis) == pytest.approx(s, abs=1e-12)
    with pytest.raises(ValueError):
        global_score(np.ones(4), axis)


def test_patch_scores_and_pooling(rng):
    axis = quality_axis([np.array([1.0, 0.0])], [np.array([0.0, 1.0])])
    tokens = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    scores = patch_scores(tokens, axis)
    r2 = np.sqrt(0.5)
    np.testing.assert_allclose(scores, [r2, -r2, 0.0], atol=1e-12)
    pooled = pool_scores(scores)
    assert pooled["max"] == pytest.approx(r2)
    assert pooled["mean"] == pytest.approx(0.0, abs=1e-12)
    assert pooled["std"] == pytest.approx(np.std([r2, -r2, 0.0]))
    with pytest.raises(ValueError):
        patch_scores(np.zeros((0, 2)), axis)
    with pytest.raises(ValueError):
        pool_scores([])


def test_embedding_drift_exact_endpoints(rng):
    z = rng.normal(size=16)
    assert embedding_drift(z, z) == 0.0
    assert embedding_drift(z, -z) == 2.0
    # powers of two rescale the normalized vector bitwise-identically
    assert embedding_drift(z, 4.0 * z) == 0.0
    e0 = np.zeros(4)
    e0[0] = 1.0
    e1 = np.zeros(4)
    e1[1] = 1.0
    assert embedding_drift(e0, e1) == pytest.approx(1.0, abs=1e-12)
    assert embedding_drift(z, 3.0 * z) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        embedding_drift(np.ones(3), np.ones(4))
    with pytest.raises(ValueError):
        embedding_drift(np.zeros(3), np.ones(3))


def test_embedding_set_parsing(rng):
    entries = [
        ("img:r0001_S1_noise_L2", rng.normal(size=4)),
        ("patch:r0001_S1_noise_L2:1", rng.normal(size=4)),
        ("patch:r0001_S1_noise_L2:0", rng.normal(size=4)),
        ("prompt:H:0", np.array([1.0, 0.0, 0.0, 0.0])),
        ("prompt:L:0", np.array([0.0, 1.0, 0.0, 0.0])),
        ("meta:encoder=test-v1", np.zeros(4)),
    ]
    es = EmbeddingSet(entries)
    assert es.image_ids == ["r0001_S1_noise_L2"]
    assert es.has_image("r0001_S1_noise_L2")
    assert not es.has_image("missing")
    p = es.patches("r0001_S1_noise_L2")
    assert p.shape == (2, 4)
    np.testing.assert_array_equal(p[0], entries[2][1])  # sorted by index
    np.testing.assert_array_equal(p[1], entries[1][1])
    assert len(es.prompts("H")) == 1 and len(es.prompts("L")) == 1
    assert es.meta == ["encoder=test-v1"]
    axis = es.default_axis()
    assert axis.dim == 4

    with pytest.raises(KeyError):
        es.image("missing")
    with pytest.raises(KeyError):
        es.patches("missing")
    with pytest.raises(ValueError):
        es.prompts("X")


def test_embedding_set_rejects_bad_entries(rng):
    with pytest.raises(ValueError):
        EmbeddingSet([("banana:1", rng.normal(size=4))])
    with pytest.raises(ValueError):
        EmbeddingSet([
            ("img:a", rng.normal(size=4)),
            ("img:b", rng.normal(size=5)),
        ])
    with pytest.raises(ValueError):
        EmbeddingSet([("img:a", rng.normal(size=4))]).default_axis()


def test_prompt_ordering(rng):
    entries = [(f"prompt:H:{i}", rng.normal(size=3)) for i in (2, 0, 1)]
    entries += [(f"prompt:L:{i}", rng.normal(size=3)) for i in range(2)]
    es = EmbeddingSet(entries)
    hs = es.prompts("H")
    assert len(hs) == 3
    np.testing.assert_array_equal(hs[0], entries[1][1])  # index 0 first
