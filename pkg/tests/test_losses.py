import math

import numpy as np
import pytest

from ctdegrad.losses import (
    DEFAULT_WEIGHTS,
    LossWeights,
    cross_entropy,
    cross_entropy_grad,
    rank_loss,
    rank_loss_grad,
    smooth_l1,
    smooth_l1_grad,
    supcon_loss,
    supcon_loss_grad,
    total_loss,
)


def _fd_grad(fn, x, h=1e-6):
    """Central finite differences, one element at a time."""

    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = grad.ravel()
    xf = x.ravel()
    for i in range(xf.size):
        orig = xf[i]
        xf[i] = orig + h
        hi = fn(x)
        xf[i] = orig - h
        lo = fn(x)
        xf[i] = orig
        flat[i] = (hi - lo) / (2.0 * h)
    return grad


def _assert_grad_close(analytic, numeric, rtol=1e-4):
    scale = max(np.abs(numeric).max(), 1e-8)
    assert np.abs(analytic - numeric).max() / scale < rtol


# -------------------------------------------------------- cross entropy


def _ce_oracle(logits, labels):
    total = 0.0
    for row, lab in zip(logits, labels):
        z = [math.exp(v - max(row)) for v in row]
        total -= math.log(z[lab] / sum(z))
    return total / len(labels)


def test_cross_entropy_hand_and_oracle(rng):
    assert cross_entropy([[0.0, 0.0]], [0]) == pytest.approx(math.log(2.0))
    assert cross_entropy([[100.0, 0.0]], [0]) == pytest.approx(0.0, abs=1e-12)
    for _ in range(100):
        n = int(rng.integers(1, 8))
        k = int(rng.integers(2, 6))
        logits = rng.normal(scale=3.0, size=(n, k))
        labels = rng.integers(0, k, size=n)
        assert cross_entropy(logits, labels) == pytest.approx(
            _ce_oracle(logits.tolist(), labels.tolist()), abs=1e-9
        )


def test_cross_entropy_grad(rng):
    logits = rng.normal(size=(5, 4))
    labels = rng.integers(0, 4, size=5)
    numeric = _fd_grad(lambda z: cross_entropy(z, labels), logits)
    _assert_grad_close(cross_entropy_grad(logits, labels), numeric)


def test_cross_entropy_validation():
    with pytest.raises(ValueError):
        cross_entropy([[1.0, 2.0]], [2])
    with pytest.raises(ValueError):
        cross_entropy([[1.0, 2.0]], [0, 1])
    with pytest.raises(ValueError):
        cross_entropy(np.zeros((2, 2, 2)), [0, 1])


# ------------------------------------------------------------ smooth L1


def test_smooth_l1_hand_cases():
    assert smooth_l1([0.5], [0.0]) == pytest.approx(0.125)
    assert smooth_l1([2.0], [0.0]) == pytest.approx(1.5)
    assert smooth_l1([1.0], [0.0]) == pytest.approx(0.5)  # boundary
    assert smooth_l1([1.0, 3.0], [1.5, 1.0]) == pytest.approx(
        (0.125 + 1.5) / 2.0
    )
    with pytest.raises(ValueError):
        smooth_l1([], [])


def test_smooth_l1_grad(rng):
    # keep away from the |e| = 1 kink
    pred = rng.uniform(-0.8, 0.8, size=7)
    target = np.zeros(7)
    numeric = _fd_grad(lambda p: smooth_l1(p, target), pred)
    _assert_grad_close(smooth_l1_grad(pred, target), numeric)
    pred = np.array([3.0, -2.5, 4.0])
    numeric = _fd_grad(lambda p: smooth_l1(p, np.zeros(3)), pred)
    _assert_grad_close(smooth_l1_grad(pred, np.zeros(3)), numeric)


# ------------------------------------------------------------ rank loss


def _rank_oracle(scores, severities, margin):
    terms = []
    for i, si in enumerate(severities):
        for j, sj in enumerate(severities):
            if si > sj:
                terms.append(max(0.0, margin - (scores[i] - scores[j])))
    return sum(terms) / len(terms) if terms else 0.0


def test_rank_loss_hand_and_oracle(rng):
    assert rank_loss([0.0, 1.0], [1, 0]) == pytest.approx(1.5)
    assert rank_loss([1.0, 0.0], [1, 0]) == pytest.approx(0.0)  # margin met
    for _ in range(100):
        n = int(rng.integers(2, 10))
        scores = rng.normal(size=n)
        sev = rng.integers(0, 4, size=n)
        if not (sev[:, None] > sev[None, :]).any():
            continue
        assert rank_loss(scores, sev) == pytest.approx(
            _rank_oracle(scores.tolist(), sev.tolist(), 0.5), abs=1e-12
        )


def test_rank_loss_no_pairs_warns():
    with pytest.warns(UserWarning):
        assert rank_loss([1.0, 2.0], [2, 2]) == 0.0
    np.testing.assert_array_equal(rank_loss_grad([1.0, 2.0], [2, 2]), [0.0, 0.0])


def test_rank_loss_grad(rng):
    for trial in range(20):
        scores = rng.normal(scale=2.0, size=6)
        sev = rng.integers(0, 4, size=6)
        diffs = scores[:, None] - scores[None, :]
        ordered = sev[:, None] > sev[None, :]
        if not ordered.any():
            continue
        if np.any(np.abs(0.5 - diffs[ordered]) < 0.05):
            continue  # too close to the hinge kink for finite differences
        numeric = _fd_grad(lambda s: rank_loss(s, sev), scores)
        _assert_grad_close(rank_loss_grad(scores, sev), numeric)


# --------------------------------------------------------------- supcon


def _supcon_oracle(features, labels, temperature):
    z = [np.asarray(f, dtype=np.float64) for f in features]
    z = [v / np.linalg.norm(v) for v in z]
    n = len(z)
    anchors = []
    for i in range(n):
        pos = [j for j in range(n) if j != i and labels[j] == labels[i]]
        if not pos:
            continue
        terms = []
        for p in pos:
            log_num = float(z[i] @ z[p]) / temperature
            others = [math.exp(float(z[i] @ z[k]) / temperature) for k in range(n) if k != i]
            terms.append(-(log_num - math.log(sum(others))))
        anchors.append(sum(terms) / len(pos))
    return sum(anchors) / len(anchors) if anchors else 0.0


def test_supcon_matches_brute_force(rng):
    for _ in range(50):
        n = int(rng.integers(3, 8))
        feats = rng.normal(size=(n, 5))
        labels = rng.integers(0, 3, size=n)
        if not any(
            (labels == labels[i]).sum() > 1 for i in range(n)
        ):
            continue
        assert supcon_loss(feats, labels) == pytest.approx(
            _supcon_oracle(feats, labels.tolist(), 0.07), abs=1e-9
        )


def test_supcon_properties(rng):
    feats = rng.normal(size=(6, 4))
    labels = np.array([0, 0, 1, 1, 2, 2])
    loss = supcon_loss(feats, labels)
    assert loss > 0.0
    # invariant to per-row positive rescaling
    scaled = feats * rng.uniform(0.5, 4.0, size=(6, 1))
    assert supcon_loss(scaled, labels) == pytest.approx(loss, abs=1e-9)
    with pytest.warns(UserWarning):
        assert supcon_loss(feats[:3], [0, 1, 2]) == 0.0
    np.testing.assert_array_equal(
        supcon_loss_grad(feats[:3], [0, 1, 2]), np.zeros((3, 4))
    )
    with pytest.raises(ValueError):
        supcon_loss(feats[:1], [0])
    with pytest.raises(ValueError):
        supcon_loss(np.zeros((3, 4)), [0, 0, 1])
    # tuple labels group rows the same way integer codes would
    pair_labels = np.array([[1, 0], [1, 0], [0, 1], [0, 1], [2, 2], [2, 2]])
    assert supcon_loss(feats, pair_labels) == pytest.approx(loss, abs=1e-12)


def test_supcon_grad(rng):
    for trial in range(5):
        feats = rng.normal(size=(6, 5))
        labels = rng.integers(0, 2, size=6)
        if not any((labels == labels[i]).sum() > 1 for i in range(6)):
            continue
        numeric = _fd_grad(lambda f: supcon_loss(f, labels), feats, h=1e-6)
        _assert_grad_close(supcon_loss_grad(feats, labels), numeric)


# ---------------------------------------------------------------- total


def test_total_loss_weighting():
    assert total_loss(1.0, 1.0, 1.0, 1.0) == pytest.approx(2.35)
    assert total_loss(0.0, 0.0, 0.0, 0.0) == 0.0
    w = LossWeights(lambda_reg=2.0, lambda_rank=0.0, lambda_con=1.0)
    assert total_loss(1.0, 1.0, 5.0, 1.0, weights=w) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        total_loss(np.nan, 0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        LossWeights(temperature=0.0)
    with pytest.raises(ValueError):
        LossWeights(lambda_reg=-1.0)
    assert DEFAULT_WEIGHTS.margin == 0.5
    assert DEFAULT_WEIGHTS.temperature == 0.07
