"""Full-reference quality metrics and severity-agreement statistics.

Pixel-domain metrics (PSNR, SSIM, VIF) compare a degraded slice to its
reference, optionally restricted to an evaluation mask (normally the
inscribed reconstruction circle). Rank statistics relate metric values
to severity labels, and ordinal agreement measures score severity
predictions.

Correlations that are undefined (fewer than two points, or zero
variance in either argument) are returned as NaN and rendered as
"undefined" in reports; they are never silently coerced to a number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage, signal

__all__ = [
    "psnr",
    "ssim",
    "vif",
    "spearman",
    "pearson",
    "mae_rmse",
    "qwk",
    "accuracy_macro_f1",
    "severity_correlation_report",
    "correlation_csv",
    "report_markdown",
    "CorrelationRow",
    "SeverityStat",
    "CorrelationReport",
]


def _check_pair(ref, deg, mask):
    ref = np.asarray(ref, dtype=np.float64)
    deg = np.asarray(deg, dtype=np.float64)
    if ref.ndim != 2 or ref.shape != deg.shape:
        raise ValueError(f"image shapes differ: {ref.shape} vs {deg.shape}")
    if not (np.all(np.isfinite(ref)) and np.all(np.isfinite(deg))):
        raise ValueError("images must be finite")
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != ref.shape:
            raise ValueError(f"mask shape {mask.shape} does not match {ref.shape}")
        if not mask.any():
            raise ValueError("evaluation mask is empty")
    return ref, deg, mask


def _ref_range(ref: np.ndarray, mask) -> float:
    vals = ref[mask] if mask is not None else ref
    return float(vals.max() - vals.min())


def psnr(ref, deg, mask=None) -> float:
    """Peak signal-to-noise ratio in dB.

    The peak is the reference's value range inside the mask, so the
    score is invariant to affine rescaling of the HU axis. Identical
    inputs return +inf; a constant reference has no range to normalize
    by and is rejected unless the pair is identical.
    """

    ref, deg, mask = _check_pair(ref, deg, mask)
    diff = (ref - deg)[mask] if mask is not None else ref - deg
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    data_range = _ref_range(ref, mask)
    if data_range == 0.0:
        raise ValueError("reference is constant inside the mask; PSNR undefined")
    return 10.0 * math.log10(data_range**2 / mse)


_SSIM_WIN = 11
_SSIM_SIGMA = 1.5
_SSIM_K1 = 0.01
_SSIM_K2 = 0.03


def _gaussian_kernel2d(size: int, sigma: float) -> np.ndarray:
    ax = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(ax**2) / (2.0 * sigma**2))
    k = np.outer(g, g)
    return k / k.sum()


def ssim(ref, deg, mask=None, data_range: float | None = None) -> float:
    """Mean structural similarity with an 11x11 Gaussian window.

    By default both images are mapped to [0, 1] by the reference's
    value range inside the mask, which makes the score invariant to
    affine remaps of the HU axis. Passing ``data_range`` skips that and
    uses the conventional definition instead: raw values with the
    stability constants scaled by the given range, symmetric in the two
    images. Either way the comparison uses K1 = 0.01, K2 = 0.03 and
    Gaussian window weights (sigma 1.5). Without a mask the similarity
    map is averaged over the window-valid interior; with one, over the
    mask.
    """

    ref, deg, mask = _check_pair(ref, deg, mask)
    if data_range is None:
        span = _ref_range(ref, mask)
        lo = float((ref[mask] if mask is not None else ref).min())
    else:
        span = float(data_range)
        if span <= 0:
            raise ValueError("data_range must be positive")
        lo = 0.0
    if span == 0.0:
        # constant reference: no structure to normalize by; compare raw
        # values against unit range so identical pairs still score 1
        span, lo = 1.0, 0.0
    a = (ref - lo) / span
    b = (deg - lo) / span

    c1 = _SSIM_K1**2
    c2 = _SSIM_K2**2
    kernel = _gaussian_kernel2d(_SSIM_WIN, _SSIM_SIGMA)
    win = lambda im: ndimage.convolve(im, kernel, mode="reflect")
    mu_a = win(a)
    mu_b = win(b)
    var_a = win(a * a) - mu_a * mu_a
    var_b = win(b * b) - mu_b * mu_b
    cov = win(a * b) - mu_a * mu_b
    smap = ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) / (
        (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    )
    if mask is not None:
        return float(smap[mask].mean())
    pad = (_SSIM_WIN - 1) // 2
    if smap.shape[0] <= 2 * pad or smap.shape[1] <= 2 * pad:
        raise ValueError("image smaller than the similarity window")
    return float(smap[pad:-pad, pad:-pad].mean())


_VIF_RANGE = 255.0


def vif(ref, deg, mask=None) -> float:
    """Pixel-domain visual information fidelity over four dyadic scales.

    Images are mapped to the 8-bit display range [0, 255] by the
    reference range, because the standard noise variance
    sigma_n^2 = 2 is calibrated against that scale; with a mask, the
    degraded image is replaced by the reference outside the mask so
    excluded regions carry no distortion. Gaussian scale-space
    statistics feed the usual information ratio. Identical inputs give
    1; a constant reference carries no information and is rejected.
    Needs images of at least 72 pixels on a side.
    """

    ref, deg, mask = _check_pair(ref, deg, mask)
    if min(ref.shape) < 72:
        raise ValueError("vif needs at least 72 pixels per side")
    span = _ref_range(ref, mask)
    if span == 0.0:
        raise ValueError("reference is constant inside the mask; VIF undefined")
    lo = float((ref[mask] if mask is not None else ref).min())
    if mask is not None:
        deg = np.where(mask, deg, ref)
    a = (ref - lo) * (_VIF_RANGE / span)
    b = (deg - lo) * (_VIF_RANGE / span)

    sigma_nsq = 2.0
    eps = 1e-10
    num = 0.0
    den = 0.0
    for scale in range(1, 5):
        size = 2 ** (4 - scale + 1) + 1
        kernel = _gaussian_kernel2d(size, size / 5.0)
        if scale > 1:
            a = signal.fftconvolve(a, kernel, mode="valid")[::2, ::2]
            b = signal.fftconvolve(b, kernel, mode="valid")[::2, ::2]
        mu_a = signal.fftconvolve(a, kernel, mode="valid")
        mu_b = signal.fftconvolve(b, kernel, mode="valid")
        var_a = signal.fftconvolve(a * a, kernel, mode="valid") - mu_a * mu_a
        var_b = signal.fftconvolve(b * b, kernel, mode="valid") - mu_b * mu_b
        cov = signal.fftconvolve(a * b, kernel, mode="valid") - mu_a * mu_b
        var_a = np.maximum(var_a, 0.0)
        var_b = np.maximum(var_b, 0.0)

        g = cov / (var_a + eps)
        sv_sq = var_b - g * cov
        g = np.where(var_a < eps, 0.0, g)
        sv_sq = np.where(var_a < eps, var_b, sv_sq)
        sv_sq = np.where(var_b < eps, 0.0, sv_sq)
        g = np.where(var_b < eps, 0.0, g)
        sv_sq = np.where(g < 0.0, var_b, sv_sq)
        g = np.maximum(g, 0.0)
        sv_sq = np.maximum(sv_sq, eps)

        num += float(
            np.sum(np.log10(1.0 + g * g * var_a / (sv_sq + sigma_nsq)))
        )
        den += float(np.sum(np.log10(1.0 + var_a / sigma_nsq)))
    if den <= 0.0:
        raise ValueError("reference carries no measurable information")
    return num / den


def _rankdata(x: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties sharing their average rank."""

    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.size, dtype=np.float64)
    sx = x[order]
    i = 0
    while i < x.size:
        j = i
        while j + 1 < x.size and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def pearson(x, y) -> float:
    """Pearson correlation; NaN when undefined (n < 2 or zero variance)."""

    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size != y.size:
        raise ValueError("x and y must have the same length")
    if x.size < 2:
        return math.nan
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("correlation inputs must be finite")
    dx = x - x.mean()
    dy = y - y.mean()
    sxy = float(np.sum(dx * dx)) * float(np.sum(dy * dy))
    if sxy == 0.0:
        return math.nan
    # single square root keeps exactly proportional inputs at exactly 1
    r = float(np.sum(dx * dy)) / math.sqrt(sxy)
    return min(1.0, max(-1.0, r))


def spearman(x, y) -> float:
    """Spearman rank correlation with average ranks; NaN when undefined."""

    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size != y.size:
        raise ValueError("x and y must have the same length")
    if x.size < 2:
        return math.nan
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("correlation inputs must be finite")
    return pearson(_rankdata(x), _rankdata(y))


def mae_rmse(pred, true) -> tuple[float, float]:
    pred = np.asarray(pred, dtype=np.float64).ravel()
    true = np.asarray(true, dtype=np.float64).ravel()
    if pred.size != true.size or pred.size == 0:
        raise ValueError("pred and true must be non-empty and equal length")
    err = pred - true
    return float(np.mean(np.abs(err))), float(np.sqrt(np.mean(err * err)))


def _check_labels(pred, true, num_classes):
    pred = np.asarray(pred)
    true = np.asarray(true)
    if pred.shape != true.shape or pred.ndim != 1 or pred.size == 0:
        raise ValueError("pred and true must be non-empty 1-D and equal length")
    pred = pred.astype(np.int64)
    true = true.astype(np.int64)
    for name, arr in (("pred", pred), ("true", true)):
        if arr.min() < 0 or arr.max() >= num_classes:
            raise ValueError(f"{name} labels must lie in [0, {num_classes})")
    return pred, true


def qwk(pred, true, num_classes: int = 4) -> float:
    """Quadratically weighted kappa for ordinal labels.

    Disagreement weights are ((i - j) / (K - 1))^2; expected agreement
    comes from the outer product of the two marginal histograms. When
    both raters degenerate to a single shared class, agreement is
    perfect and the score is 1.
    """

    pred, true = _check_labels(pred, true, num_classes)
    n = pred.size
    observed = np.zeros((num_classes, num_classes), dtype=np.float64)
    np.add.at(observed, (true, pred), 1.0)
    observed /= n
    expected = np.outer(
        np.bincount(true, minlength=num_classes),
        np.bincount(pred, minlength=num_classes),
    ).astype(np.float64) / (n * n)
    idx = np.arange(num_classes, dtype=np.float64)
    weights = ((idx[:, None] - idx[None, :]) / (num_classes - 1)) ** 2
    wo = float(np.sum(weights * observed))
    we = float(np.sum(weights * expected))
    if we == 0.0:
        return 1.0
    return 1.0 - wo / we


def accuracy_macro_f1(pred, true, num_classes: int = 4) -> tuple[float, float]:
    """Accuracy and macro-F1 over the full class set.

    Macro-F1 averages per-class F1 over all ``num_classes`` classes;
    a class absent from both pred and true contributes 0, which keeps
    scores comparable across splits with missing levels.
    """

    pred, true = _check_labels(pred, true, num_classes)
    acc = float(np.mean(pred == true))
    f1s = []
    for c in range(num_classes):
        tp = float(np.sum((pred == c) & (true == c)))
        fp = float(np.sum((pred == c) & (true != c)))
        fn = float(np.sum((pred != c) & (true == c)))
        denom = 2.0 * tp + fp + fn
        f1s.append(0.0 if denom == 0.0 else 2.0 * tp / denom)
    return acc, float(np.mean(f1s))


@dataclass(frozen=True)
class CorrelationRow:
    setting: str
    metric: str
    spearman: float
    pearson: float
    n: int


@dataclass(frozen=True)
class SeverityStat:
    setting: str
    metric: str
    level: int
    mean: float
    std: float
    n: int


@dataclass(frozen=True)
class CorrelationReport:
    rows: list[CorrelationRow]
    stats: list[SeverityStat]
    skipped: list[str]


def severity_correlation_report(samples, metrics=None) -> CorrelationReport:
    """Per-setting agreement between severity labels and metric values.

    ``samples`` is an iterable of (setting, severity, values) triples
    with ``values`` a metric-name -> float mapping. Emits one
    correlation row per (setting, metric) with at least 3 samples and
    per-level mean/std rows; settings with fewer samples are skipped
    and listed with the reason.
    """

    by_setting: dict[str, list[tuple[int, dict]]] = {}
    for setting, severity, values in samples:
        by_setting.setdefault(str(setting), []).append((int(severity), dict(values)))

    rows: list[CorrelationRow] = []
    stats: list[SeverityStat] = []
    skipped: list[str] = []
    for setting in sorted(by_setting):
        entries = by_setting[setting]
        if len(entries) < 3:
            skipped.append(
                f"{setting}: only {len(entries)} samples (need at least 3)"
            )
            continue
        names = metrics
        if names is None:
            names = sorted({m for _, values in entries for m in values})
        severities = np.array([sev for sev, _ in entries], dtype=np.float64)
        for metric in names:
            vals = np.array(
                [values[metric] for _, values in entries if metric in values],
                dtype=np.float64,
            )
            sevs = np.array(
                [sev for sev, values in entries if metric in values],
                dtype=np.float64,
            )
            if vals.size < 3:
                skipped.append(
                    f"{setting}/{metric}: only {vals.size} samples (need at least 3)"
                )
                continue
            rows.append(
                CorrelationRow(
                    setting=setting,
                    metric=metric,
                    spearman=spearman(sevs, vals),
                    pearson=pearson(sevs, vals),
                    n=int(vals.size),
                )
            )
            for level in sorted(set(int(s) for s in sevs)):
                sel = vals[sevs == level]
                stats.append(
                    SeverityStat(
                        setting=setting,
                        metric=metric,
                        level=level,
                        mean=float(sel.mean()),
                        std=float(sel.std()),
                        n=int(sel.size),
                    )
                )
    return CorrelationReport(rows=rows, stats=stats, skipped=skipped)


def _fmt(value: float, digits: int = 4) -> str:
    if math.isnan(value):
        return "undefined"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.{digits}f}"


def correlation_csv(report: CorrelationReport) -> str:
    lines = ["setting,metric,spearman,pearson,n"]
    for row in report.rows:
        lines.append(
            f"{row.setting},{row.metric},{_fmt(row.spearman)},"
            f"{_fmt(row.pearson)},{row.n}"
        )
    return "\n".join(lines) + "\n"


def report_markdown(report: CorrelationReport, title: str = "Severity agreement") -> str:
    out = [f"# {title}", ""]
    out += [
        "## Severity correlation by setting",
        "",
        "| setting | metric | spearman | pearson | n |",
        "| --- | --- | --- | --- | --- |",
    ]
    for row in report.rows:
        out.append(
            f"| {row.setting} | {row.metric} | {_fmt(row.spearman)} | "
            f"{_fmt(row.pearson)} | {row.n} |"
        )
    out.append("")

    metrics = sorted({s.metric for s in report.stats})
    levels = sorted({s.level for s in report.stats})
    for metric in metrics:
        out += [
            f"## {metric} by severity level (mean ± std)",
            "",
            "| setting | " + " | ".join(f"L{lv}" for lv in levels) + " |",
            "| --- |" + " --- |" * len(levels),
        ]
        per_setting: dict[str, dict[int, SeverityStat]] = {}
        for s in report.stats:
            if s.metric == metric:
                per_setting.setdefault(s.setting, {})[s.level] = s
        for setting in sorted(per_setting):
            cells = []
            for lv in levels:
                s = per_setting[setting].get(lv)
                cells.append(
                    "-" if s is None else f"{_fmt(s.mean)} ± {_fmt(s.std)}"
                )
            out.append(f"| {setting} | " + " | ".join(cells) + " |")
        out.append("")

    if report.skipped:
        out += ["## Skipped", ""]
        out += [f"- {reason}" for reason in report.skipped]
        out.append("")
    return "\n".join(out)
