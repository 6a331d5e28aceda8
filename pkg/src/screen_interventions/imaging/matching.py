"""Multi-scale, multi-template matching.

Scores are zero-normalised cross-correlation mapped to [0, 1]. Window sums
come from integer integral images (exact, so flat windows are detected
without tolerance games); the correlation numerator is an FFT convolution
with the mean-centred template, as in MATLAB-style ``normxcorr2``.

:func:`match_multiscale` works in two passes. Seeds come from the ladder
scales with a lowered threshold (edge maps blurred further); each seed is
then refined between ladder rungs and kept only when the window agrees
with the resized template pixel by pixel (:func:`agrees`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage
from scipy.signal import fftconvolve

from ..core import Detection, DimensionError, Region
from .gray import GrayImage, contourize, resize_nearest

CONTOUR_THRESHOLD = 128
# Edge maps are softened so an edge one pixel off still correlates.
EDGE_SIGMA = 1.0
# Edge-map blur for seeding only.
SEED_SIGMA = 2.0
SEED_MARGIN = 0.15
# Refinement tries scale * REFINE_STEP**j for |j| <= refine_steps.
REFINE_STEP = 1.1**0.25
# Seeds tried per template before the rest are dropped.
MAX_SEEDS = 200
GRAY_TOLERANCE = 40
MIN_AGREEMENT = 0.7
MIN_GRAY_AGREEMENT = 0.85
_NEIGHBOURS = np.ones((3, 3), dtype=bool)


class MatchMode(str, Enum):
    COLOR = "color"
    CONTOUR = "contour"


def scale_ladder(start: float = 0.5, stop: float = 2.0, factor: float = 1.1) -> Tuple[float, ...]:
    """Powers of ``factor`` between ``start`` and ``stop``, rounded to 4 places.

    The ladder is anchored at 1.0, so an unscaled copy is matched exactly
    whenever ``start <= 1 <= stop``.
    """
    if start <= 0 or factor <= 1.0 or stop < start:
        raise ValueError(f"Invalid scale ladder {start}:{stop}:{factor}.")
    step = math.log(factor)
    lo = math.ceil(math.log(start) / step - 1e-9)
    hi = math.floor(math.log(stop) / step + 1e-9)
    if hi < lo:
        raise ValueError(f"No power of {factor} lies in [{start}, {stop}].")
    return tuple(round(factor**k, 4) for k in range(lo, hi + 1))


DEFAULT_SCALES = scale_ladder()


@dataclass(frozen=True)
class MatchConfig:
    """Matching knobs; ``refine_steps=0`` scores the ladder scales only, without seeding."""

    scales: Tuple[float, ...] = DEFAULT_SCALES
    score_threshold: float = 0.8
    mode: MatchMode = MatchMode.COLOR
    nms_iou: float = 0.3
    refine_steps: int = 2

    def __post_init__(self) -> None:
        scales = tuple(float(s) for s in self.scales)
        object.__setattr__(self, "scales", scales)
        object.__setattr__(self, "mode", MatchMode(self.mode))
        if not scales:
            raise ValueError("MatchConfig.scales must not be empty.")
        if any(s <= 0 for s in scales):
            raise ValueError(f"Scales must be positive, got {scales}.")
        if any(a >= b for a, b in zip(scales, scales[1:])):
            raise ValueError(f"Scales must be strictly increasing, got {scales}.")
        if not 0.0 <= self.score_threshold <= 1.0:
            raise ValueError(f"score_threshold must lie in [0, 1], got {self.score_threshold}.")
        if not 0.0 <= self.nms_iou <= 1.0:
            raise ValueError(f"nms_iou must lie in [0, 1], got {self.nms_iou}.")
        if not 0 <= self.refine_steps <= 8:
            raise ValueError(f"refine_steps must lie in [0, 8], got {self.refine_steps}.")


def _box_sums(integral: np.ndarray, h: int, w: int) -> np.ndarray:
    return integral[h:, w:] - integral[:-h, w:] - integral[h:, :-w] + integral[:-h, :-w]


def _integral(a: np.ndarray) -> np.ndarray:
    out = np.zeros((a.shape[0] + 1, a.shape[1] + 1), dtype=np.int64)
    out[1:, 1:] = a.cumsum(axis=0).cumsum(axis=1)
    return out


def ncc_match(image: GrayImage, template: GrayImage) -> np.ndarray:
    """Score map over every top-left placement of ``template`` inside ``image``.

    Entry ``[y, x]`` is ``(c + 1) / 2`` where ``c`` is the zero-normalised
    cross-correlation of the template with the window at ``(x, y)``. When the
    template or the window is flat the score is 0.5 if their means agree
    within one gray level, else 0.

    Raises:
        DimensionError: the template is larger than the image.
    """
    th, tw = template.height, template.width
    if th > image.height or tw > image.width:
        raise DimensionError(
            f"Template {tw}x{th} is larger than image {image.width}x{image.height}."
        )
    n = th * tw
    img = image.data.astype(np.int64)
    tpl = template.data.astype(np.int64)

    sums = _box_sums(_integral(img), th, tw)
    sq_sums = _box_sums(_integral(img * img), th, tw)
    # n^2 * variance, exact in integers.
    win_var = n * sq_sums - sums * sums
    t_sum = int(tpl.sum())
    t_var = n * int((tpl * tpl).sum()) - t_sum * t_sum

    scores = np.zeros(sums.shape, dtype=np.float64)
    flat = (win_var <= 0) | (t_var <= 0)
    if not flat.all():
        centred = tpl.astype(np.float64) - t_sum / n
        num = fftconvolve(img.astype(np.float64), centred[::-1, ::-1], mode="valid")
        den = np.sqrt(win_var.astype(np.float64) * float(t_var)) / n
        with np.errstate(divide="ignore", invalid="ignore"):
            corr = np.clip(num / den, -1.0, 1.0)
        scores[~flat] = (corr[~flat] + 1.0) / 2.0
    if flat.any():
        same_mean = np.abs(sums * 1.0 / n - t_sum / n) <= 1.0
        scores[flat] = np.where(same_mean[flat], 0.5, 0.0)
    return scores


def non_max_suppression(detections: Sequence[Detection], iou: float) -> List[Detection]:
    """Greedy NMS: keep detections in the given order, dropping any whose IoU with a kept one exceeds ``iou``."""
    kept: List[Detection] = []
    for det in detections:
        if all(det.region.iou(k.region) <= iou for k in kept):
            kept.append(det)
    return kept


def _prepare(img: GrayImage, mode: MatchMode, sigma: float = 0.0) -> GrayImage:
    if mode is MatchMode.CONTOUR:
        img = contourize(img, CONTOUR_THRESHOLD)
        sigma = max(sigma, EDGE_SIGMA)
    if sigma <= 0:
        return img
    blurred = ndimage.gaussian_filter(img.data.astype(np.float64), sigma, mode="nearest")
    return GrayImage(np.clip(np.rint(blurred), 0, 255).astype(np.uint8))


def agrees(window: GrayImage, template: GrayImage, mode: MatchMode) -> bool:
    """Pixel-level check behind a correlation peak.

    CONTOUR: at least :data:`MIN_AGREEMENT` of the edge pixels on each side
    have an edge pixel of the other side within one pixel. COLOR: the
    template is mapped onto the window's mean and spread; at least
    :data:`MIN_GRAY_AGREEMENT` of all pixels, and :data:`MIN_AGREEMENT` of the
    template's darker and of its brighter pixels, must land within
    :data:`GRAY_TOLERANCE`.

    Raises:
        DimensionError: window and template differ in size.
    """
    if window.data.shape != template.data.shape:
        raise DimensionError(
            f"Window {window.width}x{window.height} and template {template.width}x{template.height} differ."
        )
    if mode is MatchMode.CONTOUR:
        seen = contourize(window, CONTOUR_THRESHOLD).data > 0
        want = contourize(template, CONTOUR_THRESHOLD).data > 0
        if not want.any() or not seen.any():
            return not want.any() and not seen.any()
        near_seen = ndimage.binary_dilation(seen, structure=_NEIGHBOURS)
        near_want = ndimage.binary_dilation(want, structure=_NEIGHBOURS)
        return bool(near_seen[want].mean() >= MIN_AGREEMENT and near_want[seen].mean() >= MIN_AGREEMENT)

    t = template.data.astype(np.float64)
    w = window.data.astype(np.float64)
    if t.std() == 0:
        return bool((np.abs(w - t) <= GRAY_TOLERANCE).mean() >= MIN_GRAY_AGREEMENT)
    fit = w.mean() + (t - t.mean()) * (w.std() / t.std())
    close = np.abs(fit - w) <= GRAY_TOLERANCE
    dark = t < t.mean()
    return bool(
        close.mean() >= MIN_GRAY_AGREEMENT
        and close[dark].mean() >= MIN_AGREEMENT
        and close[~dark].mean() >= MIN_AGREEMENT
    )


@dataclass(frozen=True)
class _Hit:
    score: float
    template: int
    scale: float
    region: Region

    def rank(self) -> Tuple[float, int, float, int, int]:
        return (-self.score, self.template, self.scale, self.region.y, self.region.x)


def _seeds(target: GrayImage, tmpl: GrayImage, cfg: MatchConfig, sigma: float, threshold: float):
    """Placements at the ladder scales scoring at least ``threshold``, best first.

    Returns the scores and one ``(scale index, y, x, w, h)`` row per placement.
    """
    score_parts: List[np.ndarray] = []
    meta_parts: List[np.ndarray] = []
    for si, scale in enumerate(cfg.scales):
        resized = _prepare(resize_nearest(tmpl, scale), cfg.mode, sigma)
        try:
            scores = ncc_match(target, resized)
        except DimensionError:
            continue
        ys, xs = np.nonzero(scores >= threshold)
        if ys.size == 0:
            continue
        score_parts.append(scores[ys, xs])
        meta_parts.append(
            np.column_stack([
                np.full(ys.size, si), ys, xs,
                np.full(ys.size, resized.width), np.full(ys.size, resized.height),
            ])
        )
    if not score_parts:
        return np.zeros(0), np.zeros((0, 5), dtype=np.int64)
    scores = np.concatenate(score_parts)
    meta = np.concatenate(meta_parts)
    order = np.lexsort((meta[:, 2], meta[:, 1], meta[:, 0], -scores))
    return scores[order], meta[order]


def _search_pad(seed: Region) -> int:
    return 2 + max(seed.w, seed.h) // 10


def _refine(sharp: GrayImage, tmpl: GrayImage, scale: float, seed: Region, cfg: MatchConfig):
    """Best ``(score, scale, region)`` around ``seed`` over scales ``scale * REFINE_STEP**j``.

    The seed scale is tried first and only a strictly better score replaces it.
    """
    pad = _search_pad(seed)
    best: Optional[Tuple[float, float, Region]] = None
    for j in sorted(range(-cfg.refine_steps, cfg.refine_steps + 1), key=abs):
        s = scale if j == 0 else round(scale * REFINE_STEP**j, 4)
        resized = _prepare(resize_nearest(tmpl, s), cfg.mode)
        x0, y0 = max(0, seed.x - pad), max(0, seed.y - pad)
        x1 = min(sharp.width, seed.x + max(seed.w, resized.width) + pad)
        y1 = min(sharp.height, seed.y + max(seed.h, resized.height) + pad)
        try:
            scores = ncc_match(sharp.crop(x0, y0, x1 - x0, y1 - y0), resized)
        except DimensionError:
            continue
        y, x = np.unravel_index(np.argmax(scores), scores.shape)
        if best is None or scores[y, x] > best[0]:
            best = (float(scores[y, x]), s, Region(x0 + int(x), y0 + int(y), resized.width, resized.height))
    return best


def _template_hits(
    image: GrayImage,
    sharp: GrayImage,
    seeded: GrayImage,
    tmpl: GrayImage,
    ti: int,
    cfg: MatchConfig,
    sigma: float,
    threshold: float,
) -> List[_Hit]:
    scores, meta = _seeds(seeded, tmpl, cfg, sigma, threshold)
    x1, y1 = meta[:, 2].astype(np.float64), meta[:, 1].astype(np.float64)
    x2, y2 = x1 + meta[:, 3], y1 + meta[:, 4]
    areas = (x2 - x1) * (y2 - y1)
    alive = np.ones(len(scores), dtype=bool)
    hits: List[_Hit] = []
    tries = 0
    for i in range(len(scores)):
        if not alive[i]:
            continue
        if tries == MAX_SEEDS:
            break
        tries += 1
        alive[i] = False
        si, y, x, w, h = (int(v) for v in meta[i])
        seed = Region(x, y, w, h)
        if cfg.refine_steps:
            found = _refine(sharp, tmpl, cfg.scales[si], seed, cfg)
        else:
            found = (float(scores[i]), cfg.scales[si], seed)
        if found is None or found[0] < cfg.score_threshold:
            ok = False
        else:
            box = found[2]
            ok = agrees(image.crop(box.x, box.y, box.w, box.h), resize_nearest(tmpl, found[1]), cfg.mode)
        if ok:
            hits.append(_Hit(min(1.0, found[0]), ti, found[1], box))
            iw = np.clip(np.minimum(box.x + box.w, x2) - np.maximum(box.x, x1), 0, None)
            ih = np.clip(np.minimum(box.y + box.h, y2) - np.maximum(box.y, y1), 0, None)
            inter = iw * ih
            alive &= inter / (box.area + areas - inter) <= cfg.nms_iou
        elif cfg.refine_steps:
            # Same-scale seeds inside the refinement window were covered by that search.
            pad = _search_pad(seed)
            alive &= ~((meta[:, 0] == si) & (np.abs(meta[:, 1] - y) <= pad) & (np.abs(meta[:, 2] - x) <= pad))
    return hits


def match_multiscale(
    image: GrayImage,
    templates: Sequence[GrayImage],
    cfg: MatchConfig = MatchConfig(),
    labels: Optional[Sequence[str]] = None,
) -> List[Detection]:
    """Find every template at every configured scale, then suppress overlaps.

    Each template is resized (nearest neighbour) to each ladder scale and
    scored against the image with :func:`ncc_match`; in CONTOUR mode both
    sides are softened edge maps. With ``cfg.refine_steps > 0`` that first
    pass only seeds: the threshold is lowered by :data:`SEED_MARGIN` (and
    edge maps are blurred further), and every seed is re-scored at
    nearby scales, so copies planted between ladder rungs are found at their
    own size. Candidates must reach ``cfg.score_threshold`` and pass
    :func:`agrees`; survivors compete in one greedy NMS pass ordered by
    descending score (ties: template, scale, row, column). Template/scale
    pairs that do not fit the image are skipped.
    """
    sharp = _prepare(image, cfg.mode)
    if cfg.refine_steps:
        sigma = SEED_SIGMA if cfg.mode is MatchMode.CONTOUR else 0.0
        threshold = max(0.0, cfg.score_threshold - SEED_MARGIN)
        seeded = _prepare(image, cfg.mode, sigma) if sigma else sharp
    else:
        sigma, threshold, seeded = 0.0, cfg.score_threshold, sharp
    hits: List[_Hit] = []
    for ti, tmpl in enumerate(templates):
        hits.extend(_template_hits(image, sharp, seeded, tmpl, ti, cfg, sigma, threshold))
    hits.sort(key=_Hit.rank)
    found = [
        Detection(
            region=h.region,
            score=h.score,
            scale=h.scale,
            label=labels[h.template] if labels is not None else "",
        )
        for h in hits
    ]
    return non_max_suppression(found, cfg.nms_iou)
