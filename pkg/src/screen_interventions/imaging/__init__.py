"""Pixel-level algorithms: matching, contours, hashing, inpainting, scroll."""

from .contours import Contour, ContourSet, trace_contours
from .gray import GrayImage, contourize, otsu_threshold, resize_nearest, resize_rgba, resize_to, to_gray
from .hashing import average_hash, hamming
from .inpaint import inpaint_fmm, inpaint_majority, majority_color
from .matching import DEFAULT_SCALES, MatchConfig, MatchMode, match_multiscale, ncc_match, scale_ladder
from .scroll import ScrollConfig, detect_scroll

__all__ = [
    "Contour",
    "ContourSet",
    "DEFAULT_SCALES",
    "GrayImage",
    "MatchConfig",
    "MatchMode",
    "ScrollConfig",
    "average_hash",
    "contourize",
    "detect_scroll",
    "hamming",
    "inpaint_fmm",
    "inpaint_majority",
    "majority_color",
    "match_multiscale",
    "ncc_match",
    "otsu_threshold",
    "resize_nearest",
    "resize_rgba",
    "resize_to",
    "scale_ladder",
    "to_gray",
    "trace_contours",
]
