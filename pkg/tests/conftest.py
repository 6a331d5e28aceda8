from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from screen_interventions.core import Frame
from screen_interventions.corpus.manifest import write_masks


def solid(width: int, height: int, color=(255, 255, 255), frame_id: int = 0) -> Frame:
    px = np.empty((height, width, 4), dtype=np.uint8)
    px[...] = (*color[:3], 255)
    return Frame.from_array(px, frame_id)


def gray_frame(pixels, frame_id: int = 0) -> Frame:
    return Frame.from_array(np.asarray(pixels, dtype=np.uint8), frame_id)


@pytest.fixture
def white_frame() -> Frame:
    return solid(64, 48)


@pytest.fixture
def masks_root(tmp_path: Path) -> Path:
    root = tmp_path / "masks"
    write_masks(root)
    return root


@pytest.fixture
def lexicon_file(tmp_path: Path) -> Path:
    path = tmp_path / "lexicon.txt"
    path.write_text("# test lexicon\nscum 1.0\nvermin 0.9\ntrash 0.4\n", encoding="utf-8")
    return path
