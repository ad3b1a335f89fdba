import os
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent

STARFISH_NOTICE = (
    "Starfish test image not found: place the 321x481 color image at "
    "data/starfish.png (or set TENCOMP_DATA_DIR); see README for sources"
)


def starfish_file():
    candidates = []
    env = os.environ.get("TENCOMP_DATA_DIR")
    if env:
        candidates.append(Path(env) / "starfish.png")
    candidates.append(REPO_ROOT / "data" / "starfish.png")
    for path in candidates:
        if path.is_file():
            return path
    return None


@pytest.fixture(scope="session")
def starfish():
    path = starfish_file()
    if path is None:
        pytest.skip(STARFISH_NOTICE)
    from tencomp.tenio import load_image_stack

    img = load_image_stack(path)
    if img.shape[2] != 3:
        pytest.skip(f"{path} is not a color image")
    return img
