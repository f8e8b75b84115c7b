import numpy as np
import pytest
from PIL import Image


def pattern_image(height=518, width=518, phase=0):
    """Deterministic RGB pattern: gradients plus a few blocks, so patches
    are visually distinct without any randomness."""
    y, x = np.mgrid[0:height, 0:width]
    r = ((x + phase * 37) % 256).astype(np.uint8)
    g = ((y + 2 * phase * 19) % 256).astype(np.uint8)
    b = ((x // 14 * 7 + y // 14 * 11 + phase) % 256).astype(np.uint8)
    img = np.stack([r, g, b], axis=-1)
    img[40:90, 40:90] = (250, 20, 20)
    img[200:240, 300:380] = (20, 250, 20)
    return img


@pytest.fixture
def image_dir(tmp_path):
    """A directory of registered-looking survey images of varying sizes."""
    out = tmp_path / "imgs"
    out.mkdir()
    for i, size in enumerate([(518, 518), (640, 520), (700, 600)]):
        Image.fromarray(pattern_image(size[1], size[0], phase=i)).save(out / f"img{i}.png")
    return out
