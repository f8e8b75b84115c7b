"""Embedding backbones: image in, one embedding per 14x14 patch out.

A backbone maps a center-cropped (518, 518, 3) uint8 image to a
(1369, dim) float32 array, one row per patch of the 37x37 lattice in
row-major order. The default ProjectionBackbone is a deterministic,
dependency-light stand-in (seeded random projection of raw patch pixels)
suitable for tests and offline pipelines; DinoV2Backbone wraps a
pretrained vision transformer when its weights are available.
"""

from __future__ import annotations

from typing import Protocol

import numpy as np

CROP = 518
PATCH = 14
PATCHES_PER_SIDE = CROP // PATCH          # 37
PATCHES_PER_IMAGE = PATCHES_PER_SIDE ** 2  # 1369


class Backbone(Protocol):
    dim: int

    def embed(self, image: np.ndarray) -> np.ndarray:
        """(518, 518, 3) uint8 -> (1369, dim) float32, unit rows."""
        ...


def patch_grid(image: np.ndarray) -> np.ndarray:
    """Split a (518, 518, 3) image into the (1369, 14, 14, 3) patch stack,
    row-major over the 37x37 lattice."""
    if image.shape != (CROP, CROP, 3):
        raise ValueError(f"expected a ({CROP}, {CROP}, 3) image, got {image.shape}")
    n = PATCHES_PER_SIDE
    tiles = image.reshape(n, PATCH, n, PATCH, 3).swapaxes(1, 2)
    return tiles.reshape(n * n, PATCH, PATCH, 3)


class ProjectionBackbone:
    """Seeded Gaussian projection of raw patch pixels, L2-normalized.

    A constant bias feature keeps all-black patches away from the zero
    vector. Same seed and dim, bit-identical embeddings.
    """

    def __init__(self, dim: int = 64, seed: int = 0):
        if dim < 4:
            raise ValueError("dim must be at least 4")
        self.dim = dim
        rng = np.random.default_rng(seed)
        n_features = PATCH * PATCH * 3 + 1
        self._w = rng.standard_normal((n_features, dim)) / np.sqrt(n_features)

    def embed(self, image: np.ndarray) -> np.ndarray:
        tiles = patch_grid(np.asarray(image, dtype=np.uint8))
        flat = tiles.reshape(tiles.shape[0], -1).astype(np.float64) / 255.0
        feats = np.concatenate([flat, np.ones((flat.shape[0], 1))], axis=1)
        out = feats @ self._w
        norms = np.linalg.norm(out, axis=1, keepdims=True)
        if np.any(norms == 0.0):
            raise RuntimeError("projection produced a zero embedding")
        return (out / norms).astype(np.float32)


class DinoV2Backbone:
    """Pretrained DINOv2 ViT adapter (requires downloaded weights).

    The embedding dimension is read from the loaded model, not assumed.
    Install the `dinov2` extra; construction fails cleanly when the model
    cannot be loaded (e.g. no network and no local cache).
    """

    def __init__(self, model_name: str = "facebook/dinov2-base", device: str = "cpu"):
        try:
            import torch
            from transformers import AutoImageProcessor, AutoModel
        except ImportError as e:
            raise RuntimeError("DinoV2Backbone needs the dinov2 extra "
                               "(pip install patchextract[dinov2])") from e
        self._torch = torch
        self._processor = AutoImageProcessor.from_pretrained(
            model_name, do_resize=False, do_center_crop=False)
        self._model = AutoModel.from_pretrained(model_name).to(device).eval()
        self._device = device
        self.dim = int(self._model.config.hidden_size)

    def embed(self, image: np.ndarray) -> np.ndarray:
        if image.shape != (CROP, CROP, 3):
            raise ValueError(f"expected a ({CROP}, {CROP}, 3) image, got {image.shape}")
        torch = self._torch
        inputs = self._processor(images=image, return_tensors="pt").to(self._device)
        with torch.no_grad():
            out = self._model(**inputs).last_hidden_state[0]
        patches = out[-PATCHES_PER_IMAGE:]  # strip CLS (and any register tokens)
        emb = patches.cpu().numpy().astype(np.float32)
        if emb.shape != (PATCHES_PER_IMAGE, self.dim):
            raise RuntimeError(f"backbone returned {emb.shape}, "
                               f"expected ({PATCHES_PER_IMAGE}, {self.dim})")
        return emb


def make_backbone(name: str, dim: int = 64, seed: int = 0) -> Backbone:
    if name == "projection":
        return ProjectionBackbone(dim=dim, seed=seed)
    if name == "dinov2":
        return DinoV2Backbone()
    raise ValueError(f"unknown backbone {name!r} (expected projection or dinov2)")
