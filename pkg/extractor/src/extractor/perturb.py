"""Image-space perturbations: noise, sheltering, region exchange.

All operate on batches of 8-bit grayscale images (N, H, W) and are
deterministic under the given seed.
"""

from __future__ import annotations

import numpy as np

NOISE_AMPLITUDE = 33
SHELTER_GRID = 8
SHELTER_CELLS = 7
EXCHANGE_GRID = 4
EXCHANGE_SWAPS = 2


def _check_images(images: np.ndarray, grid: int | None = None) -> np.ndarray:
    a = np.asarray(images)
    if a.ndim != 3:
        raise ValueError(f"expected (N, H, W) images, got shape {a.shape}")
    if a.dtype != np.uint8:
        raise ValueError(f"expected uint8 images, got {a.dtype}")
    if grid is not None:
        _, h, w = a.shape
        if h < grid or w < grid:
            raise ValueError(f"images of {h}x{w} are smaller than the {grid}x{grid} grid")
    return a


def _cell_bounds(size: int, grid: int) -> list[tuple[int, int]]:
    edges = np.linspace(0, size, grid + 1).astype(int)
    return list(zip(edges[:-1], edges[1:]))


def noise(images: np.ndarray, seed: int) -> np.ndarray:
    """Add per-pixel integer noise uniform in [-33, 33], clamped to [0, 255]."""
    a = _check_images(images)
    rng = np.random.default_rng(seed)
    delta = rng.integers(-NOISE_AMPLITUDE, NOISE_AMPLITUDE + 1, size=a.shape)
    return (a.astype(np.int64) + delta).clip(0, 255).astype(np.uint8)


def shelter(images: np.ndarray, seed: int) -> np.ndarray:
    """Fill 7 of the 8x8 grid cells with one pixel value from the interior.

    The fill value is a single pixel sampled uniformly from the center two
    quartiles of each image.
    """
    a = _check_images(images, SHELTER_GRID)
    rng = np.random.default_rng(seed)
    out = a.copy()
    _, h, w = a.shape
    row_bounds = _cell_bounds(h, SHELTER_GRID)
    col_bounds = _cell_bounds(w, SHELTER_GRID)
    r_lo, r_hi = h // 4, max(h - h // 4, h // 4 + 1)
    c_lo, c_hi = w // 4, max(w - w // 4, w // 4 + 1)
    for i in range(a.shape[0]):
        cells = rng.choice(SHELTER_GRID * SHELTER_GRID, size=SHELTER_CELLS, replace=False)
        value = a[i, rng.integers(r_lo, r_hi), rng.integers(c_lo, c_hi)]
        for cell in cells:
            r0, r1 = row_bounds[cell // SHELTER_GRID]
            c0, c1 = col_bounds[cell % SHELTER_GRID]
            out[i, r0:r1, c0:c1] = value
    return out


def swap_cells(image: np.ndarray, grid: int, pairs) -> np.ndarray:
    """Swap the listed (cell_a, cell_b) pairs of a grid x grid partition."""
    out = np.asarray(image).copy()
    h, w = out.shape
    row_bounds = _cell_bounds(h, grid)
    col_bounds = _cell_bounds(w, grid)
    for a, b in pairs:
        ar0, ar1 = row_bounds[a // grid]
        ac0, ac1 = col_bounds[a % grid]
        br0, br1 = row_bounds[b // grid]
        bc0, bc1 = col_bounds[b % grid]
        tmp = out[ar0:ar1, ac0:ac1].copy()
        out[ar0:ar1, ac0:ac1] = out[br0:br1, bc0:bc1]
        out[br0:br1, bc0:bc1] = tmp
    return out


def exchange(images: np.ndarray, seed: int) -> np.ndarray:
    """Apply two random transpositions of distinct cells in a 4x4 grid."""
    a = _check_images(images, EXCHANGE_GRID)
    rng = np.random.default_rng(seed)
    out = a.copy()
    n_cells = EXCHANGE_GRID * EXCHANGE_GRID
    for i in range(a.shape[0]):
        pairs = [
            tuple(rng.choice(n_cells, size=2, replace=False))
            for _ in range(EXCHANGE_SWAPS)
        ]
        out[i] = swap_cells(out[i], EXCHANGE_GRID, pairs)
    return out


_KINDS = {"noise": noise, "shelter": shelter, "exchange": exchange}


def perturb_images(images: np.ndarray, kind: str, seed: int) -> np.ndarray:
    """Dispatch to one of the perturbations by name."""
    try:
        fn = _KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown perturbation {kind!r}; expected {sorted(_KINDS)}") from None
    return fn(images, seed)
