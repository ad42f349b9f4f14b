"""Seeded sample clouds."""
from __future__ import annotations

import numpy as np

KINDS = ("box", "circle", "sphere", "clustered")


def uniform_box(n: int, dim: int = 2, seed=0) -> np.ndarray:
    """``n`` points uniform in the unit cube ``[0, 1]^dim``."""
    return np.random.default_rng(seed).uniform(size=(n, dim))


def noisy_circle(n: int, noise: float = 0.05, radius: float = 1.0, seed=0) -> np.ndarray:
    """``n`` points on a circle with Gaussian noise of scale ``noise``."""
    rng = np.random.default_rng(seed)
    t = rng.uniform(0, 2 * np.pi, n)
    return radius * np.c_[np.cos(t), np.sin(t)] + rng.normal(scale=noise, size=(n, 2))


def noisy_sphere(n: int, dim: int = 3, noise: float = 0.05, seed=0) -> np.ndarray:
    """``n`` points on the unit sphere in ``R^dim`` with Gaussian noise."""
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((n, dim))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return u + rng.normal(scale=noise, size=(n, dim))


def clustered(n: int, k: int = 4, dim: int = 2, spread: float = 0.05, seed=0) -> np.ndarray:
    """``n`` points in ``k`` Gaussian blobs with centers uniform in the unit cube."""
    rng = np.random.default_rng(seed)
    centers = rng.uniform(size=(k, dim))
    labels = rng.integers(k, size=n)
    return centers[labels] + rng.normal(scale=spread, size=(n, dim))


def make_cloud(kind: str, n: int, seed=0, **kw) -> np.ndarray:
    """Dispatch on ``kind`` (one of :data:`KINDS`)."""
    makers = {"box": uniform_box, "circle": noisy_circle, "sphere": noisy_sphere,
              "clustered": clustered}
    if kind not in makers:
        raise ValueError(f"unknown cloud kind {kind!r}; expected one of {', '.join(KINDS)}")
    if n < 1:
        raise ValueError("n must be positive")
    return makers[kind](n, seed=seed, **kw)
