"""Seeded uniform sampling on boxes and balls, and Monte Carlo volume oracles.

Randomness comes from a counter-based generator (Philox) keyed by
``(seed, purpose, stream)``.  Samples are produced in fixed-size chunks, chunk
``i`` drawing from stream ``i``, so any partition of the work across workers
reproduces the same bits as a serial run.  ``purpose`` separates independent
uses of one seed (outer points, inner offsets, boundary search, ...).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

CHUNK = 1 << 16


def generator(seed: int, stream: int = 0, purpose: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(purpose), int(stream)))
    return np.random.Generator(np.random.Philox(ss))


def _chunks(count: int):
    start = 0
    i = 0
    while start < count:
        size = min(CHUNK, count - start)
        yield i, start, size
        start += size
        i += 1


def sample_box(half_widths, count: int, seed: int, stream_offset: int = 0, purpose: int = 0) -> np.ndarray:
    a = np.asarray(half_widths, dtype=float)
    out = np.empty((count, a.size))
    for i, start, size in _chunks(count):
        rng = generator(seed, stream_offset + i, purpose)
        out[start : start + size] = rng.uniform(-1.0, 1.0, size=(size, a.size)) * a
    return out


def sample_ball(n: int, radius: float, count: int, seed: int, stream_offset: int = 0, purpose: int = 0) -> np.ndarray:
    out = np.empty((count, n))
    for i, start, size in _chunks(count):
        rng = generator(seed, stream_offset + i, purpose)
        g = rng.standard_normal((size, n))
        u = rng.uniform(size=size)
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        out[start : start + size] = g * (radius * u ** (1.0 / n))[:, None]
    return out


def sample(X, count: int, seed: int, stream_offset: int = 0, purpose: int = 0) -> np.ndarray:
    """``count`` i.i.d. uniform points of the outer domain ``X``, shape (count, n)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if X.shape == "box":
        return sample_box(X.half_widths, count, seed, stream_offset, purpose)
    return sample_ball(X.dimension, X.radius, count, seed, stream_offset, purpose)


def _sobol(dim: int, count: int, seed: int) -> np.ndarray:
    with warnings.catch_warnings():
        # non power-of-two counts lose Sobol balance; acceptable for this mode
        warnings.simplefilter("ignore", UserWarning)
        return qmc.Sobol(dim, scramble=True, seed=seed).random(count)


def sample_lowdisc(X, count: int, seed: int) -> np.ndarray:
    """Scrambled Sobol points mapped onto ``X`` (box: affine, ball: radial map)."""
    n = X.dimension
    if X.shape == "box":
        u = _sobol(n, count, seed)
        return (2.0 * u - 1.0) * np.asarray(X.half_widths)
    u = _sobol(n + 1, count, seed)
    u = np.clip(u, 1e-12, 1 - 1e-12)
    g = ndtri(u[:, :n])
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * (X.radius * u[:, n] ** (1.0 / n))[:, None]


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    std_error: float | None
    samples: int
    seed: int
    hits: int
    low_discrepancy: bool = False

    def interval(self, k: float = 4.0) -> tuple[float, float]:
        se = self.std_error or 0.0
        return self.value - k * se, self.value + k * se


def volume(K, X, count: int = 1_000_000, seed: int = 0, low_discrepancy: bool = False) -> VolumeEstimate:
    """Hit-or-miss estimate ``vol X * hits / count`` of ``vol K`` for ``K`` inside ``X``.

    The standard error is ``vol X * sqrt(p (1 - p) / count)`` with ``p`` the hit
    fraction.  The low-discrepancy mode has no such error model and reports
    ``std_error=None``.
    """
    hits = 0
    if low_discrepancy:
        hits = int(np.count_nonzero(K.contains(sample_lowdisc(X, count, seed))))
    else:
        for i, start, size in _chunks(count):
            pts = sample(X, size, seed, stream_offset=i)
            hits += int(np.count_nonzero(K.contains(pts)))
    frac = hits / count
    vol_x = X.volume
    se = None if low_discrepancy else vol_x * math.sqrt(frac * (1.0 - frac) / count)
    return VolumeEstimate(vol_x * frac, se, count, seed, hits, low_discrepancy)

