"""Counter-based random number generation for reproducible experiments.

The generator is SplitMix64 used in counter mode: draw ``n`` of stream ``k``
is ``mix64(k + (n + 1) * GOLDEN)`` where ``mix64`` is the SplitMix64
finalizer and GOLDEN is the 64-bit golden-ratio constant. Streams are
derived by folding integer labels (seed, coefficient index, realization
index, ...) with :func:`derive_key`, so any coefficient or realization can
be sampled independently of evaluation order and thread schedule.

Gaussian variates come from the Marsaglia polar method driven by the
stream's own counter sequence; no platform library Gaussians are used, so
identical labels give identical draws everywhere.
"""

from __future__ import annotations

import numpy as np

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_KEY0 = np.uint64(0x243F6A8885A308D3)  # pi fraction, arbitrary non-zero start
_INV53 = 1.0 / float(1 << 53)


def mix64(z):
    """SplitMix64 finalizer on uint64 scalars or arrays (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = z ^ (z >> np.uint64(30))
        z = z * _MIX1
        z = z ^ (z >> np.uint64(27))
        z = z * _MIX2
        z = z ^ (z >> np.uint64(31))
    return z


def derive_key(*labels: int) -> int:
    """Fold integer labels into a 64-bit stream key.

    Order matters: ``derive_key(seed, i, r)`` opens the stream for
    realization r of slot i under the master seed.
    """
    k = _KEY0
    with np.errstate(over="ignore"):
        for label in labels:
            part = np.uint64(int(label) & 0xFFFFFFFFFFFFFFFF)
            k = mix64((k + part + _GOLDEN) & _MASK)
    return int(k)


def derive_keys(labels, indices) -> np.ndarray:
    """Vectorized ``derive_key(*labels, i)`` for an array of trailing indices.

    Bit-identical to calling :func:`derive_key` per element.
    """
    k = _KEY0
    with np.errstate(over="ignore"):
        for label in labels:
            part = np.uint64(int(label) & 0xFFFFFFFFFFFFFFFF)
            k = mix64((k + part + _GOLDEN) & _MASK)
        idx = np.asarray(indices).astype(np.uint64)
        return mix64(k + idx + _GOLDEN)


def _raw(keys, counters):
    """Word ``counters`` of each stream in ``keys`` (vectorized)."""
    keys = np.asarray(keys, dtype=np.uint64)
    counters = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(keys + (counters + np.uint64(1)) * _GOLDEN)


def uniforms(keys, counters):
    """Uniform [0, 1) doubles, one per (stream, counter) pair."""
    return (_raw(keys, counters) >> np.uint64(11)).astype(np.float64) * _INV53


def gaussian_pairs(keys):
    """Two standard normal variates per stream via the polar method.

    Each stream consumes its counters 0, 1, 2, ... until its own polar
    rejection loop accepts, so lanes never interact and the result is
    independent of batching.

    Returns
    -------
    (g1, g2) : pair of float64 arrays, same shape as ``keys``
    """
    keys = np.ascontiguousarray(keys, dtype=np.uint64).ravel()
    n = keys.size
    g1 = np.empty(n)
    g2 = np.empty(n)
    pending = np.arange(n)
    round_no = np.zeros(n, dtype=np.uint64)
    two = np.uint64(2)
    one = np.uint64(1)
    while pending.size:
        k = keys[pending]
        c = round_no[pending]
        with np.errstate(over="ignore"):
            u = 2.0 * uniforms(k, c * two) - 1.0
            v = 2.0 * uniforms(k, c * two + one) - 1.0
        s = u * u + v * v
        ok = (s > 0.0) & (s < 1.0)
        if np.any(ok):
            fac = np.sqrt(-2.0 * np.log(s[ok]) / s[ok])
            acc = pending[ok]
            g1[acc] = u[ok] * fac
            g2[acc] = v[ok] * fac
        round_no[pending] += one
        pending = pending[~ok]
    return g1, g2


def gaussians(keys):
    """One standard normal per stream (first component of the polar pair)."""
    g1, _ = gaussian_pairs(keys)
    return g1
