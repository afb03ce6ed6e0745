"""Noise synthesis, covariance models, SNR metric, synthetic sources.

All randomness flows through the counter-based generator in
:mod:`sphwiener.rng`: coefficient (l, m) of a draw with seed ``s`` is fed
by stream ``derive_key(s, l*l + l + m)``, so draws are reproducible
bit-for-bit and independent of evaluation order.

Real spatial fields are reconciled with a spectrally white model by
drawing the m = 0 coefficient real with variance sigma^2, the m > 0
coefficients complex with independent real/imaginary parts of variance
sigma^2 / 2, and fixing m < 0 by conjugate symmetry; every coefficient
then has E|z_lm|^2 = sigma^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CovarianceError, ModeError, UndefinedSnrError
from .harmonic import HarmonicCoeffs, flat_index
from .optfilter import DegreeCovariance
from .rng import derive_keys, gaussian_pairs

_SOURCE_TAG = 0x534F5552  # stream namespace for synthetic sources


@dataclass
class NoiseModel:
    """Specification of a zero-mean Gaussian spectral noise process.

    kind is one of "white-diagonal" (scalar sigma_sq), "diagonal-anisotropic"
    (flat per-(l, m) variances) or "full-block" (per-degree covariance
    blocks). real_field requests conjugate-symmetric coefficients and is
    supported for the two diagonal kinds.
    """

    kind: str
    seed: int
    real_field: bool = True
    sigma_sq: float | None = None
    variances: np.ndarray | None = None
    blocks: DegreeCovariance | None = None

    def flat_variances(self, L: int) -> np.ndarray:
        if self.kind == "white-diagonal":
            if self.sigma_sq is None or self.sigma_sq < 0:
                raise CovarianceError(f"white model needs sigma_sq >= 0, got {self.sigma_sq}")
            return np.full(L * L, float(self.sigma_sq))
        if self.kind == "diagonal-anisotropic":
            v = np.asarray(self.variances, dtype=float)
            if v.shape != (L * L,):
                raise CovarianceError(f"expected {L * L} variances, got {v.shape}")
            if np.any(v < 0):
                raise CovarianceError("negative variance")
            return v
        raise CovarianceError(f"model kind {self.kind!r} has no diagonal variances")

    def covariance(self, L: int) -> DegreeCovariance:
        """The model's spectral covariance as per-degree blocks."""
        if self.kind == "full-block":
            if self.blocks is None or self.blocks.L != L:
                raise CovarianceError("full-block model needs blocks at the right bandlimit")
            return self.blocks
        return DegreeCovariance.from_diagonal(L, self.flat_variances(L))


def sigma_from_input_snr(s: HarmonicCoeffs, snr_in_db: float) -> float:
    """Noise variance sigma^2 that realizes a target input SNR against s.

    sigma^2 = 10^(-snr/10) * sum |s_lm|^2 / L^2, so the expected noise
    energy L^2 sigma^2 sits exactly 'snr' dB below the signal energy.
    """
    energy = s.energy()
    if energy == 0.0:
        raise UndefinedSnrError("input SNR is undefined for a zero signal")
    return 10.0 ** (-snr_in_db / 10.0) * energy / (s.L * s.L)


_INDEX_CACHE: dict = {}


def _half_indices(L: int):
    """Index arrays for the m >= 0 coefficients: flat index, (l, m), the
    mirrored flat index of (l, -m), and the sign (-1)^m. Cached per L."""
    cached = _INDEX_CACHE.get(L)
    if cached is None:
        idx, ls, ms = [], [], []
        for l in range(L):
            for m in range(l + 1):
                idx.append(flat_index(l, m))
                ls.append(l)
                ms.append(m)
        idx, ls, ms = np.array(idx), np.array(ls), np.array(ms)
        neg = idx - 2 * ms  # flat_index(l, -m)
        sign = np.where(ms % 2 == 0, 1.0, -1.0)
        cached = (idx, ls, ms, neg, sign)
        _INDEX_CACHE[L] = cached
    return cached


def sample_noise(model: NoiseModel, L: int) -> HarmonicCoeffs:
    """Draw one realization of the model's spectral coefficients.

    Deterministic in (model.seed, L); every coefficient has its own
    counter-based stream.
    """
    if model.kind == "full-block":
        if model.real_field:
            raise ModeError("real-field sampling supports diagonal models only")
        cov = model.covariance(L)
        cov.validate()
        values = np.zeros(L * L, dtype=np.complex128)
        for l in range(L):
            block = cov.blocks[l]
            w, V = np.linalg.eigh(0.5 * (block + block.conj().T))
            F = V * np.sqrt(np.clip(w, 0.0, None))
            idx = np.arange(l * l, (l + 1) * (l + 1))
            g1, g2 = gaussian_pairs(derive_keys((model.seed,), idx))
            u = (g1 + 1j * g2) / math.sqrt(2.0)
            values[idx] = F @ u
        return HarmonicCoeffs(L, values, real_field=False)

    v = model.flat_variances(L)
    values = np.zeros(L * L, dtype=np.complex128)
    if model.real_field:
        idx, ls, ms, neg, sign = _half_indices(L)
        vv = v[idx]
        if np.any(np.abs(vv - v[neg]) > 1e-12 * np.maximum(vv, 1.0)):
            raise CovarianceError("real-field sampling needs variances symmetric in m")
        g1, g2 = gaussian_pairs(derive_keys((model.seed,), idx))
        zero_m = ms == 0
        values[idx[zero_m]] = g1[zero_m] * np.sqrt(vv[zero_m])
        pos = ~zero_m
        zpos = (g1[pos] + 1j * g2[pos]) * np.sqrt(vv[pos] / 2.0)
        values[idx[pos]] = zpos
        values[neg[pos]] = sign[pos] * np.conj(zpos)
        return HarmonicCoeffs(L, values, real_field=True)

    idx = np.arange(L * L)
    g1, g2 = gaussian_pairs(derive_keys((model.seed,), idx))
    values = (g1 + 1j * g2) * np.sqrt(v / 2.0)
    return HarmonicCoeffs(L, values, real_field=False)


def empirical_source_covariance(s: HarmonicCoeffs) -> DegreeCovariance:
    """Rank-1 per-degree covariance built from a single realization,
    C[l][m, m'] = s_lm conj(s_lm')."""
    blocks = []
    for l in range(s.L):
        v = s.degree_slice(l)
        blocks.append(np.outer(v, np.conj(v)))
    return DegreeCovariance(s.L, blocks)


def snr_db(d: HarmonicCoeffs, s: HarmonicCoeffs) -> float:
    """20 log10(||s|| / ||d - s||), with norms evaluated spectrally.

    Returns +inf when d equals s exactly.
    """
    if d.L != s.L:
        raise UndefinedSnrError(f"bandlimits differ: {d.L} vs {s.L}")
    ref = math.sqrt(s.energy())
    if ref == 0.0:
        raise UndefinedSnrError("SNR is undefined against a zero reference")
    err = math.sqrt(float(np.sum(np.abs(d.values - s.values) ** 2)))
    if err == 0.0:
        return math.inf
    return 20.0 * math.log10(ref / err)


def spectrum_law_power(L: int, law: str = "red", exponent: float = 2.0) -> np.ndarray:
    """Per-degree expected coefficient power of a synthetic source law."""
    l = np.arange(L, dtype=float)
    if law == "red":
        return (l + 1.0) ** (-float(exponent))
    if law == "flat":
        return np.ones(L)
    raise ModeError(f"unknown spectrum law {law!r}")


def synthetic_source(
    L: int, law: str = "red", exponent: float = 2.0, seed: int = 0
) -> HarmonicCoeffs:
    """Random real-field source with E|s_lm|^2 following the given law,
    rescaled to unit total energy.

    Stands in for an externally supplied map when none is provided; "red"
    with exponent p gives per-coefficient power proportional to (l+1)^-p.
    """
    if L < 2:
        raise UndefinedSnrError(f"bandlimit must be >= 2, got {L}")
    power = spectrum_law_power(L, law, exponent)
    flat = np.repeat(power, 2 * np.arange(L) + 1)
    model = NoiseModel(
        kind="diagonal-anisotropic",
        variances=flat,
        seed=int(derive_keys((_SOURCE_TAG,), np.array([seed]))[0]),
        real_field=True,
    )
    s = sample_noise(model, L)
    norm = math.sqrt(s.energy())
    return HarmonicCoeffs(L, s.values / norm, real_field=True)
