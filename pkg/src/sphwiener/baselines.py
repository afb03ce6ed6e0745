"""Comparison denoisers: per-scale hard thresholding and Gauss-Weierstrass
kernel smoothing.

Hard thresholding renders each scale's wavelet coefficients to the sphere
grid, zeroes samples whose magnitude falls below ``multiplier * sigma_j``
(sigma_j the per-scale noise standard deviation), and re-projects; the
scaling band passes through untouched. Kernel smoothing attenuates degree
l by exp(-l (l+1) kappa), which is the closed form of the estimate
minimizing the kernel-weighted squared error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bank import WaveletBank, wavelet_spectrum
from .errors import ModeError
from .harmonic import HarmonicCoeffs, SphereGrid, SphereMap, forward_sht, inverse_sht, ylm_array
from .transform import analyze, synthesize


@dataclass
class ThresholdPolicy:
    """Threshold multiplier (default 3) and the spatial-domain noise
    variance sigma^2 in harmonic units (trace of the noise covariance
    divided by L^2 for spectrally white noise)."""

    multiplier: float = 3.0
    sigma_sq: float = 0.0

    def __post_init__(self):
        if self.multiplier <= 0:
            raise ValueError(f"multiplier must be > 0, got {self.multiplier}")
        if self.sigma_sq < 0:
            raise ValueError(f"sigma_sq must be >= 0, got {self.sigma_sq}")


def scale_noise_variance(bank: WaveletBank, j: int, sigma_sq: float) -> float:
    """Noise variance of the scale-j wavelet coefficient map,
    sigma_j^2 = sigma^2 sum_l |psi_{j,l,0}|^2 (spatially constant for
    white noise)."""
    if not bank.axisymmetric:
        raise ModeError("per-scale noise variance is defined for axisymmetric banks")
    psi = wavelet_spectrum(bank, j)
    tot = 0.0
    for l in range(bank.L):
        tot += abs(psi.get(l, 0)) ** 2
    return sigma_sq * tot


def hard_threshold_denoise(
    f: HarmonicCoeffs, bank: WaveletBank, policy: ThresholdPolicy, grid: SphereGrid
) -> HarmonicCoeffs:
    """Per-scale hard thresholding of the wavelet coefficient maps.

    Real fields are thresholded on the real part of the samples; complex
    fields on the magnitude. Samples strictly below the threshold are
    zeroed, so a zero-noise policy returns the input (up to the transform
    roundtrip).
    """
    if not bank.axisymmetric:
        raise ModeError("hard thresholding operates on axisymmetric decompositions")
    dec = analyze(f, bank)
    wavelets = {}
    for j in bank.scales:
        tau = policy.multiplier * math.sqrt(scale_noise_variance(bank, j, policy.sigma_sq))
        wj = dec.wavelet(j)
        wmap = inverse_sht(wj, grid)
        samples = wmap.samples.copy()
        if wj.real_field:
            keep = np.abs(samples.real) >= tau
        else:
            keep = np.abs(samples) >= tau
        samples[~keep] = 0.0
        thr = forward_sht(SphereMap(grid=grid, samples=samples), bank.L)
        thr.real_field = wj.real_field
        wavelets[j] = thr
    filtered = type(dec)(bank=bank, scaling=dec.scaling, wavelets=wavelets, mode=dec.mode)
    return synthesize(filtered)


def gwks_denoise(f: HarmonicCoeffs, kappa: float) -> HarmonicCoeffs:
    """Gauss-Weierstrass kernel smoothing: degree l attenuated by
    exp(-l (l+1) kappa). kappa = 0 returns the input unchanged."""
    if not 0.0 <= kappa <= 1.0:
        raise ValueError(f"kappa must lie in [0, 1], got {kappa}")
    out = f.copy()
    for l in range(f.L):
        out.degree_slice(l)[:] *= math.exp(-l * (l + 1) * kappa)
    return out


def gw_kernel(x, y, kappa: float, L: int) -> complex:
    """Bandlimited Gauss-Weierstrass kernel
    sum_{l<L, m} exp(-l (l+1) kappa) Y_l^m(x) conj(Y_l^m(y)) for
    directions x = (theta, phi), y = (theta', phi'). Hermitian:
    K(x, y) = conj(K(y, x))."""
    if not 0.0 <= kappa <= 1.0:
        raise ValueError(f"kappa must lie in [0, 1], got {kappa}")
    yx = ylm_array(L, *x)
    yy = ylm_array(L, *y)
    total = 0.0 + 0.0j
    for l in range(L):
        block = slice(l * l, (l + 1) * (l + 1))
        total += math.exp(-l * (l + 1) * kappa) * np.sum(yx[block] * np.conj(yy[block]))
    return complex(total)


def default_kappa_grid() -> np.ndarray:
    """kappa values used by the experiment harness: 0 plus 17 log-spaced
    points in [1e-5, 1]."""
    return np.concatenate(([0.0], np.geomspace(1e-5, 1.0, 17)))
