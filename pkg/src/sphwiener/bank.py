"""Harmonic tiling bank: scaling + wavelet generators and directionality.

The tiling follows the smooth scale-discretized construction: an
infinitely differentiable bump s(t) = exp(-1/(1-t^2)) on (-1, 1) is
squeezed onto [1/lambda, 1], its normalized logarithmic integral k(t)
falls smoothly from 1 to 0 on that interval, and

    kappa(t) = sqrt(k(t/lambda) - k(t)),   eta(t) = sqrt(k(t)).

Scale j samples kappa at t = l / lambda^j, the scaling generator samples
eta at t = l / lambda^j1. Telescoping gives the per-degree identity
eta(l)^2 + sum_j kappa_j(l)^2 = 1 for every l < L, which is exactly the
reconstruction (admissibility) budget checked by
:func:`check_admissibility`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    InvalidBandlimitError,
    InvalidDilationError,
    InvalidScaleRangeError,
    ModeError,
)
from .harmonic import HarmonicCoeffs, flat_index

_K_CACHE: dict = {}


def _bump_sq_over_t(u: float, lam: float) -> float:
    """Integrand s_lambda(u)^2 / u of the tiling integral."""
    t = 2.0 * lam * (u - 1.0 / lam) / (lam - 1.0) - 1.0
    if t <= -1.0 or t >= 1.0:
        return 0.0
    return math.exp(-2.0 / (1.0 - t * t)) / u


def _adaptive_simpson(f, a, b, tol, fa, fm, fb, whole, depth):
    m = 0.5 * (a + b)
    flm = f(0.5 * (a + m))
    frm = f(0.5 * (m + b))
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    return _adaptive_simpson(
        f, a, m, 0.5 * tol, fa, flm, fm, left, depth - 1
    ) + _adaptive_simpson(f, m, b, 0.5 * tol, fm, frm, fb, right, depth - 1)


def _integrate(f, a, b, tol=1e-12):
    if b <= a:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _adaptive_simpson(f, a, b, tol, fa, fm, fb, whole, 48)


def tiling_k(t: float, lam: float) -> float:
    """Normalized tail integral k(t): 1 for t <= 1/lambda, 0 for t >= 1."""
    if t <= 1.0 / lam:
        return 1.0
    if t >= 1.0:
        return 0.0
    key = (lam, t)
    val = _K_CACHE.get(key)
    if val is None:
        f = lambda u: _bump_sq_over_t(u, lam)
        total = _K_CACHE.get((lam, "total"))
        if total is None:
            total = _integrate(f, 1.0 / lam, 1.0)
            _K_CACHE[(lam, "total")] = total
        val = _integrate(f, t, 1.0) / total
        _K_CACHE[key] = val
    return val


def tiling_kappa(t: float, lam: float) -> float:
    """Wavelet generator kappa(t), supported on (1/lambda, lambda)."""
    return math.sqrt(max(0.0, tiling_k(t / lam, lam) - tiling_k(t, lam)))


def tiling_eta(t: float, lam: float) -> float:
    """Scaling generator eta(t), supported on [0, 1)."""
    return math.sqrt(tiling_k(t, lam))


def max_scale(L: int, lam: float) -> int:
    """Smallest j with lambda^j >= L - 1 (the top wavelet scale)."""
    if L < 2:
        raise InvalidBandlimitError(f"bandlimit must be >= 2, got {L}")
    j = max(0, int(math.ceil(math.log(L - 1) / math.log(lam))))
    while lam**j < L - 1:
        j += 1
    while j > 0 and lam ** (j - 1) >= L - 1:
        j -= 1
    return j


@dataclass
class WaveletBank:
    """Tiling values and directionality weights for one (L, lambda, j1).

    Attributes
    ----------
    L : bandlimit
    lam : dilation parameter, > 1
    j1, j2 : minimum and maximum wavelet scale
    kappa : (j2-j1+1, L) real array, kappa[j-j1][l]
    eta : (L,) real array of scaling tiling values
    zeta : (L, 2L-1) complex directionality, column m + (L-1); the default
        bank has zeta[l, 0] = 1 only (azimuthally symmetric wavelets)
    """

    L: int
    lam: float
    j1: int
    j2: int
    kappa: np.ndarray
    eta: np.ndarray
    zeta: np.ndarray

    @property
    def scales(self) -> range:
        return range(self.j1, self.j2 + 1)

    @property
    def axisymmetric(self) -> bool:
        mask = np.ones(2 * self.L - 1, dtype=bool)
        mask[self.L - 1] = False
        return not np.any(self.zeta[:, mask])

    def zeta_row(self, l: int) -> np.ndarray:
        """Directionality weights (zeta_{l,-l} .. zeta_{l,l})."""
        c = self.L - 1
        return self.zeta[l, c - l : c + l + 1]

    def with_zeta(self, zeta: np.ndarray) -> "WaveletBank":
        """Same tiling with user directionality; rows must be unit norm."""
        zeta = np.asarray(zeta, dtype=np.complex128)
        if zeta.shape != (self.L, 2 * self.L - 1):
            raise ModeError(
                f"zeta must have shape ({self.L}, {2 * self.L - 1}), got {zeta.shape}"
            )
        for l in range(self.L):
            c = self.L - 1
            row = zeta[l, c - l : c + l + 1]
            if np.any(zeta[l, : c - l]) or np.any(zeta[l, c + l + 1 :]):
                raise ModeError(f"zeta row {l} has entries with |m| > l")
            norm = float(np.sum(np.abs(row) ** 2))
            if norm != 0.0 and abs(norm - 1.0) > 1e-10:
                raise ModeError(f"zeta row {l} has norm {norm}, expected 1")
        return replace(self, zeta=zeta)


def build_bank(L: int, lam: float = 2.0, j1: int = 0) -> WaveletBank:
    """Construct the tiling bank for bandlimit L.

    Raises
    ------
    InvalidDilationError : lam <= 1
    InvalidScaleRangeError : j1 negative or above the top scale
    InvalidBandlimitError : L < 2
    """
    if lam <= 1.0:
        raise InvalidDilationError(f"dilation must exceed 1, got {lam}")
    j2 = max_scale(L, lam)
    if j1 < 0 or j1 > j2:
        raise InvalidScaleRangeError(f"j1={j1} outside [0, {j2}]")
    n_scales = j2 - j1 + 1
    kappa = np.zeros((n_scales, L))
    for j in range(j1, j2 + 1):
        scale = lam**j
        for l in range(L):
            kappa[j - j1, l] = tiling_kappa(l / scale, lam)
    eta = np.array([tiling_eta(l / lam**j1, lam) for l in range(L)])
    zeta = np.zeros((L, 2 * L - 1), dtype=np.complex128)
    zeta[:, L - 1] = 1.0
    return WaveletBank(L=L, lam=lam, j1=j1, j2=j2, kappa=kappa, eta=eta, zeta=zeta)


def wavelet_spectrum(bank: WaveletBank, j: int) -> HarmonicCoeffs:
    """Harmonic coefficients of the scale-j wavelet kernel.

    psi_{l,m} = kappa_j(l) zeta_{l,m} / sqrt(N_l) with N_l = 8 pi^2/(2l+1).
    """
    if j < bank.j1 or j > bank.j2:
        raise InvalidScaleRangeError(f"scale {j} outside [{bank.j1}, {bank.j2}]")
    out = HarmonicCoeffs.zeros(bank.L)
    for l in range(bank.L):
        k = bank.kappa[j - bank.j1, l]
        if k == 0.0:
            continue
        norm = math.sqrt((2 * l + 1) / (8.0 * math.pi**2))
        out.degree_slice(l)[:] = norm * k * bank.zeta_row(l)
    return out


def scaling_spectrum(bank: WaveletBank) -> HarmonicCoeffs:
    """Harmonic coefficients of the (azimuthally symmetric) scaling kernel.

    Only m = 0 entries: Phi_{l,0] = sqrt(2 pi / N_l) eta(l).
    """
    out = HarmonicCoeffs.zeros(bank.L)
    for l in range(bank.L):
        if bank.eta[l] == 0.0:
            continue
        out.values[flat_index(l, 0)] = math.sqrt(
            2.0 * math.pi * (2 * l + 1) / (8.0 * math.pi**2)
        ) * bank.eta[l]
    return out


def check_admissibility(bank: WaveletBank) -> float:
    """Max over l of |N_l ((1/2pi)|Phi_l0|^2 + sum_{j,m} |psi_{l,m}|^2) - 1|.

    Computed from the actual kernel spectra, not the stored tiling values,
    so it exercises the same objects the transform uses.
    """
    scal = scaling_spectrum(bank)
    wavs = [wavelet_spectrum(bank, j) for j in bank.scales]
    worst = 0.0
    for l in range(bank.L):
        const = 8.0 * math.pi**2 / (2 * l + 1)
        tot = abs(scal.values[flat_index(l, 0)]) ** 2 / (2.0 * math.pi)
        for w in wavs:
            tot += float(np.sum(np.abs(w.degree_slice(l)) ** 2))
        worst = max(worst, abs(const * tot - 1.0))
    return worst
