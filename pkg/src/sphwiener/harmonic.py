"""Exact spherical harmonic analysis/synthesis on Gauss-Legendre grids.

Conventions, fixed once for the whole package:

* orthonormal complex spherical harmonics with Condon-Shortley phase,
  ``Y_l^m(theta, phi) = q_lm(theta) exp(i m phi)`` with real ``q_lm``;
* coefficients stored in a flat array with index ``l*l + l + m`` so each
  degree occupies a contiguous block with orders ascending from -l to l;
* quadrature in colatitude uses Gauss-Legendre nodes in cos(theta), which
  integrates products of two bandlimited-L signals exactly with only L
  rings; longitude uses 2L-1 uniform nodes and the FFT.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BandlimitMismatchError,
    InvalidBandlimitError,
    InvalidOrderError,
    UndersampledGridError,
)

FOUR_PI = 4.0 * np.pi


def flat_index(l: int, m: int) -> int:
    """Position of coefficient (l, m) in the canonical flat layout."""
    return l * l + l + m


def half_index(l: int, m: int) -> int:
    """Position of (l, m >= 0) in the triangular Legendre table layout."""
    return l * (l + 1) // 2 + m


@dataclass
class HarmonicCoeffs:
    """Spectral coefficients of a signal bandlimited to degree ``L``.

    Attributes
    ----------
    L : int
        Bandlimit; coefficients exist for 0 <= l < L, |m| <= l.
    values : complex ndarray, shape (L*L,)
        Flat coefficient array, index ``l*l + l + m``.
    real_field : bool
        Declares that the underlying spatial signal is real, i.e. the
        coefficients satisfy conjugate symmetry
        ``c[l, -m] == (-1)**m * conj(c[l, m])``.
    """

    L: int
    values: np.ndarray
    real_field: bool = False

    def __post_init__(self):
        if self.L < 1:
            raise InvalidBandlimitError(f"bandlimit must be >= 1, got {self.L}")
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != (self.L * self.L,):
            raise BandlimitMismatchError(
                f"expected {self.L * self.L} coefficients, got shape {self.values.shape}"
            )

    @classmethod
    def zeros(cls, L: int, real_field: bool = False) -> "HarmonicCoeffs":
        return cls(L, np.zeros(L * L, dtype=np.complex128), real_field)

    def get(self, l: int, m: int) -> complex:
        if abs(m) > l:
            raise InvalidOrderError(f"|m|={abs(m)} exceeds l={l}")
        return complex(self.values[flat_index(l, m)])

    def degree_slice(self, l: int) -> np.ndarray:
        """View of the (2l+1) coefficients of degree l, orders -l..l."""
        return self.values[l * l : (l + 1) * (l + 1)]

    def energy(self) -> float:
        """Total spectral energy, equal to the spatial energy by Parseval."""
        return float(np.sum(np.abs(self.values) ** 2))

    def copy(self) -> "HarmonicCoeffs":
        return HarmonicCoeffs(self.L, self.values.copy(), self.real_field)

    def padded_to(self, L: int) -> "HarmonicCoeffs":
        """Same signal viewed at a larger bandlimit (zero-fill above self.L)."""
        if L < self.L:
            raise BandlimitMismatchError(f"cannot pad from L={self.L} down to {L}")
        if L == self.L:
            return self.copy()
        out = np.zeros(L * L, dtype=np.complex128)
        out[: self.L * self.L] = self.values
        return HarmonicCoeffs(L, out, self.real_field)

    def real_symmetry_deviation(self) -> float:
        """Max relative deviation from the real-field conjugate symmetry."""
        scale = max(np.max(np.abs(self.values)), np.finfo(float).tiny)
        dev = 0.0
        for l in range(self.L):
            block = self.degree_slice(l)
            mirrored = np.conj(block[::-1]) * ((-1.0) ** np.arange(-l, l + 1))
            dev = max(dev, float(np.max(np.abs(block - mirrored))) / scale)
        return dev

    def __add__(self, other: "HarmonicCoeffs") -> "HarmonicCoeffs":
        if other.L != self.L:
            raise BandlimitMismatchError("bandlimits differ")
        return HarmonicCoeffs(
            self.L, self.values + other.values, self.real_field and other.real_field
        )

    def __sub__(self, other: "HarmonicCoeffs") -> "HarmonicCoeffs":
        if other.L != self.L:
            raise BandlimitMismatchError("bandlimits differ")
        return HarmonicCoeffs(
            self.L, self.values - other.values, self.real_field and other.real_field
        )

    def __mul__(self, scalar) -> "HarmonicCoeffs":
        return HarmonicCoeffs(
            self.L, self.values * scalar, self.real_field and not np.iscomplexobj(scalar)
        )

    __rmul__ = __mul__


@dataclass
class SphereGrid:
    """Equiangular-in-phi, Gauss-Legendre-in-theta sampling of the sphere.

    ``weights[i]`` is the quadrature weight of ring i with respect to the
    measure d(cos theta); the phi direction carries the uniform weight
    2*pi / n_phi applied inside the transforms.
    """

    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray
    _legendre_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_theta(self) -> int:
        return self.theta.size

    @property
    def n_phi(self) -> int:
        return self.phi.size

    def legendre_table(self, L: int) -> np.ndarray:
        """Cached table of q_lm(theta_i) for m >= 0, shape (n_theta, L(L+1)/2)."""
        tab = self._legendre_cache.get(L)
        if tab is None:
            tab = legendre_columns(L, np.cos(self.theta))
            self._legendre_cache[L] = tab
        return tab

    def quadrature_deviation(self, L: int) -> float:
        """Worst error integrating Legendre polynomials up to degree 2L-2.

        Exactness of the ring rule for every P_k, k <= 2L-2, is the
        precondition for exact transforms at bandlimit L.
        """
        x = np.cos(self.theta)
        dev = abs(float(np.sum(self.weights)) - 2.0)  # integral of P_0 is 2
        p_prev = np.ones_like(x)  # P_0
        p = x.copy()  # P_1
        for k in range(1, 2 * L - 1):
            dev = max(dev, abs(float(np.dot(self.weights, p))))  # P_k, k >= 1
            p, p_prev = ((2 * k + 1) * x * p - k * p_prev) / (k + 1), p
        return dev


@dataclass
class SphereMap:
    """Samples of a signal on a :class:`SphereGrid`, row i = ring theta[i]."""

    grid: SphereGrid
    samples: np.ndarray

    def __post_init__(self):
        self.samples = np.asarray(self.samples)
        if self.samples.shape != (self.grid.n_theta, self.grid.n_phi):
            raise UndersampledGridError(
                f"samples shape {self.samples.shape} does not match grid "
                f"({self.grid.n_theta}, {self.grid.n_phi})"
            )

    def energy(self) -> float:
        """Quadrature of |f|^2 over the sphere."""
        ring = np.sum(np.abs(self.samples) ** 2, axis=1) * (2.0 * np.pi / self.grid.n_phi)
        return float(np.dot(self.grid.weights, ring))


def make_gauss_legendre_grid(L: int) -> SphereGrid:
    """Smallest grid that is exact for bandlimit L.

    L Gauss-Legendre rings in cos(theta) (exact for polynomial degree up to
    2L-1) and 2L-1 uniform longitudes (exact for azimuthal frequencies up
    to 2L-2). Rings are ordered by increasing theta (north to south).
    """
    if L < 1:
        raise InvalidBandlimitError(f"bandlimit must be >= 1, got {L}")
    x, w = np.polynomial.legendre.leggauss(L)
    order = np.argsort(-x)  # decreasing x = increasing theta
    theta = np.arccos(x[order])
    weights = w[order]
    phi = 2.0 * np.pi * np.arange(2 * L - 1) / (2 * L - 1)
    return SphereGrid(theta=theta, phi=phi, weights=weights)


def _recursion_coeffs(L: int):
    """Tables a[l,m], b[l,m] for the normalized Legendre three-term recursion."""
    a = np.zeros((L, L))
    b = np.zeros((L, L))
    for m in range(L):
        for l in range(m + 1, L):
            a[l, m] = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b[l, m] = -np.sqrt(
                (2.0 * l + 1.0)
                * ((l - 1.0) ** 2 - m * m)
                / ((2.0 * l - 3.0) * (l * l - m * m))
            )
    return a, b


_COEFF_CACHE: dict = {}


def legendre_columns(L: int, x: np.ndarray) -> np.ndarray:
    """Orthonormal associated Legendre values q_lm(theta) at x = cos(theta).

    Returns shape ``(len(x), L*(L+1)/2)`` with column :func:`half_index`
    (l, m), m >= 0, including the Condon-Shortley phase and the
    sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!) normalization, so that
    Y_l^m = q_lm * exp(i m phi) for m >= 0.

    The diagonal seed q_mm is carried as (mantissa, base-2 exponent) so
    intermediate products never underflow; the upward recursion in l then
    runs on carriers scaled by that exponent and is renormalized every few
    degrees. Magnitudes below the double-precision range flush to zero.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    nx = x.size
    out = np.zeros((nx, L * (L + 1) // 2))
    if L not in _COEFF_CACHE:
        _COEFF_CACHE[L] = _recursion_coeffs(L)
    a, b = _COEFF_CACHE[L]

    s = np.sqrt(np.maximum(0.0, 1.0 - x * x))  # sin(theta)
    mant = np.full(nx, 1.0 / np.sqrt(FOUR_PI))
    exp2 = np.zeros(nx, dtype=np.int64)
    for m in range(L):
        if m > 0:
            mant = mant * (-s) * np.sqrt((2.0 * m + 1.0) / (2.0 * m))
            mant, de = np.frexp(mant)
            exp2 = exp2 + de
        u = mant.copy()
        e = exp2.copy()
        u_prev = np.zeros(nx)
        out[:, half_index(m, m)] = np.ldexp(u, e)
        for l in range(m + 1, L):
            u, u_prev = a[l, m] * x * u + b[l, m] * u_prev, u
            out[:, half_index(l, m)] = np.ldexp(u, e)
            if (l - m) % 16 == 0:
                u, de = np.frexp(u)
                u_prev = np.ldexp(u_prev, -de)
                e = e + de
    return out


def ylm(l: int, m: int, theta: float, phi: float) -> complex:
    """Orthonormal spherical harmonic Y_l^m(theta, phi).

    Condon-Shortley phase; satisfies Y_l^{-m} = (-1)^m conj(Y_l^m).
    """
    if l < 0:
        raise InvalidOrderError(f"degree must be >= 0, got {l}")
    if abs(m) > l:
        raise InvalidOrderError(f"|m|={abs(m)} exceeds l={l}")
    tab = legendre_columns(l + 1, np.array([np.cos(float(theta))]))
    q = tab[0, half_index(l, abs(m))]
    if m < 0:
        q *= (-1.0) ** m
    return complex(q * np.exp(1j * m * phi))


def ylm_array(L: int, theta: float, phi: float) -> np.ndarray:
    """All Y_l^m(theta, phi) for l < L as a flat array (index l*l + l + m)."""
    tab = legendre_columns(L, np.array([np.cos(float(theta))]))[0]
    out = np.empty(L * L, dtype=np.complex128)
    for l in range(L):
        for m in range(l + 1):
            q = tab[half_index(l, m)]
            val = q * np.exp(1j * m * phi)
            out[flat_index(l, m)] = val
            if m:
                out[flat_index(l, -m)] = ((-1.0) ** m) * np.conj(val)
    return out


def forward_sht(smap: SphereMap, L: int) -> HarmonicCoeffs:
    """Project a map onto the harmonics: c[l, m] = <f, Y_l^m>.

    Exact when the map is bandlimited to L and the grid satisfies the
    exactness precondition (n_theta >= L Gauss-Legendre rings,
    n_phi >= 2L-1). Ring-wise: FFT over phi, then a weighted Legendre sum
    over rings, with a fixed summation order so results are deterministic.
    """
    grid = smap.grid
    if L < 1:
        raise InvalidBandlimitError(f"bandlimit must be >= 1, got {L}")
    if grid.n_theta < L or grid.n_phi < 2 * L - 1:
        raise UndersampledGridError(
            f"grid ({grid.n_theta}, {grid.n_phi}) too small for bandlimit {L}: "
            f"need at least ({L}, {2 * L - 1})"
        )
    n_phi = grid.n_phi
    fphi = np.fft.fft(smap.samples, axis=1) * (2.0 * np.pi / n_phi)
    tab = grid.legendre_table(L)
    values = np.zeros(L * L, dtype=np.complex128)
    for m in range(L):
        cols = np.stack([tab[:, half_index(l, m)] for l in range(m, L)], axis=1)
        wpos = grid.weights * fphi[:, m % n_phi]
        cpos = wpos @ cols  # coefficients l = m..L-1 at order +m
        for i, l in enumerate(range(m, L)):
            values[flat_index(l, m)] = cpos[i]
        if m > 0:
            wneg = grid.weights * fphi[:, (-m) % n_phi]
            cneg = ((-1.0) ** m) * (wneg @ cols)
            for i, l in enumerate(range(m, L)):
                values[flat_index(l, -m)] = cneg[i]
    return HarmonicCoeffs(L, values)


def inverse_sht(coeffs: HarmonicCoeffs, grid: SphereGrid) -> SphereMap:
    """Synthesize the finite expansion sum_{l,m} c[l,m] Y_l^m on the grid."""
    L = coeffs.L
    if grid.n_phi < 2 * L - 1:
        raise UndersampledGridError(
            f"grid n_phi={grid.n_phi} cannot carry orders up to {L - 1} "
            f"without aliasing; need >= {2 * L - 1}"
        )
    n_phi = grid.n_phi
    tab = grid.legendre_table(L)
    fphi = np.zeros((grid.n_theta, n_phi), dtype=np.complex128)
    for m in range(L):
        cols = np.stack([tab[:, half_index(l, m)] for l in range(m, L)], axis=1)
        cpos = np.array([coeffs.values[flat_index(l, m)] for l in range(m, L)])
        fphi[:, m % n_phi] += cols @ cpos
        if m > 0:
            cneg = np.array([coeffs.values[flat_index(l, -m)] for l in range(m, L)])
            fphi[:, (-m) % n_phi] += ((-1.0) ** m) * (cols @ cneg)
    samples = np.fft.ifft(fphi, axis=1) * n_phi
    return SphereMap(grid=grid, samples=samples)
