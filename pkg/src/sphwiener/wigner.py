"""Wigner-d / Wigner-D functions and rotation of spectra.

Rotations use the right-handed zyz convention: a rotation
``rho = (varphi, vartheta, omega)`` acts as Rz(varphi) Ry(vartheta)
Rz(omega), and

    D^l_{m,m'}(rho) = exp(-i m varphi) d^l_{m,m'}(vartheta) exp(-i m' omega).

The sign convention is pinned to the harmonic module by the bridge
identity D^l_{m,0}(varphi, vartheta, 0) =
sqrt(4 pi / (2l+1)) conj(Y_l^m(vartheta, varphi)), which
:func:`check_y_bridge` evaluates.

d-functions are computed by the three-term recursion in the degree at
fixed (m, m'), seeded at degree max(|m|, |m'|) from the closed corner
form evaluated in log space; the recursion carries a shared base-2
exponent so it stays finite well past degree 256.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidOrderError
from .harmonic import FOUR_PI, HarmonicCoeffs, ylm

TWO_PI = 2.0 * np.pi


@dataclass
class EulerAngles:
    """zyz Euler angles, normalized on construction to
    varphi, omega in [0, 2 pi) and vartheta in [0, pi].

    Out-of-range vartheta is folded with the identity
    Ry(-t) = Rz(pi) Ry(t) Rz(-pi), which shifts varphi and omega by pi.
    """

    varphi: float
    vartheta: float
    omega: float

    def __post_init__(self):
        th = float(self.vartheta) % TWO_PI
        ph = float(self.varphi)
        om = float(self.omega)
        if th > np.pi:
            th = TWO_PI - th
            ph += np.pi
            om -= np.pi
        self.vartheta = th
        self.varphi = ph % TWO_PI
        self.omega = om % TWO_PI

    def inverse(self) -> "EulerAngles":
        """Angles of the inverse rotation."""
        return EulerAngles(-self.omega, -self.vartheta, -self.varphi)


def _corner_seed(l0: int, n: int, beta: float) -> tuple[float, int]:
    """d^{l0}_{l0, n}(beta) as (mantissa, base-2 exponent).

    Corner closed form: sqrt(C(2 l0, l0 + n)) cos(b/2)^{l0+n} (-sin(b/2))^{l0-n}.
    """
    c = math.cos(0.5 * beta)
    s = math.sin(0.5 * beta)
    pc, ps = l0 + n, l0 - n
    if (c == 0.0 and pc > 0) or (s == 0.0 and ps > 0):
        return 0.0, 0
    sign = 1.0
    if c < 0.0 and pc % 2:
        sign = -sign
    if -s < 0.0 and ps % 2:
        sign = -sign
    logmag = 0.5 * (
        math.lgamma(2 * l0 + 1) - math.lgamma(pc + 1) - math.lgamma(ps + 1)
    )
    if pc:
        logmag += pc * math.log(abs(c))
    if ps:
        logmag += ps * math.log(abs(s))
    e = int(math.floor(logmag / math.log(2.0)))
    mant = sign * math.exp(logmag - e * math.log(2.0))
    return mant, e


def _seed(l0: int, m: int, mp: int, beta: float) -> tuple[float, int]:
    """Seed d^{l0}_{m,mp}(beta) via symmetry maps onto the corner form."""
    if l0 == 0:
        return 1.0, 0
    if m == l0:
        mant, e = _corner_seed(l0, mp, beta)
    elif mp == l0:
        mant, e = _corner_seed(l0, m, beta)
        if (m - mp) % 2:
            mant = -mant
    elif m == -l0:
        mant, e = _corner_seed(l0, -mp, beta)
        if (m - mp) % 2:
            mant = -mant
    else:  # mp == -l0
        mant, e = _corner_seed(l0, -m, beta)
    return mant, e


def wigner_d_chain(L: int, m: int, mp: int, beta: float) -> np.ndarray:
    """d^l_{m,mp}(beta) for every degree l in [0, L).

    Entries with l < max(|m|, |mp|) are zero. One pass of the degree
    recursion; cost O(L).
    """
    out = np.zeros(L)
    l0 = max(abs(m), abs(mp))
    if l0 >= L:
        return out
    x = math.cos(beta)
    u, e = _seed(l0, m, mp, beta)
    u_prev = 0.0
    out[l0] = math.ldexp(u, e) if abs(e) < 4000 else 0.0
    if l0 == 0 and L > 1 and m == 0 and mp == 0:
        # recursion denominators vanish at l = 0; take the explicit step
        u_prev, u = u, x * u
        out[1] = math.ldexp(u, e)
        start = 1
    else:
        start = l0
    for l in range(max(start, l0), L - 1):
        den = l * math.sqrt(((l + 1.0) ** 2 - m * m) * ((l + 1.0) ** 2 - mp * mp))
        c1 = (2 * l + 1.0) * (l * (l + 1.0) * x - m * mp) / den
        c2 = (l + 1.0) * math.sqrt((l * l - m * m) * (l * l - mp * mp)) / den
        u, u_prev = c1 * u - c2 * u_prev, u
        if abs(u) > 1e250:
            u *= 0.5 ** 1000
            u_prev *= 0.5 ** 1000
            e += 1000
        elif 0.0 < abs(u) < 1e-250 and abs(u_prev) < 1e-250:
            u *= 2.0 ** 1000
            u_prev *= 2.0 ** 1000
            e -= 1000
        out[l + 1] = math.ldexp(u, e) if abs(e) < 4000 else 0.0
    return out


def wigner_small_d(l: int, m: int, mp: int, beta: float) -> float:
    """Real Wigner little-d function d^l_{m,mp}(beta)."""
    if l < 0:
        raise InvalidOrderError(f"degree must be >= 0, got {l}")
    if abs(m) > l or abs(mp) > l:
        raise InvalidOrderError(f"orders ({m}, {mp}) out of range for l={l}")
    return float(wigner_d_chain(l + 1, m, mp, beta)[l])


def wigner_d_tables(L: int, beta: float) -> list[np.ndarray]:
    """Full d^l matrices for all degrees l < L at one angle.

    Returns a list where entry l is the (2l+1, 2l+1) matrix indexed
    [m + l, mp + l]. Each (m, mp) pair is one recursion chain shared by
    all degrees.
    """
    mats = [np.zeros((2 * l + 1, 2 * l + 1)) for l in range(L)]
    for m in range(-(L - 1), L):
        for mp in range(-(L - 1), L):
            chain = wigner_d_chain(L, m, mp, beta)
            for l in range(max(abs(m), abs(mp)), L):
                mats[l][m + l, mp + l] = chain[l]
    return mats


def wigner_D(l: int, m: int, mp: int, rho: EulerAngles) -> complex:
    """Wigner-D function D^l_{m,mp}(rho) in the zyz convention."""
    d = wigner_small_d(l, m, mp, rho.vartheta)
    return complex(np.exp(-1j * m * rho.varphi) * d * np.exp(-1j * mp * rho.omega))


def check_y_bridge(l: int, m: int, vartheta: float, varphi: float) -> float:
    """Deviation of the D-to-Y bridge at one point.

    Returns |D^l_{m,0}(varphi, vartheta, 0) -
    sqrt(4 pi/(2l+1)) conj(Y_l^m(vartheta, varphi))|. Any value above
    1e-12 means the two modules disagree on conventions.
    """
    lhs = wigner_D(l, m, 0, EulerAngles(varphi, vartheta, 0.0))
    rhs = math.sqrt(FOUR_PI / (2 * l + 1)) * np.conj(ylm(l, m, vartheta, varphi))
    return float(abs(lhs - rhs))


def rotate_coeffs(f: HarmonicCoeffs, rho: EulerAngles) -> HarmonicCoeffs:
    """Spectral coefficients of the rotated signal.

    Per degree, new_m = sum_{m'} D^l_{m,m'}(rho) c_{m'}; the per-degree
    matrices are unitary, so each degree's energy is preserved.
    """
    L = f.L
    d = wigner_d_tables(L, rho.vartheta)
    out = HarmonicCoeffs.zeros(L)
    for l in range(L):
        ms = np.arange(-l, l + 1)
        phase_m = np.exp(-1j * ms * rho.varphi)
        phase_mp = np.exp(-1j * ms * rho.omega)
        Dl = phase_m[:, None] * d[l] * phase_mp[None, :]
        out.degree_slice(l)[:] = Dl @ f.degree_slice(l)
    return out
