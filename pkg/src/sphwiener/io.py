"""File formats: coefficient/map CSV, filter export, PGM rasters.

Coefficient files are UTF-8 CSV with header ``l,m,re,im`` and rows in the
canonical flat order (index l*l + l + m); map files use ``theta,phi,re,im``
row-major over rings. All floats are written with 17 significant digits so
files round-trip bit-exactly through double precision.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .harmonic import HarmonicCoeffs, SphereMap, flat_index, make_gauss_legendre_grid


def _fmt(x: float) -> str:
    return format(float(x), ".17e")


def write_coeffs_csv(coeffs: HarmonicCoeffs, path) -> None:
    lines = ["l,m,re,im"]
    for l in range(coeffs.L):
        for m in range(-l, l + 1):
            v = coeffs.values[flat_index(l, m)]
            lines.append(f"{l},{m},{_fmt(v.real)},{_fmt(v.imag)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_coeffs_csv(path) -> HarmonicCoeffs:
    """Read a coefficient file; bandlimit is inferred from the row count.

    Rows must be complete and in flat order. The real-field flag is set
    when the coefficients satisfy conjugate symmetry to 1e-10.
    """
    path = Path(path)
    lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines or lines[0].strip().lower().replace(" ", "") != "l,m,re,im":
        raise ConfigError(f"{path}: expected header 'l,m,re,im'")
    n = len(lines) - 1
    L = int(round(math.sqrt(n)))
    if L * L != n or L < 1:
        raise ConfigError(f"{path}: {n} rows is not a complete coefficient set")
    values = np.empty(n, dtype=np.complex128)
    for i, line in enumerate(lines[1:]):
        parts = line.split(",")
        if len(parts) != 4:
            raise ConfigError(f"{path}: malformed row {i + 2}: {line!r}")
        l, m = int(parts[0]), int(parts[1])
        if flat_index(l, m) != i:
            raise ConfigError(
                f"{path}: row {i + 2} carries (l={l}, m={m}), expected flat order"
            )
        values[i] = float(parts[2]) + 1j * float(parts[3])
    out = HarmonicCoeffs(L, values)
    out.real_field = out.real_symmetry_deviation() < 1e-10
    return out


def write_map_csv(smap: SphereMap, path) -> None:
    lines = ["theta,phi,re,im"]
    for i, th in enumerate(smap.grid.theta):
        for k, ph in enumerate(smap.grid.phi):
            v = complex(smap.samples[i, k])
            lines.append(f"{_fmt(th)},{_fmt(ph)},{_fmt(v.real)},{_fmt(v.imag)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_map_csv(path) -> SphereMap:
    """Read a map file sampled on a Gauss-Legendre grid.

    The grid is recognized from the theta nodes (L = number of rings); a
    mismatch against the canonical grid raises, since quadrature weights
    cannot be attached to arbitrary rings.
    """
    path = Path(path)
    lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines or lines[0].strip().lower().replace(" ", "") != "theta,phi,re,im":
        raise ConfigError(f"{path}: expected header 'theta,phi,re,im'")
    thetas, phis, vals = [], [], []
    for line in lines[1:]:
        parts = line.split(",")
        if len(parts) != 4:
            raise ConfigError(f"{path}: malformed row: {line!r}")
        thetas.append(float(parts[0]))
        phis.append(float(parts[1]))
        vals.append(float(parts[2]) + 1j * float(parts[3]))
    u_theta = sorted(set(thetas))
    u_phi = sorted(set(phis))
    n_theta, n_phi = len(u_theta), len(u_phi)
    if n_theta * n_phi != len(vals):
        raise ConfigError(f"{path}: rows do not form a full theta x phi grid")
    grid = make_gauss_legendre_grid(n_theta)
    if grid.n_phi != n_phi:
        raise ConfigError(
            f"{path}: {n_phi} longitudes do not match the {n_theta}-ring grid "
            f"(expected {grid.n_phi})"
        )
    if np.max(np.abs(np.array(u_theta) - grid.theta)) > 1e-9 or np.max(
        np.abs(np.array(u_phi) - grid.phi)
    ) > 1e-9:
        raise ConfigError(f"{path}: nodes are not a Gauss-Legendre grid")
    ti = {t: i for i, t in enumerate(u_theta)}
    pi = {p: i for i, p in enumerate(u_phi)}
    samples = np.zeros((n_theta, n_phi), dtype=np.complex128)
    for th, ph, v in zip(thetas, phis, vals):
        samples[ti[th], pi[ph]] = v
    return SphereMap(grid=grid, samples=samples)


def export_filter_csv(filt, path) -> None:
    """Write filter matrices as rows ``j,l,m,k,re,im`` (inspection format)."""
    lines = ["j,l,m,k,re,im"]
    for j in filt.scales:
        for l in range(filt.L):
            block = filt.block(j, l)
            for mi in range(-l, l + 1):
                for ki in range(-l, l + 1):
                    v = block[mi + l, ki + l]
                    lines.append(f"{j},{l},{mi},{ki},{_fmt(v.real)},{_fmt(v.imag)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_zeta_csv(path, L: int) -> np.ndarray:
    """Read directionality weights from an ``l,m,re,im`` file into the
    (L, 2L-1) layout used by the bank (unlisted entries are zero)."""
    path = Path(path)
    lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines or lines[0].strip().lower().replace(" ", "") != "l,m,re,im":
        raise ConfigError(f"{path}: expected header 'l,m,re,im'")
    zeta = np.zeros((L, 2 * L - 1), dtype=np.complex128)
    for line in lines[1:]:
        parts = line.split(",")
        if len(parts) != 4:
            raise ConfigError(f"{path}: malformed row: {line!r}")
        l, m = int(parts[0]), int(parts[1])
        if not (0 <= l < L) or abs(m) > l:
            raise ConfigError(f"{path}: entry (l={l}, m={m}) out of range for L={L}")
        zeta[l, m + L - 1] = float(parts[2]) + 1j * float(parts[3])
    return zeta


def write_pgm(smap: SphereMap, path) -> None:
    """Write a binary 8-bit PGM raster of a real-valued map.

    Rows are theta rings, columns phi; values are min-max normalized.
    The value range is recorded in a ``<path>.minmax.txt`` sidecar so the
    raster can be mapped back to physical units (to 8-bit quantization).
    A constant map renders mid-gray and the sidecar carries min == max.
    """
    samples = np.asarray(smap.samples)
    if samples.size == 0:
        raise ConfigError("cannot rasterize an empty map")
    if np.iscomplexobj(samples):
        scale = np.max(np.abs(samples.real)) if samples.real.any() else 1.0
        if np.max(np.abs(samples.imag)) > 1e-8 * max(scale, 1e-300):
            raise ConfigError("raster output requires a real-valued map")
        samples = samples.real
    vmin = float(np.min(samples))
    vmax = float(np.max(samples))
    if vmax > vmin:
        gray = np.round((samples - vmin) / (vmax - vmin) * 255.0).astype(np.uint8)
    else:
        gray = np.full(samples.shape, 128, dtype=np.uint8)
    path = Path(path)
    header = f"P5\n{samples.shape[1]} {samples.shape[0]}\n255\n".encode("ascii")
    path.write_bytes(header + gray.tobytes())
    Path(str(path) + ".minmax.txt").write_text(
        f"min={_fmt(vmin)}\nmax={_fmt(vmax)}\n", encoding="utf-8"
    )


def read_pgm(path):
    """Read back a raster written by :func:`write_pgm`.

    Returns (values, vmin, vmax) with values mapped to physical units via
    the sidecar.
    """
    raw = Path(path).read_bytes()
    parts = raw.split(b"\n", 3)
    if parts[0] != b"P5" or parts[2] != b"255":
        raise ConfigError(f"{path}: not an 8-bit binary PGM")
    w, h = (int(t) for t in parts[1].split())
    gray = np.frombuffer(parts[3][: w * h], dtype=np.uint8).reshape(h, w)
    side = Path(str(path) + ".minmax.txt").read_text(encoding="utf-8")
    kv = dict(line.split("=", 1) for line in side.splitlines() if line)
    vmin, vmax = float(kv["min"]), float(kv["max"])
    if vmax > vmin:
        vals = vmin + gray.astype(float) / 255.0 * (vmax - vmin)
    else:
        vals = np.full(gray.shape, vmin)
    return vals, vmin, vmax
