"""Configuration-driven experiment runner.

Two experiments are supported: a single-noise-level denoising run that
writes the four maps (source, noise, observation, estimate) with rasters
and a summary row, and a sweep that tabulates mean/std output SNR against
input SNR for each requested method.

Determinism contract: every output byte is a function of the
configuration alone. Noise for realization r at input-SNR index i is
drawn from stream (master_seed, i, r), so adding or removing methods,
changing the kappa grid, or changing the worker count never alters the
noise draws; aggregation is sorted by (snr, method, parameter).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bank import build_bank, check_admissibility
from .baselines import (
    ThresholdPolicy,
    default_kappa_grid,
    gwks_denoise,
    hard_threshold_denoise,
)
from .errors import ConfigError, SphWienerError
from .harmonic import HarmonicCoeffs, SphereMap, inverse_sht, make_gauss_legendre_grid
from .io import read_coeffs_csv, write_coeffs_csv, write_map_csv, write_pgm
from .optfilter import DegreeCovariance, denoise
from .rng import derive_key
from .stochastic import (
    NoiseModel,
    empirical_source_covariance,
    sample_noise,
    sigma_from_input_snr,
    snr_db,
    synthetic_source,
)

_METHODS = ("optimal", "threshold", "gwks")
_FILTER_MODES = {"closed-form": "axisym-closed-form", "matrix": "matrix"}


@dataclass
class ExperimentConfig:
    """Parsed experiment parameters; see :func:`load_config` for the file
    format."""

    bandlimit: int = 64
    dilation: float = 2.0
    min_scale: int = 0
    source: str = "synthetic:red:2.0"
    source_seed: int = 0
    snr_in_db: list = field(default_factory=lambda: [0.0])
    n_realizations: int = 10
    methods: list = field(default_factory=lambda: list(_METHODS))
    kappa_grid: list | None = None
    out_dir: str = "out"
    master_seed: int = 0
    filter_mode: str = "closed-form"
    threshold_multiplier: float = 3.0

    def __post_init__(self):
        if self.bandlimit < 2:
            raise ConfigError(f"bandlimit must be >= 2, got {self.bandlimit}")
        if self.dilation <= 1.0:
            raise ConfigError(f"dilation must exceed 1, got {self.dilation}")
        if self.n_realizations < 1:
            raise ConfigError(f"n_realizations must be >= 1, got {self.n_realizations}")
        if not self.snr_in_db:
            raise ConfigError("snr_in_db must list at least one value")
        bad = [m for m in self.methods if m not in _METHODS]
        if bad:
            raise ConfigError(f"unknown methods {bad}; choose from {list(_METHODS)}")
        if self.filter_mode not in _FILTER_MODES:
            raise ConfigError(
                f"filter_mode must be one of {sorted(_FILTER_MODES)}, got {self.filter_mode!r}"
            )
        if self.threshold_multiplier <= 0:
            raise ConfigError("threshold_multiplier must be > 0")

    def kappas(self) -> np.ndarray:
        if self.kappa_grid is None:
            return default_kappa_grid()
        return np.asarray(self.kappa_grid, dtype=float)


def load_config(path) -> ExperimentConfig:
    """Parse a flat ``key = value`` config file ('#' starts a comment)."""
    raw = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected 'key = value', got {line!r}")
        key, val = (t.strip() for t in line.split("=", 1))
        raw[key] = val
    return config_from_dict(raw, base=Path(path).parent)


def _floats(val: str) -> list:
    return [float(t) for t in val.split(",") if t.strip()]


def config_from_dict(raw: dict, base=None) -> ExperimentConfig:
    kwargs = {}
    try:
        if "bandlimit" in raw:
            kwargs["bandlimit"] = int(raw["bandlimit"])
        if "dilation" in raw:
            kwargs["dilation"] = float(raw["dilation"])
        if "min_scale" in raw:
            kwargs["min_scale"] = int(raw["min_scale"])
        if "source" in raw:
            src = raw["source"]
            if not src.startswith("synthetic:") and base is not None:
                p = Path(src)
                if not p.is_absolute():
                    src = str(Path(base) / p)
            kwargs["source"] = src
        if "source_seed" in raw:
            kwargs["source_seed"] = int(raw["source_seed"])
        if "snr_in_db" in raw:
            kwargs["snr_in_db"] = _floats(raw["snr_in_db"])
        if "n_realizations" in raw:
            kwargs["n_realizations"] = int(raw["n_realizations"])
        if "methods" in raw:
            kwargs["methods"] = [t.strip() for t in raw["methods"].split(",") if t.strip()]
        if "kappa_grid" in raw and raw["kappa_grid"].strip() != "auto":
            kwargs["kappa_grid"] = _floats(raw["kappa_grid"])
        if "out_dir" in raw:
            kwargs["out_dir"] = raw["out_dir"]
        if "master_seed" in raw:
            kwargs["master_seed"] = int(raw["master_seed"])
        if "filter_mode" in raw:
            kwargs["filter_mode"] = raw["filter_mode"].strip()
        if "threshold_multiplier" in raw:
            kwargs["threshold_multiplier"] = float(raw["threshold_multiplier"])
    except ValueError as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    known = {
        "bandlimit", "dilation", "min_scale", "source", "source_seed", "snr_in_db",
        "n_realizations", "methods", "kappa_grid", "out_dir", "master_seed",
        "filter_mode", "threshold_multiplier",
    }
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(**kwargs)


def resolve_source(config: ExperimentConfig) -> HarmonicCoeffs:
    """Load the source signal: a coefficient file path, or
    ``synthetic:<law>[:exponent]`` generated from source_seed."""
    src = config.source
    if src.startswith("synthetic:"):
        parts = src.split(":")
        law = parts[1] if len(parts) > 1 and parts[1] else "red"
        exponent = float(parts[2]) if len(parts) > 2 else 2.0
        return synthetic_source(config.bandlimit, law, exponent, seed=config.source_seed)
    path = Path(src)
    if not path.exists():
        raise ConfigError(f"source coefficient file not found: {path}")
    s = read_coeffs_csv(path)
    if s.L < config.bandlimit:
        raise ConfigError(
            f"source file carries L={s.L}, below the configured bandlimit {config.bandlimit}"
        )
    if s.L > config.bandlimit:
        s = HarmonicCoeffs(
            config.bandlimit,
            s.values[: config.bandlimit * config.bandlimit],
            s.real_field,
        )
    return s


def worker_count() -> int:
    """Worker cap from SPHWIENER_THREADS (0 or unset means auto)."""
    raw = os.environ.get("SPHWIENER_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"SPHWIENER_THREADS must be an integer, got {raw!r}") from exc
    if n < 0:
        raise ConfigError(f"SPHWIENER_THREADS must be >= 0, got {n}")
    return n if n > 0 else (os.cpu_count() or 1)


def _noise_seed(master_seed: int, snr_index: int, realization: int) -> int:
    return derive_key(master_seed, snr_index, realization)


def _denoise_all(config, s, bank, grid, snr_index, target_snr, realization):
    """Estimates and output SNRs of every configured method for one draw."""
    sigma_sq = sigma_from_input_snr(s, target_snr)
    z = sample_noise(
        NoiseModel(
            kind="white-diagonal",
            sigma_sq=sigma_sq,
            seed=_noise_seed(config.master_seed, snr_index, realization),
            real_field=s.real_field,
        ),
        config.bandlimit,
    )
    f = s + z
    results = {}
    if "optimal" in config.methods:
        Cs = empirical_source_covariance(s)
        Cz = DegreeCovariance.white(config.bandlimit, sigma_sq)
        est = denoise(f, Cs, Cz, bank, mode=_FILTER_MODES[config.filter_mode])
        results[("optimal", config.filter_mode)] = est
    if "threshold" in config.methods:
        policy = ThresholdPolicy(config.threshold_multiplier, sigma_sq)
        results[("threshold", f"{config.threshold_multiplier:g}")] = hard_threshold_denoise(
            f, bank, policy, grid
        )
    if "gwks" in config.methods:
        for kappa in config.kappas():
            results[("gwks", f"{kappa:.6g}")] = gwks_denoise(f, float(kappa))
    return f, {key: snr_db(est, s) for key, est in results.items()}


def render_map(smap: SphereMap, path) -> None:
    """Grayscale raster of a real-valued map (binary PGM + minmax sidecar)."""
    write_pgm(smap, path)


def run_fig1(config: ExperimentConfig) -> dict:
    """Single-noise-level denoising run with map artifacts.

    Writes source/noise/observation/estimate as map CSVs and rasters plus
    ``summary.csv`` with the realized input SNR, output SNR, and gain of
    the optimal filter. Returns the summary values and artifact paths.
    """
    if len(config.snr_in_db) != 1:
        raise ConfigError("this run needs exactly one snr_in_db value")
    target = config.snr_in_db[0]
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    s = resolve_source(config)
    bank = build_bank(config.bandlimit, config.dilation, config.min_scale)
    grid = make_gauss_legendre_grid(config.bandlimit)

    sigma_sq = sigma_from_input_snr(s, target)
    z = sample_noise(
        NoiseModel(
            kind="white-diagonal",
            sigma_sq=sigma_sq,
            seed=_noise_seed(config.master_seed, 0, 0),
            real_field=s.real_field,
        ),
        config.bandlimit,
    )
    f = s + z
    Cs = empirical_source_covariance(s)
    Cz = DegreeCovariance.white(config.bandlimit, sigma_sq)
    est = denoise(f, Cs, Cz, bank, mode=_FILTER_MODES[config.filter_mode])

    snr_in = snr_db(f, s)
    snr_out = snr_db(est, s)
    paths = {}
    for name, coeffs in (("source", s), ("noise", z), ("observation", f), ("estimate", est)):
        smap = inverse_sht(coeffs, grid)
        if coeffs.real_field:
            smap = SphereMap(grid=grid, samples=smap.samples.real)
        csv_path = out / f"{name}.csv"
        pgm_path = out / f"{name}.pgm"
        write_map_csv(smap, csv_path)
        render_map(smap, pgm_path)
        paths[name] = (csv_path, pgm_path)
    summary = out / "summary.csv"
    summary.write_text(
        "snr_in_realized_db,snr_out_db,gain_db\n"
        f"{snr_in:.17g},{snr_out:.17g},{snr_out - snr_in:.17g}\n",
        encoding="utf-8",
    )
    return {
        "snr_in_realized_db": snr_in,
        "snr_out_db": snr_out,
        "gain_db": snr_out - snr_in,
        "paths": paths,
        "summary": summary,
    }


def run_fig2(config: ExperimentConfig) -> list:
    """Output-SNR-vs-input-SNR sweep over methods and realizations.

    Returns the table rows (snr_in_db, method, param, mean, std) and
    writes them to ``<out_dir>/sweep.csv`` sorted by (snr, method, param);
    identical configs produce byte-identical files regardless of the
    worker count.
    """
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    s = resolve_source(config)
    bank = build_bank(config.bandlimit, config.dilation, config.min_scale)
    grid = make_gauss_legendre_grid(config.bandlimit)
    grid.legendre_table(config.bandlimit)  # prime the shared cache before threading

    tasks = [
        (i, target, r)
        for i, target in enumerate(config.snr_in_db)
        for r in range(config.n_realizations)
    ]

    def work(task):
        i, target, r = task
        _, snrs = _denoise_all(config, s, bank, grid, i, target, r)
        return (i, r), snrs

    n_workers = worker_count()
    results = {}
    if n_workers == 1:
        for t in tasks:
            key, snrs = work(t)
            results[key] = snrs
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            for key, snrs in pool.map(work, tasks):
                results[key] = snrs

    rows = []
    for i, target in enumerate(config.snr_in_db):
        per_method = {}
        for r in range(config.n_realizations):  # fixed order: sums are schedule-free
            for key, val in results[(i, r)].items():
                per_method.setdefault(key, []).append(val)
        for (method, param), vals in sorted(per_method.items()):
            mean = math.fsum(vals) / len(vals)
            var = math.fsum((v - mean) ** 2 for v in vals) / len(vals)
            rows.append((target, method, param, mean, math.sqrt(var)))
    rows.sort(key=lambda row: (row[0], row[1], row[2]))

    lines = ["snr_in_db,method,param,mean_snr_out_db,std_db"]
    for target, method, param, mean, std in rows:
        lines.append(f"{target:.17g},{method},{param},{mean:.17g},{std:.17g}")
    (out / "sweep.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return rows


def run_validation(verbose: bool = True) -> bool:
    """Fast invariant battery used by the CLI ``validate`` verb."""
    import numpy.random as npr

    from .transform import analyze, synthesize
    from .wigner import check_y_bridge

    checks = []
    rng = npr.default_rng(0)

    grid = make_gauss_legendre_grid(64)
    checks.append(("quadrature exact to degree 126", grid.quadrature_deviation(64) < 1e-12))

    L = 32
    c = HarmonicCoeffs(L, rng.standard_normal(L * L) + 1j * rng.standard_normal(L * L))
    g32 = make_gauss_legendre_grid(L)
    from .harmonic import forward_sht

    rt = forward_sht(inverse_sht(c, g32), L)
    checks.append(("harmonic roundtrip L=32", float(np.max(np.abs(rt.values - c.values))) < 1e-10))

    dev = max(
        check_y_bridge(l, m, rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi))
        for l in range(16)
        for m in (-l, 0, l)
    )
    checks.append(("rotation/harmonic convention bridge", dev < 1e-12))

    bank = build_bank(64, 2.0, 0)
    checks.append(("tiling admissibility (L=64)", check_admissibility(bank) < 1e-9))
    checks.append(("top scale at L=64 is 6", bank.j2 == 6))

    L = 64
    f = HarmonicCoeffs(L, rng.standard_normal(L * L) + 1j * rng.standard_normal(L * L))
    f2 = synthesize(analyze(f, bank))
    checks.append(("wavelet roundtrip L=64", float(np.max(np.abs(f2.values - f.values))) < 1e-8))

    cdiag = rng.uniform(0.1, 1.0, L * L)
    zdiag = rng.uniform(0.1, 1.0, L * L)
    Cs = DegreeCovariance.from_diagonal(L, cdiag)
    Cz = DegreeCovariance.from_diagonal(L, zdiag)
    d1 = denoise(f, Cs, Cz, bank, mode="matrix")
    d2 = denoise(f, Cs, Cz, bank, mode="axisym-closed-form")
    checks.append(
        ("matrix filter matches closed form", float(np.max(np.abs(d1.values - d2.values))) < 1e-10)
    )

    model = NoiseModel(kind="white-diagonal", sigma_sq=1.0, seed=7)
    za = sample_noise(model, 16)
    zb = sample_noise(model, 16)
    checks.append(("noise draws deterministic", np.array_equal(za.values, zb.values)))
    checks.append(("noise conjugate symmetry", za.real_symmetry_deviation() < 1e-12))

    checks.append(
        ("smoothing identity at kappa=0", np.array_equal(gwks_denoise(f, 0.0).values, f.values))
    )

    ok = True
    for name, passed in checks:
        ok = ok and passed
        if verbose:
            print(f"{'PASS' if passed else 'FAIL'}  {name}")
    return ok
