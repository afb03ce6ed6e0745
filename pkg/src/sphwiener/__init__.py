"""Minimum-MSE wavelet-domain denoising of bandlimited spherical signals."""

from .bank import WaveletBank, build_bank, check_admissibility, scaling_spectrum, wavelet_spectrum
from .baselines import ThresholdPolicy, gw_kernel, gwks_denoise, hard_threshold_denoise, scale_noise_variance
from .errors import SphWienerError
from .harmonic import (
    HarmonicCoeffs,
    SphereGrid,
    SphereMap,
    forward_sht,
    inverse_sht,
    make_gauss_legendre_grid,
    ylm,
)
from .optfilter import (
    DegreeCovariance,
    FilterSpectrum,
    apply_filter,
    apply_gains,
    denoise,
    expected_mse,
    solve_filter,
    wiener_axisym_gains,
)
from .stochastic import (
    NoiseModel,
    empirical_source_covariance,
    sample_noise,
    sigma_from_input_snr,
    snr_db,
    synthetic_source,
)
from .transform import WaveletDecomposition, WignerSpectrum, analyze, eval_so3_point, synthesize, wavelet_coeff_map
from .wigner import EulerAngles, check_y_bridge, rotate_coeffs, wigner_D, wigner_small_d

__version__ = "0.1.0"

__all__ = [
    "DegreeCovariance",
    "EulerAngles",
    "FilterSpectrum",
    "HarmonicCoeffs",
    "NoiseModel",
    "SphWienerError",
    "SphereGrid",
    "SphereMap",
    "ThresholdPolicy",
    "WaveletBank",
    "WaveletDecomposition",
    "WignerSpectrum",
    "analyze",
    "apply_filter",
    "apply_gains",
    "build_bank",
    "check_admissibility",
    "check_y_bridge",
    "denoise",
    "empirical_source_covariance",
    "eval_so3_point",
    "expected_mse",
    "forward_sht",
    "gw_kernel",
    "gwks_denoise",
    "hard_threshold_denoise",
    "inverse_sht",
    "make_gauss_legendre_grid",
    "rotate_coeffs",
    "sample_noise",
    "scale_noise_variance",
    "scaling_spectrum",
    "sigma_from_input_snr",
    "snr_db",
    "solve_filter",
    "synthesize",
    "synthetic_source",
    "wavelet_coeff_map",
    "wavelet_spectrum",
    "wiener_axisym_gains",
    "wigner_D",
    "wigner_small_d",
    "ylm",
]
