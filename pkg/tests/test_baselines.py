"""Hard thresholding and Gauss-Weierstrass smoothing baselines."""

import dataclasses
import math

import numpy as np
import pytest

from sphwiener.bank import build_bank, wavelet_spectrum
from sphwiener.baselines import (
    ThresholdPolicy,
    default_kappa_grid,
    gw_kernel,
    gwks_denoise,
    hard_threshold_denoise,
    scale_noise_variance,
)
from sphwiener.errors import ModeError
from sphwiener.harmonic import HarmonicCoeffs, forward_sht, make_gauss_legendre_grid, inverse_sht, SphereMap
from sphwiener.stochastic import NoiseModel, sample_noise, sigma_from_input_snr, snr_db, synthetic_source
from sphwiener.transform import WaveletDecomposition, analyze, synthesize

from oracles import sphere_weights
from test_harmonic import random_coeffs
from test_transform import unit_zeta


class TestScaleNoiseVariance:
    def test_zero_sigma(self):
        b = build_bank(16, 2.0, 0)
        assert all(scale_noise_variance(b, j, 0.0) == 0.0 for j in b.scales)

    def test_degenerate_scale(self):
        b = build_bank(16, 2.0, 0)
        kap = b.kappa.copy()
        kap[1] = 0.0
        degenerate = dataclasses.replace(b, kappa=kap)
        assert scale_noise_variance(degenerate, 1, 2.0) == 0.0

    def test_direct_sum_oracle(self):
        b = build_bank(64, 2.0, 0)
        for j in b.scales:
            want = sum(abs(wavelet_spectrum(b, j).get(l, 0)) ** 2 for l in range(64))
            assert scale_noise_variance(b, j, 1.0) == pytest.approx(want, rel=1e-12)

    def test_directional_bank_rejected(self):
        b = build_bank(8, 2.0, 0).with_zeta(unit_zeta(8, seed=0))
        with pytest.raises(ModeError):
            scale_noise_variance(b, 1, 1.0)

    def test_spatially_constant_noise_variance(self):
        # E|W_z,j(x)|^2 from Monte Carlo matches the formula at a few points
        L = 16
        b = build_bank(L, 2.0, 0)
        g = make_gauss_legendre_grid(L)
        sigma_sq = 0.8
        j = 2
        acc = np.zeros((g.n_theta, g.n_phi))
        n = 400
        for seed in range(n):
            z = sample_noise(NoiseModel(kind="white-diagonal", sigma_sq=sigma_sq, seed=seed), L)
            wmap = inverse_sht(analyze(z, b).wavelet(j), g)
            acc += np.abs(wmap.samples) ** 2
        acc /= n
        want = scale_noise_variance(b, j, sigma_sq)
        assert np.median(acc) == pytest.approx(want, rel=0.2)


class TestHardThreshold:
    def test_policy_validation(self):
        with pytest.raises(ValueError):
            ThresholdPolicy(multiplier=0.0)
        with pytest.raises(ValueError):
            ThresholdPolicy(sigma_sq=-1.0)

    def test_zero_sigma_is_identity(self):
        L = 32
        b = build_bank(L, 2.0, 0)
        g = make_gauss_legendre_grid(L)
        s = synthetic_source(L, "red", 2.0, seed=1)
        est = hard_threshold_denoise(s, b, ThresholdPolicy(3.0, 0.0), g)
        assert np.max(np.abs(est.values - s.values)) < 1e-8

    def test_huge_multiplier_keeps_scaling_band_only(self):
        L = 32
        b = build_bank(L, 2.0, 0)
        g = make_gauss_legendre_grid(L)
        s = synthetic_source(L, "red", 2.0, seed=2)
        est = hard_threshold_denoise(s, b, ThresholdPolicy(1e9, 1.0), g)
        dec = analyze(s, b)
        want = synthesize(
            WaveletDecomposition(
                bank=b,
                scaling=dec.scaling,
                wavelets={j: HarmonicCoeffs.zeros(L, real_field=True) for j in b.scales},
                mode="axisym",
            )
        )
        assert np.max(np.abs(est.values - want.values)) < 1e-12

    def test_gains_at_low_snr(self):
        # output SNR beats input SNR on the red-spectrum fixture, 10 seeds
        L = 64
        b = build_bank(L, 2.0, 0)
        g = make_gauss_legendre_grid(L)
        s = synthetic_source(L, "red", 2.0, seed=3)
        sigma_sq = sigma_from_input_snr(s, 0.0)
        gains = []
        for seed in range(10):
            z = sample_noise(
                NoiseModel(kind="white-diagonal", sigma_sq=sigma_sq, seed=300 + seed), L
            )
            f = s + z
            est = hard_threshold_denoise(f, b, ThresholdPolicy(3.0, sigma_sq), g)
            gains.append(snr_db(est, s) - snr_db(f, s))
        assert np.mean(gains) > 0.0

    def test_sample_domain_thresholding_idempotent(self):
        # the spatial operation itself: zeroing below tau twice equals once
        L = 16
        b = build_bank(L, 2.0, 0)
        g = make_gauss_legendre_grid(L)
        f = synthetic_source(L, "red", 2.0, seed=4)
        dec = analyze(f, b)
        tau = 0.3 * math.sqrt(scale_noise_variance(b, 2, 1.0))
        samples = inverse_sht(dec.wavelet(2), g).samples.copy()
        once = np.where(np.abs(samples.real) < tau, 0.0, samples)
        twice = np.where(np.abs(once.real) < tau, 0.0, once)
        assert np.array_equal(once, twice)

    def test_positive_homogeneity_with_threshold_coscaling(self):
        # scaling f by a > 0 and sigma^2 by a^2 scales the estimate by a
        L = 32
        b = build_bank(L, 2.0, 0)
        g = make_gauss_legendre_grid(L)
        s = synthetic_source(L, "red", 2.0, seed=5)
        sigma_sq = sigma_from_input_snr(s, 3.0)
        z = sample_noise(NoiseModel(kind="white-diagonal", sigma_sq=sigma_sq, seed=6), L)
        f = s + z
        a = 3.7
        est = hard_threshold_denoise(f, b, ThresholdPolicy(3.0, sigma_sq), g)
        est_scaled = hard_threshold_denoise(
            HarmonicCoeffs(L, a * f.values, f.real_field),
            b,
            ThresholdPolicy(3.0, a * a * sigma_sq),
            g,
        )
        assert np.max(np.abs(est_scaled.values - a * est.values)) < 1e-10 * a

    def test_complex_field_uses_magnitude(self):
        L = 16
        b = build_bank(L, 2.0, 0)
        g = make_gauss_legendre_grid(L)
        f = random_coeffs(L, seed=7)  # complex field
        est = hard_threshold_denoise(f, b, ThresholdPolicy(1e9, 1.0), g)
        dec = analyze(f, b)
        want = synthesize(
            WaveletDecomposition(
                bank=b,
                scaling=dec.scaling,
                wavelets={j: HarmonicCoeffs.zeros(L) for j in b.scales},
                mode="axisym",
            )
        )
        assert np.max(np.abs(est.values - want.values)) < 1e-12

    def test_directional_bank_rejected(self):
        b = build_bank(8, 2.0, 0).with_zeta(unit_zeta(8, seed=8))
        with pytest.raises(ModeError):
            hard_threshold_denoise(
                random_coeffs(8, seed=9), b, ThresholdPolicy(3.0, 1.0), make_gauss_legendre_grid(8)
            )


class TestGwks:
    def test_kappa_zero_bit_exact(self):
        f = random_coeffs(32, seed=10)
        out = gwks_denoise(f, 0.0)
        assert np.array_equal(out.values, f.values)

    def test_kappa_one_erases_high_degrees(self):
        f = HarmonicCoeffs(16, np.ones(256, dtype=complex))
        out = gwks_denoise(f, 1.0)
        from sphwiener.harmonic import flat_index

        assert abs(out.values[flat_index(10, 0)]) == pytest.approx(math.exp(-110), rel=1e-12)

    def test_monotone_attenuation(self):
        f = HarmonicCoeffs(16, np.ones(256, dtype=complex))
        for kappa in (1e-4, 0.01, 0.5):
            out = gwks_denoise(f, kappa)
            from sphwiener.harmonic import flat_index

            levels = [abs(out.values[flat_index(l, 0)]) for l in range(16)]
            assert all(levels[i + 1] < levels[i] for i in range(15))

    def test_linearity(self):
        f = random_coeffs(8, seed=11)
        g = random_coeffs(8, seed=12)
        combo = gwks_denoise(HarmonicCoeffs(8, 2.0 * f.values - 3.0j * g.values), 0.2)
        parts = 2.0 * gwks_denoise(f, 0.2).values - 3.0j * gwks_denoise(g, 0.2).values
        assert np.max(np.abs(combo.values - parts)) < 1e-14

    def test_kappa_out_of_range(self):
        f = random_coeffs(4, seed=13)
        for bad in (-0.1, 1.5):
            with pytest.raises(ValueError):
                gwks_denoise(f, bad)

    def test_matches_weighted_error_minimizer(self):
        # brute-force pointwise minimizer of the kernel-weighted criterion
        L = 8
        kappa = 0.07
        f = random_coeffs(L, seed=14)
        g = make_gauss_legendre_grid(L)
        fmap = inverse_sht(f, g).samples
        w2 = sphere_weights(g)
        est_samples = np.zeros((g.n_theta, g.n_phi), dtype=complex)
        for i in range(g.n_theta):
            for k in range(g.n_phi):
                kvals = np.array(
                    [
                        [
                            gw_kernel((g.theta[i], g.phi[k]), (g.theta[p], g.phi[q]), kappa, L)
                            for q in range(g.n_phi)
                        ]
                        for p in range(g.n_theta)
                    ]
                )
                weight = np.conj(kvals) * w2
                est_samples[i, k] = np.sum(weight * fmap) / np.sum(weight)
        brute = forward_sht(SphereMap(grid=g, samples=est_samples), L)
        direct = gwks_denoise(f, kappa)
        assert np.max(np.abs(brute.values - direct.values)) < 1e-10


class TestGwKernel:
    def test_large_kappa_approaches_monopole(self):
        # at kappa = 1 the l >= 1 tail is bounded by sum (2l+1) e^{-l(l+1)} / 4pi
        val = gw_kernel((0.3, 0.4), (1.0, 2.0), 1.0, 8)
        tail = sum((2 * l + 1) * math.exp(-l * (l + 1)) for l in range(1, 8)) / (4 * math.pi)
        assert abs(val - 1 / (4 * math.pi)) <= tail + 1e-12

    def test_zero_separation_addition(self):
        val = gw_kernel((0.7, 0.2), (0.7, 0.2), 0.0, 2)
        assert val == pytest.approx(4 / (4 * math.pi), rel=1e-12)

    def test_hermitian_symmetry(self):
        rng = np.random.default_rng(15)
        for _ in range(6):
            x = (rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi))
            y = (rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi))
            assert abs(gw_kernel(x, y, 0.3, 10) - np.conj(gw_kernel(y, x, 0.3, 10))) < 1e-12

    def test_kappa_out_of_range(self):
        with pytest.raises(ValueError):
            gw_kernel((0, 0), (1, 1), 2.0, 4)


def test_default_kappa_grid():
    grid = default_kappa_grid()
    assert grid[0] == 0.0
    assert len(grid) == 18
    assert grid[1] == pytest.approx(1e-5)
    assert grid[-1] == pytest.approx(1.0)
    assert np.all(np.diff(grid) > 0)
