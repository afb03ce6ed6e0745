"""CSV formats, filter export, PGM rasters."""

import numpy as np
import pytest

from sphwiener.errors import ConfigError
from sphwiener.harmonic import SphereMap, make_gauss_legendre_grid, inverse_sht
from sphwiener.io import (
    read_coeffs_csv,
    read_map_csv,
    read_pgm,
    read_zeta_csv,
    write_coeffs_csv,
    write_map_csv,
    write_pgm,
    export_filter_csv,
)

from test_harmonic import random_coeffs


class TestCoeffsCsv:
    def test_roundtrip_bit_exact(self, tmp_path):
        c = random_coeffs(16, seed=0)
        p = tmp_path / "c.csv"
        write_coeffs_csv(c, p)
        back = read_coeffs_csv(p)
        assert back.L == 16
        assert np.array_equal(back.values, c.values)

    def test_real_field_flag_detected(self, tmp_path):
        c = random_coeffs(8, seed=1, real_field=True)
        p = tmp_path / "c.csv"
        write_coeffs_csv(c, p)
        assert read_coeffs_csv(p).real_field

    def test_header_checked(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("a,b,c,d\n0,0,1,0\n")
        with pytest.raises(ConfigError):
            read_coeffs_csv(p)

    def test_incomplete_set_rejected(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("l,m,re,im\n0,0,1,0\n1,-1,0,0\n")
        with pytest.raises(ConfigError):
            read_coeffs_csv(p)

    def test_out_of_order_rejected(self, tmp_path):
        c = random_coeffs(2, seed=2)
        p = tmp_path / "c.csv"
        write_coeffs_csv(c, p)
        lines = p.read_text().splitlines()
        lines[1], lines[2] = lines[2], lines[1]
        p.write_text("\n".join(lines) + "\n")
        with pytest.raises(ConfigError):
            read_coeffs_csv(p)


class TestMapCsv:
    def test_roundtrip(self, tmp_path):
        L = 8
        g = make_gauss_legendre_grid(L)
        m = inverse_sht(random_coeffs(L, seed=3), g)
        p = tmp_path / "m.csv"
        write_map_csv(m, p)
        back = read_map_csv(p)
        assert back.grid.n_theta == L
        assert np.max(np.abs(back.samples - m.samples)) == 0.0
        assert np.max(np.abs(back.grid.weights - g.weights)) < 1e-15

    def test_non_gauss_grid_rejected(self, tmp_path):
        p = tmp_path / "m.csv"
        lines = ["theta,phi,re,im"]
        for th in (0.1, 0.2):  # not Gauss-Legendre nodes for L=2
            for ph in (0.0, 2.1, 4.2):
                lines.append(f"{th},{ph},1.0,0.0")
        p.write_text("\n".join(lines) + "\n")
        with pytest.raises(ConfigError):
            read_map_csv(p)


class TestZetaCsv:
    def test_read(self, tmp_path):
        p = tmp_path / "z.csv"
        p.write_text("l,m,re,im\n0,0,1,0\n1,1,0.6,0\n1,-1,0,0.8\n")
        zeta = read_zeta_csv(p, 4)
        assert zeta[0, 3] == 1.0
        assert zeta[1, 4] == pytest.approx(0.6)
        assert zeta[1, 2] == pytest.approx(0.8j)

    def test_out_of_range_rejected(self, tmp_path):
        p = tmp_path / "z.csv"
        p.write_text("l,m,re,im\n5,0,1,0\n")
        with pytest.raises(ConfigError):
            read_zeta_csv(p, 4)


class TestFilterExport:
    def test_format(self, tmp_path):
        from sphwiener.optfilter import DegreeCovariance, solve_filter

        rng = np.random.default_rng(4)
        Cs = DegreeCovariance.from_diagonal(2, rng.uniform(0.5, 1.0, 4))
        Cz = DegreeCovariance.from_diagonal(2, rng.uniform(0.5, 1.0, 4))
        filt = solve_filter(Cs, Cz, [0, 1])
        p = tmp_path / "filt.csv"
        export_filter_csv(filt, p)
        lines = p.read_text().splitlines()
        assert lines[0] == "j,l,m,k,re,im"
        # scales 0 and 1, degrees 0 (1 entry) and 1 (9 entries)
        assert len(lines) - 1 == 2 * (1 + 9)
        first = lines[1].split(",")
        assert first[:4] == ["0", "0", "0", "0"]


class TestPgm:
    def test_constant_map_is_midgray(self, tmp_path):
        g = make_gauss_legendre_grid(4)
        m = SphereMap(grid=g, samples=np.full((4, 7), 2.5))
        p = tmp_path / "m.pgm"
        write_pgm(m, p)
        vals, vmin, vmax = read_pgm(p)
        assert vmin == vmax == 2.5
        assert np.all(vals == 2.5)
        raw = p.read_bytes()
        assert raw.startswith(b"P5\n7 4\n255\n")
        assert set(raw.split(b"\n", 3)[3]) == {128}

    def test_two_level_checker(self, tmp_path):
        g = make_gauss_legendre_grid(4)
        checker = np.indices((4, 7)).sum(axis=0) % 2 * 2.0 - 1.0
        p = tmp_path / "m.pgm"
        write_pgm(SphereMap(grid=g, samples=checker), p)
        raw = p.read_bytes().split(b"\n", 3)[3]
        assert set(raw) == {0, 255}

    def test_quantization_roundtrip(self, tmp_path):
        L = 8
        g = make_gauss_legendre_grid(L)
        m = inverse_sht(random_coeffs(L, seed=5, real_field=True), g)
        m = SphereMap(grid=g, samples=m.samples.real)
        p = tmp_path / "m.pgm"
        write_pgm(m, p)
        vals, vmin, vmax = read_pgm(p)
        quantum = (vmax - vmin) / 255.0
        assert np.max(np.abs(vals - m.samples)) <= 0.5 * quantum + 1e-12

    def test_complex_map_rejected(self, tmp_path):
        g = make_gauss_legendre_grid(4)
        m = SphereMap(grid=g, samples=np.full((4, 7), 1.0 + 1.0j))
        with pytest.raises(ConfigError):
            write_pgm(m, tmp_path / "m.pgm")

    def test_empty_map_rejected(self, tmp_path):
        g = make_gauss_legendre_grid(1)
        m = SphereMap(grid=g, samples=np.zeros((1, 1)))
        m.samples = np.zeros((0, 0))  # force empty after construction
        with pytest.raises(ConfigError):
            write_pgm(m, tmp_path / "m.pgm")
