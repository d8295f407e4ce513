import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oamfso.grid import (ComplexField, GridMismatchError, LgBeamSpec, SimulationGrid, lg_field, lg_mode,
                         normalize, overlap, power)

# w(1 km) for w0 = 1.6 cm at 1550 nm, 40-digit mpmath evaluation
W_1KM = 0.0347401145843090709
Z_R = 518.869496334830367


class TestSimulationGrid:
    def test_paper_defaults(self):
        g = SimulationGrid()
        assert (g.n_samples, g.dx, g.wavelength) == (512, 5e-3, 1550e-9)
        assert g.side == pytest.approx(2.56)

    @pytest.mark.parametrize("n", [0, 3, 100, 513, -8])
    def test_rejects_non_power_of_two(self, n):
        with pytest.raises(ValueError):
            SimulationGrid(n)

    @pytest.mark.parametrize("kw", [{"dx": 0}, {"dx": -1e-3}, {"wavelength": 0}])
    def test_rejects_nonpositive_lengths(self, kw):
        with pytest.raises(ValueError):
            SimulationGrid(64, **kw)

    def test_origin_at_center_sample(self):
        g = SimulationGrid(8, 1.0)
        x, y = g.coords()
        assert x[4, 4] == 0 and y[4, 4] == 0
        assert x[0, 5] == 1.0 and y[5, 0] == 1.0

    def test_frequency_spacing_same_on_both_axes(self):
        g = SimulationGrid(16, 0.1)
        k2 = g.kappa_sq()
        assert np.allclose(k2, k2.T)
        assert k2[0, 1] == pytest.approx(g.dkappa**2)


class TestLgField:
    def test_center_amplitude_of_gaussian(self, paper_grid):
        u = lg_field(LgBeamSpec(0, 0, 0.016, 0.0), paper_grid, normalized=False)
        c = u.samples[256, 256]
        assert c.real == pytest.approx(np.sqrt(2 / np.pi) / 0.016, rel=1e-12)
        assert c.imag == 0

    def test_unit_charge_phase_decreases_with_azimuth(self):
        spec = LgBeamSpec(0, 1, 0.016, 0.0)
        phi = np.linspace(-3, 3, 61)
        ph = np.unwrap(np.angle(lg_mode(spec, 1550e-9, 0.016, phi)))
        assert np.allclose(ph - ph[0], -(phi - phi[0]), atol=1e-12)

    def test_beam_radius_at_one_km(self):
        spec = LgBeamSpec(0, 1, 0.016, 1000.0)
        assert spec.rayleigh_range(1550e-9) == pytest.approx(Z_R, rel=1e-12)
        assert spec.radius(1550e-9) == pytest.approx(W_1KM, rel=1e-12)

    def test_normalized_power(self, paper_grid):
        u = lg_field(LgBeamSpec(0, 3, 0.016, 1000.0), paper_grid)
        assert power(u) == pytest.approx(1, abs=1e-9)

    def test_rejects_bad_waist(self):
        with pytest.raises(ValueError):
            LgBeamSpec(0, 1, 0.0)

    def test_rejects_grid_too_small(self):
        g = SimulationGrid(16, 1e-3)
        with pytest.raises(ValueError, match="quarter"):
            lg_field(LgBeamSpec(0, 1, 0.016), g)

    def test_oam_subset(self):
        assert LgBeamSpec(0, 2).is_oam
        assert not LgBeamSpec(0, 0).is_oam
        assert not LgBeamSpec(1, 2).is_oam

    @pytest.mark.parametrize("m", range(-5, 6))
    def test_winding_number(self, m, fine_grid):
        spec = LgBeamSpec(0, m, 0.016 / 4, 0.0)  # fits the fine grid
        phi = np.linspace(-np.pi, np.pi, 721)
        vals = lg_mode(spec, fine_grid.wavelength, spec.w0, phi)
        winding = np.sum(np.angle(vals[1:] / vals[:-1])) / (2 * np.pi)
        assert round(winding) == -m
        assert winding == pytest.approx(-m, abs=1e-9)

    @pytest.mark.parametrize("m", [-3, 2])
    def test_winding_number_on_grid_samples(self, m, fine_grid):
        spec = LgBeamSpec(0, m, 0.016 / 4, 0.0)
        u = lg_field(spec, fine_grid)
        r, phi = fine_grid.polar()
        ring = np.abs(r - spec.w0) < fine_grid.dx / 2
        order = np.argsort(phi[ring])
        vals = u.samples[ring][order]
        vals = np.append(vals, vals[0])
        winding = np.sum(np.angle(vals[1:] / vals[:-1])) / (2 * np.pi)
        assert round(winding) == -m

    @pytest.mark.parametrize("p", [0, 1, 2])
    @pytest.mark.parametrize("m", [0, 1, 3])
    def test_radial_node_count(self, p, m):
        spec = LgBeamSpec(p, m, 0.01, 0.0)
        r = np.linspace(1e-6, 0.05, 4001)
        radial = (lg_mode(spec, 1550e-9, r, 0.0)).real
        sign_changes = np.count_nonzero(np.diff(np.sign(radial[np.abs(radial) > 1e-12])))
        assert sign_changes == p


class TestOverlap:
    def test_orthonormal_gram_matrix(self, paper_grid):
        modes = [-3, -1, 1, 3]
        for z in (0.0, 1000.0):
            fields = [lg_field(LgBeamSpec(0, m, 0.016, z), paper_grid) for m in modes]
            gram = np.array([[overlap(a, b) for b in fields] for a in fields])
            assert np.max(np.abs(gram - np.eye(4))) < 1e-3

    def test_self_overlap_is_one(self, paper_grid):
        u = lg_field(LgBeamSpec(0, 1), paper_grid)
        assert abs(overlap(u, u) - 1) < 1e-9

    def test_grid_mismatch(self, paper_grid, small_grid):
        a = lg_field(LgBeamSpec(0, 1), paper_grid)
        b = lg_field(LgBeamSpec(0, 1), small_grid)
        with pytest.raises(GridMismatchError):
            overlap(a, b)

    def test_zero_field(self, small_grid):
        z = ComplexField.zeros(small_grid)
        assert power(z) == 0
        with pytest.raises(ValueError):
            normalize(z)

    def test_rejects_nonfinite(self, small_grid):
        s = np.zeros((256, 256), complex)
        s[0, 0] = np.nan
        with pytest.raises(ValueError):
            ComplexField(small_grid, s)


@st.composite
def complex_scalars(draw):
    re = draw(st.floats(-1e3, 1e3, allow_nan=False))
    im = draw(st.floats(-1e3, 1e3, allow_nan=False))
    return complex(re, im)


@settings(max_examples=40, deadline=None)
@given(c=complex_scalars(), seed=st.integers(0, 2**32 - 1))
def test_overlap_and_power_algebra(c, seed):
    g = SimulationGrid(16, 0.01)
    rng = np.random.default_rng(seed)
    a = ComplexField(g, rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16)))
    b = ComplexField(g, rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16)))
    assert overlap(a, b) == pytest.approx(np.conj(overlap(b, a)), rel=1e-12, abs=1e-15)
    assert overlap(c * a, b) == pytest.approx(c * overlap(a, b), rel=1e-9, abs=1e-12)
    assert power(c * a) == pytest.approx(abs(c) ** 2 * power(a), rel=1e-9, abs=1e-12)
    assert power(a) == pytest.approx(overlap(a, a).real, rel=1e-12)
    assert power(normalize(a)) == pytest.approx(1, rel=1e-12)
