import numpy as np
import pytest

from affinefourier import groups, quadrature, spectra
from affinefourier.errors import ConfigurationError, PreconditionError, UnsupportedFeatureError


def line_grid(count=256, span=8.0):
    return np.linspace(-span, span, count)


def sampled(values, grid, label="x"):
    return spectra.SampledFunction((grid,), np.asarray(values, dtype=complex), (label,))


class TestEuclid:
    def test_zero(self):
        x = line_grid()
        out = spectra.euclid_ft(sampled(np.zeros_like(x), x))
        assert np.all(out.values == 0)

    def test_gaussian_closed_form(self):
        x = line_grid()
        out = spectra.euclid_ft(sampled(np.exp(-x ** 2 / 2.0), x))
        lam = out.grids[0]
        expect = np.sqrt(2.0 * np.pi) * np.exp(-lam ** 2 / 2.0)
        assert np.max(np.abs(out.values - expect)) < 1e-8

    def test_shift_theorem(self):
        x = line_grid()
        c = 0.75
        base = spectra.euclid_ft(sampled(np.exp(-x ** 2 / 1.28), x))
        shifted = spectra.euclid_ft(sampled(np.exp(-(x - c) ** 2 / 1.28), x))
        lam = base.grids[0]
        assert np.max(np.abs(shifted.values - np.exp(-1j * lam * c) * base.values)) < 1e-8

    def test_roundtrip(self):
        x = line_grid()
        f = sampled(np.exp(-x ** 2 / 2.0) * (1.0 + 0.3j * x), x)
        back = spectra.euclid_ift(spectra.euclid_ft(f), [x])
        rel = np.linalg.norm(back.values - f.values) / np.linalg.norm(f.values)
        assert rel < 1e-8

    def test_linearity(self):
        x = line_grid(128)
        f = np.exp(-x ** 2 / 2)
        g = x * np.exp(-x ** 2 / 1.8)
        lhs = spectra.euclid_ft(sampled(2.0 * f + 1j * g, x)).values
        rhs = (2.0 * spectra.euclid_ft(sampled(f, x)).values
               + 1j * spectra.euclid_ft(sampled(g, x)).values)
        assert np.max(np.abs(lhs - rhs)) < 1e-12

    def test_boundary_decay_enforced(self):
        x = line_grid(64, span=2.0)
        with pytest.raises(PreconditionError):
            spectra.euclid_ft(sampled(np.exp(-x ** 2 / 2.0), x))

    def test_parseval(self):
        x = line_grid()
        f = sampled(np.exp(-x ** 2 / 2.0), x)
        out = spectra.euclid_ft(f)
        left = np.sum(np.abs(f.values) ** 2 * spectra.trapezoid_weights(x))
        dlam = out.grids[0][1] - out.grids[0][0]
        right = np.sum(np.abs(out.values) ** 2) * dlam / (2.0 * np.pi)
        assert abs(left - right) / left < 1e-6


class TestMellin:
    def test_indicator_of_unit_log_interval(self):
        # indicator of t in [1, e]  <->  integral_0^1 e^(-i eta u) du
        u = np.linspace(-8.0, 8.0, 257)
        vals = ((u > 0) & (u < 1)).astype(complex)
        vals[np.isclose(u, 0.0)] = 0.5
        vals[np.isclose(u, 1.0)] = 0.5
        eta = np.array([0.0, 1.0, 2.0])
        out = spectra.mellin_ft(sampled(vals, u, "t"), eta_grid=eta, axis="t",
                                check_decay=False)
        expect = np.where(eta == 0, 1.0,
                          (1.0 - np.exp(-1j * eta)) / np.where(eta == 0, 1.0, 1j * eta))
        assert abs(out.values[0] - 1.0) < 1e-12
        assert np.max(np.abs(out.values - expect)) < 1e-2

    def test_log_gaussian(self):
        u = line_grid()
        out = spectra.mellin_ft(sampled(np.exp(-u ** 2 / 2.0), u, "t"))
        eta = out.grids[0]
        assert np.max(np.abs(out.values - np.sqrt(2 * np.pi) * np.exp(-eta ** 2 / 2))) < 1e-8

    def test_parseval_with_multiplicative_measure(self):
        u = line_grid()
        f = sampled(np.exp(-u ** 2 / 2.0), u, "t")
        out = spectra.mellin_ft(f)
        left = np.sum(np.abs(f.values) ** 2 * spectra.trapezoid_weights(u))
        deta = out.grids[0][1] - out.grids[0][0]
        right = np.sum(np.abs(out.values) ** 2) * deta / (2.0 * np.pi)
        assert abs(left - right) / left < 1e-6


class TestIrreps:
    def test_trivial(self):
        rng = np.random.default_rng(0)
        k2 = groups.random_element(groups.ROTATION, 2, rng)
        k3 = groups.random_element(groups.ROTATION, 3, rng)
        np.testing.assert_allclose(spectra.irrep_matrix("SO2", 0, k2), [[1.0]])
        np.testing.assert_allclose(spectra.irrep_matrix("SO3", 0, k3), [[1.0]], atol=1e-14)

    def test_so2_quarter_turn(self):
        out = spectra.irrep_matrix("SO2", 1, np.pi / 2.0)
        assert out[0, 0] == pytest.approx(1j, abs=1e-15)

    def test_so3_l1_identity(self):
        np.testing.assert_allclose(spectra.irrep_matrix("SO3", 1, np.eye(3)),
                                   np.eye(3), atol=1e-14)

    @pytest.mark.parametrize("ell", [1, 2, 3, 4])
    def test_unitarity_and_homomorphism(self, ell):
        rng = np.random.default_rng(ell)
        for _ in range(20):
            k1 = groups.random_element(groups.ROTATION, 3, rng)
            k2 = groups.random_element(groups.ROTATION, 3, rng)
            d1 = spectra.irrep_matrix("SO3", ell, k1)
            d2 = spectra.irrep_matrix("SO3", ell, k2)
            d12 = spectra.irrep_matrix("SO3", ell, groups.compose(k1, k2))
            dim = 2 * ell + 1
            assert np.max(np.abs(d1.conj().T @ d1 - np.eye(dim))) < 1e-12
            assert np.max(np.abs(d1 @ d2 - d12)) < 1e-10

    def test_unsupported_group(self):
        with pytest.raises(UnsupportedFeatureError):
            spectra.irrep_matrix("SO4", 1, np.eye(4))


class TestPeterWeylSO2:
    def setup_method(self):
        self.rule = quadrature.build_rule("K_SO2", count=64)

    def test_constant(self):
        spec = spectra.peter_weyl(np.ones(64), self.rule, band_limit=8)
        assert spec.blocks[0][0, 0] == pytest.approx(1.0, abs=1e-12)
        for m in range(1, 9):
            assert abs(spec.blocks[m][0, 0]) < 1e-12
            assert abs(spec.blocks[-m][0, 0]) < 1e-12

    def test_cosine(self):
        spec = spectra.peter_weyl(np.cos(self.rule.nodes), self.rule, band_limit=8)
        assert spec.blocks[1][0, 0] == pytest.approx(0.5, abs=1e-12)
        assert spec.blocks[-1][0, 0] == pytest.approx(0.5, abs=1e-12)
        assert abs(spec.blocks[3][0, 0]) < 1e-12

    def test_pure_harmonic(self):
        spec = spectra.peter_weyl(np.exp(3j * self.rule.nodes), self.rule, band_limit=8)
        assert spec.blocks[3][0, 0] == pytest.approx(1.0, abs=1e-12)
        assert abs(spec.blocks[2][0, 0]) < 1e-12

    def test_inverse_single_block(self):
        blocks = {m: np.zeros((1, 1), dtype=complex) for m in range(-8, 9)}
        blocks[1] = np.array([[0.5]])
        spec = spectra.CompactSpectrum("SO2", 8, blocks)
        pts = np.array([0.0, 0.4, 1.7])
        np.testing.assert_allclose(spectra.peter_weyl_inverse(spec, pts),
                                   0.5 * np.exp(1j * pts), atol=1e-14)

    def test_roundtrip_and_plancherel(self):
        rng = np.random.default_rng(5)
        coeff = rng.standard_normal(17) + 1j * rng.standard_normal(17)
        theta = self.rule.nodes
        f = sum(c * np.exp(1j * m * theta) for c, m in zip(coeff, range(-8, 9)))
        spec = spectra.peter_weyl(f, self.rule, band_limit=8)
        back = spectra.peter_weyl_inverse(spec, theta)
        assert np.max(np.abs(back - f)) < 1e-10
        assert spectra.compact_plancherel_residual(f, self.rule, 8) < 1e-12

    def test_band_mismatch_rejected(self):
        rule = quadrature.build_rule("K_SO2", count=8)
        with pytest.raises(ConfigurationError):
            spectra.peter_weyl(np.ones(8), rule, band_limit=8)


class TestPeterWeylSO3:
    def setup_method(self):
        self.band = 3
        self.rule = quadrature.build_rule("K_SO3", band_limit=self.band)

    def _random_bandlimited(self, seed=7):
        rng = np.random.default_rng(seed)
        vals = np.zeros(len(self.rule.nodes), dtype=complex)
        for ell in range(self.band + 1):
            dim = 2 * ell + 1
            c = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
            stack = spectra.so3_irrep_stack(self.rule.nodes, ell)
            vals += np.einsum("ij,sji->s", c, stack)
        return vals

    def test_constant(self):
        spec = spectra.peter_weyl(np.ones(len(self.rule.nodes)), self.rule, self.band)
        assert spec.blocks[0][0, 0] == pytest.approx(1.0, abs=1e-12)
        for ell in range(1, self.band + 1):
            assert np.max(np.abs(spec.blocks[ell])) < 1e-12

    def test_roundtrip(self):
        f = self._random_bandlimited()
        spec = spectra.peter_weyl(f, self.rule, self.band)
        back = spectra.peter_weyl_inverse(spec, self.rule.nodes)
        assert np.max(np.abs(back - f)) < 1e-10 * np.max(np.abs(f))

    def test_plancherel(self):
        f = self._random_bandlimited(seed=11)
        assert spectra.compact_plancherel_residual(f, self.rule, self.band) < 1e-8
