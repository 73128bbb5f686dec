import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cvtelefid.errors import InvalidInputError, NumericalFailureError, OutOfDomainError
from cvtelefid.state import (
    TwoModeCM,
    make_cm,
    pt_spectrum,
    random_entangled_cm,
    random_physical_cm,
    thermal_product,
    to_standard_form_III,
    two_mode_squeezed,
)
from cvtelefid.symplectic import Z2, direct_sum, is_symplectic, rotation, squeeze
from cvtelefid.teleport import (
    MinimalNoiseDecomposition,
    TgcpMap,
    apply_local_tgcp,
    attenuation_map,
    decompose_minimal_noise,
    fidelity_coherent,
    fidelity_from_isotropic_noise,
    fidelity_gaussian_input,
    is_minimal_noise,
    isotropize_noise,
    mode_is_cp,
    noise_matrix,
    swap_cm,
    swap_nu,
)

seeds = st.integers(0, 2**32)


def random_symplectic2(rng, spread=1.0):
    return rotation(rng.uniform(0, 2 * math.pi)) @ squeeze(math.exp(rng.uniform(-spread, spread))) @ rotation(
        rng.uniform(0, 2 * math.pi)
    )


def random_channel(rng):
    """Symplectic, loss, symplectic, then optional extra thermal noise."""
    tau = rng.uniform(0.0, 1.0)
    T1, T2 = random_symplectic2(rng), random_symplectic2(rng)
    S = tau * T2 @ T1
    G = (1 - tau**2) * T2 @ T2.T + rng.uniform(0, 0.5) * np.eye(2) * rng.integers(0, 2)
    return S, G


class TestNoiseAndFidelity:
    def test_vacuum(self):
        np.testing.assert_array_equal(noise_matrix(make_cm(np.eye(4))), 2 * np.eye(2))
        assert fidelity_coherent(make_cm(np.eye(4))) == 0.5
        assert fidelity_gaussian_input(make_cm(np.eye(4)), np.eye(2)) == 0.5

    @pytest.mark.parametrize("r", [0.3, math.log(2), 1.5])
    def test_tmsv(self, r):
        V = two_mode_squeezed(r)
        np.testing.assert_allclose(noise_matrix(V), 2 * math.exp(-r) * np.eye(2), atol=1e-14)
        assert fidelity_coherent(V) == pytest.approx(1 / (1 + math.exp(-r)), rel=1e-14)

    def test_ln2_is_two_thirds(self):
        assert fidelity_coherent(two_mode_squeezed(math.log(2))) == pytest.approx(2 / 3, abs=1e-14)

    @pytest.mark.parametrize("q", [-0.7, 0.0, 0.4])
    def test_squeezed_input_closed_form(self, q):
        r = 0.8
        V_in = np.diag([math.exp(2 * q), math.exp(-2 * q)])
        expected = 2 / math.sqrt((2 * math.exp(2 * q) + 2 * math.exp(-r)) * (2 * math.exp(-2 * q) + 2 * math.exp(-r)))
        assert fidelity_gaussian_input(two_mode_squeezed(r), V_in) == pytest.approx(expected, rel=1e-14)

    @given(seeds)
    def test_gaussian_input_with_vacuum_is_coherent_fidelity(self, seed):
        V = random_physical_cm(seed)
        assert fidelity_gaussian_input(V, np.eye(2)) == pytest.approx(fidelity_coherent(V), rel=1e-13)

    def test_gaussian_input_rejects_unphysical(self):
        with pytest.raises(InvalidInputError):
            fidelity_gaussian_input(two_mode_squeezed(1.0), np.diag([0.5, 0.5]))
        with pytest.raises(InvalidInputError):
            fidelity_gaussian_input(two_mode_squeezed(1.0), np.array([[1.0, 0.2], [0.0, 1.0]]))

    def test_standard_form_III_noise_is_isotropic(self):
        V = make_cm(np.array([[2.0, 0, -1.2, 0], [0, 2.0, 0, 0.9], [-1.2, 0, 1.5, 0], [0, 0.9, 0, 1.5]]))
        f = to_standard_form_III(V)
        np.testing.assert_allclose(noise_matrix(f.V1), (f.n + f.m - 2 * f.d) * np.eye(2), atol=1e-10)

    @given(seeds)
    def test_fidelity_range_and_isotropic_form(self, seed):
        V = random_physical_cm(seed)
        assert 0 < fidelity_coherent(V) <= 1
        _, Vi = isotropize_noise(V)
        n = noise_matrix(Vi)[0, 0] / 2
        assert fidelity_coherent(Vi) == pytest.approx(fidelity_from_isotropic_noise(n), rel=1e-9)

    def test_sign_flipped_correlations_spoil_fidelity_but_not_entanglement(self):
        r = 1.0
        V = two_mode_squeezed(r)
        flipped = V.transformed(direct_sum(np.eye(2), -np.eye(2)))
        assert np.allclose(flipped.C, Z2 * math.sinh(r))
        assert pt_spectrum(flipped).nu == pytest.approx(pt_spectrum(V).nu, rel=1e-12)
        assert fidelity_coherent(flipped) == pytest.approx(1 / (1 + math.exp(r)), rel=1e-12)
        assert fidelity_coherent(flipped) < 0.5 < fidelity_coherent(V)

    def test_clamp_rejects_superunit_fidelity(self):
        # over-correlated matrix bypassing validation: N = -I
        bad = TwoModeCM(np.block([[np.eye(2), -1.5 * Z2], [-1.5 * Z2, np.eye(2)]]))
        with pytest.raises(NumericalFailureError):
            fidelity_coherent(bad)


class TestLocalMaps:
    def test_identity_map(self):
        V = random_physical_cm(1)
        np.testing.assert_allclose(apply_local_tgcp(V, TgcpMap.identity()).V, V.V, atol=1e-15)

    def test_attenuation_on_tmsv(self):
        r, tau = 0.9, 0.6
        out = apply_local_tgcp(two_mode_squeezed(r), attenuation_map(tau, "b"))
        np.testing.assert_allclose(out.B, (tau**2 * math.cosh(r) + 1 - tau**2) * np.eye(2), atol=1e-14)
        np.testing.assert_allclose(out.C, -tau * math.sinh(r) * Z2, atol=1e-14)
        np.testing.assert_allclose(out.A, math.cosh(r) * np.eye(2), atol=1e-14)

    def test_attenuation_extremes(self):
        full = attenuation_map(1.0)
        assert np.array_equal(full.S, np.eye(4)) and not full.G.any()
        loss = attenuation_map(0.0, "a")
        assert np.array_equal(loss.S_a, np.zeros((2, 2))) and np.array_equal(loss.G_a, np.eye(2))
        out = apply_local_tgcp(two_mode_squeezed(1.0), loss)
        np.testing.assert_allclose(out.A, np.eye(2)) and np.testing.assert_allclose(out.C, 0)

    def test_attenuation_is_minimal_noise(self):
        m = attenuation_map(0.6)
        assert np.linalg.det(m.G_b) == pytest.approx(0.4096, abs=1e-15)
        assert np.linalg.det(m.G_b) == pytest.approx((1 - np.linalg.det(m.S_b)) ** 2, abs=1e-15)
        assert is_minimal_noise(m)

    @pytest.mark.parametrize("tau,mode", [(-0.1, "b"), (1.1, "a"), (0.5, "c")])
    def test_attenuation_rejects(self, tau, mode):
        with pytest.raises(InvalidInputError):
            attenuation_map(tau, mode)

    def test_minimal_noise_classification(self):
        assert is_minimal_noise(TgcpMap.symplectic(squeeze(2.0), rotation(0.3)))
        assert not is_minimal_noise(TgcpMap(np.eye(2), np.eye(2), np.eye(2), np.zeros((2, 2))))

    def test_non_cp_map_is_rejected(self):
        bad = TgcpMap(2 * np.eye(2), np.eye(2), np.zeros((2, 2)), np.zeros((2, 2)))
        assert not bad.is_cp()
        assert not mode_is_cp(np.eye(2), -np.eye(2))
        with pytest.raises(InvalidInputError):
            apply_local_tgcp(two_mode_squeezed(1.0), bad)

    def test_composition_order(self):
        first = TgcpMap.symplectic(squeeze(2.0), np.eye(2))
        second = attenuation_map(0.5, "a")
        V = random_physical_cm(3)
        via_then = apply_local_tgcp(V, first.then(second))
        stepwise = apply_local_tgcp(apply_local_tgcp(V, first), second)
        np.testing.assert_allclose(via_then.V, stepwise.V, atol=1e-12)

    def test_local_operations_never_decrease_nu(self):
        rng = np.random.default_rng(20240607)
        worst = math.inf
        for k in range(1000):
            V = random_entangled_cm(k)
            (Sa, Ga), (Sb, Gb) = random_channel(rng), random_channel(rng)
            out = apply_local_tgcp(V, TgcpMap(Sa, Sb, Ga, Gb))
            worst = min(worst, pt_spectrum(out).nu - pt_spectrum(V).nu * (1 - 1e-9))
        assert worst >= 0

    def test_separable_nu_can_drop_but_not_below_one(self):
        # above the separability edge nu is not a monotone: loss maps thermal noise to vacuum
        out = apply_local_tgcp(thermal_product(3.0), attenuation_map(0.0, "a").then(attenuation_map(0.0, "b")))
        assert pt_spectrum(out).nu == pytest.approx(1.0)
        rng = np.random.default_rng(7)
        for k in range(200):
            V = random_physical_cm(k)
            (Sa, Ga), (Sb, Gb) = random_channel(rng), random_channel(rng)
            out = apply_local_tgcp(V, TgcpMap(Sa, Sb, Ga, Gb))
            assert min(pt_spectrum(out).nu, 1.0) >= min(pt_spectrum(V).nu, 1.0) * (1 - 1e-9)


class TestDecomposition:
    def test_attenuation(self):
        d = decompose_minimal_noise(0.7 * np.eye(2), 0.51 * np.eye(2))
        assert d.tau == pytest.approx(0.7)
        assert np.array_equal(d.sigma2, np.eye(2))
        np.testing.assert_allclose(d.sigma1, np.eye(2), atol=1e-14)

    def test_symplectic(self):
        S = rotation(0.4) @ squeeze(1.7)
        d = decompose_minimal_noise(S, np.zeros((2, 2)))
        assert d.tau == 1.0 and np.array_equal(d.sigma2, np.eye(2))
        np.testing.assert_allclose(d.sigma1, S, atol=1e-14)

    @given(seeds)
    def test_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        T1, T2 = random_symplectic2(rng), random_symplectic2(rng)
        tau = rng.uniform(0.05, 0.99)
        S, G = MinimalNoiseDecomposition(T1, tau, T2).recompose()
        d = decompose_minimal_noise(S, G)
        assert is_symplectic(d.sigma1, 1e-9) and is_symplectic(d.sigma2, 1e-9)
        S2, G2 = d.recompose()
        np.testing.assert_allclose(S2, S, atol=1e-9)
        np.testing.assert_allclose(G2, G, atol=1e-9)

    @pytest.mark.parametrize("S", [np.diag([1.5, 1.5]), np.diag([1.0, -1.0]), np.zeros((2, 2))])
    def test_out_of_domain(self, S):
        with pytest.raises(OutOfDomainError):
            decompose_minimal_noise(S, np.eye(2))

    def test_non_minimal_rejected(self):
        with pytest.raises(InvalidInputError):
            decompose_minimal_noise(0.5 * np.eye(2), np.eye(2))


class TestIsotropization:
    @pytest.mark.parametrize("seed", range(40))
    def test_isotropizes_and_never_lowers_fidelity(self, seed):
        V = random_physical_cm(seed)
        N = noise_matrix(V)
        tgcp, Vi = isotropize_noise(V)
        Ni = noise_matrix(Vi)
        np.testing.assert_allclose(tgcp.S_a, Z2 @ tgcp.S_b @ Z2)
        assert np.trace(Ni) == pytest.approx(2 * math.sqrt(np.linalg.det(Ni)), rel=1e-9)
        assert np.linalg.det(Ni) == pytest.approx(np.linalg.det(N), rel=1e-9)
        assert fidelity_coherent(Vi) >= fidelity_coherent(V) - 1e-12

    def test_strict_gain_for_anisotropic_noise(self):
        V = two_mode_squeezed(1.0).transformed(direct_sum(squeeze(1.5), np.eye(2)))
        _, Vi = isotropize_noise(V)
        assert fidelity_coherent(Vi) > fidelity_coherent(V) + 1e-3


class TestSwap:
    def test_noiseless_swap_is_tmsv(self):
        np.testing.assert_allclose(swap_cm(0.0, 1.3).V, two_mode_squeezed(1.3).V)

    @pytest.mark.parametrize("n_opt", [0.1, 0.3, 0.7])
    def test_monotone_approach(self, n_opt):
        vals = [swap_nu(n_opt, r) for r in (5.0, 10.0, 15.0)]
        assert vals[0] > vals[1] > vals[2] > n_opt
        assert vals[2] - n_opt < 1e-3

    def test_closed_form_matches_generic_spectrum(self):
        for n_opt in (0.0, 0.2, 0.9):
            for r in np.linspace(0, 6, 13):
                assert swap_nu(n_opt, r) == pytest.approx(pt_spectrum(swap_cm(n_opt, r)).nu, rel=1e-8)

    def test_above_n_opt_on_grid(self):
        for n_opt in (0.05, 0.3, 0.7, 0.95):
            assert all(swap_nu(n_opt, r) >= n_opt for r in np.linspace(0, 20, 201))

    def test_noisy_swap_starts_at_vacuum_edge(self):
        # for n_opt > 1 the r = 0 state is a product with nu = 1 < n_opt
        assert swap_nu(2.0, 0.0) == pytest.approx(1.0)
        assert all(swap_nu(2.0, r) >= 1.0 for r in np.linspace(0, 20, 201))

    def test_thermal_product_is_separable(self):
        assert pt_spectrum(thermal_product(2.0, 3.0)).nu > 1
