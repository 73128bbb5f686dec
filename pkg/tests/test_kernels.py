import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cvtelefid import _pykernels, kernels
from cvtelefid.optimize import oracle_map, oracle_starts
from cvtelefid.state import invariants, random_asymmetric_cm, random_entangled_cm, two_mode_squeezed
from cvtelefid.teleport import apply_local_tgcp, fidelity_coherent

BACKENDS = kernels.backends()
seeds = st.integers(0, 2**32)


def explicit_veta(lam, eta, a, b, c2s):
    n, m, d = _pykernels.eta_form(lam, eta, a, b, c2s)
    V = np.zeros((4, 4))
    V[0, 0], V[1, 1] = n + lam, n
    V[2, 2], V[3, 3] = m + lam / eta**2, m
    V[0, 2] = V[2, 0] = -(d + lam / eta)
    V[1, 3] = V[3, 1] = d
    return V


def attenuate_b(V, eta):
    T = np.diag([1.0, 1.0, eta, eta])
    return T @ V @ T + np.diag([0.0, 0.0, 1 - eta**2, 1 - eta**2])


def inv_tuple(V):
    inv = invariants(V)
    return inv.a, inv.b, inv.c2_signed, inv.v


def test_backend_selection_is_reported():
    assert kernels.BACKEND in BACKENDS
    assert "python" in BACKENDS


@pytest.mark.parametrize("name", sorted(BACKENDS))
class TestScalarKernels:
    @given(seeds, st.floats(-3.0, 3.0), st.floats(0.05, 1.0))
    def test_det_residual_matches_explicit_determinant(self, name, seed, lam, eta):
        a, b, c2s, v = inv_tuple(random_entangled_cm(seed))
        r = BACKENDS[name].det_residual(lam, eta, a, b, c2s, v)
        V = explicit_veta(lam, eta, a, b, c2s)
        if math.isnan(r):
            return
        assert r == pytest.approx(np.linalg.det(V) - v, rel=1e-9, abs=1e-9 * max(1.0, v))

    @given(seeds, st.floats(-3.0, 3.0), st.floats(0.05, 1.0))
    def test_candidate_fidelity_is_fidelity_of_attenuated_form(self, name, seed, lam, eta):
        a, b, c2s, _ = inv_tuple(random_entangled_cm(seed))
        F = BACKENDS[name].candidate_fidelity(lam, eta, a, b, c2s)
        if math.isnan(F):
            return
        V = attenuate_b(explicit_veta(lam, eta, a, b, c2s), eta)
        assert F == pytest.approx(fidelity_coherent(V), rel=1e-10)

    def test_tmsv_boundary_root_is_zero(self, name):
        r = 0.9
        roots = BACKENDS[name].lambda_roots(1.0, math.cosh(r), math.cosh(r), math.sinh(r) ** 2, 1.0)
        assert any(abs(x) < 1e-12 for x in roots)
        F = BACKENDS[name].candidate_fidelity(0.0, 1.0, math.cosh(r), math.cosh(r), math.sinh(r) ** 2)
        assert F == pytest.approx(1.0 / (1.0 + math.exp(-r)), rel=1e-14)

    @pytest.mark.parametrize("seed", range(6))
    def test_boundary_roots_solve_the_determinant_equation(self, name, seed):
        a, b, c2s, v = inv_tuple(random_entangled_cm(seed))
        roots = BACKENDS[name].lambda_roots(1.0, a, b, c2s, v)
        assert len(roots) >= 1
        for lam in roots:
            assert abs(_pykernels.det_residual(lam, 1.0, a, b, c2s, v)) < 1e-8 * max(1.0, v)

    @pytest.mark.parametrize("seed", range(4))
    def test_interior_candidates_are_stationary(self, name, seed):
        a, b, c2s, v = inv_tuple(random_asymmetric_cm(seed))
        for lab in ((a, b), (b, a)):
            for lam, eta in BACKENDS[name].interior_candidates(*lab, c2s, v):
                assert 0.0 < eta < 1.0
                assert abs(_pykernels.det_residual(lam, eta, *lab, c2s, v)) < 1e-7 * max(1.0, v)
                assert abs(_pykernels.stationarity_residual(lam, eta, *lab, c2s)) < 1e-6


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")
class TestBackendParity:
    @pytest.mark.parametrize("seed", range(8))
    def test_root_sets_agree(self, seed):
        py, cc = BACKENDS["python"], BACKENDS["compiled"]
        a, b, c2s, v = inv_tuple(random_asymmetric_cm(seed))
        for eta in (1.0, 0.6):
            np.testing.assert_allclose(
                py.lambda_roots(eta, a, b, c2s, v), cc.lambda_roots(eta, a, b, c2s, v), rtol=1e-9, atol=1e-12
            )
        p = py.interior_candidates(a, b, c2s, v)
        c = cc.interior_candidates(a, b, c2s, v)
        assert len(p) == len(c)
        np.testing.assert_allclose(np.reshape(p, (-1, 2)), np.reshape(c, (-1, 2)), rtol=1e-8, atol=1e-10)

    @given(seeds, st.lists(st.floats(-4.0, 4.0), min_size=8, max_size=8))
    def test_oracle_objective_agrees(self, seed, x):
        V = random_entangled_cm(seed).V
        x = np.array(x)
        assert BACKENDS["python"].oracle_fidelity(V, x) == pytest.approx(
            BACKENDS["compiled"].oracle_fidelity(V, x), rel=1e-12
        )

    def test_oracle_search_agrees(self):
        V = random_asymmetric_cm(2).V
        X0 = oracle_starts(0, 3)
        fp, _, _ = BACKENDS["python"].oracle_search(V, X0)
        fc, _, _ = BACKENDS["compiled"].oracle_search(V, X0)
        np.testing.assert_allclose(fp, fc, atol=1e-9)


@pytest.mark.parametrize("name", sorted(BACKENDS))
@given(seeds, st.lists(st.floats(-4.0, 4.0), min_size=8, max_size=8))
def test_oracle_objective_equals_fidelity_of_decoded_map(name, seed, x):
    V = random_entangled_cm(seed)
    x = np.array(x)
    expected = fidelity_coherent(apply_local_tgcp(V, oracle_map(x)))
    assert BACKENDS[name].oracle_fidelity(V.V, x) == pytest.approx(expected, rel=1e-11)


def test_identity_start_decodes_to_identity_channel():
    m = oracle_map(np.zeros(8))
    np.testing.assert_allclose(m.S, np.eye(4), atol=1e-15)
    np.testing.assert_allclose(m.G, np.zeros((4, 4)), atol=1e-15)
    V = two_mode_squeezed(0.4)
    assert kernels.oracle_fidelity(V.V, np.zeros(8)) == pytest.approx(fidelity_coherent(V), rel=1e-14)
