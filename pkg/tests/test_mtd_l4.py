"""Quartic tensor factorizations and their double-reflection LCU."""

import numpy as np
import pytest

from fermilcu.fermionic_lcu import OneBodyFragment, diagonalize_one_body
from fermilcu.mtd_l4 import (
    Cp4Factors,
    cp4_als,
    l4_lcu,
    mps_factorize,
    svd_chain_factorize,
)

from conftest import hamiltonian, random_two_body

# measured on this implementation
FROZEN = {
    # name: (lambda_mps, bond_dims, lambda_svd)
    "h2": (2.5229281802, (2, 3, 2), 2.5005454487),
    "lih": (14.7773254512, (6, 18, 6), 11.5723050164),
    "beh2": (25.0073926856, (7, 22, 7), 20.8360167537),
    "h2o": (71.1214295054, (7, 24, 7), 61.3755857882),
}


def quartic(v):
    return np.einsum("i,j,k,l->ijkl", v, v, v, v)


def trivial_one_body(n):
    return OneBodyFragment(rotation=np.eye(n), eigenvalues=np.zeros(n))


class TestMps:
    @pytest.mark.parametrize("name", sorted(FROZEN))
    def test_frozen_lambda_and_dims(self, name):
        maj = hamiltonian(name)
        factors = mps_factorize(maj.g)
        assert factors.bond_dims == FROZEN[name][1]
        lcu = l4_lcu(factors, diagonalize_one_body(maj))
        assert lcu.one_norm == pytest.approx(FROZEN[name][0], rel=1e-7)

    def test_reconstruction_within_budget(self, any_molecule):
        maj = hamiltonian(any_molecule)
        factors = mps_factorize(maj.g)
        assert factors.loss < 1e-6

    def test_separable_tensor_is_exact(self):
        v = np.array([0.6, 0.8, 0.0])
        factors = mps_factorize(quartic(v))
        assert factors.loss < 1e-24
        assert np.abs(factors.reconstruct() - quartic(v)).max() < 1e-12
        assert factors.bond_dims == (1, 1, 1)

    def test_random_tensor_full_rank_lossless(self):
        g = random_two_body(3, np.random.default_rng(5))
        factors = mps_factorize(g, tol=1e-12)
        assert np.abs(factors.reconstruct() - g).max() < 1e-6

    def test_stored_vectors_are_unit(self, h2):
        factors = mps_factorize(h2.g)
        for u in range(factors.n2.shape[0]):
            for v in range(factors.n2.shape[1]):
                if factors.n2[u, v] > 0:
                    assert np.linalg.norm(factors.u2[u, :, v]) == pytest.approx(1.0, abs=1e-10)
        for v in range(factors.n3.shape[0]):
            for w in range(factors.n3.shape[1]):
                if factors.n3[v, w] > 0:
                    assert np.linalg.norm(factors.u3[v, :, w]) == pytest.approx(1.0, abs=1e-10)

    def test_asymmetric_tensor_rejected(self):
        g = np.zeros((2, 2, 2, 2))
        g[0, 1, 0, 0] = 1.0
        with pytest.raises(ValueError, match="symmetry"):
            mps_factorize(g)


class TestSvdChain:
    @pytest.mark.parametrize("name", sorted(FROZEN))
    def test_frozen_lambda(self, name):
        maj = hamiltonian(name)
        lcu = l4_lcu(svd_chain_factorize(maj.g), diagonalize_one_body(maj))
        assert lcu.one_norm == pytest.approx(FROZEN[name][2], rel=1e-7)

    def test_h2_near_paper_value(self, h2):
        lcu = l4_lcu(svd_chain_factorize(h2.g), diagonalize_one_body(h2))
        assert abs(lcu.one_norm - 2.54) / 2.54 < 0.02

    def test_rank_one_single_weight(self):
        v = np.array([1.0, 0.0])
        factors = svd_chain_factorize(quartic(v))
        entries = [e for e in factors.weight_entries() if abs(e[0]) > 1e-12]
        assert len(entries) == 1
        lcu = l4_lcu(factors, trivial_one_body(2))
        assert lcu.one_norm == pytest.approx(4 * abs(entries[0][0]), abs=1e-12)

    def test_guard_rejected(self):
        g = np.zeros((9,) * 4)
        with pytest.raises(ValueError, match="guard"):
            svd_chain_factorize(g)

    def test_flatten_to_cp4_is_identical(self, h2):
        chain = svd_chain_factorize(h2.g)
        flat = chain.as_cp4()
        assert isinstance(flat, Cp4Factors)
        assert np.abs(flat.reconstruct() - chain.reconstruct()).max() < 1e-12
        ob = diagonalize_one_body(h2)
        assert l4_lcu(flat, ob).one_norm == pytest.approx(
            l4_lcu(chain, ob).one_norm, abs=1e-10)


class TestCp4:
    def test_rank_one_tensor(self):
        v = np.array([0.6, 0.8])
        factors = cp4_als(quartic(v))
        assert factors.rank == 1
        assert factors.converged
        assert ((factors.reconstruct() - quartic(v)) ** 2).sum() < 1e-10

    def test_h2_converges_at_small_rank(self, h2):
        factors = cp4_als(h2.g, max_rank=16)
        assert factors.converged
        assert factors.rank <= 16
        assert ((factors.reconstruct() - h2.g) ** 2).sum() < 1e-6

    def test_h2_lambda_is_reported(self, h2):
        # the reference tabulates 19.2 for this entry but ties it to a
        # specific implementation, so only existence is required
        lcu = l4_lcu(cp4_als(h2.g, max_rank=16), diagonalize_one_body(h2))
        assert lcu.one_norm > 0

    def test_seed_determinism(self, h2):
        a = cp4_als(h2.g, max_rank=16, seed=3)
        b = cp4_als(h2.g, max_rank=16, seed=3)
        assert a.rank == b.rank
        assert np.array_equal(a.weights, b.weights)

    def test_max_rank_exhaustion_flags(self, h2):
        factors = cp4_als(h2.g, max_rank=1)
        assert not factors.converged
        assert factors.rank == 1
        assert factors.loss > 1e-6

    def test_sign_convention(self, h2):
        factors = cp4_als(h2.g, max_rank=16)
        for v in factors.vectors:
            for m in range(v.shape[1]):
                col = v[:, m]
                assert col[np.argmax(np.abs(col))] >= 0


class TestL4Lcu:
    def test_single_weight_unit_vectors(self):
        e1 = np.array([1.0, 0.0])
        stack = e1[:, None]
        factors = Cp4Factors(1, np.array([1.0]), (stack, stack, stack, stack))
        lcu = l4_lcu(factors, trivial_one_body(2))
        assert len(lcu) == 4
        assert lcu.one_norm == pytest.approx(4.0, abs=1e-12)

    def test_zero_weights_dropped(self):
        e1 = np.array([1.0, 0.0])
        stack = np.column_stack([e1, e1])
        factors = Cp4Factors(2, np.array([1.0, 0.0]), (stack,) * 4)
        lcu = l4_lcu(factors, trivial_one_body(2))
        assert len(lcu) == 4
        assert lcu.metadata["n_weights"] == 1

    def test_unnormalized_vector_rejected(self):
        bad = np.array([[2.0], [0.0]])
        factors = Cp4Factors(1, np.array([1.0]), (bad, bad, bad, bad))
        with pytest.raises(ValueError):
            l4_lcu(factors, trivial_one_body(2))

    def test_lambda_matches_fragment_sum(self, h2):
        ob = diagonalize_one_body(h2)
        lcu = l4_lcu(svd_chain_factorize(h2.g), ob)
        assert lcu.coefficient_sum() == pytest.approx(lcu.one_norm, abs=1e-10)

    def test_givens_angles_attached(self, h2):
        lcu = l4_lcu(svd_chain_factorize(h2.g), diagonalize_one_body(h2))
        pairs = [f for f in lcu.fragments if len(f.unitary.reflections) == 2]
        refl = pairs[0].unitary.reflections[0]
        assert refl.v_angles is not None
        assert refl.w_angles is not None
