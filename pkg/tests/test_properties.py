"""Randomized invariants of the algebraic building blocks: angle chains and
their reconstructions, rotation parameterization round trips, localization,
tensor factorizations, the spectral norm bound, and cost-row monotonicity."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_two_body
from fermilcu.majorana import MajoranaHamiltonian
from fermilcu.mtd_l4 import cp4_als, mps_factorize, svd_chain_factorize
from fermilcu.qubit_lcu import (
    ac_lcu,
    angles_from_rotation,
    givens_chain_angles,
    localizing_rotation,
    naive_ac_phases,
    reconstruct_chain,
    rotate_two_body,
    rotation_from_angles,
    rotation_pairs,
    sparse_pauli_lcu,
)
from fermilcu.resources import (
    beta_bits,
    df_select_row,
    l4_sel_row,
    mu_bits,
    prep_row,
    rz_t_cost,
    sparse_prep_row,
    sparse_sel_row,
)
from fermilcu.verify import spectral_range, verify_norm_bound


def random_hamiltonian(n, rng) -> MajoranaHamiltonian:
    h = rng.normal(size=(n, n))
    return MajoranaHamiltonian(
        n_orbitals=n,
        h0=float(rng.normal()),
        h_tilde=(h + h.T) / 2,
        g=random_two_body(n, rng),
    )


unit_vectors = st.lists(
    st.floats(-1.0, 1.0, allow_nan=False), min_size=2, max_size=9,
).filter(lambda v: np.linalg.norm(v) > 0.1)


class TestAngleChains:
    @given(unit_vectors)
    def test_givens_chain_round_trip(self, raw):
        c = np.array(raw) / np.linalg.norm(raw)
        angles = givens_chain_angles(c)
        assert np.allclose(reconstruct_chain(angles, c.size), c, atol=1e-9)

    @given(unit_vectors)
    def test_ac_phase_product_rebuilds_coefficients(self, raw):
        # d_q / |d| = sin(2 phi_q) prod_{q'>q} cos(2 phi_q'), the invariant
        # that makes the phase ladder render the normalized group operator
        d = np.array(raw)
        phases = naive_ac_phases(d)
        tail = np.cumprod(np.cos(2.0 * phases[::-1]))[::-1]
        tail = np.append(tail[1:], 1.0)
        rebuilt = np.sin(2.0 * phases) * tail
        assert np.allclose(rebuilt, d / np.linalg.norm(d), atol=1e-9)

    def test_chain_handles_vanishing_tail(self):
        c = np.array([0.6, 0.8, 0.0, 0.0])
        angles = givens_chain_angles(c)
        assert np.allclose(reconstruct_chain(angles, 4), c, atol=1e-12)


angle_sets = st.integers(2, 6).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(st.floats(-np.pi, np.pi, allow_nan=False),
                 min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2),
    )
)


class TestRotationParameterization:
    @given(angle_sets)
    def test_matrix_round_trip(self, case):
        n, raw = case
        u = rotation_from_angles(np.array(raw), n)
        rec = rotation_from_angles(angles_from_rotation(u), n)
        assert np.allclose(rec, u, atol=1e-7)

    def test_haar_rotations_round_trip(self):
        rng = np.random.default_rng(3)
        for n in (2, 3, 5, 8):
            for _ in range(12):
                q, _r = np.linalg.qr(rng.normal(size=(n, n)))
                if np.linalg.det(q) < 0:
                    q[:, 0] = -q[:, 0]
                rec = rotation_from_angles(angles_from_rotation(q), n)
                assert np.allclose(rec, q, atol=1e-8)

    def test_rejects_reflections(self):
        u = np.diag([1.0, 1.0, -1.0])
        with pytest.raises(ValueError):
            angles_from_rotation(u)

    def test_identity_maps_to_zero_angles(self):
        angles = angles_from_rotation(np.eye(5))
        assert np.allclose(angles, 0.0, atol=1e-12)
        assert angles.size == len(rotation_pairs(5))


class TestTensorRotation:
    def test_frobenius_isometry_and_inverse(self):
        rng = np.random.default_rng(11)
        for n in (2, 3, 4):
            g = random_two_body(n, rng)
            q, _ = np.linalg.qr(rng.normal(size=(n, n)))
            rotated = rotate_two_body(g, q)
            assert np.linalg.norm(rotated) == pytest.approx(
                np.linalg.norm(g), rel=1e-12)
            assert np.allclose(rotate_two_body(rotated, q.T), g, atol=1e-12)
            assert np.allclose(rotate_two_body(g, np.eye(n)), g)

    def test_localizing_rotation_invariants(self):
        rng = np.random.default_rng(5)
        for n in (2, 3, 4, 5):
            g = random_two_body(n, rng)
            u = localizing_rotation(g)
            assert np.allclose(u @ u.T, np.eye(n), atol=1e-10)
            assert np.linalg.det(u) == pytest.approx(1.0, abs=1e-10)
            before = np.einsum("iiii->", g)
            after = np.einsum("iiii->", rotate_two_body(g, u))
            assert after >= before - 1e-12
            assert np.linalg.norm(rotate_two_body(g, u)) == pytest.approx(
                np.linalg.norm(g), rel=1e-12)


class TestAnticommutingGroups:
    def test_groups_pairwise_anticommute(self):
        rng = np.random.default_rng(23)
        for n in (2, 3):
            for _ in range(4):
                lcu = ac_lcu(random_hamiltonian(n, rng))
                assert lcu.fragments
                for fragment in lcu.fragments:
                    group = fragment.unitary
                    words = group.words
                    for a in range(len(words)):
                        for b in range(a + 1, len(words)):
                            assert not words[a].commutes_with(words[b])
                    assert fragment.coefficient == pytest.approx(
                        np.linalg.norm(group.coeffs))
                assert lcu.one_norm == pytest.approx(lcu.coefficient_sum())


class TestFactorizationReconstruction:
    def test_chain_factorizations_rebuild_random_tensors(self):
        rng = np.random.default_rng(7)
        for factorize in (mps_factorize, svd_chain_factorize):
            for _ in range(5):
                g = random_two_body(3, rng)
                factors = factorize(g, tol=1e-12)
                rec = factors.reconstruct()
                assert np.allclose(rec, g, atol=1e-8)
                assert np.abs(rec - g).sum() <= factors.loss_abs + 1e-8

    def test_svd_chain_equals_its_cp4_form(self):
        rng = np.random.default_rng(9)
        g = random_two_body(3, rng)
        factors = svd_chain_factorize(g, tol=1e-10)
        assert np.allclose(factors.as_cp4().reconstruct(),
                           factors.reconstruct(), atol=1e-10)

    def test_cp4_residual_bound_is_honest(self):
        rng = np.random.default_rng(13)
        g = random_two_body(2, rng)
        factors = cp4_als(g, max_rank=16, tol=1e-8, seed=1)
        rec = factors.reconstruct()
        assert np.abs(rec - g).sum() <= factors.loss_abs + 1e-8


class TestNormBound:
    def test_exact_pauli_lcu_dominates_half_range(self):
        # lambda + |constant| >= half the spectral spread, for any valid LCU
        rng = np.random.default_rng(29)
        for _ in range(8):
            maj = random_hamiltonian(2, rng)
            lcu = sparse_pauli_lcu(maj, threshold=0.0)
            assert verify_norm_bound(lcu, spectral_range(maj))


class TestCostMonotonicity:
    @given(st.integers(1, 1 << 20), st.integers(1, 40))
    def test_prep_dip_never_exceeds_four(self, k, mu):
        step = (prep_row(k + 1, mu).t_gates - prep_row(k, mu).t_gates)
        assert step >= -4

    @given(st.integers(1, 1 << 16), st.integers(1, 40), st.integers(2, 12))
    def test_doubling_terms_never_cheaper(self, s, mu, n):
        small = sparse_prep_row(s, n, mu)
        big = sparse_prep_row(2 * s, n, mu)
        assert big.t_gates >= small.t_gates
        assert sparse_sel_row(n + 1).t_gates > sparse_sel_row(n).t_gates

    @given(st.integers(1, 1 << 14), st.integers(2, 40), st.integers(4, 64),
           st.integers(2, 20))
    def test_linear_arguments_are_strict(self, count, n, beta, mu):
        assert (df_select_row(count + 1, n, mu, beta).t_gates
                > df_select_row(count, n, mu, beta).t_gates)
        assert (l4_sel_row(count + 1, n, beta).t_gates
                > l4_sel_row(count, n, beta).t_gates)

    @given(st.floats(1e-8, 0.0159))
    def test_rz_cost_grows_as_accuracy_tightens(self, eps):
        assert rz_t_cost(eps / 2) > rz_t_cost(eps)

    @given(st.integers(1, 1 << 12), st.floats(1e-9, 0.5))
    def test_register_widths_monotone(self, n, eps):
        assert mu_bits(n, eps / 2) >= mu_bits(n, eps)
        assert mu_bits(2 * n, eps) >= mu_bits(n, eps)
        assert beta_bits(n, 2.0, eps) >= beta_bits(n, 1.0, eps)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_rotation_preserves_spectrum_and_norm_bound(seed):
    # an orbital rotation relabels the same operator, so the spectrum stays
    # put and the rotated frame's 1-norm still clears the original floor
    from fermilcu.qubit_lcu import rotate_hamiltonian

    rng = np.random.default_rng(seed)
    maj = random_hamiltonian(2, rng)
    angles = rng.uniform(-np.pi, np.pi, size=1)
    rotated = rotate_hamiltonian(maj, rotation_from_angles(angles, 2))
    original_range = spectral_range(maj)
    rotated_range = spectral_range(rotated)
    assert rotated_range.e_min == pytest.approx(original_range.e_min, abs=1e-9)
    assert rotated_range.e_max == pytest.approx(original_range.e_max, abs=1e-9)
    assert verify_norm_bound(sparse_pauli_lcu(rotated, threshold=0.0),
                             original_range)
