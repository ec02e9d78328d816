"""Brute-force checks: dense fragment rendering, full reconstruction, and the
spectral lower bound on the 1-norm."""

from dataclasses import dataclass

import numpy as np

from .lcu import AcGroup, ChebyshevSquare, Fragment, LcuDecomposition, PauliTerm, ReflectionProduct
from .majorana import (
    PauliSum,
    dense_matrix,
    identity_word,
    pauli_sum_of_hamiltonian,
    reflection_word,
    sparse_matrix,
)
from .qubit_lcu import naive_ac_phases

DENSE_QUBITS = 8
UNITARY_TOL = 1e-9


@dataclass
class SpectralRange:
    e_min: float
    e_max: float

    @property
    def half_range(self) -> float:
        return 0.5 * (self.e_max - self.e_min)


def spectral_range(maj) -> SpectralRange:
    """Extremal eigenvalues of the qubit matrix, constants included."""
    nq = 2 * maj.n_orbitals
    if nq > 24:
        raise ValueError("spectral range limited to 24 qubits")
    op = pauli_sum_of_hamiltonian(maj)
    if not op.terms:
        return SpectralRange(0.0, 0.0)
    if nq <= 10:
        eigs = np.linalg.eigvalsh(dense_matrix(op))
        return SpectralRange(float(eigs[0]), float(eigs[-1]))
    from scipy.sparse.linalg import eigsh

    mat = sparse_matrix(op)
    v0 = np.ones(mat.shape[0]) / np.sqrt(mat.shape[0])  # deterministic start
    lo = eigsh(mat, k=1, which="SA", v0=v0, return_eigenvectors=False)
    hi = eigsh(mat, k=1, which="LA", v0=v0, return_eigenvectors=False)
    return SpectralRange(float(lo[0]), float(hi[0]))


def _reflection_sum(refl, n_orbitals: int) -> PauliSum:
    out = PauliSum(2 * n_orbitals)
    for i in range(n_orbitals):
        for j in range(n_orbitals):
            c = refl.v[i] * refl.w[j]
            if c == 0.0:
                continue
            word, coeff = reflection_word(i + 1, j + 1, refl.sigma, n_orbitals)
            out.add(word, c * coeff)
    return out


def _product_sum(a: PauliSum, b: PauliSum) -> PauliSum:
    out = PauliSum(a.n_qubits)
    for w1, c1 in a.terms.items():
        for w2, c2 in b.terms.items():
            word, phase = w1 * w2
            out.add(word, c1 * c2 * phase)
    return out


def _chebyshev_sum(cs: ChebyshevSquare, n_orbitals: int) -> PauliSum:
    nq = 2 * n_orbitals
    r = PauliSum(nq)
    for i in range(n_orbitals):
        for j in range(n_orbitals):
            if cs.w_matrix[i, j] == 0.0:
                continue
            for sigma in (0, 1):
                word, coeff = reflection_word(i + 1, j + 1, sigma, n_orbitals)
                r.add(word, 0.5 * cs.w_matrix[i, j] * coeff)
    p = PauliSum(nq)
    for w, c in r.terms.items():
        p.add(w, c / (cs.norm / 2.0))
    out = _product_sum(p, p)
    doubled = PauliSum(nq)
    for w, c in out.terms.items():
        doubled.add(w, 2.0 * c)
    doubled.add(identity_word(nq), -1.0)
    return doubled


def fragment_pauli_sum(fragment: Fragment, n_orbitals: int) -> PauliSum:
    """The fragment unitary as a combination of Pauli words (coefficient
    excluded)."""
    nq = 2 * n_orbitals
    unit = fragment.unitary
    if fragment.kind == "pauli":
        out = PauliSum(nq)
        out.add(unit.word, unit.phase)
        return out
    if fragment.kind == "ac-group":
        out = PauliSum(nq)
        for word, c in zip(unit.words, unit.coeffs):
            out.add(word, c / unit.norm)
        return out
    if fragment.kind == "reflection-product":
        total = None
        for refl in unit.reflections:
            s = _reflection_sum(refl, n_orbitals)
            total = s if total is None else _product_sum(total, s)
        scaled = PauliSum(nq)
        for w, c in total.terms.items():
            scaled.add(w, unit.sign * c)
        return scaled
    if fragment.kind == "sf-poly":
        return _chebyshev_sum(unit, n_orbitals)
    raise ValueError(f"unknown fragment kind {fragment.kind!r}")


def _fragment_orbitals(fragment: Fragment) -> int:
    unit = fragment.unitary
    if fragment.kind == "pauli":
        return unit.word.n_qubits // 2
    if fragment.kind == "ac-group":
        return unit.words[0].n_qubits // 2
    if fragment.kind == "reflection-product":
        return len(unit.reflections[0].v)
    if fragment.kind == "sf-poly":
        return unit.w_matrix.shape[0]
    raise ValueError(f"unknown fragment kind {fragment.kind!r}")


def fragment_matrix(fragment: Fragment) -> np.ndarray:
    """Dense matrix of one fragment unitary, with its defining check applied.

    Squared-polynomial fragments are Hermitian with spectrum inside [-1, 1]
    instead of unitary; everything else must be unitary within 1e-9.
    """
    n = _fragment_orbitals(fragment)
    if 2 * n > DENSE_QUBITS:
        raise ValueError(f"dense fragments limited to {DENSE_QUBITS} qubits")
    mat = dense_matrix(fragment_pauli_sum(fragment, n))
    dim = mat.shape[0]
    if fragment.kind == "sf-poly":
        if np.abs(mat - mat.conj().T).max() > UNITARY_TOL:
            raise ValueError("squared-polynomial fragment is not Hermitian")
        eigs = np.linalg.eigvalsh(mat)
        if eigs[0] < -1.0 - 1e-9 or eigs[-1] > 1.0 + 1e-9:
            raise ValueError("squared-polynomial spectrum escapes [-1, 1]")
        return mat
    dev = np.abs(mat @ mat.conj().T - np.eye(dim)).max()
    if dev > UNITARY_TOL:
        raise ValueError(f"fragment is not unitary (deviation {dev:.2e})")
    return mat


def verify_reconstruction(lcu: LcuDecomposition, maj) -> float:
    """Deviation of sum_k u_k U_k + constant from the full Hamiltonian.

    Dense max-abs entry difference up to 8 qubits; beyond that, the 1-norm of
    the Pauli-coefficient difference, which upper-bounds the operator norm.
    """
    n = maj.n_orbitals
    nq = 2 * n
    total = PauliSum(nq)
    for frag in lcu.fragments:
        part = fragment_pauli_sum(frag, n)
        for w, c in part.terms.items():
            total.add(w, frag.coefficient * c)
    total.add(identity_word(nq), lcu.constant)
    target = pauli_sum_of_hamiltonian(maj)
    diff = PauliSum(nq)
    for w, c in total.terms.items():
        diff.add(w, c)
    for w, c in target.terms.items():
        diff.add(w, -c)
    if nq <= DENSE_QUBITS:
        return float(np.abs(dense_matrix(diff)).max())
    return float(sum(abs(c) for c in diff.terms.values()))


def reconstruction_tolerance(lcu: LcuDecomposition) -> float:
    return max(1e-6, float(lcu.metadata.get("truncation_bound", 0.0)))


def verify_norm_bound(lcu: LcuDecomposition, srange: SpectralRange) -> bool:
    """lambda >= Delta E / 2 once excluded constants are reinstated."""
    return lcu.one_norm + abs(lcu.constant) >= srange.half_range - 1e-9


def ac_naive_matrix(group: AcGroup) -> np.ndarray:
    """Double product of arcsine-phased exponentials, give or take the global
    phase i it carries."""
    phases = naive_ac_phases(group)
    nq = group.words[0].n_qubits
    dim = 2 ** nq
    gates = []
    for word, phi in zip(group.words, phases):
        w = word.dense()
        gates.append(np.cos(phi) * np.eye(dim) + 1j * np.sin(phi) * w)
    prod = np.eye(dim, dtype=complex)
    for gate in gates + gates[::-1]:  # ascending pass, then descending
        prod = prod @ gate
    return -1j * prod


def ac_givens_matrix(group: AcGroup) -> np.ndarray:
    """Givens-chain conjugation: rotate the first word onto the combination."""
    nq = group.words[0].n_qubits
    dim = 2 ** nq
    mats = [w.dense() for w in group.words]
    left = np.eye(dim, dtype=complex)
    for j in reversed(range(len(group.angles))):
        pp = mats[j + 1] @ mats[j]
        left = left @ (np.cos(group.angles[j]) * np.eye(dim) + np.sin(group.angles[j]) * pp)
    sign = 1.0
    if len(group.words) == 1 and group.coeffs[0] < 0:
        sign = -1.0
    return sign * (left @ mats[0] @ left.conj().T)
