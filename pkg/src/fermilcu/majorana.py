"""Majorana/Pauli operator algebra and the Hamiltonian's operator split.

The Hamiltonian separates into a constant h0, a two-Majorana part weighted by
h_tilde_ij = h_ij + 2 sum_k g_ijkk, and a four-Majorana part weighted by g.
Reflection operators Q_ij, built from Majorana pairs, carry the coefficients
h_tilde/2 (per spin) and g/4 (per spin pair).

Pauli words are stored as X/Z bitmasks; commutation is the parity of the
symplectic inner product.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PRUNE_TOL = 1e-14

_LETTERS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
# single-qubit products: (a, b) -> (phase, result letter bits)
_MULT = {}
for _xa in (0, 1):
    for _za in (0, 1):
        for _xb in (0, 1):
            for _zb in (0, 1):
                _la = _LETTERS[(_xa, _za)]
                _lb = _LETTERS[(_xb, _zb)]
                _x, _z = _xa ^ _xb, _za ^ _zb
                _table = {("X", "Y"): 1j, ("Y", "X"): -1j,
                          ("Y", "Z"): 1j, ("Z", "Y"): -1j,
                          ("Z", "X"): 1j, ("X", "Z"): -1j}
                _MULT[(_xa, _za, _xb, _zb)] = (_table.get((_la, _lb), 1.0), _x, _z)

_PAULI_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliWord:
    """Pauli letters over n_qubits, phase-free; I=(0,0) X=(1,0) Y=(1,1) Z=(0,1)."""
    n_qubits: int
    x_mask: int
    z_mask: int

    def letter(self, q: int) -> str:
        return _LETTERS[((self.x_mask >> q) & 1, (self.z_mask >> q) & 1)]

    def letters(self) -> tuple:
        return tuple(self.letter(q) for q in range(self.n_qubits))

    def __str__(self) -> str:
        return " ".join(self.letters())

    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    def weight(self) -> int:
        return (self.x_mask | self.z_mask).bit_count()

    def commutes_with(self, other: "PauliWord") -> bool:
        """Parity of the symplectic inner product decides (anti)commutation."""
        parity = (self.x_mask & other.z_mask).bit_count() \
            + (self.z_mask & other.x_mask).bit_count()
        return parity % 2 == 0

    def __mul__(self, other: "PauliWord"):
        """Returns (word, phase) with phase in {1, -1, i, -i}."""
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit count mismatch")
        phase = 1.0 + 0j
        active = self.x_mask | self.z_mask | other.x_mask | other.z_mask
        q = 0
        while active >> q:
            bit = 1 << q
            if active & bit:
                p, _, _ = _MULT[((self.x_mask >> q) & 1, (self.z_mask >> q) & 1,
                                 (other.x_mask >> q) & 1, (other.z_mask >> q) & 1)]
                phase *= p
            q += 1
        return PauliWord(self.n_qubits, self.x_mask ^ other.x_mask,
                         self.z_mask ^ other.z_mask), phase

    def dense(self) -> np.ndarray:
        """Kronecker composition, qubit 1 as the leftmost factor."""
        out = np.array([[1.0 + 0j]])
        for q in range(self.n_qubits):
            out = np.kron(out, _PAULI_MATS[self.letter(q)])
        return out


def identity_word(n_qubits: int) -> PauliWord:
    return PauliWord(n_qubits, 0, 0)


def word_from_letters(letters) -> PauliWord:
    if isinstance(letters, str):
        letters = letters.split()
    x = z = 0
    for q, letter in enumerate(letters):
        if letter == "X":
            x |= 1 << q
        elif letter == "Y":
            x |= 1 << q
            z |= 1 << q
        elif letter == "Z":
            z |= 1 << q
        elif letter != "I":
            raise ValueError(f"unknown Pauli letter {letter!r}")
    return PauliWord(len(letters), x, z)


@dataclass
class PauliSum:
    """Map from PauliWord to complex coefficient, pruned below 1e-14."""
    n_qubits: int
    terms: dict = field(default_factory=dict)

    def add(self, word: PauliWord, coeff: complex) -> None:
        c = self.terms.get(word, 0j) + coeff
        if abs(c) < PRUNE_TOL:
            self.terms.pop(word, None)
        else:
            self.terms[word] = c

    def add_scaled(self, other: "PauliSum", scale: complex = 1.0) -> None:
        for w, c in other.terms.items():
            self.add(w, scale * c)

    def one_norm(self, include_identity: bool = False) -> float:
        return float(sum(abs(c) for w, c in self.terms.items()
                         if include_identity or not w.is_identity()))

    def without_identity(self) -> "PauliSum":
        out = PauliSum(self.n_qubits)
        out.terms = {w: c for w, c in self.terms.items() if not w.is_identity()}
        return out

    def identity_coefficient(self) -> complex:
        return self.terms.get(identity_word(self.n_qubits), 0j)

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return all(abs(c.imag) <= tol for c in self.terms.values())

    def __len__(self) -> int:
        return len(self.terms)


@dataclass(frozen=True)
class MajoranaHamiltonian:
    """Constant / two-Majorana / four-Majorana split of the Hamiltonian."""
    n_orbitals: int
    h0: float
    h_tilde: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        if np.abs(self.h_tilde - self.h_tilde.T).max() > 1e-10:
            raise ValueError("h_tilde not symmetric")


def build_majorana(mol) -> MajoranaHamiltonian:
    """Split MolecularIntegrals into the constant/quadratic/quartic parts."""
    h = mol.one_body
    g = mol.two_body
    h0 = float(np.trace(h) + np.einsum("iijj->", g) + mol.core_energy)
    h_tilde = h + 2.0 * np.einsum("ijkk->ij", g)
    return MajoranaHamiltonian(n_orbitals=mol.n_orbitals, h0=h0,
                               h_tilde=h_tilde, g=g)


def jordan_wigner_majorana(j: int, sigma: int, m: int, n_orbitals: int) -> PauliWord:
    """Majorana operator gamma_{j sigma, m} as a Pauli word over 2N qubits.

    j is 1-based; spin-orbital ordering is interleaved, p = 2(j-1) + sigma + 1.
    Flavor m=0 maps to Z...ZX and m=1 to Z...ZY on qubit p.
    """
    if not 1 <= j <= n_orbitals:
        raise ValueError(f"orbital index {j} out of range [1, {n_orbitals}]")
    if sigma not in (0, 1):
        raise ValueError("sigma must be 0 (alpha) or 1 (beta)")
    if m not in (0, 1):
        raise ValueError("flavor must be 0 or 1")
    p = 2 * (j - 1) + sigma  # 0-based qubit
    x = 1 << p
    z = (1 << p) - 1  # Z string on qubits below p
    if m == 1:
        z |= 1 << p
    return PauliWord(2 * n_orbitals, x, z)


def reflection_word(i: int, j: int, sigma: int, n_orbitals: int):
    """Q_ij,sigma = i gamma_{i sigma,0} gamma_{j sigma,1} -> (word, coefficient)."""
    g0 = jordan_wigner_majorana(i, sigma, 0, n_orbitals)
    g1 = jordan_wigner_majorana(j, sigma, 1, n_orbitals)
    word, phase = g0 * g1
    return word, 1j * phase


def pauli_sum_of_hamiltonian(maj: MajoranaHamiltonian) -> PauliSum:
    """Fully multiplied-out qubit operator with like terms combined.

    H = h0 + (1/2) sum_{ij sigma} h_tilde_ij Q_ij,sigma
        + (1/4) sum_{ijkl sigma tau} g_ijkl Q_ij,sigma Q_kl,tau
    """
    n = maj.n_orbitals
    if n > 12:
        raise ValueError("term count grows as N^4; guard is N <= 12")
    out = PauliSum(2 * n)
    out.add(identity_word(2 * n), maj.h0)
    qwords = {}
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            for s in (0, 1):
                qwords[(i, j, s)] = reflection_word(i, j, s, n)
    for (i, j, s), (word, coeff) in qwords.items():
        c = 0.5 * maj.h_tilde[i - 1, j - 1] * coeff
        if c != 0:
            out.add(word, c)
    for (i, j, s), (w1, c1) in qwords.items():
        for (k, l, t), (w2, c2) in qwords.items():
            gval = maj.g[i - 1, j - 1, k - 1, l - 1]
            if gval == 0.0:
                continue
            word, phase = w1 * w2
            out.add(word, 0.25 * gval * c1 * c2 * phase)
    # Hermiticity: imaginary parts cancel between conjugate index pairs
    cleaned = PauliSum(2 * n)
    for w, c in out.terms.items():
        if abs(c.imag) > 1e-9:
            raise AssertionError("qubit operator failed to come out Hermitian")
        cleaned.add(w, c.real)
    return cleaned


def dense_matrix(op) -> np.ndarray:
    """Dense matrix of a PauliWord or PauliSum; guard 2N <= 16."""
    if isinstance(op, PauliWord):
        if op.n_qubits > 16:
            raise ValueError("dense path limited to 16 qubits")
        return op.dense()
    if op.n_qubits > 16:
        raise ValueError("dense path limited to 16 qubits")
    dim = 2 ** op.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for w, c in sorted(op.terms.items(), key=lambda item: item[0].letters()):
        out += c * w.dense()
    return out


def sparse_matrix(op: PauliSum):
    """CSR matrix of a PauliSum; guard 2N <= 24.

    Each Pauli word is a signed permutation, assembled directly from its
    masks: column b maps to row b ^ x_mask with phase i^(y count) * (-1)^parity.
    """
    from scipy.sparse import csr_matrix

    nq = op.n_qubits
    if nq > 24:
        raise ValueError("sparse path limited to 24 qubits")
    dim = 1 << nq
    # bit q of the state index corresponds to qubit q+1; qubit 1 is the
    # leftmost kron factor, i.e. the most significant bit of the row index
    cols = np.arange(dim, dtype=np.int64)
    bitvals = np.zeros((nq, dim), dtype=bool)
    for q in range(nq):
        bitvals[q] = (cols >> (nq - 1 - q)) & 1
    total = None
    for w, c in sorted(op.terms.items(), key=lambda item: item[0].letters()):
        rows = cols.copy()
        phase = np.full(dim, c, dtype=complex)
        for q in range(nq):
            xq = (w.x_mask >> q) & 1
            zq = (w.z_mask >> q) & 1
            bit = bitvals[q]
            if xq and zq:  # Y
                phase = np.where(bit, phase * (-1j), phase * 1j)
            elif zq:  # Z
                phase = np.where(bit, -phase, phase)
            if xq:
                rows ^= 1 << (nq - 1 - q)
        mat = csr_matrix((phase, (rows, cols)), shape=(dim, dim))
        total = mat if total is None else total + mat
    if total is None:
        total = csr_matrix((dim, dim), dtype=complex)
    return total
