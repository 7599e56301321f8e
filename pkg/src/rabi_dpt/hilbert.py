"""Truncated qubit-cavity Hilbert space: operators, Hamiltonian, Liouvillian.

Conventions, fixed project-wide:

* Tensor ordering is qubit factor first: full-space operators are
  kron(qubit_op, fock_op).  Basis index = s * n_max + n with s = 0 spin-up,
  s = 1 spin-down, n the Fock occupation.  Spin blocks are contiguous, so
  spin-resolved photon distributions are plain slices of the diagonal.
* Vectorization is row-major (numpy C order): vec(rho)[i*dim + j] = rho[i, j],
  i.e. vec = rho.ravel() and unvec = v.reshape(dim, dim).  Under this map
  vec(A rho B) = kron(A, B.T) vec(rho), and the master equation
      drho/dt = -i[H, rho] + kappa (2 a rho a^dag - a^dag a rho - rho a^dag a)
  becomes d vec(rho)/dt = L vec(rho) with

      L = -i (kron(H, I) - kron(I, H.T))
          + kappa (2 kron(a, conj(a)) - kron(n_op, I) - kron(I, n_op.T))

* The annihilation operator is truncated at n_max: a|n_max-1> is the top
  state it reaches, and a^dag is its conjugate transpose (so a^dag a is the
  exact truncated number operator; the pair is not a canonical conjugate pair
  on the top state, which is the usual price of truncation).

All operators are scipy.sparse matrices in CSR format; the Liouvillian has
O(1) stored entries per row, never densified during assembly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.sparse as sp
import scipy.special

from .model import ModelParams, ParameterError


@dataclass(frozen=True)
class FockCutoff:
    """Photon-space truncation: keep Fock states 0 .. n_max-1.

    tail_tol is the maximum tolerated total population in the top five Fock
    levels of a state for the truncation to be considered converged.  Solvers
    escalate the cutoff when a computed state breaches it.  n_max >= 8 is
    expected for production solves; smaller spaces are allowed for algebraic
    tests.
    """

    n_max: int
    tail_tol: float = 1e-8

    def __post_init__(self):
        if self.n_max < 1:
            raise ParameterError(f"n_max must be >= 1, got {self.n_max}")
        if not 0 < self.tail_tol < 1:
            raise ParameterError(f"tail_tol must be in (0, 1), got {self.tail_tol}")

    @property
    def dim(self) -> int:
        return 2 * self.n_max


def build_operators(cut: FockCutoff) -> dict:
    """Sparse operators on the truncated qubit (x) Fock space.

    Returns a dict with keys a, a_dag, n_op, sigma_z, sigma_plus, sigma_minus,
    x, p and identity.  x = (a^dag + a)/sqrt(2), p = i(a^dag - a)/sqrt(2).
    """
    n_max = cut.n_max
    sqrtn = np.sqrt(np.arange(1, n_max, dtype=float))
    a_f = sp.diags(sqrtn, offsets=1, shape=(n_max, n_max), format="csr")
    id_f = sp.identity(n_max, format="csr")
    id_q = sp.identity(2, format="csr")

    sz_q = sp.csr_matrix(np.diag([1.0, -1.0]))
    sp_q = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))  # sigma_+ |down> = |up>
    sm_q = sp.csr_matrix(np.array([[0.0, 0.0], [1.0, 0.0]]))

    a = sp.kron(id_q, a_f, format="csr")
    a_dag = a.conjugate().transpose().tocsr()
    ops = {
        "a": a,
        "a_dag": a_dag,
        "n_op": (a_dag @ a).tocsr(),
        "sigma_z": sp.kron(sz_q, id_f, format="csr"),
        "sigma_plus": sp.kron(sp_q, id_f, format="csr"),
        "sigma_minus": sp.kron(sm_q, id_f, format="csr"),
        "identity": sp.identity(2 * n_max, format="csr"),
    }
    ops["x"] = ((a_dag + a) / math.sqrt(2.0)).tocsr()
    ops["p"] = (1j * (a_dag - a) / math.sqrt(2.0)).tocsr()
    return ops


def hamiltonian(p: ModelParams, cut: FockCutoff) -> sp.csr_matrix:
    """Anisotropic Rabi Hamiltonian on the truncated space (sparse, Hermitian)."""
    ops = build_operators(cut)
    a, a_dag = ops["a"], ops["a_dag"]
    s_p, s_m = ops["sigma_plus"], ops["sigma_minus"]
    H = (p.omega_c * ops["n_op"] + 0.5 * p.Omega * ops["sigma_z"]
         - p.lambda_minus * (a @ s_p + a_dag @ s_m)
         - p.lambda_plus * (a @ s_m + a_dag @ s_p))
    return H.tocsr()


def parity_operator(cut: FockCutoff) -> sp.csr_matrix:
    """Excitation parity exp(i pi (a^dag a + sigma_+ sigma_-)), diagonal."""
    n_max = cut.n_max
    fock_sign = (-1.0) ** np.arange(n_max)
    diag = np.concatenate([-fock_sign, fock_sign])  # up block carries the qubit excitation
    return sp.diags(diag, format="csr")


def liouvillian(p: ModelParams, cut: FockCutoff) -> sp.csr_matrix:
    """Master-equation generator as a sparse matrix on vec(rho), row-major."""
    ops = build_operators(cut)
    H = hamiltonian(p, cut)
    a, n_op = ops["a"], ops["n_op"]
    dim = cut.dim
    ident = sp.identity(dim, format="csr")
    L = -1j * (sp.kron(H, ident) - sp.kron(ident, H.T))
    if p.kappa != 0:
        L = L + p.kappa * (2.0 * sp.kron(a, a.conjugate())
                           - sp.kron(n_op, ident) - sp.kron(ident, n_op.T))
    return L.tocsr()


def vec(rho: np.ndarray) -> np.ndarray:
    """Row-major vectorization of a density matrix."""
    return np.asarray(rho, dtype=complex).ravel()


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of vec."""
    return np.asarray(v, dtype=complex).reshape(dim, dim)


def trace_vector(dim: int) -> np.ndarray:
    """Dense row vector t with t @ vec(rho) = trace(rho)."""
    t = np.zeros(dim * dim)
    t[:: dim + 1] = 1.0
    return t


def adjoint_permutation(dim: int) -> np.ndarray:
    """Index permutation realizing the adjoint on vectorized matrices.

    conj(v[perm]) is vec(unvec(v)^dag); used for cheap in-place hermitization.
    """
    idx = np.arange(dim * dim).reshape(dim, dim)
    return idx.T.ravel()


def export_matrix_market(op: sp.spmatrix, path) -> None:
    """Write a sparse operator to a Matrix Market .mtx file."""
    scipy.io.mmwrite(str(path), sp.coo_matrix(op))


def read_matrix_market(path) -> sp.csr_matrix:
    return sp.csr_matrix(scipy.io.mmread(str(path)))


class DensityMatrix:
    """Dense density matrix on the truncated space with basic validation.

    Attributes: rho (complex ndarray), n_max.  Constructors for the common
    initial states used by the dynamics layer are provided as classmethods.
    """

    def __init__(self, rho: np.ndarray, n_max: int):
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (2 * n_max, 2 * n_max):
            raise ValueError(f"expected shape {(2*n_max, 2*n_max)}, got {rho.shape}")
        self.rho = rho
        self.n_max = n_max

    @property
    def dim(self) -> int:
        return 2 * self.n_max

    @classmethod
    def pure(cls, ket: np.ndarray, n_max: int) -> "DensityMatrix":
        ket = np.asarray(ket, dtype=complex)
        ket = ket / np.linalg.norm(ket)
        return cls(np.outer(ket, ket.conj()), n_max)

    @classmethod
    def fock(cls, n: int, n_max: int, spin: str = "up") -> "DensityMatrix":
        """|spin, n><spin, n| with spin in {'up', 'down'}."""
        ket = np.zeros(2 * n_max, dtype=complex)
        s = 0 if spin == "up" else 1
        ket[s * n_max + n] = 1.0
        return cls.pure(ket, n_max)

    @classmethod
    def coherent(cls, alpha: complex, n_max: int, spin: str = "up") -> "DensityMatrix":
        """Truncated coherent state |alpha> in the given spin sector."""
        n = np.arange(n_max)
        amps = np.exp(-0.5 * abs(alpha) ** 2) * alpha ** n / np.sqrt(
            scipy.special.gamma(n + 1.0))
        ket = np.zeros(2 * n_max, dtype=complex)
        s = 0 if spin == "up" else 1
        ket[s * n_max: (s + 1) * n_max] = amps
        return cls.pure(ket, n_max)

    def validate(self, herm_tol: float = 1e-10, eig_tol: float = 1e-8) -> None:
        """Check unit trace, Hermiticity and spectrum >= -eig_tol."""
        tr = np.trace(self.rho)
        if abs(tr - 1.0) > herm_tol:
            raise ValueError(f"trace deviates from 1 by {abs(tr - 1.0):.3e}")
        herm = np.max(np.abs(self.rho - self.rho.conj().T))
        if herm > herm_tol:
            raise ValueError(f"Hermiticity violation {herm:.3e}")
        w = np.linalg.eigvalsh(0.5 * (self.rho + self.rho.conj().T))
        if w.min() < -eig_tol:
            raise ValueError(f"negative eigenvalue {w.min():.3e}")
