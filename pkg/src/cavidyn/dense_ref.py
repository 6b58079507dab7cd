"""Dense Fock-basis reference propagation for system+bath Hamiltonians.

Brute-force companion to the variational propagator: every mode is truncated
at an explicit occupation cutoff, the Hamiltonian is materialized as a dense
matrix over |system label> x |v_1 ... v_Nb>, and states evolve through an
eigendecomposition.  Exponential scaling restricts this to a handful of modes,
which is exactly its role -- an independent check, not a production path.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lgamma

import numpy as np

from .constants import HBAR_EV_FS
from .models import SystemBathHamiltonian


def boson_destroy(cutoff: int) -> np.ndarray:
    """Annihilation operator on the {|0> .. |cutoff>} ladder."""
    n = cutoff + 1
    a = np.zeros((n, n))
    for v in range(1, n):
        a[v - 1, v] = np.sqrt(v)
    return a


@dataclass(frozen=True)
class FockSpace:
    """Product basis |system> x |v_1..v_Nb> with per-mode cutoffs."""

    n_sys: int
    cutoffs: tuple[int, ...]

    @property
    def mode_dims(self) -> tuple[int, ...]:
        return tuple(c + 1 for c in self.cutoffs)

    @property
    def dim(self) -> int:
        return self.n_sys * int(np.prod(self.mode_dims, dtype=np.int64))

    def mode_operator(self, q: int, op: np.ndarray) -> np.ndarray:
        """Lift a single-mode operator to the full bath space (no system factor)."""
        out = np.ones((1, 1))
        for j, d in enumerate(self.mode_dims):
            out = np.kron(out, op if j == q else np.eye(d))
        return out

    def system_operator(self, op: np.ndarray) -> np.ndarray:
        bath_dim = int(np.prod(self.mode_dims, dtype=np.int64))
        return np.kron(op, np.eye(bath_dim))

    def hamiltonian(self, h: SystemBathHamiltonian) -> np.ndarray:
        if h.n_sys != self.n_sys or h.n_modes != len(self.cutoffs):
            raise ValueError("Hamiltonian does not fit this Fock space")
        bath_dim = int(np.prod(self.mode_dims, dtype=np.int64))
        out = np.kron(h.e_sys.astype(complex), np.eye(bath_dim))
        for q in range(h.n_modes):
            a = self.mode_operator(q, boson_destroy(self.cutoffs[q]))
            adag = a.T
            out += h.mode_freqs[q] * self.system_operator(np.eye(self.n_sys)) @ np.kron(
                np.eye(self.n_sys), adag @ a
            )
            for n in range(self.n_sys):
                for n2 in range(self.n_sys):
                    cc = h.coup_create[n, n2, q]
                    ca = h.coup_annihilate[n, n2, q]
                    if cc == 0 and ca == 0:
                        continue
                    proj = np.zeros((self.n_sys, self.n_sys))
                    proj[n, n2] = 1.0
                    out += np.kron(proj, cc * adag + ca * a)
        return out

    def coherent_bath_vector(self, f: np.ndarray) -> np.ndarray:
        """Normalized coherent state prod_q |f_q> over the bath modes."""
        out = np.ones(1, dtype=complex)
        for q, c in enumerate(self.cutoffs):
            v = np.arange(c + 1)
            if f[q] == 0:
                amp = np.zeros(c + 1, dtype=complex)
                amp[0] = 1.0
            else:
                lf = np.log(complex(f[q]))
                amp = np.exp(v * lf - 0.5 * np.array([lgamma(k + 1) for k in v]))
                amp *= np.exp(-0.5 * abs(f[q]) ** 2)
            out = np.kron(out, amp)
        return out

    def multiconfig_vector(self, amplitudes: np.ndarray, displacements: np.ndarray) -> np.ndarray:
        """Dense vector of sum_{m,n} A_mn |n> x |f_m> (normalized coherent states).

        amplitudes: (M, n_sys); displacements: (M, n_modes).
        """
        out = np.zeros(self.dim, dtype=complex)
        for m in range(amplitudes.shape[0]):
            bath = self.coherent_bath_vector(displacements[m])
            for n in range(self.n_sys):
                if amplitudes[m, n] == 0:
                    continue
                sys_vec = np.zeros(self.n_sys, dtype=complex)
                sys_vec[n] = amplitudes[m, n]
                out += np.kron(sys_vec, bath)
        return out

    def system_populations(self, psi: np.ndarray) -> np.ndarray:
        bath_dim = int(np.prod(self.mode_dims, dtype=np.int64))
        return np.abs(psi.reshape(self.n_sys, bath_dim)) ** 2 @ np.ones(bath_dim)

    def mode_occupation(self, psi: np.ndarray, q: int) -> float:
        num = self.system_operator(np.eye(self.n_sys)) @ np.kron(
            np.eye(self.n_sys),
            self.mode_operator(q, boson_destroy(self.cutoffs[q])).T
            @ self.mode_operator(q, boson_destroy(self.cutoffs[q])),
        )
        return float(np.real(psi.conj() @ num @ psi))


class DensePropagator:
    """exp(-iHt/hbar) through a one-time eigendecomposition."""

    def __init__(self, h_matrix: np.ndarray, hermitian: bool = True):
        if hermitian:
            self.vals, self.vecs = np.linalg.eigh(h_matrix)
            self.vinv = self.vecs.conj().T
        else:
            self.vals, self.vecs = np.linalg.eig(h_matrix)
            self.vinv = np.linalg.inv(self.vecs)

    def apply(self, psi: np.ndarray, t: float) -> np.ndarray:
        return self.vecs @ (np.exp(-1j * self.vals * t / HBAR_EV_FS) * (self.vinv @ psi))

    def trajectory(self, psi: np.ndarray, times: np.ndarray) -> np.ndarray:
        coeff = self.vinv @ psi
        phases = np.exp(-1j * np.outer(np.asarray(times, float), self.vals) / HBAR_EV_FS)
        return (phases * coeff[None, :]) @ self.vecs.T


def thermal_fock_weights(omega: float, beta: float, cutoff: int) -> np.ndarray:
    """Boltzmann weights exp(-beta*omega*v)/Z on the truncated ladder."""
    if omega <= 0 or beta <= 0:
        raise ValueError("thermal weights need omega > 0 and beta > 0")
    w = np.exp(-beta * omega * np.arange(cutoff + 1))
    return w / w.sum()
