"""Quasi-energy spectrum of the one-period operator and asymptotic mixing.

Eigenstates of U ("Floquet states") diagonalize the stroboscopic
dynamics: U |alpha_j> = exp(-i E_j / hbar) |alpha_j> with E_j defined
modulo 2*pi*hbar.  Averaged over long times the probability of reaching
momentum n from n0 loses all phase information and becomes

    P(n|n0) = sum_j |<n0|alpha_j>|^2 |<n|alpha_j>|^2,

a doubly stochastic matrix whose structure exposes the transport
barriers.  The decomposition uses a complex Schur factorization: for a
unitary (hence normal) matrix the Schur basis is an orthonormal
eigenbasis, which numpy's general eigensolver does not guarantee.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import schur

from .quantum import PeriodOperator, unitarity_defect

UNITARITY_REJECT = 1e-6
RECONSTRUCTION_TOL = 1e-8
DEGENERACY_ANGLE = 1e-10


@dataclass
class FloquetDecomposition:
    """Orthonormal Floquet eigenbasis of a one-period operator.

    quasi_energies are in [0, 2*pi*hbar); vectors[:, j] is |alpha_j>.
    degenerate_clusters lists index groups whose eigenvalue angles
    coincide within 1e-10 (the asymptotic formula is blind to mixing
    inside such a cluster; flagged, not resolved).
    """

    quasi_energies: np.ndarray
    vectors: np.ndarray
    hbar: float
    degenerate_clusters: tuple

    @property
    def has_degeneracies(self) -> bool:
        return len(self.degenerate_clusters) > 0

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.exp(-1j * self.quasi_energies / self.hbar)


def _degenerate_clusters(angles: np.ndarray) -> tuple:
    """Group indices whose angles (mod 2*pi) agree within tolerance."""
    order = np.argsort(angles)
    srt = angles[order]
    gaps = np.diff(srt)
    breaks = np.flatnonzero(gaps > DEGENERACY_ANGLE)
    groups = np.split(order, breaks + 1)
    # the circle wraps: first and last group may be one cluster
    if len(groups) > 1 and (srt[0] + 2.0 * np.pi - srt[-1]) <= DEGENERACY_ANGLE:
        groups[0] = np.concatenate([groups[-1], groups[0]])
        groups.pop()
    return tuple(tuple(int(i) for i in g) for g in groups if len(g) > 1)


def decompose(U, hbar: float | None = None) -> FloquetDecomposition:
    """Spectral decomposition of a unitary period operator.

    Accepts a PeriodOperator or a plain matrix (then hbar is required).
    Rejects inputs whose unitarity defect exceeds 1e-6, which signals an
    upstream construction error rather than roundoff.
    """
    if isinstance(U, PeriodOperator):
        hbar = U.basis.hbar
        U = U.U
    if hbar is None:
        raise ValueError("hbar is required when U is a plain matrix")
    defect = unitarity_defect(U)
    if defect > UNITARITY_REJECT:
        raise ValueError(f"U is not unitary (defect {defect:.2e})")

    T, Z = schur(U, output="complex")
    lam = np.diag(T)
    angles = np.mod(-np.angle(lam), 2.0 * np.pi)
    quasi = hbar * angles
    clusters = _degenerate_clusters(angles)

    # Within a degenerate cluster the eigenbasis is arbitrary; fix it by
    # diagonalizing the momentum label there.  Tunneling doublets then
    # come out momentum-localized instead of as even/odd mixtures, which
    # is also what any finite-time average of |U^t| produces, since the
    # intra-cluster splitting is far too small to dephase.
    idx = np.arange(U.shape[0], dtype=float)
    for cluster in clusters:
        cols = list(cluster)
        Zc = Z[:, cols]
        block = Zc.conj().T @ (idx[:, None] * Zc)
        _, V = np.linalg.eigh(0.5 * (block + block.conj().T))
        Z[:, cols] = Zc @ V

    recon = np.max(np.abs(U - (Z * lam) @ Z.conj().T))
    if recon > RECONSTRUCTION_TOL:
        raise RuntimeError(
            f"Schur reconstruction residual {recon:.2e} exceeds tolerance; "
            "input may be far from normal")

    return FloquetDecomposition(
        quasi_energies=quasi, vectors=Z, hbar=hbar,
        degenerate_clusters=clusters)


def asymptotic_distribution(dec: FloquetDecomposition, n0: int) -> np.ndarray:
    """Long-time-averaged probability over n for a start in ladder state n0.

    n0 indexes rows of the operator (array index, not the signed
    momentum quantum number).
    """
    A = np.abs(dec.vectors)**2
    if not 0 <= n0 < A.shape[0]:
        raise ValueError(f"n0 must index the basis, got {n0}")
    return A @ A[n0]


def asymptotic_matrix(dec: FloquetDecomposition) -> np.ndarray:
    """All-to-all asymptotic mixing matrix; symmetric, doubly stochastic."""
    A = np.abs(dec.vectors)**2
    return A @ A.T


def asymptotic_from_density(dec: FloquetDecomposition,
                            rho0: np.ndarray) -> np.ndarray:
    """Asymptotic distribution for a mixed initial state rho0."""
    weights = np.real(np.einsum("ij,ik,kj->j", dec.vectors.conj(), rho0,
                                dec.vectors))
    A = np.abs(dec.vectors)**2
    return A @ weights
