"""Dense Hermitian matrix helpers.

Everything downstream (constraint blocks, the cone translation, rank
recovery) funnels through these few routines so that symmetrization and
tolerance policy live in exactly one place.
"""

import numpy as np

# Relative tolerance for accepting a matrix as Hermitian before symmetrizing.
TOL_HERM = 1e-9

# lambda_2 / lambda_1 threshold below which a PSD matrix counts as rank one.
RANK_ONE_RATIO = 1e-6


def herm(A):
    """Symmetrize: (A + A^H) / 2."""
    A = np.asarray(A, dtype=complex)
    return 0.5 * (A + A.conj().T)


def check_hermitian(A, tol=TOL_HERM, label=""):
    """Return the symmetrized matrix, or raise if A is too far from Hermitian.

    The deviation max|A - A^H| is compared against tol * max(1, max|A|),
    so the guard is scale-aware but still catches genuine asymmetry.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected square matrix{': ' + label if label else ''}, got {A.shape}")
    if A.size == 0:
        return A
    scale = max(1.0, float(np.abs(A).max()))
    dev = float(np.abs(A - A.conj().T).max())
    if dev > tol * scale:
        raise ValueError(
            f"matrix{' ' + label if label else ''} is not Hermitian: "
            f"deviation {dev:.3e} exceeds {tol:.1e} * {scale:.3e}"
        )
    return herm(A)


def real_embed(A):
    """Embed a complex Hermitian matrix into a real symmetric one.

    [[Re A, -Im A], [Im A, Re A]] is symmetric iff A is Hermitian, is PSD
    iff A is PSD, and carries each eigenvalue of A with doubled
    multiplicity.  Real-cone solvers consume this form directly.
    """
    A = np.asarray(A, dtype=complex)
    re, im = A.real, A.imag
    return np.block([[re, -im], [im, re]])


def eig_hermitian(A, tol=TOL_HERM):
    """Eigendecomposition with the Hermitian guard applied first.

    Returns (w, V) with eigenvalues ascending, columns of V orthonormal.
    """
    A = check_hermitian(A, tol=tol)
    return np.linalg.eigh(A)


def is_psd(A, tol=1e-9):
    """True if the smallest eigenvalue is >= -tol * max(1, |lambda|_max)."""
    w, _ = eig_hermitian(A)
    if w.size == 0:
        return True
    scale = max(1.0, float(np.abs(w).max()))
    return bool(w[0] >= -tol * scale)


def rank_estimate(A, ratio_tol=RANK_ONE_RATIO):
    """Numerical rank of a (nominally PSD) Hermitian matrix.

    Returns (rank, ratio) where ratio = lambda_2 / lambda_1 with
    eigenvalues sorted descending; ratio is 0.0 for matrices of size < 2
    or with non-positive leading eigenvalue.  rank counts eigenvalues
    exceeding ratio_tol * lambda_1.
    """
    w, _ = eig_hermitian(A)
    w = w[::-1]
    if w.size == 0 or w[0] <= 0.0:
        return 0, 0.0
    rank = int(np.sum(w > ratio_tol * w[0]))
    ratio = float(max(w[1], 0.0) / w[0]) if w.size >= 2 else 0.0
    return rank, ratio


def principal_component(A):
    """Largest eigenpair (lam, u) of a Hermitian matrix, ||u|| = 1.

    The phase is fixed by rotating the first significant entry of u to the
    positive real axis, which makes the recovery deterministic.
    """
    w, V = eig_hermitian(A)
    lam = float(w[-1])
    u = V[:, -1]
    nz = np.flatnonzero(np.abs(u) > 1e-8 * np.linalg.norm(u))
    if nz.size:
        u = u * np.exp(-1j * np.angle(u[nz[0]]))
    return lam, u
