import numpy as np
import pytest

from fdsec.hermitian import (check_hermitian, eig_hermitian, herm, is_psd,
                             principal_component, rank_estimate, real_embed)


def _rand_herm(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (A + A.conj().T)


def test_herm_symmetrizes():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    H = herm(A)
    assert np.allclose(H, H.conj().T)
    assert np.allclose(H, 0.5 * (A + A.conj().T))


def test_check_hermitian_accepts_and_rejects():
    H = _rand_herm(5, 1)
    out = check_hermitian(H + 1e-12 * 1j * np.eye(5))
    assert np.allclose(out, out.conj().T)
    with pytest.raises(ValueError):
        check_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        check_hermitian(np.zeros((2, 3)))


def test_check_hermitian_scale_aware():
    # deviation below tol * max|A| passes even for large matrices
    H = 1e6 * _rand_herm(3, 2)
    H2 = H.copy()
    H2[0, 1] += 1e-4  # 1e-10 relative
    check_hermitian(H2)
    with pytest.raises(ValueError):
        check_hermitian(H + np.array([[0, 10.0, 0], [0, 0, 0], [0, 0, 0]]))


def test_real_embed_eigenvalues_doubled():
    H = _rand_herm(4, 3)
    E = real_embed(H)
    assert np.allclose(E, E.T)
    wc = np.linalg.eigvalsh(H)
    wr = np.linalg.eigvalsh(E)
    assert np.allclose(np.sort(np.repeat(wc, 2)), np.sort(wr), atol=1e-10)


def test_real_embed_psd_iff():
    u = np.array([1.0 + 1j, -2.0])
    psd = np.outer(u, u.conj())
    assert np.linalg.eigvalsh(real_embed(psd))[0] > -1e-12
    indef = psd - 3.0 * np.eye(2)
    assert np.linalg.eigvalsh(real_embed(indef))[0] < 0


def test_rank_estimate():
    rng = np.random.default_rng(4)
    u = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    v = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    v = v - u * (u.conj() @ v) / np.linalg.norm(u) ** 2
    u, v = u / np.linalg.norm(u), v / np.linalg.norm(v)
    W1 = np.outer(u, u.conj())
    rank, ratio = rank_estimate(W1)
    assert rank == 1 and ratio < 1e-12
    W2 = np.outer(u, u.conj()) + 0.5 * np.outer(v, v.conj())
    rank, ratio = rank_estimate(W2)
    assert rank == 2 and abs(ratio - 0.5) < 1e-9
    rank, ratio = rank_estimate(np.zeros((3, 3)))
    assert rank == 0 and ratio == 0.0


def test_principal_component_phase_fixed():
    rng = np.random.default_rng(5)
    u = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    lam_true = 2.7
    A = lam_true * np.outer(u, u.conj()) / np.linalg.norm(u) ** 2
    lam, w = principal_component(A)
    assert abs(lam - lam_true) < 1e-9
    assert abs(np.linalg.norm(w) - 1.0) < 1e-12
    # first significant entry rotated onto the positive real axis
    nz = np.flatnonzero(np.abs(w) > 1e-8)
    assert abs(w[nz[0]].imag) < 1e-10 and w[nz[0]].real > 0
    assert np.allclose(lam * np.outer(w, w.conj()), A, atol=1e-9)


def test_is_psd_and_eig_guard():
    H = _rand_herm(4, 6)
    w, V = eig_hermitian(H)
    assert np.all(np.diff(w) >= 0)
    assert np.allclose(V @ np.diag(w) @ V.conj().T, H, atol=1e-10)
    assert is_psd(np.outer([1, 1j], [1, -1j]))
    assert not is_psd(-np.eye(2))
