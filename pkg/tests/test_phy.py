import numpy as np
import pytest

from fdsec.phy import (AllocationPolicy, dl_sinr, eve_dl_capacity,
                       eve_dl_capacity_cov, eve_noise_cov, eve_ul_capacity,
                       secrecy_rates, si_coupling, ul_sinr, zf_receivers)
from fdsec.scenario import generate_drop


def _rand_cplx(shape, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_zf_receivers_delta_property():
    g = _rand_cplx((3, 6), 0)
    v = zf_receivers(g)
    assert v.shape == (3, 6)
    gram = np.einsum("ji,ni->jn", v.conj(), g)  # v_j^H g_n
    assert np.allclose(gram, np.eye(3), atol=1e-10)


def test_zf_receivers_empty():
    v = zf_receivers(np.zeros((0, 4), complex))
    assert v.shape == (0, 4)


def test_dl_sinr_manual():
    h = _rand_cplx((2, 4), 1)
    w = _rand_cplx((2, 4), 2)
    Z = np.eye(4) * 0.3
    P = np.array([0.5])
    f = _rand_cplx((1, 2), 3)
    s2 = 0.7
    val = dl_sinr(0, h, w, Z, P, f, s2)
    num = abs(h[0].conj() @ w[0]) ** 2
    den = abs(h[0].conj() @ w[1]) ** 2 + 0.5 * abs(f[0, 0]) ** 2 \
        + (h[0].conj() @ Z @ h[0]).real + s2
    assert abs(val - num / den) < 1e-12


def test_ul_sinr_scale_invariant_in_v():
    g = _rand_cplx((2, 4), 4)
    w = _rand_cplx((1, 4), 5)
    Z = 0.1 * np.eye(4)
    P = np.array([0.2, 0.4])
    h_si = _rand_cplx((4, 4), 6)
    v = zf_receivers(g)
    a = ul_sinr(0, g, v, w, Z, P, h_si, 1e-8, 1e-13)
    b = ul_sinr(0, g, 3.7 * v, w, Z, P, h_si, 1e-8, 1e-13)
    assert abs(a - b) / a < 1e-12


def test_ul_sinr_si_coupling_identity():
    # Tr(T_j Q) with T_j = rho H^H diag(|v|^2) H equals rho v^H diag(H Q H^H) v
    v = _rand_cplx(4, 7)
    H = _rand_cplx((4, 4), 8)
    Q = _rand_cplx((4, 4), 9)
    Q = Q @ Q.conj().T
    T = si_coupling(v, H, 1e-8)
    lhs = np.trace(T @ Q).real
    rhs = 1e-8 * float(np.sum(np.abs(v) ** 2 * np.diag(H @ Q @ H.conj().T).real))
    assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(lhs))


def test_eve_dl_capacity_rank_one_matches_cov():
    w = _rand_cplx(4, 10)
    L = _rand_cplx((4, 2), 11)
    Z = np.eye(4) * 0.2
    cap1 = eve_dl_capacity(w, L, Z, 1e-3)
    cap2 = eve_dl_capacity_cov(np.outer(w, w.conj()), L, Z, 1e-3)
    assert abs(cap1 - cap2) < 1e-9


def test_eve_ul_capacity_monotone_in_power():
    e = _rand_cplx(2, 12)
    L = _rand_cplx((4, 2), 13)
    Z = np.eye(4)
    caps = [eve_ul_capacity(p, e, L, Z, 1e-3) for p in (0.0, 0.1, 1.0)]
    assert caps[0] == 0.0 and caps[0] < caps[1] < caps[2]


def test_eve_noise_cov_hermitian_psd():
    L = _rand_cplx((4, 2), 14)
    Z = np.eye(4) * 0.5
    X = eve_noise_cov(L, Z, 1e-3)
    assert np.allclose(X, X.conj().T)
    assert np.linalg.eigvalsh(X)[0] > 0


def test_policy_properties():
    w = _rand_cplx((2, 4), 15)
    Z = np.eye(4) * 0.1
    P = np.array([0.3, 0.4, 0.5])
    pol = AllocationPolicy(w=w, Z=Z, P=P)
    assert abs(pol.q1_w - (np.sum(np.abs(w) ** 2) + 0.4)) < 1e-12
    assert abs(pol.q2_w - 1.2) < 1e-12
    W = pol.W
    assert W.shape == (2, 4, 4)
    assert np.allclose(W[0], np.outer(w[0], w[0].conj()))


def test_secrecy_rates_no_eavesdropper(desk_cfg):
    real = generate_drop(desk_cfg.replace(M=0), 3)
    w = _rand_cplx((2, 6), 16) * 1e-3
    pol = AllocationPolicy(w=w, Z=1e-8 * np.eye(6), P=1e-6 * np.ones(3))
    dl, ul = secrecy_rates(pol, real)
    # no eavesdropper: secrecy equals the user rate, strictly positive
    assert dl.shape == (2,) and ul.shape == (3,)
    assert np.all(dl > 0) and np.all(ul >= 0)


def test_secrecy_rates_clamped_nonnegative(desk_cfg, desk_drop):
    # absurdly weak beams: rate - leakage would go negative, clamp to 0
    pol = AllocationPolicy(w=1e-15 * np.ones((2, 6), complex),
                           Z=np.zeros((6, 6)), P=1e3 * np.ones(3))
    dl, ul = secrecy_rates(pol, desk_drop)
    assert np.all(dl >= 0.0) and np.all(ul >= 0.0)
    assert np.all(dl < 1e-6)
