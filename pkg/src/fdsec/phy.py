"""Link-level quantities: receivers, SINRs, leakage capacities, secrecy rates.

All functions take explicit arrays so they can be fed true channels,
estimates, or adversarially sampled channels without ceremony.  Downlink
SINR for user k:

    |h_k^H w_k|^2 / (sum_{r != k} |h_k^H w_r|^2 + sum_j P_j |f_{j,k}|^2
                     + h_k^H Z h_k + sigma_dl^2)

Uplink SINR for user j (after receive beamforming with v_j):

    P_j |g_j^H v_j|^2 / (sum_{n != j} P_n |g_n^H v_j|^2
        + rho v_j^H diag(H_si (Z + sum_k w_k w_k^H) H_si^H) v_j
        + sigma_ul^2 ||v_j||^2)

A multi-antenna eavesdropper m observes downlink user k at capacity
log2 det(I + X_m^{-1} L_m^H W_k L_m) and uplink user j at
log2(1 + P_j e_{j,m}^H X_m^{-1} e_{j,m}) where X_m = L_m^H Z L_m +
sigma_eve^2 I is its artificial-noise-plus-thermal covariance.
"""

from dataclasses import dataclass, field

import numpy as np

from .hermitian import herm


@dataclass
class AllocationPolicy:
    """One resource allocation: beamformers w (K, N_T), AN covariance Z, UL powers P."""

    w: np.ndarray
    Z: np.ndarray
    P: np.ndarray
    aux: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def W(self):
        """Rank-one covariances w_k w_k^H, stacked (K, N_T, N_T)."""
        return np.einsum("ki,kj->kij", self.w, self.w.conj())

    @property
    def q1_w(self):
        """Total downlink side power: sum_k ||w_k||^2 + Tr(Z)."""
        return float(np.sum(np.abs(self.w) ** 2) + np.trace(self.Z).real)

    @property
    def q2_w(self):
        """Total uplink transmit power: sum_j P_j."""
        return float(np.sum(self.P))


def zf_receivers(g):
    """Zero-forcing receive beamformers for the uplink users.

    g is (J, N_T) with rows g_j.  Returns v (J, N_T) such that
    v_j^H g_n = delta_{jn}: the v_j are the columns of G (G^H G)^{-1}
    where G stacks the g_j as columns.
    """
    g = np.asarray(g, dtype=complex)
    J, NT = g.shape if g.ndim == 2 else (0, 0)
    if J == 0:
        return np.zeros((0, NT), dtype=complex)
    if J > NT:
        raise ValueError(f"zero forcing needs J <= N_T, got J={J}, N_T={NT}")
    G = g.T  # N_T x J, column j is g_j
    gram = G.conj().T @ G
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > 1e12:
        raise np.linalg.LinAlgError(f"uplink channels nearly dependent (cond={cond:.3e})")
    # rows of the result are the columns of G (G^H G)^{-1}
    return np.linalg.solve(gram.T, G.T)


def dl_sinr(k, h, w, Z, P, f, sigma2_dl):
    """Downlink SINR of user k; f is (J, K) co-channel interference."""
    hk = h[k]
    sig = np.abs(hk.conj() @ w[k]) ** 2
    inter = sum(np.abs(hk.conj() @ w[r]) ** 2 for r in range(w.shape[0]) if r != k)
    cci = float(np.sum(np.asarray(P) * np.abs(f[:, k]) ** 2)) if len(P) else 0.0
    an = float((hk.conj() @ Z @ hk).real)
    return float(sig / (inter + cci + an + sigma2_dl))


def si_coupling(v_j, h_si, rho):
    """T_j = rho H_si^H diag(v_j v_j^H) H_si, the residual self-interference map.

    Tr(T_j Q) equals rho v_j^H diag(H_si Q H_si^H) v_j for Hermitian Q; the
    diag() models independent per-receive-antenna residual distortion.
    """
    d = np.abs(np.asarray(v_j)) ** 2
    return rho * (h_si.conj().T * d) @ h_si


def ul_sinr(j, g, v, w, Z, P, h_si, rho, sigma2_ul):
    """Uplink SINR of user j under receive beamformers v (J, N_T)."""
    vj = v[j]
    sig = P[j] * np.abs(g[j].conj() @ vj) ** 2
    inter = sum(P[n] * np.abs(g[n].conj() @ vj) ** 2 for n in range(g.shape[0]) if n != j)
    Tj = si_coupling(vj, h_si, rho)
    Q = Z + sum(np.outer(wk, wk.conj()) for wk in w) if len(w) else Z
    si = float(np.trace(Tj @ Q).real)
    noise = sigma2_ul * float(np.linalg.norm(vj) ** 2)
    return float(sig / (inter + si + noise))


def eve_noise_cov(L_m, Z, sigma2_eve):
    """X_m = L_m^H Z L_m + sigma_eve^2 I at eavesdropper m."""
    NR = L_m.shape[1]
    return herm(L_m.conj().T @ Z @ L_m) + sigma2_eve * np.eye(NR)


def eve_dl_capacity(w_k, L_m, Z, sigma2_eve):
    """log2 det(I + X_m^{-1} L^H w w^H L) = log2(1 + w^H L X^{-1} L^H w)."""
    X = eve_noise_cov(L_m, Z, sigma2_eve)
    a = L_m.conj().T @ w_k
    return float(np.log2(1.0 + (a.conj() @ np.linalg.solve(X, a)).real))


def eve_dl_capacity_cov(W_k, L_m, Z, sigma2_eve):
    """General-rank variant log2 det(I + X_m^{-1} L^H W L), for diagnostics."""
    X = eve_noise_cov(L_m, Z, sigma2_eve)
    A = np.eye(L_m.shape[1]) + np.linalg.solve(X, herm(L_m.conj().T @ W_k @ L_m))
    return float(np.log2(np.linalg.det(A).real))


def eve_ul_capacity(P_j, e_jm, L_m, Z, sigma2_eve):
    """log2(1 + P_j e^H X_m^{-1} e)."""
    X = eve_noise_cov(L_m, Z, sigma2_eve)
    return float(np.log2(1.0 + P_j * (e_jm.conj() @ np.linalg.solve(X, e_jm)).real))


def secrecy_rates(policy, realization, v=None):
    """Per-user secrecy rates on the true channels of a realization.

    Returns (dl_sec (K,), ul_sec (J,)); each is [rate - max_m leakage]^+.
    """
    cfg = realization.config
    K, J, M, _, _ = realization.dims
    if v is None:
        v = zf_receivers(realization.g)

    dl_sec = np.zeros(K)
    for k in range(K):
        rate = np.log2(
            1.0
            + dl_sinr(k, realization.h, policy.w, policy.Z, policy.P,
                      realization.f_true, cfg.sigma_dl_w)
        )
        leak = max(
            (eve_dl_capacity(policy.w[k], realization.L_true[m], policy.Z, cfg.sigma_eve_w)
             for m in range(M)),
            default=0.0,
        )
        dl_sec[k] = max(rate - leak, 0.0)

    ul_sec = np.zeros(J)
    for j in range(J):
        rate = np.log2(
            1.0
            + ul_sinr(j, realization.g, v, policy.w, policy.Z, policy.P,
                      realization.h_si, cfg.rho, cfg.sigma_ul_w)
        )
        leak = max(
            (eve_ul_capacity(policy.P[j], realization.e_true[m, j], realization.L_true[m],
                             policy.Z, cfg.sigma_eve_w)
             for m in range(M)),
            default=0.0,
        )
        ul_sec[j] = max(rate - leak, 0.0)
    return dl_sec, ul_sec
