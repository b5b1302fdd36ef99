"""Worst-case constraint builders.

Each builder emits an LMI block (or a plain affine constraint when the
relevant uncertainty radius is zero) that is affine in the decision
variables: downlink covariances W_k, artificial-noise covariance Z,
uplink powers P_j, and the non-negative multipliers introduced by the
robust reformulations.  Builders reference variables by id only, so the
same code serves the downlink-power problem, the uplink-power problem,
the scalarized trade-off problem, and the restricted second-stage
program used during beamformer recovery.

The lifting pattern: a constraint that must hold for every error vector
delta with ||delta|| <= eps is a quadratic matrix inequality in delta;
the S-procedure (scalar case) or its generalization to matrix balls
(Frobenius-bounded error blocks) converts it into one finite-dimensional
LMI with one extra non-negative multiplier.  The uplink leakage
constraint couples two independent error balls, so a Hermitian slack
matrix M splits it into two single-ball LMIs first.
"""

import numpy as np

from .conic import (AffineConstraint, CongruenceTerm, GEQ, LEQ, LinearForm, LmiBlock,
                    ScalarTerm, TraceTerm)
from .hermitian import herm


def _corner_unit(dim):
    F = np.zeros((dim, dim), dtype=complex)
    F[-1, -1] = 1.0
    return F


def build_c1_lmi(name, h_k, f_hat_k, eps_k, sigma2_dl, gamma_dl, wid_k, wids, zid, pids, delta_id):
    """Worst-case downlink SINR constraint for one user.

    With uncertain co-channel interference f = f_hat + delta,
    ||delta|| <= eps_k, the requirement SINR_k >= gamma becomes, after the
    S-procedure with multiplier delta_k >= 0, the (J+1) x (J+1) block

        [[delta_k I - diag(P),            -(P o f_hat)],
         [-(P o f_hat)^H,  -delta_k eps^2 - sigma^2 - sum_j P_j |f_hat_j|^2
                            - Tr(h h^H Z)]]
        - B^H (sum_{r != k} W_r - W_k / gamma) B  >= 0,   B = [0 ... 0 h_k].

    The off-diagonal couples the errors to the powers, so each P_j carries
    one Hermitian coefficient holding its diagonal, cross, and corner
    entries; the block stays affine in all variables.  With eps_k = 0 (or
    no uplink users) the ball collapses and the constraint degenerates to
    the nominal affine SINR inequality.
    """
    h_k = np.asarray(h_k, dtype=complex).ravel()
    f_hat_k = np.asarray(f_hat_k, dtype=complex).ravel()
    J = f_hat_k.size
    H = np.outer(h_k, h_k.conj())

    if J == 0 or eps_k == 0.0:
        form = LinearForm()
        form.add(wid_k, H / gamma_dl)
        for r, wid in enumerate(wids):
            if wid != wid_k:
                form.add(wid, -H)
        form.add(zid, -H)
        for j, pid in enumerate(pids):
            form.add(pid, -float(np.abs(f_hat_k[j]) ** 2))
        return AffineConstraint(name, form, GEQ, sigma2_dl)

    d = J + 1
    const = np.zeros((d, d), dtype=complex)
    const[-1, -1] = -sigma2_dl
    B = np.zeros((len(h_k), d), dtype=complex)
    B[:, -1] = h_k

    terms = []
    F_delta = np.eye(d, dtype=complex)
    F_delta[-1, -1] = -float(eps_k) ** 2
    terms.append(ScalarTerm(delta_id, F_delta))
    for j, pid in enumerate(pids):
        F = np.zeros((d, d), dtype=complex)
        F[j, j] = -1.0
        F[j, -1] = -f_hat_k[j]
        F[-1, j] = -np.conj(f_hat_k[j])
        F[-1, -1] = -float(np.abs(f_hat_k[j]) ** 2)
        terms.append(ScalarTerm(pid, F))
    terms.append(TraceTerm(zid, H, -_corner_unit(d)))
    for r, wid in enumerate(wids):
        scale = 1.0 / gamma_dl if wid == wid_k else -1.0
        terms.append(CongruenceTerm(wid, B, scale))
    return LmiBlock(name, d, herm(const), terms)


def build_c2(name, j, v, g, h_si, rho, sigma2_ul, gamma_ul, wids, zid, pids):
    """Uplink SINR constraint for user j, affine in (P, Z, W).

    P_j |g_j^H v_j|^2 >= gamma * (sum_{n != j} P_n |g_n^H v_j|^2
        + Tr(T_j (Z + sum_k W_k)) + sigma_ul^2 ||v_j||^2)

    with T_j = rho H_si^H diag(v_j v_j^H) H_si the residual
    self-interference coupling.  Uplink CSI is perfect, so no lift is
    needed; with zero-forcing receivers the cross coefficients vanish.
    """
    vj = np.asarray(v[j], dtype=complex)
    Tj = rho * (h_si.conj().T * (np.abs(vj) ** 2)) @ h_si
    form = LinearForm()
    for n, pid in enumerate(pids):
        gain = float(np.abs(g[n].conj() @ vj) ** 2)
        form.add(pid, gain if n == j else -gamma_ul * gain)
    form.add(zid, -gamma_ul * herm(Tj))
    for wid in wids:
        form.add(wid, -gamma_ul * herm(Tj))
    rhs = gamma_ul * sigma2_ul * float(np.linalg.norm(vj) ** 2)
    return AffineConstraint(name, form, GEQ, rhs)


def build_c3_lmi(name, L_hat_m, eps_L_m, sigma2_eve, xi_dl, wid_k, zid, t_id):
    """Worst-case downlink leakage constraint for one (user, eavesdropper) pair.

    Requires L^H W_k L <= xi (L^H Z L + sigma_eve^2 I) for every
    L = L_hat + Delta with ||Delta||_F <= eps.  The matrix-ball
    S-procedure with multiplier t >= 0 gives the (N_R + N_T) block

        [[xi Lh^H Z Lh + (xi sigma^2 - t) I,   xi Lh^H Z       ],
         [xi Z Lh,                             xi Z + t/eps^2 I]]
        - [Lh I]^H W_k [Lh I]  >= 0.

    At eps = 0 the block shrinks to the nominal N_R-dimensional LMI.
    """
    L_hat = np.asarray(L_hat_m, dtype=complex)
    NT, NR = L_hat.shape

    if eps_L_m == 0.0:
        const = xi_dl * sigma2_eve * np.eye(NR, dtype=complex)
        terms = [
            CongruenceTerm(zid, L_hat, xi_dl),
            CongruenceTerm(wid_k, L_hat, -1.0),
        ]
        return LmiBlock(name, NR, const, terms)

    d = NR + NT
    B = np.hstack([L_hat, np.eye(NT, dtype=complex)])  # N_T x (N_R + N_T)
    const = np.zeros((d, d), dtype=complex)
    const[:NR, :NR] = xi_dl * sigma2_eve * np.eye(NR)
    F_t = np.zeros((d, d), dtype=complex)
    F_t[:NR, :NR] = -np.eye(NR)
    F_t[NR:, NR:] = np.eye(NT) / float(eps_L_m) ** 2
    terms = [
        ScalarTerm(t_id, F_t),
        CongruenceTerm(zid, B, xi_dl),
        CongruenceTerm(wid_k, B, -1.0),
    ]
    return LmiBlock(name, d, const, terms)


def build_c4_lmis(name_a, name_b, e_hat_jm, eps_e_jm, L_hat_m, eps_L_m, sigma2_eve, xi_ul,
                  pid_j, mid_jm, zid, alpha_id, beta_id):
    """Worst-case uplink leakage constraints for one (user, eavesdropper) pair.

    The target P_j e e^H <= xi (L^H Z L + sigma_eve^2 I) quantifies over
    two independent balls (e and L), so a Hermitian slack M_{j,m} splits it:

      (a)  P_j e e^H <= M        for all e = e_hat + delta, ||delta|| <= eps_e
      (b)  M <= xi (L^H Z L + sigma_eve^2 I)   for all ||Delta_L||_F <= eps_L

    Each side is lifted with its own multiplier (alpha, beta >= 0):

      (a) [[M - P_j e^ e^^H - alpha I,  -P_j e^],
           [-P_j e^^H,                  -P_j + alpha/eps_e^2]] >= 0
      (b) [[xi Lh^H Z Lh + (xi sigma^2 - beta) I - M,  xi Lh^H Z],
           [xi Z Lh,                                   xi Z + beta/eps_L^2 I]] >= 0.

    Zero radii collapse the corresponding block to its nominal form; with
    both radii zero the pair merges into the single affine-in-(P, Z) LMI
    xi (L^H Z L + sigma^2 I) - P_j e e^H >= 0 and no slack is needed
    (mid_jm is None in that case).
    """
    e_hat = np.asarray(e_hat_jm, dtype=complex).ravel()
    L_hat = np.asarray(L_hat_m, dtype=complex)
    NT, NR = L_hat.shape
    ee = np.outer(e_hat, e_hat.conj())

    if mid_jm is None:
        const = xi_ul * sigma2_eve * np.eye(NR, dtype=complex)
        terms = [CongruenceTerm(zid, L_hat, xi_ul), ScalarTerm(pid_j, -ee)]
        return [LmiBlock(name_b, NR, const, terms)]

    blocks = []

    if eps_e_jm == 0.0:
        terms = [CongruenceTerm(mid_jm, np.eye(NR, dtype=complex), 1.0), ScalarTerm(pid_j, -ee)]
        blocks.append(LmiBlock(name_a, NR, np.zeros((NR, NR), dtype=complex), terms))
    else:
        d = NR + 1
        sel = np.hstack([np.eye(NR, dtype=complex), np.zeros((NR, 1), dtype=complex)])
        F_p = np.zeros((d, d), dtype=complex)
        F_p[:NR, :NR] = -ee
        F_p[:NR, -1] = -e_hat
        F_p[-1, :NR] = -e_hat.conj()
        F_p[-1, -1] = -1.0
        F_a = np.zeros((d, d), dtype=complex)
        F_a[:NR, :NR] = -np.eye(NR)
        F_a[-1, -1] = 1.0 / float(eps_e_jm) ** 2
        terms = [
            CongruenceTerm(mid_jm, sel, 1.0),
            ScalarTerm(pid_j, F_p),
            ScalarTerm(alpha_id, F_a),
        ]
        blocks.append(LmiBlock(name_a, d, np.zeros((d, d), dtype=complex), terms))

    if eps_L_m == 0.0:
        const = xi_ul * sigma2_eve * np.eye(NR, dtype=complex)
        terms = [
            CongruenceTerm(zid, L_hat, xi_ul),
            CongruenceTerm(mid_jm, np.eye(NR, dtype=complex), -1.0),
        ]
        blocks.append(LmiBlock(name_b, NR, const, terms))
    else:
        d = NR + NT
        B = np.hstack([L_hat, np.eye(NT, dtype=complex)])
        selb = np.hstack([np.eye(NR, dtype=complex), np.zeros((NR, NT), dtype=complex)])
        const = np.zeros((d, d), dtype=complex)
        const[:NR, :NR] = xi_ul * sigma2_eve * np.eye(NR)
        F_b = np.zeros((d, d), dtype=complex)
        F_b[:NR, :NR] = -np.eye(NR)
        F_b[NR:, NR:] = np.eye(NT) / float(eps_L_m) ** 2
        terms = [
            ScalarTerm(beta_id, F_b),
            CongruenceTerm(zid, B, xi_ul),
            CongruenceTerm(mid_jm, selb, -1.0),
        ]
        blocks.append(LmiBlock(name_b, d, const, terms))
    return blocks


def build_epigraph(lam, q1_star, q2_star, wids, zid, pids, tau_id, nt):
    """Scalarization constraints lam_i (Q_i - Q_i^*) <= tau, i = 1, 2.

    Q1 = sum_k Tr(W_k) + Tr(Z), Q2 = sum_j P_j.  A zero weight reduces the
    row to tau >= 0.
    """
    lam1, lam2 = float(lam[0]), float(lam[1])
    eye = np.eye(nt, dtype=complex)
    out = []

    form1 = LinearForm({tau_id: -1.0})
    if lam1 > 0.0:
        for wid in wids:
            form1.add(wid, lam1 * eye)
        form1.add(zid, lam1 * eye)
    out.append(AffineConstraint("C9:dl", form1, LEQ, lam1 * float(q1_star)))

    form2 = LinearForm({tau_id: -1.0})
    if lam2 > 0.0:
        for pid in pids:
            form2.add(pid, lam2)
    out.append(AffineConstraint("C9:ul", form2, LEQ, lam2 * float(q2_star)))
    return out
