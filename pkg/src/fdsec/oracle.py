"""Independent verification: adversarial sampling and tiny-instance bounds.

adversarial_check replays a recovered policy against the original
worst-case constraints by sampling the uncertainty balls (with a boundary
bias, since worst cases of ball-constrained quadratics sit on the
boundary) and evaluating the true SINR and leakage expressions.

restricted_grid_bound brute-forces a restricted policy family (beam from
a deterministic direction net, isotropic artificial noise) on tiny
instances, producing an upper bound that any claimed optimum must not
exceed.  Leakage feasibility of candidates is screened by a conservative
closed-form bound so the returned value is a true upper bound, then
confirmed by adversarial_check.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .engine import FEAS_TOL, UnitScale
from .phy import ul_sinr, zf_receivers
from .scenario import db_to_linear

_FAMILY_KEYS = {"C1": 1, "C2": 2, "C3": 3, "C4": 4, "grid": 9}


def _stream(seed, family, index):
    """Counter-based stream keyed by (seed, family, index): order-independent."""
    key = np.array([np.uint64(seed), np.uint64(_FAMILY_KEYS[family] * 1000 + index)])
    return np.random.Generator(np.random.Philox(key=key))


def _ball_points(rng, eps, dim, n, boundary_frac):
    """n draws from the complex ball of radius eps in C^dim, first chunk on the boundary."""
    z = rng.standard_normal((n, dim)) + 1j * rng.standard_normal((n, dim))
    nrm = np.linalg.norm(z, axis=1, keepdims=True)
    nrm[nrm == 0.0] = 1.0
    r = rng.random(n) ** (1.0 / (2 * dim))
    nb = int(round(boundary_frac * n))
    r[:nb] = 1.0
    return eps * (z / nrm) * r[:, None]


@dataclass
class FamilyCheck:
    """Sampling outcome for one constraint instance."""

    name: str
    n: int
    worst_margin: float
    violations: int
    worst_sample: dict = field(default_factory=dict)


@dataclass
class AdversarialReport:
    n_samples: int
    boundary_frac: float
    feas_tol: float
    families: list

    @property
    def total_violations(self):
        return sum(f.violations for f in self.families)

    @property
    def worst_margin(self):
        return min((f.worst_margin for f in self.families), default=math.inf)

    def family(self, name):
        for f in self.families:
            if f.name == name:
                return f
        raise KeyError(name)


def _batched_quad(X, a):
    """a^H X^{-1} a for stacked Hermitian X (n,d,d) and vectors a (n,d)."""
    sol = np.linalg.solve(X, a[..., None])[..., 0]
    return np.einsum("ni,ni->n", a.conj(), sol).real


def _eve_cov_stack(L, Z, sigma2):
    """X = L^H Z L + sigma2 I for stacked L (n, NT, NR)."""
    NR = L.shape[-1]
    X = np.einsum("nij,jk,nkl->nil", L.conj().transpose(0, 2, 1), Z, L)
    X = 0.5 * (X + X.conj().transpose(0, 2, 1))
    return X + sigma2 * np.eye(NR)


def adversarial_check(policy, realization, n_samples=10000, seed=0,
                      boundary_frac=0.25, feas_tol=FEAS_TOL):
    """Sample the uncertainty balls and test the policy against every target.

    Margins are dimensionless: SINR constraints report sinr/target - 1,
    leakage constraints report tolerance - capacity (bits).  A sample
    counts as a violation when its margin is below -feas_tol.  Zero-radius
    balls collapse to a single deterministic evaluation.
    """
    real = realization
    cfg = real.config
    K, J, M, NT, NR = real.dims
    w, Z, P = policy.w, policy.Z, policy.P
    gamma_dl, gamma_ul = cfg.gamma_dl_req, cfg.gamma_ul_req
    s2_dl, s2_ul, s2_e = cfg.sigma_dl_w, cfg.sigma_ul_w, cfg.sigma_eve_w
    families = []

    # C1: downlink SINR against the stacked CCI ball around the estimate
    gains = np.abs(np.einsum("ij,kj->ik", real.h.conj(), w)) ** 2  # (K user, K beam)
    for k in range(K):
        base = gains[k].sum() - gains[k, k] + (real.h[k].conj() @ Z @ real.h[k]).real + s2_dl
        eps = float(real.eps_cci[k]) if J else 0.0
        n = n_samples if eps > 0.0 else 1
        df = (_ball_points(_stream(seed, "C1", k), eps, J, n, boundary_frac)
              if eps > 0.0 else np.zeros((1, max(J, 1)), complex)[:, :J])
        cci = np.abs(real.f_hat[:, k][None, :] + df) ** 2 @ P if J else np.zeros(n)
        sinr = gains[k, k] / (base + cci)
        margin = sinr / gamma_dl - 1.0
        i = int(np.argmin(margin))
        families.append(FamilyCheck(
            f"C1[{k}]", n, float(margin[i]), int(np.sum(margin < -feas_tol)),
            {"df": df[i].copy()} if eps > 0.0 else {},
        ))

    # C2: uplink SINR, no uncertainty
    if J:
        v = zf_receivers(real.g)
        for j in range(J):
            sinr = ul_sinr(j, real.g, v, w, Z, P, real.h_si, cfg.rho, s2_ul)
            margin = sinr / gamma_ul - 1.0
            families.append(FamilyCheck(
                f"C2[{j}]", 1, float(margin), int(margin < -feas_tol)))

    # C3 / C4: leakage with the eavesdropper channel matrices inside the ball
    for m in range(M):
        eps_L = float(real.eps_L[m])
        nL = n_samples if eps_L > 0.0 else 1
        dL = _ball_points(_stream(seed, "C3", m), eps_L, NT * NR, nL, boundary_frac)
        L = real.L_hat[m][None, :, :] + dL.reshape(nL, NT, NR)
        X = _eve_cov_stack(L, Z, s2_e)
        for k in range(K):
            a = np.einsum("nij,i->nj", L.conj(), w[k])
            cap = np.log2(1.0 + _batched_quad(X, a))
            margin = cfg.r_tol_dl - cap
            i = int(np.argmin(margin))
            families.append(FamilyCheck(
                f"C3[{k},{m}]", nL, float(margin[i]), int(np.sum(margin < -feas_tol)),
                {"dL": dL[i].reshape(NT, NR).copy()} if eps_L > 0.0 else {},
            ))
        for j in range(J):
            eps_e = float(real.eps_e[m, j])
            if eps_e == 0.0 and eps_L == 0.0:
                n = 1
                Ls, Xs = L, X
                de = np.zeros((1, NR), complex)
            else:
                n = n_samples
                dLj = _ball_points(_stream(seed, "C4", m * J + j), eps_L, NT * NR,
                                   n, boundary_frac)
                Ls = real.L_hat[m][None, :, :] + dLj.reshape(n, NT, NR)
                Xs = _eve_cov_stack(Ls, Z, s2_e)
                de = _ball_points(_stream(seed, "C4", M * J + m * J + j), eps_e, NR,
                                  n, boundary_frac)
            e = real.e_hat[m, j][None, :] + de
            cap = np.log2(1.0 + P[j] * _batched_quad(Xs, e))
            margin = cfg.r_tol_ul - cap
            i = int(np.argmin(margin))
            families.append(FamilyCheck(
                f"C4[{j},{m}]", n, float(margin[i]), int(np.sum(margin < -feas_tol)),
                {"de": de[i].copy(), "dL": (Ls[i] - real.L_hat[m]).copy()} if n > 1 else {},
            ))

    return AdversarialReport(n_samples, boundary_frac, feas_tol, families)


# -- tiny-instance brute-force bound ------------------------------------------


def _plastic_net(n, d):
    """Low-discrepancy points in [0,1)^d from the generalized plastic sequence."""
    x = 2.0
    for _ in range(40):
        x = (1.0 + x) ** (1.0 / (d + 1))
    alpha = x ** -(1 + np.arange(d))
    idx = 1 + np.arange(n)[:, None]
    return np.mod(0.5 + idx * alpha[None, :], 1.0)


def sphere_net(n, dim):
    """Deterministic net of n unit vectors in C^dim (dim 2 or 3)."""
    if dim == 2:
        u = _plastic_net(n, 3)
        c = np.sqrt(u[:, 0])
        return np.stack([c * np.exp(2j * np.pi * u[:, 1]),
                         np.sqrt(1.0 - u[:, 0]) * np.exp(2j * np.pi * u[:, 2])], axis=1)
    if dim == 3:
        u = _plastic_net(n, 5)
        lo = np.minimum(u[:, 0], u[:, 1])
        hi = np.maximum(u[:, 0], u[:, 1])
        m = np.stack([lo, hi - lo, 1.0 - hi], axis=1)
        return np.sqrt(m) * np.exp(2j * np.pi * np.stack(
            [np.zeros(n), u[:, 3], u[:, 4]], axis=1))
    raise ValueError(f"direction net only built for 2 or 3 antennas, got {dim}")


def _leak_upper(quad_hat_sqrt, w_norm, eps, x_lb):
    """Conservative capacity bound log2(1 + ((|a| + eps*|w|)^2) / x_lb)."""
    return np.log2(1.0 + (quad_hat_sqrt + eps * w_norm) ** 2 / x_lb)


def restricted_grid_bound(realization, n_dirs=2000, q_points=24, seed=0,
                          confirm_samples=4000):
    """Upper bound on the P1 optimum from a restricted policy family.

    Beams are p * u with u from a deterministic direction net, the
    artificial noise is isotropic Z = q I, and the uplink power follows
    from the uplink SINR constraint at equality.  For each (u, q) the
    minimal p solving the downlink constraint against the exact worst-case
    co-channel interference is closed-form; eavesdropper constraints are
    screened with conservative closed-form bounds so every accepted
    candidate is certainly feasible, and the cheapest survivor is
    confirmed by adversarial_check before being returned.

    Returns (bound_watts, policy) with bound = +inf and policy = None when
    the restricted family has no feasible point on the grid.
    """
    from .phy import AllocationPolicy  # local import to avoid cycle noise

    real = realization
    cfg = real.config
    K, J, M, NT, NR = real.dims
    if K != 1 or J > 1 or M > 1 or NT > 3:
        raise ValueError("grid bound is only meant for tiny instances "
                         f"(K=1, J<=1, M<=1, N_T<=3); got K={K} J={J} M={M} N_T={NT}")

    scale = UnitScale.from_config(cfg)
    amp = scale.amp
    h = amp * real.h[0]
    s2_dl = scale.noise(cfg.sigma_dl_w)
    s2_ul = scale.noise(cfg.sigma_ul_w)
    s2_e = scale.noise(cfg.sigma_eve_w)
    gamma_dl, gamma_ul = cfg.gamma_dl_req, cfg.gamma_ul_req

    dirs = sphere_net(n_dirs, NT)
    a_dir = np.abs(dirs.conj() @ h) ** 2  # (n_dirs,)
    h2 = float(np.linalg.norm(h) ** 2)

    if J:
        g = amp * real.g
        v = zf_receivers(g)[0]
        h_si = amp * real.h_si
        T = h_si.conj().T @ np.diag(np.abs(v) ** 2) @ h_si * cfg.rho
        tr_T = float(np.trace(T).real)
        u_T_u = np.einsum("ni,ij,nj->n", dirs.conj(), T, dirs).real
        noise_ul = s2_ul * float(np.linalg.norm(v) ** 2)
        f_hat = amp * real.f_hat[0, 0]
        f_worst2 = (abs(f_hat) + amp * float(real.eps_f[0, 0])) ** 2
    else:
        tr_T = 0.0
        u_T_u = np.zeros(n_dirs)
        noise_ul = 0.0
        f_worst2 = 0.0

    q_grid = np.concatenate([[0.0], np.logspace(-2.0, 5.0, q_points - 1) * s2_dl])

    cand = []
    for q in q_grid:
        # P(p) = gamma_ul * (q tr_T + p u^T T u + noise); CCI_worst = P * f_worst2
        p_coef = a_dir - gamma_dl * f_worst2 * gamma_ul * u_T_u
        rhs = gamma_dl * (f_worst2 * gamma_ul * (q * tr_T + noise_ul) + q * h2 + s2_dl)
        ok = p_coef > 1e-12
        p = np.where(ok, rhs / np.maximum(p_coef, 1e-12), np.inf)
        q1 = p + q * NT
        for i in np.flatnonzero(ok & np.isfinite(q1)):
            cand.append((float(q1[i]), float(p[i]), float(q), int(i)))
    if not cand:
        return math.inf, None
    cand.sort()

    if M:
        L_hat = amp * real.L_hat[0]
        eps_L = amp * float(real.eps_L[0])
        smin = max(float(np.linalg.svd(L_hat, compute_uv=False)[-1]) - eps_L, 0.0)
        if J:
            e_hat = amp * real.e_hat[0, 0]
            eps_e = amp * float(real.eps_e[0, 0])
            e_worst = float(np.linalg.norm(e_hat)) + eps_e

    for q1, p, q, i in cand:
        u = dirs[i]
        P_j = gamma_ul * (q * tr_T + p * u_T_u[i] + noise_ul) if J else None
        if M:
            x_lb = s2_e + q * smin * smin
            w_scaled = math.sqrt(p) * u
            a_hat = float(np.linalg.norm(L_hat.conj().T @ w_scaled))
            if _leak_upper(a_hat, math.sqrt(p), eps_L, x_lb) > cfg.r_tol_dl:
                continue
            if J and np.log2(1.0 + P_j * e_worst ** 2 / x_lb) > cfg.r_tol_ul:
                continue
        # confirmed cheapest candidate: express in watts and double-check
        w_watts = (math.sqrt(p * scale.p0) * u)[None, :]
        policy = AllocationPolicy(
            w=w_watts,
            Z=q * scale.p0 * np.eye(NT),
            P=np.array([P_j * scale.p0]) if J else np.zeros(0),
            meta={"scheme": "grid-oracle", "direction_index": i},
        )
        report = adversarial_check(policy, real, n_samples=confirm_samples,
                                   seed=seed, boundary_frac=0.5)
        if report.total_violations == 0:
            return q1 * scale.p0, policy
    return math.inf, None
