"""Comparison scheme: downlink beam directions fixed by zero forcing.

Each user's beam direction is the normalized projection of its channel
onto the orthogonal complement of the other users' channels, so the
multiuser interference terms vanish identically.  Only the per-user power
scalars, the artificial-noise covariance, and the uplink powers are
optimized, under the identical constraint set as the full scheme, which
makes the baseline feasible set a subset of the full one.
"""

import math
from dataclasses import dataclass

import numpy as np

from .conic import INFEASIBLE, OPTIMAL
from .engine import assemble, solve
from .phy import AllocationPolicy, secrecy_rates, zf_receivers
from .sweep import ParetoPoint, lambda_grid


def zf_directions(h):
    """Unit beam directions orthogonal to all other users' channels.

    h is (K, N_T).  Returns (K, N_T) with ||w_k|| = 1 and w_k^H h_i = 0
    for i != k.  A channel falling (numerically) inside the span of the
    others leaves no usable direction and raises LinAlgError; callers
    count such drops as rejected.
    """
    h = np.asarray(h, dtype=complex)
    K, NT = h.shape
    if K > NT:
        raise np.linalg.LinAlgError(f"cannot zero-force {K} users with {NT} antennas")
    dirs = np.zeros_like(h)
    for k in range(K):
        proj = h[k].copy()
        others = np.delete(h, k, axis=0)
        if others.size:
            q, _ = np.linalg.qr(others.T)
            proj = proj - q @ (q.conj().T @ proj)
        nrm = np.linalg.norm(proj)
        if nrm <= 1e-9 * np.linalg.norm(h[k]):
            raise np.linalg.LinAlgError(f"user {k} channel lies in the span of the others")
        dirs[k] = proj / nrm
    return dirs


@dataclass
class BaselineSolution:
    """Solved fixed-direction allocation (powers in watts)."""

    status: str
    policy: AllocationPolicy | None
    directions: np.ndarray
    q1_w: float | None
    q2_w: float | None
    tau_w: float | None
    solve_ms: float


def assemble_baseline(problem, realization, lam=None, q1_star=None, q2_star=None,
                      directions=None):
    """Assemble the fixed-direction variant of P1/P2/P3.

    The full program is built first, then each W_k is replaced by
    p_k * (w_hat_k w_hat_k^H) with a scalar p_k >= 0; beam directions are
    unit vectors so p_k is exactly the power carried by user k's beam.
    """
    dirs = zf_directions(realization.h) if directions is None else directions
    prog = assemble(problem, realization, lam=lam, q1_star=q1_star, q2_star=q2_star)
    wids = prog.meta["ids"]["W"]
    sub = {wid: (f"p{k}", dirs[k]) for k, wid in enumerate(wids)}
    prog2, vid_map = prog.rank_one_substitute(sub, name=prog.name + ":baseline")
    old = prog2.meta["ids"]
    prog2.meta["ids"] = {
        "p": [vid_map[wid] for wid in wids],
        "Z": vid_map[old["Z"]],
        "P": [vid_map[pid] for pid in old["P"]],
        "tau": vid_map[old["tau"]] if old["tau"] is not None else None,
    }
    prog2.meta["scheme"] = "baseline"
    prog2.meta["directions"] = dirs
    return prog2


def solve_baseline(problem, realization, lam=None, q1_star=None, q2_star=None,
                   backend=None, directions=None):
    """Solve one fixed-direction problem and build the rank-one-by-construction policy."""
    prog = assemble_baseline(problem, realization, lam=lam, q1_star=q1_star,
                             q2_star=q2_star, directions=directions)
    rep = solve(prog, backend)
    dirs = prog.meta["directions"]
    if rep.status != OPTIMAL:
        return rep, BaselineSolution(rep.status, None, dirs, None, None, None, rep.solve_ms)

    ids = prog.meta["ids"]
    scale = prog.meta["scale"]
    p = np.array([max(rep.values[pid], 0.0) for pid in ids["p"]])
    w = np.sqrt(p * scale.p0)[:, None] * dirs
    policy = AllocationPolicy(
        w=w,
        Z=rep.values[ids["Z"]] * scale.p0,
        P=np.array([rep.values[pid] for pid in ids["P"]]) * scale.p0,
        aux={},
        meta={"problem": problem, "lam": lam, "seed": realization.seed,
              "scheme": "baseline", "directions": dirs},
    )
    tau_w = rep.objective_w if problem == "P3" else None
    sol = BaselineSolution(OPTIMAL, policy, dirs, policy.q1_w, policy.q2_w, tau_w,
                           rep.solve_ms)
    return rep, sol


def baseline_points(realization, grid, backend=None):
    """Fixed-direction scheme at each weight in grid, using its own anchor optima."""
    if any(not (0.0 <= lam1 <= 1.0) for lam1 in grid):
        raise ValueError("lambda1 weights must lie in [0, 1]")
    try:
        dirs = zf_directions(realization.h)
    except np.linalg.LinAlgError:
        return [ParetoPoint(lam, round(1.0 - lam, 12), INFEASIBLE) for lam in grid]

    rep1, sol1 = solve_baseline("P1", realization, backend=backend, directions=dirs)
    rep2, sol2 = solve_baseline("P2", realization, backend=backend, directions=dirs)
    if sol1.status != OPTIMAL or sol2.status != OPTIMAL:
        statuses = {sol1.status, sol2.status}
        mark = INFEASIBLE if INFEASIBLE in statuses else next(iter(statuses - {OPTIMAL}))
        ms = sol1.solve_ms + sol2.solve_ms
        return [ParetoPoint(lam, round(1.0 - lam, 12), mark, solve_ms=ms) for lam in grid]

    v = zf_receivers(realization.g)
    points = []
    for lam1 in grid:
        if lam1 == 0.0:
            sol, tau_w = sol2, 0.0
        elif lam1 == 1.0:
            sol, tau_w = sol1, 0.0
        else:
            lam = (lam1, round(1.0 - lam1, 12))
            _, sol = solve_baseline("P3", realization, lam=lam,
                                    q1_star=rep1.objective_w, q2_star=rep2.objective_w,
                                    backend=backend, directions=dirs)
            tau_w = sol.tau_w
        if sol.status != OPTIMAL:
            points.append(ParetoPoint(float(lam1), round(1.0 - lam1, 12), sol.status,
                                      solve_ms=sol.solve_ms))
            continue
        dl_sec, ul_sec = secrecy_rates(sol.policy, realization, v=v)
        points.append(ParetoPoint(
            lambda1=float(lam1),
            lambda2=round(1.0 - lam1, 12),
            status=sol.status,
            q1_w=sol.q1_w,
            q2_w=sol.q2_w,
            tau_w=tau_w,
            dl_secrecy=dl_sec,
            ul_secrecy=ul_sec,
            max_rank_ratio=0.0,
            solve_ms=sol.solve_ms,
            policy=sol.policy,
        ))
    return points


def baseline_sweep(realization, lambda_step=0.01, backend=None):
    """Frontier of the fixed-direction scheme over the full weight grid."""
    return baseline_points(realization, lambda_grid(lambda_step), backend=backend)


def baseline_point(realization, lambda1=0.1, backend=None):
    """Single fixed-direction trade-off point at the given weight."""
    return baseline_points(realization, [float(lambda1)], backend=backend)[0]
