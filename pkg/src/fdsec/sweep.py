"""Trace the downlink/uplink power trade-off by sweeping the scalarization weight.

For one channel drop the procedure is: solve P1 and P2 once to get the
anchor optima Q1*, Q2*, then solve P3 (min tau s.t. lam_i (Q_i - Q_i*) <=
tau) at each grid weight.  The endpoints lam1 = 1 and lam1 = 0 coincide
with P1 and P2, so their solutions are reused directly.  If either anchor
problem is infeasible the whole drop is an outage and every grid point is
marked accordingly.
"""

import math
from dataclasses import dataclass

import numpy as np

from .conic import INFEASIBLE, OPTIMAL
from .engine import solve_problem
from .hermitian import RANK_ONE_RATIO
from .phy import secrecy_rates, zf_receivers


@dataclass
class ParetoPoint:
    """One point of the swept frontier (objective values in watts)."""

    lambda1: float
    lambda2: float
    status: str
    q1_w: float | None = None
    q2_w: float | None = None
    tau_w: float | None = None
    dl_secrecy: np.ndarray | None = None
    ul_secrecy: np.ndarray | None = None
    max_rank_ratio: float | None = None
    stage2_used: bool = False
    rank_anomaly: bool = False
    solve_ms: float = 0.0
    policy: object = None

    @property
    def feasible(self):
        return self.status == OPTIMAL


def lambda_grid(step):
    """The weight grid {0, step, 2*step, ...} up to and including 1."""
    if not (0.0 < step <= 0.5):
        raise ValueError(f"lambda step must be in (0, 0.5], got {step}")
    vals = []
    i = 0
    while i * step < 1.0 - 1e-12:
        vals.append(round(i * step, 12))
        i += 1
    vals.append(1.0)
    return vals


def _point_from(rec, lam1, tau_w=None, ratio_tol=RANK_ONE_RATIO, realization=None, v=None):
    lam1 = float(lam1)
    if rec.status != OPTIMAL or rec.policy is None:
        return ParetoPoint(lam1, round(1.0 - lam1, 12), rec.status, solve_ms=rec.solve_ms)
    dl_sec, ul_sec = secrecy_rates(rec.policy, realization, v=v)
    ratio = rec.max_rank_ratio
    return ParetoPoint(
        lambda1=lam1,
        lambda2=round(1.0 - lam1, 12),
        status=rec.status,
        q1_w=rec.q1_w,
        q2_w=rec.q2_w,
        tau_w=tau_w,
        dl_secrecy=dl_sec,
        ul_secrecy=ul_sec,
        max_rank_ratio=ratio,
        stage2_used=rec.stage2 is not None,
        rank_anomaly=(lam1 > 0.0 and ratio > ratio_tol),
        solve_ms=rec.solve_ms,
        policy=rec.policy,
    )


def solve_points(realization, grid, backend=None, ratio_tol=RANK_ONE_RATIO):
    """Solve the scalarized problem at each weight in grid (anchors solved once).

    Anchor objectives Q1*, Q2* are the solver optima of P1/P2 on this drop;
    the P3 solves reuse them, and the recovered policies report per-user
    secrecy rates on the true channels.
    """
    if any(not (0.0 <= lam1 <= 1.0) for lam1 in grid):
        raise ValueError("lambda1 weights must lie in [0, 1]")
    _, rep1, rec1 = solve_problem("P1", realization, backend=backend, ratio_tol=ratio_tol)
    _, rep2, rec2 = solve_problem("P2", realization, backend=backend, ratio_tol=ratio_tol)

    if rec1.status != OPTIMAL or rec2.status != OPTIMAL:
        statuses = {rec1.status, rec2.status}
        mark = INFEASIBLE if INFEASIBLE in statuses else next(iter(statuses - {OPTIMAL}))
        ms = rec1.solve_ms + rec2.solve_ms
        return [ParetoPoint(lam, round(1.0 - lam, 12), mark, solve_ms=ms) for lam in grid]

    v = zf_receivers(realization.g)
    q1_star, q2_star = rep1.objective_w, rep2.objective_w
    points = []
    for lam1 in grid:
        if lam1 == 0.0:
            points.append(_point_from(rec2, 0.0, tau_w=0.0, ratio_tol=ratio_tol,
                                      realization=realization, v=v))
        elif lam1 == 1.0:
            points.append(_point_from(rec1, 1.0, tau_w=0.0, ratio_tol=ratio_tol,
                                      realization=realization, v=v))
        else:
            lam = (lam1, round(1.0 - lam1, 12))
            _, _, rec = solve_problem("P3", realization, lam=lam, q1_star=q1_star,
                                      q2_star=q2_star, backend=backend, ratio_tol=ratio_tol)
            points.append(_point_from(rec, lam1, tau_w=rec.tau_w, ratio_tol=ratio_tol,
                                      realization=realization, v=v))
    return points


def sweep(realization, lambda_step=0.01, backend=None, ratio_tol=RANK_ONE_RATIO):
    """Full frontier for one drop; returns a list of ParetoPoint sorted by lambda1."""
    return solve_points(realization, lambda_grid(lambda_step),
                        backend=backend, ratio_tol=ratio_tol)


def tradeoff_point(realization, lambda1=0.1, backend=None, ratio_tol=RANK_ONE_RATIO):
    """Single point of the trade-off at the given weight (anchors included)."""
    return solve_points(realization, [float(lambda1)],
                        backend=backend, ratio_tol=ratio_tol)[0]


def frontier_violations(points, slack=1e-6):
    """Diagnose the swept frontier: monotonicity breaks and dominated points.

    Sorting the feasible points by q1 ascending (ties broken by q2
    descending) must leave q2 nonincreasing; monotone_breaks lists index
    pairs (i, j) where q2 instead rises by more than the slack.  dominated
    lists indices of points strictly dominated by another feasible point
    in both objectives.
    """
    feas = [(i, p) for i, p in enumerate(points) if p.feasible]
    order = sorted(feas, key=lambda ip: (ip[1].q1_w, -ip[1].q2_w))
    breaks = []
    for (i, a), (j, b) in zip(order, order[1:]):
        if b.q2_w > a.q2_w + slack:
            breaks.append((i, j))
    dominated = []
    for i, p in feas:
        for j, q in feas:
            if q.q1_w < p.q1_w - slack and q.q2_w < p.q2_w - slack:
                dominated.append(i)
                break
    return breaks, dominated


def is_clean_frontier(points, slack=1e-6):
    breaks, dominated = frontier_violations(points, slack=slack)
    return not breaks and not dominated
