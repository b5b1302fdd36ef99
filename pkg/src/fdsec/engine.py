"""Assembly, solution, and beamformer recovery for the allocation SDPs.

Three problems share one constraint set:

    P1  minimize Q1 = sum_k Tr(W_k) + Tr(Z)      (downlink-side power)
    P2  minimize Q2 = sum_j P_j                   (uplink-side power)
    P3  minimize tau s.t. lam_i (Q_i - Q_i^*) <= tau   (trade-off)

over W_k >= 0, Z >= 0, P_j >= 0 and the worst-case QoS/leakage
constraints, with the rank-one requirement on W_k dropped.  For any
positive weight on Q1 the relaxation returns rank-one W_k; when the
downlink carries no weight, a second stage re-minimizes sum Tr(W_k) with
everything else frozen, which restores rank one without touching the
attained uplink objective.

Physical magnitudes (watts vs. 1e-13 W noise floors) are far outside the
comfort zone of an interior-point solver, so assembly rescales channels
and powers into solver units: amplitudes are normalized by a reference
link gain and powers by the matching noise-referred unit.  The constraint
set is exactly invariant under this change of units; reports translate
objectives and variable values back to watts.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import constraints as cb
from .conic import (DEFAULT_BACKEND, GEQ, OPTIMAL, AffineConstraint, CongruenceTerm,
                    ConicProgram, LinearForm, LmiBlock)
from .hermitian import RANK_ONE_RATIO, herm, principal_component, rank_estimate
from .phy import AllocationPolicy, zf_receivers
from .scenario import path_loss_db, db_to_linear

FEAS_TOL = 1e-6
GAP_TOL = 1e-6

PROBLEMS = ("P1", "P2", "P3")


@dataclass(frozen=True)
class UnitScale:
    """Change of units applied before the solver sees the data.

    amp multiplies channel amplitudes, p0 is the power unit in watts;
    noise powers become sigma^2 * amp^2 / p0.  Chosen so a mid-cell
    BS-side link has unit gain and the downlink noise power is exactly 1.
    """

    amp: float
    p0: float

    @property
    def amp2(self):
        return self.amp * self.amp

    @classmethod
    def from_config(cls, config):
        d_mid = math.sqrt(config.ref_distance_m * config.max_distance_m)
        gain_db = config.antenna_gain_dbi - float(path_loss_db(d_mid, config))
        amp2 = 1.0 / float(db_to_linear(gain_db))
        return cls(math.sqrt(amp2), config.sigma_dl_w * amp2)

    def noise(self, sigma2_w):
        return sigma2_w * self.amp2 / self.p0


@dataclass
class ScaledData:
    """Channel realization expressed in solver units."""

    h: np.ndarray
    g: np.ndarray
    f_hat: np.ndarray
    L_hat: np.ndarray
    e_hat: np.ndarray
    h_si: np.ndarray
    v: np.ndarray
    eps_cci: np.ndarray
    eps_L: np.ndarray
    eps_e: np.ndarray
    s2_dl: float
    s2_ul: float
    s2_eve: float


def _scaled(realization, scale):
    a = scale.amp
    g = a * realization.g
    return ScaledData(
        h=a * realization.h,
        g=g,
        f_hat=a * realization.f_hat,
        L_hat=a * realization.L_hat,
        e_hat=a * realization.e_hat,
        h_si=a * realization.h_si,
        v=zf_receivers(g),
        eps_cci=a * realization.eps_cci,
        eps_L=a * realization.eps_L,
        eps_e=a * realization.eps_e,
        s2_dl=scale.noise(realization.config.sigma_dl_w),
        s2_ul=scale.noise(realization.config.sigma_ul_w),
        s2_eve=scale.noise(realization.config.sigma_eve_w),
    )


def assemble(problem, realization, lam=None, q1_star=None, q2_star=None):
    """Build the conic program for P1, P2, or P3 from one channel drop.

    For P3, lam = (lam1, lam2) and the anchor values q1_star / q2_star are
    in watts (the optima of P1 and P2 on the same drop).
    """
    if problem not in PROBLEMS:
        raise ValueError(f"unknown problem {problem!r}")
    cfg = realization.config
    K, J, M, NT, NR = realization.dims
    scale = UnitScale.from_config(cfg)
    sd = _scaled(realization, scale)

    prog = ConicProgram(f"{problem}:seed{realization.seed}")
    wids = [prog.add_hermitian(f"W{k}", NT) for k in range(K)]
    zid = prog.add_hermitian("Z", NT)
    pids = [prog.add_scalar(f"P{j}") for j in range(J)]

    mids, alpha_ids, beta_ids = {}, {}, {}
    for m in range(M):
        for j in range(J):
            if sd.eps_e[m, j] > 0.0 or sd.eps_L[m] > 0.0:
                mids[j, m] = prog.add_hermitian(f"M{j}.{m}", NR)
                if sd.eps_e[m, j] > 0.0:
                    alpha_ids[j, m] = prog.add_scalar(f"alpha{j}.{m}")
                if sd.eps_L[m] > 0.0:
                    beta_ids[j, m] = prog.add_scalar(f"beta{j}.{m}")
    delta_ids = {
        k: prog.add_scalar(f"delta{k}")
        for k in range(K)
        if J > 0 and sd.eps_cci[k] > 0.0
    }
    t_ids = {
        (k, m): prog.add_scalar(f"t{k}.{m}")
        for k in range(K)
        for m in range(M)
        if sd.eps_L[m] > 0.0
    }
    tau_id = prog.add_scalar("tau") if problem == "P3" else None

    gamma_dl, gamma_ul = cfg.gamma_dl_req, cfg.gamma_ul_req

    for k in range(K):
        con = cb.build_c1_lmi(
            f"C1[{k}]", sd.h[k], sd.f_hat[:, k], float(sd.eps_cci[k]) if J else 0.0,
            sd.s2_dl, gamma_dl, wids[k], wids, zid, pids, delta_ids.get(k),
        )
        prog.add_lmi(con) if isinstance(con, LmiBlock) else prog.add_affine(con)

    for j in range(J):
        prog.add_affine(
            cb.build_c2(f"C2[{j}]", j, sd.v, sd.g, sd.h_si, cfg.rho, sd.s2_ul,
                        gamma_ul, wids, zid, pids)
        )

    for k in range(K):
        for m in range(M):
            prog.add_lmi(
                cb.build_c3_lmi(f"C3[{k},{m}]", sd.L_hat[m], float(sd.eps_L[m]),
                                sd.s2_eve, cfg.xi_dl, wids[k], zid, t_ids.get((k, m)))
            )

    for j in range(J):
        for m in range(M):
            for blk in cb.build_c4_lmis(
                f"C4a[{j},{m}]", f"C4b[{j},{m}]", sd.e_hat[m, j], float(sd.eps_e[m, j]),
                sd.L_hat[m], float(sd.eps_L[m]), sd.s2_eve, cfg.xi_ul,
                pids[j], mids.get((j, m)), zid, alpha_ids.get((j, m)), beta_ids.get((j, m)),
            ):
                prog.add_lmi(blk)

    for j, pid in enumerate(pids):
        prog.add_affine(AffineConstraint(f"C5[{j}]", LinearForm({pid: 1.0}), GEQ, 0.0))
    eye = np.eye(NT, dtype=complex)
    prog.add_lmi(LmiBlock("C6:Z", NT, np.zeros((NT, NT)), [CongruenceTerm(zid, eye, 1.0)]))
    for k, wid in enumerate(wids):
        prog.add_lmi(LmiBlock(f"C7:W{k}", NT, np.zeros((NT, NT)), [CongruenceTerm(wid, eye, 1.0)]))
    for name, vid in (
        [(f"C10:delta{k}", v) for k, v in delta_ids.items()]
        + [(f"C10:t{km}", v) for km, v in t_ids.items()]
        + [(f"C10:alpha{jm}", v) for jm, v in alpha_ids.items()]
        + [(f"C10:beta{jm}", v) for jm, v in beta_ids.items()]
    ):
        prog.add_affine(AffineConstraint(name, LinearForm({vid: 1.0}), GEQ, 0.0))

    if problem == "P1":
        form = LinearForm()
        for wid in wids:
            form.add(wid, eye)
        form.add(zid, eye)
        prog.set_objective(form)
    elif problem == "P2":
        prog.set_objective(LinearForm({pid: 1.0 for pid in pids}))
    else:
        if lam is None or q1_star is None or q2_star is None:
            raise ValueError("P3 needs lam and both anchor objectives")
        lam = (float(lam[0]), float(lam[1]))
        if min(lam) < 0 or abs(sum(lam) - 1.0) > 1e-12:
            raise ValueError(f"weights must be >= 0 and sum to 1, got {lam}")
        for con in cb.build_epigraph(lam, q1_star / scale.p0, q2_star / scale.p0,
                                     wids, zid, pids, tau_id, NT):
            prog.add_affine(con)
        prog.set_objective(LinearForm({tau_id: 1.0}))

    prog.meta = {
        "problem": problem,
        "lam": lam if problem == "P3" else None,
        "seed": realization.seed,
        "scale": scale,
        "ids": {
            "W": wids, "Z": zid, "P": pids, "M": mids, "delta": delta_ids,
            "t": t_ids, "alpha": alpha_ids, "beta": beta_ids, "tau": tau_id,
        },
    }
    return prog


@dataclass
class SolveReport:
    """Outcome of one conic solve, with objectives translated to watts."""

    status: str
    problem: str
    objective_w: float | None
    dual_objective_w: float | None
    values: dict
    solve_ms: float
    iterations: int
    max_violation: float | None
    meta: dict = field(default_factory=dict)


def solve(program, backend=None):
    """Solve an assembled program and post-process the raw solver output.

    Hermitian variable values come back exactly Hermitian by construction
    of the parameterization; constraint violations are measured on the
    returned point in solver units.
    """
    backend = backend or DEFAULT_BACKEND
    t0 = time.perf_counter()
    cone = program.to_cone_data()
    res = backend.solve(cone)
    ms = 1e3 * (time.perf_counter() - t0)

    scale = program.meta.get("scale")
    p0 = scale.p0 if scale is not None else 1.0
    values, obj_w, dual_w, viol = {}, None, None, None
    if res.status == OPTIMAL:
        values = program.extract(res.x)
        obj_w = (res.primal_obj + program.obj_const) * p0
        if np.isfinite(res.dual_obj):
            dual_w = (res.dual_obj + program.obj_const) * p0
        viol = program.max_violation(values)
    return SolveReport(
        status=res.status,
        problem=program.meta.get("problem", program.name),
        objective_w=obj_w,
        dual_objective_w=dual_w,
        values=values,
        solve_ms=ms,
        iterations=res.iterations,
        max_violation=viol,
        meta=dict(program.meta),
    )


@dataclass
class RecoveredSolution:
    """Rank-one policy extracted from a solved relaxation."""

    status: str
    policy: AllocationPolicy | None
    rank_ratios: np.ndarray
    stage2: SolveReport | None
    closure_violation: float | None
    q1_w: float | None
    q2_w: float | None
    tau_w: float | None
    solve_ms: float

    @property
    def max_rank_ratio(self):
        return float(np.max(self.rank_ratios)) if self.rank_ratios.size else 0.0


def _needs_second_stage(problem, lam):
    if problem == "P2":
        return True
    return problem == "P3" and lam is not None and float(lam[0]) == 0.0


def recover_rank_one(program, report, backend=None, ratio_tol=RANK_ONE_RATIO):
    """Extract beamformers w_k from the solved relaxation.

    When the downlink objective carries positive weight the optimal W_k
    are rank one and the principal eigenvector (scaled so that
    ||w_k||^2 = Tr(W_k)) is exact.  Otherwise, if any W_k fails the rank
    test, the second stage freezes P, Z, and all multipliers at their
    optimal values and re-minimizes sum_k Tr(W_k) over the same
    constraints, which is guaranteed to admit a rank-one optimum; the
    uplink objective is untouched by construction.
    """
    meta = report.meta
    ids = meta["ids"]
    scale = meta["scale"]
    problem, lam = meta["problem"], meta["lam"]

    if report.status != OPTIMAL:
        return RecoveredSolution(report.status, None, np.zeros(0), None, None,
                                 None, None, None, report.solve_ms)

    values = dict(report.values)
    wids = ids["W"]
    ratios = np.array([rank_estimate(values[wid])[1] for wid in wids])
    stage2 = None
    total_ms = report.solve_ms

    if _needs_second_stage(problem, lam) and np.any(ratios > ratio_tol):
        frozen = {vid: val for vid, val in values.items() if vid not in wids}
        prog2 = program.freeze(frozen, name=program.name + ":stage2")
        vid_map = prog2.meta["vid_map"]
        nt = program.var(wids[0]).dim if wids else 0
        form = LinearForm()
        for wid in wids:
            form.add(vid_map[wid], np.eye(nt, dtype=complex))
        tr_z = float(np.trace(values[ids["Z"]]).real)
        prog2.set_objective(form, const=tr_z)
        stage2 = solve(prog2, backend)
        total_ms += stage2.solve_ms
        if stage2.status == OPTIMAL:
            for wid in wids:
                values[wid] = stage2.values[vid_map[wid]]
            ratios = np.array([rank_estimate(values[wid])[1] for wid in wids])
        # on stage-2 failure keep the stage-1 matrices; ratios stay as evidence

    w_scaled = []
    for wid in wids:
        Wk = values[wid]
        tr = max(float(np.trace(Wk).real), 0.0)
        _, u = principal_component(Wk)
        w_scaled.append(math.sqrt(tr) * u)
    nt = program.var(ids["Z"]).dim
    w_scaled = np.array(w_scaled).reshape(len(wids), nt) if wids else np.zeros((0, nt), complex)

    closure_assign = dict(values)
    for k, wid in enumerate(wids):
        closure_assign[wid] = np.outer(w_scaled[k], w_scaled[k].conj())
    closure = program.max_violation(closure_assign)

    p0 = scale.p0
    aux = {
        "delta": {k: values[v] for k, v in ids["delta"].items()},
        "t": {km: values[v] for km, v in ids["t"].items()},
        "alpha": {jm: values[v] for jm, v in ids["alpha"].items()},
        "beta": {jm: values[v] for jm, v in ids["beta"].items()},
        "M": {jm: values[v] for jm, v in ids["M"].items()},
    }
    policy = AllocationPolicy(
        w=w_scaled * math.sqrt(p0),
        Z=herm(values[ids["Z"]]) * p0,
        P=np.array([values[pid] for pid in ids["P"]]) * p0,
        aux=aux,
        meta={"problem": problem, "lam": lam, "seed": meta.get("seed"), "unit_scale": scale},
    )
    tau_w = report.objective_w if problem == "P3" else None
    return RecoveredSolution(
        status=OPTIMAL,
        policy=policy,
        rank_ratios=ratios,
        stage2=stage2,
        closure_violation=closure,
        q1_w=policy.q1_w,
        q2_w=policy.q2_w,
        tau_w=tau_w,
        solve_ms=total_ms,
    )


def solve_problem(problem, realization, lam=None, q1_star=None, q2_star=None,
                  backend=None, ratio_tol=RANK_ONE_RATIO):
    """assemble -> solve -> recover in one call."""
    prog = assemble(problem, realization, lam=lam, q1_star=q1_star, q2_star=q2_star)
    rep = solve(prog, backend)
    rec = recover_rank_one(prog, rep, backend=backend, ratio_tol=ratio_tol)
    return prog, rep, rec


def dump_program(program, path):
    """Write the plain-text rendering of an assembled program."""
    with open(path, "w") as fh:
        fh.write(program.dump())
    return path
