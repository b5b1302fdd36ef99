"""Solver-agnostic conic program representation.

A program is a table of decision variables (real scalars and complex
Hermitian matrices), a list of Hermitian LMI blocks that are affine in the
variables, a list of scalar affine constraints, and a linear objective.
Hermitian variables are parameterized by n^2 reals (diagonal, then
re/im of each upper off-diagonal entry); LMI blocks are translated to the
real symmetric embedding before hitting the solver, so any real-cone
interior-point backend can be plugged in.  Exactly one reference backend
is wired (cvxopt's conelp).
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .hermitian import check_hermitian, herm, real_embed

SCALAR = "scalar"
HERMITIAN = "hermitian"

GEQ = ">="
LEQ = "<="
EQ = "=="

# canonical outcome labels shared by backends and reports
OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NUMFAIL = "numerical-failure"


@dataclass(frozen=True)
class VarInfo:
    vid: int
    name: str
    kind: str
    dim: int  # 1 for scalars, matrix dimension for hermitian variables

    @property
    def nparams(self):
        return 1 if self.kind == SCALAR else self.dim * self.dim


def hermitian_param_entries(n):
    """Canonical ordering of the n^2 real parameters of a Hermitian matrix."""
    for i in range(n):
        yield ("d", i, i)
    for i in range(n):
        for j in range(i + 1, n):
            yield ("re", i, j)
            yield ("im", i, j)


def hermitian_from_params(p, n):
    V = np.zeros((n, n), dtype=complex)
    p = np.asarray(p, dtype=float)
    k = n
    for i in range(n):
        V[i, i] = p[i]
    for i in range(n):
        for j in range(i + 1, n):
            V[i, j] = p[k] + 1j * p[k + 1]
            V[j, i] = p[k] - 1j * p[k + 1]
            k += 2
    return V


def hermitian_to_params(V):
    V = np.asarray(V, dtype=complex)
    n = V.shape[0]
    out = np.empty(n * n)
    out[:n] = V.diagonal().real
    k = n
    for i in range(n):
        for j in range(i + 1, n):
            out[k] = V[i, j].real
            out[k + 1] = V[i, j].imag
            k += 2
    return out


# ---------------------------------------------------------------------------
# LMI terms: each is a linear map from one decision variable into a d x d
# Hermitian contribution.  param_blocks() yields the contribution of every
# real parameter of the variable, in canonical order.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalarTerm:
    """Contribution x * F of a scalar variable."""

    vid: int
    F: np.ndarray

    def evaluate(self, value):
        return float(value) * self.F

    def param_blocks(self, var):
        yield self.F

    def describe(self):
        return f"scalar v{self.vid} * F"


@dataclass(frozen=True)
class CongruenceTerm:
    """Contribution scale * S^H V S of a Hermitian variable V, S is n x d."""

    vid: int
    S: np.ndarray
    scale: float = 1.0

    def evaluate(self, value):
        return self.scale * (self.S.conj().T @ value @ self.S)

    def param_blocks(self, var):
        S = self.S
        g = self.scale
        rows = [S[i, :] for i in range(var.dim)]
        for kind, i, j in hermitian_param_entries(var.dim):
            a, b = rows[i].conj(), rows[j]
            if kind == "d":
                yield g * np.outer(a, b)
            elif kind == "re":
                yield g * (np.outer(a, b) + np.outer(b.conj(), rows[i]))
            else:
                yield g * 1j * (np.outer(a, b) - np.outer(b.conj(), rows[i]))

    def describe(self):
        return f"congruence {self.scale:+.6g} * S^H v{self.vid} S, S {self.S.shape}"


@dataclass(frozen=True)
class TraceTerm:
    """Contribution Tr(H V) * F of a Hermitian variable V."""

    vid: int
    H: np.ndarray
    F: np.ndarray

    def evaluate(self, value):
        return float(np.trace(self.H @ value).real) * self.F

    def param_blocks(self, var):
        H = self.H
        for kind, i, j in hermitian_param_entries(var.dim):
            if kind == "d":
                c = H[i, i].real
            elif kind == "re":
                c = 2.0 * H[i, j].real
            else:
                c = 2.0 * H[i, j].imag
            yield c * self.F

    def describe(self):
        return f"trace Tr(H v{self.vid}) * F, H {self.H.shape}"


@dataclass
class LmiBlock:
    """Affine Hermitian-matrix-valued constraint: const + sum(terms) >= 0."""

    name: str
    dim: int
    const: np.ndarray
    terms: list = field(default_factory=list)

    def __post_init__(self):
        self.const = check_hermitian(self.const, label=self.name)
        if self.const.shape != (self.dim, self.dim):
            raise ValueError(f"{self.name}: const shape {self.const.shape} != dim {self.dim}")

    def evaluate(self, assignment):
        V = self.const.astype(complex).copy()
        for t in self.terms:
            V += t.evaluate(assignment[t.vid])
        return herm(V)

    def vids(self):
        return {t.vid for t in self.terms}


class LinearForm:
    """Real-valued linear form over the decision variables.

    Scalar variables pair with float coefficients; Hermitian variables pair
    through Tr(H V) with a fixed Hermitian H.
    """

    def __init__(self, coeffs=None):
        self.coeffs = dict(coeffs or {})

    def add(self, vid, coeff):
        if vid in self.coeffs:
            old = self.coeffs[vid]
            coeff = old + coeff
        self.coeffs[vid] = coeff
        return self

    def value(self, assignment):
        total = 0.0
        for vid, c in self.coeffs.items():
            v = assignment[vid]
            if np.ndim(c) == 0:
                total += float(c) * float(v)
            else:
                total += float(np.trace(np.asarray(c) @ v).real)
        return total

    def param_coeffs(self, var, coeff):
        if var.kind == SCALAR:
            yield float(coeff)
            return
        H = np.asarray(coeff)
        for kind, i, j in hermitian_param_entries(var.dim):
            if kind == "d":
                yield float(H[i, i].real)
            elif kind == "re":
                yield 2.0 * float(H[i, j].real)
            else:
                yield 2.0 * float(H[i, j].imag)

    def vids(self):
        return set(self.coeffs)


@dataclass
class AffineConstraint:
    """form(x) <sense> rhs with sense in {>=, <=, ==}."""

    name: str
    form: LinearForm
    sense: str
    rhs: float

    def evaluate(self, assignment):
        return self.form.value(assignment)

    def violation(self, assignment):
        lhs = self.evaluate(assignment)
        if self.sense == GEQ:
            return max(0.0, self.rhs - lhs)
        if self.sense == LEQ:
            return max(0.0, lhs - self.rhs)
        return abs(lhs - self.rhs)

    def vids(self):
        return self.form.vids()


@dataclass
class ConeData:
    """Real-cone form: min c'x s.t. Gl x <= hl, each PSD block C_i + sum_k x_k F_ik >= 0."""

    c: np.ndarray
    Gl: np.ndarray
    hl: np.ndarray
    Gs: list
    hs: list
    sdims: list


class ConicProgram:
    def __init__(self, name=""):
        self.name = name
        self.variables = []
        self.lmis = []
        self.affines = []
        self.objective = LinearForm()
        self.obj_const = 0.0
        self.meta = {}

    # -- variable table ----------------------------------------------------

    def add_scalar(self, name):
        vid = len(self.variables)
        self.variables.append(VarInfo(vid, name, SCALAR, 1))
        return vid

    def add_hermitian(self, name, n):
        vid = len(self.variables)
        self.variables.append(VarInfo(vid, name, HERMITIAN, n))
        return vid

    def var(self, vid):
        return self.variables[vid]

    @property
    def nparams(self):
        return sum(v.nparams for v in self.variables)

    def param_offsets(self):
        offs, k = {}, 0
        for v in self.variables:
            offs[v.vid] = k
            k += v.nparams
        return offs

    # -- constraint/objective entry points ----------------------------------

    def add_lmi(self, block):
        self._check_vids(block.vids(), block.name)
        self.lmis.append(block)
        return block

    def add_affine(self, con):
        self._check_vids(con.vids(), con.name)
        self.affines.append(con)
        return con

    def set_objective(self, form, const=0.0):
        self._check_vids(form.vids(), "objective")
        self.objective = form
        self.obj_const = float(const)

    def _check_vids(self, vids, label):
        for vid in vids:
            if not (0 <= vid < len(self.variables)):
                raise KeyError(f"{label} references unknown variable id {vid}")

    # -- evaluation ----------------------------------------------------------

    def objective_value(self, assignment):
        return self.objective.value(assignment) + self.obj_const

    def constraint_violations(self, assignment):
        """(name, violation) for every constraint; LMI violation is max(0, -lambda_min)."""
        out = []
        for blk in self.lmis:
            V = blk.evaluate(assignment)
            lam_min = float(np.linalg.eigvalsh(V)[0]) if blk.dim else 0.0
            out.append((blk.name, max(0.0, -lam_min)))
        for con in self.affines:
            out.append((con.name, con.violation(assignment)))
        return out

    def max_violation(self, assignment):
        viols = self.constraint_violations(assignment)
        return max((v for _, v in viols), default=0.0)

    # -- transformations -----------------------------------------------------

    def freeze(self, values, name=None, keep_objective=True, drop_tol=1e-6):
        """Substitute fixed values for a subset of variables.

        Frozen contributions fold into the constants.  Constraints left with
        no free variables must hold at the frozen point (within drop_tol,
        scale-aware) and are dropped.  Variable ids are reassigned densely;
        meta['vid_map'] records old -> new.
        """
        prog = ConicProgram(name or (self.name + "+frozen"))
        vid_map = {}
        for v in self.variables:
            if v.vid in values:
                continue
            nv = prog.add_scalar(v.name) if v.kind == SCALAR else prog.add_hermitian(v.name, v.dim)
            vid_map[v.vid] = nv

        def map_term(t):
            if t.vid in values:
                return None, t.evaluate(values[t.vid])
            if isinstance(t, ScalarTerm):
                return ScalarTerm(vid_map[t.vid], t.F), 0.0
            if isinstance(t, CongruenceTerm):
                return CongruenceTerm(vid_map[t.vid], t.S, t.scale), 0.0
            return TraceTerm(vid_map[t.vid], t.H, t.F), 0.0

        for blk in self.lmis:
            const = blk.const.astype(complex).copy()
            terms = []
            for t in blk.terms:
                nt, add = map_term(t)
                if nt is None:
                    const = const + add
                else:
                    terms.append(nt)
            if not terms:
                lam_min = float(np.linalg.eigvalsh(herm(const))[0])
                scale = max(1.0, float(np.abs(const).max()))
                if lam_min < -drop_tol * scale:
                    raise ValueError(f"frozen LMI {blk.name} violated: lambda_min={lam_min:.3e}")
                continue
            prog.add_lmi(LmiBlock(blk.name, blk.dim, herm(const), terms))

        for con in self.affines:
            coeffs, shift = {}, 0.0
            for vid, c in con.form.coeffs.items():
                if vid in values:
                    v = values[vid]
                    shift += float(c) * float(v) if np.ndim(c) == 0 else float(
                        np.trace(np.asarray(c) @ v).real
                    )
                else:
                    coeffs[vid_map[vid]] = c
            rhs = con.rhs - shift
            if not coeffs:
                resid = -rhs if con.sense == GEQ else (rhs if con.sense == LEQ else abs(rhs))
                if resid < -drop_tol * max(1.0, abs(con.rhs)):
                    raise ValueError(f"frozen constraint {con.name} violated by {-resid:.3e}")
                continue
            prog.add_affine(AffineConstraint(con.name, LinearForm(coeffs), con.sense, rhs))

        if keep_objective:
            coeffs, shift = {}, 0.0
            for vid, c in self.objective.coeffs.items():
                if vid in values:
                    v = values[vid]
                    shift += float(c) * float(v) if np.ndim(c) == 0 else float(
                        np.trace(np.asarray(c) @ v).real
                    )
                else:
                    coeffs[vid_map[vid]] = c
            prog.set_objective(LinearForm(coeffs), self.obj_const + shift)

        prog.meta = dict(self.meta)
        prog.meta["vid_map"] = vid_map
        return prog

    def rank_one_substitute(self, directions, name=None):
        """Replace Hermitian variables by p * (u u^H) with scalar p >= 0.

        directions: {vid: (scalar_name, u)} with ||u|| = 1.  Returns
        (program, {old_vid: new_scalar_vid}).  PSD blocks that collapse to
        p * (a a^H) >= 0 are rewritten as p >= 0 so the cone keeps a strict
        interior.
        """
        prog = ConicProgram(name or (self.name + "+rank1"))
        vid_map = {}
        units = {}
        for v in self.variables:
            if v.vid in directions:
                pname, u = directions[v.vid]
                u = np.asarray(u, dtype=complex).reshape(v.dim)
                nrm = np.linalg.norm(u)
                if abs(nrm - 1.0) > 1e-8:
                    raise ValueError(f"direction for {v.name} not unit norm ({nrm})")
                vid_map[v.vid] = prog.add_scalar(pname)
                units[v.vid] = u
            else:
                vid_map[v.vid] = (
                    prog.add_scalar(v.name) if v.kind == SCALAR else prog.add_hermitian(v.name, v.dim)
                )

        def map_term(t):
            nv = vid_map[t.vid]
            if t.vid not in units:
                if isinstance(t, ScalarTerm):
                    return ScalarTerm(nv, t.F)
                if isinstance(t, CongruenceTerm):
                    return CongruenceTerm(nv, t.S, t.scale)
                return TraceTerm(nv, t.H, t.F)
            u = units[t.vid]
            if isinstance(t, CongruenceTerm):
                a = t.S.conj().T @ u
                return ScalarTerm(nv, t.scale * np.outer(a, a.conj()))
            if isinstance(t, TraceTerm):
                return ScalarTerm(nv, float((u.conj() @ t.H @ u).real) * t.F)
            raise TypeError(f"cannot substitute into {t!r}")

        for blk in self.lmis:
            terms = [map_term(t) for t in blk.terms]
            # p * (a a^H) >= 0 with zero const collapses to the bound p >= 0,
            # keeping a strict interior for the cone solver
            if (
                len(terms) == 1
                and isinstance(terms[0], ScalarTerm)
                and blk.terms[0].vid in units
                and np.abs(blk.const).max() == 0.0
            ):
                lead = float(np.trace(terms[0].F).real)
                if abs(lead) > 1e-12:
                    prog.add_affine(
                        AffineConstraint(blk.name, LinearForm({terms[0].vid: lead}), GEQ, 0.0)
                    )
                continue
            prog.add_lmi(LmiBlock(blk.name, blk.dim, blk.const, terms))

        for con in self.affines:
            coeffs = {}
            for vid, c in con.form.coeffs.items():
                if vid in units:
                    u = units[vid]
                    coeffs[vid_map[vid]] = float((u.conj() @ np.asarray(c) @ u).real)
                else:
                    coeffs[vid_map[vid]] = c
            prog.add_affine(AffineConstraint(con.name, LinearForm(coeffs), con.sense, con.rhs))

        coeffs = {}
        for vid, c in self.objective.coeffs.items():
            if vid in units:
                u = units[vid]
                coeffs[vid_map[vid]] = float((u.conj() @ np.asarray(c) @ u).real)
            else:
                coeffs[vid_map[vid]] = c
        prog.set_objective(LinearForm(coeffs), self.obj_const)
        prog.meta = dict(self.meta)
        prog.meta["vid_map"] = vid_map
        return prog, vid_map

    # -- real-cone translation ------------------------------------------------

    def to_cone_data(self):
        offs = self.param_offsets()
        n = self.nparams

        c = np.zeros(n)
        for vid, coeff in self.objective.coeffs.items():
            var = self.var(vid)
            for k, val in enumerate(self.objective.param_coeffs(var, coeff)):
                c[offs[vid] + k] += val

        rows, rhss = [], []
        for con in self.affines:
            row = np.zeros(n)
            for vid, coeff in con.form.coeffs.items():
                var = self.var(vid)
                for k, val in enumerate(con.form.param_coeffs(var, coeff)):
                    row[offs[vid] + k] += val
            if con.sense in (LEQ, EQ):
                rows.append(row)
                rhss.append(con.rhs)
            if con.sense in (GEQ, EQ):
                rows.append(-row)
                rhss.append(-con.rhs)
        Gl = np.vstack(rows) if rows else np.zeros((0, n))
        hl = np.asarray(rhss)

        Gs, hs, sdims = [], [], []
        for blk in self.lmis:
            de = 2 * blk.dim
            G = np.zeros((de * de, n))
            for t in blk.terms:
                var = self.var(t.vid)
                for k, F in enumerate(t.param_blocks(var)):
                    # cone slack s = hs - G x must be PSD; block = const + sum x F
                    G[:, offs[t.vid] + k] -= real_embed(F).ravel(order="F")
            Gs.append(G)
            hs.append(real_embed(blk.const))
            sdims.append(de)
        return ConeData(c, Gl, hl, Gs, hs, sdims)

    def extract(self, x):
        """Map a raw real parameter vector into {vid: value}."""
        x = np.asarray(x, dtype=float).ravel()
        offs = self.param_offsets()
        out = {}
        for v in self.variables:
            o = offs[v.vid]
            if v.kind == SCALAR:
                out[v.vid] = float(x[o])
            else:
                out[v.vid] = hermitian_from_params(x[o : o + v.nparams], v.dim)
        return out

    # -- debug dump ------------------------------------------------------------

    def dump(self):
        """Plain-text, diffable rendering of the whole program."""
        lines = [f"program {self.name}", f"variables {len(self.variables)}"]
        for v in self.variables:
            lines.append(f"  v{v.vid} {v.name} {v.kind} dim={v.dim}")
        lines.append("objective")
        for vid, cf in sorted(self.objective.coeffs.items()):
            if np.ndim(cf) == 0:
                lines.append(f"  v{vid} * {float(cf):+.9g}")
            else:
                lines.append(f"  Tr(H v{vid}), H = {_fmt_matrix(cf)}")
        lines.append(f"  const {self.obj_const:+.9g}")
        lines.append(f"affine constraints {len(self.affines)}")
        for con in self.affines:
            parts = []
            for vid, cf in sorted(con.form.coeffs.items()):
                if np.ndim(cf) == 0:
                    parts.append(f"{float(cf):+.9g}*v{vid}")
                else:
                    parts.append(f"Tr({_fmt_matrix(cf)} v{vid})")
            lines.append(f"  {con.name}: {' '.join(parts)} {con.sense} {con.rhs:+.9g}")
        lines.append(f"lmi blocks {len(self.lmis)}")
        for blk in self.lmis:
            lines.append(f"  {blk.name} dim={blk.dim}")
            lines.append(f"    const = {_fmt_matrix(blk.const)}")
            for t in blk.terms:
                lines.append(f"    {t.describe()}")
        return "\n".join(lines) + "\n"


def _fmt_matrix(M):
    M = np.asarray(M)
    ent = []
    for row in np.atleast_2d(M):
        ent.append("[" + ", ".join(f"{z.real:+.9g}{z.imag:+.9g}j" for z in row) + "]")
    return "[" + ", ".join(ent) + "]"


# ---------------------------------------------------------------------------
# Reference backend: cvxopt conelp (interior point on the real cone form).
# ---------------------------------------------------------------------------


@dataclass
class BackendResult:
    status: str
    raw_status: str
    x: np.ndarray
    primal_obj: float
    dual_obj: float
    iterations: int
    solve_ms: float


class CvxoptConeBackend:
    """Interior-point solve of the translated real cone program.

    Options are cvxopt conelp knobs; retries with progressively looser
    tolerances soak up the occasional 'unknown' exit on nearly degenerate
    instances.
    """

    name = "cvxopt-conelp"

    def __init__(self, feastol=1e-8, abstol=1e-8, reltol=1e-8, maxiters=200, retries=(1e-7, 1e-6)):
        self.feastol = feastol
        self.abstol = abstol
        self.reltol = reltol
        self.maxiters = maxiters
        self.retries = tuple(retries)

    def solve(self, cone):
        from cvxopt import matrix, solvers

        t0 = time.perf_counter()
        G = matrix(np.vstack([cone.Gl] + [g for g in cone.Gs])) if cone.Gs else matrix(cone.Gl)
        h = matrix(np.concatenate([cone.hl] + [H.ravel(order="F") for H in cone.hs]))
        dims = {"l": cone.Gl.shape[0], "q": [], "s": list(cone.sdims)}
        cvec = matrix(cone.c)
        sol = None
        for tol in (self.feastol,) + self.retries:
            opts = {
                "show_progress": False,
                "maxiters": self.maxiters,
                "feastol": tol,
                "abstol": max(self.abstol, tol),
                "reltol": max(self.reltol, tol),
            }
            try:
                sol = solvers.conelp(cvec, G, h, dims, options=opts)
            except (ValueError, ArithmeticError):
                sol = None
            if sol is not None and sol["status"] != "unknown":
                break
        ms = 1e3 * (time.perf_counter() - t0)

        if sol is None:
            return BackendResult(NUMFAIL, "exception", np.zeros(cone.c.size), np.nan, np.nan, 0, ms)

        raw = sol["status"]
        status = {
            "optimal": OPTIMAL,
            "primal infeasible": INFEASIBLE,
            "dual infeasible": UNBOUNDED,
        }.get(raw, NUMFAIL)
        x = np.array(sol["x"]).ravel() if sol["x"] is not None else np.zeros(cone.c.size)
        pobj = float(sol["primal objective"]) if sol["primal objective"] is not None else np.nan
        dobj = float(sol["dual objective"]) if sol["dual objective"] is not None else np.nan
        iters = int(sol.get("iterations", 0))
        return BackendResult(status, raw, x, pobj, dobj, iters, ms)


DEFAULT_BACKEND = CvxoptConeBackend()
