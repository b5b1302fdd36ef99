"""Monte Carlo driver: seeded drops, trade-off sweeps, grid experiments, CSV/JSON output.

Experiment kinds mirror the usual evaluation plots: the full trade-off
region on each drop, transmit power / outage / secrecy versus the
downlink or uplink SINR target, and transmit power versus the channel
estimation error bound.  Grid experiments reuse the same drop seeds at
every grid value so curves are paired across the sweep.  Everything is
deterministic given (config, seed); solve times are reported as 0.0
unless timing is requested, keeping default output byte-reproducible.
"""

import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baseline import baseline_point, baseline_sweep
from .conic import INFEASIBLE, OPTIMAL
from .oracle import adversarial_check
from .scenario import SystemConfig, generate_drop, watt_to_dbm
from .sweep import sweep, tradeoff_point

CSV_COLUMNS = ("seed", "scheme", "lambda1", "status", "q1_dbm", "q2_dbm", "tau",
               "min_dl_secrecy", "min_ul_secrecy", "avg_dl_secrecy",
               "avg_ul_secrecy", "solve_ms", "max_rank_ratio")

# kind -> (config field swept, default grid, file label prefix); None = lambda sweep
EXPERIMENTS = {
    "tradeoff": None,
    "power-vs-dl-sinr": ("gamma_dl_req_db", (0.0, 4.0, 8.0, 12.0), "gdl"),
    "outage-vs-dl-sinr": ("gamma_dl_req_db", (0.0, 4.0, 8.0, 12.0), "gdl"),
    "secrecy-vs-dl-sinr": ("gamma_dl_req_db", (0.0, 4.0, 8.0, 12.0), "gdl"),
    "power-vs-ul-sinr": ("gamma_ul_req_db", (2.0, 4.0, 6.0, 8.0), "gul"),
    "secrecy-vs-ul-sinr": ("gamma_ul_req_db", (2.0, 4.0, 6.0, 8.0), "gul"),
    "power-vs-kappa": ("kappa_est_sq", (0.0, 0.025, 0.05, 0.10), "kappa2"),
}


@dataclass
class RunRecord:
    """One solve outcome; power fields in watts, secrecy in bit/s/Hz."""

    seed: int
    scheme: str
    lambda1: float
    status: str
    q1_w: float | None = None
    q2_w: float | None = None
    tau_w: float | None = None
    min_dl_secrecy: float | None = None
    min_ul_secrecy: float | None = None
    avg_dl_secrecy: float | None = None
    avg_ul_secrecy: float | None = None
    solve_ms: float = 0.0
    max_rank_ratio: float | None = None
    verify_violations: int | None = None  # summary-only, not a CSV column

    @property
    def feasible(self):
        return self.status == OPTIMAL

    @classmethod
    def from_point(cls, seed, scheme, point, timing=False):
        ms = float(point.solve_ms) if timing else 0.0
        if not point.feasible:
            return cls(seed, scheme, point.lambda1, point.status, solve_ms=ms)
        dl, ul = point.dl_secrecy, point.ul_secrecy
        return cls(
            seed=seed,
            scheme=scheme,
            lambda1=point.lambda1,
            status=point.status,
            q1_w=point.q1_w,
            q2_w=point.q2_w,
            tau_w=point.tau_w,
            min_dl_secrecy=float(dl.min()) if dl.size else None,
            min_ul_secrecy=float(ul.min()) if ul.size else None,
            avg_dl_secrecy=float(dl.mean()) if dl.size else None,
            avg_ul_secrecy=float(ul.mean()) if ul.size else None,
            solve_ms=ms,
            max_rank_ratio=float(point.max_rank_ratio),
        )


def _g(x):
    return "%.9g" % float(x)


def _dbm_cell(watts):
    if watts is None or watts <= 0.0:
        return ""
    return _g(watt_to_dbm(watts))


def _cell(x):
    return "" if x is None else _g(x)


def record_to_row(r):
    return (str(r.seed), r.scheme, _g(r.lambda1), r.status,
            _dbm_cell(r.q1_w), _dbm_cell(r.q2_w), _cell(r.tau_w),
            _cell(r.min_dl_secrecy), _cell(r.min_ul_secrecy),
            _cell(r.avg_dl_secrecy), _cell(r.avg_ul_secrecy),
            _g(r.solve_ms), _cell(r.max_rank_ratio))


def emit_csv(records, path):
    """Write records (sorted by seed, scheme, lambda1) as the fixed 13-column CSV."""
    ordered = sorted(records, key=lambda r: (r.seed, r.scheme, r.lambda1))
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for r in ordered:
            fh.write(",".join(record_to_row(r)) + "\n")
    return path


def read_csv(path):
    """Parse an emitted CSV back into RunRecords (dBm cells back to watts)."""
    out = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header in {path}")
        for line in fh:
            c = line.rstrip("\n").split(",")
            num = lambda s: float(s) if s else None
            dbm = lambda s: 10.0 ** ((float(s) - 30.0) / 10.0) if s else None
            out.append(RunRecord(
                seed=int(c[0]), scheme=c[1], lambda1=float(c[2]), status=c[3],
                q1_w=dbm(c[4]), q2_w=dbm(c[5]), tau_w=num(c[6]),
                min_dl_secrecy=num(c[7]), min_ul_secrecy=num(c[8]),
                avg_dl_secrecy=num(c[9]), avg_ul_secrecy=num(c[10]),
                solve_ms=float(c[11]), max_rank_ratio=num(c[12]),
            ))
    return out


def aggregate(records, timing=False, verify=False):
    """Means over feasible records plus outage; powers averaged in watts, then dBm."""
    n = len(records)
    feas = [r for r in records if r.feasible]
    infeas = sum(1 for r in records if r.status == INFEASIBLE)
    agg = {
        "n": n,
        "n_feasible": len(feas),
        "outage": (infeas / n) if n else 0.0,
        "solver_failures": n - len(feas) - infeas,
    }
    if feas:
        q1 = np.mean([r.q1_w for r in feas])
        q2 = np.mean([r.q2_w for r in feas])
        if q1 > 0.0:
            agg["mean_q1_dbm"] = float(watt_to_dbm(q1))
        if q2 > 0.0:
            agg["mean_q2_dbm"] = float(watt_to_dbm(q2))
        for name in ("min_dl_secrecy", "min_ul_secrecy",
                     "avg_dl_secrecy", "avg_ul_secrecy"):
            vals = [getattr(r, name) for r in feas if getattr(r, name) is not None]
            if vals:
                agg["mean_" + name] = float(np.mean(vals))
        agg["max_rank_ratio"] = max(r.max_rank_ratio for r in feas)
        if timing:
            agg["mean_solve_ms"] = float(np.mean([r.solve_ms for r in feas]))
    if verify:
        checked = [r for r in records if r.verify_violations is not None]
        agg["verify"] = {
            "checked": len(checked),
            "total_violations": sum(r.verify_violations for r in checked),
        }
    return agg


def _round9(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return float("%.9g" % obj)
    if isinstance(obj, dict):
        return {k: _round9(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round9(v) for v in obj]
    return obj


def _label(value):
    return ("%g" % float(value)).replace(".", "p").replace("-", "m")


def _progress(msg):
    print(msg, file=sys.stderr, flush=True)


def _verify_point(record, point, realization):
    if point.feasible:
        rep = adversarial_check(point.policy, realization, seed=record.seed)
        record.verify_violations = rep.total_violations


def run_experiment(kind, config=None, trials=50, seed=0, out_dir="./results",
                   lambda_step=0.01, lambda1=0.1, baseline=False, verify=False,
                   timing=False, grid=None, backend=None):
    """Run one experiment kind and write its CSV file(s) plus a JSON summary.

    Returns a dict with the records, written paths, and the summary content.
    """
    if kind not in EXPERIMENTS:
        raise ValueError(f"unknown experiment kind {kind!r}; "
                         f"choose from {sorted(EXPERIMENTS)}")
    cfg = SystemConfig.desk_scale() if config is None else config
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    probe = out / ".write_probe"
    probe.write_text("")
    probe.unlink()

    prefix = kind.replace("-", "_")
    summary = {
        "experiment": kind,
        "config": cfg.to_dict(),
        "trials": int(trials),
        "seed": int(seed),
        "baseline": bool(baseline),
        "verify": bool(verify),
        "timing": bool(timing),
        "points": [],
    }
    csv_paths = []
    all_records = []

    if kind == "tradeoff":
        summary["lambda_step"] = float(lambda_step)
        records = []
        lambdas = None
        for t in range(trials):
            drop_seed = seed + t
            real = generate_drop(cfg, drop_seed)
            pts = sweep(real, lambda_step=lambda_step, backend=backend)
            lambdas = [p.lambda1 for p in pts]
            for p in pts:
                r = RunRecord.from_point(drop_seed, "proposed", p, timing=timing)
                if verify:
                    _verify_point(r, p, real)
                records.append(r)
            if baseline:
                for p in baseline_sweep(real, lambda_step=lambda_step, backend=backend):
                    r = RunRecord.from_point(drop_seed, "baseline", p, timing=timing)
                    if verify:
                        _verify_point(r, p, real)
                    records.append(r)
            _progress(f"[tradeoff] drop {t + 1}/{trials} (seed {drop_seed}) done")
        csv_paths.append(emit_csv(records, out / "tradeoff.csv"))
        for lam1 in lambdas or []:
            entry = {"lambda1": lam1}
            for scheme in ("proposed", "baseline") if baseline else ("proposed",):
                sub = [r for r in records if r.scheme == scheme and r.lambda1 == lam1]
                entry[scheme] = aggregate(sub, timing=timing, verify=verify)
            summary["points"].append(entry)
        all_records = records
    else:
        field, default_grid, lab = EXPERIMENTS[kind]
        values = [float(v) for v in (default_grid if grid is None else grid)]
        summary["grid_field"] = field
        summary["lambda1"] = float(lambda1)
        for value in values:
            cfg_v = cfg.replace(**{field: value})
            records = []
            for t in range(trials):
                drop_seed = seed + t
                real = generate_drop(cfg_v, drop_seed)
                p = tradeoff_point(real, lambda1=lambda1, backend=backend)
                r = RunRecord.from_point(drop_seed, "proposed", p, timing=timing)
                if verify:
                    _verify_point(r, p, real)
                records.append(r)
                if baseline:
                    bp = baseline_point(real, lambda1=lambda1, backend=backend)
                    rb = RunRecord.from_point(drop_seed, "baseline", bp, timing=timing)
                    if verify:
                        _verify_point(rb, bp, real)
                    records.append(rb)
            name = f"{prefix}_{lab}_{_label(value)}"
            csv_paths.append(emit_csv(records, out / f"{name}.csv"))
            entry = {"value": value, "label": f"{lab}_{_label(value)}",
                     "csv": f"{name}.csv"}
            for scheme in ("proposed", "baseline") if baseline else ("proposed",):
                sub = [r for r in records if r.scheme == scheme]
                entry[scheme] = aggregate(sub, timing=timing, verify=verify)
            summary["points"].append(entry)
            all_records.extend(records)
            _progress(f"[{kind}] {field}={value:g} done "
                      f"({entry['proposed']['n_feasible']}/{trials} feasible)")

    summary_path = out / f"{prefix}_summary.json"
    with open(summary_path, "w", newline="\n") as fh:
        json.dump(_round9(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {"records": all_records, "csv_paths": csv_paths,
            "summary_path": summary_path, "summary": summary}
